"""Manufacturing cost prediction from 2D DXF engineering drawings."""

from .dxf import Drawing, QuantitySet, extract_quantities, load_drawing, parse_drawing, tokenize_dxf, write_dxf
from .features import DrawingFeaturizer, featurize
from .gbdt import GBDTRegressor, GbdtModel, TrainParams, fit_gbdt
from .group_ref import GroupReference, fit_group_reference
from .pipeline import CostRegressor

__version__ = "0.1.0"

__all__ = [
    "CostRegressor", "Drawing", "DrawingFeaturizer", "GBDTRegressor", "GbdtModel",
    "GroupReference", "QuantitySet", "TrainParams", "extract_quantities", "featurize",
    "fit_gbdt", "fit_group_reference", "load_drawing", "parse_drawing", "tokenize_dxf",
    "write_dxf",
]
