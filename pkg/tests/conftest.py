import numpy as np
import pytest

from cadcost.dxf import extract_quantities, parse_drawing, tokenize_dxf, write_dxf
from cadcost.synth import SynthConfig, generate_samples


def reparse(drawing):
    """Write a drawing to DXF text and read it back."""
    return parse_drawing(tokenize_dxf(write_dxf(drawing)), group=drawing.group,
                         source_id=drawing.source_id)


@pytest.fixture(scope="session")
def small_corpus():
    """120 synthetic drawings as (quantity sets, costs, config)."""
    cfg = SynthConfig(n_drawings=120, seed=11)
    samples = generate_samples(cfg)
    lexicon = list(cfg.materials)
    qsets = [extract_quantities(reparse(s.drawing), lexicon) for s in samples]
    return qsets, np.array([s.cost for s in samples]), cfg


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
