"""Synthetic labeled DXF corpus with a known cost function.

Each drawing is generated in real-world units, then written in drawing
units divided by a random scale. Its rotated dimensions carry the real
lengths, so the parser can recover the scale. The cost label depends on a
handful of quantities through a fixed formula plus multiplicative noise.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .dxf import (ArcEntity, CircleEntity, DimensionEntity, Drawing, EllipseEntity, LineEntity,
                  QuantitySet, SplineEntity, write_dxf)

COST_MIN, COST_MAX = 0.50, 50.00
TOLERANCES = (0.01, 0.02, 0.05, 0.1, 0.2)


@dataclass(frozen=True)
class GroupTemplate:
    name: str
    lines: tuple[int, int] = (8, 30)
    arcs: tuple[int, int] = (2, 10)
    circles: tuple[int, int] = (3, 10)
    ellipses: tuple[int, int] = (0, 4)
    splines: tuple[int, int] = (0, 2)
    rotated: tuple[int, int] = (1, 4)
    diametric: tuple[int, int] = (1, 3)
    radial: tuple[int, int] = (0, 2)
    angular: tuple[int, int] = (0, 2)
    part_size: tuple[float, float] = (20.0, 200.0)
    max_radius: tuple[float, float] = (5.0, 40.0)
    scale: tuple[float, float] = (0.5, 4.0)
    tolerance_prob: float = 0.4
    fillet_prob: float = 0.5
    materials: tuple[str, ...] = ("C45", "TPU")


@dataclass(frozen=True)
class CostCoefficients:
    base: float = 1.0
    rotated_max: float = 0.04
    arc_angle_mean: float = 0.04
    ellipse_count: float = 1.2
    circle_std: float = 0.5


DEFAULT_GROUPS = (
    GroupTemplate("link_stabilizer"),
    GroupTemplate("tie_rod", lines=(15, 50), arcs=(3, 14), circles=(3, 8), ellipses=(0, 6),
                  splines=(0, 4), rotated=(1, 5), part_size=(60.0, 320.0),
                  materials=("C45", "42CrMo4")),
)


@dataclass(frozen=True)
class SynthConfig:
    n_drawings: int = 800
    groups: tuple[GroupTemplate, ...] = DEFAULT_GROUPS
    noise_pct: float = 0.05
    materials: dict[str, float] = field(
        default_factory=lambda: {"C45": 1.0, "TPU": 1.1, "42CrMo4": 1.05})
    coefficients: CostCoefficients = CostCoefficients()
    seed: int = 0

    def __post_init__(self):
        if self.n_drawings < 1:
            raise ValueError("n_drawings must be >= 1")
        if self.noise_pct < 0:
            raise ValueError("noise_pct must be >= 0")
        if not self.groups:
            raise ValueError("at least one group template is required")
        if any(m <= 0 for m in self.materials.values()):
            raise ValueError("material multipliers must be > 0")
        for t in self.groups:
            missing = set(t.materials) - set(self.materials)
            if missing:
                raise ValueError(f"group {t.name!r} uses unknown materials {sorted(missing)}")
            if t.rotated[0] < 1:
                raise ValueError(f"group {t.name!r} needs at least one rotated dimension")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        d = dict(d)
        if "groups" in d:
            d["groups"] = tuple(
                GroupTemplate(**{k: tuple(v) if isinstance(v, list) else v for k, v in g.items()})
                for g in d["groups"])
        if "coefficients" in d:
            d["coefficients"] = CostCoefficients(**d["coefficients"])
        return cls(**d)

    @classmethod
    def load(cls, path: str | Path) -> "SynthConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n", encoding="utf-8")


def _count(rng, bounds: tuple[int, int]) -> int:
    return int(rng.integers(bounds[0], bounds[1] + 1))


def _direction(rng) -> tuple[float, float]:
    phi = rng.uniform(0.0, 2.0 * math.pi)
    return math.cos(phi), math.sin(phi)


def generate_drawing(template: GroupTemplate, rng: np.random.Generator,
                     source_id: str = "synthetic") -> tuple[Drawing, QuantitySet, str]:
    """Random drawing for ``template`` plus its exact quantities and material."""
    s = float(rng.uniform(*template.scale))
    size = round(float(rng.uniform(*template.part_size)), 2)
    extent = size / s

    def origin():
        return (float(rng.uniform(0, extent)), float(rng.uniform(0, extent)))

    # line lengths get their own scale so they are not a proxy for the part size
    line_scale = float(rng.uniform(*template.part_size))
    lines, line_lengths = [], []
    for _ in range(_count(rng, template.lines)):
        length = line_scale * float(rng.uniform(0.05, 1.0))
        ux, uy = _direction(rng)
        x0, y0 = origin()
        lines.append(LineEntity((x0, y0), (x0 + ux * length / s, y0 + uy * length / s)))
        line_lengths.append(length)

    r_max = float(rng.uniform(*template.max_radius))
    arcs, arc_radii, arc_angles = [], [], []
    for _ in range(_count(rng, template.arcs)):
        r = float(rng.uniform(0.5, r_max))
        start = float(rng.uniform(0.0, 360.0))
        if rng.uniform() < template.fillet_prob:
            span = 90.0
        else:
            span = float(rng.uniform(15.0, 345.0))
        arcs.append(ArcEntity(origin(), r / s, start, (start + span) % 360.0))
        arc_radii.append(r)
        arc_angles.append(span)
    arc_lengths = [r * span * math.pi / 180.0 for r, span in zip(arc_radii, arc_angles)]

    # two radius families; the share of large holes moves the spread
    # independently of the min..max range
    small = float(rng.uniform(0.5, 0.5 * r_max))
    gap = float(rng.uniform(0.0, r_max))
    p_large = float(rng.uniform())
    circles, circle_radii = [], []
    for _ in range(_count(rng, template.circles)):
        r = small + (gap if rng.uniform() < p_large else 0.0) + float(rng.uniform(0.0, 0.05 * r_max))
        circles.append(CircleEntity(origin(), r / s))
        circle_radii.append(r)

    ellipses = []
    for _ in range(_count(rng, template.ellipses)):
        ux, uy = _direction(rng)
        a = float(rng.uniform(1.0, r_max)) / s
        ellipses.append(EllipseEntity(origin(), (ux * a, uy * a), float(rng.uniform(0.2, 1.0))))

    splines = []
    for _ in range(_count(rng, template.splines)):
        pts = tuple(origin() for _ in range(int(rng.integers(4, 8))))
        splines.append(SplineEntity(3, pts, ()))

    def override():
        if rng.uniform() < template.tolerance_prob:
            tol = TOLERANCES[int(rng.integers(len(TOLERANCES)))]
            return f"<> ±{tol}", tol
        return None, None

    dims, tolerances = [], []
    rotated = [size] + [round(size * float(rng.uniform(0.05, 0.5)), 2)
                        for _ in range(_count(rng, template.rotated) - 1)]
    for m in rotated:
        ux, uy = _direction(rng)
        a = origin()
        b = (a[0] + ux * m / s, a[1] + uy * m / s)
        text, tol = override()
        dims.append(DimensionEntity("Rotated", m, text, tol, a, b))
        tolerances.append(tol)
    diametric = [round(2 * circle_radii[int(rng.integers(len(circle_radii)))], 3)
                 if circle_radii else round(float(rng.uniform(1, 2 * r_max)), 3)
                 for _ in range(_count(rng, template.diametric))]
    radial = [round(arc_radii[int(rng.integers(len(arc_radii)))], 3)
              if arc_radii else round(float(rng.uniform(0.5, r_max)), 3)
              for _ in range(_count(rng, template.radial))]
    angular = [round(float(rng.uniform(5.0, 175.0)), 2) for _ in range(_count(rng, template.angular))]
    for kind, values in (("Diametric", diametric), ("Radial", radial), ("Angular", angular)):
        for m in values:
            text, tol = override()
            dims.append(DimensionEntity(kind, m, text, tol))
            tolerances.append(tol)

    material = template.materials[int(rng.integers(len(template.materials)))]
    texts = (f"Material: {material}", f"PART NO {source_id.upper().replace('_', '-')}")
    drawing = Drawing(source_id=source_id, group=template.name, lines=tuple(lines),
                      circles=tuple(circles), arcs=tuple(arcs), splines=tuple(splines),
                      ellipses=tuple(ellipses), dimensions=tuple(dims), texts=texts)
    truth = QuantitySet(
        line_lengths=tuple(line_lengths), arc_lengths=tuple(arc_lengths),
        arc_angles=tuple(arc_angles), circle_radii=tuple(circle_radii),
        rotated_measurements=tuple(rotated), angular_measurements=tuple(angular),
        diametric_measurements=tuple(diametric), radial_measurements=tuple(radial),
        tolerances=tuple(t for t in tolerances if t is not None),
        ellipse_count=len(ellipses), spline_count=len(splines), materials=(material,),
        scale=s, group=template.name, source_id=source_id,
    )
    return drawing, truth, material


def _mean(v: Sequence[float]) -> float:
    return float(np.mean(v)) if len(v) else 0.0


def _std(v: Sequence[float]) -> float:
    return float(np.std(v)) if len(v) else 0.0


def pre_clamp_cost(qs: QuantitySet, coefficients: CostCoefficients) -> float:
    c = coefficients
    rot = max(qs.rotated_measurements) if qs.rotated_measurements else 0.0
    return (c.base + c.rotated_max * rot + c.arc_angle_mean * _mean(qs.arc_angles)
            + c.ellipse_count * qs.ellipse_count + c.circle_std * _std(qs.circle_radii))


def true_cost(qs: QuantitySet, material: str, config: SynthConfig, noise: float = 0.0) -> float:
    """Clamped linear cost times the material multiplier times (1 + noise)."""
    cost = min(max(pre_clamp_cost(qs, config.coefficients), COST_MIN), COST_MAX)
    return cost * config.materials[material] * (1.0 + noise)


@dataclass
class SyntheticSample:
    drawing: Drawing
    truth: QuantitySet
    material: str
    noise: float
    cost: float


def generate_samples(config: SynthConfig) -> list[SyntheticSample]:
    """All drawings of the corpus, in memory; drawing i uses group i mod #groups."""
    samples = []
    width = max(5, len(str(config.n_drawings - 1)))
    for i in range(config.n_drawings):
        template = config.groups[i % len(config.groups)]
        rng = np.random.default_rng([config.seed, i])
        source_id = f"{template.name}_{i:0{width}d}"
        drawing, truth, material = generate_drawing(template, rng, source_id)
        noise = float(rng.normal(0.0, config.noise_pct)) if config.noise_pct > 0 else 0.0
        samples.append(SyntheticSample(drawing, truth, material, noise,
                                       true_cost(truth, material, config, noise)))
    return samples


def generate_corpus(config: SynthConfig, out_dir: str | Path) -> list[SyntheticSample]:
    """Write ``<source_id>.dxf`` files, labels.csv, lexicon.txt, ground_truth.json and config.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    samples = generate_samples(config)
    for smp in samples:
        (out / f"{smp.drawing.source_id}.dxf").write_text(write_dxf(smp.drawing), encoding="utf-8")
    with open(out / "labels.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["source_id", "group", "cost"])
        for smp in samples:
            w.writerow([smp.drawing.source_id, smp.drawing.group, repr(smp.cost)])
    (out / "lexicon.txt").write_text("\n".join(config.materials) + "\n", encoding="utf-8")
    truth = [{"source_id": smp.drawing.source_id, "material": smp.material, "noise": smp.noise,
              "cost": smp.cost, "quantities": smp.truth.to_dict()} for smp in samples]
    (out / "ground_truth.json").write_text(json.dumps(truth, indent=1) + "\n", encoding="utf-8")
    config.save(out / "config.json")
    return samples


def read_labels(path: str | Path) -> dict[str, tuple[str, float]]:
    """source_id -> (group, cost)."""
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out[row["source_id"]] = (row.get("group", ""), float(row["cost"]))
    return out
