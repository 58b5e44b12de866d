"""ASCII DXF reading and writing, plus per-drawing geometric quantities.

Only the ENTITIES section is read. Supported entity types are LINE, CIRCLE,
ARC, SPLINE, ELLIPSE, TEXT, MTEXT and DIMENSION; everything else is tallied
and skipped. Z coordinates are ignored, drawings are treated as 2D.
"""

from __future__ import annotations

import math
import re
import statistics
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

Point = tuple[float, float]

DIM_KINDS = ("Rotated", "Angular", "Diametric", "Radial", "Other")
_KIND_FROM_CODE = {0: "Rotated", 2: "Angular", 3: "Diametric", 4: "Radial"}
_CODE_FROM_KIND = {"Rotated": 0, "Angular": 2, "Diametric": 3, "Radial": 4, "Other": 1}
# bit 32 marks the dimension block as referenced by this dimension only
_DIM_BLOCK_FLAG = 32

_TOLERANCE_RE = re.compile(r"(?:±|%%[pP])\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)")
_TOKEN_RE = re.compile(r"[0-9A-Za-z]+")
_MTEXT_FORMAT_RE = re.compile(r"\\[PpNn~]|\\[A-Za-z][^;\\]*;|[{}]")


class DxfParseError(ValueError):
    """Raised when a file cannot be read as ASCII DXF at all."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class DxfTag:
    code: int
    value: str


@dataclass(frozen=True)
class LineEntity:
    start: Point
    end: Point


@dataclass(frozen=True)
class CircleEntity:
    center: Point
    radius: float


@dataclass(frozen=True)
class ArcEntity:
    center: Point
    radius: float
    start_angle: float
    end_angle: float


@dataclass(frozen=True)
class SplineEntity:
    degree: int
    control_points: tuple[Point, ...] = ()
    fit_points: tuple[Point, ...] = ()


@dataclass(frozen=True)
class EllipseEntity:
    center: Point
    major_axis_vector: Point
    axis_ratio: float


@dataclass(frozen=True)
class DimensionEntity:
    kind: str
    measurement: float
    text_override: str | None = None
    tolerance: float | None = None
    def_point_a: Point | None = None
    def_point_b: Point | None = None


@dataclass(frozen=True)
class Drawing:
    source_id: str
    group: str = ""
    lines: tuple[LineEntity, ...] = ()
    circles: tuple[CircleEntity, ...] = ()
    arcs: tuple[ArcEntity, ...] = ()
    splines: tuple[SplineEntity, ...] = ()
    ellipses: tuple[EllipseEntity, ...] = ()
    dimensions: tuple[DimensionEntity, ...] = ()
    texts: tuple[str, ...] = ()
    # parse bookkeeping, not geometry
    diagnostics: tuple[str, ...] = field(default=(), compare=False)
    skipped: tuple[tuple[str, int], ...] = field(default=(), compare=False)

    @property
    def n_entities(self) -> int:
        return (len(self.lines) + len(self.circles) + len(self.arcs) + len(self.splines)
                + len(self.ellipses) + len(self.dimensions) + len(self.texts))


@dataclass(frozen=True)
class QuantitySet:
    """Real-world-unit measurements of one drawing, the input to featurization."""

    line_lengths: tuple[float, ...] = ()
    arc_lengths: tuple[float, ...] = ()
    arc_angles: tuple[float, ...] = ()
    circle_radii: tuple[float, ...] = ()
    rotated_measurements: tuple[float, ...] = ()
    angular_measurements: tuple[float, ...] = ()
    diametric_measurements: tuple[float, ...] = ()
    radial_measurements: tuple[float, ...] = ()
    tolerances: tuple[float, ...] = ()
    ellipse_count: int = 0
    spline_count: int = 0
    materials: tuple[str, ...] = ()
    scale: float = 1.0
    group: str = ""
    source_id: str = ""

    LIST_FIELDS = (
        "line_lengths", "arc_lengths", "arc_angles", "circle_radii",
        "rotated_measurements", "angular_measurements", "diametric_measurements",
        "radial_measurements", "tolerances",
    )

    def to_dict(self) -> dict:
        d = {name: list(getattr(self, name)) for name in self.LIST_FIELDS}
        d.update(ellipse_count=self.ellipse_count, spline_count=self.spline_count,
                 materials=list(self.materials), scale=self.scale,
                 group=self.group, source_id=self.source_id)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "QuantitySet":
        kwargs = {name: tuple(float(v) for v in d.get(name, ())) for name in cls.LIST_FIELDS}
        return cls(**kwargs, ellipse_count=int(d.get("ellipse_count", 0)),
                   spline_count=int(d.get("spline_count", 0)),
                   materials=tuple(d.get("materials", ())), scale=float(d.get("scale", 1.0)),
                   group=str(d.get("group", "")), source_id=str(d.get("source_id", "")))


# ---------------------------------------------------------------------------
# tokenizing

def tokenize_dxf(text: str) -> list[DxfTag]:
    """Split DXF source into (group code, value) pairs.

    Trailing blank lines are tolerated; any other odd line count, or a code
    line that is not a non-negative integer, raises :class:`DxfParseError`
    carrying the 1-based line number.
    """
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if len(lines) % 2:
        raise DxfParseError("group code without a value", line=len(lines) + 1)
    tags = []
    for i in range(0, len(lines), 2):
        raw = lines[i].strip()
        try:
            code = int(raw)
        except ValueError:
            raise DxfParseError(f"invalid group code {raw!r}", line=i + 1) from None
        if code < 0:
            raise DxfParseError(f"negative group code {code}", line=i + 1)
        tags.append(DxfTag(code, lines[i + 1]))
    return tags


def read_dxf_text(path: str | Path) -> str:
    data = Path(path).read_bytes()
    if data.startswith(b"AutoCAD Binary DXF"):
        raise DxfParseError(f"{path}: binary DXF is not supported, export as ASCII DXF")
    if re.match(rb"AC10\d\d", data[:6]):
        raise DxfParseError(f"{path}: DWG files must be converted to ASCII DXF first")
    for enc in ("utf-8", "cp1252"):
        try:
            return data.decode(enc)
        except UnicodeDecodeError:
            continue
    return data.decode("latin-1")


def load_drawing(path: str | Path, group: str = "", source_id: str | None = None) -> Drawing:
    path = Path(path)
    tags = tokenize_dxf(read_dxf_text(path))
    return parse_drawing(tags, group=group, source_id=source_id or path.stem)


# ---------------------------------------------------------------------------
# parsing

class _Reject(Exception):
    pass


def _float(tags: dict[int, list[str]], code: int) -> float:
    if code not in tags:
        raise _Reject(f"missing group code {code}")
    try:
        v = float(tags[code][0].strip())
    except ValueError:
        raise _Reject(f"group code {code} is not a number: {tags[code][0]!r}") from None
    if not math.isfinite(v):
        raise _Reject(f"group code {code} is not finite")
    return v


def _point(tags, cx: int, cy: int) -> Point:
    return (_float(tags, cx), _float(tags, cy))


def _opt_point(tags, cx: int, cy: int) -> Point | None:
    if cx in tags and cy in tags:
        return _point(tags, cx, cy)
    return None


def _point_list(body: Sequence[DxfTag], cx: int, cy: int) -> tuple[Point, ...]:
    xs = [t.value for t in body if t.code == cx]
    ys = [t.value for t in body if t.code == cy]
    if len(xs) != len(ys):
        raise _Reject(f"unpaired coordinates for codes {cx}/{cy}")
    try:
        pts = tuple((float(x), float(y)) for x, y in zip(xs, ys))
    except ValueError:
        raise _Reject(f"non-numeric coordinate in codes {cx}/{cy}") from None
    if not all(math.isfinite(x) and math.isfinite(y) for x, y in pts):
        raise _Reject("non-finite spline point")
    return pts


def parse_tolerance(text: str | None) -> float | None:
    """Return the number following a ``±`` (or DXF ``%%p``) in ``text``."""
    if not text:
        return None
    m = _TOLERANCE_RE.search(text)
    return float(m.group(1)) if m else None


def _clean_mtext(s: str) -> str:
    return _MTEXT_FORMAT_RE.sub(" ", s)


def _build_entity(kind: str, body: list[DxfTag]):
    tags: dict[int, list[str]] = {}
    for t in body:
        tags.setdefault(t.code, []).append(t.value)

    if kind == "LINE":
        return LineEntity(_point(tags, 10, 20), _point(tags, 11, 21))
    if kind == "CIRCLE":
        r = _float(tags, 40)
        if r <= 0:
            raise _Reject(f"non-positive radius {r}")
        return CircleEntity(_point(tags, 10, 20), r)
    if kind == "ARC":
        r = _float(tags, 40)
        if r <= 0:
            raise _Reject(f"non-positive radius {r}")
        return ArcEntity(_point(tags, 10, 20), r, _float(tags, 50), _float(tags, 51))
    if kind == "SPLINE":
        degree = int(_float(tags, 71))
        if degree < 1:
            raise _Reject(f"invalid spline degree {degree}")
        control = _point_list(body, 10, 20)
        fit = _point_list(body, 11, 21)
        if not control and not fit:
            raise _Reject("spline without control or fit points")
        return SplineEntity(degree, control, fit)
    if kind == "ELLIPSE":
        major = _point(tags, 11, 21)
        ratio = _float(tags, 40)
        if math.hypot(*major) <= 0:
            raise _Reject("zero-length major axis")
        if not 0 < ratio <= 1:
            raise _Reject(f"axis ratio {ratio} outside (0, 1]")
        return EllipseEntity(_point(tags, 10, 20), major, ratio)
    if kind == "TEXT":
        if 1 not in tags:
            raise _Reject("missing group code 1")
        return tags[1][0]
    if kind == "MTEXT":
        chunks = [t.value for t in body if t.code in (1, 3)]
        if not chunks:
            raise _Reject("missing group code 1")
        return _clean_mtext("".join(chunks))
    if kind == "DIMENSION":
        flags = int(_float(tags, 70)) if 70 in tags else 0
        dim_kind = _KIND_FROM_CODE.get(flags & 7, "Other")
        measurement = _float(tags, 42)
        override = tags[1][0] if 1 in tags else None
        a = b = None
        if flags & 7 in (0, 1):
            a = _opt_point(tags, 13, 23)
            b = _opt_point(tags, 14, 24)
        return DimensionEntity(dim_kind, measurement, override, parse_tolerance(override), a, b)
    raise AssertionError(kind)


_SUPPORTED = {"LINE", "CIRCLE", "ARC", "SPLINE", "ELLIPSE", "TEXT", "MTEXT", "DIMENSION"}


def parse_drawing(tags: Sequence[DxfTag], group: str = "", source_id: str = "drawing") -> Drawing:
    """Build a :class:`Drawing` from the ENTITIES section of a tokenized file.

    A malformed entity is dropped and described in ``Drawing.diagnostics``;
    it never aborts the file. Unsupported entity types are counted in
    ``Drawing.skipped``.
    """
    if not source_id:
        raise ValueError("source_id must be non-empty")
    start = None
    for i in range(len(tags) - 1):
        if (tags[i].code == 0 and tags[i].value.strip() == "SECTION"
                and tags[i + 1].code == 2 and tags[i + 1].value.strip() == "ENTITIES"):
            start = i + 2
            break
    if start is None:
        raise DxfParseError(f"{source_id}: no ENTITIES section")

    buckets: dict[str, list] = {k: [] for k in _SUPPORTED}
    diagnostics: list[str] = []
    skipped: dict[str, int] = {}

    i = start
    n = len(tags)
    position = 0
    while i < n:
        tag = tags[i]
        if tag.code != 0:
            i += 1
            continue
        kind = tag.value.strip().upper()
        if kind in ("ENDSEC", "EOF"):
            break
        j = i + 1
        while j < n and tags[j].code != 0:
            j += 1
        body = list(tags[i + 1:j])
        position += 1
        if kind in _SUPPORTED:
            try:
                # TEXT and MTEXT share one list so texts keep file order
                buckets["TEXT" if kind == "MTEXT" else kind].append(_build_entity(kind, body))
            except (_Reject, ValueError) as exc:
                diagnostics.append(f"{source_id}: {kind} entity #{position}: {exc}")
        else:
            skipped[kind] = skipped.get(kind, 0) + 1
        i = j

    texts = buckets["TEXT"]
    return Drawing(
        source_id=source_id, group=group,
        lines=tuple(buckets["LINE"]), circles=tuple(buckets["CIRCLE"]), arcs=tuple(buckets["ARC"]),
        splines=tuple(buckets["SPLINE"]), ellipses=tuple(buckets["ELLIPSE"]),
        dimensions=tuple(buckets["DIMENSION"]), texts=tuple(texts),
        diagnostics=tuple(diagnostics), skipped=tuple(sorted(skipped.items())),
    )


# ---------------------------------------------------------------------------
# writing

def _num(v: float) -> str:
    return repr(float(v))


def _pt(cx: int, cy: int, p: Point) -> list[str]:
    return [str(cx), _num(p[0]), str(cy), _num(p[1])]


def _one_line(s: str) -> str:
    return s.replace("\r", " ").replace("\n", " ")


def write_dxf(drawing: Drawing) -> str:
    """Serialize ``drawing`` as a minimal ASCII DXF (ENTITIES section only).

    Floats are written with ``repr`` so that reading the file back yields
    the same values bit for bit. Texts become TEXT entities, or MTEXT when
    longer than 250 characters.
    """
    out = ["0", "SECTION", "2", "ENTITIES"]
    for e in drawing.lines:
        out += ["0", "LINE", "8", "0", *_pt(10, 20, e.start), "30", "0.0", *_pt(11, 21, e.end), "31", "0.0"]
    for e in drawing.circles:
        out += ["0", "CIRCLE", "8", "0", *_pt(10, 20, e.center), "40", _num(e.radius)]
    for e in drawing.arcs:
        out += ["0", "ARC", "8", "0", *_pt(10, 20, e.center), "40", _num(e.radius),
                "50", _num(e.start_angle), "51", _num(e.end_angle)]
    for e in drawing.splines:
        out += ["0", "SPLINE", "8", "0", "70", "8", "71", str(e.degree),
                "73", str(len(e.control_points)), "74", str(len(e.fit_points))]
        for p in e.control_points:
            out += _pt(10, 20, p)
        for p in e.fit_points:
            out += _pt(11, 21, p)
    for e in drawing.ellipses:
        out += ["0", "ELLIPSE", "8", "0", *_pt(10, 20, e.center), *_pt(11, 21, e.major_axis_vector),
                "40", _num(e.axis_ratio), "41", "0.0", "42", _num(2 * math.pi)]
    for e in drawing.dimensions:
        out += ["0", "DIMENSION", "8", "0", "70", str(_CODE_FROM_KIND[e.kind] | _DIM_BLOCK_FLAG)]
        if e.text_override is not None:
            out += ["1", _one_line(e.text_override)]
        out += ["42", _num(e.measurement)]
        if e.def_point_a is not None:
            out += _pt(13, 23, e.def_point_a)
        if e.def_point_b is not None:
            out += _pt(14, 24, e.def_point_b)
    for s in drawing.texts:
        s = _one_line(s)
        if len(s) <= 250:
            out += ["0", "TEXT", "8", "0", "10", "0.0", "20", "0.0", "40", "2.5", "1", s]
        else:
            out += ["0", "MTEXT", "8", "0", "10", "0.0", "20", "0.0", "40", "2.5"]
            chunks = [s[k:k + 250] for k in range(0, len(s), 250)]
            for c in chunks[:-1]:
                out += ["3", c]
            out += ["1", chunks[-1]]
    out += ["0", "ENDSEC", "0", "EOF"]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# geometry

def arc_span(arc: ArcEntity) -> float:
    """Counter-clockwise angular extent in degrees, in (0, 360]."""
    span = (arc.end_angle - arc.start_angle) % 360.0
    return 360.0 if span == 0 else span


def arc_length(arc: ArcEntity) -> float:
    return arc.radius * arc_span(arc) * math.pi / 180.0


def line_length(line: LineEntity) -> float:
    return math.hypot(line.end[0] - line.start[0], line.end[1] - line.start[1])


def compute_scale(drawing: Drawing) -> float:
    """Drawing-unit to real-world factor from rotated dimensions.

    Median of measurement / definition-point distance over every rotated
    dimension that has both definition points; 1.0 when none qualifies.
    """
    ratios = []
    for d in drawing.dimensions:
        if d.kind != "Rotated" or d.def_point_a is None or d.def_point_b is None:
            continue
        dist = math.hypot(d.def_point_b[0] - d.def_point_a[0], d.def_point_b[1] - d.def_point_a[1])
        if dist > 1e-9:
            ratios.append(d.measurement / dist)
    # a non-positive ratio would mean a corrupt measurement
    ratios = [r for r in ratios if r > 0 and math.isfinite(r)]
    if not ratios:
        return 1.0
    return float(statistics.median(ratios))


def _tokens(text: str) -> list[str]:
    return [t.lower() for t in _TOKEN_RE.findall(text)]


def match_materials(texts: Iterable[str], lexicon: Sequence[str]) -> tuple[str, ...]:
    """Lexicon entries found as whole tokens (case-insensitive) in ``texts``.

    Multi-word entries must appear as a contiguous token run. Results keep
    lexicon order and are de-duplicated.
    """
    token_lists = [_tokens(t) for t in texts]
    found = []
    for entry in lexicon:
        needle = _tokens(entry)
        if not needle:
            continue
        k = len(needle)
        for toks in token_lists:
            if any(toks[i:i + k] == needle for i in range(len(toks) - k + 1)):
                found.append(entry)
                break
    return tuple(found)


def load_lexicon(path: str | Path | None) -> list[str]:
    """One material per line; blank lines and ``#`` comments ignored."""
    if path is None:
        return []
    entries = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line and line not in entries:
            entries.append(line)
    return entries


def extract_quantities(drawing: Drawing, lexicon: Sequence[str] = ()) -> QuantitySet:
    scale = compute_scale(drawing)
    dims = {k: [] for k in DIM_KINDS}
    for d in drawing.dimensions:
        dims[d.kind].append(d.measurement)
    return QuantitySet(
        line_lengths=tuple(scale * line_length(e) for e in drawing.lines),
        arc_lengths=tuple(scale * arc_length(e) for e in drawing.arcs),
        arc_angles=tuple(arc_span(e) for e in drawing.arcs),
        circle_radii=tuple(scale * e.radius for e in drawing.circles),
        rotated_measurements=tuple(dims["Rotated"]),
        angular_measurements=tuple(dims["Angular"]),
        diametric_measurements=tuple(dims["Diametric"]),
        radial_measurements=tuple(dims["Radial"]),
        tolerances=tuple(d.tolerance for d in drawing.dimensions if d.tolerance is not None),
        ellipse_count=len(drawing.ellipses),
        spline_count=len(drawing.splines),
        materials=match_materials(drawing.texts, lexicon),
        scale=scale,
        group=drawing.group,
        source_id=drawing.source_id,
    )


def with_group(qs: QuantitySet, group: str) -> QuantitySet:
    return replace(qs, group=group)
