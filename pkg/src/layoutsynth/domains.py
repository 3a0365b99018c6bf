"""Solver variables and their precomputed finite domains.

Every variable the search can assign lives here: five canvas variables
(margin, columns, gutter width, column width, baseline grid), three layout
variables per group (arrangement, alignment, padding), a size / x / y triple
per element, and one representation variable per alternate group.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .model import (
    Canvas,
    DesignSpec,
    Element,
    ElementKind,
    Group,
    GroupKind,
    ResizeStrategy,
    iter_groups,
)

# Size stepping happens on a fixed 4 px increment; the baseline_grid variable
# still governs which y positions and heights a layout may actually use.
SIZE_STEP = 4


class VarName(str, Enum):
    MARGIN = "margin"
    COLUMNS = "columns"
    GUTTER_WIDTH = "gutter_width"
    COLUMN_WIDTH = "column_width"
    BASELINE_GRID = "baseline_grid"
    ARRANGEMENT = "arrangement"
    ALIGNMENT = "alignment"
    PADDING = "padding"
    SIZE = "size"
    X = "x"
    Y = "y"
    REPRESENTATION = "representation"


class Arrangement(str, Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"
    ROWS = "rows"
    COLUMNS = "columns"


class AlignmentAxis(str, Enum):
    LEFT = "left"
    X_CENTER = "x-center"
    RIGHT = "right"
    TOP = "top"
    Y_CENTER = "y-center"
    BOTTOM = "bottom"


ARRANGEMENTS = tuple(Arrangement)
ALIGNMENTS = tuple(AlignmentAxis)

# Which alignment axes make sense for each arrangement: a horizontal flow
# aligns on the row axis, a vertical flow on the column axis; balanced
# rows/columns align per run on the same cross axis as their flow.
COMPATIBLE_ALIGNMENTS: dict[Arrangement, tuple[AlignmentAxis, ...]] = {
    Arrangement.HORIZONTAL: (AlignmentAxis.TOP, AlignmentAxis.Y_CENTER, AlignmentAxis.BOTTOM),
    Arrangement.ROWS: (AlignmentAxis.TOP, AlignmentAxis.Y_CENTER, AlignmentAxis.BOTTOM),
    Arrangement.VERTICAL: (AlignmentAxis.LEFT, AlignmentAxis.X_CENTER, AlignmentAxis.RIGHT),
    Arrangement.COLUMNS: (AlignmentAxis.LEFT, AlignmentAxis.X_CENTER, AlignmentAxis.RIGHT),
}


@dataclass(frozen=True, order=True)
class SizeTriple:
    width: int
    height: int
    factor: int

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.width, self.height, self.factor)


@dataclass(frozen=True)
class DomainConfig:
    """Curated value sets for canvas and group variables; overridable for tests."""

    margins: tuple[int, ...] = (8, 16, 24, 32)
    columns: tuple[int, ...] = (2, 3, 4)
    gutters: tuple[int, ...] = (4, 8, 16)
    baselines: tuple[int, ...] = (4, 8)
    paddings: tuple[int, ...] = (4, 8, 16, 24, 32, 40, 48)
    min_widths: dict = field(default_factory=lambda: {
        ElementKind.BUTTON: 48,
        ElementKind.FIELD: 48,
        ElementKind.ICON: 16,
        ElementKind.IMAGE: 48,
        ElementKind.TEXT: 16,
        ElementKind.OTHER: 16,
    })
    touch_kinds: tuple[ElementKind, ...] = (ElementKind.BUTTON, ElementKind.FIELD)
    touch_minimum: int = 48


DEFAULT_CONFIG = DomainConfig()


class DomainError(Exception):
    pass


@dataclass(frozen=True)
class Variable:
    index: int
    id: str
    owner: str  # "canvas", a group id, or an element id
    name: VarName
    domain: tuple


class VariableStore:
    """Immutable collection of variables indexed by id and by (owner, name)."""

    def __init__(self, variables: list[Variable], config: DomainConfig):
        self.variables = tuple(variables)
        self.config = config
        self.by_id = {v.id: v for v in self.variables}
        self.by_owner_name = {(v.owner, v.name): v for v in self.variables}
        if len(self.by_owner_name) != len(self.variables):
            raise DomainError("duplicate (owner, name) variable")
        for v in self.variables:
            if not v.domain:
                raise DomainError(f"empty domain for {v.id}")

    def __len__(self) -> int:
        return len(self.variables)

    def __iter__(self):
        return iter(self.variables)

    def get(self, owner: str, name: VarName) -> Variable:
        return self.by_owner_name[(owner, name)]

    def maybe(self, owner: str, name: VarName) -> Variable | None:
        return self.by_owner_name.get((owner, name))


def var_id(owner: str, name: VarName) -> str:
    return f"{owner}.{name.value}"


def _round_to_step(value: Fraction | int, step: int) -> int:
    # Nearest multiple of step, ties rounding up.
    q = Fraction(value) / step
    rounded = (q.numerator * 2 + q.denominator) // (q.denominator * 2)
    return max(step, int(rounded) * step)


def compute_size_domain(element: Element, canvas: Canvas,
                        config: DomainConfig = DEFAULT_CONFIG) -> list[SizeTriple]:
    """Precompute the (width, height, sizing_factor) ladder for an element.

    Widths step along the 4 px increment from the element's minimum (its
    intrinsic size, raised to the per-kind floor) up to the canvas width.
    Aspect-preserving elements scale height proportionally, rounded to the
    nearest increment; width-growing elements keep height fixed.
    """
    kind_min = config.min_widths.get(element.kind, SIZE_STEP)
    lo_w = _round_to_step(max(kind_min, element.width), SIZE_STEP)
    triples: list[SizeTriple] = []
    factor = 1
    if element.resize is ResizeStrategy.MAINTAIN_ASPECT_RATIO:
        ratio = Fraction(element.height, element.width)
        for w in range(lo_w, canvas.width + 1, SIZE_STEP):
            h = _round_to_step(w * ratio, SIZE_STEP)
            if h > canvas.height:
                break
            triples.append(SizeTriple(w, h, factor))
            factor += 1
    else:
        h = _round_to_step(element.height, SIZE_STEP)
        if h <= canvas.height:
            for w in range(lo_w, canvas.width + 1, SIZE_STEP):
                triples.append(SizeTriple(w, h, factor))
                factor += 1
    return triples


def column_grid(width: int, margin: int, columns: int, gutter: int) -> tuple[int, ...] | None:
    """Column left edges for a grid assignment, or None when the arithmetic
    does not yield an integral column width."""
    numerator = width - 2 * margin - (columns - 1) * gutter
    if numerator <= 0 or numerator % columns != 0:
        return None
    column_width = numerator // columns
    return tuple(margin + i * (column_width + gutter) for i in range(columns))


def valid_column_widths(canvas: Canvas, config: DomainConfig) -> tuple[int, ...]:
    widths = set()
    for m in config.margins:
        for c in config.columns:
            for g in config.gutters:
                numerator = canvas.width - 2 * m - (c - 1) * g
                if numerator > 0 and numerator % c == 0:
                    widths.add(numerator // c)
    return tuple(sorted(widths))


def position_domain(element: Element, canvas: Canvas, grid: dict,
                    config: DomainConfig = DEFAULT_CONFIG) -> tuple[list[int], list[int]]:
    """Admissible (x, y) lattice for an element under a concrete grid assignment.

    x values are column left edges with room for the element's minimum width
    inside the margins; y values are baseline multiples within the canvas.
    """
    margin = grid[VarName.MARGIN]
    starts = column_grid(canvas.width, margin, grid[VarName.COLUMNS], grid[VarName.GUTTER_WIDTH])
    if starts is None:
        raise DomainError("grid assignment has no integral column width")
    domain = compute_size_domain(element, canvas, config)
    min_w = domain[0].width if domain else element.width
    xs = [s for s in starts if s + min_w <= canvas.width - margin]
    baseline = grid[VarName.BASELINE_GRID]
    ys = list(range(0, canvas.height, baseline))
    return xs, ys


def build_variables(spec: DesignSpec, config: DomainConfig = DEFAULT_CONFIG) -> VariableStore:
    """Create every solver variable with its finite domain from a valid spec."""
    canvas = spec.canvas
    variables: list[Variable] = []

    def add(owner: str, name: VarName, domain) -> None:
        domain = tuple(domain)
        if not domain:
            raise DomainError(f"empty domain for {var_id(owner, name)}")
        variables.append(Variable(len(variables), var_id(owner, name), owner, name, domain))

    cw_domain = valid_column_widths(canvas, config)
    if not cw_domain:
        raise DomainError("no layout grid fits the canvas width")
    add("canvas", VarName.MARGIN, config.margins)
    add("canvas", VarName.COLUMNS, config.columns)
    add("canvas", VarName.GUTTER_WIDTH, config.gutters)
    add("canvas", VarName.COLUMN_WIDTH, cw_domain)
    add("canvas", VarName.BASELINE_GRID, config.baselines)

    for group in iter_groups(canvas.children):
        add(group.id, VarName.ARRANGEMENT, ARRANGEMENTS)
        add(group.id, VarName.ALIGNMENT, ALIGNMENTS)
        add(group.id, VarName.PADDING, config.paddings)
        if group.kind is GroupKind.ALTERNATE:
            add(group.id, VarName.REPRESENTATION, tuple(c.id for c in group.children))

    max_content = canvas.width - 2 * min(config.margins)
    min_baseline = min(config.baselines)
    for element in spec.elements.values():
        sizes = compute_size_domain(element, canvas, config)
        if not sizes or sizes[0].width > max_content:
            raise DomainError(f"element '{element.id}' cannot fit any column span")
        add(element.id, VarName.SIZE, sizes)
        xs = range(0, canvas.width - sizes[0].width + 1)
        ys = range(0, canvas.height - min(t.height for t in sizes) + 1, min_baseline)
        add(element.id, VarName.X, xs)
        add(element.id, VarName.Y, ys)

    return VariableStore(variables, config)
