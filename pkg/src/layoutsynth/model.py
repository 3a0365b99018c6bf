"""Designer-facing domain model: elements, groups, canvas, and the spec file format.

The spec file is versioned JSON: a canvas holding an ordered tree of elements
and groups, each node carrying per-node attributes.  Parsing applies defaults
(emphasis ``normal``, ``order_important`` false, resize strategy by kind) and
validation reports machine-readable violations with stable codes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Union

SPEC_VERSION = 1

DEFAULT_CANVAS_WIDTH = 360
DEFAULT_CANVAS_HEIGHT = 640


class ElementKind(str, Enum):
    TEXT = "text"
    IMAGE = "image"
    ICON = "icon"
    BUTTON = "button"
    FIELD = "field"
    OTHER = "other"


class ResizeStrategy(str, Enum):
    MAINTAIN_ASPECT_RATIO = "maintain_aspect_ratio"
    INCREASE_WIDTH = "increase_width"


class Emphasis(str, Enum):
    LOW = "low"
    NORMAL = "normal"
    HIGH = "high"


class GroupKind(str, Enum):
    PLAIN = "plain"
    REPEAT = "repeat"
    ALTERNATE = "alternate"


# Kinds that scale proportionally by default; the rest grow in width only.
ASPECT_KINDS = (ElementKind.IMAGE, ElementKind.ICON)


def default_resize(kind: ElementKind) -> ResizeStrategy:
    if kind in ASPECT_KINDS:
        return ResizeStrategy.MAINTAIN_ASPECT_RATIO
    return ResizeStrategy.INCREASE_WIDTH


@dataclass(frozen=True)
class Element:
    id: str
    kind: ElementKind
    width: int
    height: int
    resize: ResizeStrategy
    emphasis: Emphasis = Emphasis.NORMAL
    svg: str = ""


@dataclass(frozen=True)
class Group:
    id: str
    children: tuple["Node", ...]
    kind: GroupKind = GroupKind.PLAIN
    order_important: bool = False
    emphasis: Emphasis = Emphasis.NORMAL
    first: str | None = None
    last: str | None = None


Node = Union[Element, Group]


@dataclass(frozen=True)
class Canvas:
    width: int = DEFAULT_CANVAS_WIDTH
    height: int = DEFAULT_CANVAS_HEIGHT
    children: tuple[Node, ...] = ()
    order_important: bool = False
    first: str | None = None
    last: str | None = None


@dataclass(frozen=True)
class DesignSpec:
    canvas: Canvas
    version: int = SPEC_VERSION

    @property
    def elements(self) -> dict[str, Element]:
        return {e.id: e for e in iter_elements(self.canvas.children)}

    @property
    def groups(self) -> dict[str, Group]:
        return {g.id: g for g in iter_groups(self.canvas.children)}


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    subject: str

    def as_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "subject": self.subject}


class SpecError(Exception):
    pass


class SpecParseError(SpecError):
    """Malformed spec-file syntax or structure (bad JSON, wrong field types)."""

    def __init__(self, message: str, line: int | None = None, fieldname: str | None = None):
        self.line = line
        self.fieldname = fieldname
        where = []
        if line is not None:
            where.append(f"line {line}")
        if fieldname:
            where.append(f"field '{fieldname}'")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)


class SpecValidationError(SpecError):
    """Spec parsed but violates a model invariant."""

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(v.message for v in violations))


def iter_nodes(children: tuple[Node, ...]) -> Iterator[Node]:
    for child in children:
        yield child
        if isinstance(child, Group):
            yield from iter_nodes(child.children)


def iter_elements(children: tuple[Node, ...]) -> Iterator[Element]:
    for node in iter_nodes(children):
        if isinstance(node, Element):
            yield node


def iter_groups(children: tuple[Node, ...]) -> Iterator[Group]:
    for node in iter_nodes(children):
        if isinstance(node, Group):
            yield node


def kind_signature(node: Node):
    """Structural signature used to match repeat subgroups positionally."""
    if isinstance(node, Element):
        return node.kind.value
    return (node.kind.value,) + tuple(kind_signature(c) for c in node.children)


# ---------------------------------------------------------------------------
# Parsing / serialization


def _expect(cond: bool, message: str, fieldname: str | None = None) -> None:
    if not cond:
        raise SpecParseError(message, fieldname=fieldname)


def _parse_node(raw: dict, path: str) -> Node:
    _expect(isinstance(raw, dict), f"node at {path} must be an object", path)
    ntype = raw.get("type")
    _expect(ntype in ("element", "group"), f"node at {path} needs type 'element' or 'group'", "type")
    node_id = raw.get("id")
    _expect(isinstance(node_id, str) and node_id != "", f"node at {path} needs a string id", "id")

    if ntype == "element":
        kind_raw = raw.get("kind", "other")
        try:
            kind = ElementKind(kind_raw)
        except ValueError:
            raise SpecParseError(f"unknown element kind '{kind_raw}'", fieldname="kind") from None
        width = raw.get("width")
        height = raw.get("height")
        _expect(isinstance(width, int) and not isinstance(width, bool), f"element '{node_id}' needs integer width", "width")
        _expect(isinstance(height, int) and not isinstance(height, bool), f"element '{node_id}' needs integer height", "height")
        resize_raw = raw.get("resize")
        if resize_raw is None:
            resize = default_resize(kind)
        else:
            try:
                resize = ResizeStrategy(resize_raw)
            except ValueError:
                raise SpecParseError(f"unknown resize strategy '{resize_raw}'", fieldname="resize") from None
        emphasis = _parse_emphasis(raw, node_id)
        svg = raw.get("svg", "")
        _expect(isinstance(svg, str), f"element '{node_id}' svg must be a string", "svg")
        return Element(id=node_id, kind=kind, width=width, height=height,
                       resize=resize, emphasis=emphasis, svg=svg)

    gkind_raw = raw.get("kind", "plain")
    try:
        gkind = GroupKind(gkind_raw)
    except ValueError:
        raise SpecParseError(f"unknown group kind '{gkind_raw}'", fieldname="kind") from None
    children_raw = raw.get("children", [])
    _expect(isinstance(children_raw, list), f"group '{node_id}' children must be a list", "children")
    children = tuple(_parse_node(c, f"{path}/{node_id}[{i}]") for i, c in enumerate(children_raw))
    return Group(
        id=node_id,
        children=children,
        kind=gkind,
        order_important=bool(raw.get("order_important", False)),
        emphasis=_parse_emphasis(raw, node_id),
        first=raw.get("first"),
        last=raw.get("last"),
    )


def _parse_emphasis(raw: dict, node_id: str) -> Emphasis:
    value = raw.get("emphasis", "normal")
    try:
        return Emphasis(value)
    except ValueError:
        raise SpecParseError(f"unknown emphasis '{value}' on '{node_id}'", fieldname="emphasis") from None


def parse_spec(data: bytes | str) -> DesignSpec:
    """Parse and validate a spec file; raises SpecParseError / SpecValidationError."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    spec = spec_from_dict(raw)
    violations = validate_spec(spec)
    if violations:
        raise SpecValidationError(violations)
    return spec


def spec_from_dict(raw: dict) -> DesignSpec:
    _expect(isinstance(raw, dict), "spec root must be an object")
    version = raw.get("version", SPEC_VERSION)
    _expect(version == SPEC_VERSION, f"unsupported spec version {version!r}", "version")
    canvas_raw = raw.get("canvas")
    _expect(isinstance(canvas_raw, dict), "spec needs a 'canvas' object", "canvas")
    width = canvas_raw.get("width", DEFAULT_CANVAS_WIDTH)
    height = canvas_raw.get("height", DEFAULT_CANVAS_HEIGHT)
    _expect(isinstance(width, int) and not isinstance(width, bool), "canvas width must be an integer", "width")
    _expect(isinstance(height, int) and not isinstance(height, bool), "canvas height must be an integer", "height")
    children_raw = canvas_raw.get("children", [])
    _expect(isinstance(children_raw, list), "canvas children must be a list", "children")
    children = tuple(_parse_node(c, f"canvas[{i}]") for i, c in enumerate(children_raw))
    canvas = Canvas(
        width=width,
        height=height,
        children=children,
        order_important=bool(canvas_raw.get("order_important", False)),
        first=canvas_raw.get("first"),
        last=canvas_raw.get("last"),
    )
    return DesignSpec(canvas=canvas, version=version)


def _node_to_dict(node: Node) -> dict:
    if isinstance(node, Element):
        out: dict = {
            "type": "element",
            "id": node.id,
            "kind": node.kind.value,
            "width": node.width,
            "height": node.height,
            "resize": node.resize.value,
        }
        if node.emphasis is not Emphasis.NORMAL:
            out["emphasis"] = node.emphasis.value
        if node.svg:
            out["svg"] = node.svg
        return out
    out = {
        "type": "group",
        "id": node.id,
        "kind": node.kind.value,
        "children": [_node_to_dict(c) for c in node.children],
    }
    if node.order_important:
        out["order_important"] = True
    if node.emphasis is not Emphasis.NORMAL:
        out["emphasis"] = node.emphasis.value
    if node.first is not None:
        out["first"] = node.first
    if node.last is not None:
        out["last"] = node.last
    return out


def spec_to_dict(spec: DesignSpec) -> dict:
    canvas: dict = {
        "width": spec.canvas.width,
        "height": spec.canvas.height,
        "children": [_node_to_dict(c) for c in spec.canvas.children],
    }
    if spec.canvas.order_important:
        canvas["order_important"] = True
    if spec.canvas.first is not None:
        canvas["first"] = spec.canvas.first
    if spec.canvas.last is not None:
        canvas["last"] = spec.canvas.last
    return {"version": spec.version, "canvas": canvas}


def serialize_spec(spec: DesignSpec) -> bytes:
    return json.dumps(spec_to_dict(spec), indent=2).encode("utf-8")


# ---------------------------------------------------------------------------
# Validation


def validate_spec(spec: DesignSpec) -> list[Violation]:
    """Check every model invariant; an empty list means the spec is sound."""
    out: list[Violation] = []
    if spec.canvas.width <= 0 or spec.canvas.height <= 0:
        out.append(Violation("bad-canvas", "canvas dimensions must be positive", "canvas"))

    seen: set[str] = set()
    for node in iter_nodes(spec.canvas.children):
        if node.id in seen:
            out.append(Violation("duplicate-id", f"duplicate id: {node.id}", node.id))
        seen.add(node.id)
        if isinstance(node, Element):
            if node.width <= 0 or node.height <= 0:
                out.append(Violation("bad-dimension", f"element '{node.id}' needs positive intrinsic size", node.id))
        else:
            out.extend(_validate_group(node))

    out.extend(_validate_first_last(spec.canvas.children, spec.canvas.first, spec.canvas.last, "canvas"))
    return out


def _validate_group(group: Group) -> list[Violation]:
    out: list[Violation] = []
    out.extend(_validate_first_last(group.children, group.first, group.last, group.id))

    if group.kind is GroupKind.ALTERNATE:
        if len(group.children) < 2:
            out.append(Violation("alternate-too-few", "alternate group needs ≥2", group.id))
        for child in group.children:
            if not isinstance(child, Element):
                out.append(Violation("alternate-non-leaf",
                                     f"alternate group '{group.id}' may contain only elements", group.id))
                break
    elif group.kind is GroupKind.REPEAT:
        subgroups = [c for c in group.children if isinstance(c, Group)]
        if len(subgroups) != len(group.children) or any(s.kind is not GroupKind.PLAIN for s in subgroups):
            out.append(Violation("repeat-subgroup-not-group",
                                 f"repeat group '{group.id}' may contain only plain subgroups", group.id))
            return out
        if len(subgroups) < 2:
            out.append(Violation("repeat-too-few", "repeat group needs ≥2 subgroups", group.id))
            return out
        lead = subgroups[0]
        for sub in subgroups[1:]:
            if kind_signature(sub)[1:] != kind_signature(lead)[1:]:
                out.append(Violation("repeat-kind-mismatch", "repeat subgroup kind mismatch", group.id))
                break
            if sub.order_important != lead.order_important:
                out.append(Violation("repeat-order-mismatch",
                                     f"repeat subgroups of '{group.id}' disagree on order_important", group.id))
                break
        for sub in subgroups:
            for child in sub.children:
                if isinstance(child, Group):
                    if child.kind is not GroupKind.PLAIN:
                        out.append(Violation("repeat-nesting",
                                             f"group '{child.id}' inside repeat subgroup must be plain", group.id))
                    elif any(isinstance(g, Group) for g in child.children):
                        out.append(Violation("repeat-nesting",
                                             f"nesting below '{child.id}' exceeds one level inside a repeat subgroup",
                                             group.id))
    return out


def _validate_first_last(children: tuple[Node, ...], first: str | None, last: str | None,
                         owner: str) -> list[Violation]:
    out = []
    child_ids = {c.id for c in children}
    if first is not None and first not in child_ids:
        out.append(Violation("unknown-first", f"'{owner}' first refers to unknown child '{first}'", owner))
    if last is not None and last not in child_ids:
        out.append(Violation("unknown-last", f"'{owner}' last refers to unknown child '{last}'", owner))
    if first is not None and first == last:
        out.append(Violation("first-last-equal", f"'{owner}' first and last must differ", owner))
    return out


# ---------------------------------------------------------------------------
# Repeat-pattern inference


def infer_repeat_candidates(group: Group) -> list[list[list[int]]]:
    """Suggest repeat structure inside a plain group.

    Returns every partition of the children into ≥2 consecutive equal-length
    runs whose kind signatures match positionally, finest (shortest run) first.
    Each partition is a list of runs; each run lists child indices.
    """
    if group.kind is not GroupKind.PLAIN:
        return []
    n = len(group.children)
    signatures = [kind_signature(c) for c in group.children]
    partitions: list[list[list[int]]] = []
    for run_len in range(1, n // 2 + 1):
        if n % run_len != 0:
            continue
        runs = [list(range(i, i + run_len)) for i in range(0, n, run_len)]
        lead = [signatures[i] for i in runs[0]]
        if all([signatures[i] for i in run] == lead for run in runs[1:]):
            partitions.append(runs)
    return partitions
