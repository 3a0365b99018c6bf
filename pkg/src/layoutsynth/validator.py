"""Independent geometric validator.

Re-implements the committed semantics of every constraint directly on concrete
per-element rectangles and the layout's bindings, with no use of the resolver
or its interval machinery.  The search must never emit a layout this module
rejects; tests enforce that agreement.
"""

from __future__ import annotations

import itertools

from .domains import (
    COMPATIBLE_ALIGNMENTS,
    AlignmentAxis,
    Arrangement,
    DomainConfig,
    SizeTriple,
    VariableStore,
)
from .layout import Layout
from .model import DesignSpec, Element, Emphasis, Group, GroupKind, Node

Rect = tuple[int, int, int, int]  # (left, top, right, bottom)


def _rect(geom: tuple) -> Rect:
    x, y, w, h = geom
    return (x, y, x + w, y + h)


def _hull(rects: list[Rect]) -> Rect:
    return (min(r[0] for r in rects), min(r[1] for r in rects),
            max(r[2] for r in rects), max(r[3] for r in rects))


def _overlap(a: Rect, b: Rect) -> bool:
    return a[0] < b[2] and b[0] < a[2] and a[1] < b[3] and b[1] < a[3]


def _box_gap(a: Rect, b: Rect) -> int:
    dx = max(b[0] - a[2], a[0] - b[2])
    dy = max(b[1] - a[3], a[1] - b[3])
    return max(dx, dy)


def _cluster(rects: list[Rect], lo: int, hi: int) -> list[list[int]]:
    """Indices grouped into maximal runs by interval overlap on one axis."""
    order = sorted(range(len(rects)), key=lambda i: rects[i][lo])
    bands: list[list[int]] = []
    band_end: int | None = None
    for i in order:
        if band_end is None or rects[i][lo] >= band_end:
            bands.append([i])
            band_end = rects[i][hi]
        else:
            bands[-1].append(i)
            band_end = max(band_end, rects[i][hi])
    return bands


def _align_coord(rect: Rect, axis: AlignmentAxis) -> int:
    if axis is AlignmentAxis.LEFT:
        return rect[0]
    if axis is AlignmentAxis.RIGHT:
        return rect[2]
    if axis is AlignmentAxis.X_CENTER:
        return rect[0] + rect[2]
    if axis is AlignmentAxis.TOP:
        return rect[1]
    if axis is AlignmentAxis.BOTTOM:
        return rect[3]
    return rect[1] + rect[3]


class _LayoutView:
    """Concrete geometry lookup for every node active in one layout."""

    def __init__(self, spec: DesignSpec, layout: Layout):
        self.spec = spec
        self.layout = layout
        self.geometry = layout.geometry
        self.representations = layout.representations

    def is_active(self, node: Node) -> bool:
        if isinstance(node, Element):
            return node.id in self.geometry
        return True

    def node_rect(self, node: Node) -> Rect | None:
        if isinstance(node, Element):
            geom = self.geometry.get(node.id)
            return _rect(geom) if geom is not None else None
        if node.kind is GroupKind.ALTERNATE:
            chosen = self.representations.get(node.id)
            geom = self.geometry.get(chosen) if chosen else None
            return _rect(geom) if geom is not None else None
        rects = [r for r in (self.node_rect(c) for c in node.children) if r is not None]
        return _hull(rects) if rects else None

    def member_rects(self, group: Group) -> list[Rect] | None:
        rects = []
        for child in group.children:
            r = self.node_rect(child)
            if r is None:
                return None
            rects.append(r)
        return rects


def validate_layout(spec: DesignSpec, store: VariableStore, layout: Layout) -> list[str]:
    """Every violated rule as a short diagnostic string; empty means valid."""
    out: list[str] = []
    config = store.config
    bindings = layout.bindings
    view = _LayoutView(spec, layout)
    W, H = spec.canvas.width, spec.canvas.height

    margin = bindings["canvas.margin"]
    columns = bindings["canvas.columns"]
    gutter = bindings["canvas.gutter_width"]
    column_width = bindings["canvas.column_width"]
    baseline = bindings["canvas.baseline_grid"]

    # Layout grid arithmetic.
    if 2 * margin + columns * column_width + (columns - 1) * gutter != W:
        out.append("grid-arith: margins, columns, and gutters do not tile the canvas width")
    starts = {margin + i * (column_width + gutter) for i in range(columns)}
    ends = {s + column_width for s in starts}

    # Alternate bookkeeping: active set must equal the representation choices.
    expected_active = set()
    for node in spec.elements.values():
        expected_active.add(node.id)
    for group in spec.groups.values():
        if group.kind is GroupKind.ALTERNATE:
            chosen = layout.representations.get(group.id)
            member_ids = {c.id for c in group.children}
            if chosen not in member_ids:
                out.append(f"alternate: {group.id} selects unknown member {chosen!r}")
            expected_active -= member_ids - ({chosen} if chosen else set())
    if set(layout.geometry) != expected_active:
        out.append("alternate: geometry does not match the representation choices")
        return out

    # Per-element checks.
    for eid, geom in layout.geometry.items():
        x, y, w, h = geom
        element = spec.elements[eid]
        if not (margin <= x and x + w <= W - margin and 0 <= y and y + h <= H):
            out.append(f"bounds: {eid} leaves the canvas or its margins")
        if y % baseline != 0:
            out.append(f"baseline: {eid} y={y} is off the baseline grid")
        if h % baseline != 0:
            out.append(f"baseline: {eid} height={h} is not a baseline multiple")
        if element.kind in config.touch_kinds:
            if w < config.touch_minimum or h < config.touch_minimum:
                out.append(f"min-size: touch target {eid} is below "
                           f"{config.touch_minimum}x{config.touch_minimum}")
        size: SizeTriple = bindings[f"{eid}.size"]
        if (size.width, size.height) != (w, h):
            out.append(f"geometry: {eid} rect disagrees with its size binding")

    # Pairwise non-overlap over active elements.
    rects = {eid: _rect(g) for eid, g in layout.geometry.items()}
    for a, b in itertools.combinations(sorted(rects), 2):
        if _overlap(rects[a], rects[b]):
            out.append(f"overlap: {a} and {b} intersect")

    # Canvas children snap to the column grid.
    for child in spec.canvas.children:
        r = view.node_rect(child)
        if r is None:
            continue
        if r[0] not in starts or r[2] not in ends:
            out.append(f"grid: {child.id} does not begin and end on column edges")

    # Group semantics.
    for group in spec.groups.values():
        if group.kind is GroupKind.ALTERNATE or len(group.children) < 2:
            continue
        out.extend(_check_group(view, group, bindings))

    # Visual hierarchy between sibling groups.
    sibling_sets = [spec.canvas.children] + [g.children for g in spec.groups.values()]
    for siblings in sibling_sets:
        group_sibs = [c for c in siblings if isinstance(c, Group)]
        for g, s in itertools.permutations(group_sibs, 2):
            rg, rs = view.node_rect(g), view.node_rect(s)
            if rg is None or rs is None:
                continue
            pad = bindings[f"{g.id}.padding"]
            if _box_gap(rg, rs) < pad + baseline:
                out.append(f"hierarchy: {g.id} is closer to {s.id} than its padding allows")

    # Canvas ordering and first/last.
    out.extend(_check_canvas_order(spec, view))

    # Emphasis.
    out.extend(_check_emphasis(spec, view))

    # Repeat consistency.
    for group in spec.groups.values():
        if group.kind is GroupKind.REPEAT:
            out.extend(_check_repeat(group, bindings))

    return out


def _check_group(view: _LayoutView, group: Group, bindings: dict) -> list[str]:
    out: list[str] = []
    rects = view.member_rects(group)
    if rects is None:
        return [f"group: {group.id} has members without geometry"]
    arrangement = Arrangement(bindings[f"{group.id}.arrangement"])
    alignment = AlignmentAxis(bindings[f"{group.id}.alignment"])
    padding = bindings[f"{group.id}.padding"]

    if alignment not in COMPATIBLE_ALIGNMENTS[arrangement]:
        out.append(f"alignment: {group.id} pairs {alignment.value} with {arrangement.value}")
        return out

    if arrangement is Arrangement.HORIZONTAL:
        order = sorted(range(len(rects)), key=lambda i: rects[i][0])
        for i, j in zip(order, order[1:]):
            if rects[j][0] - rects[i][2] != padding:
                out.append(f"padding: gap inside {group.id} differs from its padding")
                break
        for a, b in itertools.combinations(rects, 2):
            if not (a[2] <= b[0] or b[2] <= a[0]):
                out.append(f"arrangement: {group.id} is not a horizontal flow")
                break
        coords = {_align_coord(r, alignment) for r in rects}
        if len(coords) > 1:
            out.append(f"alignment: members of {group.id} do not share the "
                       f"{alignment.value} axis")
        if group.order_important and [group.children[i].id for i in order] != \
                [c.id for c in group.children]:
            out.append(f"order: {group.id} does not follow the outline order")
        out.extend(_check_endpoints(group, [group.children[i].id for i in order]))
    elif arrangement is Arrangement.VERTICAL:
        order = sorted(range(len(rects)), key=lambda i: rects[i][1])
        for i, j in zip(order, order[1:]):
            if rects[j][1] - rects[i][3] != padding:
                out.append(f"padding: gap inside {group.id} differs from its padding")
                break
        for a, b in itertools.combinations(rects, 2):
            if not (a[3] <= b[1] or b[3] <= a[1]):
                out.append(f"arrangement: {group.id} is not a vertical flow")
                break
        coords = {_align_coord(r, alignment) for r in rects}
        if len(coords) > 1:
            out.append(f"alignment: members of {group.id} do not share the "
                       f"{alignment.value} axis")
        if group.order_important and [group.children[i].id for i in order] != \
                [c.id for c in group.children]:
            out.append(f"order: {group.id} does not follow the outline order")
        out.extend(_check_endpoints(group, [group.children[i].id for i in order]))
    else:
        out.extend(_check_balanced(view, group, rects, arrangement, alignment, padding))
    return out


def _check_balanced(view: _LayoutView, group: Group, rects: list[Rect],
                    arrangement: Arrangement, alignment: AlignmentAxis,
                    padding: int) -> list[str]:
    out: list[str] = []
    rows = arrangement is Arrangement.ROWS
    band_lo, band_hi = (1, 3) if rows else (0, 2)
    flow_lo, flow_hi = (0, 2) if rows else (1, 3)
    bands = _cluster(rects, band_lo, band_hi)
    sizes = {len(b) for b in bands}
    if len(bands) < 2 or len(sizes) != 1 or sizes == {1}:
        out.append(f"arrangement: {group.id} does not split into balanced runs")
        return out
    anchors = set()
    extents = set()
    sequence: list[str] = []
    for band in bands:
        members = sorted(band, key=lambda i: rects[i][flow_lo])
        sequence.extend(group.children[i].id for i in members)
        for i, j in zip(members, members[1:]):
            if rects[j][flow_lo] - rects[i][flow_hi] != padding:
                out.append(f"padding: run gap inside {group.id} differs from its padding")
        for a, b in itertools.combinations((rects[i] for i in band), 2):
            if rows and not (a[2] <= b[0] or b[2] <= a[0]):
                out.append(f"arrangement: run members of {group.id} overlap in x")
            if not rows and not (a[3] <= b[1] or b[3] <= a[1]):
                out.append(f"arrangement: run members of {group.id} overlap in y")
        coords = {_align_coord(rects[i], alignment) for i in band}
        if len(coords) > 1:
            out.append(f"alignment: run members of {group.id} are misaligned")
        lo = min(rects[i][flow_lo] for i in band)
        hi = max(rects[i][flow_hi] for i in band)
        anchors.add(lo)
        extents.add(hi - lo)
    if len(anchors) > 1 or len(extents) > 1:
        out.append(f"arrangement: runs of {group.id} have unequal extents")
    for prev, nxt in zip(bands, bands[1:]):
        prev_end = max(rects[i][band_hi] for i in prev)
        nxt_start = min(rects[i][band_lo] for i in nxt)
        if nxt_start - prev_end != padding:
            out.append(f"padding: run spacing inside {group.id} differs from its padding")
    if group.order_important and sequence != [c.id for c in group.children]:
        out.append(f"order: {group.id} does not follow the outline order")
    out.extend(_check_endpoints(group, sequence))
    return out


def _check_endpoints(group: Group, sequence: list[str]) -> list[str]:
    out = []
    if group.first is not None and sequence and sequence[0] != group.first:
        out.append(f"first: {group.first} is not first in {group.id}")
    if group.last is not None and sequence and sequence[-1] != group.last:
        out.append(f"last: {group.last} is not last in {group.id}")
    return out


def _check_canvas_order(spec: DesignSpec, view: _LayoutView) -> list[str]:
    out = []
    children = spec.canvas.children
    boxes = {c.id: view.node_rect(c) for c in children}
    if spec.canvas.order_important:
        for a, b in itertools.combinations(children, 2):
            ra, rb = boxes[a.id], boxes[b.id]
            if ra is not None and rb is not None and ra[3] > rb[3]:
                out.append(f"order: {a.id} ends below the later {b.id}")
    for role, ref in (("first", spec.canvas.first), ("last", spec.canvas.last)):
        if ref is None or boxes.get(ref) is None:
            continue
        for other in children:
            if other.id == ref or boxes[other.id] is None:
                continue
            if role == "first" and not boxes[ref][1] < boxes[other.id][1]:
                out.append(f"first: {ref} does not start above {other.id}")
            if role == "last" and not boxes[ref][3] > boxes[other.id][3]:
                out.append(f"last: {ref} does not end below {other.id}")
    return out


def _reading_earlier(a: Rect, b: Rect) -> bool:
    return (a[1], a[0]) < (b[1], b[0])


def _check_emphasis(spec: DesignSpec, view: _LayoutView) -> list[str]:
    out = []
    nodes = list(spec.elements.values()) + list(spec.groups.values())
    units: list[Node] = [
        e for e in spec.elements.values()
        if not any(e.id in {c.id for c in g.children}
                   for g in spec.groups.values() if g.kind is GroupKind.ALTERNATE)
    ] + [g for g in spec.groups.values() if g.kind is GroupKind.ALTERNATE]
    subtree: dict[str, set] = {}

    def collect(node: Node) -> set:
        ids = {node.id}
        if isinstance(node, Group):
            for c in node.children:
                ids |= collect(c)
        subtree[node.id] = ids
        return ids

    for child in spec.canvas.children:
        collect(child)

    for node in nodes:
        if node.emphasis is Emphasis.NORMAL:
            continue
        rect = view.node_rect(node)
        if rect is None:
            continue
        high = node.emphasis is Emphasis.HIGH
        for element in spec.elements.values():
            if element.id not in subtree[node.id]:
                continue
            geom = view.geometry.get(element.id)
            if geom is None:
                continue
            area = geom[2] * geom[3]
            base = element.width * element.height
            if high and area < base:
                out.append(f"emphasis: {element.id} shrank despite high emphasis")
            if not high and area > base:
                out.append(f"emphasis: {element.id} grew despite low emphasis")
        for unit in units:
            if unit.id in subtree[node.id] or node.id in subtree.get(unit.id, set()):
                continue
            if unit.emphasis is node.emphasis:
                continue
            other = view.node_rect(unit)
            if other is None:
                continue
            nw, nh = rect[2] - rect[0], rect[3] - rect[1]
            ow, oh = other[2] - other[0], other[3] - other[1]
            if high:
                if not (nw > ow or nh > oh):
                    out.append(f"emphasis: {node.id} is not larger than {unit.id} on any side")
                if not (nw * nh > ow * oh or _reading_earlier(rect, other)):
                    out.append(f"emphasis: {node.id} is neither bigger nor earlier than {unit.id}")
            else:
                if not (nw < ow or nh < oh):
                    out.append(f"emphasis: {node.id} is not smaller than {unit.id} on any side")
                if not (nw * nh < ow * oh or _reading_earlier(other, rect)):
                    out.append(f"emphasis: {node.id} is neither smaller nor later than {unit.id}")
    return out


def _check_repeat(group: Group, bindings: dict) -> list[str]:
    out = []
    subgroups = [c for c in group.children if isinstance(c, Group)]
    lead = subgroups[0]

    def compare(a: Group, b: Group) -> None:
        for name in ("arrangement", "alignment", "padding"):
            if bindings[f"{a.id}.{name}"] != bindings[f"{b.id}.{name}"]:
                out.append(f"repeat: {name} of {b.id} differs from {a.id}")
        for ca, cb in zip(a.children, b.children):
            if isinstance(ca, Element) and isinstance(cb, Element):
                fa = bindings[f"{ca.id}.size"].factor
                fb = bindings[f"{cb.id}.size"].factor
                if fa != fb:
                    out.append(f"repeat: sizing factor of {cb.id} differs from {ca.id}")
            elif isinstance(ca, Group) and isinstance(cb, Group):
                compare(ca, cb)

    for sub in subgroups[1:]:
        compare(lead, sub)
    return out
