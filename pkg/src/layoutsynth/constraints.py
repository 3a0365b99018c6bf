"""Translates high-level design constraints into low-level arithmetic constraints.

Every constraint is a small structured record: an evaluator tag (``op``) with
prebound arguments over variable indices and node ids, a provenance pointing
back at the spec node or feedback item that produced it, and a human-readable
expression used by the dump format.  Guarded constraints apply only when their
guard atoms (variable == value) all hold; this is how alternate-group members
drop out of geometry checks for layouts that do not select them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator

from .domains import (
    COMPATIBLE_ALIGNMENTS,
    Arrangement,
    AlignmentAxis,
    VarName,
    Variable,
    VariableStore,
)
from .model import DesignSpec, Element, Group, GroupKind, Emphasis, Node, iter_groups


class ConstraintKind(str, Enum):
    STAY_IN_BOUNDS = "stay_in_bounds"
    NON_OVERLAP = "non_overlap"
    MINIMUM_SIZE = "minimum_size"
    LAYOUT_GRID = "layout_grid"
    BASELINE_GRID = "baseline_grid"
    ARRANGEMENT = "arrangement"
    ALIGNMENT = "alignment"
    PADDING = "padding"
    VISUAL_HIERARCHY = "visual_hierarchy"
    ORDERING = "ordering"
    FIRST_LAST = "first_last"
    EMPHASIS_SIZE_DIRECTION = "emphasis_size_direction"
    EMPHASIS_RELATIVE = "emphasis_relative"
    REPEAT_CONSISTENCY = "repeat_consistency"
    ALTERNATE_REPRESENTATION = "alternate_representation"
    FEEDBACK_KEEP = "feedback_keep"
    FEEDBACK_PREVENT = "feedback_prevent"
    BLOCKING = "blocking"


@dataclass(frozen=True)
class Constraint:
    id: str
    kind: ConstraintKind
    provenance: str
    op: str
    args: tuple
    scope: frozenset
    expression: str
    guard: tuple = ()  # ((var_index, required_value), ...)

    @property
    def is_feedback(self) -> bool:
        return self.kind in (ConstraintKind.FEEDBACK_KEEP, ConstraintKind.FEEDBACK_PREVENT)


class ConstraintSet:
    """Immutable, id-indexed collection of constraints."""

    def __init__(self, constraints: Iterable[Constraint]):
        self.constraints = tuple(constraints)
        self.by_id = {c.id: c for c in self.constraints}
        if len(self.by_id) != len(self.constraints):
            raise ValueError("constraint ids must be unique")

    def __iter__(self) -> Iterator[Constraint]:
        return iter(self.constraints)

    def __len__(self) -> int:
        return len(self.constraints)

    def extended(self, extra: Iterable[Constraint]) -> "ConstraintSet":
        return ConstraintSet(self.constraints + tuple(extra))

    def without_ids(self, ids: set) -> "ConstraintSet":
        return ConstraintSet(c for c in self.constraints if c.id not in ids)

    def without_provenance(self, provenances: set) -> "ConstraintSet":
        return ConstraintSet(c for c in self.constraints if c.provenance not in provenances)

    def dump(self) -> str:
        lines = [f"{c.id}\t{c.kind.value}\t{c.provenance}\t{c.expression}" for c in self.constraints]
        return "\n".join(lines)


class SpecIndex:
    """Precomputed structure shared by the encoder and the resolver.

    Holds variable indices per node, parent/child links, the list of "solid
    units" (elements outside alternate groups, plus alternate groups as a
    whole, whose box stands in for whichever member is selected).
    """

    def __init__(self, spec: DesignSpec, store: VariableStore):
        self.spec = spec
        self.store = store
        self.canvas = spec.canvas
        self.nodes: dict[str, Node] = {}
        self.parent: dict[str, str | None] = {}
        self.children: dict[str, tuple[str, ...]] = {}
        self.depth: dict[str, int] = {}

        def walk(node: Node, parent: str | None, depth: int) -> None:
            self.nodes[node.id] = node
            self.parent[node.id] = parent
            self.depth[node.id] = depth
            if isinstance(node, Group):
                self.children[node.id] = tuple(c.id for c in node.children)
                for child in node.children:
                    walk(child, node.id, depth + 1)

        for child in spec.canvas.children:
            walk(child, None, 0)
        self.canvas_children = tuple(c.id for c in spec.canvas.children)

        self.elem_vars: dict[str, tuple[int, int, int]] = {}  # id -> (x, y, size)
        for eid, element in spec.elements.items():
            self.elem_vars[eid] = (
                store.get(eid, VarName.X).index,
                store.get(eid, VarName.Y).index,
                store.get(eid, VarName.SIZE).index,
            )
        self.group_vars: dict[str, tuple[int, int, int]] = {}  # id -> (arr, align, pad)
        self.repr_var: dict[str, int] = {}
        for group in iter_groups(spec.canvas.children):
            self.group_vars[group.id] = (
                store.get(group.id, VarName.ARRANGEMENT).index,
                store.get(group.id, VarName.ALIGNMENT).index,
                store.get(group.id, VarName.PADDING).index,
            )
            if group.kind is GroupKind.ALTERNATE:
                self.repr_var[group.id] = store.get(group.id, VarName.REPRESENTATION).index

        self.alt_member: dict[str, str] = {}  # element id -> alternate group id
        for gid, group in spec.groups.items():
            if group.kind is GroupKind.ALTERNATE:
                for child in group.children:
                    self.alt_member[child.id] = gid

        # Solid units: the things that occupy space in any layout.
        self.units: tuple[str, ...] = tuple(
            [eid for eid in spec.elements if eid not in self.alt_member]
            + [gid for gid, g in spec.groups.items() if g.kind is GroupKind.ALTERNATE]
        )

        self.box_scope: dict[str, frozenset] = {}
        for child in spec.canvas.children:
            self._compute_box_scope(child)

        self.canvas_var = {
            name: store.get("canvas", name).index
            for name in (VarName.MARGIN, VarName.COLUMNS, VarName.GUTTER_WIDTH,
                         VarName.COLUMN_WIDTH, VarName.BASELINE_GRID)
        }

    def _compute_box_scope(self, node: Node) -> frozenset:
        if isinstance(node, Element):
            scope = frozenset(self.elem_vars[node.id])
        else:
            scope = frozenset()
            for child in node.children:
                scope |= self._compute_box_scope(child)
            if node.kind is GroupKind.ALTERNATE:
                scope |= {self.repr_var[node.id]}
        self.box_scope[node.id] = scope
        return scope

    def in_subtree(self, node_id: str, root_id: str) -> bool:
        cur: str | None = node_id
        while cur is not None:
            if cur == root_id:
                return True
            cur = self.parent[cur]
        return False

    def descendant_elements(self, node_id: str) -> list[Element]:
        node = self.nodes[node_id]
        if isinstance(node, Element):
            return [node]
        out: list[Element] = []
        for cid in self.children[node_id]:
            out.extend(self.descendant_elements(cid))
        return out

    def unit_emphasis(self, unit_id: str) -> Emphasis:
        return self.nodes[unit_id].emphasis

    def activity_guard(self, element_id: str) -> tuple:
        """Guard atoms making a constraint apply only while the element is active."""
        alt = self.alt_member.get(element_id)
        if alt is None:
            return ()
        return ((self.repr_var[alt], element_id),)


# ---------------------------------------------------------------------------
# Encoding operations


def _mk(kind: ConstraintKind, ident: str, provenance: str, op: str, args: tuple,
        scope: Iterable, expression: str, guard: tuple = ()) -> Constraint:
    full_scope = frozenset(scope) | {vi for vi, _ in guard}
    return Constraint(id=ident, kind=kind, provenance=provenance, op=op,
                      args=args, scope=full_scope, expression=expression, guard=guard)


def encode_basic_quality(spec: DesignSpec, store: VariableStore,
                         index: SpecIndex | None = None) -> list[Constraint]:
    """Stay-in-bounds, pairwise non-overlap, and touch-target minimum sizes."""
    idx = index or SpecIndex(spec, store)
    config = store.config
    W, H = spec.canvas.width, spec.canvas.height
    m_idx = idx.canvas_var[VarName.MARGIN]
    out: list[Constraint] = []

    for unit in idx.units:
        out.append(_mk(
            ConstraintKind.STAY_IN_BOUNDS, f"stay_in_bounds:{unit}", unit,
            "bounds", (unit, m_idx, W, H),
            idx.box_scope[unit] | {m_idx},
            f"margin ≤ left({unit}) ∧ right({unit}) ≤ W−margin ∧ 0 ≤ top({unit}) ∧ bottom({unit}) ≤ H",
        ))

    for i, a in enumerate(idx.units):
        for b in idx.units[i + 1:]:
            out.append(_mk(
                ConstraintKind.NON_OVERLAP, f"non_overlap:{a}|{b}", a,
                "no_overlap", (a, b),
                idx.box_scope[a] | idx.box_scope[b],
                f"disjoint({a}, {b})",
            ))

    for eid, element in spec.elements.items():
        if element.kind in config.touch_kinds:
            size_idx = idx.elem_vars[eid][2]
            mn = config.touch_minimum
            out.append(_mk(
                ConstraintKind.MINIMUM_SIZE, f"minimum_size:{eid}", eid,
                "min_size", (size_idx, mn, mn), {size_idx},
                f"width({eid}) ≥ {mn} ∧ height({eid}) ≥ {mn}",
                guard=idx.activity_guard(eid),
            ))
    return out


def encode_layout_grids(spec: DesignSpec, store: VariableStore,
                        index: SpecIndex | None = None) -> list[Constraint]:
    """Canvas grid arithmetic, column snapping for canvas children, baselines."""
    idx = index or SpecIndex(spec, store)
    W = spec.canvas.width
    cv = idx.canvas_var
    m, c, g, cw, b = (cv[VarName.MARGIN], cv[VarName.COLUMNS], cv[VarName.GUTTER_WIDTH],
                      cv[VarName.COLUMN_WIDTH], cv[VarName.BASELINE_GRID])
    out = [_mk(
        ConstraintKind.LAYOUT_GRID, "layout_grid:canvas", "canvas",
        "grid_arith", (m, c, g, cw, W), {m, c, g, cw},
        "2·margin + columns·column_width + (columns−1)·gutter_width = W",
    )]
    for child in idx.canvas_children:
        out.append(_mk(
            ConstraintKind.LAYOUT_GRID, f"layout_grid:{child}", child,
            "grid_snap", (child, m, c, g, cw),
            idx.box_scope[child] | {m, c, g, cw},
            f"left({child}) on a column start ∧ right({child}) on a column end",
        ))
    for unit in idx.units:
        out.append(_mk(
            ConstraintKind.BASELINE_GRID, f"baseline_grid:{unit}", unit,
            "baseline", (unit, b), idx.box_scope[unit] | {b},
            f"top({unit}) mod baseline = 0 ∧ height({unit}) mod baseline = 0",
        ))
    return out


def encode_group(spec: DesignSpec, store: VariableStore, group: Group,
                 index: SpecIndex | None = None) -> list[Constraint]:
    """Alignment, arrangement shape, padding, and visual hierarchy for one group.

    Applies to plain groups, repeat groups (over their subgroup boxes), and
    repeat subgroups.  Alternate groups carry no flow semantics of their own.
    """
    idx = index or SpecIndex(spec, store)
    if group.kind is GroupKind.ALTERNATE:
        return []
    arr, align, pad = idx.group_vars[group.id]
    children = idx.children[group.id]
    out: list[Constraint] = []

    if len(children) >= 2:
        child_scope = frozenset()
        for cid in children:
            child_scope |= idx.box_scope[cid]
        out.append(_mk(
            ConstraintKind.ALIGNMENT, f"alignment:{group.id}", group.id,
            "align", (group.id, arr, align, children), child_scope | {arr, align},
            f"children of {group.id} share the assigned alignment axis",
        ))
        out.append(_mk(
            ConstraintKind.ARRANGEMENT, f"arrangement:{group.id}", group.id,
            "arrange", (group.id, arr, children), child_scope | {arr},
            f"children of {group.id} form the assigned flow shape",
        ))
        out.append(_mk(
            ConstraintKind.PADDING, f"padding:{group.id}", group.id,
            "pad", (group.id, arr, pad, children), child_scope | {arr, pad},
            f"consecutive gaps inside {group.id} equal its padding",
        ))
    else:
        # Degenerate group: layout variables have no geometric meaning, so pin
        # them to canonical values to keep bindings free of don't-cares.
        pins = tuple((vi, store.variables[vi].domain[0]) for vi in (arr, align, pad))
        out.append(_mk(
            ConstraintKind.ARRANGEMENT, f"arrangement:{group.id}:degenerate", group.id,
            "pin_vars", (pins,), {arr, align, pad},
            f"single-child group {group.id}: layout variables pinned",
        ))

    b = idx.canvas_var[VarName.BASELINE_GRID]
    parent = idx.parent[group.id]
    siblings = idx.children[parent] if parent is not None else idx.canvas_children
    for sid in siblings:
        if sid != group.id and isinstance(idx.nodes[sid], Group):
            out.append(_mk(
                ConstraintKind.VISUAL_HIERARCHY, f"visual_hierarchy:{group.id}|{sid}", group.id,
                "vis_hier", (group.id, sid, pad, b),
                idx.box_scope[group.id] | idx.box_scope[sid] | {pad, b},
                f"gap({group.id}, {sid}) ≥ padding({group.id}) + baseline",
            ))
    return out


def encode_order(spec: DesignSpec, store: VariableStore,
                 index: SpecIndex | None = None) -> list[Constraint]:
    """Reading-order constraints for order-important containers plus first/last pins."""
    idx = index or SpecIndex(spec, store)
    out: list[Constraint] = []

    for gid, (arr, _, _) in idx.group_vars.items():
        group = idx.nodes[gid]
        assert isinstance(group, Group)
        if group.kind is GroupKind.ALTERNATE:
            continue
        children = idx.children[gid]
        if len(children) < 2:
            continue
        child_scope = frozenset()
        for cid in children:
            child_scope |= idx.box_scope[cid]
        if group.order_important:
            out.append(_mk(
                ConstraintKind.ORDERING, f"ordering:{gid}", gid,
                "order_group", (gid, arr, children), child_scope | {arr},
                f"flow sequence of {gid} follows outline order",
            ))
        for role, child in (("first", group.first), ("last", group.last)):
            if child is not None:
                others = tuple(c for c in children if c != child)
                out.append(_mk(
                    ConstraintKind.FIRST_LAST, f"first_last:{gid}:{role}", gid,
                    f"{role}_group", (gid, arr, child, others), child_scope | {arr},
                    f"{child} is {role} in the flow of {gid}",
                ))

    canvas = spec.canvas
    kids = idx.canvas_children
    if canvas.order_important:
        for i, a in enumerate(kids):
            for bnode in kids[i + 1:]:
                out.append(_mk(
                    ConstraintKind.ORDERING, f"ordering:canvas:{a}|{bnode}", "canvas",
                    "order_canvas", (a, bnode),
                    idx.box_scope[a] | idx.box_scope[bnode],
                    f"bottom({a}) ≤ bottom({bnode})",
                ))
    for role, child in (("first", canvas.first), ("last", canvas.last)):
        if child is None:
            continue
        for other in kids:
            if other == child:
                continue
            op = "first_canvas" if role == "first" else "last_canvas"
            rel = f"top({child}) < top({other})" if role == "first" else f"bottom({child}) > bottom({other})"
            out.append(_mk(
                ConstraintKind.FIRST_LAST, f"first_last:canvas:{role}:{other}", "canvas",
                op, (child, other), idx.box_scope[child] | idx.box_scope[other], rel,
            ))
    return out


def encode_emphasis(spec: DesignSpec, store: VariableStore,
                    index: SpecIndex | None = None) -> list[Constraint]:
    """Size-direction and pairwise relative-prominence constraints."""
    idx = index or SpecIndex(spec, store)
    out: list[Constraint] = []
    emphasized = [nid for nid, node in idx.nodes.items() if node.emphasis is not Emphasis.NORMAL]

    for nid in emphasized:
        node = idx.nodes[nid]
        high = node.emphasis is Emphasis.HIGH
        sense = 1 if high else -1
        for element in idx.descendant_elements(nid):
            size_idx = idx.elem_vars[element.id][2]
            area = element.width * element.height
            suffix = "" if element.id == nid else f":{element.id}"
            cmp_sym = "≥" if high else "≤"
            out.append(_mk(
                ConstraintKind.EMPHASIS_SIZE_DIRECTION,
                f"emphasis_size_direction:{nid}{suffix}", nid,
                "emph_dir", (size_idx, area, sense), {size_idx},
                f"area({element.id}) {cmp_sym} intrinsic area",
                guard=idx.activity_guard(element.id),
            ))
        for unit in idx.units:
            if idx.in_subtree(unit, nid) or idx.in_subtree(nid, unit):
                continue
            if idx.unit_emphasis(unit) is node.emphasis:
                continue
            out.append(_mk(
                ConstraintKind.EMPHASIS_RELATIVE, f"emphasis_relative:{nid}|{unit}", nid,
                "emph_rel", (nid, unit, sense),
                idx.box_scope[nid] | idx.box_scope[unit],
                (f"({nid} wider ∨ taller than {unit}) ∧ ({nid} larger ∨ earlier)") if high
                else (f"({nid} narrower ∨ shorter than {unit}) ∧ ({nid} smaller ∨ later)"),
                guard=idx.activity_guard(nid) if nid in idx.alt_member else (),
            ))
    return out


def encode_repeat_and_alternate(spec: DesignSpec, store: VariableStore,
                                index: SpecIndex | None = None) -> list[Constraint]:
    """Repeat-group consistency equalities and alternate-group selection plumbing."""
    idx = index or SpecIndex(spec, store)
    out: list[Constraint] = []

    for gid, group in spec.groups.items():
        if group.kind is GroupKind.REPEAT:
            subgroups = [c for c in group.children if isinstance(c, Group)]
            lead = subgroups[0]
            for sub in subgroups[1:]:
                out.extend(_repeat_equalities(idx, store, gid, lead, sub))
        elif group.kind is GroupKind.ALTERNATE:
            arr, align, pad = idx.group_vars[gid]
            pins = tuple((vi, store.variables[vi].domain[0]) for vi in (arr, align, pad))
            out.append(_mk(
                ConstraintKind.ALTERNATE_REPRESENTATION,
                f"alternate_representation:{gid}:vars", gid,
                "pin_vars", (pins,), {arr, align, pad},
                f"layout variables of alternate group {gid} pinned",
            ))
            repr_vi = idx.repr_var[gid]
            for child in group.children:
                x_vi, y_vi, s_vi = idx.elem_vars[child.id]
                pins = tuple((vi, store.variables[vi].domain[0]) for vi in (x_vi, y_vi, s_vi))
                out.append(_mk(
                    ConstraintKind.ALTERNATE_REPRESENTATION,
                    f"alternate_representation:{gid}:{child.id}", gid,
                    "park", (repr_vi, child.id, pins), {repr_vi, x_vi, y_vi, s_vi},
                    f"representation({gid}) = {child.id} ∨ {child.id} parked",
                ))
    return out


def _repeat_equalities(idx: SpecIndex, store: VariableStore, gid: str,
                       lead: Group, sub: Group) -> list[Constraint]:
    out: list[Constraint] = []

    def pair_groups(a: Group, b: Group) -> None:
        for name in (VarName.ARRANGEMENT, VarName.ALIGNMENT, VarName.PADDING):
            va = store.get(a.id, name).index
            vb = store.get(b.id, name).index
            out.append(_mk(
                ConstraintKind.REPEAT_CONSISTENCY,
                f"repeat_consistency:{gid}:{name.value}:{a.id}|{b.id}", gid,
                "value_eq", (va, vb), {va, vb},
                f"{name.value}({a.id}) = {name.value}({b.id})",
            ))
        for ca, cb in zip(a.children, b.children):
            if isinstance(ca, Element) and isinstance(cb, Element):
                sa = idx.elem_vars[ca.id][2]
                sb = idx.elem_vars[cb.id][2]
                out.append(_mk(
                    ConstraintKind.REPEAT_CONSISTENCY,
                    f"repeat_consistency:{gid}:factor:{ca.id}|{cb.id}", gid,
                    "factor_eq", (sa, sb), {sa, sb},
                    f"sizing_factor({ca.id}) = sizing_factor({cb.id})",
                ))
            elif isinstance(ca, Group) and isinstance(cb, Group):
                pair_groups(ca, cb)

    pair_groups(lead, sub)
    return out


def encode_spec(spec: DesignSpec, store: VariableStore,
                index: SpecIndex | None = None) -> ConstraintSet:
    """Full deterministic encoding of a validated spec against its store."""
    idx = index or SpecIndex(spec, store)
    constraints: list[Constraint] = []
    constraints += encode_basic_quality(spec, store, idx)
    constraints += encode_layout_grids(spec, store, idx)
    for group in iter_groups(spec.canvas.children):
        constraints += encode_group(spec, store, group, idx)
    constraints += encode_order(spec, store, idx)
    constraints += encode_emphasis(spec, store, idx)
    constraints += encode_repeat_and_alternate(spec, store, idx)
    return ConstraintSet(constraints)
