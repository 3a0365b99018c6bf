"""Incremental satisfiability checking over partial assignments.

The resolver owns a trail of binding frames (push/pop), a tri-state status per
constraint (satisfied / violated / undetermined), and an interval "box" engine
that bounds each node's geometry from the domains of its unbound variables.  A
constraint is reported violated only when no completion of the current partial
assignment can satisfy it, so `check` is sound: it never rejects a state that
still has a satisfying completion.  With every variable bound all statuses are
exact.

Conflict explanation is deletion-based MUS shrinking: starting from the
violated constraints (or the whole set), repeatedly drop members whose removal
keeps the set unsatisfiable under the bindings; what remains is
deletion-minimal.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .constraints import Constraint, ConstraintKind, ConstraintSet, SpecIndex
from .domains import (
    COMPATIBLE_ALIGNMENTS,
    AlignmentAxis,
    Arrangement,
    SizeTriple,
    Variable,
)
from .model import Element, Group, GroupKind

TRUE = 1
FALSE = 0
UNKNOWN = -1


class ResolverError(Exception):
    pass


class ContractViolation(ResolverError):
    pass


class _Budget(Exception):
    pass


@dataclass(frozen=True)
class ConflictCore:
    constraint_ids: frozenset
    feedback_ids: frozenset
    minimal: bool = True

    def as_dict(self) -> dict:
        return {
            "constraint_ids": sorted(self.constraint_ids),
            "feedback_ids": sorted(self.feedback_ids),
            "minimal": self.minimal,
        }


def _tri_and(parts: Iterable[int]) -> int:
    out = TRUE
    for p in parts:
        if p == FALSE:
            return FALSE
        if p == UNKNOWN:
            out = UNKNOWN
    return out


def _tri_or(parts: Iterable[int]) -> int:
    out = FALSE
    for p in parts:
        if p == TRUE:
            return TRUE
        if p == UNKNOWN:
            out = UNKNOWN
    return out


class Resolver:
    """Constraint checker over one mutable assignment trail.

    One instance per search worker; instances share immutable variables,
    constraints, and spec index but own all trail state.
    """

    def __init__(self, variables, constraints, index: SpecIndex | None = None,
                 propose: bool = True):
        # `propose` enables value proposals derived from the full encoded
        # semantics; it must be off when checking arbitrary constraint subsets
        # (MUS shrinking), where those deductions would not be sound.
        self._propose_enabled = propose
        if hasattr(variables, "variables"):
            variables = variables.variables
        self.variables: tuple[Variable, ...] = tuple(variables)
        if isinstance(constraints, ConstraintSet):
            self.constraint_set = constraints
        else:
            self.constraint_set = ConstraintSet(constraints)
        self.constraints = self.constraint_set.constraints
        self.index = index

        n = len(self.variables)
        self.vals: list = [None] * n
        self.frames: list[tuple[int, list]] = []
        self.epoch = 0

        self._dom_sets = [frozenset(v.domain) for v in self.variables]
        self._num_bounds: dict[int, tuple[int, int]] = {}
        self._size_bounds: dict[int, tuple] = {}
        for v in self.variables:
            if v.domain and isinstance(v.domain[0], SizeTriple):
                ws = [t.width for t in v.domain]
                hs = [t.height for t in v.domain]
                areas = [t.width * t.height for t in v.domain]
                fs = frozenset(t.factor for t in v.domain)
                self._size_bounds[v.index] = (min(ws), max(ws), min(hs), max(hs),
                                              min(areas), max(areas), fs)
            elif v.domain and isinstance(v.domain[0], int):
                self._num_bounds[v.index] = (min(v.domain), max(v.domain))

        self._box_cache: dict[str, tuple] = {}
        self._size_cache: dict[str, tuple] = {}
        self._baseline_cache: dict[tuple, list] = {}

        # Geometry caches invalidate per node: binding a variable only dirties
        # the boxes of its owner node and that node's ancestors.
        self._node_version: dict[str, int] = {}
        self._var_dirty: list[tuple[str, ...]] = [() for _ in range(n)]
        if index is not None:
            self._node_version = {nid: 0 for nid in index.nodes}
            for v in self.variables:
                if v.owner == "canvas":
                    continue
                chain = []
                cur: str | None = v.owner
                while cur is not None:
                    chain.append(cur)
                    cur = index.parent.get(cur)
                self._var_dirty[v.index] = tuple(chain)

        ops = {
            "grid_arith": self._ev_grid_arith,
            "bounds": self._ev_bounds,
            "no_overlap": self._ev_no_overlap,
            "min_size": self._ev_min_size,
            "grid_snap": self._ev_grid_snap,
            "baseline": self._ev_baseline,
            "align": self._ev_align,
            "arrange": self._ev_arrange,
            "pad": self._ev_pad,
            "vis_hier": self._ev_vis_hier,
            "order_group": self._ev_order_group,
            "order_canvas": self._ev_order_canvas,
            "first_canvas": self._ev_first_canvas,
            "last_canvas": self._ev_last_canvas,
            "first_group": self._ev_first_group,
            "last_group": self._ev_last_group,
            "emph_dir": self._ev_emph_dir,
            "emph_rel": self._ev_emph_rel,
            "value_eq": self._ev_value_eq,
            "factor_eq": self._ev_factor_eq,
            "pin_vars": self._ev_pin_vars,
            "park": self._ev_park,
            "keep": self._ev_keep,
            "prevent": self._ev_prevent,
            "keep_loc": self._ev_keep_loc,
            "prevent_loc": self._ev_prevent_loc,
            "block": self._ev_block,
        }
        self._evals = []
        self._cons_by_var: list[list[int]] = [[] for _ in range(n)]
        for ci, c in enumerate(self.constraints):
            try:
                method = ops[c.op]
            except KeyError:
                raise ResolverError(f"unknown constraint op '{c.op}'") from None
            self._evals.append((method, c.args, c.guard))
            for vi in c.scope:
                self._cons_by_var[vi].append(ci)

        self._proposers = self._build_proposers()

        self.statuses = [UNKNOWN] * len(self.constraints)
        self.n_false = 0
        for ci in range(len(self.constraints)):
            s = self._eval(ci)
            self.statuses[ci] = s
            if s == FALSE:
                self.n_false += 1

    # -- trail ---------------------------------------------------------------

    def push_binding(self, var, value) -> int:
        vi = var if isinstance(var, int) else self._var_index(var)
        if self.vals[vi] is not None:
            raise ContractViolation(f"variable {self.variables[vi].id} already bound")
        if value not in self._dom_sets[vi]:
            raise ContractViolation(f"value {value!r} not in domain of {self.variables[vi].id}")
        token = len(self.frames)
        self.vals[vi] = value
        self.epoch += 1
        for nid in self._var_dirty[vi]:
            self._node_version[nid] += 1
        undo: list[tuple[int, int]] = []
        for ci in self._cons_by_var[vi]:
            if self.statuses[ci] == UNKNOWN:
                s = self._eval(ci)
                if s != UNKNOWN:
                    undo.append((ci, UNKNOWN))
                    self.statuses[ci] = s
                    if s == FALSE:
                        self.n_false += 1
        self.frames.append((vi, undo))
        return token

    def pop(self, token: int | None = None) -> None:
        target = len(self.frames) - 1 if token is None else token
        if target < 0 or target > len(self.frames):
            raise ContractViolation("bad checkpoint token")
        while len(self.frames) > target:
            vi, undo = self.frames.pop()
            self.vals[vi] = None
            for nid in self._var_dirty[vi]:
                self._node_version[nid] += 1
            for ci, old in undo:
                if self.statuses[ci] == FALSE:
                    self.n_false -= 1
                self.statuses[ci] = old
        self.epoch += 1

    def check(self) -> bool:
        """True while no constraint is provably violated by the current bindings."""
        return self.n_false == 0

    def bound_count(self) -> int:
        return len(self.frames)

    def bindings(self) -> dict[int, object]:
        return {vi: v for vi, v in enumerate(self.vals) if v is not None}

    def violated_constraints(self) -> list[Constraint]:
        return [self.constraints[ci] for ci, s in enumerate(self.statuses) if s == FALSE]

    def _var_index(self, var) -> int:
        if isinstance(var, Variable):
            return var.index
        for v in self.variables:
            if v.id == var:
                return v.index
        raise ResolverError(f"unknown variable {var!r}")

    # -- abstract values -------------------------------------------------------

    def _ival(self, vi: int) -> tuple[int, int]:
        v = self.vals[vi]
        if v is not None:
            return (v, v)
        return self._num_bounds[vi]

    def _possible(self, vi: int) -> frozenset:
        v = self.vals[vi]
        if v is not None:
            return frozenset((v,))
        return self._dom_sets[vi]

    def _box(self, nid: str) -> tuple:
        version = self._node_version[nid]
        cached = self._box_cache.get(nid)
        if cached is not None and cached[0] == version:
            return cached[1]
        box = self._compute_box(nid)
        self._box_cache[nid] = (version, box)
        return box

    def _compute_box(self, nid: str) -> tuple:
        """(l_lo, l_hi, t_lo, t_hi, r_lo, r_hi, b_lo, b_hi, w_lo, w_hi, h_lo, h_hi)."""
        idx = self.index
        node = idx.nodes[nid]
        if isinstance(node, Element):
            xi, yi, si = idx.elem_vars[nid]
            x = self.vals[xi]
            l_lo, l_hi = (x, x) if x is not None else self._num_bounds[xi]
            y = self.vals[yi]
            t_lo, t_hi = (y, y) if y is not None else self._num_bounds[yi]
            s = self.vals[si]
            if s is not None:
                w_lo = w_hi = s.width
                h_lo = h_hi = s.height
            else:
                w_lo, w_hi, h_lo, h_hi = self._size_bounds[si][:4]
            return (l_lo, l_hi, t_lo, t_hi, l_lo + w_lo, l_hi + w_hi,
                    t_lo + h_lo, t_hi + h_hi, w_lo, w_hi, h_lo, h_hi)
        if node.kind is GroupKind.ALTERNATE:
            rv = self.vals[idx.repr_var[nid]]
            if rv is not None:
                return self._box(rv)
            boxes = [self._box(c) for c in idx.children[nid]]
            return tuple(
                (min if k % 2 == 0 else max)(b[k] for b in boxes) for k in range(12)
            )
        boxes = [self._box(c) for c in idx.children[nid]]
        l_lo = min(b[0] for b in boxes)
        l_hi = min(b[1] for b in boxes)
        t_lo = min(b[2] for b in boxes)
        t_hi = min(b[3] for b in boxes)
        r_lo = max(b[4] for b in boxes)
        r_hi = max(b[5] for b in boxes)
        b_lo = max(b[6] for b in boxes)
        b_hi = max(b[7] for b in boxes)
        return (l_lo, l_hi, t_lo, t_hi, r_lo, r_hi, b_lo, b_hi,
                max(0, r_lo - l_hi), r_hi - l_lo, max(0, b_lo - t_hi), b_hi - t_lo)

    @staticmethod
    def _singleton(box: tuple) -> bool:
        return (box[0] == box[1] and box[2] == box[3]
                and box[4] == box[5] and box[6] == box[7])

    # -- evaluation ------------------------------------------------------------

    def _eval(self, ci: int) -> int:
        method, args, guard = self._evals[ci]
        if guard:
            g = TRUE
            for vi, req in guard:
                v = self.vals[vi]
                if v is None:
                    g = UNKNOWN
                elif v != req:
                    return TRUE  # guard fails: constraint vacuous
            body = method(args)
            if g == TRUE:
                return body
            return TRUE if body == TRUE else UNKNOWN
        return method(args)

    def _ev_grid_arith(self, args) -> int:
        m, c, g, cw, width = args
        vm, vc, vg, vcw = self.vals[m], self.vals[c], self.vals[g], self.vals[cw]
        if None not in (vm, vc, vg, vcw):
            return TRUE if 2 * vm + vc * vcw + (vc - 1) * vg == width else FALSE
        m_lo, m_hi = self._ival(m)
        c_lo, c_hi = self._ival(c)
        g_lo, g_hi = self._ival(g)
        cw_lo, cw_hi = self._ival(cw)
        lo = 2 * m_lo + c_lo * cw_lo + (c_lo - 1) * g_lo
        hi = 2 * m_hi + c_hi * cw_hi + (c_hi - 1) * g_hi
        return UNKNOWN if lo <= width <= hi else FALSE

    def _ev_bounds(self, args) -> int:
        nid, m_idx, W, H = args
        box = self._box(nid)
        m_lo, m_hi = self._ival(m_idx)
        if box[1] < m_lo or box[4] > W - m_lo or box[3] < 0 or box[6] > H:
            return FALSE
        if m_hi <= box[0] and box[5] <= W - m_hi and box[2] >= 0 and box[7] <= H:
            return TRUE
        if self._propose_enabled:
            # Full-set deduction: derivable subtree extents must fit the canvas.
            h = self._node_h(nid)
            if h is not None and h > H:
                return FALSE
            w = self._node_w(nid)
            if w is not None and w > W - 2 * m_lo:
                return FALSE
        return UNKNOWN

    def _ev_no_overlap(self, args) -> int:
        a, b = args
        A = self._box(a)
        B = self._box(b)
        parts = (
            TRUE if A[5] <= B[0] else (FALSE if A[4] > B[1] else UNKNOWN),
            TRUE if B[5] <= A[0] else (FALSE if B[4] > A[1] else UNKNOWN),
            TRUE if A[7] <= B[2] else (FALSE if A[6] > B[3] else UNKNOWN),
            TRUE if B[7] <= A[2] else (FALSE if B[6] > A[3] else UNKNOWN),
        )
        return _tri_or(parts)

    def _ev_min_size(self, args) -> int:
        si, mw, mh = args
        s = self.vals[si]
        if s is not None:
            return TRUE if s.width >= mw and s.height >= mh else FALSE
        w_lo, w_hi, h_lo, h_hi = self._size_bounds[si][:4]
        if w_hi < mw or h_hi < mh:
            return FALSE
        if w_lo >= mw and h_lo >= mh:
            return TRUE
        return UNKNOWN

    def _grid_lines(self, m, c, g, cw) -> tuple | None:
        vm, vc, vg, vcw = self.vals[m], self.vals[c], self.vals[g], self.vals[cw]
        if None in (vm, vc, vg, vcw):
            return None
        starts = tuple(vm + i * (vcw + vg) for i in range(vc))
        ends = tuple(s + vcw for s in starts)
        return starts, ends

    def _ev_grid_snap(self, args) -> int:
        nid, m, c, g, cw = args
        lines = self._grid_lines(m, c, g, cw)
        if lines is None:
            return UNKNOWN
        starts, ends = lines
        box = self._box(nid)
        if not any(box[0] <= s <= box[1] for s in starts):
            return FALSE
        if not any(box[4] <= e <= box[5] for e in ends):
            return FALSE
        if box[0] == box[1] and box[4] == box[5]:
            return TRUE if box[0] in starts and box[4] in ends else FALSE
        if self._propose_enabled:
            # Full-set deduction: a box whose width is already determined by
            # sizes and flow structure must match some whole span of columns.
            width = self._node_w(nid)
            if width is not None:
                vcw = self.vals[cw]
                step = vcw + self.vals[g]
                if width < vcw or (width - vcw) % step != 0 or width > ends[-1] - starts[0]:
                    return FALSE
        return UNKNOWN

    def _ev_baseline(self, args) -> int:
        nid, b_idx = args
        box = self._box(nid)
        b_possible = self._possible(b_idx)
        t_known = box[2] == box[3]
        h_known = box[10] == box[11]
        if t_known and h_known:
            ok = [vb for vb in b_possible if box[2] % vb == 0 and box[10] % vb == 0]
            if not ok:
                return FALSE
            if len(ok) == len(b_possible):
                return TRUE
            return UNKNOWN
        if t_known and all(box[2] % vb != 0 for vb in b_possible):
            return FALSE
        if h_known and all(box[10] % vb != 0 for vb in b_possible):
            return FALSE
        return UNKNOWN

    _ALIGN_KEYS = {
        AlignmentAxis.TOP: (2, 3),
        AlignmentAxis.BOTTOM: (6, 7),
        AlignmentAxis.LEFT: (0, 1),
        AlignmentAxis.RIGHT: (4, 5),
    }

    def _align_interval(self, box: tuple, axis: AlignmentAxis) -> tuple[int, int]:
        if axis is AlignmentAxis.Y_CENTER:
            return (box[2] + box[6], box[3] + box[7])
        if axis is AlignmentAxis.X_CENTER:
            return (box[0] + box[4], box[1] + box[5])
        lo, hi = self._ALIGN_KEYS[axis]
        return (box[lo], box[hi])

    def _ev_align(self, args) -> int:
        gid, arr_vi, align_vi, children = args
        arr = self.vals[arr_vi]
        ali = self.vals[align_vi]
        poss_arr = self._possible(arr_vi)
        poss_ali = self._possible(align_vi)
        if not any(a2 in COMPATIBLE_ALIGNMENTS[a1] for a1 in poss_arr for a2 in poss_ali):
            return FALSE
        if arr is None or ali is None:
            return UNKNOWN
        if ali not in COMPATIBLE_ALIGNMENTS[arr]:
            return FALSE
        boxes = [self._box(c) for c in children]
        if arr in (Arrangement.HORIZONTAL, Arrangement.VERTICAL):
            ivals = [self._align_interval(b, ali) for b in boxes]
            if max(v[0] for v in ivals) > min(v[1] for v in ivals):
                return FALSE
            if all(v[0] == v[1] for v in ivals):
                return TRUE
            return UNKNOWN
        if not all(self._singleton(b) for b in boxes):
            return UNKNOWN
        bands = _bands(boxes, axis="y" if arr is Arrangement.ROWS else "x")
        for band in bands:
            coords = {self._align_interval(boxes[i], ali)[0] for i in band}
            if len(coords) > 1:
                return FALSE
        return TRUE

    def _ev_arrange(self, args) -> int:
        gid, arr_vi, children = args
        arr = self.vals[arr_vi]
        boxes = [self._box(c) for c in children]
        if arr is None:
            results = [self._arrange_for(v, boxes) for v in self._possible(arr_vi)]
            return FALSE if all(r == FALSE for r in results) else UNKNOWN
        return self._arrange_for(arr, boxes)

    def _arrange_for(self, arr: Arrangement, boxes: list) -> int:
        if arr is Arrangement.HORIZONTAL:
            return _tri_and(_disjoint_x(a, b) for a, b in itertools.combinations(boxes, 2))
        if arr is Arrangement.VERTICAL:
            return _tri_and(_disjoint_y(a, b) for a, b in itertools.combinations(boxes, 2))
        # Balanced rows / columns need an r×k split with r, k ≥ 2.
        n = len(boxes)
        if not any(n % r == 0 and n // r >= 2 for r in range(2, n // 2 + 1)):
            return FALSE
        for a, b in itertools.combinations(boxes, 2):
            if _disjoint_x(a, b) == FALSE and _disjoint_y(a, b) == FALSE:
                return FALSE
        if not all(self._singleton(b) for b in boxes):
            return UNKNOWN
        axis = "y" if arr is Arrangement.ROWS else "x"
        bands = _bands(boxes, axis=axis)
        sizes = {len(band) for band in bands}
        if len(bands) < 2 or len(sizes) != 1 or sizes == {1}:
            return FALSE
        flow_lo, flow_hi = (0, 4) if axis == "y" else (2, 6)
        extents = set()
        anchors = set()
        for band in bands:
            members = [boxes[i] for i in band]
            for a, b in itertools.combinations(members, 2):
                disjoint = _disjoint_x(a, b) if axis == "y" else _disjoint_y(a, b)
                if disjoint != TRUE:
                    return FALSE
            lo = min(m[flow_lo] for m in members)
            hi = max(m[flow_hi] for m in members)
            anchors.add(lo)
            extents.add(hi - lo)
        if len(extents) > 1 or len(anchors) > 1:
            return FALSE
        return TRUE

    def _ev_pad(self, args) -> int:
        gid, arr_vi, pad_vi, children = args
        arr = self.vals[arr_vi]
        pad = self.vals[pad_vi]
        if arr is None or pad is None:
            return UNKNOWN
        boxes = [self._box(c) for c in children]
        complete = all(self._singleton(b) for b in boxes)
        if arr in (Arrangement.HORIZONTAL, Arrangement.VERTICAL):
            lo, hi, ext_lo, ext_hi = (0, 4, 8, 9) if arr is Arrangement.HORIZONTAL else (2, 6, 10, 11)
            placed = sorted((b for b in boxes if b[lo] == b[lo + 1] and b[hi] == b[hi + 1]),
                            key=lambda b: b[lo])
            unplaced = [b for b in boxes if not (b[lo] == b[lo + 1] and b[hi] == b[hi + 1])]
            widths = [b[ext_lo] for b in unplaced if b[ext_lo] == b[ext_hi]]
            known_all = len(widths) == len(unplaced)
            feasible: set[int] | None = None
            if known_all and len(unplaced) <= 8:
                feasible = {pad}
                for k in range(1, len(widths) + 1):
                    for combo in itertools.combinations(widths, k):
                        feasible.add(sum(combo) + (k + 1) * pad)
            for a, b in zip(placed, placed[1:]):
                gap = b[lo] - a[hi]
                if gap < pad:
                    return FALSE
                if feasible is not None and gap not in feasible:
                    return FALSE
            if complete:
                return TRUE if all(b[lo] - a[hi] == pad for a, b in zip(placed, placed[1:])) else FALSE
            return UNKNOWN
        if not complete:
            return UNKNOWN
        axis = "y" if arr is Arrangement.ROWS else "x"
        flow_lo, flow_hi = (0, 4) if axis == "y" else (2, 6)
        cross_lo, cross_hi = (2, 6) if axis == "y" else (0, 4)
        bands = _bands(boxes, axis=axis)
        for band in bands:
            members = sorted((boxes[i] for i in band), key=lambda b: b[flow_lo])
            for a, b in zip(members, members[1:]):
                if b[flow_lo] - a[flow_hi] != pad:
                    return FALSE
        for prev, nxt in zip(bands, bands[1:]):
            prev_end = max(boxes[i][cross_hi] for i in prev)
            nxt_start = min(boxes[i][cross_lo] for i in nxt)
            if nxt_start - prev_end != pad:
                return FALSE
        return TRUE

    def _ev_vis_hier(self, args) -> int:
        gid, sid, pad_vi, b_vi = args
        A = self._box(gid)
        B = self._box(sid)
        dx_lo = max(B[0] - A[5], A[0] - B[5])
        dx_hi = max(B[1] - A[4], A[1] - B[4])
        dy_lo = max(B[2] - A[7], A[2] - B[7])
        dy_hi = max(B[3] - A[6], A[3] - B[6])
        gap_lo, gap_hi = max(dx_lo, dy_lo), max(dx_hi, dy_hi)
        pad_lo, pad_hi = self._ival(pad_vi)
        b_lo, b_hi = self._ival(b_vi)
        if gap_hi < pad_lo + b_lo:
            return FALSE
        if gap_lo >= pad_hi + b_hi:
            return TRUE
        if self._propose_enabled and self.index is not None:
            # Full-set deduction: two siblings alone in a flowing parent sit
            # exactly one parent-padding apart.
            parent = self.index.parent.get(gid)
            if parent is not None and parent == self.index.parent.get(sid) \
                    and len(self.index.children[parent]) == 2:
                arr_vi, _, ppad_vi = self.index.group_vars[parent]
                arr = self.vals[arr_vi]
                ppad = self.vals[ppad_vi]
                if ppad is not None and arr in (Arrangement.HORIZONTAL, Arrangement.VERTICAL):
                    if ppad < pad_lo + b_lo:
                        return FALSE
        return UNKNOWN

    def _flow_sequence(self, arr: Arrangement, children, boxes) -> list:
        order = []
        if arr is Arrangement.HORIZONTAL:
            order = sorted(range(len(boxes)), key=lambda i: (boxes[i][0], boxes[i][2], i))
        elif arr is Arrangement.VERTICAL:
            order = sorted(range(len(boxes)), key=lambda i: (boxes[i][2], boxes[i][0], i))
        else:
            axis = "y" if arr is Arrangement.ROWS else "x"
            key = (lambda i: boxes[i][0]) if axis == "y" else (lambda i: boxes[i][2])
            for band in _bands(boxes, axis=axis):
                order.extend(sorted(band, key=key))
        return [children[i] for i in order]

    def _ev_order_group(self, args) -> int:
        gid, arr_vi, children = args
        arr = self.vals[arr_vi]
        if arr is None:
            return UNKNOWN
        boxes = [self._box(c) for c in children]
        if arr in (Arrangement.HORIZONTAL, Arrangement.VERTICAL):
            lo, hi = (0, 4) if arr is Arrangement.HORIZONTAL else (2, 6)
            for i, j in itertools.combinations(range(len(boxes)), 2):
                if boxes[j][hi + 1] <= boxes[i][lo]:
                    return FALSE  # j provably precedes i in the flow
        if not all(self._singleton(b) for b in boxes):
            return UNKNOWN
        return TRUE if self._flow_sequence(arr, children, boxes) == list(children) else FALSE

    def _ev_order_canvas(self, args) -> int:
        a, b = args
        A, B = self._box(a), self._box(b)
        if A[6] > B[7]:
            return FALSE
        if A[7] <= B[6]:
            return TRUE
        return UNKNOWN

    def _ev_first_canvas(self, args) -> int:
        f, o = args
        F_, O = self._box(f), self._box(o)
        if F_[2] >= O[3]:
            return FALSE
        if F_[3] < O[2]:
            return TRUE
        return UNKNOWN

    def _ev_last_canvas(self, args) -> int:
        last, o = args
        L, O = self._box(last), self._box(o)
        if L[7] <= O[6]:
            return FALSE
        if L[6] > O[7]:
            return TRUE
        return UNKNOWN

    def _ev_first_group(self, args) -> int:
        return self._ev_endpoint(args, first=True)

    def _ev_last_group(self, args) -> int:
        return self._ev_endpoint(args, first=False)

    def _ev_endpoint(self, args, first: bool) -> int:
        gid, arr_vi, child, others = args
        arr = self.vals[arr_vi]
        if arr is None:
            return UNKNOWN
        cbox = self._box(child)
        oboxes = [self._box(o) for o in others]
        if arr in (Arrangement.HORIZONTAL, Arrangement.VERTICAL):
            lo, hi = (0, 4) if arr is Arrangement.HORIZONTAL else (2, 6)
            for ob in oboxes:
                if first and ob[hi + 1] <= cbox[lo]:
                    return FALSE
                if not first and ob[lo] >= cbox[hi + 1]:
                    return FALSE
        boxes = [cbox] + oboxes
        if not all(self._singleton(b) for b in boxes):
            return UNKNOWN
        children = (child,) + tuple(others)
        seq = self._flow_sequence(arr, children, boxes)
        return TRUE if (seq[0] if first else seq[-1]) == child else FALSE

    def _ev_emph_dir(self, args) -> int:
        si, area0, sense = args
        s = self.vals[si]
        if s is not None:
            area = s.width * s.height
            ok = area >= area0 if sense > 0 else area <= area0
            return TRUE if ok else FALSE
        a_lo, a_hi = self._size_bounds[si][4:6]
        if sense > 0:
            if a_hi < area0:
                return FALSE
            if a_lo >= area0:
                return TRUE
        else:
            if a_lo > area0:
                return FALSE
            if a_hi <= area0:
                return TRUE
        return UNKNOWN

    @staticmethod
    def _gt(a: tuple[int, int], b: tuple[int, int]) -> int:
        if a[0] > b[1]:
            return TRUE
        if a[1] <= b[0]:
            return FALSE
        return UNKNOWN

    def _earlier(self, A: tuple, B: tuple) -> int:
        if A[3] < B[2]:
            return TRUE
        if A[2] > B[3]:
            return FALSE
        if A[2] == A[3] == B[2] == B[3] and A[0] == A[1] and B[0] == B[1]:
            return TRUE if A[0] < B[0] else FALSE
        return UNKNOWN

    def _ev_emph_rel(self, args) -> int:
        nid, oid, sense = args
        A = self._box(nid)
        B = self._box(oid)
        wA, hA, aA = (A[8], A[9]), (A[10], A[11]), (A[8] * A[10], A[9] * A[11])
        wB, hB, aB = (B[8], B[9]), (B[10], B[11]), (B[8] * B[10], B[9] * B[11])
        if sense > 0:
            clause1 = _tri_or((self._gt(wA, wB), self._gt(hA, hB)))
            clause2 = _tri_or((self._gt(aA, aB), self._earlier(A, B)))
        else:
            clause1 = _tri_or((self._gt(wB, wA), self._gt(hB, hA)))
            clause2 = _tri_or((self._gt(aB, aA), self._earlier(B, A)))
        return _tri_and((clause1, clause2))

    def _ev_value_eq(self, args) -> int:
        va, vb = args
        pa, pb = self._possible(va), self._possible(vb)
        if not (pa & pb):
            return FALSE
        if len(pa) == 1 and pa == pb:
            return TRUE
        return UNKNOWN

    def _ev_factor_eq(self, args) -> int:
        sa, sb = args
        a = self.vals[sa]
        b = self.vals[sb]
        pa = frozenset((a.factor,)) if a is not None else self._size_bounds[sa][6]
        pb = frozenset((b.factor,)) if b is not None else self._size_bounds[sb][6]
        if not (pa & pb):
            return FALSE
        if len(pa) == 1 and pa == pb:
            return TRUE
        return UNKNOWN

    def _ev_pin_vars(self, args) -> int:
        (pins,) = args
        out = TRUE
        for vi, val in pins:
            v = self.vals[vi]
            if v is None:
                out = UNKNOWN
            elif v != val:
                return FALSE
        return out

    def _ev_park(self, args) -> int:
        repr_vi, member, pins = args
        r = self.vals[repr_vi]
        if r == member:
            return TRUE
        pinned = self._ev_pin_vars((pins,))
        if r is None:
            return TRUE if pinned == TRUE else UNKNOWN
        return pinned

    def _ev_keep(self, args) -> int:
        vi, values = args
        poss = self._possible(vi)
        if not (poss & values):
            return FALSE
        if poss <= values:
            return TRUE
        return UNKNOWN

    def _ev_prevent(self, args) -> int:
        vi, values = args
        poss = self._possible(vi)
        if not (poss & values):
            return TRUE
        if poss <= values:
            return FALSE
        return UNKNOWN

    def _ev_keep_loc(self, args) -> int:
        x_vi, y_vi, pairs = args
        px, py = self._possible(x_vi), self._possible(y_vi)
        live = [(a, b) for a, b in pairs if a in px and b in py]
        if not live:
            return FALSE
        if len(px) == 1 and len(py) == 1:
            return TRUE
        return UNKNOWN

    def _ev_prevent_loc(self, args) -> int:
        x_vi, y_vi, pairs = args
        px, py = self._possible(x_vi), self._possible(y_vi)
        live = [(a, b) for a, b in pairs if a in px and b in py]
        if not live:
            return TRUE
        if len(px) == 1 and len(py) == 1:
            return FALSE
        return UNKNOWN

    def _ev_block(self, args) -> int:
        (items,) = args
        out = FALSE
        for vi, val in items:
            v = self.vals[vi]
            if v is None:
                out = UNKNOWN
            elif v != val:
                return TRUE
        return out

    # -- value proposals --------------------------------------------------------

    def _build_proposers(self) -> dict[int, list]:
        """Map variable index -> [(kind, constraint args, slot info), ...].

        Proposals narrow the candidate values tried for a variable; they must
        never exclude a value that some completion could use.
        """
        out: dict[int, list] = {}
        idx = self.index

        def reg(vi: int, entry: tuple) -> None:
            out.setdefault(vi, []).append(entry)

        if idx is not None:
            self._grid_vars = None
            for c in self.constraints:
                if c.op == "grid_arith":
                    self._grid_vars = c.args[:4]
            for eid, (xi, yi, _si) in idx.elem_vars.items():
                reg(xi, ("xcand", eid))
                reg(yi, ("ycand", eid))

        for c in self.constraints:
            if c.op == "park":
                repr_vi, member, pins = c.args
                for vi, val in pins:
                    reg(vi, ("park", (repr_vi, member, val)))
            elif c.op == "baseline" and idx is not None:
                nid, b_idx = c.args
                node = idx.nodes[nid]
                if isinstance(node, Element):
                    _, yi, si = idx.elem_vars[nid]
                    reg(yi, ("baseline_y", (b_idx,)))
                    reg(si, ("baseline_size", (b_idx,)))
            elif c.op == "grid_snap" and idx is not None:
                nid, m, cvi, g, cw = c.args
                node = idx.nodes[nid]
                if isinstance(node, Element):
                    xi = idx.elem_vars[nid][0]
                    reg(xi, ("grid_x", (nid, m, cvi, g, cw, None)))
                elif node.kind is GroupKind.ALTERNATE:
                    repr_vi = idx.repr_var[nid]
                    for mid in idx.children[nid]:
                        xi = idx.elem_vars[mid][0]
                        reg(xi, ("grid_x", (mid, m, cvi, g, cw, (repr_vi, mid))))
            elif c.op == "pad" and idx is not None:
                gid, arr_vi, pad_vi, children = c.args
                align_vi = idx.group_vars[gid][1]
                group = idx.nodes[gid]
                assert isinstance(group, Group)
                for slot, cid in enumerate(children):
                    node = idx.nodes[cid]
                    if isinstance(node, Element):
                        xi, yi, _ = idx.elem_vars[cid]
                        entry = ("chain", (c.args, slot, group.order_important, None))
                        reg(xi, entry)
                        reg(yi, entry)
                        aentry = ("align_snap", (arr_vi, align_vi, children, slot, None))
                        reg(xi, aentry)
                        reg(yi, aentry)
                    elif node.kind is GroupKind.ALTERNATE:
                        repr_vi = idx.repr_var[cid]
                        for mid in idx.children[cid]:
                            xi, yi, _ = idx.elem_vars[mid]
                            gate = (repr_vi, mid)
                            entry = ("chain", (c.args, slot, group.order_important, gate))
                            reg(xi, entry)
                            reg(yi, entry)
                            aentry = ("align_snap", (arr_vi, align_vi, children, slot, gate))
                            reg(xi, aentry)
                            reg(yi, aentry)
        return out

    def propose_values(self, vi: int) -> list | None:
        if not self._propose_enabled:
            return None
        entries = self._proposers.get(vi)
        if not entries:
            return None
        merged: set | None = None
        is_x = self.index is not None and self.variables[vi].name.value == "x"
        for kind, data in entries:
            vals = self._propose_one(kind, data, vi, is_x)
            if vals is None:
                continue
            merged = set(vals) if merged is None else merged & set(vals)
            if not merged:
                return []
        if merged is None:
            return None
        dom = self._dom_sets[vi]
        return sorted(v for v in merged if v in dom)

    def _propose_one(self, kind: str, data, vi: int, is_x: bool):
        if kind == "park":
            repr_vi, member, val = data
            r = self.vals[repr_vi]
            if r is not None and r != member:
                return (val,)
            return None
        if kind == "baseline_y":
            (b_idx,) = data
            b = self.vals[b_idx]
            if b is None:
                return None
            key = (vi, b)
            cached = self._baseline_cache.get(key)
            if cached is None:
                cached = [v for v in self.variables[vi].domain if v % b == 0]
                self._baseline_cache[key] = cached
            return cached
        if kind == "baseline_size":
            (b_idx,) = data
            b = self.vals[b_idx]
            if b is None:
                return None
            key = (vi, b)
            cached = self._baseline_cache.get(key)
            if cached is None:
                cached = [t for t in self.variables[vi].domain if t.height % b == 0]
                self._baseline_cache[key] = cached
            return cached
        if kind == "grid_x":
            nid, m, c, g, cw, gate = data
            if gate is not None and self.vals[gate[0]] != gate[1]:
                return None
            lines = self._grid_lines(m, c, g, cw)
            if lines is None:
                return None
            starts, ends = lines
            si = self.index.elem_vars[nid][2]
            s = self.vals[si]
            if s is None:
                return starts
            end_set = set(ends)
            return tuple(x for x in starts if x + s.width in end_set)
        if kind == "chain":
            return self._propose_chain(data, vi, is_x)
        if kind == "align_snap":
            return self._propose_align(data, vi, is_x)
        if kind == "xcand":
            return self._left_cands(data)
        if kind == "ycand":
            return self._top_cands(data)
        return None

    def _propose_chain(self, data, vi: int, is_x: bool):
        (gid, arr_vi, pad_vi, children), slot, ordered, gate = data
        if gate is not None and self.vals[gate[0]] != gate[1]:
            return None
        arr = self.vals[arr_vi]
        pad = self.vals[pad_vi]
        if arr is None or pad is None:
            return None
        if arr is Arrangement.HORIZONTAL:
            if not is_x:
                return None
            lo, hi, ext = 0, 4, 8
        elif arr is Arrangement.VERTICAL:
            if is_x:
                return None
            lo, hi, ext = 2, 6, 10
        else:
            return None
        boxes = [self._box(c) for c in children]
        exts = [b[ext] if b[ext] == b[ext + 1] else None for b in boxes]
        placed = [i for i, b in enumerate(boxes)
                  if i != slot and b[lo] == b[lo + 1] and b[hi] == b[hi + 1]]
        if not placed:
            return None
        if ordered:
            for j in placed:
                a, b = (j, slot) if j < slot else (slot, j)
                span = exts[a:b]
                if any(e is None for e in span):
                    continue
                offset = sum(span) + (b - a) * pad
                start = boxes[j][lo] + offset if j < slot else boxes[j][lo] - offset
                return (start,)
            return None
        others = [i for i in range(len(boxes)) if i != slot and i not in placed]
        if any(exts[i] is None for i in others + [slot]) or len(others) > 7:
            return None
        gaps = {0}
        other_exts = [exts[i] for i in others]
        for k in range(1, len(other_exts) + 1):
            for combo in itertools.combinations(other_exts, k):
                gaps.add(sum(combo) + k * pad)
        cands = set()
        for j in placed:
            for gap in gaps:
                cands.add(boxes[j][hi] + pad + gap)
                cands.add(boxes[j][lo] - pad - gap - exts[slot])
        return cands

    _MAX_CANDS = 512

    def _node_w(self, nid: str) -> int | None:
        version = self._node_version[nid]
        cached = self._size_cache.get(("w", nid))
        if cached is not None and cached[0] == version:
            return cached[1]
        value = self._node_w_raw(nid)
        self._size_cache[("w", nid)] = (version, value)
        return value

    def _node_w_raw(self, nid: str) -> int | None:
        """Exact box width of a node when derivable before placement."""
        idx = self.index
        node = idx.nodes[nid]
        if isinstance(node, Element):
            s = self.vals[idx.elem_vars[nid][2]]
            return s.width if s is not None else None
        if node.kind is GroupKind.ALTERNATE:
            rv = self.vals[idx.repr_var[nid]]
            return self._node_w(rv) if rv is not None else None
        arr_vi, _, pad_vi = idx.group_vars[nid]
        arr = self.vals[arr_vi]
        pad = self.vals[pad_vi]
        if arr is None:
            return None
        widths = [self._node_w(c) for c in idx.children[nid]]
        if any(w is None for w in widths):
            return None
        if arr is Arrangement.HORIZONTAL:
            if pad is None:
                return None
            return sum(widths) + (len(widths) - 1) * pad
        if arr is Arrangement.VERTICAL:
            return max(widths)
        return None

    def _node_h(self, nid: str) -> int | None:
        version = self._node_version[nid]
        cached = self._size_cache.get(("h", nid))
        if cached is not None and cached[0] == version:
            return cached[1]
        value = self._node_h_raw(nid)
        self._size_cache[("h", nid)] = (version, value)
        return value

    def _node_h_raw(self, nid: str) -> int | None:
        idx = self.index
        node = idx.nodes[nid]
        if isinstance(node, Element):
            s = self.vals[idx.elem_vars[nid][2]]
            return s.height if s is not None else None
        if node.kind is GroupKind.ALTERNATE:
            rv = self.vals[idx.repr_var[nid]]
            return self._node_h(rv) if rv is not None else None
        arr_vi, _, pad_vi = idx.group_vars[nid]
        arr = self.vals[arr_vi]
        pad = self.vals[pad_vi]
        if arr is None:
            return None
        heights = [self._node_h(c) for c in idx.children[nid]]
        if any(h is None for h in heights):
            return None
        if arr is Arrangement.VERTICAL:
            if pad is None:
                return None
            return sum(heights) + (len(heights) - 1) * pad
        if arr is Arrangement.HORIZONTAL:
            return max(heights)
        return None

    def _subset_sums(self, extents: list[int], pad: int) -> set[int] | None:
        if len(extents) > 7:
            return None
        sums = {0}
        for k in range(1, len(extents) + 1):
            for combo in itertools.combinations(extents, k):
                sums.add(sum(combo) + k * pad)
        return sums

    def _left_cands(self, nid: str) -> set[int] | None:
        """Possible left edges of a node's box, derived from grid anchors and
        the flow structure of its ancestors.  None means "no restriction known";
        a returned set is complete (no feasible value outside it)."""
        idx = self.index
        parent = idx.parent[nid]
        if parent is None:
            if self._grid_vars is None:
                return None
            lines = self._grid_lines(*self._grid_vars)
            return set(lines[0]) if lines is not None else None
        pnode = idx.nodes[parent]
        if pnode.kind is GroupKind.ALTERNATE:
            if self.vals[idx.repr_var[parent]] != nid:
                return None
            return self._left_cands(parent)
        arr_vi, align_vi, pad_vi = idx.group_vars[parent]
        arr = self.vals[arr_vi]
        pad = self.vals[pad_vi]
        if arr is None or pad is None:
            return None
        kids = idx.children[parent]
        if arr is Arrangement.VERTICAL:
            ali = self.vals[align_vi]
            base = self._left_cands(parent)
            if ali is None or base is None:
                return None
            if ali is AlignmentAxis.LEFT:
                return base
            w_self = self._node_w(nid)
            widths = [self._node_w(c) for c in kids]
            if w_self is None or any(w is None for w in widths):
                return None
            out: set[int] = set()
            for c in base:
                for wj in widths:
                    if wj < w_self:
                        continue
                    if ali is AlignmentAxis.RIGHT:
                        out.add(c + wj - w_self)
                    elif (wj - w_self) % 2 == 0:
                        out.add(c + (wj - w_self) // 2)
            return out if len(out) <= self._MAX_CANDS else None
        if arr is Arrangement.COLUMNS and self.vals[align_vi] is not AlignmentAxis.LEFT:
            return None
        base = self._left_cands(parent)
        if base is None:
            return None
        if (arr is Arrangement.HORIZONTAL and isinstance(pnode, Group)
                and pnode.order_important):
            prefix = []
            for cid in kids:
                if cid == nid:
                    break
                prefix.append(self._node_w(cid))
            if any(w is None for w in prefix):
                return None
            offset = sum(prefix) + len(prefix) * pad
            return {c + offset for c in base}
        widths = [self._node_w(c) for c in kids if c != nid]
        if any(w is None for w in widths):
            return None
        sums = self._subset_sums(widths, pad)
        if sums is None:
            return None
        out = {c + s for c in base for s in sums}
        return out if len(out) <= self._MAX_CANDS else None

    def _top_cands(self, nid: str) -> set[int] | None:
        idx = self.index
        parent = idx.parent[nid]
        if parent is None:
            return None
        pnode = idx.nodes[parent]
        if pnode.kind is GroupKind.ALTERNATE:
            if self.vals[idx.repr_var[parent]] != nid:
                return None
            return self._top_cands(parent)
        arr_vi, align_vi, pad_vi = idx.group_vars[parent]
        arr = self.vals[arr_vi]
        pad = self.vals[pad_vi]
        if arr is None or pad is None:
            return None
        kids = idx.children[parent]
        if arr is Arrangement.HORIZONTAL:
            ali = self.vals[align_vi]
            base = self._top_cands(parent)
            if ali is None or base is None:
                return None
            if ali is AlignmentAxis.TOP:
                return base
            h_self = self._node_h(nid)
            heights = [self._node_h(c) for c in kids]
            if h_self is None or any(h is None for h in heights):
                return None
            out: set[int] = set()
            for c in base:
                for hj in heights:
                    if hj < h_self:
                        continue
                    if ali is AlignmentAxis.BOTTOM:
                        out.add(c + hj - h_self)
                    elif (hj - h_self) % 2 == 0:
                        out.add(c + (hj - h_self) // 2)
            return out if len(out) <= self._MAX_CANDS else None
        if arr is Arrangement.ROWS:
            ali = self.vals[align_vi]
            base = self._top_cands(parent)
            if base is None:
                return None
            heights = [self._node_h(c) for c in kids if c != nid]
            if any(h is None for h in heights):
                return None
            sums = self._subset_sums(heights, pad)
            if sums is None:
                return None
            tops = {c + s for c in base for s in sums}
            if ali is AlignmentAxis.TOP:
                out = tops
            elif ali in (AlignmentAxis.BOTTOM, AlignmentAxis.Y_CENTER):
                h_self = self._node_h(nid)
                all_heights = [self._node_h(c) for c in kids]
                if h_self is None or any(h is None for h in all_heights):
                    return None
                out = set()
                for t in tops:
                    for hj in all_heights:
                        if hj < h_self:
                            continue
                        if ali is AlignmentAxis.BOTTOM:
                            out.add(t + hj - h_self)
                        elif (hj - h_self) % 2 == 0:
                            out.add(t + (hj - h_self) // 2)
            else:
                return None
            return out if len(out) <= self._MAX_CANDS else None
        base = self._top_cands(parent)
        if base is None:
            return None
        if (arr is Arrangement.VERTICAL and isinstance(pnode, Group)
                and pnode.order_important):
            prefix = []
            for cid in kids:
                if cid == nid:
                    break
                prefix.append(self._node_h(cid))
            if any(h is None for h in prefix):
                return None
            offset = sum(prefix) + len(prefix) * pad
            return {c + offset for c in base}
        heights = [self._node_h(c) for c in kids if c != nid]
        if any(h is None for h in heights):
            return None
        sums = self._subset_sums(heights, pad)
        if sums is None:
            return None
        out = {c + s for c in base for s in sums}
        return out if len(out) <= self._MAX_CANDS else None

    def _propose_align(self, data, vi: int, is_x: bool):
        arr_vi, align_vi, children, slot, gate = data
        if gate is not None and self.vals[gate[0]] != gate[1]:
            return None
        arr = self.vals[arr_vi]
        ali = self.vals[align_vi]
        if arr is None or ali is None:
            return None
        if arr in (Arrangement.HORIZONTAL, Arrangement.ROWS):
            if is_x:
                return None
        elif arr in (Arrangement.VERTICAL, Arrangement.COLUMNS):
            if not is_x:
                return None
        if arr in (Arrangement.ROWS, Arrangement.COLUMNS):
            return None  # per-run alignment: runs unknown until placement completes
        boxes = [self._box(c) for c in children]
        me = boxes[slot]
        ext = me[8] if is_x else me[10]
        if (me[9] if is_x else me[11]) != ext:
            return None
        for i, b in enumerate(boxes):
            if i == slot:
                continue
            lo, hi = (0, 4) if is_x else (2, 6)
            if b[lo] != b[lo + 1] or b[hi] != b[hi + 1]:
                continue
            if ali in (AlignmentAxis.TOP, AlignmentAxis.LEFT):
                return (b[lo],)
            if ali in (AlignmentAxis.BOTTOM, AlignmentAxis.RIGHT):
                return (b[hi] - ext,)
            total = b[lo] + b[hi] - ext
            if total % 2 != 0:
                return ()
            return (total // 2,)
        return None


# ---------------------------------------------------------------------------
# Helper geometry


def _disjoint_x(a: tuple, b: tuple) -> int:
    parts = (
        TRUE if a[5] <= b[0] else (FALSE if a[4] > b[1] else UNKNOWN),
        TRUE if b[5] <= a[0] else (FALSE if b[4] > a[1] else UNKNOWN),
    )
    return _tri_or(parts)


def _disjoint_y(a: tuple, b: tuple) -> int:
    parts = (
        TRUE if a[7] <= b[2] else (FALSE if a[6] > b[3] else UNKNOWN),
        TRUE if b[7] <= a[2] else (FALSE if b[6] > a[3] else UNKNOWN),
    )
    return _tri_or(parts)


def _bands(boxes: list, axis: str) -> list[list[int]]:
    """Cluster singleton boxes into maximal runs by interval overlap on one axis."""
    lo, hi = (2, 6) if axis == "y" else (0, 4)
    order = sorted(range(len(boxes)), key=lambda i: boxes[i][lo])
    bands: list[list[int]] = []
    band_end = None
    for i in order:
        if band_end is None or boxes[i][lo] >= band_end:
            bands.append([i])
            band_end = boxes[i][hi]
        else:
            bands[-1].append(i)
            band_end = max(band_end, boxes[i][hi])
    return bands


# ---------------------------------------------------------------------------
# Search over completions


def backtrack_solve(resolver: Resolver, *, rng=None, node_cap: int | None = None,
                    order: Sequence[int] | None = None,
                    reject: Callable[[Resolver], bool] | None = None):
    """Depth-first search for one satisfying completion of the current state.

    Returns (bindings | None, exhausted, nodes): bindings maps var index to
    value for a full consistent assignment; exhausted is True when the search
    space was fully explored without (further) solutions.  `reject` may veto a
    full assignment (used for dedup blocking), in which case the search keeps
    going.  The resolver is restored to its entry state before returning.
    """
    base = resolver.bound_count()
    if not resolver.check():
        return None, True, 0
    if order is None:
        pending = [v.index for v in resolver.variables if resolver.vals[v.index] is None]
        pending.sort(key=lambda vi: (len(resolver.variables[vi].domain), vi))
    else:
        pending = [vi for vi in order if resolver.vals[vi] is None]
    nodes = 0
    solution: dict | None = None

    def dfs(pos: int) -> bool:
        nonlocal nodes, solution
        if pos == len(pending):
            if reject is not None and reject(resolver):
                return False
            solution = dict(resolver.bindings())
            return True
        vi = pending[pos]
        cands = resolver.propose_values(vi)
        cands = list(resolver.variables[vi].domain) if cands is None else list(cands)
        if rng is not None:
            rng.shuffle(cands)
        for val in cands:
            nodes += 1
            if node_cap is not None and nodes > node_cap:
                raise _Budget()
            tok = resolver.push_binding(vi, val)
            if resolver.check() and dfs(pos + 1):
                return True
            resolver.pop(tok)
        return False

    try:
        found = dfs(0)
    except _Budget:
        resolver.pop(base)
        return None, False, nodes
    resolver.pop(base)
    if found:
        return solution, False, nodes
    return None, True, nodes


def satisfiable(variables, constraints, bindings: dict | None = None,
                index: SpecIndex | None = None, node_cap: int | None = None):
    """Decisive satisfiability of a constraint set under partial bindings.

    Returns (sat, capped): `capped` is True when the node budget stopped the
    search before it could prove anything (treated as unsat by callers that
    need a conservative answer).
    """
    r = Resolver(variables, constraints, index, propose=False)
    for vi, val in (bindings or {}).items():
        if val not in r._dom_sets[vi]:
            return False, False
        r.push_binding(vi, val)
        if not r.check():
            return False, False
    solution, exhausted, _ = backtrack_solve(r, node_cap=node_cap)
    if solution is not None:
        return True, False
    return False, not exhausted


def extract_core(variables, constraints, bindings: dict | None = None,
                 index: SpecIndex | None = None, node_cap: int | None = None) -> ConflictCore:
    """Deletion-minimal unsatisfiable subset of `constraints` under `bindings`.

    Raises ContractViolation when the input is satisfiable.  Candidates are
    dropped non-feedback first so surviving cores name the feedback items that
    actually conflict.
    """
    if isinstance(constraints, ConstraintSet):
        all_cons = list(constraints.constraints)
    else:
        all_cons = list(constraints)
    bindings = dict(bindings or {})
    capped_any = False

    def unsat(subset: list[Constraint]) -> bool:
        nonlocal capped_any
        sat, capped = satisfiable(variables, subset, bindings, index, node_cap)
        capped_any = capped_any or capped
        return not sat

    r = Resolver(variables, all_cons, index)
    for vi, val in bindings.items():
        if r.vals[vi] is None and val in r._dom_sets[vi]:
            r.push_binding(vi, val)
    violated = r.violated_constraints()

    if violated and unsat(violated):
        candidates = violated
    else:
        if not unsat(all_cons):
            raise ContractViolation("extract_core called on a satisfiable set")
        candidates = all_cons

    candidates = sorted(candidates, key=lambda c: (c.is_feedback, c.id))
    core = list(candidates)
    for c in candidates:
        if len(core) == 1:
            break
        trial = [x for x in core if x is not c]
        if unsat(trial):
            core = trial
    return ConflictCore(
        constraint_ids=frozenset(c.id for c in core),
        feedback_ids=frozenset(c.provenance for c in core if c.is_feedback),
        minimal=not capped_any,
    )
