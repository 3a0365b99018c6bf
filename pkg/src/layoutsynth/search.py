"""Randomized generation of valid, novel layouts.

Workers run restart-style randomized depth-first dives over a stratified
variable order (canvas grid first, then group variables outer to inner, then
representation, size, position).  Value order is shuffled uniformly per dive.
Every full assignment is claimed against a shared dedup set, so no two layouts
with identical bindings are ever emitted in one session; blocked assignments
are skipped in-tree and the dive continues to the next solution.
"""

from __future__ import annotations

import hashlib
import random
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .constraints import Constraint, ConstraintKind, ConstraintSet, SpecIndex
from .domains import VarName, VariableStore
from .layout import Layout, derive_layout, layout_hash
from .model import DesignSpec, Element, Group, GroupKind
from .resolver import ConflictCore, Resolver, backtrack_solve, extract_core
from .validator import validate_layout


@dataclass(frozen=True)
class SearchConfig:
    worker_count: int = 8
    rng_seed: int = 0
    node_budget: int = 50_000
    batch_size: int = 20


class DedupSet:
    """Session-wide registry of emitted assignments, shared by all workers."""

    def __init__(self):
        self._lock = threading.Lock()
        self._bindings: dict[str, tuple] = {}

    def claim(self, key: str, items: tuple) -> bool:
        with self._lock:
            if key in self._bindings:
                return False
            self._bindings[key] = items
            return True

    def release(self, key: str) -> None:
        with self._lock:
            self._bindings.pop(key, None)

    def __contains__(self, key: str) -> bool:
        with self._lock:
            return key in self._bindings

    def __len__(self) -> int:
        with self._lock:
            return len(self._bindings)

    def blocking_constraints(self, store: VariableStore) -> list[Constraint]:
        with self._lock:
            snapshot = dict(self._bindings)
        return [_blocking_constraint(key, items) for key, items in sorted(snapshot.items())]


def _blocking_constraint(key: str, items: tuple) -> Constraint:
    return Constraint(
        id=f"blocking:{key}",
        kind=ConstraintKind.BLOCKING,
        provenance=f"layout:{key}",
        op="block",
        args=(items,),
        scope=frozenset(vi for vi, _ in items),
        expression="assignment differs from an already generated layout",
    )


def block_layout(layout: Layout, store: VariableStore) -> Constraint:
    """Materialize the negation of a layout's full assignment."""
    items = tuple(sorted((store.by_id[var_id].index, value)
                         for var_id, value in layout.bindings.items()))
    return _blocking_constraint(layout.id, items)


@dataclass
class BatchResult:
    layouts: list[Layout]
    core: ConflictCore | None = None
    exhausted: bool = False


def _derive_seed(seed: int, worker: int) -> int:
    digest = hashlib.sha256(f"{seed}:{worker}".encode()).hexdigest()
    return int(digest[:16], 16)


def stratified_order(index: SpecIndex, store: VariableStore, rng: random.Random) -> list[int]:
    """Variable order for one dive: fixed strata, random order inside each."""
    canvas = [store.get("canvas", name).index for name in
              (VarName.MARGIN, VarName.COLUMNS, VarName.GUTTER_WIDTH,
               VarName.COLUMN_WIDTH, VarName.BASELINE_GRID)]
    rng.shuffle(canvas)

    by_depth: dict[int, list[str]] = {}
    for gid in index.group_vars:
        by_depth.setdefault(index.depth[gid], []).append(gid)
    group_vars: list[int] = []
    for depth in sorted(by_depth):
        level = by_depth[depth]
        rng.shuffle(level)
        for gid in level:
            layout_vars = list(index.group_vars[gid])
            rng.shuffle(layout_vars)
            group_vars.extend(layout_vars)

    representation = [index.repr_var[gid] for gid in sorted(index.repr_var)]
    rng.shuffle(representation)

    sizes = [index.elem_vars[eid][2] for eid in sorted(index.elem_vars)]
    rng.shuffle(sizes)

    positions: list[int] = []

    def place(node_ids) -> None:
        ids = list(node_ids)
        rng.shuffle(ids)
        for nid in ids:
            node = index.nodes[nid]
            if isinstance(node, Element):
                xy = [index.elem_vars[nid][0], index.elem_vars[nid][1]]
                rng.shuffle(xy)
                positions.extend(xy)
            else:
                place(index.children[nid])

    place(index.canvas_children)
    return canvas + group_vars + representation + sizes + positions


class _BatchState:
    def __init__(self, target: int):
        self.lock = threading.Lock()
        self.count = 0
        self.target = target

    def full(self) -> bool:
        with self.lock:
            return self.count >= self.target

    def add(self) -> None:
        with self.lock:
            self.count += 1


def _worker(worker_id: int, spec: DesignSpec, store: VariableStore,
            constraints: ConstraintSet, index: SpecIndex, config: SearchConfig,
            dedup: DedupSet, state: _BatchState):
    rng = random.Random(_derive_seed(config.rng_seed, worker_id))
    resolver = Resolver(store, constraints, index)
    budget = config.node_budget
    found: list[Layout] = []
    exhausted = False

    while budget > 0 and not state.full():
        order = stratified_order(index, store, rng)
        claimed: list[str] = []

        def reject(r: Resolver) -> bool:
            vals = r.bindings()
            key = layout_hash(store, vals)
            if not dedup.claim(key, tuple(sorted(vals.items()))):
                return True
            claimed.append(key)
            return False

        solution, was_exhausted, nodes = backtrack_solve(
            resolver, rng=rng, node_cap=budget, order=order, reject=reject)
        budget -= nodes
        if solution is None:
            exhausted = was_exhausted
            break
        layout = derive_layout(spec, store, solution)
        problems = validate_layout(spec, store, layout)
        if problems:
            raise RuntimeError(
                f"solver emitted a layout the geometric validator rejects: {problems}")
        found.append(layout)
        state.add()
    return found, exhausted


def generate_batch(spec: DesignSpec, store: VariableStore, constraints: ConstraintSet,
                   config: SearchConfig, dedup: DedupSet,
                   index: SpecIndex | None = None) -> BatchResult:
    """Produce up to config.batch_size valid layouts absent from the dedup set.

    On an unsatisfiable constraint set the batch is empty and carries a
    deletion-minimal diagnostic core (which may name blocking constraints when
    only already-seen layouts remain).
    """
    idx = index or SpecIndex(spec, store)
    state = _BatchState(config.batch_size)
    results: list[tuple[list[Layout], bool]] = []
    if config.worker_count <= 1:
        results.append(_worker(0, spec, store, constraints, idx, config, dedup, state))
    else:
        with ThreadPoolExecutor(max_workers=config.worker_count) as pool:
            futures = [
                pool.submit(_worker, w, spec, store, constraints, idx, config, dedup, state)
                for w in range(config.worker_count)
            ]
            results = [f.result() for f in futures]

    layouts: list[Layout] = []
    for worker_layouts, _ in results:
        layouts.extend(worker_layouts)
    exhausted = any(exh for _, exh in results)

    if len(layouts) > config.batch_size:
        for extra in layouts[config.batch_size:]:
            dedup.release(extra.id)
        layouts = layouts[:config.batch_size]

    core = None
    if not layouts and exhausted:
        blocked = dedup.blocking_constraints(store)
        core = extract_core(store, constraints.extended(blocked), {}, idx,
                            node_cap=500_000)
    return BatchResult(layouts=layouts, core=core, exhausted=exhausted)
