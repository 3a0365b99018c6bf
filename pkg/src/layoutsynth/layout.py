"""Concrete layouts: geometry derived from bindings, canonical ids, serialization."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from enum import Enum

from .domains import SizeTriple, VarName, VariableStore
from .model import DesignSpec, Element, Group, GroupKind


class LayoutState(str, Enum):
    FRESH = "fresh"
    SAVED = "saved"
    DISCARDED = "discarded"
    INVALID = "invalid"


@dataclass(frozen=True)
class Layout:
    id: str
    bindings: dict  # variable id -> value
    geometry: dict  # active element id -> (x, y, w, h)
    representations: dict  # alternate group id -> selected element id
    quality: object | None = None  # QualityBreakdown, filled by the quality module
    state: LayoutState = LayoutState.FRESH

    def with_state(self, state: LayoutState) -> "Layout":
        return replace(self, state=state)

    def with_quality(self, quality) -> "Layout":
        return replace(self, quality=quality)


def canon_value(value):
    if isinstance(value, SizeTriple):
        return ["size", value.width, value.height, value.factor]
    if isinstance(value, Enum):
        return value.value
    return value


def uncanon_value(raw, domain):
    if isinstance(raw, list) and raw and raw[0] == "size":
        return SizeTriple(raw[1], raw[2], raw[3])
    for v in domain:
        if v == raw or (isinstance(v, Enum) and v.value == raw):
            return v
    return raw


def bindings_by_id(store: VariableStore, vals_by_index: dict) -> dict:
    return {store.variables[vi].id: value for vi, value in sorted(vals_by_index.items())}


def bindings_by_index(store: VariableStore, bindings: dict) -> dict:
    return {store.by_id[var_id].index: value for var_id, value in bindings.items()}


def layout_hash(store: VariableStore, vals_by_index: dict) -> str:
    canon = [(store.variables[vi].id, canon_value(v)) for vi, v in sorted(vals_by_index.items())]
    digest = hashlib.sha256(json.dumps(canon, separators=(",", ":")).encode()).hexdigest()
    return digest[:16]


def active_elements(spec: DesignSpec, representations: dict) -> list[Element]:
    out: list[Element] = []

    def walk(children) -> None:
        for node in children:
            if isinstance(node, Element):
                out.append(node)
            elif node.kind is GroupKind.ALTERNATE:
                chosen = representations[node.id]
                for child in node.children:
                    if child.id == chosen:
                        out.append(child)
            else:
                walk(node.children)

    walk(spec.canvas.children)
    return out


def derive_layout(spec: DesignSpec, store: VariableStore, vals_by_index: dict,
                  state: LayoutState = LayoutState.FRESH) -> Layout:
    """Deterministic image of a full assignment: geometry for active elements."""
    bindings = bindings_by_id(store, vals_by_index)
    representations = {
        g.id: bindings[f"{g.id}.{VarName.REPRESENTATION.value}"]
        for g in spec.groups.values() if g.kind is GroupKind.ALTERNATE
    }
    geometry = {}
    for element in active_elements(spec, representations):
        x = bindings[f"{element.id}.x"]
        y = bindings[f"{element.id}.y"]
        size: SizeTriple = bindings[f"{element.id}.size"]
        geometry[element.id] = (x, y, size.width, size.height)
    return Layout(
        id=layout_hash(store, vals_by_index),
        bindings=bindings,
        geometry=geometry,
        representations=representations,
        state=state,
    )


def layout_to_dict(layout: Layout) -> dict:
    quality = layout.quality.as_dict() if layout.quality is not None else None
    return {
        "version": 1,
        "layout_id": layout.id,
        "state": layout.state.value,
        "bindings": {k: canon_value(v) for k, v in layout.bindings.items()},
        "geometry": {k: list(v) for k, v in layout.geometry.items()},
        "representations": dict(layout.representations),
        "quality": quality,
    }


def layout_from_dict(raw: dict, store: VariableStore) -> Layout:
    bindings = {
        var_id: uncanon_value(value, store.by_id[var_id].domain if var_id in store.by_id else ())
        for var_id, value in raw["bindings"].items()
    }
    return Layout(
        id=raw["layout_id"],
        bindings=bindings,
        geometry={k: tuple(v) for k, v in raw["geometry"].items()},
        representations=dict(raw.get("representations", {})),
        state=LayoutState(raw.get("state", "fresh")),
    )
