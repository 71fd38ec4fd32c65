"""Numerical radius, numerical index and essential radii on sequence spaces."""

from .spaces import (
    INF,
    DirectSum,
    Lp,
    NormingPair,
    ScalarField,
    SpaceSpec,
    dsum,
    dual_space,
    duality_map,
    lp,
    norm,
    pairing,
    parse_space,
)

__all__ = [
    "INF",
    "DirectSum",
    "Lp",
    "NormingPair",
    "ScalarField",
    "SpaceSpec",
    "dsum",
    "dual_space",
    "duality_map",
    "lp",
    "norm",
    "pairing",
    "parse_space",
]
