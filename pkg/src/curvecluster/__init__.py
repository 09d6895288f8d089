"""Cluster algebras of punctured surfaces and their curve-algebra models."""

from .cluster import ExchangeMatrix, Seed, explore, laurent_expand, mutate_matrix, mutate_seed
from .exactmath import CoeffRing, LaurentPoly, PolyRing, RationalFn, parse_rational
from .surface import TaggedTriangulation, builtin, exchange_matrix, glue, seed_of, tagged_flip

__all__ = [
    "CoeffRing",
    "ExchangeMatrix",
    "LaurentPoly",
    "PolyRing",
    "RationalFn",
    "Seed",
    "TaggedTriangulation",
    "builtin",
    "exchange_matrix",
    "explore",
    "glue",
    "laurent_expand",
    "mutate_matrix",
    "mutate_seed",
    "parse_rational",
    "seed_of",
    "tagged_flip",
]
