"""Persistent homology engines and their brute-force verification oracles."""

from .cubical import cubical_persistence
from .rips import AUTO, rips_persistence
from .oracles import oracle_betti_cubical, oracle_rips_h0, oracle_rips_reduction

__all__ = [
    "AUTO",
    "cubical_persistence",
    "rips_persistence",
    "oracle_betti_cubical",
    "oracle_rips_h0",
    "oracle_rips_reduction",
]
