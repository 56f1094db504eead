"""Numerical laboratory for the replicator map and maps whose periodic orbits share one mean."""

__version__ = "0.1.0"

from .maps import (
    ConjugateMap,
    Doubling,
    GeneratedMap,
    MapParams,
    ReplicatorMap,
    Rotation,
    critical_points,
    eval_f,
    eval_f_prime,
    eval_g,
    eval_g_prime,
    eval_g_second,
    fixed_points,
    schwarzian,
)
from .periodic import PeriodicOrbit, find_periodic, periodic_search, verify_mean_law
from .certify import certify
from .symbolic import counts, enumerate_periodic

__all__ = [
    "__version__",
    "MapParams",
    "ReplicatorMap",
    "ConjugateMap",
    "GeneratedMap",
    "Rotation",
    "Doubling",
    "eval_f",
    "eval_f_prime",
    "eval_g",
    "eval_g_prime",
    "eval_g_second",
    "fixed_points",
    "critical_points",
    "schwarzian",
    "PeriodicOrbit",
    "find_periodic",
    "periodic_search",
    "verify_mean_law",
    "certify",
    "counts",
    "enumerate_periodic",
]
