"""Orbits, Birkhoff sums, Lyapunov exponents and coboundary probes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .io import write_csv
from .maps import IntervalMap, MapParams, eval_f, logit

__all__ = [
    "Orbit",
    "LyapunovResult",
    "CoboundaryProbe",
    "OverflowGuardError",
    "iterate",
    "birkhoff_sums",
    "birkhoff_average",
    "iterate_recursive_formula",
    "lyapunov_exponent",
    "cycle_lyapunov",
    "coboundary_probe",
    "write_orbit_csv",
    "h_excursion",
]

DEFAULT_BURN_IN = 1000
DERIV_FLOOR = 1e-300


class OverflowGuardError(OverflowError):
    """The exponent of the closed-form iterate left the representable range."""

    def __init__(self, msg, partial_sum):
        super().__init__(msg)
        self.partial_sum = partial_sum


@dataclass
class Orbit:
    map_info: dict
    x0: float
    points: np.ndarray

    @property
    def length(self) -> int:
        return len(self.points) - 1


def iterate(T: IntervalMap, x0: float, n: int) -> Orbit:
    """Return ``x0, T(x0), ..., T^n(x0)``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    lo, hi = T.domain
    if not (lo <= x0 <= hi):
        raise ValueError(f"x0={x0} outside the domain {T.domain}")
    return Orbit(T.describe(), float(x0), T.orbit(x0, n))


def birkhoff_sums(values: np.ndarray) -> np.ndarray:
    """Partial sums ``S_k = sum_{i<k} values[i]`` for ``k = 0..len(values)``."""
    return np.concatenate([[0.0], np.cumsum(values)])


def birkhoff_average(T: IntervalMap, phi: Callable, x0: float, n: int,
                     burn_in: int = DEFAULT_BURN_IN) -> float:
    """``(1/n) sum_{i<n} phi(T^i z)`` with ``z = T^burn_in(x0)``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    z = float(T.orbit(x0, burn_in)[-1]) if burn_in else float(x0)
    pts = T.orbit(z, n - 1)
    return float(np.mean(np.asarray(phi(pts), dtype=float)))


def iterate_recursive_formula(params: MapParams, x: float, n: int) -> float:
    """``f^n(x)`` through the closed form with the Birkhoff sum in the exponent.

    ``f^n(x) = x / (x + (1-x) exp(a * sum_{i<n} (f^i(x) - b)))``.
    """
    if not (0.0 < x < 1.0):
        raise ValueError("x must be interior to (0, 1)")
    if n < 1:
        raise ValueError("n must be at least 1")
    a, b = params.a, params.b
    s, z = 0.0, x
    for i in range(n):
        s += z - b
        if i < n - 1:
            z = float(eval_f(params, z))
    t = a * s
    if abs(t) > 700.0:
        raise OverflowGuardError(f"exponent a*S = {t:.6g} out of range", s)
    if t <= 0:
        return x / (x + (1.0 - x) * math.exp(t))
    e = math.exp(-t)
    return x * e / (x * e + (1.0 - x))


@dataclass
class LyapunovResult:
    exponent: float
    n: int
    burn_in: int
    degenerate_hits: int = 0

    def __float__(self):
        return self.exponent


def lyapunov_exponent(T: IntervalMap, x0: float, n: int,
                      burn_in: int = DEFAULT_BURN_IN) -> LyapunovResult:
    """Average of ``ln|T'|`` along ``n`` steps after ``burn_in``.

    A derivative below 1e-300 in magnitude (a hit on a critical point)
    contributes ``ln(1e-300)`` and is counted in ``degenerate_hits``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    z = float(T.orbit(x0, burn_in)[-1]) if burn_in else float(x0)
    pts = T.orbit(z, n - 1)
    d = np.abs(np.asarray(T.deriv(pts), dtype=float))
    bad = d < DERIV_FLOOR
    d = np.where(bad, DERIV_FLOOR, d)
    return LyapunovResult(float(np.mean(np.log(d))), n, burn_in, int(bad.sum()))


def cycle_lyapunov(T: IntervalMap, points) -> float:
    """Lyapunov exponent of the invariant measure on a periodic cycle."""
    pts = np.asarray(points, dtype=float)
    return float(np.mean(np.log(np.abs(np.asarray(T.deriv(pts), dtype=float)))))


@dataclass
class CoboundaryProbe:
    """Running suprema of centred Birkhoff sums.

    ``running_max[k]`` is ``max_{j<=k} max_x |S_j(psi)(x) - j*mean|``
    over the sample points.  ``growth_exponent`` is the least-squares slope
    of ``log running_max`` against ``log k`` on the second half of the run.
    """

    horizon: int
    mean: float
    running_max: np.ndarray
    per_sample_sup: np.ndarray
    growth_exponent: float
    classification: str
    sums: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def value(self) -> float:
        return float(self.running_max[-1])


def coboundary_probe(T: IntervalMap, psi: Callable, x_samples, N: int,
                     mean: float = 0.0, bounded_exponent: float = 0.2,
                     keep_sums: bool = False) -> CoboundaryProbe:
    """Probe whether ``psi - mean`` is a continuous coboundary for ``T``.

    Bounded Birkhoff sums along an orbit are equivalent to being a
    coboundary for minimal systems; this reports the empirical growth.
    """
    xs = np.atleast_1d(np.asarray(x_samples, dtype=float))
    sums = np.empty((len(xs), N + 1))
    for i, x in enumerate(xs):
        pts = T.orbit(x, N - 1)
        vals = np.asarray(psi(pts), dtype=float) - mean
        sums[i] = birkhoff_sums(vals)
    absS = np.abs(sums)
    running = np.maximum.accumulate(absS.max(axis=0))
    k = np.arange(N + 1)
    half = slice(max(N // 2, 1), N + 1)
    with np.errstate(divide="ignore"):
        lk, lm = np.log(k[half]), np.log(np.maximum(running[half], 1e-300))
    slope = float(np.polyfit(lk, lm, 1)[0]) if len(lk) > 1 else 0.0
    cls = "bounded" if slope < bounded_exponent else "growth suspected"
    return CoboundaryProbe(N, mean, running, absS.max(axis=1), slope, cls,
                           sums if keep_sums else None)


def write_orbit_csv(path, points, psi_values=None, cfg_hash=None):
    """Write ``k, x_k, S_k`` rows; ``S_k`` sums ``psi`` over the first k points."""
    pts = np.asarray(points, dtype=float)
    if psi_values is None:
        S = np.zeros(len(pts))
    else:
        S = birkhoff_sums(np.asarray(psi_values, dtype=float))[: len(pts)]
    write_csv(path, ["k", "x_k", "S_k"],
              ((k, x, s) for k, (x, s) in enumerate(zip(pts, S))), cfg_hash)


def h_excursion(params: MapParams, points) -> float:
    """``max_k |h(x_k)|`` along stored points (the telescoping bound input)."""
    pts = np.asarray(points, dtype=float)
    inner = pts[(pts > 0.0) & (pts < 1.0)]
    return float(np.max(np.abs(logit(inner)))) if len(inner) else math.inf
