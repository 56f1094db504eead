"""Invariant measures, shift functions and finite-basis coboundary solves.

A shift function is ``phi - phi∘T``.  Its integral against any invariant
measure vanishes, which for the replicator map forces every periodic orbit
to average ``b``: ``x - b`` is the shift function of ``-h/a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import chebyshev as C

from .maps import Doubling, IntervalMap, Rotation, logit
from .periodic import PeriodicOrbit

__all__ = [
    "EmpiricalMeasure",
    "FunctionBasis",
    "CoboundaryFit",
    "RankReport",
    "orbit_measure",
    "long_orbit_measure",
    "uniform_measure",
    "invariance_residual",
    "coboundary_lsq",
    "residual_curve",
    "measure_rank_probe",
    "reference_map",
    "GOLDEN",
]

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class EmpiricalMeasure:
    """Weighted atoms; weights are renormalised to sum to one."""

    points: np.ndarray
    weights: np.ndarray
    source: str = "periodic-orbit"

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).ravel()
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.shape != self.points.shape:
            raise ValueError("points and weights differ in length")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and non-negative")
        total = math.fsum(w)
        if total <= 0:
            raise ValueError("weights sum to zero")
        self.weights = w / total

    def __len__(self):
        return len(self.points)

    def integrate(self, phi: Callable) -> float:
        vals = np.asarray(phi(self.points), dtype=float)
        return math.fsum(self.weights * vals)


def orbit_measure(orbit) -> EmpiricalMeasure:
    """Equal weights on the points of a cycle."""
    pts = orbit.points if isinstance(orbit, PeriodicOrbit) else np.asarray(orbit, dtype=float)
    n = len(pts)
    return EmpiricalMeasure(pts, np.full(n, 1.0 / n), "periodic-orbit")


def long_orbit_measure(T: IntervalMap, x0: float, n: int, burn_in: int = 1000) -> EmpiricalMeasure:
    z = float(T.orbit(x0, burn_in)[-1]) if burn_in else float(x0)
    pts = T.orbit(z, n - 1)
    return EmpiricalMeasure(pts, np.full(n, 1.0 / n), "long-orbit")


def uniform_measure(n: int, interval=(0.0, 1.0)) -> EmpiricalMeasure:
    """Midpoint grid of ``n`` cells on ``interval``."""
    lo, hi = interval
    pts = lo + (hi - lo) * (np.arange(n) + 0.5) / n
    return EmpiricalMeasure(pts, np.full(n, 1.0 / n), "uniform-grid")


def invariance_residual(measure: EmpiricalMeasure, T, phi: Callable) -> float:
    """``|∫phi dμ - ∫phi∘T dμ|``."""
    return abs(measure.integrate(phi) - measure.integrate(lambda x: phi(T(x))))


# -- bases ----------------------------------------------------------------------

@dataclass
class FunctionBasis:
    names: list
    funcs: list
    interval: tuple = (0.0, 1.0)

    def __len__(self):
        return len(self.funcs)

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.stack([np.asarray(f(x), dtype=float) * np.ones_like(x) for f in self.funcs], axis=-1)

    @classmethod
    def chebyshev(cls, degree: int = 16, interval=(0.0, 1.0), include_logit: bool = False,
                  include_constant: bool = False) -> "FunctionBasis":
        """Chebyshev polynomials rescaled to ``interval``.

        The constant ``T_0`` is left out by default since it contributes a
        zero column to every coboundary system.
        """
        lo, hi = interval
        names, funcs = [], []
        for k in range(0 if include_constant else 1, degree + 1):
            coef = np.zeros(k + 1)
            coef[k] = 1.0
            funcs.append(lambda x, c=coef: C.chebval((2.0 * x - lo - hi) / (hi - lo), c))
            names.append(f"T{k}")
        if include_logit:
            if lo <= 0.0 or hi >= 1.0:
                raise ValueError("the logit member needs an interval inside (0, 1)")
            funcs.append(logit)
            names.append("logit")
        return cls(names, funcs, (lo, hi))

    @classmethod
    def monomial(cls, degree: int, include_constant: bool = True) -> "FunctionBasis":
        ks = range(0 if include_constant else 1, degree + 1)
        return cls([f"x^{k}" for k in ks], [lambda x, k=k: x**k for k in ks], (0.0, 1.0))

    @classmethod
    def trig(cls, degree: int) -> "FunctionBasis":
        names, funcs = [], []
        for k in range(1, degree + 1):
            funcs.append(lambda x, k=k: np.cos(2 * np.pi * k * x))
            funcs.append(lambda x, k=k: np.sin(2 * np.pi * k * x))
            names += [f"cos{k}", f"sin{k}"]
        return cls(names, funcs, (0.0, 1.0))


@dataclass
class CoboundaryFit:
    residual: float
    coefficients: np.ndarray
    names: list
    condition: float
    ridge: float
    ill_conditioned: bool

    def coefficient(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])

    def as_dict(self):
        return {"residual": self.residual, "coefficients": dict(zip(self.names, map(float, self.coefficients))),
                "condition": self.condition, "ridge": self.ridge, "ill_conditioned": self.ill_conditioned}


def coboundary_lsq(T, psi: Callable, basis: FunctionBasis, samples,
                   ridge: float = 1e-12, max_condition: float = 1e10) -> CoboundaryFit:
    """Least-squares fit of ``psi ≈ phi - phi∘T`` with ``phi`` in the span of ``basis``.

    Columns are normalised before forming the ridge-regularised normal
    equations.  When the condition number of the regularised normal
    matrix exceeds ``max_condition`` (about the square of the column
    condition) the ridge is raised tenfold until it does not and the fit
    is flagged.
    ``residual`` is the root-mean-square misfit over ``samples``.
    """
    x = np.asarray(samples, dtype=float)
    D = basis.evaluate(x) - basis.evaluate(np.asarray(T(x), dtype=float))
    y = np.asarray(psi(x), dtype=float) * np.ones_like(x)
    norms = np.linalg.norm(D, axis=0)
    norms[norms == 0] = 1.0
    Dn = D / norms
    G = Dn.T @ Dn
    rhs = Dn.T @ y
    lam = ridge
    flagged = False
    I = np.eye(G.shape[0])
    cond = float(np.linalg.cond(G + lam * I))
    while cond > max_condition:
        flagged = True
        lam *= 10.0
        cond = float(np.linalg.cond(G + lam * I))
    c = np.linalg.solve(G + lam * I, rhs)
    r = y - Dn @ c
    rms = float(np.sqrt(np.mean(r * r)))
    return CoboundaryFit(rms, c / norms, list(basis.names), cond, lam, flagged)


def residual_curve(T, psi: Callable, degrees: Sequence[int], samples, interval=(0.0, 1.0),
                   include_logit: bool = False, kind: str = "chebyshev") -> list:
    """``(basis size, residual)`` pairs for increasing basis degree."""
    out = []
    for d in degrees:
        if kind == "trig":
            B = FunctionBasis.trig(d)
        else:
            B = FunctionBasis.chebyshev(d, interval, include_logit)
        out.append((len(B), coboundary_lsq(T, psi, B, samples).residual))
    return out


# -- rank probe -----------------------------------------------------------------

@dataclass
class RankReport:
    rank: int
    singular_values: np.ndarray
    matrix: np.ndarray
    threshold: float

    def as_dict(self):
        return {"rank": self.rank, "singular_values": list(map(float, self.singular_values)),
                "threshold": self.threshold}


def measure_rank_probe(measures: Sequence[EmpiricalMeasure], basis: FunctionBasis,
                       rtol: float = 1e-8, atol: float = 1e-12, center: bool = False) -> RankReport:
    """Effective rank of ``M[i, j] = ∫basis_j dμ_i``.

    Singular values above ``max(rtol * σ_max, atol)`` count.  With
    ``center`` the column means are removed first, so a column that is the
    same for every measure contributes nothing.
    """
    M = np.array([[m.integrate(f) for f in basis.funcs] for m in measures], dtype=float)
    A = M - M.mean(axis=0) if center else M
    s = np.linalg.svd(A, compute_uv=False)
    smax = float(s[0]) if s.size else 0.0
    thr = max(rtol * smax, atol)
    return RankReport(int(np.sum(s > thr)), s, M, thr)


def reference_map(kind: str, alpha: Optional[float] = None, seed: int = 0) -> IntervalMap:
    """``rotation`` (golden-mean angle by default) or ``doubling``."""
    if kind == "rotation":
        return Rotation(GOLDEN if alpha is None else alpha)
    if kind == "doubling":
        return Doubling(seed)
    raise ValueError(f"unknown reference map {kind!r}")
