"""Periodic orbits: bracketing search, cycle refinement, stability, attractors.

For the replicator family the search runs in the logit coordinate, where
``g`` is smooth on the line and the invariant set is not squeezed against
the endpoints.  Every periodic point of ``g`` lies in the hull
``[min(g_min, y0), max(g_max, y0)]``, so that hull is the search interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import expit

from .maps import (
    ConjugateMap,
    IntervalMap,
    MapParams,
    ReplicatorMap,
    critical_points,
    eval_f,
    inv_logit,
    logit,
)

__all__ = [
    "PeriodicOrbit",
    "TangencySuspect",
    "SearchResult",
    "MeanLawReport",
    "AttractorRecord",
    "CensusResult",
    "BifurcationTable",
    "periodic_search",
    "find_periodic",
    "periodic_points",
    "refine_cycle",
    "verify_mean_law",
    "classify",
    "attractor_census",
    "bifurcation_scan",
    "grid_size",
    "DEDUP_TOL_X",
    "DEDUP_TOL_Y",
]

DEDUP_TOL_X = 1e-9
DEDUP_TOL_Y = 1e-8
NEUTRAL_BAND = 1e-6
GRID_CAP = 2_000_000
EPS = np.finfo(float).eps


@dataclass
class PeriodicOrbit:
    """A refined cycle, stored from its smallest point.

    ``residual`` is the cycle defect ``max_k |T(p_k) - p_{k+1}|`` after a
    multiple-shooting refinement; ``composed_residual`` is
    ``|T^n(p_0) - p_0|`` from straight composition, which carries the
    conditioning factor ``|multiplier|``.
    """

    least_period: int
    points: np.ndarray
    multiplier: float
    mean: float
    residual: float
    composed_residual: float = 0.0
    kind: str = "f"
    y_points: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def interior(self) -> bool:
        return not (self.kind == "f" and np.any((self.points == 0.0) | (self.points == 1.0)))

    def as_dict(self) -> dict:
        return {
            "period": self.least_period,
            "points": list(map(float, self.points)),
            "multiplier": float(self.multiplier),
            "mean": float(self.mean),
            "residual": float(self.residual),
            "composed_residual": float(self.composed_residual),
            "stability": classify(self),
        }


@dataclass
class TangencySuspect:
    """A near-zero of ``T^n(x) - x`` with no sign change around it."""

    period: int
    point: float
    value: float


@dataclass
class SearchResult:
    n: int
    orbits: list
    solutions: np.ndarray
    tangencies: list
    grid_points: int


# -- dynamics adaptors ------------------------------------------------------

class _LineDyn:
    """``g`` on the line, used for both ``f`` and ``g`` requests."""

    def __init__(self, params: MapParams):
        self.params = params
        self.a, self.b = params.a, params.b
        self.y0 = params.y0
        if params.monotone:
            self.crit = ()
            self.lo = self.hi = self.y0
        else:
            ymax, ymin = critical_points(params, "g")
            self.crit = (ymax, ymin)
            gmin, gmax = self.fn(ymin), self.fn(ymax)
            self.lo, self.hi = min(gmin, self.y0), max(gmax, self.y0)

    def fn(self, y):
        return y + self.a * expit(-y) - self.a * self.b

    def dfn(self, y):
        return 1.0 - self.a * expit(y) * expit(-y)

    def branches(self):
        pts = [self.lo, *[c for c in self.crit if self.lo < c < self.hi], self.hi]
        return list(zip(pts[:-1], pts[1:]))


class _GenericDyn:
    def __init__(self, T: IntervalMap, domain):
        self.T = T
        lo, hi = domain
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError("a finite search interval is required for this map")
        self.lo, self.hi = float(lo), float(hi)
        self.crit = tuple(c for c in T.critical_points() if self.lo < c < self.hi)

    def fn(self, x):
        return np.asarray(self.T(x), dtype=float)

    def dfn(self, x):
        return np.asarray(self.T.deriv(x), dtype=float)

    def branches(self):
        pts = [self.lo, *self.crit, self.hi]
        return list(zip(pts[:-1], pts[1:]))


def _compose(dyn, y, n):
    for _ in range(n):
        y = dyn.fn(y)
    return y


def _compose_deriv(dyn, y, n):
    d = np.ones_like(y)
    for _ in range(n):
        d = d * dyn.dfn(y)
        y = dyn.fn(y)
    return y, d


def _preimages(dyn, t, max_points):
    """Preimages of the values ``t`` inside the search hull, branch by branch."""
    out = []
    for l, r in dyn.branches():
        gl, gr = float(dyn.fn(np.array(l))), float(dyn.fn(np.array(r)))
        inc = gr > gl
        tl, th = min(gl, gr), max(gl, gr)
        tt = t[(t >= tl) & (t <= th)]
        if tt.size == 0:
            continue
        L = np.full(tt.shape, l)
        R = np.full(tt.shape, r)
        for _ in range(80):
            M = 0.5 * (L + R)
            v = dyn.fn(M)
            up = (v < tt) if inc else (v > tt)
            L = np.where(up, M, L)
            R = np.where(up, R, M)
        out.append(0.5 * (L + R))
        if sum(len(o) for o in out) > max_points:
            break
    return np.concatenate(out) if out else np.empty(0)


def _turning_points(dyn, n, max_points=GRID_CAP):
    """Interior turning points of ``T^n``: preimages of order < n of critical points."""
    cur = np.array([c for c in dyn.crit if dyn.lo < c < dyn.hi])
    found = [cur]
    total = cur.size
    for _ in range(1, n):
        if cur.size == 0 or total > max_points:
            break
        cur = _preimages(dyn, cur, max_points)
        found.append(cur)
        total += cur.size
    return np.concatenate(found) if found else np.empty(0)


def grid_size(n: int) -> int:
    return int(min(max(10_000, 500 * 2**n), GRID_CAP))


# -- root location ----------------------------------------------------------

def _bisect_newton(dyn, n, L, R, FL):
    """Vectorized bisection on brackets, then guarded Newton polish."""
    L, R, FL = L.copy(), R.copy(), FL.copy()
    for _ in range(45):
        M = 0.5 * (L + R)
        FM = _compose(dyn, M, n) - M
        same = np.sign(FM) == np.sign(FL)
        L = np.where(same, M, L)
        FL = np.where(same, FM, FL)
        R = np.where(same, R, M)
    x = 0.5 * (L + R)
    done = np.zeros(x.shape, dtype=bool)
    conv = np.zeros(x.shape, dtype=bool)
    for _ in range(100):
        y, d = _compose_deriv(dyn, x, n)
        F = y - x
        step = F / (d - 1.0)
        cand = x - step
        ok = np.isfinite(cand) & (cand >= L) & (cand <= R)
        small = ok & (np.abs(step) <= 4 * EPS * (1.0 + np.abs(x)))
        x = np.where(ok & ~done, cand, x)
        conv |= small & ~done
        done |= small | ~ok
        if done.all():
            break
    # brackets where Newton stalled or left the bracket finish by bisection
    bad = ~conv
    if np.any(bad):
        l, r, fl = L[bad], R[bad], FL[bad]
        for _ in range(200):
            m = 0.5 * (l + r)
            fm = _compose(dyn, m, n) - m
            same = np.sign(fm) == np.sign(fl)
            l, fl, r = np.where(same, m, l), np.where(same, fm, fl), np.where(same, r, m)
        x[bad] = 0.5 * (l + r)
    return x


def _dedup_sorted(x, tol):
    if x.size == 0:
        return x
    x = np.sort(x)
    keep = np.concatenate([[True], np.diff(x) > tol * (1.0 + np.abs(x[1:]))])
    return x[keep]


def _tangencies(dyn, n, grid, F, tol=1e-10):
    """Local minima of |F| without a sign change that come close to zero."""
    A = np.abs(F)
    mid = np.arange(1, len(F) - 1)
    cand = mid[(A[mid] <= A[mid - 1]) & (A[mid] <= A[mid + 1])
               & (np.sign(F[mid - 1]) == np.sign(F[mid]))
               & (np.sign(F[mid + 1]) == np.sign(F[mid]))
               & (A[mid] < 1e-6 * (1.0 + np.abs(grid[mid])))]
    out = []
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    for i in cand:
        l, r = grid[i - 1], grid[i + 1]
        for _ in range(100):
            m1, m2 = r - phi * (r - l), l + phi * (r - l)
            f1 = abs(float(_compose(dyn, np.array(m1), n)) - m1)
            f2 = abs(float(_compose(dyn, np.array(m2), n)) - m2)
            if f1 < f2:
                r = m2
            else:
                l = m1
        m = 0.5 * (l + r)
        v = abs(float(_compose(dyn, np.array(m), n)) - m)
        if v <= tol:
            out.append(TangencySuspect(n, float(m), v))
    return out


def _solve_line(dyn, n, grid_resolution=None):
    if dyn.hi <= dyn.lo:
        return np.array([dyn.lo]), [], 1
    N = grid_resolution or grid_size(n)
    width = dyn.hi - dyn.lo
    lo, hi = dyn.lo - 1e-9 * width, dyn.hi + 1e-9 * width
    turn = _turning_points(dyn, n)
    grid = np.unique(np.concatenate([np.linspace(lo, hi, int(N)), turn]))
    F = _compose(dyn, grid, n) - grid
    idx = np.nonzero(np.sign(F[:-1]) * np.sign(F[1:]) < 0)[0]
    roots = _bisect_newton(dyn, n, grid[idx], grid[idx + 1], F[idx]) if idx.size else np.empty(0)
    tang = _tangencies(dyn, n, grid, F)
    # exact zeros count as roots only if the sign changes across them
    exact = []
    nz = np.nonzero(F)[0]
    for i in np.nonzero(F == 0.0)[0]:
        k = np.searchsorted(nz, i)
        left = F[nz[k - 1]] if k > 0 else 0.0
        right = F[nz[k]] if k < nz.size else 0.0
        if left * right < 0 or left == 0.0 or right == 0.0:
            exact.append(grid[i])
        elif not any(abs(t.point - grid[i]) <= 1e-6 * (1.0 + abs(grid[i])) for t in tang):
            tang.append(TangencySuspect(n, float(grid[i]), 0.0))
    allr = np.concatenate([roots, np.asarray(exact, dtype=float)])
    return allr, tang, len(grid)


# -- cycles -----------------------------------------------------------------

def refine_cycle(fn, dfn, points, maxiter: int = 50):
    """Multiple-shooting Newton on ``T(p_k) = p_{k+1 mod n}``.

    Returns ``(points, defect, converged)``.  The Jacobian is
    ``diag(T'(p)) - shift``; its determinant is ``prod T' - 1`` up to sign,
    so the system is regular away from neutral cycles.
    """
    p = np.array(points, dtype=float)
    n = len(p)

    def defect(q):
        return np.roll(np.asarray(fn(q), dtype=float), 1) - q

    r = defect(p)
    best = float(np.max(np.abs(r)))
    converged = False
    stalls = 0
    for _ in range(maxiter):
        d = np.asarray(dfn(p), dtype=float)
        # row k: T(p_{k-1}) - p_k, so J[k, k-1] = T'(p_{k-1}), J[k, k] = -1
        J = -np.eye(n)
        J[np.arange(n), np.arange(n) - 1] += d[np.arange(n) - 1]
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            break
        q = p + step
        if not np.all(np.isfinite(q)):
            break
        rq = defect(q)
        cur = float(np.max(np.abs(rq)))
        if cur < best:
            p, r, best = q, rq, cur
            stalls = 0
        else:
            stalls += 1
            if stalls >= 2:
                break
        if best <= 4 * EPS * (1.0 + float(np.max(np.abs(p)))):
            converged = True
            break
    if not converged:
        converged = best <= 1e-10 * (1.0 + float(np.max(np.abs(p))))
    return p, best, converged


def _least_period(pts, tol):
    n = len(pts)
    for d in range(1, n + 1):
        if n % d:
            continue
        if np.all(np.abs(np.roll(pts, -d) - pts) <= tol * (1.0 + np.abs(pts))):
            return d
    return n


def _rotate_min(pts):
    k = int(np.argmin(pts))
    return np.roll(pts, -k)


def _make_orbit(kind, dyn, ycyc, params=None, T=None):
    """Package a refined cycle in native coordinates."""
    mult = float(np.prod(dyn.dfn(ycyc)))
    n = len(ycyc)
    if kind == "f":
        x = np.asarray(inv_logit(ycyc), dtype=float)
        x = _rotate_min(x)
        ynat = np.asarray(logit(x), dtype=float)
        fx = np.asarray(eval_f(params, x), dtype=float)
        resid = float(np.max(np.abs(fx - np.roll(x, -1))))
        comp = x[:1]
        for _ in range(n):
            comp = np.asarray(eval_f(params, comp), dtype=float)
        composed = float(abs(comp[0] - x[0]))
        mean = math.fsum(x) / n
        return PeriodicOrbit(n, x, mult, mean, resid, composed, "f", ynat)
    pts = _rotate_min(np.asarray(ycyc, dtype=float))
    fp = np.asarray(dyn.fn(pts), dtype=float)
    resid = float(np.max(np.abs(fp - np.roll(pts, -1))))
    composed = float(abs(_compose(dyn, pts[:1], n)[0] - pts[0]))
    mean = math.fsum(pts) / n
    return PeriodicOrbit(n, pts, mult, mean, resid, composed, kind,
                         pts if kind == "g" else None)


def _endpoint_orbits(params):
    a, b = params.a, params.b
    return [
        PeriodicOrbit(1, np.array([0.0]), math.exp(a * b), 0.0, 0.0, 0.0, "f"),
        PeriodicOrbit(1, np.array([1.0]), math.exp(a * (1.0 - b)), 1.0, 0.0, 0.0, "f"),
    ]


def _in_domain(v, domain):
    if domain is None:
        return np.ones(np.shape(v), dtype=bool)
    ivs = [domain] if np.ndim(domain[0]) == 0 else domain
    v = np.asarray(v)
    ok = np.zeros(v.shape, dtype=bool)
    for lo, hi in ivs:
        ok |= (v >= lo) & (v <= hi)
    return ok


def _resolve(T):
    if isinstance(T, MapParams):
        T = ReplicatorMap(T)
    if isinstance(T, ReplicatorMap):
        return "f", _LineDyn(T.params), T.params
    if isinstance(T, ConjugateMap):
        return "g", _LineDyn(T.params), T.params
    return "generic", None, None


def periodic_search(T, n: int, domain=None, grid_resolution: Optional[int] = None) -> SearchResult:
    """Find every solution of ``T^n(x) = x`` and group them into cycles.

    ``T`` is a :class:`ReplicatorMap`, a :class:`ConjugateMap`, a
    :class:`MapParams` (meaning ``f``) or any :class:`IntervalMap` with a
    finite ``domain``.  ``domain`` restricts the reported points; it may be
    one interval ``(lo, hi)`` or a list of intervals, given in the map's own
    coordinate.  ``orbits`` holds the cycles of least period exactly ``n``
    whose points all lie in ``domain``; ``solutions`` holds every root in
    ``domain``, including those of divisor periods.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    kind, dyn, params = _resolve(T)
    if kind == "generic":
        dom = T.domain if domain is None or np.ndim(domain[0]) != 0 else domain
        dyn = _GenericDyn(T, dom)
        tol = DEDUP_TOL_X
    else:
        tol = DEDUP_TOL_Y
    roots, tang, gpts = _solve_line(dyn, n, grid_resolution)
    roots = _dedup_sorted(roots, tol)

    cycles = []
    claimed = np.zeros(roots.size, dtype=bool)
    for i, r in enumerate(roots):
        if claimed[i]:
            continue
        orb = np.empty(n)
        orb[0] = r
        for k in range(1, n):
            orb[k] = float(dyn.fn(np.array(orb[k - 1])))
        d = _least_period(orb, tol)
        cyc, _, _ = refine_cycle(dyn.fn, dyn.dfn, orb[:d])
        # every root on this cycle is claimed
        for p in cyc:
            j = np.searchsorted(roots, p)
            for jj in (j - 1, j, j + 1):
                if 0 <= jj < roots.size and abs(roots[jj] - p) <= tol * (1.0 + abs(p)) * 10:
                    claimed[jj] = True
        cycles.append(cyc)

    orbits = []
    for cyc in cycles:
        d = _least_period(cyc, tol) if len(cyc) > 1 else 1
        if len(cyc) != n or d != n:
            continue
        orbit = _make_orbit(kind, dyn, cyc, params)
        if np.all(_in_domain(orbit.points, domain)):
            orbits.append(orbit)

    sols = roots
    if kind == "f":
        sols = np.concatenate([[0.0], np.sort(np.asarray(inv_logit(roots))), [1.0]])
        if n == 1:
            orbits = _endpoint_orbits(params)[:1] + orbits + _endpoint_orbits(params)[1:]
    sols = sols[_in_domain(sols, domain)]
    orbits.sort(key=lambda o: float(o.points[0]))
    return SearchResult(n, orbits, sols, tang, gpts)


def find_periodic(T, n: int, domain=None, grid_resolution: Optional[int] = None) -> list:
    """Cycles of least period ``n``; see :func:`periodic_search`."""
    return periodic_search(T, n, domain, grid_resolution).orbits


def periodic_points(T, n: int, domain=None, grid_resolution: Optional[int] = None) -> np.ndarray:
    """All distinct solutions of ``T^n(x) = x`` inside ``domain``."""
    return periodic_search(T, n, domain, grid_resolution).solutions


# -- reports ----------------------------------------------------------------

@dataclass
class MeanLawReport:
    b: float
    tol: float
    checked: int
    excluded: int
    worst_deviation: float
    violations: list

    @property
    def passed(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {"b": self.b, "tol": self.tol, "checked": self.checked,
                "excluded": self.excluded, "worst_deviation": self.worst_deviation,
                "violations": self.violations, "passed": self.passed}


def verify_mean_law(orbits: Sequence[PeriodicOrbit], b: float, tol: float = 1e-8) -> MeanLawReport:
    """Check ``|mean - b| <= tol`` on every interior orbit (0 and 1 excluded)."""
    worst, checked, excluded, bad = 0.0, 0, 0, []
    for o in orbits:
        if not o.interior:
            excluded += 1
            continue
        checked += 1
        dev = abs(o.mean - b)
        worst = max(worst, dev)
        if dev > tol:
            bad.append({"period": o.least_period, "first_point": float(o.points[0]),
                        "deviation": dev})
    return MeanLawReport(float(b), tol, checked, excluded, worst, bad)


def classify(orbit) -> str:
    """``superstable``, ``stable``, ``neutral`` or ``unstable`` by ``|multiplier|``."""
    m = abs(orbit.multiplier if isinstance(orbit, PeriodicOrbit) else float(orbit))
    if m <= 1e-12:
        return "superstable"
    if abs(m - 1.0) <= NEUTRAL_BAND:
        return "neutral"
    return "stable" if m < 1.0 else "unstable"


# -- attractors -------------------------------------------------------------

def _detect_cycle(dyn, w, pmax, tol):
    """Period of the tail of ``w``, confirmed or found by cycle Newton.

    Returns ``(period, cycle, multiplier)`` or ``None``.  A Newton-found
    cycle is accepted only if it is not repelling and the window approaches
    it monotonically or already sits on it.
    """
    m = len(w)
    tail = w[m // 2:]
    scale = 1.0 + float(np.max(np.abs(tail)))
    pmax = min(pmax, len(tail) // 2)
    for p in range(1, pmax + 1):
        if np.max(np.abs(tail[p:] - tail[:-p])) <= tol * scale:
            cyc, _, ok = refine_cycle(dyn.fn, dyn.dfn, tail[-p:])
            if not ok:
                cyc = tail[-p:]
            d = _least_period(cyc, DEDUP_TOL_Y)
            cyc = cyc[:d]
            return d, cyc, float(np.prod(dyn.dfn(cyc)))
    for p in range(1, pmax + 1):
        start = w[-p:]
        cyc, _, ok = refine_cycle(dyn.fn, dyn.dfn, start)
        if not ok or _least_period(cyc, DEDUP_TOL_Y) != p:
            continue
        mult = float(np.prod(dyn.dfn(cyc)))
        if abs(mult) > 1.0 + NEUTRAL_BAND:
            continue
        close = True
        # stride 2p so that flip-type (alternating) approach also counts
        for j in range(p):
            idx = np.arange(m - p + j, -1, -2 * p)[::-1]
            dist = np.abs(w[idx] - cyc[j])
            if dist[-1] <= 1e-6 * scale:
                continue
            if np.any(np.diff(dist) > 1e-12 * scale):
                close = False
                break
        if close:
            return p, cyc, mult
    return None


@dataclass
class AttractorRecord:
    kind: str
    period: Optional[int]
    points: np.ndarray
    multiplier: Optional[float]
    seeds: list

    def as_dict(self):
        return {"kind": self.kind, "period": self.period, "points": list(map(float, self.points)),
                "multiplier": self.multiplier, "seeds": self.seeds}


@dataclass
class CensusResult:
    count: int
    attractors: list

    def as_dict(self):
        return {"count": self.count, "attractors": [r.as_dict() for r in self.attractors]}


def _iterate_line(dyn, y, n):
    a, b = dyn.a, dyn.b
    ab = a * b
    for _ in range(n):
        if y >= 0.0:
            e = math.exp(-y)
            y = y + a * (e / (1.0 + e)) - ab
        else:
            y = y + a / (1.0 + math.exp(y)) - ab
    return y


def attractor_census(params: MapParams, transient: int = 10_000, window: int = 512,
                     cluster_tol: float = 1e-6, max_period: int = 64) -> CensusResult:
    """Count attracting sets reached from the two critical points.

    Both critical orbits are followed in the logit coordinate.  Points are
    reported in ``x``.
    """
    if params.monotone:
        raise ValueError("the census needs a > 4 (two critical points)")
    dyn = _LineDyn(params)
    records = []
    for name, c in zip(("x_max", "x_min"), dyn.crit):
        y = _iterate_line(dyn, c, transient)
        w = np.empty(window)
        for k in range(window):
            w[k] = y
            y = _iterate_line(dyn, y, 1)
        found = _detect_cycle(dyn, w, max_period, cluster_tol)
        if found:
            p, cyc, mult = found
            rec = AttractorRecord("cycle", p, np.sort(np.asarray(inv_logit(cyc))), mult, [name])
            rec._y = np.asarray(cyc)
        else:
            rec = AttractorRecord("aperiodic attractor candidate", None,
                                  np.sort(np.asarray(inv_logit(w))), None, [name])
            rec._y = w
        merged = False
        for other in records:
            if _same_attractor(rec, other, cluster_tol):
                other.seeds.append(name)
                merged = True
                break
        if not merged:
            records.append(rec)
    return CensusResult(len(records), records)


def _same_attractor(r1, r2, tol):
    y1, y2 = np.sort(r1._y), np.sort(r2._y)
    if r1.kind == "cycle" and r2.kind == "cycle":
        if r1.period != r2.period:
            return False
        scale = 1.0 + float(np.max(np.abs(y2)))
        return bool(np.max(np.abs(y1 - y2)) <= max(tol, 1e-8) * scale)
    if r1.kind != r2.kind:
        return False
    # aperiodic windows: same set if the hulls overlap substantially
    lo, hi = max(y1[0], y2[0]), min(y1[-1], y2[-1])
    span = max(y1[-1] - y1[0], y2[-1] - y2[0], 1e-300)
    return (hi - lo) > 0.5 * span


@dataclass
class BifurcationTable:
    b: float
    a_values: np.ndarray
    samples: np.ndarray
    periods: list

    def rows(self):
        for a, row in zip(self.a_values, self.samples):
            for s in row:
                yield float(a), float(s)

    def first_change(self, from_period: int = 1, to_period: int = 2):
        """Midpoint of the first step where the period goes ``from -> to``.

        Grid points without a detected period are skipped.
        """
        prev = None
        for i, p in enumerate(self.periods):
            if p is None:
                continue
            if prev is not None and self.periods[prev] == from_period and p == to_period:
                return 0.5 * (float(self.a_values[prev]) + float(self.a_values[i]))
            prev = i
        return None


def _scan_chunk(b, a_values, burn_in, samples_per_a, max_period, tol):
    A = np.asarray(a_values, dtype=float)
    s = np.sqrt(A * A / 4.0 - A)
    ymin = np.log(A / 2.0 - 1.0 + s)
    Y = np.stack([-ymin, ymin], axis=1)
    Ac = A[:, None]
    for _ in range(burn_in):
        Y = Y + Ac * expit(-Y) - Ac * b
    W = np.empty((len(A), 2, samples_per_a))
    for k in range(samples_per_a):
        W[:, :, k] = Y
        Y = Y + Ac * expit(-Y) - Ac * b
    periods = []
    for i, a in enumerate(A):
        dyn = _LineDyn(MapParams(a, b))
        ps = []
        for j in range(2):
            found = _detect_cycle(dyn, W[i, j], max_period, tol)
            ps.append(found[0] if found else None)
        periods.append(None if None in ps else max(ps))
    samples = np.asarray(inv_logit(W.reshape(len(A), -1)))
    return samples, periods


def bifurcation_scan(b: float, a_range=(4.1, 10.0), a_steps: int = 200,
                     samples_per_a: int = 64, burn_in: int = 2000, max_period: int = 16,
                     tol: float = 1e-9, jobs: int = 1) -> BifurcationTable:
    """Attractor samples from both critical seeds for each ``a`` on a uniform grid.

    ``periods[i]`` is the largest detected least period over the two seeds,
    or ``None`` when either seed shows no periodic attractor.
    """
    lo, hi = a_range
    if lo <= 4.0:
        raise ValueError("the scan range must lie in a > 4")
    a_values = np.linspace(lo, hi, a_steps)
    if jobs > 1 and a_steps > 1:
        from concurrent.futures import ProcessPoolExecutor

        chunks = np.array_split(a_values, min(jobs, a_steps))
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_scan_chunk, [b] * len(chunks), chunks,
                                [burn_in] * len(chunks), [samples_per_a] * len(chunks),
                                [max_period] * len(chunks), [tol] * len(chunks)))
        samples = np.concatenate([p[0] for p in parts])
        periods = [q for p in parts for q in p[1]]
    else:
        samples, periods = _scan_chunk(b, a_values, burn_in, samples_per_a, max_period, tol)
    return BifurcationTable(float(b), a_values, samples, periods)
