"""Constructive hyperbolicity certificate for the conjugate map ``g_{a,b}``.

The certificate locates two disjoint intervals ``J1`` (symbol 0) and ``J2``
(symbol 1) on which ``g`` acts like the golden-mean shift: ``g(J1)`` covers
both intervals, ``g(J2)`` covers ``J1`` and misses ``J2``, and two steps of
``g`` expand.  The invariant set ``K`` of points that never leave
``J1 ∪ J2`` is then conjugate to the shift on words without ``11``.

For ``b > 1/2`` the work is done on the reflected map ``y -> -g(-y)``, which
is exactly ``g_{a,1-b}``; results are mapped back through ``y -> -y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from .maps import MapParams, critical_points, eval_g, eval_g_prime, inv_logit
from .periodic import PeriodicOrbit, refine_cycle
from .symbolic import SymbolicWord, counts, is_admissible

__all__ = [
    "RootNotBracketed",
    "EscapedK",
    "HyperbolicCertificate",
    "KApproximation",
    "A0Result",
    "landmarks",
    "check_A2",
    "boundary_points",
    "covering_check",
    "check_A6",
    "certify",
    "approximate_K",
    "expansion_check",
    "itinerary",
    "point_from_word",
    "cycle_from_word",
    "find_a0",
    "default_a_grid",
    "A2_ASSUMPTION",
]

A2_ASSUMPTION = ("third inequality of the critical-value conditions taken as "
                 "g(g_max) > y_min")
ROOT_TOL = 1e-12


class RootNotBracketed(ArithmeticError):
    pass


class EscapedK(ValueError):
    """An orbit left ``J1 ∪ J2`` before the requested number of steps."""


def _work_params(params: MapParams):
    """Parameters of the map actually analysed, and the reflection sign."""
    if params.b > 0.5:
        return params.mirror(), -1.0
    return params, 1.0


def landmarks(params: MapParams) -> tuple:
    """``(y0, y_max, y_min, g_min, g_max)`` for ``g_{a,b}`` itself (no reflection)."""
    y_max, y_min = critical_points(params, "g")
    if abs(y_min + y_max) > 1e-12 * max(1.0, abs(y_min)):
        raise AssertionError("critical points are not symmetric")
    g_min = float(eval_g(params, y_min))
    g_max = float(eval_g(params, y_max))
    return params.y0, y_max, y_min, g_min, g_max


def check_A2(params: MapParams) -> tuple:
    """Signed margins ``(y_max - g_min, g_max - y_min, g(g_max) - y_min)`` and pass flag."""
    work, _ = _work_params(params)
    _, y_max, y_min, g_min, g_max = landmarks(work)
    m = (y_max - g_min, g_max - y_min, float(eval_g(work, g_max)) - y_min)
    return m, all(v > 0 for v in m)


def _solve(work, target, lo, hi, what):
    """Root of ``g(y) = target`` on a monotone piece ``[lo, hi]``."""
    f = lambda y: float(eval_g(work, y)) - target
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise RootNotBracketed(f"{what}: g - {target:.6g} has no sign change on [{lo:.6g}, {hi:.6g}]")
    y = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    for _ in range(3):
        d = float(eval_g_prime(work, y))
        if d == 0.0:
            break
        step = f(y) / d
        if not (lo <= y - step <= hi) or abs(f(y - step)) >= abs(f(y)):
            break
        y -= step
    if abs(f(y)) > ROOT_TOL * max(1.0, abs(target)):
        raise RootNotBracketed(f"{what}: residual {abs(f(y)):.3g} above tolerance")
    return y


def boundary_points(params: MapParams) -> tuple:
    """``(y2+, y1-, y1+, y2-)`` in the working coordinate."""
    work, _ = _work_params(params)
    a, b = work.a, work.b
    _, y_max, y_min, _, _ = landmarks(work)
    far = y_min + a * b + a + 10.0
    y2p = _solve(work, y_min, y_min, far, "y2+")
    y1m = _solve(work, y2p, y_max, y_min, "y1-")
    y1p = _solve(work, y_max, y_max, y_min, "y1+")
    y2m = _solve(work, y_max, y_min, far, "y2-")
    return y2p, y1m, y1p, y2m


@dataclass
class HyperbolicCertificate:
    params: MapParams
    reflected: bool
    y0: float
    y_max: float
    y_min: float
    g_min: float
    g_max: float
    a2_margins: tuple
    a2_pass: bool
    y2_plus: Optional[float] = None
    y1_minus: Optional[float] = None
    y1_plus: Optional[float] = None
    y2_minus: Optional[float] = None
    ordering_ok: bool = False
    covering: dict = field(default_factory=dict)
    a6_margin: Optional[float] = None
    a6_product: Optional[float] = None
    derivatives: dict = field(default_factory=dict)
    asymptotics: dict = field(default_factory=dict)
    depth: int = 0
    component_count: Optional[int] = None
    expected_components: Optional[int] = None
    expansion_min: Optional[float] = None
    expansion_margin: Optional[float] = None
    passed: bool = False
    diagnostics: list = field(default_factory=list)
    assumptions: tuple = (A2_ASSUMPTION,)

    @property
    def work_params(self) -> MapParams:
        return _work_params(self.params)[0]

    @property
    def sign(self) -> float:
        return -1.0 if self.reflected else 1.0

    @property
    def J1(self):
        return (self.y1_minus, self.y1_plus)

    @property
    def J2(self):
        return (self.y2_minus, self.y2_plus)

    def intervals_original(self):
        """``J1, J2`` in the coordinate of ``g_{a,b}`` itself."""
        if not self.reflected:
            return self.J1, self.J2
        return (-self.y1_plus, -self.y1_minus), (-self.y2_plus, -self.y2_minus)

    def as_dict(self) -> dict:
        J1o, J2o = self.intervals_original() if self.y1_minus is not None else (None, None)
        return {
            "a": self.params.a,
            "b": self.params.b,
            "reflected": self.reflected,
            "landmarks": {"y0": self.y0, "y_max": self.y_max, "y_min": self.y_min,
                          "g_min": self.g_min, "g_max": self.g_max},
            "a2": {"margins": list(self.a2_margins), "pass": self.a2_pass},
            "boundary_points": {"y2_plus": self.y2_plus, "y1_minus": self.y1_minus,
                                "y1_plus": self.y1_plus, "y2_minus": self.y2_minus},
            "J1": list(self.J1) if self.y1_minus is not None else None,
            "J2": list(self.J2) if self.y2_minus is not None else None,
            "J1_original": list(J1o) if J1o else None,
            "J2_original": list(J2o) if J2o else None,
            "ordering_ok": self.ordering_ok,
            "covering": self.covering,
            "a6": {"margin": self.a6_margin, "product": self.a6_product,
                   "derivatives": self.derivatives, "asymptotics": self.asymptotics},
            "depth": self.depth,
            "component_count": self.component_count,
            "expected_components": self.expected_components,
            "expansion_min": self.expansion_min,
            "expansion_margin": self.expansion_margin,
            "pass": self.passed,
            "diagnostics": list(self.diagnostics),
            "assumptions": list(self.assumptions),
        }


def covering_check(cert: HyperbolicCertificate) -> dict:
    """Covering relations from endpoint values and monotonicity alone."""
    w = cert.work_params
    y1m, y1p, y2m, y2p = cert.y1_minus, cert.y1_plus, cert.y2_minus, cert.y2_plus
    g = lambda y: float(eval_g(w, y))
    mono1 = cert.y_max <= y1m and y1p <= cert.y_min  # g decreasing on J1
    mono2 = cert.y_min <= y2m  # g increasing on J2
    lo1, hi1 = g(y1p), g(y1m)
    lo2, hi2 = g(y2m), g(y2p)
    flags = {
        "J1_monotone": mono1,
        "J2_monotone": mono2,
        "g(J1)>=J1uJ2": mono1 and lo1 <= min(y1m, y2m) + 1e-12 and hi1 >= max(y1p, y2p) - 1e-12,
        "g(J2)>=J1": mono2 and lo2 <= y1m + 1e-12 and hi2 >= y1p - 1e-12,
        "g(J2)^J2=empty": mono2 and (hi2 < y2m or lo2 > y2p),
        "g(J1)": [lo1, hi1],
        "g(J2)": [lo2, hi2],
    }
    flags["all"] = bool(flags["g(J1)>=J1uJ2"] and flags["g(J2)>=J1"] and flags["g(J2)^J2=empty"])
    return flags


def check_A6(cert: HyperbolicCertificate) -> tuple:
    """``min(|g'(y1-)|, |g'(y1+)|) * g'(y2-) - 1`` and its sign."""
    w = cert.work_params
    a, b = w.a, w.b
    d1m = float(eval_g_prime(w, cert.y1_minus))
    d1p = float(eval_g_prime(w, cert.y1_plus))
    d2m = float(eval_g_prime(w, cert.y2_minus))
    prod = min(abs(d1m), abs(d1p)) * d2m
    cert.derivatives = {"g'(y1-)": d1m, "g'(y1+)": d1p, "g'(y2-)": d2m}
    cert.asymptotics = {
        "g'(y1+)~1-ab(1-b)": 1.0 - a * b * (1.0 - b),
        "g'(y1-)~1-2ab(1-2b)": 1.0 - 2.0 * a * b * (1.0 - 2.0 * b),
        "g'(y2-)>1-a^2 e^(3-ab)": 1.0 - a * a * math.exp(3.0 - a * b),
    }
    return prod - 1.0, prod > 1.0


# -- cylinders ----------------------------------------------------------------

def _branch_inverse(work, interval, decreasing, t, iters=110):
    """Vectorized inverse of ``g`` restricted to a monotone interval."""
    lo, hi = interval
    t = np.asarray(t, dtype=float)
    L = np.full(t.shape, lo)
    R = np.full(t.shape, hi)
    a, ab = work.a, work.a * work.b
    for _ in range(iters):
        M = 0.5 * (L + R)
        v = M + a * expit(-M) - ab
        right = (v > t) if decreasing else (v < t)
        L = np.where(right, M, L)
        R = np.where(right, R, M)
        if np.all(R - L <= 2 * np.spacing(np.maximum(np.abs(L), np.abs(R)))):
            break
    return 0.5 * (L + R)


@dataclass
class KApproximation:
    depth: int
    labels: list
    intervals: np.ndarray

    @property
    def count(self) -> int:
        return len(self.labels)

    def max_width(self) -> float:
        return float(np.max(self.intervals[:, 1] - self.intervals[:, 0]))

    def component(self, label: str):
        return tuple(self.intervals[self.labels.index(label)])

    def rows(self):
        for lab, (l, r) in zip(self.labels, self.intervals):
            yield lab, float(l), float(r)


def approximate_K(cert: HyperbolicCertificate, m: int) -> KApproximation:
    """Components of ``∩_{k<=m} g^{-k}(J1 ∪ J2)`` labelled by their itineraries.

    Built by prepending symbols: the cylinder of ``s + w`` is the preimage
    of the cylinder of ``w`` under the branch of ``g`` on ``J_s``.
    Intervals are in the working coordinate.
    """
    if not (0 <= m <= 25):
        raise ValueError("depth must lie in 0..25")
    if not cert.covering.get("all"):
        raise RuntimeError("covering relations do not hold; cylinders are undefined")
    w = cert.work_params
    J = {"0": cert.J1, "1": cert.J2}
    labels = ["0", "1"]
    L = np.array([cert.J1[0], cert.J2[0]])
    R = np.array([cert.J1[1], cert.J2[1]])
    for _ in range(m):
        new_labels, newL, newR = [], [], []
        for s, dec in (("0", True), ("1", False)):
            sel = [i for i, lab in enumerate(labels) if s == "0" or lab[0] == "0"]
            if not sel:
                continue
            tl, tr = L[sel], R[sel]
            pl = _branch_inverse(w, J[s], dec, tl)
            pr = _branch_inverse(w, J[s], dec, tr)
            newL.append(np.minimum(pl, pr))
            newR.append(np.maximum(pl, pr))
            new_labels.extend(s + labels[i] for i in sel)
        L, R = np.concatenate(newL), np.concatenate(newR)
        labels = new_labels
        if np.any(R < L):
            raise RuntimeError("empty branch pullback")
    order = np.argsort(L, kind="stable")
    return KApproximation(m, [labels[i] for i in order], np.stack([L[order], R[order]], axis=1))


def expansion_check(cert: HyperbolicCertificate, kapprox: KApproximation,
                    samples: int = 1000) -> tuple:
    """``min |g'(x) g'(g(x))|`` over ``samples`` points in every component.

    Returns ``(minimum, margin)`` with ``margin = minimum - 1``.
    """
    if kapprox.depth < 1:
        raise ValueError("expansion is checked on approximations of depth >= 1")
    w = cert.work_params
    t = np.linspace(0.0, 1.0, max(samples, 2))
    best = math.inf
    chunk = max(1, 2_000_000 // len(t))
    for i in range(0, kapprox.count, chunk):
        iv = kapprox.intervals[i:i + chunk]
        x = iv[:, :1] + (iv[:, 1:] - iv[:, :1]) * t[None, :]
        d = np.abs(eval_g_prime(w, x) * eval_g_prime(w, eval_g(w, x)))
        best = min(best, float(d.min()))
    return best, best - 1.0


def certify(params: MapParams, depth: int = 10, samples: int = 1000) -> HyperbolicCertificate:
    """Run every check and return the certificate; ``passed`` is the conjunction."""
    if params.monotone:
        raise ValueError("the certificate needs a > 4")
    work, sign = _work_params(params)
    y0, y_max, y_min, g_min, g_max = landmarks(work)
    margins, a2 = check_A2(params)
    cert = HyperbolicCertificate(params, sign < 0, y0, y_max, y_min, g_min, g_max,
                                 tuple(margins), a2, depth=depth)
    cert.covering = {"all": False, "computed": False}
    if not a2:
        cert.diagnostics.append("critical-value inequalities fail")
        return cert
    try:
        cert.y2_plus, cert.y1_minus, cert.y1_plus, cert.y2_minus = boundary_points(params)
    except RootNotBracketed as exc:
        cert.diagnostics.append(f"boundary point not bracketed: {exc}")
        return cert
    cert.ordering_ok = (cert.y1_minus < cert.y1_plus < cert.y2_minus < cert.y2_plus
                        and y_max < cert.y1_minus and cert.y1_plus < y_min)
    if not cert.ordering_ok:
        cert.diagnostics.append("boundary points out of order")
    cert.covering = covering_check(cert)
    if not cert.covering["all"]:
        cert.diagnostics.append("covering relations fail")
    cert.a6_margin, a6 = check_A6(cert)
    cert.a6_product = cert.a6_margin + 1.0
    if not a6:
        cert.diagnostics.append("two-step derivative product at the boundary points is <= 1")
    if cert.covering["all"] and cert.ordering_ok:
        K = approximate_K(cert, depth)
        cert.component_count = K.count
        cert.expected_components = counts(depth + 1, verify=False).A_n
        if K.count != cert.expected_components:
            cert.diagnostics.append("component count differs from the word count")
        if depth >= 1:
            cert.expansion_min, cert.expansion_margin = expansion_check(cert, K, samples)
            if cert.expansion_margin <= 0:
                cert.diagnostics.append("two-step expansion fails on the K approximation")
    cert.passed = bool(a2 and cert.ordering_ok and cert.covering["all"] and a6
                       and cert.component_count == cert.expected_components
                       and cert.expansion_margin is not None and cert.expansion_margin > 0)
    return cert


# -- itineraries ----------------------------------------------------------------

def _symbol(cert, y):
    if cert.y1_minus <= y <= cert.y1_plus:
        return "0"
    if cert.y2_minus <= y <= cert.y2_plus:
        return "1"
    return None


def itinerary(cert: HyperbolicCertificate, y: float, m: int) -> SymbolicWord:
    """Symbols of ``y, g(y), ..., g^{m-1}(y)``; ``y`` in the coordinate of ``g_{a,b}``."""
    if cert.y1_minus is None:
        raise ValueError("certificate has no intervals")
    w = cert.work_params
    z = cert.sign * float(y)
    out = []
    for k in range(m):
        s = _symbol(cert, z)
        if s is None:
            raise EscapedK(f"orbit left J1 ∪ J2 at step {k}")
        out.append(s)
        z = float(eval_g(w, z))
    return SymbolicWord("".join(out), "linear")


def _inverse_scalar(cert, s, t):
    J = cert.J1 if s == "0" else cert.J2
    return float(_branch_inverse(cert.work_params, J, s == "0", np.array([t]))[0])


def _periodic_work_point(cert, word):
    """Fixed point of the composed inverse branches along a cyclic word."""
    z = 0.5 * sum(cert.J1 if word[0] == "0" else cert.J2)
    for _ in range(200):
        prev = z
        for s in reversed(word):
            z = _inverse_scalar(cert, s, z)
        if abs(z - prev) <= 2 * np.spacing(abs(z) + 1.0):
            break
    return z


def cycle_from_word(cert: HyperbolicCertificate, word) -> PeriodicOrbit:
    """Periodic orbit of ``g_{a,b}`` whose itinerary repeats ``word``.

    The orbit starts at the point coded by ``word`` (no canonical rotation),
    is stored in the coordinate of ``g_{a,b}``, and ``mean`` is the mean of
    the corresponding ``x = h^{-1}(y)`` points.
    """
    s = word.symbols if isinstance(word, SymbolicWord) else str(word)
    if not s or not is_admissible(s, "cyclic"):
        raise ValueError(f"{s!r} is not an admissible cyclic word")
    w = cert.work_params
    z0 = _periodic_work_point(cert, s)
    pts = [z0]
    for _ in range(len(s) - 1):
        pts.append(float(eval_g(w, pts[-1])))
    fn = lambda y: eval_g(w, y)
    dfn = lambda y: eval_g_prime(w, y)
    cyc, defect, _ = refine_cycle(fn, dfn, np.array(pts))
    mult = float(np.prod(dfn(cyc)))
    y = cert.sign * cyc
    x = np.asarray(inv_logit(y), dtype=float)
    # least period of the word
    n = len(s)
    per = next(d for d in range(1, n + 1) if n % d == 0 and s == s[d:] + s[:d])
    p = PeriodicOrbit(per, y[:per], mult if per == n else float(np.prod(dfn(cyc[:per]))),
                      math.fsum(x[:per]) / per, defect, float(abs(_compose_g(w, cyc[0], per) - cyc[0])),
                      "g", y[:per])
    p.x_points = x[:per]
    return p


def _compose_g(w, y, n):
    for _ in range(n):
        y = float(eval_g(w, y))
    return y


def point_from_word(cert: HyperbolicCertificate, word) -> float:
    """A point of ``K`` coded by ``word`` (coordinate of ``g_{a,b}``).

    Linear words give the midpoint of their cylinder; cyclic words give the
    periodic point whose itinerary repeats the word.
    """
    if isinstance(word, SymbolicWord):
        s, mode = word.symbols, word.mode
    else:
        s, mode = str(word), "linear"
    if mode == "cyclic":
        return float(cycle_from_word(cert, s).points[0])
    if not s or not is_admissible(s, "linear"):
        raise ValueError(f"{s!r} is not an admissible word")
    lo, hi = cert.J1 if s[-1] == "0" else cert.J2
    L, R = lo, hi
    for sym in reversed(s[:-1]):
        a_ = _inverse_scalar(cert, sym, L)
        b_ = _inverse_scalar(cert, sym, R)
        L, R = min(a_, b_), max(a_, b_)
    return cert.sign * 0.5 * (L + R)


# -- threshold search -----------------------------------------------------------

def default_a_grid(lo: float = 4.1, hi: float = 200.0, factor: float = 1.05) -> np.ndarray:
    n = int(math.floor(math.log(hi / lo) / math.log(factor))) + 1
    return lo * factor ** np.arange(n)


@dataclass
class A0Result:
    b: float
    threshold: Optional[float]
    table: list
    spot_checks: dict
    message: str = ""

    def as_dict(self):
        return {"b": self.b, "threshold": self.threshold, "table": self.table,
                "spot_checks": self.spot_checks, "message": self.message}


def _cert_row(args):
    a, b, depth = args
    c = certify(MapParams(a, b), depth)
    return {"a": a, "pass": c.passed, "a2_margins": list(c.a2_margins),
            "a6_margin": c.a6_margin, "expansion_margin": c.expansion_margin}


def find_a0(b: float, a_grid: Optional[Sequence[float]] = None, depth: int = 10,
            jobs: int = 1) -> A0Result:
    """Smallest grid value of ``a`` at which the full certificate passes."""
    if not 0.0 < b < 1.0:
        raise ValueError("b must lie in (0, 1)")
    grid = default_a_grid() if a_grid is None else np.asarray(a_grid, dtype=float)
    args = [(float(a), b, depth) for a in grid if a > 4.0]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as ex:
            table = list(ex.map(_cert_row, args))
    else:
        table = [_cert_row(x) for x in args]
    thr = next((r["a"] for r in table if r["pass"]), None)
    spots = {}
    if thr is None:
        msg = "no certificate in range"
    else:
        for k in (2, 4):
            spots[f"{k}a"] = {"a": k * thr, "pass": certify(MapParams(k * thr, b), depth).passed}
        msg = "ok" if all(v["pass"] for v in spots.values()) else "spot check failed"
    return A0Result(float(b), thr, table, spots, msg)
