"""Closed-form evaluation of the replicator family and its conjugates.

Three related families live here:

* ``f_{a,b}(x) = x / (x + (1-x) exp(a(x-b)))`` on ``[0, 1]`` (the replicator map),
* ``g_{a,b}(y) = y + a/(e^y + 1) - ab`` on the real line, conjugate to ``f``
  through the logit coordinate ``y = ln((1-x)/x)``,
* ``f_h(x) = h^{-1}(h(x) + a(x-b))`` for a user supplied monotone generator ``h``.

All kernels accept floats or numpy arrays.  No exponential with a positive
argument is ever formed, so ``a`` in the thousands is safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import expit, ndtr, ndtri

__all__ = [
    "DomainError",
    "RangeError",
    "NoCriticalPoints",
    "SingularAtCritical",
    "MapParams",
    "GeneratorH",
    "FixedPointReport",
    "LOGIT",
    "NEG_LOG",
    "TAN",
    "PROBIT",
    "logit",
    "inv_logit",
    "eval_f",
    "eval_f_pair",
    "eval_f_prime",
    "eval_f_second",
    "eval_g",
    "eval_g_prime",
    "eval_g_second",
    "eval_fh",
    "eval_fh_prime",
    "fixed_points",
    "critical_points",
    "schwarzian",
    "conjugacy_residual",
    "symmetry_residual",
    "IntervalMap",
    "ReplicatorMap",
    "ConjugateMap",
    "GeneratedMap",
    "Rotation",
    "Doubling",
]


class DomainError(ValueError):
    """Argument outside the domain of the map."""


class RangeError(ValueError):
    """Shifted generator value fell outside the range of ``h``."""


class NoCriticalPoints(ValueError):
    """Raised for ``a <= 4``, where the replicator map is monotone."""


class SingularAtCritical(ArithmeticError):
    """The Schwarzian is -inf at a critical point."""


def _out(v):
    # 0-d arrays come back as numpy scalars
    v = np.asarray(v)
    return v[()] if v.ndim == 0 else v


@dataclass(frozen=True)
class MapParams:
    """Parameter pair ``(a, b)`` of the replicator family."""

    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and a > 0):
            raise ValueError(f"a must be a positive finite number, got {self.a!r}")
        if not (0.0 < b < 1.0):
            raise ValueError(f"b must lie in (0, 1), got {self.b!r}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def monotone(self) -> bool:
        return self.a <= 4.0

    @property
    def stability_threshold(self) -> float:
        """Value of ``a`` where the interior fixed point loses stability."""
        return 2.0 / (self.b * (1.0 - self.b))

    @property
    def y0(self) -> float:
        """Fixed point of ``g``, the logit of ``b``."""
        return math.log1p(-self.b) - math.log(self.b)

    def mirror(self) -> "MapParams":
        return MapParams(self.a, 1.0 - self.b)

    def as_dict(self) -> dict:
        return {"a": self.a, "b": self.b}


# -- logit coordinate -------------------------------------------------------

def logit(x):
    """``h(x) = ln((1-x)/x)``; decreasing, maps (0,1) onto the line."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return _out(np.log1p(-x) - np.log(x))


def inv_logit(y):
    """Inverse of :func:`logit`, ``1/(e^y + 1)``."""
    return _out(expit(-np.asarray(y, dtype=float)))


def _check_unit(x):
    x = np.asarray(x, dtype=float)
    if np.any(~((x >= 0.0) & (x <= 1.0))):
        raise DomainError("x must lie in [0, 1]")
    return x


# -- the replicator map ----------------------------------------------------

def _f_parts(a, b, x):
    """Return ``(f, 1-f)`` with both parts at full relative accuracy."""
    t = a * (x - b)
    e = np.exp(-np.abs(t))
    neg = t <= 0
    # t <= 0: divide through by 1;  t > 0: divide through by e^t
    num_f = np.where(neg, x, x * e)
    num_c = np.where(neg, (1.0 - x) * e, 1.0 - x)
    # the endpoints are fixed; pin them so an underflowed e cannot give 0/0
    num_f = np.where(x == 1.0, 1.0, np.where(x == 0.0, 0.0, num_f))
    num_c = np.where(x == 0.0, 1.0, np.where(x == 1.0, 0.0, num_c))
    den = num_f + num_c
    return num_f / den, num_c / den


def eval_f(params: MapParams, x):
    """Evaluate the replicator map.

    Computed as ``x / (x + (1-x) e^t)`` with ``t = a(x-b)``, rescaled by
    ``e^{-t}`` when ``t > 0``.  This equals ``1/(1+e^u)`` with
    ``u = ln((1-x)/x) + t`` and keeps ``f(0)=0``, ``f(1)=1`` and ``f(b)=b``
    exact in floating point.
    """
    x = _check_unit(x)
    f, _ = _f_parts(params.a, params.b, x)
    return _out(f)


def eval_f_pair(params: MapParams, x):
    """Return ``(f(x), 1 - f(x))``, each accurate to a few ulps.

    The complement matters whenever ``f(x)`` lies within ~1e-8 of 1, where
    ``1 - eval_f(x)`` has lost most of its digits.
    """
    x = _check_unit(x)
    f, c = _f_parts(params.a, params.b, x)
    return _out(f), _out(c)


def eval_f_prime(params: MapParams, x):
    """Closed-form derivative ``e^t (a x^2 - a x + 1) / (x + (1-x)e^t)^2``."""
    x = _check_unit(x)
    a, b = params.a, params.b
    t = a * (x - b)
    e = np.exp(-np.abs(t))
    poly = 1.0 - a * x * (1.0 - x)
    neg = t <= 0
    # t <= 0: numerator e^t, denominator (x + (1-x)e^t)^2
    # t > 0:  multiply top and bottom by e^{-2t}
    num = e * poly
    den = np.where(neg, x + (1.0 - x) * e, x * e + (1.0 - x))
    return _out(num / den**2)


def eval_f_second(params: MapParams, x):
    """Second derivative of ``f`` on the open interval (0, 1)."""
    x = np.asarray(x, dtype=float)
    if np.any(~((x > 0.0) & (x < 1.0))):
        raise DomainError("second derivative is evaluated on (0, 1) only")
    a = params.a
    f, c = _f_parts(a, params.b, x)
    p = f * c
    q = x * (1.0 - x)
    fp = p * (1.0 - a * q) / q
    return _out((1.0 - 2.0 * f) * fp * fp / p - p * (1.0 - 2.0 * x) / (q * q))


# -- the conjugate map on the line -----------------------------------------

def eval_g(params: MapParams, y):
    """``g(y) = y + a/(e^y + 1) - ab``."""
    y = np.asarray(y, dtype=float)
    return _out(y + params.a * expit(-y) - params.a * params.b)


def eval_g_prime(params: MapParams, y):
    y = np.asarray(y, dtype=float)
    return _out(1.0 - params.a * expit(y) * expit(-y))


def eval_g_second(params: MapParams, y):
    """``a e^y (e^y - 1) / (e^y + 1)^3``, written via ``tanh(y/2)``."""
    y = np.asarray(y, dtype=float)
    return _out(params.a * expit(y) * expit(-y) * np.tanh(0.5 * y))


# -- generic generators ----------------------------------------------------

@dataclass(frozen=True)
class GeneratorH:
    """A strictly monotone generator ``h`` on an open interval.

    ``inverse`` may be omitted; it is then computed by bisection on
    ``bracket`` followed by a Newton polish.  ``value_range`` bounds the
    values ``h`` attains on ``interval`` (infinite ends allowed) and is used
    for the range check in :func:`eval_fh`.
    """

    name: str
    forward: Callable
    derivative: Callable
    interval: tuple
    inverse: Optional[Callable] = None
    bracket: Optional[tuple] = None
    value_range: tuple = (-math.inf, math.inf)
    closed_form: Optional[Callable] = field(default=None, compare=False)
    inversion_tol: float = 1e-13

    def invert(self, y):
        """Apply ``h^{-1}``, raising :class:`RangeError` off the range."""
        y = np.asarray(y, dtype=float)
        lo_v, hi_v = self.value_range
        if np.any((y < lo_v) | (y > hi_v)) or np.any(np.isnan(y)):
            raise RangeError(f"value outside the range of {self.name}")
        if self.inverse is not None:
            return _out(self.inverse(y))
        return _out(self._numeric_inverse(y))

    def _numeric_inverse(self, y):
        lo, hi = self.bracket if self.bracket is not None else self.interval
        h_lo, h_hi = self.forward(lo), self.forward(hi)
        increasing = h_hi > h_lo
        vmin, vmax = min(h_lo, h_hi), max(h_lo, h_hi)
        if np.any((y < vmin) | (y > vmax)):
            raise RangeError(f"value outside h(bracket) for {self.name}")
        L = np.full(y.shape, float(lo))
        R = np.full(y.shape, float(hi))
        for _ in range(200):
            M = 0.5 * (L + R)
            hm = self.forward(M)
            go_right = (hm < y) if increasing else (hm > y)
            L = np.where(go_right, M, L)
            R = np.where(go_right, R, M)
            if np.all(R - L <= self.inversion_tol * (1.0 + np.abs(M))):
                break
        x = 0.5 * (L + R)
        for _ in range(3):
            d = self.derivative(x)
            step = (self.forward(x) - y) / d
            cand = x - step
            x = np.where((cand >= L) & (cand <= R) & np.isfinite(cand), cand, x)
        return x


def _logit_prime(x):
    return -1.0 / (x * (1.0 - x))


LOGIT = GeneratorH(
    name="logit",
    forward=lambda x: np.log1p(-x) - np.log(x),
    derivative=_logit_prime,
    interval=(0.0, 1.0),
    inverse=lambda y: expit(-y),
    closed_form=lambda a, b, x: eval_f(MapParams(a, b), x),
)

NEG_LOG = GeneratorH(
    name="neg_log",
    forward=lambda x: -np.log(x),
    derivative=lambda x: -1.0 / x,
    interval=(0.0, math.inf),
    inverse=lambda y: np.exp(-y),
    closed_form=lambda a, b, x: np.asarray(x) * np.exp(-a * (np.asarray(x) - b)),
)

# h(x) = -tan x gives the family arctan(tan x - a(x-b)).
TAN = GeneratorH(
    name="tan",
    forward=lambda x: -np.tan(x),
    derivative=lambda x: -1.0 / np.cos(x) ** 2,
    interval=(-math.pi / 2, math.pi / 2),
    inverse=lambda y: -np.arctan(y),
)

PROBIT = GeneratorH(
    name="probit",
    forward=ndtri,
    derivative=lambda x: math.sqrt(2.0 * math.pi) * np.exp(0.5 * ndtri(x) ** 2),
    interval=(0.0, 1.0),
    inverse=ndtr,
)


def eval_fh(gen: GeneratorH, a: float, b: float, x, use_closed_form: bool = True):
    """Evaluate ``h^{-1}(h(x) + a(x - b))``.

    When the generator carries a closed form of the composed map (logit,
    negative log) and ``use_closed_form`` is true, that path is used.
    """
    x = np.asarray(x, dtype=float)
    lo, hi = gen.interval
    if np.any(~((x > lo) & (x < hi))):
        raise DomainError(f"x outside the open interval of {gen.name}")
    if use_closed_form and gen.closed_form is not None:
        return _out(gen.closed_form(a, b, x))
    return gen.invert(gen.forward(x) + a * (x - b))


def eval_fh_prime(gen: GeneratorH, a: float, b: float, x):
    """``(h'(x) + a) / h'(f_h(x))``."""
    x = np.asarray(x, dtype=float)
    fx = eval_fh(gen, a, b, x, use_closed_form=False)
    return _out((gen.derivative(x) + a) / gen.derivative(fx))


# -- fixed and critical points ----------------------------------------------

@dataclass(frozen=True)
class FixedPointReport:
    points: tuple
    multipliers: tuple
    stable: tuple
    kind: str = "f"


def fixed_points(params: MapParams, kind: str = "f") -> FixedPointReport:
    """Fixed points with their multipliers.

    For ``f`` these are ``0, b, 1``; for ``g`` the single point ``ln((1-b)/b)``.
    """
    a, b = params.a, params.b
    mid = 1.0 - a * b * (1.0 - b)
    if kind == "f":
        pts = (0.0, b, 1.0)
        mults = (math.exp(a * b), mid, math.exp(a * (1.0 - b)))
    elif kind == "g":
        pts = (params.y0,)
        mults = (mid,)
    else:
        raise ValueError(f"unknown map kind {kind!r}")
    return FixedPointReport(pts, mults, tuple(abs(m) < 1.0 for m in mults), kind)


def critical_points(params: MapParams, kind: str = "f") -> tuple:
    """Return ``(low, high)`` critical points.

    For ``f`` this is ``(x_max, x_min)`` (local max first); for ``g`` it is
    ``(y_max, y_min)``.
    """
    a = params.a
    if a <= 4.0:
        raise NoCriticalPoints(f"f_(a,b) is monotone for a={a} <= 4")
    if kind == "f":
        x_min = 0.5 + math.sqrt(0.25 - 1.0 / a)
        # x_min * x_max = 1/a avoids the cancellation in 1/2 - sqrt(...)
        return (1.0 / a) / x_min, x_min
    if kind == "g":
        # the two logarithm arguments multiply to exactly 1
        y_min = math.log(a / 2.0 - 1.0 + math.sqrt(a * a / 4.0 - a))
        return -y_min, y_min
    raise ValueError(f"unknown map kind {kind!r}")


def _third_derivative(params, x, step=1e-4):
    x = np.asarray(x, dtype=float)
    h = np.minimum(step, np.minimum(x, 1.0 - x) / 4.0)

    def central(hh):
        return (eval_f_second(params, x + hh) - eval_f_second(params, x - hh)) / (2.0 * hh)

    # one Richardson step removes the h^2 term
    return (4.0 * central(h / 2.0) - central(h)) / 3.0


def schwarzian(params: MapParams, x):
    """Schwarzian derivative ``f'''/f' - 1.5 (f''/f')^2`` on (0, 1).

    ``f'`` and ``f''`` are closed form; ``f'''`` is a Richardson-extrapolated
    central difference of ``f''``.
    """
    x = np.asarray(x, dtype=float)
    if np.any(~((x > 0.0) & (x < 1.0))):
        raise DomainError("Schwarzian is evaluated on (0, 1) only")
    fp = np.asarray(eval_f_prime(params, x))
    if np.any(fp == 0.0):
        raise SingularAtCritical("Schwarzian is -inf at a critical point")
    if params.a > 4.0:
        crit = np.array(critical_points(params, "f"))
        if np.any(np.isin(x, crit)):
            raise SingularAtCritical("Schwarzian is -inf at a critical point")
    fpp = np.asarray(eval_f_second(params, x))
    fppp = _third_derivative(params, x)
    r = fpp / fp
    return _out(fppp / fp - 1.5 * r * r)


def _default_grid():
    return np.linspace(0.01, 0.99, 10_000)


def conjugacy_residual(params: MapParams, grid=None) -> float:
    """``sup |h(f(x)) - g(h(x))|`` over ``grid`` with the logit ``h``.

    ``h(f(x))`` is evaluated from the pair ``(f, 1-f)``; the logit of a float
    within 1e-8 of 1 is otherwise wrong in the ninth digit.
    """
    x = _default_grid() if grid is None else np.asarray(grid, dtype=float)
    f, c = eval_f_pair(params, x)
    lhs = np.log(c) - np.log(f)
    rhs = eval_g(params, logit(x))
    return float(np.max(np.abs(lhs - rhs)))


def symmetry_residual(params: MapParams, grid=None) -> float:
    """``sup |f_{a,1-b}(x) - 1 + f_{a,b}(1-x)|`` over ``grid``."""
    x = _default_grid() if grid is None else np.asarray(grid, dtype=float)
    lhs = eval_f(params.mirror(), x)
    rhs = 1.0 - eval_f(params, 1.0 - x)
    return float(np.max(np.abs(lhs - rhs)))


# -- map handles ------------------------------------------------------------

def _f_scalar(a, b, x):
    t = a * (x - b)
    if t <= 0.0:
        e = math.exp(t)
        return x / (x + (1.0 - x) * e)
    e = math.exp(-t)
    return x * e / (x * e + (1.0 - x))


def _g_scalar(a, b, y):
    if y >= 0.0:
        e = math.exp(-y)
        s = e / (1.0 + e)
    else:
        s = 1.0 / (1.0 + math.exp(y))
    return y + a * s - a * b


class IntervalMap:
    """A map handle: callable, differentiable, with known turning points.

    ``domain`` is the closed interval the map acts on.  ``critical_points``
    lists the interior turning points.  Circle maps set ``circle = True``.
    """

    name = "map"
    domain = (-math.inf, math.inf)
    circle = False

    def __call__(self, x):
        raise NotImplementedError

    def deriv(self, x):
        raise NotImplementedError

    def critical_points(self) -> tuple:
        return ()

    def describe(self) -> dict:
        return {"map": self.name}

    def orbit(self, x0: float, n: int) -> np.ndarray:
        out = np.empty(n + 1)
        x = float(x0)
        out[0] = x
        for k in range(1, n + 1):
            x = float(self(x))
            out[k] = x
        return out


class ReplicatorMap(IntervalMap):
    """``f_{a,b}`` on ``[0, 1]``."""

    name = "f"
    domain = (0.0, 1.0)

    def __init__(self, params: MapParams):
        self.params = params

    def __call__(self, x):
        return eval_f(self.params, x)

    def deriv(self, x):
        return eval_f_prime(self.params, x)

    def critical_points(self):
        if self.params.monotone:
            return ()
        return critical_points(self.params, "f")

    def orbit(self, x0, n):
        a, b = self.params.a, self.params.b
        out = np.empty(n + 1)
        x = float(x0)
        if not (0.0 <= x <= 1.0):
            raise DomainError("x0 must lie in [0, 1]")
        out[0] = x
        for k in range(1, n + 1):
            x = _f_scalar(a, b, x)
            out[k] = x
        return out

    def conjugate(self) -> "ConjugateMap":
        return ConjugateMap(self.params)

    to_conjugate = staticmethod(logit)
    from_conjugate = staticmethod(inv_logit)

    def describe(self):
        return {"map": self.name, **self.params.as_dict()}

    def __repr__(self):
        return f"ReplicatorMap(a={self.params.a!r}, b={self.params.b!r})"


class ConjugateMap(IntervalMap):
    """``g_{a,b}`` on the line."""

    name = "g"

    def __init__(self, params: MapParams):
        self.params = params

    def __call__(self, y):
        return eval_g(self.params, y)

    def deriv(self, y):
        return eval_g_prime(self.params, y)

    def second(self, y):
        return eval_g_second(self.params, y)

    def orbit(self, y0, n):
        a, b = self.params.a, self.params.b
        out = np.empty(n + 1)
        y = float(y0)
        out[0] = y
        for k in range(1, n + 1):
            y = _g_scalar(a, b, y)
            out[k] = y
        return out

    def critical_points(self):
        if self.params.monotone:
            return ()
        return critical_points(self.params, "g")

    def describe(self):
        return {"map": self.name, **self.params.as_dict()}

    def __repr__(self):
        return f"ConjugateMap(a={self.params.a!r}, b={self.params.b!r})"


class GeneratedMap(IntervalMap):
    """``f_h`` built from a generator; the domain escape check is eager."""

    name = "fh"

    def __init__(self, gen: GeneratorH, a: float, b: float, domain=None):
        self.gen, self.a, self.b = gen, float(a), float(b)
        self.domain = tuple(domain) if domain is not None else gen.interval

    def __call__(self, x):
        return eval_fh(self.gen, self.a, self.b, x)

    def deriv(self, x):
        return eval_fh_prime(self.gen, self.a, self.b, x)

    def critical_points(self):
        lo, hi = self.domain
        lo = lo if math.isfinite(lo) else -50.0
        hi = hi if math.isfinite(hi) else 50.0
        eps = 1e-9 * (hi - lo)
        x = np.linspace(lo + eps, hi - eps, 20_001)
        s = np.asarray(self.gen.derivative(x)) + self.a
        idx = np.nonzero(np.sign(s[:-1]) * np.sign(s[1:]) < 0)[0]
        out = []
        for i in idx:
            L, R = x[i], x[i + 1]
            sL = s[i]
            for _ in range(100):
                M = 0.5 * (L + R)
                sM = self.gen.derivative(M) + self.a
                if np.sign(sM) == np.sign(sL):
                    L, sL = M, sM
                else:
                    R = M
            out.append(0.5 * (L + R))
        return tuple(out)

    def describe(self):
        return {"map": self.name, "generator": self.gen.name, "a": self.a, "b": self.b}


class Rotation(IntervalMap):
    """Circle rotation ``x -> x + alpha (mod 1)``."""

    name = "rotation"
    domain = (0.0, 1.0)
    circle = True

    def __init__(self, alpha: float):
        alpha = float(alpha) % 1.0
        # crude irrationality screen at machine scale
        for q in range(1, 1001):
            if abs(alpha * q - round(alpha * q)) < 1e-12:
                raise ValueError(f"alpha={alpha} is rational to machine precision (q={q})")
        self.alpha = alpha

    def __call__(self, x):
        return _out(np.mod(np.asarray(x, dtype=float) + self.alpha, 1.0))

    def deriv(self, x):
        return _out(np.ones_like(np.asarray(x, dtype=float)))

    def orbit(self, x0, n):
        k = np.arange(n + 1, dtype=float)
        return np.mod(float(x0) + k * self.alpha, 1.0)

    def describe(self):
        return {"map": self.name, "alpha": self.alpha}


class Doubling(IntervalMap):
    """Circle doubling ``x -> 2x (mod 1)``.

    In binary floating point the doubling map runs out of digits after 53
    steps and collapses onto 0.  :meth:`orbit` therefore extends the binary
    expansion of ``x0`` with seeded pseudo-random digits, which models a
    generic point while keeping runs reproducible.
    """

    name = "doubling"
    domain = (0.0, 1.0)
    circle = True

    def __init__(self, seed: int = 0):
        self.seed = seed

    def __call__(self, x):
        return _out(np.mod(2.0 * np.asarray(x, dtype=float), 1.0))

    def deriv(self, x):
        return _out(np.full_like(np.asarray(x, dtype=float), 2.0))

    def orbit(self, x0, n):
        x0 = float(x0) % 1.0
        head = []
        v = x0
        for _ in range(53):
            v *= 2.0
            bit = int(v >= 1.0)
            head.append(bit)
            v -= bit
        rng = np.random.default_rng(self.seed)
        bits = np.concatenate([np.array(head, dtype=np.int8),
                               rng.integers(0, 2, size=n + 1, dtype=np.int8)])
        weights = 0.5 ** np.arange(1, 54)
        window = np.lib.stride_tricks.sliding_window_view(bits, 53)[: n + 1]
        return window @ weights

    @staticmethod
    def cycle(n: int, k: int = 1) -> np.ndarray:
        """Orbit of ``k/(2^n - 1)``, exact up to the final division."""
        m = 2**n - 1
        pts, j = [], k % m if m > 1 else 0
        for _ in range(n):
            pts.append(j / m if m > 1 else 0.0)
            j = (2 * j) % m if m > 1 else 0
        return np.array(pts)

    def describe(self):
        return {"map": self.name, "seed": self.seed}
