"""The golden-mean shift: binary words without two adjacent ones."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterator, Union

import numpy as np

__all__ = [
    "SymbolicWord",
    "CountTable",
    "is_admissible",
    "shift",
    "sigma_metric",
    "enumerate_periodic",
    "enumerate_linear",
    "counts",
    "fibonacci",
    "lucas",
    "transfer_trace",
    "least_period_orbit_counts",
    "dense_orbit_prefix",
    "admissible_words",
]

EXHAUSTIVE_MAX = 30
BITMASK_MAX = 20


@dataclass(frozen=True)
class SymbolicWord:
    symbols: str
    mode: str = "linear"

    def __post_init__(self):
        if self.mode not in ("linear", "cyclic"):
            raise ValueError(f"mode must be 'linear' or 'cyclic', got {self.mode!r}")
        if any(c not in "01" for c in self.symbols):
            raise ValueError("symbols must be '0' or '1'")

    def __len__(self):
        return len(self.symbols)

    def __str__(self):
        return self.symbols

    @property
    def admissible(self) -> bool:
        return is_admissible(self.symbols, self.mode)

    def as_int(self) -> int:
        return int(self.symbols, 2) if self.symbols else 0


WordLike = Union[str, SymbolicWord]


def _unpack(word: WordLike, mode):
    if isinstance(word, SymbolicWord):
        return word.symbols, mode or word.mode
    s = "".join(str(c) for c in word)
    if any(c not in "01" for c in s):
        raise ValueError("symbols must be '0' or '1'")
    return s, mode or "linear"


def is_admissible(word: WordLike, mode: str | None = None) -> bool:
    """No ``11`` inside the word; cyclic words also forbid a 1 at both ends."""
    s, mode = _unpack(word, mode)
    if "11" in s:
        return False
    if mode == "cyclic" and len(s) >= 1 and s[0] == "1" and s[-1] == "1":
        return False
    return True


def shift(word: WordLike, mode: str | None = None):
    """Drop the first symbol (linear) or rotate it to the back (cyclic)."""
    s, mode = _unpack(word, mode)
    if not s:
        raise ValueError("cannot shift an empty word")
    out = s[1:] if mode == "linear" else s[1:] + s[0]
    return SymbolicWord(out, mode) if isinstance(word, SymbolicWord) else out


def sigma_metric(p: WordLike, q: WordLike) -> Fraction:
    """``sum_j |p_j - q_j| / 2^j`` over the common length, as an exact dyadic."""
    s, _ = _unpack(p, None)
    t, _ = _unpack(q, None)
    if len(s) != len(t):
        raise ValueError("prefixes must have equal length")
    return sum((Fraction(1, 2**j) for j, (u, v) in enumerate(zip(s, t)) if u != v), Fraction(0))


# -- counting -----------------------------------------------------------------

def _fib_pair(n: int):
    """``(F_n, F_{n+1})`` by fast doubling."""
    if n == 0:
        return 0, 1
    f, g = _fib_pair(n >> 1)
    c = f * (2 * g - f)
    d = f * f + g * g
    return (d, c + d) if n & 1 else (c, d)


def fibonacci(n: int) -> int:
    if n < 0:
        raise ValueError("n must be non-negative")
    return _fib_pair(n)[0]


def lucas(n: int) -> int:
    """``L_n = F_{n+1} + F_{n-1}`` (``L_0 = 2``)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return 2
    f, g = _fib_pair(n)
    return g + (g - f)


def transfer_trace(n: int) -> int:
    """Trace of ``[[1,1],[1,0]]^n`` with exact integer arithmetic."""
    M = np.array([[1, 1], [1, 0]], dtype=object)
    R = np.array([[1, 0], [0, 1]], dtype=object)
    k = n
    while k:
        if k & 1:
            R = R.dot(M)
        M = M.dot(M)
        k >>= 1
    return int(R[0, 0] + R[1, 1])


def _bitmask_words(n: int, cyclic: bool) -> np.ndarray:
    w = np.arange(2**n, dtype=np.int64)
    ok = (w & (w >> 1)) == 0
    if cyclic and n >= 1:
        ok &= ~(((w >> (n - 1)) & 1).astype(bool) & (w & 1).astype(bool))
    return w[ok]


@lru_cache(maxsize=64)
def _linear_words(n: int) -> tuple:
    """Admissible linear words of length ``n`` in lexicographic order."""
    if n == 0:
        return ("",)
    out = []
    for w in _linear_words(n - 1):
        out.append(w + "0")
        if not w.endswith("1"):
            out.append(w + "1")
    return tuple(sorted(out))


def enumerate_linear(n: int) -> list:
    if n < 0:
        raise ValueError("n must be non-negative")
    if n <= BITMASK_MAX:
        return [format(int(v), f"0{n}b") if n else "" for v in _bitmask_words(n, False)]
    if n > EXHAUSTIVE_MAX:
        raise ValueError(f"exhaustive listing is limited to n <= {EXHAUSTIVE_MAX}")
    return list(_linear_words(n))


def enumerate_periodic(n: int) -> tuple:
    """Admissible cyclic words of length ``n`` and the :class:`CountTable`.

    Each word represents one solution of ``S^n = id`` on the shift space.
    """
    if not 1 <= n <= EXHAUSTIVE_MAX:
        raise ValueError(f"enumeration needs 1 <= n <= {EXHAUSTIVE_MAX}")
    if n <= BITMASK_MAX:
        words = [format(int(v), f"0{n}b") for v in _bitmask_words(n, True)]
    else:
        words = [w for w in _linear_words(n) if not (w[0] == "1" and w[-1] == "1")]
    return words, counts(n, verify=False)


@dataclass(frozen=True)
class CountTable:
    n: int
    A_n: int
    B_n: int
    F_n: int
    L_n: int
    verified: bool = False

    def as_dict(self) -> dict:
        return {"n": self.n, "A_n": self.A_n, "B_n": self.B_n, "F_n": self.F_n, "L_n": self.L_n}


def counts(n: int, verify: bool = True) -> CountTable:
    """Linear and cyclic word counts via recurrences.

    ``A_n = F_{n+2}`` linear words and ``B_n = L_n`` cyclic words.  For
    ``n <= 20`` (when ``verify``) both are checked against bitmask
    enumeration and ``B_n`` against the transfer-matrix trace.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    A = fibonacci(n + 2)
    B = lucas(n)
    checked = False
    if verify and n <= BITMASK_MAX:
        if len(_bitmask_words(n, False)) != A or len(_bitmask_words(n, True)) != B:
            raise AssertionError(f"recurrence and enumeration disagree at n={n}")
        if transfer_trace(n) != B:
            raise AssertionError(f"transfer-matrix trace disagrees at n={n}")
        checked = True
    return CountTable(n, A, B, fibonacci(n), lucas(n), checked)


def _mobius(n: int) -> int:
    m, p, res = n, 2, 1
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            res = -res
        p += 1
    return -res if m > 1 else res


def least_period_orbit_counts(n: int) -> int:
    """Number of shift orbits of least period exactly ``n``."""
    total = sum(_mobius(n // d) * lucas(d) for d in range(1, n + 1) if n % d == 0)
    return total // n


def admissible_words(max_len: int | None = None) -> Iterator[str]:
    """All admissible linear words, ordered by length then lexicographically."""
    n = 1
    while max_len is None or n <= max_len:
        yield from _linear_words(n)
        n += 1


def dense_orbit_prefix(m: int) -> str:
    """First ``m`` admissible words in length-then-lex order, joined by ``0``.

    Every admissible word occurs in the infinite version of this sequence,
    so its shift orbit is dense.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    blocks = []
    for w in admissible_words():
        blocks.append(w)
        if len(blocks) == m:
            break
    return "0".join(blocks)


def brute_force_cyclic(n: int) -> list:
    """Reference enumeration over all ``2^n`` strings (small ``n`` only)."""
    return ["".join(t) for t in product("01", repeat=n) if is_admissible("".join(t), "cyclic")]
