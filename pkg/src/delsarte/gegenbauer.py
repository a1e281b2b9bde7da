"""Ultraspherical polynomials R_n = R_n^{alpha,alpha} normalized by R_n(1) = 1.

Everything at the basis level is exact: monomial coefficients, the change of
basis between even monomials and R_{2k}, and the normalized moments are all
``Fraction`` values for every integer dimension ``m``.  Irrational numbers
only appear once a caller evaluates at an ``mpmath`` point.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from delsarte.errors import DomainError, InvalidArgument, InvalidDimension
from delsarte.numeric import mpf_of

__all__ = [
    "BasisContext",
    "EvenPolynomial",
    "basis_context",
    "gegenbauer_coeffs",
    "eval_R",
    "eval_R_upto",
    "normalized_moment",
    "expand_in_basis",
    "project_f0",
    "tail_bound",
    "legendre_tail_bound",
    "min_tail_index",
]


class BasisContext:
    """Dimension-m basis data with lazily filled, lock-protected caches.

    ``_coeffs[n]`` holds the monomial coefficients of R_n (ascending powers),
    ``_moments[j]`` the normalized moment mu_{2j}, and ``_monomials[j]`` the
    expansion of t^{2j} in the even basis R_0, R_2, ..., R_{2j}.
    """

    def __init__(self, m: int):
        if not isinstance(m, int) or m < 2:
            raise InvalidDimension(f"dimension must be an integer >= 2, got {m!r}")
        self.m = m
        self.alpha = Fraction(m - 3, 2)
        self._coeffs: list[list[Fraction]] = [[Fraction(1)], [Fraction(0), Fraction(1)]]
        self._moments: list[Fraction] = [Fraction(1)]
        self._monomials: list[list[Fraction]] = []
        self._lock = threading.RLock()

    def __repr__(self) -> str:
        return f"BasisContext(m={self.m}, alpha={self.alpha})"

    def coeffs(self, n: int) -> list[Fraction]:
        if n < 0:
            raise InvalidArgument("polynomial index must be nonnegative")
        if n >= len(self._coeffs):
            with self._lock:
                m = self.m
                while len(self._coeffs) <= n:
                    k = len(self._coeffs) - 1
                    prev, cur = self._coeffs[k - 1], self._coeffs[k]
                    a = Fraction(2 * k + m - 2, k + m - 2)
                    b = Fraction(k, k + m - 2)
                    nxt = [Fraction(0)] * (k + 2)
                    for i, c in enumerate(cur):
                        nxt[i + 1] += a * c
                    for i, c in enumerate(prev):
                        nxt[i] -= b * c
                    self._coeffs.append(nxt)
        return self._coeffs[n]

    def moment(self, j: int) -> Fraction:
        """mu_{2j}; the moment recurrence works for half-integer alpha too."""
        if j >= len(self._moments):
            with self._lock:
                while len(self._moments) <= j:
                    i = len(self._moments)
                    self._moments.append(
                        self._moments[-1] * Fraction(2 * i - 1, 2 * i + self.m - 2)
                    )
        return self._moments[j]

    def monomial_expansion(self, j: int) -> list[Fraction]:
        """Coefficients of t^{2j} on R_0, R_2, ..., R_{2j} (index k -> R_{2k})."""
        if j >= len(self._monomials):
            with self._lock:
                while len(self._monomials) <= j:
                    i = len(self._monomials)
                    mono = [Fraction(0)] * (2 * i + 1)
                    mono[2 * i] = Fraction(1)
                    full = _peel(self, mono)
                    self._monomials.append(full[0::2])
        return self._monomials[j]


def basis_context(m: int) -> BasisContext:
    return BasisContext(m)


@dataclass
class EvenPolynomial:
    """Even polynomial stored in the variable y = t^2.

    ``coeffs[j]`` multiplies t^{2j}; ``basis[k]`` (when known) multiplies
    R_{2k}.  Entries are ``Fraction`` for exact data or ``mpf`` otherwise; a
    list may mix the two (e.g. an exactly known leading term).
    """

    coeffs: list = field(default_factory=list)
    basis: list | None = None
    precision: int | None = None  # None means exact

    @property
    def degree(self) -> int:
        return 2 * (len(self.coeffs) - 1)

    def __call__(self, t):
        if isinstance(t, int):
            t = Fraction(t)
        coeffs = self.coeffs if isinstance(t, Fraction) else [mpf_of(c) for c in self.coeffs]
        y = t * t
        acc = 0 * y
        for c in reversed(coeffs):
            acc = acc * y + c
        return acc

    @classmethod
    def from_monomials(cls, coeffs: Sequence) -> "EvenPolynomial":
        """Build from full ascending coefficients; odd entries must vanish."""
        if any(c != 0 for c in coeffs[1::2]):
            raise InvalidArgument("odd-degree coefficients must be zero")
        return cls(list(coeffs[0::2]))


def gegenbauer_coeffs(ctx: BasisContext, n: int) -> list[Fraction]:
    return list(ctx.coeffs(n))


def eval_R(ctx: BasisContext, n: int, t):
    """R_n(t) by the three-term recurrence (never through monomials)."""
    if n < 0:
        raise InvalidArgument("polynomial index must be nonnegative")
    if n == 0:
        return Fraction(1) if isinstance(t, (int, Fraction)) else mpmath.mpf(1)
    if isinstance(t, int):
        t = Fraction(t)
    m = ctx.m
    prev, cur = t * 0 + 1, t
    for k in range(1, n):
        prev, cur = cur, ((2 * k + m - 2) * t * cur - k * prev) / (k + m - 2)
    return cur


def eval_R_upto(ctx: BasisContext, n_max: int, t) -> list:
    """[R_0(t), ..., R_{n_max}(t)] in one recurrence sweep."""
    m = ctx.m
    out = [t * 0 + 1]
    if n_max >= 1:
        out.append(t)
    for k in range(1, n_max):
        out.append(((2 * k + m - 2) * t * out[k] - k * out[k - 1]) / (k + m - 2))
    return out


def normalized_moment(ctx: BasisContext, k: int) -> Fraction:
    if k < 0 or k % 2:
        raise InvalidArgument(f"moment order must be even and >= 0, got {k}")
    return ctx.moment(k // 2)


def _peel(ctx: BasisContext, coeffs: list) -> list:
    """Expand a full-index monomial coefficient list on R_0..R_n by peeling
    off leading terms: f_n = c_n(f) / c_n(R_n), then recurse on f - f_n R_n."""
    work = list(coeffs)
    while len(work) > 1 and work[-1] == 0:
        work.pop()
    out = [0 * work[0]] * len(work)
    for n in range(len(work) - 1, -1, -1):
        if work[n] == 0:
            continue
        rn = ctx.coeffs(n)
        fn = work[n] / rn[n]
        out[n] = fn
        for i in range(n - 2, -1, -2):
            work[i] -= fn * rn[i]
        work[n] = 0 * work[n]
    return out


def expand_in_basis(ctx: BasisContext, p: EvenPolynomial) -> list:
    """Coefficients f_{2k} of p on R_{2k}; fills ``p.basis``.

    Exact rational input is peeled term by term.  Otherwise the cached exact
    expansions of t^{2j} are combined, which avoids subtracting the large
    alternating monomial coefficients of R_n in floating point.
    """
    if all(isinstance(c, (int, Fraction)) for c in p.coeffs):
        full: list = []
        for c in p.coeffs:
            full.extend([Fraction(c), Fraction(0)])
        basis = _peel(ctx, full[:-1])[0::2] if full else []
    else:
        basis = combine_monomial_expansions(ctx, p.coeffs)
    p.basis = basis
    return basis


def _uniform(coeffs: Sequence) -> list:
    """All-exact lists pass through; anything mixed is lifted to mpf."""
    if all(isinstance(c, (int, Fraction)) for c in coeffs):
        return list(coeffs)
    return [mpf_of(c) for c in coeffs]


def combine_monomial_expansions(ctx: BasisContext, coeffs: Sequence) -> list:
    coeffs = _uniform(coeffs)
    n = len(coeffs)
    out = [0] * n
    for j, c in enumerate(coeffs):
        if c == 0:
            continue
        row = ctx.monomial_expansion(j)
        for k in range(j + 1):
            out[k] += c * _as(row[k], c)
    return out


def _as(q: Fraction, like):
    if isinstance(like, (int, Fraction)):
        return q
    return mpf_of(q)


def project_f0(ctx: BasisContext, p: EvenPolynomial):
    """f_0 = sum_j c_{2j} mu_{2j} (normalized integral against (1-t^2)^alpha)."""
    return sum((c * _as(ctx.moment(j), c) for j, c in enumerate(_uniform(p.coeffs))), 0)


def _gamma_half_dimension(m: int):
    """Gamma((m-1)/2): exact factorial for odd m, sqrt(pi)*(2k)!/(4^k k!) for even m."""
    if m % 2:
        return mpmath.mpf(math.factorial((m - 3) // 2))
    k = (m - 2) // 2
    return mpmath.sqrt(mpmath.pi) * math.factorial(2 * k) / (mpmath.mpf(4) ** k * math.factorial(k))


def tail_bound(ctx: BasisContext, n: int, t):
    """Upper bound A(n, m) / (1 - t^2)^((m-2)/4) for |R_n(t)|, |t| < 1.

    A(n, m) = Gamma((m-1)/2) sqrt(2) (2 + sqrt(2))^(m-4) / (n+1)^((m-2)/2).
    Valid for m >= 4 and n >= max(3, m - 4).
    """
    m = ctx.m
    t = mpf_of(t)
    if m < 4:
        raise DomainError("pointwise estimate requires m >= 4")
    if n < max(3, m - 4):
        raise DomainError(f"pointwise estimate requires n >= {max(3, m - 4)}, got {n}")
    if not abs(t) < 1:
        raise DomainError("pointwise estimate requires |t| < 1")
    sqrt2 = mpmath.sqrt(2)
    a = _gamma_half_dimension(m) * sqrt2 * (2 + sqrt2) ** (m - 4)
    a /= mpmath.mpf(n + 1) ** (mpmath.mpf(m - 2) / 2)
    return a / (1 - t * t) ** (mpmath.mpf(m - 2) / 4)


def legendre_tail_bound(n: int, t):
    """Bernstein's inequality for Legendre polynomials (m = 3):
    |P_n(t)| < sqrt(2 / (pi n)) (1 - t^2)^(-1/4), n >= 1."""
    t = mpf_of(t)
    if n < 1 or not abs(t) < 1:
        raise DomainError("Legendre estimate requires n >= 1 and |t| < 1")
    return mpmath.sqrt(2 / (mpmath.pi * n)) / (1 - t * t) ** mpmath.mpf(0.25)


def _tail_start(m: int) -> int:
    return 1 if m == 3 else max(3, m - 4)


def _tail(ctx: BasisContext, n: int, t):
    if ctx.m == 3:
        return legendre_tail_bound(n, t)
    return tail_bound(ctx, n, t)


def tail_margin(ctx: BasisContext, n: int, lambda1, t_max):
    """lambda1 - (1 - lambda1) * bound(n, t_max); positive means L(R_k) > 0 for k >= n."""
    lambda1 = mpf_of(lambda1)
    return lambda1 - (1 - lambda1) * _tail(ctx, n, t_max)


def min_tail_index(ctx: BasisContext, lambda1, t_max) -> int:
    """Smallest n0 >= max(3, m-4) with a positive tail margin at n0.

    The bound decreases in n, so positivity at n0 covers every larger n.
    """
    if ctx.m < 3:
        raise DomainError("no decaying pointwise estimate for m = 2")
    lambda1 = mpf_of(lambda1)
    if not (0 < lambda1 < 1) or not (0 < t_max < 1):
        raise InvalidArgument("need 0 < lambda1 < 1 and 0 < t_max < 1")
    lo = _tail_start(ctx.m)
    if tail_margin(ctx, lo, lambda1, t_max) > 0:
        return lo
    hi = 2 * lo
    while tail_margin(ctx, hi, lambda1, t_max) <= 0:
        lo, hi = hi, 2 * hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tail_margin(ctx, mid, lambda1, t_max) > 0:
            hi = mid
        else:
            lo = mid
    return hi
