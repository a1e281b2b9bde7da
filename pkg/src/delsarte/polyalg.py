"""Dense univariate polynomials as ascending coefficient lists, plus real
root isolation for rational polynomials (Sturm counts, bisection, Newton
polishing with exact sign checks at the enclosure endpoints)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from delsarte.numeric import mpf_of


def trim(p: Sequence) -> list:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def add(a: Sequence, b: Sequence) -> list:
    n = max(len(a), len(b))
    return trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def sub(a: Sequence, b: Sequence) -> list:
    return add(a, scale(b, -1))


def scale(a: Sequence, c) -> list:
    return trim([x * c for x in a])


def mul(a: Sequence, b: Sequence) -> list:
    if not a or not b:
        return []
    out = [0 * a[0]] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return trim(out)


def horner(p: Sequence, x):
    acc = 0 * x
    for c in reversed(p):
        acc = acc * x + c
    return acc


def deriv(p: Sequence) -> list:
    return trim([i * c for i, c in enumerate(p)][1:])


def divmod_exact(a: Sequence, b: Sequence) -> tuple[list, list]:
    a, b = trim([Fraction(x) for x in a]), trim([Fraction(x) for x in b])
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b) and a:
        c = a[-1] / b[-1]
        k = len(a) - len(b)
        q[k] = c
        for i, y in enumerate(b):
            a[i + k] -= c * y
        a = trim(a)
    return trim(q), a


def monic(p: Sequence) -> list:
    p = trim(p)
    return [c / p[-1] for c in p]


def gcd(a: Sequence, b: Sequence) -> list:
    a, b = trim(a), trim(b)
    while b:
        a, b = b, divmod_exact(a, b)[1]
    return monic(a)


def squarefree(p: Sequence) -> list:
    g = gcd(p, deriv(p))
    return monic(divmod_exact(p, g)[0])


def sturm_sequence(p: Sequence) -> list[list]:
    seq = [trim(p), deriv(p)]
    while seq[-1]:
        r = divmod_exact(seq[-2], seq[-1])[1]
        if not r:
            break
        seq.append(scale(r, -1))
    return seq


def _sign_changes(seq: list[list], x: Fraction) -> int:
    signs = [s for s in (_sgn(horner(p, x)) for p in seq) if s]
    return sum(1 for u, v in zip(signs, signs[1:]) if u != v)


def _sgn(x) -> int:
    return (x > 0) - (x < 0)


def cauchy_bound(p: Sequence) -> Fraction:
    p = trim(p)
    lead = abs(Fraction(p[-1]))
    return 1 + max((abs(Fraction(c)) / lead for c in p[:-1]), default=Fraction(0))


@dataclass
class RealRoot:
    """A real root with a certified enclosure ``lo <= root <= hi``."""

    value: object  # Fraction when exact, else mpf
    lo: Fraction
    hi: Fraction
    exact: bool = False


def isolate_real_roots(p: Sequence) -> list[tuple[Fraction, Fraction]]:
    """Disjoint intervals, each holding exactly one distinct real root.

    Sturm counts on half-open intervals (lo, hi] with p(lo) != 0.  A
    degenerate interval (r, r) marks a root hit exactly.
    """
    p = trim([Fraction(c) for c in p])
    if len(p) <= 1:
        return []
    p = squarefree(p)
    seq = sturm_sequence(p)
    bound = cauchy_bound(p)
    out: list[tuple[Fraction, Fraction]] = []
    stack = [(-bound, bound)]
    while stack:
        lo, hi = stack.pop()
        n = _sign_changes(seq, lo) - _sign_changes(seq, hi)
        if n == 0:
            continue
        if n == 1:
            out.append((hi, hi) if horner(p, hi) == 0 else (lo, hi))
            continue
        for k in range(2, 64):
            mid = lo + (hi - lo) * Fraction(k // 2, k) if k % 2 == 0 else lo + (hi - lo) / k
            if horner(p, mid) != 0:
                break
        stack.append((mid, hi))
        stack.append((lo, mid))
    return sorted(out)


def to_fraction(x) -> Fraction:
    """Exact value of a binary mpf."""
    x = mpf_of(x)
    man, exp = x.man_exp  # man is unsigned
    if x < 0:
        man = -man
    return Fraction(man * 2**exp) if exp >= 0 else Fraction(man, 2 ** -exp)


def refine_root(p: Sequence, lo: Fraction, hi: Fraction, bits: int) -> RealRoot:
    """Polish a simple root bracketed by [lo, hi] to ``bits`` of precision.

    Newton steps run at 2*bits; the returned enclosure is re-checked by an
    exact rational sign change of p.
    """
    p = trim([Fraction(c) for c in p])
    if lo == hi:
        return RealRoot(lo, lo, hi, exact=True)
    if len(p) == 2:
        r = -p[0] / p[1]
        return RealRoot(r, r, r, exact=True)
    s_lo = _sgn(horner(p, lo))
    # shrink the bracket until Newton is safe
    while hi - lo > Fraction(1, 2**20) * max(1, abs(lo), abs(hi)):
        mid = (lo + hi) / 2
        s_mid = _sgn(horner(p, mid))
        if s_mid == 0:
            return RealRoot(mid, mid, mid, exact=True)
        if s_mid == s_lo:
            lo = mid
        else:
            hi = mid
    dp = deriv(p)
    with mpmath.workprec(2 * bits):
        pm = [mpf_of(c) for c in p]
        dpm = [mpf_of(c) for c in dp]
        x = mpf_of((lo + hi) / 2)
        for _ in range(200):
            step = horner(pm, x) / horner(dpm, x)
            x -= step
            if abs(step) <= abs(x) * mpmath.ldexp(1, -2 * bits + 4) or step == 0:
                break
        width = max(abs(x), mpmath.mpf(1)) * mpmath.ldexp(1, -bits)
        elo, ehi = to_fraction(x - width), to_fraction(x + width)
        if _sgn(horner(p, elo)) * _sgn(horner(p, ehi)) <= 0 and lo <= elo and ehi <= hi:
            lo, hi = elo, ehi
        else:
            # Newton left the bracket; fall back to plain bisection
            s_lo = _sgn(horner(p, lo))
            while hi - lo > Fraction(1, 2 ** (bits + 2)) * max(1, abs(lo)):
                mid = (lo + hi) / 2
                s_mid = _sgn(horner(p, mid))
                if s_mid == 0:
                    return RealRoot(mid, mid, mid, exact=True)
                if s_mid == s_lo:
                    lo = mid
                else:
                    hi = mid
            x = mpf_of((lo + hi) / 2)
    # rational roots with modest denominators are reported exactly
    guess = to_fraction(x).limit_denominator(10**12)
    if lo <= guess <= hi and horner(p, guess) == 0:
        return RealRoot(guess, guess, guess, exact=True)
    return RealRoot(x, lo, hi)


def real_roots(p: Sequence, bits: int) -> list[RealRoot]:
    """All distinct real roots of a rational polynomial, ascending."""
    sf = squarefree(p) if len(trim(p)) > 1 else trim(p)
    return [refine_root(sf, lo, hi, bits) for lo, hi in isolate_real_roots(p)]
