"""Registry of published bounds w^A_m(1/2) and known antipodal kissing numbers."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import mpmath

from delsarte.numeric import mpf_of


@dataclass(frozen=True)
class TableEntry:
    m: int
    w: object  # Fraction for exact rows, decimal string for truncated ones
    K: int
    form: int
    degree: int
    table: int

    @property
    def exact(self) -> bool:
        return isinstance(self.w, Fraction)

    @property
    def printed_digits(self) -> int | None:
        """Significant digits of a truncated decimal entry."""
        if self.exact:
            return None
        return len(self.w.replace(".", "").lstrip("0"))

    @property
    def consistent_degree(self) -> bool:
        return self.degree == 4 * self.K + 2 * self.form

    @property
    def anomalies(self) -> tuple[str, ...]:
        out = []
        if not self.consistent_degree:
            out.append(f"printed degree {self.degree} differs from 4K+2*form = {4 * self.K + 2 * self.form}")
        twins = [e.m for e in _entries().values() if e.m != self.m and e.w == self.w]
        if twins:
            out.append("same printed value as m=" + ",".join(map(str, twins)))
        return tuple(out)

    def value(self):
        return self.w if self.exact else mpmath.mpf(self.w)


@dataclass(frozen=True)
class KnownTau:
    m: int
    tau: int
    upper_bound_only: bool = False


# tau^A_m: exact where the kissing configuration is known to be optimal,
# otherwise the best upper bound below the even floor.
KNOWN_TAU = {
    2: KnownTau(2, 6),
    3: KnownTau(3, 12),
    4: KnownTau(4, 24),
    5: KnownTau(5, 40),
    6: KnownTau(6, 72),
    7: KnownTau(7, 126),
    8: KnownTau(8, 240),
    10: KnownTau(10, 548, upper_bound_only=True),
    14: KnownTau(14, 2938, upper_bound_only=True),
    24: KnownTau(24, 196560),
}


def _parse_w(text: str):
    return Fraction(text) if "." not in text else text


@lru_cache(maxsize=1)
def _entries() -> dict[int, TableEntry]:
    out = {}
    with resources.files("delsarte.data").joinpath("registry.csv").open(encoding="ascii") as fh:
        for row in csv.DictReader(fh):
            e = TableEntry(int(row["m"]), _parse_w(row["w"]), int(row["K"]), int(row["form"]),
                           int(row["degree"]), int(row["table"]))
            out[e.m] = e
    return out


def all_entries() -> list[TableEntry]:
    return sorted(_entries().values(), key=lambda e: e.m)


def known_bound(m: int) -> TableEntry | None:
    return _entries().get(m)


def known_tau(m: int) -> KnownTau | None:
    return KNOWN_TAU.get(m)


@dataclass
class Comparison:
    m: int
    registry: object
    computed: object
    rel_diff: object
    exact_match: bool
    within_printed: bool
    tau: KnownTau | None = None
    tau_gap: int | None = None

    @property
    def status(self) -> str:
        if self.exact_match:
            return "exact"
        return "match" if self.within_printed else "mismatch"


def _even_floor(w) -> int:
    from delsarte.certify import even_floor

    return even_floor(w)


def compare(m: int, computed, tol=None) -> Comparison:
    """Compare a computed bound (BoundResult or number) against the registry.

    Truncated decimal rows match when the computed value agrees to the
    printed digits; ``tol`` overrides that with a relative tolerance.
    """
    entry = known_bound(m)
    if entry is None:
        raise KeyError(f"m={m} is not in the registry")
    exact = getattr(computed, "w_exact", None)
    value = getattr(computed, "w", computed)
    if exact is None and isinstance(value, (int, Fraction)):
        exact = Fraction(value)
    with mpmath.workprec(256):
        reg = mpf_of(entry.w) if entry.exact else mpmath.mpf(entry.w)
        got = mpf_of(exact) if exact is not None else mpf_of(value)
        rel = abs(got - reg) / abs(reg)
        exact_match = entry.exact and exact is not None and exact == entry.w
        if tol is not None:
            within = rel <= tol
        elif entry.exact:
            within = exact_match or rel <= mpmath.mpf(10) ** -30
        else:
            # the printed decimals are truncated: allow one unit in the last place
            places = len(entry.w.split(".")[1]) if "." in entry.w else 0
            within = abs(got - reg) < mpmath.mpf(10) ** -places
        within = bool(within)
    tau = known_tau(m)
    gap = None
    if tau is not None:
        floor = _even_floor(exact if exact is not None else got)
        gap = floor - tau.tau
    return Comparison(m, entry.w, exact if exact is not None else value, rel, exact_match, within, tau, gap)
