"""End-to-end solve: pick a structure, construct, certify, serialize."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from delsarte import certify as C
from delsarte import construct as X
from delsarte import lp_estimator as LP
from delsarte import tables
from delsarte.errors import (
    AmbiguousSolution,
    DegenerateStructure,
    DomainError,
    InvalidArgument,
    StructureError,
    VerificationError,
    WrongStructure,
)
from delsarte.gegenbauer import BasisContext, basis_context
from delsarte.numeric import DEFAULT_PRECISION_BITS, mpf_of

log = logging.getLogger(__name__)


@dataclass
class SolveResult:
    m: int
    s: Fraction
    formspec: X.FormSpec
    candidate: X.ExtremalCandidate
    functional: C.QuadratureFunctional
    bound: C.BoundResult
    reports: list[C.CheckReport]
    certificate: str
    structure_source: str
    notes: list[str] = field(default_factory=list)

    def summary(self, digits: int = 30) -> str:
        b = self.bound
        exact = b.w_exact
        if exact is not None and exact.denominator == 1:
            w = str(exact)
        else:
            with mpmath.workprec(4 * digits + 16):
                w = mpmath.nstr(mpf_of(exact if exact is not None else b.w), digits, min_fixed=-8, max_fixed=40)
            if exact is not None:
                w += f" exact={exact}"
        fs = self.formspec
        return f"m={self.m} w={w} even_floor={b.even_floor} form={fs.form} K={fs.K} degree={fs.degree}"


def parse_s(text) -> Fraction:
    """s must be an exact rational such as '1/2'; decimals are rejected."""
    if isinstance(text, Fraction):
        s = text
    else:
        text = str(text).strip()
        if "." in text or "e" in text.lower():
            raise InvalidArgument(f"s must be an exact rational like 1/2, got {text!r}")
        try:
            s = Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidArgument(f"cannot parse s={text!r}") from exc
    if not 0 < s < 1:
        raise DomainError("s must lie in (0, 1)")
    return s


def default_degree_cap(m: int) -> int:
    """Registry degree for m; otherwise the nearest lower registry entry + 4."""
    entry = tables.known_bound(m)
    if entry is not None:
        return max(entry.degree, 4 * entry.K + 2 * entry.form)
    for k in range(m - 1, 2, -1):
        e = tables.known_bound(k)
        if e is not None:
            return max(e.degree, 4 * e.K + 2 * e.form) + 4
    return 4


def structures_for(m: int, s: Fraction, form=None, K=None, precision=DEFAULT_PRECISION_BITS,
                   ctx: BasisContext | None = None, use_registry: bool = True) -> tuple[list[X.FormSpec], str]:
    """Structures to try, in priority order: explicit flags, registry, LP guess."""
    if form is not None and K is not None:
        return [X.FormSpec(form, K)], "flags"
    entry = tables.known_bound(m) if s == Fraction(1, 2) and use_registry else None
    if entry is not None and form is None and K is None:
        return [X.FormSpec(entry.form, entry.K)], "registry"
    cap = default_degree_cap(m) + (0 if use_registry else 8)
    lp = LP.build_lp({"m": m, "s": s}, cap, LP.DEFAULT_GRID, ctx=ctx)
    guesses = LP.guess_structure(LP.solve_lp(lp), lp)
    specs = []
    for g in guesses:
        if (form is None or g.form == form) and (K is None or g.K == K):
            specs.append(X.FormSpec(g.form, g.K))
    if form is not None and K is None and not specs:
        specs = [X.FormSpec(form, k) for k in range(0 if form < 3 else 1, 12)]
    if K is not None and form is None and not specs:
        specs = [X.FormSpec(f, K) for f in (1, 2, 3, 4) if f < 3 or K >= 1]
    return specs, "lp"


def certify_candidate(ctx: BasisContext, cand: X.ExtremalCandidate, precision: int):
    functional = C.build_functional(ctx, cand, precision)
    bound = C.compute_bound(functional, cand)
    text = C.emit_certificate(ctx, cand, functional, bound, precision)
    reports = C.verify_payload(C.parse_certificate(text))
    return functional, bound, reports, text


def solve(m: int, s="1/2", form=None, K=None, precision: int = DEFAULT_PRECISION_BITS) -> SolveResult:
    if m < 3:
        raise DomainError(f"m={m} is unsupported: the positivity tail estimate needs m >= 3")
    s = parse_s(s)
    ctx = basis_context(m)
    specs, source = structures_for(m, s, form, K, precision, ctx)
    try:
        return _solve_specs(ctx, m, s, specs, source, precision)
    except (StructureError, VerificationError) as exc:
        if source != "registry":
            raise
        log.info("registry structure failed for m=%s (%s); trying the LP guess", m, exc)
        first = exc
    lp_specs = [fs for fs in structures_for(m, s, None, None, precision, ctx, use_registry=False)[0]
                if fs not in specs]
    try:
        res = _solve_specs(ctx, m, s, lp_specs, "lp", precision)
    except (StructureError, VerificationError):
        raise first from None
    res.notes.append(f"registry structure form={specs[0].form} K={specs[0].K} did not certify: {first}")
    return res


def _solve_specs(ctx, m, s, specs, source, precision) -> SolveResult:
    failures: list[str] = []
    verification_failure: VerificationError | None = None
    for fs in specs:
        try:
            cands = X.candidates_for(ctx, fs, s, precision)
            try:
                pool = [X.select_solution(cands, ctx)]
            except AmbiguousSolution as amb:
                pool = amb.candidates
        except (WrongStructure, DegenerateStructure) as exc:
            failures.append(f"form={fs.form} K={fs.K}: {exc}")
            continue
        certified = []
        for cand in pool:
            try:
                functional, bound, reports, text = certify_candidate(ctx, cand, precision)
            except (StructureError, VerificationError) as exc:
                failures.append(f"form={fs.form} K={fs.K}: {exc}")
                if isinstance(exc, VerificationError):
                    verification_failure = exc
                continue
            failed = [r.name for r in reports if not r.passed and not r.warning]
            if failed:
                verification_failure = VerificationError(failed[0], f"form={fs.form} K={fs.K} fails " + ", ".join(failed))
                failures.append(str(verification_failure))
                continue
            certified.append(SolveResult(m, s, fs, cand, functional, bound, reports, text, source))
        if len(certified) == 1:
            res = certified[0]
            entry = tables.known_bound(m)
            if entry is not None and entry.anomalies and s == Fraction(1, 2):
                res.notes.extend(entry.anomalies)
            if len(pool) > 1:
                res.notes.append(f"{len(pool)} candidates passed (c1)/(c2); one certified")
            return res
        if len(certified) > 1:
            raise AmbiguousSolution(f"{len(certified)} certified candidates for form={fs.form} K={fs.K}",
                                    [c.candidate for c in certified])
    if verification_failure is not None and source != "lp":
        raise verification_failure
    raise WrongStructure(f"no structure certified for m={m}: " + " | ".join(failures or ["no candidates"]))
