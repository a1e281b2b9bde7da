"""Quadrature functional, optimality checks, the bound, and certificates.

The functional is L(p) = sum over nodes of lambda(node) * p(node).  A
candidate is certified when

* the weights are nonnegative, sum to one and lambda(1) > 0,
* L is exact on the polynomial space of the target degree (with the known
  corrections gamma = L(R_idx) at the two vanishing coefficients of forms
  3/4),
* L(R_{2k}) >= 0 for every k >= 1 (direct scan up to n0, tail bound past it),
* the polynomial lies in the admissible class,
* 2 / lambda(1) and 2 f(1) / f_0 agree.

Certificates are JSON documents whose reals are decimal strings; the
verifier recomputes every check from the document alone.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from delsarte import polyalg as P
from delsarte.construct import ExtremalCandidate, FormSpec, zeval
from delsarte.errors import CertificateParseError, DomainError, InvalidArgument, StructureError, VerificationError
from delsarte.gegenbauer import (
    BasisContext,
    EvenPolynomial,
    basis_context,
    combine_monomial_expansions,
    eval_R_upto,
    min_tail_index,
    project_f0,
)
from delsarte.numeric import (
    DEFAULT_PRECISION_BITS,
    margin,
    mpf_of,
    parse_number,
    to_decimal,
    to_exact_or_decimal,
)

SCHEMA_VERSION = 1
CHECK_ORDER = ("weights", "exactness", "positivity", "class_membership", "zeros", "duality_gap", "uniqueness")


@dataclass
class QuadratureFunctional:
    """Nodes with labels ``1``, ``s``, ``a1``.. and optionally ``0``.

    ``values`` and ``weights`` are aligned with ``labels``; exact entries are
    Fractions.  ``gammas`` maps an R-index to L(R_idx).
    """

    m: int
    s: Fraction
    degree: int
    labels: list[str]
    values: list
    weights: list
    gammas: dict[int, object] = field(default_factory=dict)
    precision: int = DEFAULT_PRECISION_BITS

    def weight(self, label: str):
        return self.weights[self.labels.index(label)]

    @property
    def lambda1(self):
        return self.weight("1")

    @property
    def t_max(self):
        """Largest node strictly inside (-1, 1)."""
        return max(mpf_of(v) for lab, v in zip(self.labels, self.values) if lab != "1")

    def apply_R(self, ctx: BasisContext, n_max: int) -> list:
        """[L(R_0), ..., L(R_{n_max})]."""
        totals = [mpmath.mpf(0)] * (n_max + 1)
        for v, w in zip(self.values, self.weights):
            w = mpf_of(w)
            for n, rv in enumerate(eval_R_upto(ctx, n_max, mpf_of(v))):
                totals[n] += w * rv
        return totals

    def apply(self, p: EvenPolynomial):
        return sum((mpf_of(w) * p(mpf_of(v)) for v, w in zip(self.values, self.weights)), mpmath.mpf(0))


@dataclass
class CheckReport:
    name: str
    passed: bool
    margin: object
    detail: str = ""
    warning: bool = False
    data: dict = field(default_factory=dict)

    def as_payload(self, bits: int) -> dict:
        return {"pass": bool(self.passed), "margin": to_decimal(self.margin, bits)}


@dataclass
class BoundResult:
    w: object
    even_floor: int
    source: str = "constructed"
    w_exact: Fraction | None = None


def even_floor(w) -> int:
    """Largest even integer not exceeding w."""
    if isinstance(w, (int, Fraction)):
        n = math.floor(Fraction(w))
    else:
        n = int(mpmath.floor(w))
    return n - (n % 2)


# ----------------------------------------------------------------------------
# functional


def _weight_at(ctx: BasisContext, y_nodes: list, i: int):
    """lambda at node i from g = prod_{j != i} (y - y_j): g_0 / g(y_i)."""
    g = [y_nodes[0] * 0 + 1]
    for j, yj in enumerate(y_nodes):
        if j != i:
            g = P.mul(g, [-yj, 1])
    num = project_f0(ctx, EvenPolynomial(g))
    den = P.horner(g, y_nodes[i])
    if den == 0:
        raise StructureError("coincident quadrature nodes")
    return num / den


def build_functional(ctx: BasisContext, candidate: ExtremalCandidate, precision: int = DEFAULT_PRECISION_BITS) -> QuadratureFunctional:
    if not candidate.feasible:
        raise StructureError("candidate is infeasible: " + "; ".join(candidate.reasons))
    fs, s, trace = candidate.formspec, candidate.s, candidate.trace
    with mpmath.workprec(precision):
        labels = ["1", "s"] + [f"a{i}" for i in range(1, fs.K + 1)]
        values: list = [Fraction(1), s] + list(candidate.zeros)
        if fs.zero_node:
            labels.append("0")
            values.append(Fraction(0))
        weights: list = []
        for lab in labels:
            if lab in ("1", "s", "0"):
                num, den = trace.weights[lab]
                d = zeval(den, candidate.xi)
                if d == 0:
                    raise StructureError(f"degenerate node {lab}: zero denominator")
                weights.append(zeval(num, candidate.xi) / d)
        ys = [mpf_of(v) ** 2 for v in values]
        if fs.K == 1 and all(isinstance(w, Fraction) for w in weights):
            # normalization L(1) = 1 pins the lone interior weight exactly
            weights.insert(2, 1 - sum(weights))
        else:
            for i in range(2, 2 + fs.K):
                weights.insert(i, _weight_at(ctx, ys, i))
        gammas = {idx: zeval(g, candidate.xi) for idx, g in trace.gammas.items()}
    return QuadratureFunctional(ctx.m, s, fs.degree, labels, values, weights, gammas, precision)


# ----------------------------------------------------------------------------
# checks


def check_weights(functional: QuadratureFunctional) -> CheckReport:
    eps = margin(functional.precision)
    with mpmath.workprec(functional.precision):
        ws = [mpf_of(w) for w in functional.weights]
        total_err = abs(sum(ws) - 1)
        low = min(ws)
        ok = total_err <= eps and low >= -eps and ws[0] > 0
        return CheckReport("weights", ok, min(low, eps - total_err),
                           f"sum-1={mpmath.nstr(total_err, 5)}, min={mpmath.nstr(low, 10)}")


def expected_L_values(degree: int, gammas: dict) -> dict[int, object]:
    """The values L must take on R_0, R_2, ..., R_degree."""
    out: dict[int, object] = {0: 1}
    for n in range(2, degree + 1, 2):
        out[n] = gammas.get(n, 0)
    return out


def check_exactness(functional: QuadratureFunctional, ctx: BasisContext, degree: int | None = None) -> CheckReport:
    degree = functional.degree if degree is None else degree
    eps = margin(functional.precision)
    with mpmath.workprec(functional.precision):
        vals = functional.apply_R(ctx, degree)
        worst, where = mpmath.mpf(0), 0
        for n, want in expected_L_values(degree, functional.gammas).items():
            err = abs(vals[n] - mpf_of(want))
            if err > worst:
                worst, where = err, n
        ok = worst <= eps
        detail = f"max residual {mpmath.nstr(worst, 5)} at R_{where}"
        return CheckReport("exactness", ok, eps - worst, detail, data={"index": where})


def check_L_nonneg(functional: QuadratureFunctional, ctx: BasisContext) -> CheckReport:
    """L(R_{2k}) >= -eps for 2k <= n0, and the tail criterion at n0."""
    eps = margin(functional.precision)
    with mpmath.workprec(functional.precision):
        lam1 = mpf_of(functional.lambda1)
        try:
            n0 = min_tail_index(ctx, lam1, functional.t_max)
        except (DomainError, InvalidArgument) as exc:
            return CheckReport("positivity", False, mpmath.mpf(-1), str(exc))
        vals = functional.apply_R(ctx, n0)
        mandated = {n for n in range(2, functional.degree + 1, 2) if n not in functional.gammas}
        worst, where = None, None
        for n in range(2, n0 + 1, 2):
            if n in mandated:
                continue
            if worst is None or vals[n] < worst:
                worst, where = vals[n], n
        worst = mpmath.mpf(1) if worst is None else worst
        ok = worst >= -eps
        detail = f"n0={n0}, min L(R_2k)={mpmath.nstr(worst, 10)} at 2k={where}"
        return CheckReport("positivity", ok, worst, detail, data={"n0": n0, "index": where})


def _class_report(ctx: BasisContext, s, zeros: Sequence, poly: EvenPolynomial, form: int,
                  quartic_min, bits: int) -> CheckReport:
    eps = margin(bits)
    with mpmath.workprec(bits):
        mono = [mpf_of(c) for c in poly.coeffs]
        stored = [mpf_of(c) for c in (poly.basis or [])]
        derived = combine_monomial_expansions(ctx, mono)
        scale = max(abs(c) for c in derived)
        problems = []
        if len(stored) != len(derived) or any(abs(a - b) > eps * scale for a, b in zip(stored, derived)):
            problems.append("basis and monomial representations disagree")
        basis = stored if len(stored) == len(derived) else derived
        low = min((c / scale for c in basis[1:]), default=mpmath.mpf(1))
        if low < -eps:
            k = min(range(1, len(basis)), key=lambda i: basis[i])
            problems.append(f"f_{2 * k} < 0")
        if not basis[0] > 0:
            problems.append("f_0 <= 0")
        s_val = mpf_of(s)
        zs = [mpf_of(a) for a in zeros]
        if any(not 0 < a < s_val for a in zs) or any(b <= a for a, b in zip(zs, zs[1:])):
            problems.append("interior zeros not increasing inside (0, s)")
        sign_margin = mpmath.mpf(1)
        if form in (3, 4):
            sign_margin = mpf_of(quartic_min)
            if not sign_margin > 0:
                problems.append("quartic factor not positive on [0, s]")
        m = min(low, sign_margin, basis[0] / scale)
        return CheckReport("class_membership", not problems, m, "; ".join(problems) or "ok")


def check_candidate_in_class(candidate: ExtremalCandidate, ctx: BasisContext,
                             precision: int = DEFAULT_PRECISION_BITS) -> CheckReport:
    with mpmath.workprec(precision):
        qmin = candidate.quartic_min()
    return _class_report(ctx, candidate.s, candidate.zeros, candidate.polynomial,
                         candidate.formspec.form, qmin, precision)


def _zeros_report(poly: EvenPolynomial, s, zeros: Sequence, bits: int) -> CheckReport:
    eps = margin(bits)
    with mpmath.workprec(bits):
        f1 = abs(poly(mpmath.mpf(1)))
        res = [abs(poly(mpf_of(s)))] + [abs(poly(mpf_of(a))) for a in zeros]
        worst = max(res) / f1
        return CheckReport("zeros", worst <= eps, eps - worst, f"max |f(node)|/f(1) = {mpmath.nstr(worst, 5)}")


def compute_bound(functional: QuadratureFunctional, candidate: ExtremalCandidate) -> BoundResult:
    """w = 2 / lambda(1), cross-checked against 2 f(1) / f_0."""
    bits = functional.precision
    lam1 = functional.lambda1
    poly = candidate.polynomial
    if isinstance(lam1, Fraction) and all(isinstance(c, Fraction) for c in poly.coeffs):
        w = 2 / lam1
        f0 = project_f0(functional_ctx(functional), poly)
        if 2 * poly(Fraction(1)) / f0 != w:
            raise VerificationError("duality_gap", "exact 2/lambda(1) differs from 2 f(1)/f_0")
        return BoundResult(w, even_floor(w), "constructed", w)
    with mpmath.workprec(bits):
        w = 2 / mpf_of(lam1)
        f0 = project_f0(functional_ctx(functional), poly)
        other = 2 * poly(mpmath.mpf(1)) / mpf_of(f0)
        if abs(w - other) > margin(bits) * abs(w):
            raise VerificationError("duality_gap", f"2/lambda(1) and 2 f(1)/f_0 differ by {mpmath.nstr(abs(w - other), 5)}")
        return BoundResult(+w, even_floor(w), "constructed", None)


def functional_ctx(functional: QuadratureFunctional) -> BasisContext:
    return _ctx_cache(functional.m)


_CTXS: dict[int, BasisContext] = {}


def _ctx_cache(m: int) -> BasisContext:
    if m not in _CTXS:
        _CTXS[m] = basis_context(m)
    return _CTXS[m]


# ----------------------------------------------------------------------------
# uniqueness


def determinant_report(matrix, bits: int) -> CheckReport:
    eps = margin(bits)
    with mpmath.workprec(bits):
        (a, b), (c, d) = [[mpf_of(x) for x in row] for row in matrix]
        delta = a * d - b * c
        scale = max(abs(a), abs(b), abs(c), abs(d), mpmath.mpf(1) * 0 + eps)
        ok = abs(delta) > eps * scale * scale
        detail = f"delta={mpmath.nstr(delta, 12)}"
        return CheckReport("uniqueness", ok, delta, detail if ok else detail + " (uniqueness unverified)",
                           warning=not ok, data={"delta": delta, "applicable": True})


def uniqueness_matrix(candidate: ExtremalCandidate, ctx: BasisContext, precision: int = DEFAULT_PRECISION_BITS):
    """Rows (R_ia, R_ib coefficients), columns (e_1, e_0) for
    f = h (y^2 + e_1 y + e_0) with h = (y - s^2) chi^2 [y]."""
    fs = candidate.formspec
    ia, ib = (idx // 2 for idx in fs.correction_indices)
    with mpmath.workprec(precision):
        K = fs.K
        chi = [(-1 if (K - i) % 2 else 1) * mpf_of(candidate.U[i]) for i in range(K)] + [mpmath.mpf(1)]
        h = P.mul([-mpf_of(candidate.s) ** 2, mpmath.mpf(1)], P.mul(chi, chi))
        if fs.zero_node:
            h = [mpmath.mpf(0)] + h
        cols = []
        for shift in (1, 0):
            b = combine_monomial_expansions(ctx, [mpmath.mpf(0)] * shift + h)
            cols.append([b[ia] if ia < len(b) else mpmath.mpf(0), b[ib] if ib < len(b) else mpmath.mpf(0)])
        return [[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]]


def check_uniqueness(candidate: ExtremalCandidate, ctx: BasisContext, precision: int = DEFAULT_PRECISION_BITS) -> CheckReport:
    if not candidate.formspec.quartic:
        return CheckReport("uniqueness", True, mpmath.mpf(0), "not applicable to forms 1/2",
                           data={"applicable": False})
    return determinant_report(uniqueness_matrix(candidate, ctx, precision), precision)


# ----------------------------------------------------------------------------
# certificates


def _num(x, bits: int) -> str:
    return to_exact_or_decimal(x, bits)


def certificate_payload(ctx: BasisContext, candidate: ExtremalCandidate, functional: QuadratureFunctional,
                        bound: BoundResult, precision: int) -> dict:
    """The certificate without its report (see ``emit_certificate``)."""
    fs = candidate.formspec
    trace = candidate.trace
    with mpmath.workprec(precision):
        poly = candidate.polynomial
        basis = poly.basis if poly.basis is not None else combine_monomial_expansions(ctx, poly.coeffs)
        doc = {
            "schema_version": SCHEMA_VERSION,
            "m": ctx.m,
            "s": str(Fraction(candidate.s)),
            "form": fs.form,
            "K": fs.K,
            "degree": fs.degree,
            "precision_bits": precision,
            "eliminant": {"coeffs": [str(Fraction(c)) for c in (trace.eliminant if trace else [])]},
            "xi": None if candidate.xi is None else _num(candidate.xi, precision),
            "U": [_num(u, precision) for u in candidate.U],
            "q": None if candidate.q is None else _num(candidate.q, precision),
            "r": None if candidate.r is None else _num(candidate.r, precision),
            "zeros": [_num(a, precision) for a in candidate.zeros],
            "poly_monomial": [_num(c, precision) for c in poly.coeffs],
            "poly_basis": [_num(c, precision) for c in basis],
            "functional": {
                "nodes": list(functional.labels),
                "weights": [_num(w, precision) for w in functional.weights],
                "gammas": {str(k): _num(v, precision) for k, v in sorted(functional.gammas.items())},
            },
            "bound": {
                "w": _num(bound.w, precision),
                "w_exact": None if bound.w_exact is None else str(bound.w_exact),
                "even_floor": bound.even_floor,
            },
        }
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=True) + "\n"


def emit_certificate(ctx: BasisContext, candidate: ExtremalCandidate, functional: QuadratureFunctional,
                     bound: BoundResult, precision: int = DEFAULT_PRECISION_BITS, path=None) -> str:
    """Serialize a certificate; the embedded report is the verifier's verdict on
    the serialized payload itself, so re-verification reproduces it exactly."""
    doc = certificate_payload(ctx, candidate, functional, bound, precision)
    reports = verify_payload(doc)
    doc["report"] = {r.name: r.as_payload(precision) for r in reports}
    text = dumps(doc)
    if path is not None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(text)
    return text


@dataclass
class Verification:
    checks: list[CheckReport]
    embedded_match: bool | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed or c.warning for c in self.checks)

    @property
    def failures(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed and not c.warning]


def parse_certificate(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CertificateParseError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("schema_version") != SCHEMA_VERSION:
        raise CertificateParseError("unsupported or missing schema_version")
    required = ("m", "s", "form", "K", "degree", "precision_bits", "eliminant", "xi", "U", "q", "r",
                "zeros", "poly_monomial", "poly_basis", "functional", "bound")
    missing = [k for k in required if k not in doc]
    if missing:
        raise CertificateParseError("missing fields: " + ", ".join(missing))
    return doc


def _payload_parts(doc: dict):
    try:
        bits = int(doc["precision_bits"])
        m = int(doc["m"])
        s = Fraction(doc["s"])
        form, K, degree = int(doc["form"]), int(doc["K"]), int(doc["degree"])
        with mpmath.workprec(bits):
            zeros = [parse_number(a) for a in doc["zeros"]]
            poly = EvenPolynomial([parse_number(c) for c in doc["poly_monomial"]],
                                  [parse_number(c) for c in doc["poly_basis"]], bits)
            fn = doc["functional"]
            labels = list(fn["nodes"])
            values = []
            for lab in labels:
                if lab == "1":
                    values.append(Fraction(1))
                elif lab == "s":
                    values.append(s)
                elif lab == "0":
                    values.append(Fraction(0))
                elif lab.startswith("a"):
                    values.append(zeros[int(lab[1:]) - 1])
                else:
                    raise CertificateParseError(f"unknown node label {lab!r}")
            weights = [parse_number(w) for w in fn["weights"]]
            gammas = {int(k): parse_number(v) for k, v in fn["gammas"].items()}
            U = [parse_number(u) for u in doc["U"]]
            q = None if doc["q"] is None else parse_number(doc["q"])
            r = None if doc["r"] is None else parse_number(doc["r"])
            b = doc["bound"]
            w = parse_number(b["w"])
            w_exact = None if b["w_exact"] is None else Fraction(b["w_exact"])
            floor = int(b["even_floor"])
    except CertificateParseError:
        raise
    except (KeyError, TypeError, ValueError, IndexError, ZeroDivisionError) as exc:
        raise CertificateParseError(f"malformed certificate: {exc}") from exc
    if len(weights) != len(labels):
        raise CertificateParseError("weights and nodes differ in length")
    functional = QuadratureFunctional(m, s, degree, labels, values, weights, gammas, bits)
    return dict(bits=bits, m=m, s=s, form=form, K=K, degree=degree, zeros=zeros, poly=poly,
                functional=functional, U=U, q=q, r=r, w=w, w_exact=w_exact, floor=floor)


def _quartic_min(q, r, s, bits):
    with mpmath.workprec(bits):
        q, r, s2 = mpf_of(q), mpf_of(r), mpf_of(s) ** 2
        vals = [r, s2 * s2 + q * s2 + r]
        if 0 < -q / 2 < s2:
            vals.append(r - q * q / 4)
        return min(vals)


def _duality_report(parts: dict, ctx: BasisContext) -> CheckReport:
    bits = parts["bits"]
    eps = margin(bits)
    with mpmath.workprec(bits):
        lam1 = mpf_of(parts["functional"].lambda1)
        poly = parts["poly"]
        w_dual = 2 / lam1
        w_primal = 2 * poly(mpmath.mpf(1)) / mpf_of(poly.basis[0])
        w = mpf_of(parts["w"])
        gap = max(abs(w_dual - w_primal), abs(w - w_dual), abs(w - w_primal)) / w
        problems = []
        if gap > eps:
            problems.append(f"relative gap {mpmath.nstr(gap, 5)}")
        if parts["w_exact"] is not None and abs(mpf_of(parts["w_exact"]) - w) > eps * w:
            problems.append("exact bound disagrees with decimal bound")
        if parts["floor"] != even_floor(parts["w_exact"] if parts["w_exact"] is not None else w):
            problems.append("even floor inconsistent with w")
        return CheckReport("duality_gap", not problems, eps - gap, "; ".join(problems) or "ok")


def verify_payload(doc: dict) -> list[CheckReport]:
    """Every check recomputed from the payload at its stated precision."""
    parts = _payload_parts(doc)
    bits = parts["bits"]
    ctx = _ctx_cache(parts["m"])
    fn: QuadratureFunctional = parts["functional"]
    reports = [check_weights(fn), check_exactness(fn, ctx), check_L_nonneg(fn, ctx)]
    qmin = None
    if parts["form"] in (3, 4):
        if parts["q"] is None or parts["r"] is None:
            raise CertificateParseError("forms 3/4 need q and r")
        qmin = _quartic_min(parts["q"], parts["r"], parts["s"], bits)
    reports.append(_class_report(ctx, parts["s"], parts["zeros"], parts["poly"], parts["form"], qmin, bits))
    reports.append(_zeros_report(parts["poly"], parts["s"], parts["zeros"], bits))
    reports.append(_duality_report(parts, ctx))
    if parts["form"] in (3, 4):
        stub = ExtremalCandidate(FormSpec(parts["form"], parts["K"]), parts["s"], None, parts["U"],
                                 parts["zeros"], parts["q"], parts["r"], parts["poly"])
        reports.append(check_uniqueness(stub, ctx, bits))
    else:
        reports.append(CheckReport("uniqueness", True, mpmath.mpf(0), "not applicable to forms 1/2"))
    return reports


def verify_certificate(source) -> Verification:
    """Re-check a certificate given as a path, a JSON string or a parsed dict."""
    if isinstance(source, dict):
        doc = source
    else:
        text = source
        if not str(source).lstrip().startswith("{"):
            try:
                with open(source, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise CertificateParseError(f"cannot read certificate: {exc}") from exc
        doc = parse_certificate(text)
    reports = verify_payload(doc)
    embedded = doc.get("report")
    match = None
    if isinstance(embedded, dict):
        bits = int(doc["precision_bits"])
        match = all(embedded.get(r.name) == r.as_payload(bits) for r in reports)
    return Verification(reports, match)
