"""Construction of the extremal polynomial and its quadrature nodes.

For a structure (form, K) the extremal polynomial is

    f(t) = (t^2 - s^2) * chi(t)^2 * E(t),   chi(t) = prod_i (t^2 - a_i^2),

with E = 1, t^2, t^4 + q t^2 + r or t^2 (t^4 + q t^2 + r) for forms 1..4.  The
quadrature functional has nodes 1, s, a_1..a_K (and 0 for forms 2 and 4).
Write chi(t) = t^{2K} - U_{K-1} t^{2K-2} + ... +- U_0 and let omega be the
node polynomial.  Exactness of the quadrature on the test polynomials
phi^j = t^{2(j-1)} omega is linear in the U's; the first K-1 of those
relations express U_0..U_{K-2} through z = U_{K-1}.  Forms 1/2 then leave a
linear equation in z, forms 3/4 a cubic after eliminating the two correction
coefficients gamma.  All of this is carried out over exact rationals in z;
only the final root of the eliminant is numeric.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from delsarte import polyalg as P
from delsarte.errors import AmbiguousSolution, DegenerateStructure, InvalidSpec, WrongStructure
from delsarte.gegenbauer import BasisContext, EvenPolynomial
from delsarte.numeric import mpf_of

ZPoly = list  # ascending Fraction coefficients in z = U_{K-1}
YZPoly = list  # ascending in y = t^2, each entry a ZPoly


@dataclass(frozen=True)
class FormSpec:
    form: int
    K: int

    def __post_init__(self):
        if self.form not in (1, 2, 3, 4):
            raise InvalidSpec(f"form must be 1..4, got {self.form}")
        if self.K < 0:
            raise InvalidSpec("K must be nonnegative")
        if self.form in (3, 4) and self.K < 1:
            raise InvalidSpec("forms 3 and 4 need at least one interior double zero")

    @property
    def degree(self) -> int:
        return 4 * self.K + 2 * self.form

    @property
    def zero_node(self) -> bool:
        return self.form in (2, 4)

    @property
    def quartic(self) -> bool:
        return self.form in (3, 4)

    @property
    def correction_indices(self) -> tuple[int, ...]:
        """R-indices whose coefficients vanish in f and carry gamma = L(R_idx)."""
        if self.form == 3:
            return (4 * self.K + 2, 4 * self.K + 4)
        if self.form == 4:
            return (4 * self.K + 4, 4 * self.K + 6)
        return ()


@dataclass
class Equation:
    name: str
    kind: str  # "exactness" | "vanishing"
    description: str


@dataclass
class QuadratureSystem:
    """The nonlinear system for one (m, form, K, s).

    ``phi_forms[j-1][k]`` is the R_{2k}-coefficient of phi^j as an affine form
    [const, coeff(U_0), ..., coeff(U_{K-1})].
    """

    ctx: BasisContext
    formspec: FormSpec
    s: Fraction
    base: list  # omega / chi as a polynomial in y
    phi_forms: list
    equations: list[Equation]
    unknowns: list[str]


def ypoly_basis(ctx: BasisContext, coeffs: Sequence) -> list:
    """R_{2k}-coefficients of sum_j coeffs[j] y^j (exact or zpoly entries)."""
    out: list = [[] if _is_zpoly(coeffs) else Fraction(0) for _ in coeffs]
    for j, c in enumerate(coeffs):
        row = ctx.monomial_expansion(j)
        for k in range(j + 1):
            if _is_zpoly(coeffs):
                out[k] = P.add(out[k], P.scale(c, row[k]))
            else:
                out[k] += c * row[k]
    return out


def _is_zpoly(coeffs) -> bool:
    return bool(coeffs) and isinstance(coeffs[0], list)


def _node_base(formspec: FormSpec, s: Fraction) -> list:
    base = P.mul([Fraction(-1), Fraction(1)], [-s * s, Fraction(1)])
    if formspec.zero_node:
        base = P.mul(base, [Fraction(0), Fraction(1)])
    return base


def build_system(ctx: BasisContext, formspec: FormSpec, s=Fraction(1, 2)) -> QuadratureSystem:
    s = Fraction(s)
    if not 0 < s < 1:
        raise InvalidSpec("s must lie in (0, 1)")
    K = formspec.K
    half = formspec.degree // 2
    base = _node_base(formspec, s)
    n_phi = K + 2 if formspec.quartic else K
    phi_forms = []
    for j in range(1, n_phi + 1):
        forms = [[Fraction(0)] * (K + 1) for _ in range(half + 1)]
        for i in range(K + 1):
            sign = -1 if (K - i) % 2 else 1
            poly = [Fraction(0)] * (j - 1 + i) + base
            for k, c in enumerate(ypoly_basis(ctx, poly)):
                slot = 0 if i == K else i + 1
                forms[k][slot] += sign * c
        phi_forms.append(forms)

    equations = [
        Equation(f"phi{j}", "exactness", f"quadrature exact on t^{2 * (j - 1)} * omega")
        for j in range(1, n_phi + 1)
    ]
    equations += [Equation(f"h_a{i}", "exactness", f"quadrature exact on omega / (t^2 - a_{i}^2)")
                  for i in range(1, K + 1)]
    equations.append(Equation("h_1", "exactness", "quadrature exact on omega / (t^2 - 1)"))
    equations.append(Equation("h_s", "exactness", "quadrature exact on omega / (t^2 - s^2)"))
    unknowns = [f"U{i}" for i in range(K)]
    unknowns += [f"lambda(a{i})" for i in range(1, K + 1)] + ["lambda(1)", "lambda(s)"]
    if formspec.zero_node:
        equations.append(Equation("h_0", "exactness", "quadrature exact on omega / t^2"))
        unknowns.append("lambda(0)")
    if formspec.quartic:
        unknowns += ["q", "r"] + [f"gamma{idx}" for idx in formspec.correction_indices]
        equations += [Equation(f"f{idx}", "vanishing", f"coefficient of R_{idx} in f is zero")
                      for idx in formspec.correction_indices]
    return QuadratureSystem(ctx, formspec, s, base, phi_forms, equations, unknowns)


@dataclass
class EliminationTrace:
    """Exact relations produced by the elimination, all as polynomials in z.

    ``U[i]`` is U_i(z); ``gammas`` maps an R-index to gamma(z); ``q``/``r`` are
    the quartic coefficients; ``f_coeffs``/``f_basis`` the extremal polynomial
    in y and on R_{2k}; ``weights`` maps a node label to (numerator,
    denominator) of its weight for the nodes 1, s and 0.
    """

    system: QuadratureSystem
    eliminant: ZPoly  # monic; [] when K == 0 (nothing to solve)
    U: list[ZPoly]
    gammas: dict[int, ZPoly]
    q: ZPoly | None
    r: ZPoly | None
    f_coeffs: YZPoly
    f_basis: list[ZPoly]
    weights: dict[str, tuple[ZPoly, ZPoly]]
    lower_relations: list[ZPoly] = field(default_factory=list)


def _solve_linear(A: list[list[Fraction]], rhs: list[ZPoly]) -> list[ZPoly]:
    """Gauss-Jordan over the rationals with zpoly right-hand sides."""
    n = len(A)
    A = [list(row) for row in A]
    rhs = [list(r) for r in rhs]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            raise DegenerateStructure("singular linear relation among the symmetric functions")
        A[col], A[piv] = A[piv], A[col]
        rhs[col], rhs[piv] = rhs[piv], rhs[col]
        inv = 1 / A[col][col]
        A[col] = [x * inv for x in A[col]]
        rhs[col] = P.scale(rhs[col], inv)
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
                rhs[r] = P.sub(rhs[r], P.scale(rhs[col], f))
    return rhs


def _subst(form: list[Fraction], U: list[ZPoly]) -> ZPoly:
    out = [form[0]] if form[0] else []
    for i, u in enumerate(U):
        out = P.add(out, P.scale(u, form[i + 1]))
    return out


def _constant(p: ZPoly, what: str) -> Fraction:
    if len(p) > 1:
        raise DegenerateStructure(f"{what} unexpectedly depends on the free symmetric function")
    if not p:
        raise DegenerateStructure(f"{what} vanishes")
    return p[0]


def _yz_mul(a: YZPoly, b: YZPoly) -> YZPoly:
    out: YZPoly = [[] for _ in range(len(a) + len(b) - 1)]
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = P.add(out[i + j], P.mul(x, y))
    return out


def _yz_const(coeffs: Sequence[Fraction]) -> YZPoly:
    return [[Fraction(c)] if c else [] for c in coeffs]


def _yz_add(a: YZPoly, b: YZPoly) -> YZPoly:
    n = max(len(a), len(b))
    return [P.add(a[i] if i < len(a) else [], b[i] if i < len(b) else []) for i in range(n)]


def _yz_scale(a: YZPoly, c: ZPoly) -> YZPoly:
    return [P.mul(x, c) for x in a]


def _weight_ratio(ctx: BasisContext, poly: YZPoly, node_y: Fraction) -> tuple[ZPoly, ZPoly]:
    """(h_0, h(node)) for a test polynomial h that vanishes at every other node."""
    num: ZPoly = []
    for j, c in enumerate(poly):
        num = P.add(num, P.scale(c, ctx.moment(j)))
    den: ZPoly = []
    for j, c in enumerate(poly):
        den = P.add(den, P.scale(c, node_y ** j))
    return num, den


def eliminate_to_univariate(system: QuadratureSystem) -> EliminationTrace:
    ctx, fs, s = system.ctx, system.formspec, system.s
    K = fs.K
    forms = system.phi_forms
    z = [Fraction(0), Fraction(1)]

    lower: list[ZPoly] = []
    if K >= 2:
        A = [[forms[j][0][1 + i] for i in range(K - 1)] for j in range(K - 1)]
        rhs = [[-forms[j][0][0], -forms[j][0][K]] for j in range(K - 1)]
        lower = _solve_linear(A, [P.trim(r) for r in rhs])
    U = lower + ([z] if K >= 1 else [])

    gammas: dict[int, ZPoly] = {}
    if not fs.quartic:
        eliminant = P.trim(_subst(forms[K - 1][0], U)) if K >= 1 else []
    else:
        ia, ib = (idx // 2 for idx in fs.correction_indices)
        g_a = P.scale(_subst(forms[K - 1][0], U), -1 / _constant(_subst(forms[K - 1][ia], U), "phi^K lead"))
        num = P.add(_subst(forms[K][0], U), P.mul(g_a, _subst(forms[K][ia], U)))
        g_b = P.scale(num, -1 / _constant(_subst(forms[K][ib], U), "phi^(K+1) lead"))
        last = forms[K + 1]
        eliminant = P.add(_subst(last[0], U), P.mul(g_a, _subst(last[ia], U)))
        eliminant = P.add(eliminant, P.mul(g_b, _subst(last[ib], U)))
        gammas = {fs.correction_indices[0]: g_a, fs.correction_indices[1]: g_b}
    if K >= 1:
        if len(eliminant) < 2:
            raise DegenerateStructure("eliminant has no dependence on the free symmetric function")
        eliminant = P.monic(eliminant)

    # chi(y) = sum_i (-1)^(K-i) U_i y^i with U_K = 1
    chi: YZPoly = [P.scale(U[i], -1 if (K - i) % 2 else 1) for i in range(K)] + [[Fraction(1)]]
    chi2 = _yz_mul(chi, chi)
    pre = _yz_mul(_yz_const([-s * s, 1]), chi2)
    if fs.zero_node:
        pre = _yz_mul(_yz_const([0, 1]), pre)

    q = r = None
    if fs.quartic:
        ia, ib = (idx // 2 for idx in fs.correction_indices)
        py2 = ypoly_basis(ctx, [[]] * 2 + pre)
        py1 = ypoly_basis(ctx, [[]] + pre)
        p0 = ypoly_basis(ctx, pre)
        q = P.scale(py2[ib], -1 / _constant(py1[ib], "lead of P*y"))
        r = P.scale(P.add(py2[ia], P.mul(q, py1[ia])), -1 / _constant(p0[ia], "lead of P"))
        f_coeffs = _yz_add(_yz_add([[]] * 2 + pre, _yz_scale([[]] + pre, q)), _yz_scale(pre, r))
    else:
        f_coeffs = pre
    f_basis = [P.trim(c) for c in ypoly_basis(ctx, f_coeffs)]

    base_yz = _yz_const(system.base)
    omega = _yz_mul(base_yz, chi)
    weights = {}
    # omega / (y - 1), omega / (y - s^2), omega / y
    others = _yz_const([-s * s, 1])
    if fs.zero_node:
        others = _yz_mul(others, _yz_const([0, 1]))
    weights["1"] = _weight_ratio(ctx, _yz_mul(others, chi), Fraction(1))
    others = _yz_const([-1, 1])
    if fs.zero_node:
        others = _yz_mul(others, _yz_const([0, 1]))
    weights["s"] = _weight_ratio(ctx, _yz_mul(others, chi), s * s)
    if fs.zero_node:
        weights["0"] = _weight_ratio(ctx, _yz_mul(_yz_const(P.mul([-1, 1], [-s * s, 1])), chi), Fraction(0))
    del omega
    return EliminationTrace(system, eliminant, U, gammas, q, r, f_coeffs, f_basis, weights, lower)


def trace_residuals(trace: EliminationTrace) -> list[ZPoly]:
    """Every exactness relation on phi^1..phi^n with the trace substituted.

    The lower relations and the gamma-defining ones must vanish identically;
    the last relation must be a rational multiple of the eliminant.
    """
    fs = trace.system.formspec
    K = fs.K
    out = []
    for j, forms in enumerate(trace.system.phi_forms):
        rel = _subst(forms[0], trace.U)
        for idx, g in trace.gammas.items():
            rel = P.add(rel, P.mul(g, _subst(forms[idx // 2], trace.U)))
        is_last = j == len(trace.system.phi_forms) - 1
        if is_last and K >= 1:
            rel = P.divmod_exact(rel, trace.eliminant)[1]
        out.append(P.trim(rel))
    return out


def solve_univariate_real_roots(F: Sequence, precision: int = 256) -> list[P.RealRoot]:
    """Isolated real roots of a rational polynomial, polished to ``precision`` bits."""
    return P.real_roots(F, precision)


def zeval(p: ZPoly, root):
    """Evaluate a zpoly; constants (and exact roots) stay exact."""
    if len(p) <= 1:
        return Fraction(p[0]) if p else Fraction(0)
    if isinstance(root, Fraction):
        return P.horner([Fraction(c) for c in p], root)
    return P.horner([mpf_of(c) for c in p], root)


@dataclass
class ExtremalCandidate:
    formspec: FormSpec
    s: Fraction
    xi: object  # root of the eliminant (Fraction / mpf), None when K == 0
    U: list
    zeros: list  # a_1 < ... < a_K as mpf
    q: object
    r: object
    polynomial: EvenPolynomial
    feasible: bool = True
    reasons: list[str] = field(default_factory=list)
    trace: EliminationTrace | None = None

    @property
    def exact(self) -> bool:
        return self.xi is None or isinstance(self.xi, Fraction)

    def quartic_min(self):
        """Minimum of t^4 + q t^2 + r over t in [0, s] (None for forms 1/2)."""
        if not self.formspec.quartic:
            return None
        q, r, s2 = mpf_of(self.q), mpf_of(self.r), mpf_of(self.s) ** 2
        vals = [r, s2 * s2 + q * s2 + r]
        vertex = -q / 2
        if 0 < vertex < s2:
            vals.append(r - q * q / 4)
        return min(vals)


def _chi_roots(U: list, K: int, exact: bool, bits: int) -> tuple[list, list[str]]:
    """Roots y_i of chi(y) and any reasons they fail condition (c1)."""
    coeffs = [(-1 if (K - i) % 2 else 1) * U[i] for i in range(K)] + [Fraction(1)]
    if exact:
        roots = [rt.value for rt in P.real_roots(coeffs, bits)]
        roots = [mpf_of(x) for x in roots]
        return roots, ([] if len(roots) == K else [f"chi has {len(roots)} real squared zeros, need {K}"])
    mc = [mpf_of(c) for c in reversed(coeffs)]
    with mpmath.workprec(mpmath.mp.prec + 64):
        raw = mpmath.polyroots(mc, maxsteps=400, extraprec=4 * mpmath.mp.prec)
    tol = mpmath.ldexp(1, -(mpmath.mp.prec // 2))
    real = sorted(mpmath.re(x) for x in raw if abs(mpmath.im(x)) <= tol * max(1, abs(x)))
    if len(real) != K:
        return real, [f"chi has {K - len(real)} non-real squared zeros"]
    # Newton polish at working precision
    dc = P.deriv([mpf_of(c) for c in coeffs])
    pc = [mpf_of(c) for c in coeffs]
    polished = []
    for y in real:
        for _ in range(8):
            y -= P.horner(pc, y) / P.horner(dc, y)
        polished.append(+y)
    return polished, []


def back_substitute(trace: EliminationTrace, root, ctx: BasisContext, formspec: FormSpec) -> ExtremalCandidate:
    s = trace.system.s
    K = formspec.K
    U = [zeval(u, root) for u in trace.U]
    exact = root is None or isinstance(root, Fraction)
    reasons: list[str] = []
    zeros = []
    if K:
        ys, reasons = _chi_roots(U, K, exact, mpmath.mp.prec)
        if not reasons:
            s2 = mpf_of(s * s)
            if not all(0 < y < s2 for y in ys):
                reasons.append("squared zeros outside (0, s^2)")
            elif any(b - a <= 0 for a, b in zip(ys, ys[1:])):
                reasons.append("repeated zeros")
            else:
                zeros = [mpmath.sqrt(y) for y in ys]
    q = r = None
    if formspec.quartic:
        q, r = zeval(trace.q, root), zeval(trace.r, root)
    coeffs = [zeval(c, root) for c in trace.f_coeffs]
    basis = [zeval(c, root) for c in trace.f_basis]
    poly = EvenPolynomial(coeffs, basis, None if exact else mpmath.mp.prec)
    cand = ExtremalCandidate(formspec, s, root, U, zeros, q, r, poly, not reasons, reasons, trace)
    if formspec.quartic and cand.feasible:
        qm = cand.quartic_min()
        if not qm > 0:
            cand.feasible = False
            cand.reasons.append("quartic factor not positive on [0, s] (condition c2)")
    return cand


def candidates_for(ctx: BasisContext, formspec: FormSpec, s=Fraction(1, 2), precision: int = 256):
    """Every real root of the eliminant turned into a candidate (feasible or not)."""
    system = build_system(ctx, formspec, s)
    trace = eliminate_to_univariate(system)
    with mpmath.workprec(precision):
        if formspec.K == 0:
            return [back_substitute(trace, None, ctx, formspec)]
        roots = solve_univariate_real_roots(trace.eliminant, 2 * precision)
        return [back_substitute(trace, rt.value if rt.exact else +rt.value, ctx, formspec) for rt in roots]


def select_solution(candidates: list[ExtremalCandidate], ctx: BasisContext | None = None) -> ExtremalCandidate:
    if not candidates:
        raise WrongStructure("no candidates to select from")
    survivors = [c for c in candidates if c.feasible]
    if not survivors:
        why = "; ".join(r for c in candidates for r in c.reasons) or "eliminant has no real roots"
        raise WrongStructure(f"no candidate satisfies (c1)/(c2): {why}")
    if len(survivors) > 1:
        raise AmbiguousSolution(f"{len(survivors)} candidates satisfy (c1)/(c2)", survivors)
    return survivors[0]
