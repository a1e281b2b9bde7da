from fractions import Fraction

import mpmath
import pytest

from delsarte import polyalg as P
from delsarte.construct import (
    ExtremalCandidate,
    FormSpec,
    back_substitute,
    build_system,
    candidates_for,
    eliminate_to_univariate,
    select_solution,
    solve_univariate_real_roots,
    trace_residuals,
)
from delsarte.errors import AmbiguousSolution, InvalidSpec, WrongStructure
from delsarte.gegenbauer import EvenPolynomial, basis_context, expand_in_basis
from delsarte.numeric import mpf_of

HALF = Fraction(1, 2)
H = [Fraction(-106321508304907, 2129617205027920), Fraction(590059779, 1287046064),
     Fraction(-1835489, 2079100), Fraction(1)]
D = mpmath.mpf


@pytest.fixture(scope="module")
def trace43():
    return eliminate_to_univariate(build_system(basis_context(43), FormSpec(3, 3), HALF))


@pytest.fixture(scope="module")
def cand43():
    with mpmath.workprec(256):
        return select_solution(candidates_for(basis_context(43), FormSpec(3, 3), HALF, 256))


@pytest.mark.parametrize("form,K,deg", [(1, 1, 6), (2, 0, 4), (3, 3, 18), (4, 2, 16), (1, 0, 2)])
def test_formspec_degree(form, K, deg):
    assert FormSpec(form, K).degree == deg


@pytest.mark.parametrize("form,K", [(0, 1), (5, 1), (3, 0), (4, 0), (1, -1)])
def test_formspec_invalid(form, K):
    with pytest.raises(InvalidSpec):
        FormSpec(form, K)


def test_correction_indices():
    assert FormSpec(3, 3).correction_indices == (14, 16)
    assert FormSpec(4, 2).correction_indices == (12, 14)
    assert FormSpec(1, 2).correction_indices == ()


def test_system_size_m43():
    sysm = build_system(basis_context(43), FormSpec(3, 3), HALF)
    assert len(sysm.equations) == 12
    assert len(sysm.unknowns) == 12


def test_system_k0_nodes():
    sysm = build_system(basis_context(4), FormSpec(2, 0), HALF)
    assert not any(u.startswith("U") or u.startswith("lambda(a") for u in sysm.unknowns)
    assert {"lambda(0)", "lambda(s)", "lambda(1)"} <= set(sysm.unknowns)


def test_phi1_constant_coefficient(trace43):
    # const, U0, U1, U2
    form = trace43.system.phi_forms[0][0]
    assert form == [Fraction(23, 1442994), Fraction(-287, 1290), Fraction(49, 12126), Fraction(-29, 141470)]


def test_phi2_constant_coefficient(trace43):
    form = trace43.system.phi_forms[1][0]
    assert form == [Fraction(1, 642678), Fraction(-49, 12126), Fraction(29, 141470), Fraction(-23, 1442994)]


def test_eliminant_m43(trace43):
    assert trace43.eliminant == H


def test_lower_relations_m43(trace43):
    assert trace43.U[0] == [Fraction(-5570, 53994227), Fraction(779, 1018759)]
    assert trace43.U[1] == [Fraction(-10605, 1101923), Fraction(1930, 20791)]


def test_quartic_relations_m43(trace43):
    assert trace43.q == [Fraction(-179, 100), Fraction(2)]
    assert trace43.r == [Fraction(40170654239, 32176151600), Fraction(-3914589, 1039550), Fraction(3)]


def test_trace_substitution_is_exact(trace43):
    assert all(r == [] for r in trace_residuals(trace43))


def test_trace_residuals_forms_1_2():
    for m, fs in [(9, FormSpec(1, 1)), (24, FormSpec(2, 1)), (30, FormSpec(1, 2)), (40, FormSpec(2, 2))]:
        tr = eliminate_to_univariate(build_system(basis_context(m), fs, HALF))
        assert all(r == [] for r in trace_residuals(tr))
        assert len(tr.eliminant) == 2


def test_roots_of_H():
    roots = solve_univariate_real_roots(H, 256)
    assert len(roots) == 1
    with mpmath.workprec(256):
        assert abs(roots[0].value - D("0.1411134854416294")) < 1e-16
        assert P.horner(H, roots[0].lo) * P.horner(H, roots[0].hi) <= 0


def test_root_examples():
    assert solve_univariate_real_roots([1, 0, 1]) == []
    roots = solve_univariate_real_roots(P.mul([0, 1], [Fraction(-1, 3), 1]))
    assert [r.value for r in roots] == [0, Fraction(1, 3)]


def test_back_substitution_m43(cand43):
    with mpmath.workprec(256):
        assert abs(cand43.q - D("-1.5077730291167411")) < 1e-16
        assert abs(cand43.r - D("0.7768145246622512")) < 1e-16
        for a, ref in zip(cand43.zeros, ["0.0380726602850886", "0.1725867591939439", "0.3314781569445825"]):
            assert abs(a - D(ref)) < 1e-16


def test_basis_coefficients_m43(cand43):
    b = cand43.polynomial.basis
    assert b[9] == Fraction(439025664, 6248961695)
    with mpmath.workprec(256):
        scale = max(abs(mpf_of(x)) for x in b[:7])
        assert abs(mpf_of(b[7])) < mpmath.mpf(2) ** -200 * scale
        assert abs(mpf_of(b[8])) < mpmath.mpf(2) ** -200 * scale
        printed = ["0.0000000017639878907626135", "0.0000008242017491816358353", "0.0000488080874818309645154",
                   "0.0009446460463425510583249", "0.0078138941286457485943531", "0.0292289140950023331221331",
                   "0.0417636211579982720349265"]
        for k, ref in enumerate(printed):
            assert abs(b[k] - D(ref)) < D(10) ** -25


def test_zero_residuals_m43(cand43):
    poly = cand43.polynomial
    with mpmath.workprec(256):
        f1 = abs(poly(D(1)))
        eps = mpmath.ldexp(1, -128)
        assert abs(poly(D(1) / 2)) < eps * f1
        for a in cand43.zeros:
            assert abs(poly(a)) < eps * f1


def test_expansion_consistent_with_monomials(cand43):
    with mpmath.workprec(256):
        again = expand_in_basis(basis_context(43), EvenPolynomial(list(cand43.polynomial.coeffs)))
        for x, y in zip(again, cand43.polynomial.basis):
            assert abs(x - y) < mpmath.ldexp(1, -200)


def test_exact_forms_give_exact_candidates():
    with mpmath.workprec(256):
        c = select_solution(candidates_for(basis_context(9), FormSpec(1, 1), HALF, 256))
    assert c.exact
    assert all(isinstance(x, Fraction) for x in c.polynomial.coeffs)


def _synthetic(**kw):
    base = dict(formspec=FormSpec(3, 1), s=HALF, xi=None, U=[], zeros=[], q=Fraction(0), r=Fraction(1),
                polynomial=EvenPolynomial([Fraction(1)]))
    base.update(kw)
    return ExtremalCandidate(**base)


def test_select_filters_c1():
    bad = _synthetic(feasible=False, reasons=["squared zeros outside (0, s^2)"])
    with pytest.raises(WrongStructure):
        select_solution([bad])


def test_select_filters_c2_negative_r():
    m = 43
    trace = eliminate_to_univariate(build_system(basis_context(m), FormSpec(3, 3), HALF))
    trace.r = [Fraction(-1)]
    with mpmath.workprec(256):
        root = solve_univariate_real_roots(trace.eliminant, 512)[0].value
        cand = back_substitute(trace, root, basis_context(m), FormSpec(3, 3))
    assert not cand.feasible
    assert any("c2" in r for r in cand.reasons)
    with pytest.raises(WrongStructure):
        select_solution([cand])


def test_select_ambiguity_is_reported():
    a, b = _synthetic(), _synthetic()
    with pytest.raises(AmbiguousSolution) as exc:
        select_solution([a, b])
    assert len(exc.value.candidates) == 2


def test_select_single_survivor_m43(cand43):
    assert cand43.feasible
    assert len(cand43.zeros) == 3
