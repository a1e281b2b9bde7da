import random
import threading
from fractions import Fraction

import mpmath
import pytest

from delsarte.errors import DomainError, InvalidArgument, InvalidDimension
from delsarte.gegenbauer import (
    EvenPolynomial,
    basis_context,
    eval_R,
    eval_R_upto,
    expand_in_basis,
    gegenbauer_coeffs,
    legendre_tail_bound,
    min_tail_index,
    normalized_moment,
    project_f0,
    tail_bound,
    tail_margin,
)
from delsarte.polyalg import horner, mul


def inner(ctx, a, b):
    """Normalized integral of a*b against (1-t^2)^alpha via exact moments."""
    prod = mul(a, b)
    return sum(c * ctx.moment(i // 2) for i, c in enumerate(prod) if i % 2 == 0)


@pytest.mark.parametrize("m,alpha", [(43, 20), (3, 0), (4, Fraction(1, 2))])
def test_alpha(m, alpha):
    assert basis_context(m).alpha == alpha


def test_dimension_must_be_at_least_two():
    with pytest.raises(InvalidDimension):
        basis_context(1)


def test_low_coefficients():
    ctx = basis_context(43)
    assert gegenbauer_coeffs(ctx, 0) == [1]
    assert gegenbauer_coeffs(ctx, 1) == [0, 1]
    assert gegenbauer_coeffs(ctx, 2) == [Fraction(-1, 42), 0, Fraction(43, 42)]


def test_eval_examples():
    ctx = basis_context(43)
    assert eval_R(ctx, 18, Fraction(1)) == 1
    assert eval_R(ctx, 2, Fraction(1, 2)) == Fraction(13, 56)
    for m in (3, 7, 43):
        assert eval_R(basis_context(m), 2, Fraction(0)) == Fraction(-1, m - 1)


def test_eval_matches_monomials_exactly():
    ctx = basis_context(11)
    t = Fraction(3, 7)
    for n in range(15):
        assert eval_R(ctx, n, t) == horner(ctx.coeffs(n), t)
    assert eval_R_upto(ctx, 14, t) == [eval_R(ctx, n, t) for n in range(15)]


def test_moments():
    ctx = basis_context(4)
    assert normalized_moment(ctx, 0) == 1
    assert normalized_moment(ctx, 2) == Fraction(1, 4)
    assert normalized_moment(ctx, 4) == Fraction(1, 8)
    with pytest.raises(InvalidArgument):
        normalized_moment(ctx, 3)


def test_moments_match_numerical_integral():
    ctx = basis_context(6)
    a = float(ctx.alpha)
    norm = mpmath.quad(lambda t: (1 - t * t) ** a, [-1, 1])
    for k in (2, 4, 6):
        val = mpmath.quad(lambda t: t**k * (1 - t * t) ** a, [-1, 1]) / norm
        assert abs(val - float(normalized_moment(ctx, k))) < 1e-12


def test_expand_examples():
    m = 9
    ctx = basis_context(m)
    assert expand_in_basis(ctx, EvenPolynomial([Fraction(1)])) == [1]
    assert expand_in_basis(ctx, EvenPolynomial([Fraction(0), Fraction(1)])) == [Fraction(1, m), Fraction(m - 1, m)]
    assert Fraction(1, m) == normalized_moment(ctx, 2)


def test_project_f0_examples():
    ctx = basis_context(4)
    # (t^2 - 1/4) t^2
    p = EvenPolynomial([Fraction(0), Fraction(-1, 4), Fraction(1)])
    assert project_f0(ctx, p) == Fraction(1, 16)
    assert project_f0(ctx, EvenPolynomial([Fraction(1)])) == 1
    for k in range(1, 6):
        rk = EvenPolynomial.from_monomials(ctx.coeffs(2 * k))
        assert project_f0(ctx, rk) == 0


def test_mixed_exact_and_float_coefficients():
    ctx = basis_context(7)
    with mpmath.workprec(128):
        p = EvenPolynomial([Fraction(1, 3), mpmath.mpf("0.25"), Fraction(2)])
        exact = EvenPolynomial([Fraction(1, 3), Fraction(1, 4), Fraction(2)])
        assert abs(project_f0(ctx, p) - mpmath.mpf(project_f0(ctx, exact).numerator) / project_f0(ctx, exact).denominator) < 1e-30
        assert abs(p(mpmath.mpf("0.3")) - float(exact(Fraction(3, 10)))) < 1e-15


@pytest.mark.parametrize("m", [3, 4, 43])
def test_normalization_at_one(m):
    ctx = basis_context(m)
    for n in range(41):
        assert eval_R(ctx, n, Fraction(1)) == 1
        assert sum(ctx.coeffs(n)) == 1
        assert ctx.coeffs(n)[n] != 0


@pytest.mark.parametrize("m", [3, 4, 43])
def test_orthogonality(m):
    ctx = basis_context(m)
    for j in range(13):
        for k in range(j):
            assert inner(ctx, ctx.coeffs(j), ctx.coeffs(k)) == 0


def test_round_trip_random_polynomials():
    rng = random.Random(20240601)
    ctx = basis_context(13)
    for _ in range(20):
        deg = rng.randrange(0, 11)
        p = EvenPolynomial([Fraction(rng.randint(-50, 50), rng.randint(1, 30)) for _ in range(deg + 1)])
        basis = expand_in_basis(ctx, p)
        assert basis[0] == project_f0(ctx, p)
        for _ in range(10):
            t = Fraction(rng.randint(-40, 40), rng.randint(1, 40))
            assert sum(c * eval_R(ctx, 2 * k, t) for k, c in enumerate(basis)) == p(t)


def test_tail_bound_example():
    ctx = basis_context(43)
    with mpmath.workprec(200):
        b = tail_bound(ctx, 39, Fraction(1, 2))
        sqrt2 = mpmath.sqrt(2)
        ref = mpmath.factorial(20) * sqrt2 * (2 + sqrt2) ** 39 / (mpmath.mpf(3) / 4) ** (mpmath.mpf(41) / 4) / mpmath.mpf(40) ** (mpmath.mpf(41) / 2)
        assert abs(b / ref - 1) < mpmath.mpf(10) ** -50
        assert b >= abs(eval_R(ctx, 39, mpmath.mpf(1) / 2))
        assert tail_bound(ctx, 40, Fraction(1, 2)) < b


def test_tail_bound_even_dimension_gamma():
    ctx = basis_context(8)
    with mpmath.workprec(100):
        a = tail_bound(ctx, 10, 0) * (11 ** 3)
        assert abs(a - mpmath.gamma(mpmath.mpf(7) / 2) * mpmath.sqrt(2) * (2 + mpmath.sqrt(2)) ** 4) < 1e-20


def test_tail_bound_domain():
    with pytest.raises(DomainError):
        tail_bound(basis_context(3), 5, 0)
    with pytest.raises(DomainError):
        tail_bound(basis_context(43), 38, 0)
    with pytest.raises(DomainError):
        tail_bound(basis_context(43), 40, 1)


def test_tail_bound_dominates_random_points():
    rng = random.Random(7)
    for _ in range(100):
        m = rng.choice([4, 5, 8, 13, 24, 43])
        n = rng.randint(max(3, m - 4), 400)
        t = mpmath.mpf(rng.uniform(-0.999, 0.999))
        ctx = basis_context(m)
        assert tail_bound(ctx, n, t) >= abs(eval_R(ctx, n, t))


def test_legendre_bound_dominates():
    ctx = basis_context(3)
    for n in range(1, 200, 7):
        for t in (0, 0.3, -0.77, 0.95):
            assert legendre_tail_bound(n, t) >= abs(eval_R(ctx, n, mpmath.mpf(t)))


def test_min_tail_index():
    ctx = basis_context(43)
    lam1 = mpmath.mpf("0.00000001175549")
    n0 = min_tail_index(ctx, lam1, Fraction(1, 2))
    assert n0 <= 2000
    # linear scan oracle
    n = 39
    while tail_margin(ctx, n, lam1, Fraction(1, 2)) <= 0:
        n += 1
    assert n == n0
    with mpmath.workprec(400):
        assert min_tail_index(ctx, 1 - mpmath.mpf(10) ** -80, Fraction(1, 2)) == 39


def test_min_tail_index_rejects_m2():
    with pytest.raises(DomainError):
        min_tail_index(basis_context(2), 0.5, 0.5)


def test_concurrent_cache_fill():
    ctx = basis_context(17)
    out = {}

    def work(i):
        out[i] = (ctx.coeffs(30 + i % 3), ctx.monomial_expansion(12), ctx.moment(20))

    threads = [threading.Thread(target=work, args=(i,)) for i in range(8)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    ref = basis_context(17)
    for i, (c, mono, mom) in out.items():
        assert c == ref.coeffs(30 + i % 3)
        assert mono == ref.monomial_expansion(12)
        assert mom == ref.moment(20)
