"""Discretized Delsarte LP and a structure detector built on its optimum.

The primal problem is

    minimize    sum_k x_{2k}
    subject to  1 + sum_k x_{2k} R_{2k}(t_i) <= 0   for every grid point t_i,
                x >= 0,

so that w_estimate = 2 + 2 * optimum.  Only finitely many points of [0, s] are
constrained, hence the estimate never exceeds the true constant.

With only a handful of variables but thousands of rows, the dual

    maximize  sum_i y_i   subject to   -sum_i y_i R_{2k}(t_i) <= 1,  y >= 0

is much smaller for a revised simplex: the basis has one row per variable,
the slack basis is feasible, and the primal x is read off the duals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from delsarte.errors import DomainError, InvalidArgument, LpStructureError
from delsarte.gegenbauer import BasisContext, basis_context, eval_R_upto
from delsarte.numeric import mpf_of

DEFAULT_GRID = 2001
DEFAULT_LP_BITS = 160


@dataclass
class LpInstance:
    m: int
    s: Fraction
    degree_cap: int
    grid: list  # ascending mpf points in [0, s]
    A: np.ndarray  # rows: grid points, columns: R_2, R_4, ..., R_cap at that point
    precision: int = DEFAULT_LP_BITS

    @property
    def n_vars(self) -> int:
        return self.degree_cap // 2

    @property
    def n_rows(self) -> int:
        return len(self.grid)


@dataclass
class LpResult:
    u_estimate: object
    w_estimate: object
    optimal_x: list  # x_2, x_4, ..., x_cap
    active: list[int] = field(default_factory=list)  # grid indices with y_i > 0
    iterations: int = 0
    backend: str = "simplex"


@dataclass
class StructureGuess:
    form: int
    K: int
    notes: list[str] = field(default_factory=list)

    @property
    def degree(self) -> int:
        return 4 * self.K + 2 * self.form


def chebyshev_grid(s, n: int) -> list:
    """Chebyshev-Lobatto points on [0, s], endpoints included exactly."""
    s = mpf_of(s)
    pts = [s * (1 - mpmath.cos(mpmath.pi * i / (n - 1))) / 2 for i in range(n)]
    pts[0], pts[-1] = mpmath.mpf(0), s
    return pts


def build_lp(spec, degree_cap: int, grid_size: int = DEFAULT_GRID, precision: int = DEFAULT_LP_BITS,
             ctx: BasisContext | None = None) -> LpInstance:
    """``spec`` is a mapping with keys ``m`` and ``s`` (or an (m, s) pair)."""
    m, s = (spec["m"], spec.get("s", Fraction(1, 2))) if isinstance(spec, dict) else spec
    s = Fraction(s)
    if not 0 <= s < 1:
        raise DomainError("s must lie in [0, 1)")
    if degree_cap < 0 or degree_cap % 2:
        raise InvalidArgument("degree cap must be a nonnegative even integer")
    if grid_size < 2:
        raise InvalidArgument("grid needs at least the two endpoints")
    ctx = ctx or basis_context(m)
    with mpmath.workprec(precision):
        grid = chebyshev_grid(s, grid_size)
        n = degree_cap // 2
        A = np.empty((grid_size, n), dtype=object)
        for i, t in enumerate(grid):
            vals = eval_R_upto(ctx, degree_cap, t)
            A[i, :] = vals[2::2]
    return LpInstance(m, s, degree_cap, grid, A, precision)


def _simplex_dual(lp: LpInstance, max_iter: int = 10000) -> LpResult:
    """Revised simplex on the dual with an explicit basis inverse."""
    nk, N = lp.n_vars, lp.n_rows
    if nk == 0:
        raise LpStructureError(f"degree cap {lp.degree_cap} leaves no variables: 1 <= 0 is infeasible")
    one, zero = mpmath.mpf(1), mpmath.mpf(0)
    tol = mpmath.ldexp(one, -(lp.precision * 3 // 4))
    cols = -lp.A  # column i of the dual constraint matrix is cols[i, :]
    # basis: entry j < N is y_j, entry N + k is the slack of row k
    basis = [N + k for k in range(nk)]
    Binv = np.array([[one if i == j else zero for j in range(nk)] for i in range(nk)], dtype=object)
    xB = np.array([one] * nk, dtype=object)
    cB = np.array([zero] * nk, dtype=object)
    stall = 0
    for it in range(max_iter):
        pi = cB.dot(Binv)
        # reduced costs of the y columns (cost 1) and of the slacks (cost 0)
        d = 1 - cols.dot(pi)
        d_slack = -pi
        in_basis = set(basis)
        bland = stall > 2 * nk
        enter, best = None, tol
        for j in range(N):
            if j not in in_basis and d[j] > best:
                enter, best = j, d[j]
                if bland:
                    break
        if enter is None or not bland:
            for k in range(nk):
                if N + k not in in_basis and d_slack[k] > best:
                    enter, best = N + k, d_slack[k]
                    if bland:
                        break
        if enter is None:
            x = [max(p, zero) for p in pi]
            u = sum(xB[i] for i in range(nk) if basis[i] < N)
            active = sorted(b for b in basis if b < N)
            return LpResult(u, 2 + 2 * u, x, active, it)
        a = cols[enter, :] if enter < N else np.array([one if k == enter - N else zero for k in range(nk)], dtype=object)
        dirn = Binv.dot(a)
        leave, ratio = None, None
        for i in range(nk):
            if dirn[i] > tol:
                r = xB[i] / dirn[i]
                if ratio is None or r < ratio - tol or (abs(r - ratio) <= tol and basis[i] < basis[leave]):
                    leave, ratio = i, r
        if leave is None:
            raise LpStructureError(
                f"LP infeasible for degree cap {lp.degree_cap} on a {lp.n_rows}-point grid (dual unbounded)")
        stall = stall + 1 if ratio <= tol else 0
        piv = dirn[leave]
        Binv[leave, :] = Binv[leave, :] / piv
        xB[leave] = xB[leave] / piv
        for i in range(nk):
            if i != leave and dirn[i] != 0:
                f = dirn[i]
                Binv[i, :] = Binv[i, :] - f * Binv[leave, :]
                xB[i] = xB[i] - f * xB[leave]
        basis[leave] = enter
        cB[leave] = one if enter < N else zero
    raise LpStructureError(f"simplex did not converge in {max_iter} iterations")


def _solve_highs(lp: LpInstance) -> LpResult:
    from scipy.optimize import linprog

    A = np.array([[float(v) for v in row] for row in lp.A])
    n = lp.n_vars
    if n == 0:
        raise LpStructureError(f"degree cap {lp.degree_cap} leaves no variables: 1 <= 0 is infeasible")
    res = linprog(np.ones(n), A_ub=A, b_ub=-np.ones(lp.n_rows), bounds=[(0, None)] * n, method="highs")
    if res.status != 0:
        raise LpStructureError(f"LP failed for degree cap {lp.degree_cap}: {res.message}")
    x = [mpmath.mpf(float(v)) for v in res.x]
    u = sum(x)
    active = [i for i, v in enumerate(res.ineqlin.marginals) if v < 0]
    return LpResult(u, 2 + 2 * u, x, active, int(res.nit), "highs")


BACKENDS = {"simplex": _simplex_dual, "highs": _solve_highs}


def solve_lp(lp: LpInstance, backend: str = "simplex") -> LpResult:
    try:
        solver = BACKENDS[backend]
    except KeyError:
        raise InvalidArgument(f"unknown LP backend {backend!r}") from None
    with mpmath.workprec(lp.precision):
        res = solver(lp)
        if any(x < 0 for x in res.optimal_x):
            raise LpStructureError("solver returned negative coefficients")
    return res


def lp_polynomial_values(lp: LpInstance, res: LpResult) -> list:
    """p(t_i) = 1 + sum_k x_{2k} R_{2k}(t_i) on the grid."""
    with mpmath.workprec(lp.precision):
        x = np.array(res.optimal_x, dtype=object)
        return list(1 + lp.A.dot(x)) if lp.n_vars else [mpmath.mpf(1)] * lp.n_rows


def guess_structure(lp_result: LpResult, lp: LpInstance, rel_tol=1e-6, merge=1e-4) -> list[StructureGuess]:
    """Ranked structure guesses from the LP optimum.

    Touch points are grid maxima of p with |p| below ``rel_tol * max|p|``.
    Adjacent grid points (or points closer than ``merge``) count once, since
    a double zero of the continuous optimum shows up as one or two tight
    neighbouring rows.
    """
    with mpmath.workprec(lp.precision):
        p = lp_polynomial_values(lp, lp_result)
        scale = max(abs(v) for v in p)
        thr = mpmath.mpf(rel_tol) * scale
        n = len(p)
        # tight rows of the optimum, plus near-zero grid maxima for backends
        # that do not report an active set
        touch = set(i for i in lp_result.active if i < n - 1)
        touch |= {i for i in range(n - 1)
                  if abs(p[i]) < thr and (i == 0 or p[i] >= p[i - 1]) and p[i] >= p[i + 1]}
        touch = sorted(touch)
        clusters: list[list[int]] = []
        for i in touch:
            if clusters and (i - clusters[-1][-1] <= 1 or lp.grid[i] - lp.grid[clusters[-1][-1]] < merge):
                clusters[-1].append(i)
            else:
                clusters.append([i])
        at_zero = bool(clusters) and clusters[0][0] == 0
        interior = [c for c in clusters if c[0] != 0]
        K = len(interior)
        x = lp_result.optimal_x
        xscale = max((abs(v) for v in x), default=mpmath.mpf(0))
        nz = [k for k, v in enumerate(x) if abs(v) > mpmath.mpf(rel_tol) * xscale]
        top = 2 * (nz[-1] + 1) if nz else 0
        below_zero = len(nz) > 0 and all(
            abs(x[k]) <= mpmath.mpf(rel_tol) * xscale for k in (nz[-1] - 1, nz[-1] - 2) if k >= 0)
    notes = [f"{K} interior touch point(s)", "touches t=0" if at_zero else "no touch at t=0",
             f"top nonzero coefficient R_{top}"]
    by_rule = (4 if at_zero else 3) if below_zero else (2 if at_zero else 1)
    guesses = []
    seen = set()

    def add(form, k, why):
        if (form, k) in seen or k < 0 or (form in (3, 4) and k < 1):
            return
        seen.add((form, k))
        guesses.append(StructureGuess(form, k, notes + [why]))

    by_degree = (top - 4 * K) // 2
    if by_rule == by_degree or top == 0:
        add(by_rule, K, "touch points, zero coefficients and degree agree")
    else:
        if 1 <= by_degree <= 4:
            add(by_degree, K, "form from degree 4K + 2*form")
        add(by_rule, K, "form from touch point at 0 and vanishing top coefficients")
    # neighbouring structures as fallbacks
    for form in (1, 2, 3, 4):
        add(form, K, "fallback: same K")
    for form in (1, 2, 3, 4):
        k = (top - 2 * form) // 4
        if (top - 2 * form) % 4 == 0:
            add(form, k, "fallback: matches the top degree")
    return guesses
