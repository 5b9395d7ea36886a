"""Box-bounded integer programs: enumeration oracle, Graver-best augmentation,
and the Graver-norm / proximity experiments."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .exact import OPTIMAL, simplex_solve
from .graver import DEFAULT_BUDGET, BudgetExceeded, GraverBasis, graver_basis, graver_complexity, kernel_norm_bound
from .structure import MultistageMatrix, Program, build_tree

INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"
BUDGET_EXCEEDED = "BudgetExceeded"

DEFAULT_BOX_BUDGET = 2_000_000
DEFAULT_STEP_BUDGET = 100_000


@dataclass(frozen=True)
class SolveReport:
    status: str
    x: Optional[tuple[int, ...]] = None
    objective: Optional[int] = None
    steps: tuple[tuple[tuple[int, ...], int], ...] = ()
    max_step_norm: int = 0


@dataclass(frozen=True)
class ProximityReport:
    status: str
    x_frac: Optional[tuple[Fraction, ...]]
    x_int: Optional[tuple[int, ...]]
    dist_inf: Optional[Fraction]
    column_bound: int
    params: tuple[int, int, int]  # (d, delta, t)

    @property
    def within_bound(self) -> Optional[bool]:
        return None if self.dist_inf is None else self.dist_inf <= self.column_bound


@dataclass(frozen=True)
class GraverNormReport:
    g_inf: int
    column_bound: int
    d: int
    delta: int
    t: int
    n: int
    ncols: int
    basis_size: int

    @property
    def asymptotic_bound(self) -> str:
        # the double-exponential bound has an unspecified O-constant; printed, never evaluated
        return f"2^(({self.d}*{self.delta})^O({self.d}^{3 * self.t + 1}))"


def effective_box(P: Program, box=None) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Intersect the program bounds with an optional box ``(lo, hi)`` (scalars or vectors)."""
    N = P.ncols
    lo, hi = list(P.lower), list(P.upper)
    if box is not None:
        blo, bhi = box
        blo = [blo] * N if isinstance(blo, int) else list(blo)
        bhi = [bhi] * N if isinstance(bhi, int) else list(bhi)
        if len(blo) != N or len(bhi) != N:
            raise ValueError("box dimension does not match the program")
        lo = [b if a is None else max(a, b) for a, b in zip(lo, blo)]
        hi = [b if a is None else min(a, b) for a, b in zip(hi, bhi)]
    if any(v is None for v in lo + hi):
        raise ValueError("a finite box is required: give explicit bounds for every variable")
    return tuple(lo), tuple(hi)


def _residual(P: Program, x) -> list[int]:
    return [sum(a * v for a, v in zip(row, x)) - bi for row, bi in zip(P.A.entries, P.b)]


def _enumerate(P: Program, box, budget):
    lo, hi = effective_box(P, box)
    if any(l > h for l, h in zip(lo, hi)):
        return lo, hi, iter(())
    volume = math.prod(h - l + 1 for l, h in zip(lo, hi))
    if volume > budget:
        raise BudgetExceeded(f"box volume {volume} exceeds budget {budget}")
    rows = P.A.entries
    b = P.b
    pts = itertools.product(*(range(l, h + 1) for l, h in zip(lo, hi)))
    feasible = (x for x in pts if all(sum(a * v for a, v in zip(row, x)) == bi for row, bi in zip(rows, b)))
    return lo, hi, feasible


def brute_force_ilp(P: Program, box=None, budget: int = DEFAULT_BOX_BUDGET) -> SolveReport:
    """Optimum by lexicographic enumeration of the box (first minimizer wins ties)."""
    try:
        _, _, feasible = _enumerate(P, box, budget)
    except BudgetExceeded:
        return SolveReport(BUDGET_EXCEEDED)
    best = None
    for x in feasible:
        val = sum(ci * xi for ci, xi in zip(P.c, x))
        if best is None or val < best[0]:
            best = (val, x)
    if best is None:
        return SolveReport(INFEASIBLE)
    return SolveReport(OPTIMAL, tuple(best[1]), best[0])


def all_optima(P: Program, box=None, budget: int = DEFAULT_BOX_BUDGET) -> tuple[Optional[int], list[tuple[int, ...]]]:
    _, _, feasible = _enumerate(P, box, budget)
    best, pts = None, []
    for x in feasible:
        val = sum(ci * xi for ci, xi in zip(P.c, x))
        if best is None or val < best:
            best, pts = val, [x]
        elif val == best:
            pts.append(x)
    return best, pts


def find_feasible(P: Program, box=None, budget: int = DEFAULT_BOX_BUDGET) -> Optional[tuple[int, ...]]:
    _, _, feasible = _enumerate(P, box, budget)
    return next(feasible, None)


def _max_step(x, g, lo, hi) -> int:
    lam = None
    for xi, gi, l, h in zip(x, g, lo, hi):
        if gi > 0:
            room = (h - xi) // gi
        elif gi < 0:
            room = (xi - l) // (-gi)
        else:
            continue
        lam = room if lam is None else min(lam, room)
    return 0 if lam is None else lam


def solve_augmentation(P: Program, box=None, start: Optional[Sequence[int]] = None,
                       basis: Optional[GraverBasis] = None,
                       graver_budget: int = DEFAULT_BUDGET,
                       box_budget: int = DEFAULT_BOX_BUDGET,
                       step_budget: int = DEFAULT_STEP_BUDGET) -> SolveReport:
    """Graver-best augmentation from a feasible start.

    Each step takes the Graver element g and integer λ >= 1 with x + λg in the
    box that lowers c.x the most; ties prefer smaller λ, then the
    lexicographically smaller g.
    """
    lo, hi = effective_box(P, box)
    try:
        if start is None:
            start = find_feasible(P, box, budget=box_budget)
            if start is None:
                return SolveReport(INFEASIBLE)
        G = basis if basis is not None else graver_basis(P.A.rows_list(), ncols=P.ncols, budget=graver_budget)
    except BudgetExceeded:
        return SolveReport(BUDGET_EXCEEDED)
    x = list(start)
    if any(_residual(P, x)) or any(not l <= v <= h for v, l, h in zip(x, lo, hi)):
        raise ValueError("start point is not feasible")
    moves = [(g, sum(ci * gi for ci, gi in zip(P.c, g))) for g in G.elements]
    moves = [(g, cg) for g, cg in moves if cg < 0]
    steps = []
    max_norm = 0
    while True:
        best = None
        for g, cg in moves:
            lam = _max_step(x, g, lo, hi)
            if lam < 1:
                continue
            key = (lam * cg, lam, g)
            if best is None or key < best:
                best = key
        if best is None:
            break
        if len(steps) >= step_budget:
            return SolveReport(BUDGET_EXCEEDED)
        _, lam, g = best
        x = [xi + lam * gi for xi, gi in zip(x, g)]
        steps.append((g, lam))
        max_norm = max(max_norm, lam * max(abs(v) for v in g))
    obj = sum(ci * xi for ci, xi in zip(P.c, x))
    return SolveReport(OPTIMAL, tuple(x), obj, tuple(steps), max_norm)


def lp_relaxation(P: Program, lo, hi):
    """min c.x over Ax = b, lo <= x <= hi, as a standard-form LP in the shifted variables."""
    N = P.ncols
    # x = lo + z, z + s = hi - lo
    rows = [list(r) + [0] * N for r in P.A.entries]
    rhs = [bi - sum(a * l for a, l in zip(r, lo)) for r, bi in zip(P.A.entries, P.b)]
    for j in range(N):
        rows.append([int(k == j) for k in range(N)] + [int(k == j) for k in range(N)])
        rhs.append(hi[j] - lo[j])
    cost = list(P.c) + [0] * N
    res = simplex_solve(rows, rhs, cost)
    if res.status != OPTIMAL:
        return res.status, None
    x = tuple(Fraction(l) + z for l, z in zip(lo, res.vertex[:N]))
    return OPTIMAL, x


def _params(A: MultistageMatrix) -> tuple[int, int, int]:
    _, dims = build_tree(A)
    return dims.width, A.delta, dims.t


def proximity_experiment(P: Program, box=None, budget: int = DEFAULT_BOX_BUDGET) -> ProximityReport:
    """Distance from the simplex LP vertex to the nearest optimal integer point in the box."""
    N = P.ncols
    delta = P.A.delta
    bound = (N * delta) ** (N + 1)
    params = _params(P.A)
    lo, hi = effective_box(P, box)
    status, x_frac = lp_relaxation(P, lo, hi)
    if status != OPTIMAL:
        return ProximityReport(status, None, None, None, bound, params)
    try:
        _, optima = all_optima(P, box, budget)
    except BudgetExceeded:
        return ProximityReport(BUDGET_EXCEEDED, x_frac, None, None, bound, params)
    if not optima:
        return ProximityReport(INFEASIBLE, x_frac, None, None, bound, params)

    def dist(z):
        return max(abs(Fraction(zi) - fi) for zi, fi in zip(z, x_frac))

    x_int = min(optima, key=lambda z: (dist(z), z))
    return ProximityReport(OPTIMAL, x_frac, tuple(x_int), dist(x_int), bound, params)


def graver_norm_experiment(A: MultistageMatrix, budget: int = DEFAULT_BUDGET,
                           basis: Optional[GraverBasis] = None) -> GraverNormReport:
    tree, dims = build_tree(A)
    G = basis if basis is not None else graver_basis(A.rows_list(), ncols=A.ncols, budget=budget)
    return GraverNormReport(graver_complexity(G), kernel_norm_bound(A.ncols, A.delta),
                            dims.width, A.delta, dims.t, dims.n, A.ncols, len(G))
