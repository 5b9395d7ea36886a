"""Exact rational linear algebra and a small simplex solver.

Scalars are :class:`fractions.Fraction` (always normalized, denominator > 0).
Vectors are lists of Fractions, matrices are lists of rows.  Nothing in this
module touches floating point.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence

Rational = Fraction

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"


def to_fraction(x) -> Fraction:
    if isinstance(x, float):
        raise TypeError("floating point values are not accepted")
    return x if isinstance(x, Fraction) else Fraction(x)


def rat_vector(v: Sequence) -> list[Fraction]:
    return [to_fraction(x) for x in v]


def rat_matrix(A: Sequence[Sequence]) -> list[list[Fraction]]:
    rows = [rat_vector(r) for r in A]
    if rows and any(len(r) != len(rows[0]) for r in rows):
        raise ValueError("ragged matrix")
    return rows


def shape(A: Sequence[Sequence]) -> tuple[int, int]:
    return len(A), (len(A[0]) if A else 0)


def mat_vec(A: Sequence[Sequence], x: Sequence) -> list:
    if A and len(A[0]) != len(x):
        raise ValueError(f"dimension mismatch: {shape(A)} times vector of length {len(x)}")
    return [sum((a * xi for a, xi in zip(row, x)), 0) for row in A]


def dot(u: Sequence, v: Sequence):
    if len(u) != len(v):
        raise ValueError("dimension mismatch")
    return sum((a * b for a, b in zip(u, v)), 0)


def norm_inf(v: Sequence):
    return max((abs(x) for x in v), default=0)


def transpose(A: Sequence[Sequence], ncols: Optional[int] = None) -> list[list]:
    if not A:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*A)]


@dataclass(frozen=True)
class LpResult:
    status: str
    vertex: Optional[tuple[Fraction, ...]] = None
    value: Optional[Fraction] = None


class _Tableau:
    """Dense tableau for min c.x s.t. Ax = b, x >= 0, with b >= 0."""

    def __init__(self, A, b, basis):
        self.rows = [list(r) + [bi] for r, bi in zip(A, b)]
        self.basis = list(basis)

    def pivot(self, r, j):
        row = self.rows[r]
        p = row[j]
        if p != 1:
            row = [x / p for x in row]
            self.rows[r] = row
        for k, other in enumerate(self.rows):
            if k != r and other[j] != 0:
                f = other[j]
                self.rows[k] = [a - f * b for a, b in zip(other, row)]
        self.basis[r] = j

    def reduced_costs(self, cost, allowed):
        ncols = len(cost)
        red = list(cost)
        for r, j in enumerate(self.basis):
            cb = cost[j]
            if cb:
                row = self.rows[r]
                for k in range(ncols):
                    red[k] -= cb * row[k]
        return [red[k] if allowed[k] else Fraction(0) for k in range(ncols)]

    def run(self, cost, allowed):
        """Bland's rule: lowest-index entering column, lowest-index leaving basic."""
        while True:
            red = self.reduced_costs(cost, allowed)
            entering = next((k for k, rc in enumerate(red) if rc < 0), None)
            if entering is None:
                return OPTIMAL
            best = None
            for r, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    ratio = row[-1] / a
                    key = (ratio, self.basis[r])
                    if best is None or key < best[0]:
                        best = (key, r)
            if best is None:
                return UNBOUNDED
            self.pivot(best[1], entering)

    def solution(self, n):
        x = [Fraction(0)] * n
        for r, j in enumerate(self.basis):
            if j < n:
                x[j] = self.rows[r][-1]
        return x


def simplex_solve(A, b, c, sense: str = "min") -> LpResult:
    """Solve min/max c.x over {x >= 0 : Ax = b} exactly (two-phase, Bland's rule)."""
    if sense not in ("min", "max"):
        raise ValueError(f"unknown sense {sense!r}")
    A = rat_matrix(A)
    b = rat_vector(b)
    c = rat_vector(c)
    m = len(A)
    n = len(A[0]) if A else len(c)
    if len(b) != m or len(c) != n:
        raise ValueError(f"dimension mismatch: A is {m}x{n}, b has {len(b)}, c has {len(c)}")
    if m == 0:
        if any((ci < 0) if sense == "min" else (ci > 0) for ci in c):
            return LpResult(UNBOUNDED)
        return LpResult(OPTIMAL, tuple([Fraction(0)] * n), Fraction(0))

    rows, rhs = [], []
    for row, bi in zip(A, b):
        if bi < 0:
            row, bi = [-x for x in row], -bi
        rows.append(row)
        rhs.append(bi)
    # phase 1: artificial columns n..n+m-1
    ext = [row + [Fraction(int(i == k)) for k in range(m)] for i, row in enumerate(rows)]
    tab = _Tableau(ext, rhs, range(n, n + m))
    phase1_cost = [Fraction(0)] * n + [Fraction(1)] * m
    tab.run(phase1_cost, [True] * (n + m))
    if any(tab.rows[r][-1] != 0 for r, j in enumerate(tab.basis) if j >= n):
        return LpResult(INFEASIBLE)
    # drive zero-level artificials out of the basis; drop redundant rows
    r = 0
    while r < len(tab.rows):
        if tab.basis[r] >= n:
            j = next((k for k in range(n) if tab.rows[r][k] != 0), None)
            if j is None:
                del tab.rows[r]
                del tab.basis[r]
                continue
            tab.pivot(r, j)
        r += 1
    sign = 1 if sense == "min" else -1
    cost = [sign * ci for ci in c] + [Fraction(0)] * m
    allowed = [True] * n + [False] * m
    if tab.run(cost, allowed) == UNBOUNDED:
        return LpResult(UNBOUNDED)
    x = tab.solution(n)
    return LpResult(OPTIMAL, tuple(x), dot(c, x))


def solve_square(B, b) -> Optional[list[Fraction]]:
    """Exact solution of Bx = b for square B, or None if B is singular."""
    B = rat_matrix(B)
    b = rat_vector(b)
    d = len(B)
    if any(len(row) != d for row in B) or len(b) != d:
        raise ValueError("solve_square needs a square system")
    M = [row[:] + [bi] for row, bi in zip(B, b)]
    for col in range(d):
        piv = next((r for r in range(col, d) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [x / p for x in M[col]]
        for r in range(d):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * q for a, q in zip(M[r], M[col])]
    return [M[r][d] for r in range(d)]


def inverse(B) -> Optional[list[list[Fraction]]]:
    """Exact inverse of a square matrix, or None if singular."""
    d = len(B)
    cols = []
    for k in range(d):
        e = [int(i == k) for i in range(d)]
        x = solve_square(B, e)
        if x is None:
            return None
        cols.append(x)
    return transpose(cols)


def determinant(B) -> int | Fraction:
    """Bareiss fraction-free elimination; returns an int for integer input."""
    M = [list(r) for r in B]
    d = len(M)
    if any(len(r) != d for r in M):
        raise ValueError("determinant needs a square matrix")
    if d == 0:
        return 1
    sign, prev = 1, 1
    for k in range(d - 1):
        if M[k][k] == 0:
            swap = next((r for r in range(k + 1, d) if M[r][k] != 0), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, d):
            for j in range(k + 1, d):
                num = M[i][j] * M[k][k] - M[i][k] * M[k][j]
                M[i][j] = num // prev if isinstance(num, int) else num / prev
        prev = M[k][k]
    return sign * M[d - 1][d - 1]


def rank(A) -> int:
    M = rat_matrix(A)
    if not M:
        return 0
    rows, cols = len(M), len(M[0])
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        for i in range(r + 1, rows):
            if M[i][c] != 0:
                f = M[i][c] / M[r][c]
                M[i] = [a - f * q for a, q in zip(M[i], M[r])]
        r += 1
        if r == rows:
            break
    return r


def integer_kernel_basis(A: Sequence[Sequence[int]], ncols: Optional[int] = None) -> list[list[int]]:
    """Lattice basis of ker^Z(A).

    Unimodular row reduction of [A^T | I]; the identity part of every row whose
    A^T part vanishes is a kernel vector, and together they span the lattice.
    """
    n = len(A[0]) if A else ncols
    if n is None:
        raise ValueError("ncols required for a matrix without rows")
    m = len(A)
    rows = [[A[i][j] for i in range(m)] + [int(j == k) for k in range(n)] for j in range(n)]
    r = 0
    for col in range(m):
        while True:
            nz = [i for i in range(r, n) if rows[i][col] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(rows[i][col]))
            rows[r], rows[piv] = rows[piv], rows[r]
            done = True
            for i in range(r + 1, n):
                if rows[i][col] != 0:
                    q = rows[i][col] // rows[r][col]
                    rows[i] = [a - q * b for a, b in zip(rows[i], rows[r])]
                    if rows[i][col] != 0:
                        done = False
            if done:
                r += 1
                break
        if r == n:
            break
    basis = []
    for row in rows[r:]:
        v = row[m:]
        g = 0
        for x in v:
            g = gcd(g, x)
        basis.append([x // g for x in v] if g > 1 else v)
    return basis


def cone_member(C: Sequence[Sequence[int]], b: Sequence) -> tuple[bool, Optional[list[Fraction]]]:
    """Decide b in cone(C); on success also return lambda >= 0 with sum lambda_i c_i = b."""
    b = rat_vector(b)
    if not C:
        return (True, []) if all(x == 0 for x in b) else (False, None)
    d = len(b)
    if any(len(c) != d for c in C):
        raise ValueError("cone generators and target differ in dimension")
    res = simplex_solve(transpose(C), b, [0] * len(C))
    if res.status != OPTIMAL:
        return False, None
    return True, list(res.vertex)
