"""Conformal order, Graver bases and conformal decompositions.

The basis is computed by a completion procedure: start from a symmetric
generating set of ker^Z(A), repeatedly form sums f + g and reduce them to
conformal normal form, and keep every nonzero remainder.  On termination the
set contains every Graver element; the minimal ones are returned.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .exact import integer_kernel_basis, mat_vec

DEFAULT_BUDGET = 2_000_000
_INT64_SAFE = 2 ** 62


class BudgetExceeded(RuntimeError):
    """A certified search would need more work than the configured budget."""


def conformal_leq(x: Sequence[int], y: Sequence[int]) -> bool:
    """x ⊑ y: same sign componentwise and |x_j| <= |y_j|."""
    if len(x) != len(y):
        raise ValueError("dimension mismatch")
    return all(a * b >= 0 and abs(a) <= abs(b) for a, b in zip(x, y))


def kernel_norm_bound(ncols: int, delta: int) -> int:
    """(2 m Δ + 1)^m, the column-count bound on the l_inf Graver complexity."""
    return (2 * ncols * delta + 1) ** ncols


@dataclass(frozen=True)
class GraverBasis:
    matrix: tuple[tuple[int, ...], ...]
    elements: tuple[tuple[int, ...], ...]
    norm_bound: int
    ncols: int

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, g):
        return tuple(g) in self._members

    @property
    def _members(self):
        s = self.__dict__.get("_member_set")
        if s is None:
            s = frozenset(self.elements)
            object.__setattr__(self, "_member_set", s)
        return s


@dataclass(frozen=True)
class ConformalDecomposition:
    target: tuple[int, ...]
    parts: tuple[tuple[int, ...], ...]  # with repetition, in extraction order

    def counts(self) -> dict[tuple[int, ...], int]:
        out: dict[tuple[int, ...], int] = {}
        for p in self.parts:
            out[p] = out.get(p, 0) + 1
        return out


def _matrix_info(A):
    A = tuple(tuple(int(x) for x in row) for row in A)
    if A and len({len(r) for r in A}) != 1:
        raise ValueError("ragged matrix")
    return A


class _Pool:
    """Growable int64 store of candidate vectors with vectorized conformal tests."""

    def __init__(self, m):
        self.vals = np.zeros((64, m), dtype=np.int64)
        self.size = 0
        self.index: dict[tuple[int, ...], int] = {}

    def add(self, v):
        if self.size == len(self.vals):
            self.vals = np.concatenate([self.vals, np.zeros_like(self.vals)])
        self.vals[self.size] = v
        self.index[tuple(int(x) for x in v)] = self.size
        self.size += 1

    def reducer(self, s):
        """Index of some pool vector g != 0 with g ⊑ s, or None."""
        V = self.vals[: self.size]
        ok = np.all((V * np.sign(s) >= 0) & (np.abs(V) <= np.abs(s)), axis=1)
        hits = np.flatnonzero(ok)
        return int(hits[0]) if len(hits) else None

    def normal_form(self, s):
        s = s.copy()
        while s.any():
            k = self.reducer(s)
            if k is None:
                break
            g = self.vals[k]
            nz = g != 0
            s -= int(np.min(np.abs(s[nz]) // np.abs(g[nz]))) * g
        return s


def graver_basis(A: Sequence[Sequence[int]], ncols: Optional[int] = None,
                 budget: int = DEFAULT_BUDGET) -> GraverBasis:
    """Full Graver basis of an integer matrix (elements sorted lexicographically)."""
    A = _matrix_info(A)
    m = len(A[0]) if A else ncols
    if m is None:
        raise ValueError("ncols required for a matrix without rows")
    delta = max((abs(x) for row in A for x in row), default=0)
    bound = kernel_norm_bound(m, delta)
    lattice = integer_kernel_basis([list(r) for r in A], m)
    if not lattice:
        return GraverBasis(A, (), bound, m)
    if max(abs(x) for v in lattice for x in v) * 4 > _INT64_SAFE or bound > _INT64_SAFE:
        raise BudgetExceeded("entries too large for the int64 completion kernel")

    pool = _Pool(m)
    for v in lattice:
        for w in (v, [-x for x in v]):
            if tuple(w) not in pool.index:
                pool.add(w)
    work = 0
    i = 1
    while i < pool.size:
        f = pool.vals[i]
        for j in range(i):
            g = pool.vals[j]
            # sign-compatible pairs reduce to zero immediately
            if not np.any(f * g < 0):
                continue
            work += 1
            if work > budget:
                raise BudgetExceeded(f"completion exceeded {budget} reductions")
            r = pool.normal_form(f + g)
            if r.any():
                if np.abs(r).max() > _INT64_SAFE // 4:
                    raise BudgetExceeded("completion produced entries beyond the int64 range")
                for w in (r, -r):
                    if tuple(int(x) for x in w) not in pool.index:
                        pool.add(w)
        i += 1

    V = pool.vals[: pool.size]
    order = np.argsort(np.abs(V).sum(axis=1), kind="stable")
    minimal: list[np.ndarray] = []
    for k in order:
        v = V[k]
        if not any(np.all((g * v >= 0) & (np.abs(g) <= np.abs(v))) for g in minimal):
            minimal.append(v)
    elems = sorted(tuple(int(x) for x in v) for v in minimal)
    return GraverBasis(A, tuple(elems), bound, m)


def graver_basis_enumerate(A: Sequence[Sequence[int]], ncols: Optional[int] = None,
                           bound: Optional[int] = None, budget: int = DEFAULT_BUDGET) -> GraverBasis:
    """Graver basis by plain enumeration of the box ||x||_inf <= bound.

    The default bound is the certified one, so this is only usable for very
    small matrices; it exists as an independent reference.
    """
    A = _matrix_info(A)
    m = len(A[0]) if A else ncols
    delta = max((abs(x) for row in A for x in row), default=0)
    certified = kernel_norm_bound(m, delta)
    R = certified if bound is None else bound
    if (2 * R + 1) ** m > budget:
        raise BudgetExceeded(f"box of side {2 * R + 1} in dimension {m} exceeds budget {budget}")
    kernel = [x for x in itertools.product(range(-R, R + 1), repeat=m)
              if any(x) and all(v == 0 for v in mat_vec(A, x))]
    kernel.sort(key=lambda x: sum(map(abs, x)))
    minimal: list[tuple[int, ...]] = []
    for x in kernel:
        if not any(conformal_leq(g, x) for g in minimal):
            minimal.append(x)
    return GraverBasis(A, tuple(sorted(minimal)), certified, m)


def graver_complexity(G: GraverBasis, p=float("inf")) -> int:
    """max ||g||_p over the basis, for p in {1, inf}; 0 for an empty basis."""
    if p in (1, "1"):
        return max((sum(map(abs, g)) for g in G.elements), default=0)
    if p in (float("inf"), "inf"):
        return max((max(map(abs, g)) for g in G.elements), default=0)
    raise ValueError(f"unsupported norm {p!r}")


def conformal_decompose(G: GraverBasis, y: Sequence[int],
                        key: Optional[Callable] = None) -> ConformalDecomposition:
    """Greedy conformal decomposition of a kernel vector into basis elements.

    At each step the smallest element (lexicographically, or by ``key``) that is
    ⊑ the remainder is subtracted once.
    """
    y = tuple(int(v) for v in y)
    if len(y) != G.ncols:
        raise ValueError(f"vector of length {len(y)} for a matrix with {G.ncols} columns")
    if G.matrix and any(mat_vec(G.matrix, y)):
        raise ValueError("vector is not in the kernel of the matrix")
    elems = sorted(G.elements, key=key) if key is not None else G.elements
    rest = list(y)
    parts = []
    while any(rest):
        g = next((g for g in elems if conformal_leq(g, rest)), None)
        assert g is not None, "incomplete Graver basis: no conformal element for a kernel vector"
        parts.append(g)
        rest = [a - b for a, b in zip(rest, g)]
    return ConformalDecomposition(y, tuple(parts))
