"""Reference implementations used only by the tests.

None of these share code with the package paths they check: the Graver
oracle enumerates the certified box with numpy, the LP oracle enumerates
bases with sympy, and the submultiset oracle works on expanded element lists
and column vectors instead of tree paths.
"""
import itertools
from fractions import Fraction

import numpy as np
import sympy


def _dominated(X, M):
    """Rows of X that some row of M precedes in the conformal order."""
    out = np.zeros(len(X), dtype=bool)
    for g in M:
        out |= np.all((X * np.sign(g) >= 0) & (np.abs(X) >= np.abs(g)), axis=1)
    return out


def graver_box_oracle(A, ncols, bound, chunk_rows=64):
    """⊑-minimal nonzero kernel vectors of A inside ||x||_inf <= bound.

    Every lattice point of the box is visited.  Kernel points are solved from
    the rational row echelon form over the free coordinates, and the current
    set of ⊑-minimal points is maintained while streaming through the box.
    """
    M = sympy.Matrix(A) if A else sympy.zeros(1, ncols)
    R, pivots = M.rref()
    free = [j for j in range(ncols) if j not in pivots]
    if not free:
        return set()
    rows = [[sympy.Rational(R[i, j]) for j in range(ncols)] for i in range(len(pivots))]
    L = 1
    for row in rows:
        for x in row:
            L = int(sympy.ilcm(L, x.q))
    # L * x_p = -sum_f (L R[p, f]) x_f
    coef = np.array([[int(L * row[f]) for f in free] for row in rows], dtype=np.int64).reshape(len(pivots), len(free))
    side = np.arange(-bound, bound + 1, dtype=np.int64)
    rest = (np.array(np.meshgrid(*([side] * (len(free) - 1)), indexing="ij")).reshape(len(free) - 1, -1).T
            if len(free) > 1 else np.zeros((1, 0), dtype=np.int64))
    lead = side[np.argsort(np.abs(side), kind="stable")]
    minimal = np.zeros((0, ncols), dtype=np.int64)
    for k in range(0, len(lead), chunk_rows):
        heads = lead[k:k + chunk_rows]
        F = np.column_stack([np.repeat(heads, len(rest)), np.tile(rest, (len(heads), 1))])
        num = -(F @ coef.T)
        ok = np.all(num % L == 0, axis=1)
        P = num // L
        ok &= np.all(np.abs(P) <= bound, axis=1)
        X = np.zeros((int(ok.sum()), ncols), dtype=np.int64)
        X[:, free] = F[ok]
        X[:, list(pivots)] = P[ok]
        X = X[np.any(X != 0, axis=1)]
        X = X[~_dominated(X, minimal)]
        if not len(X):
            continue
        X = X[np.argsort(np.abs(X).sum(axis=1), kind="stable")]
        fresh = []
        while len(X):
            fresh.append(X[0])
            X = X[~_dominated(X, [X[0]])]
        fresh = np.array(fresh)
        # new points may sit below previously kept ones
        minimal = np.concatenate([minimal[~_dominated(minimal, fresh)], fresh])
    return {tuple(int(v) for v in g) for g in minimal}


def lp_vertex_oracle(A, b, c):
    """min c.x over vertices of {x >= 0 : Ax = b} by enumerating column subsets; None if no vertex."""
    m = len(A)
    n = len(c)
    M = sympy.Matrix(A)
    bb = sympy.Matrix(b)
    best = None
    for k in range(0, min(m, n) + 1):
        for S in itertools.combinations(range(n), k):
            sub = M[:, list(S)] if k else sympy.zeros(m, 0)
            if k and sub.rank() < k:
                continue
            x = [Fraction(0)] * n
            if k:
                try:
                    sol, params = sub.gauss_jordan_solve(bb)
                except ValueError:
                    continue
                if params.shape[0]:
                    continue
                for j, v in zip(S, sol):
                    x[j] = Fraction(int(v.p), int(v.q))
            elif any(v != 0 for v in b):
                continue
            if any(v < 0 for v in x):
                continue
            if any(sum(Fraction(A[i][j]) * x[j] for j in range(n)) != b[i] for i in range(m)):
                continue
            val = sum(Fraction(cj) * xj for cj, xj in zip(c, x))
            if best is None or val < best:
                best = val
    return best


def _subsets_with_repetition(elements):
    """Distinct sub-multisets of an element list, as sorted tuples."""
    seen = set()
    for mask in itertools.product((0, 1), repeat=len(elements)):
        sub = tuple(sorted(e for e, bit in zip(elements, mask) if bit))
        if sub not in seen:
            seen.add(sub)
            yield sub


def valid_submultiset_exists(leaf_columns, ncols, T_lists, max_card):
    """Is there a family S_i ⊆ T_i, not all empty, |S_i| <= max_card, and an integer
    vector b over all columns with sum(S_i) equal to b restricted to leaf i's columns?"""
    options = []
    for elems in T_lists:
        options.append([s for s in _subsets_with_repetition(list(elems)) if len(s) <= max_card])
    for combo in itertools.product(*options):
        if all(len(s) == 0 for s in combo):
            continue
        b = [None] * ncols
        ok = True
        for cols, S in zip(leaf_columns, combo):
            total = [sum(v[k] for v in S) for k in range(len(cols))]
            for col, val in zip(cols, total):
                if b[col] is None:
                    b[col] = val
                elif b[col] != val:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return True
    return False
