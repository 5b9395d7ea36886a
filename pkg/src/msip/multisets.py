"""Multiplicity-vector multisets, validity for a multistage tree, and cone
partitioning of fractional multisets.

``find_small_valid_submultisets`` is an exhaustive existence search.  The
bottom-up/top-down construction that bounds the witness size analytically is
not executable (its scaling constants exceed 10**24 already for d=2, Δ=1,
t=1), so the search replaces it; :func:`bound_constants` still evaluates the
constants exactly.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .exact import inverse, norm_inf, rat_vector
from .graver import BudgetExceeded, conformal_decompose, graver_basis
from .structure import MultistageMatrix, MultistageTree, Program, build_tree, leaf_matrix, project

DEFAULT_SEARCH_BUDGET = 5_000_000
DEFAULT_LCM_CAP = 10 ** 7

Point = tuple[int, ...]


class Multiset:
    """Finite multiset of integer vectors with nonnegative rational multiplicities."""

    __slots__ = ("_mult", "dim")

    def __init__(self, mult: Mapping[Sequence[int], object] | None = None, dim: Optional[int] = None):
        clean: dict[Point, Fraction] = {}
        for p, k in (mult or {}).items():
            k = Fraction(k)
            if k < 0:
                raise ValueError(f"negative multiplicity {k} for {p}")
            if k:
                key = tuple(int(x) for x in p)
                clean[key] = clean.get(key, Fraction(0)) + k
        dims = {len(p) for p in clean}
        if dim is None:
            if len(dims) > 1:
                raise ValueError("points of different dimension")
            dim = dims.pop() if dims else None
        elif dims and dims != {dim}:
            raise ValueError(f"points must have dimension {dim}")
        self._mult = dict(sorted(clean.items()))
        self.dim = dim

    @classmethod
    def from_items(cls, items: Iterable[Sequence[int]], dim: Optional[int] = None) -> "Multiset":
        mult: dict[Point, int] = {}
        for p in items:
            p = tuple(p)
            mult[p] = mult.get(p, 0) + 1
        return cls(mult, dim)

    def __getitem__(self, p) -> Fraction:
        return self._mult.get(tuple(p), Fraction(0))

    def __iter__(self):
        return iter(self._mult)

    def __len__(self):
        return len(self._mult)

    def items(self):
        return self._mult.items()

    def support(self) -> list[Point]:
        return list(self._mult)

    def cardinality(self) -> Fraction:
        return sum(self._mult.values(), Fraction(0))

    def is_integral(self) -> bool:
        return all(k.denominator == 1 for k in self._mult.values())

    def total(self, dim: Optional[int] = None) -> list[Fraction]:
        """Σ_p λ_p·p."""
        dim = self.dim if dim is None else dim
        if dim is None:
            raise ValueError("dimension unknown for an empty multiset")
        out = [Fraction(0)] * dim
        for p, k in self._mult.items():
            for j, x in enumerate(p):
                out[j] += k * x
        return out

    def elements(self) -> list[Point]:
        """Integral multiset expanded into a sorted list with repetition."""
        if not self.is_integral():
            raise ValueError("fractional multiset has no element list")
        return [p for p, k in self._mult.items() for _ in range(int(k))]

    def __le__(self, other: "Multiset") -> bool:
        return all(k <= other[p] for p, k in self._mult.items())

    def __add__(self, other: "Multiset") -> "Multiset":
        mult = dict(self._mult)
        for p, k in other.items():
            mult[p] = mult.get(p, Fraction(0)) + k
        return Multiset(mult, self.dim if self.dim is not None else other.dim)

    def __sub__(self, other: "Multiset") -> "Multiset":
        mult = dict(self._mult)
        for p, k in other.items():
            mult[p] = mult.get(p, Fraction(0)) - k
        return Multiset(mult, self.dim)

    def __eq__(self, other):
        return isinstance(other, Multiset) and self._mult == other._mult

    def __hash__(self):
        return hash(tuple(self._mult.items()))

    def __repr__(self):
        inner = ", ".join(f"{p}: {k}" for p, k in self._mult.items())
        return f"Multiset({{{inner}}})"


def rho_valid(tree: MultistageTree, b: Sequence, rho, T: Sequence[Multiset]) -> bool:
    """Every leaf sum is strictly closer than rho to the leaf projection of b."""
    rho = Fraction(rho)
    if rho <= 0:
        raise ValueError("rho must be positive")
    if len(T) != tree.n:
        raise ValueError(f"{len(T)} multisets for a tree with {tree.n} leaves")
    b = rat_vector(b)
    d = tree.dims().width
    for i, Ti in enumerate(T):
        if Ti.dim is not None and Ti.dim != d:
            raise ValueError(f"multiset {i} has dimension {Ti.dim}, expected {d}")
        target = project(tree, i, b)
        if norm_inf([s - x for s, x in zip(Ti.total(d), target)]) >= rho:
            return False
    return True


def valid_witness_from_kernel(P: Program | MultistageMatrix, y: Sequence[int],
                              tree: Optional[MultistageTree] = None) -> list[Multiset]:
    """Decompose each leaf projection of a kernel vector into Graver elements of A_i."""
    M = P.A if isinstance(P, Program) else P
    if len(y) != M.ncols:
        raise ValueError(f"vector of length {len(y)} for {M.ncols} columns")
    if any(sum(a * x for a, x in zip(row, y)) for row in M.entries):
        raise ValueError("vector is not in the integer kernel of A")
    if tree is None:
        tree, _ = build_tree(M)
    d = tree.dims().width
    cache: dict = {}
    out = []
    for i in range(tree.n):
        A_i = tuple(tuple(r) for r in leaf_matrix(M, tree, i))
        G = cache.get(A_i)
        if G is None:
            G = cache[A_i] = graver_basis(A_i, ncols=d)
        dec = conformal_decompose(G, project(tree, i, list(y)))
        out.append(Multiset(dec.counts(), d))
    return out


@dataclass(frozen=True)
class SubmultisetWitness:
    S: tuple[Multiset, ...]
    bhat: tuple[int, ...]


def _check_sign_compatible(T: Sequence[Multiset], delta: Optional[int]):
    for i, Ti in enumerate(T):
        pts = Ti.support()
        for p in pts:
            if delta is not None and norm_inf(p) > delta:
                raise ValueError(f"element {p} of T_{i + 1} exceeds the bound {delta}")
        for p, q in itertools.combinations(pts, 2):
            if any(a * b < 0 for a, b in zip(p, q)):
                raise ValueError(f"T_{i + 1} holds sign-incompatible elements {p} and {q}")


def _leaf_options(Ti: Multiset, d: int, max_card: int):
    """All sub-multiplicity vectors of an integral multiset with cardinality <= max_card."""
    pts = Ti.support()
    caps = [int(Ti[p]) for p in pts]
    opts = []
    for ks in itertools.product(*(range(c + 1) for c in caps)):
        card = sum(ks)
        if card > max_card:
            continue
        total = [0] * d
        for p, k in zip(pts, ks):
            if k:
                for j, x in enumerate(p):
                    total[j] += k * x
        opts.append((ks, card, tuple(total)))
    return pts, opts


def find_small_valid_submultisets(tree: MultistageTree, T: Sequence[Multiset], max_card: int,
                                  delta: Optional[int] = None,
                                  budget: int = DEFAULT_SEARCH_BUDGET) -> Optional[SubmultisetWitness]:
    """Exhaustive search for submultisets S_i ⊆ T_i, not all empty, |S_i| <= max_card,
    whose sums agree on every shared tree segment.

    Among all such families the one with the smallest max |S_i| is returned,
    then the smallest total cardinality, then the lexicographically smallest
    multiplicity vectors.
    """
    if len(T) != tree.n:
        raise ValueError(f"{len(T)} multisets for a tree with {tree.n} leaves")
    if any(not Ti.is_integral() for Ti in T):
        raise ValueError("input multisets must have integral multiplicities")
    _check_sign_compatible(T, delta)
    dims = tree.dims()
    d = dims.width
    # consecutive leaves in DFS order must agree on the prefix owned by their common ancestor
    shared = [0]
    for i in range(1, tree.n):
        a, b = tree.paths[i - 1], tree.paths[i]
        k = 0
        while k < len(a) and a[k] == b[k]:
            k += 1
        shared.append(sum(dims.s[:k]))
    per_leaf = [_leaf_options(Ti, d, max_card) for Ti in T]

    best = None
    chosen: list = [None] * tree.n
    visited = 0

    def dfs(i, prev_total):
        nonlocal best, visited
        visited += 1
        if visited > budget:
            raise BudgetExceeded(f"submultiset search exceeded {budget} nodes")
        if i == tree.n:
            if all(opt[1] == 0 for opt in chosen):
                return
            key = (max(o[1] for o in chosen), sum(o[1] for o in chosen),
                   tuple(k for o in chosen for k in o[0]))
            if best is None or key < best[0]:
                best = (key, list(chosen))
            return
        for opt in per_leaf[i][1]:
            if i and opt[2][: shared[i]] != prev_total[: shared[i]]:
                continue
            chosen[i] = opt
            dfs(i + 1, opt[2])

    dfs(0, None)
    if best is None:
        return None
    S = []
    bhat = [0] * tree.ncols
    for i, opt in enumerate(best[1]):
        pts = per_leaf[i][0]
        S.append(Multiset({p: k for p, k in zip(pts, opt[0]) if k}, d))
        for c, val in zip(tree.path_columns(i), opt[2]):
            bhat[c] = val
    return SubmultisetWitness(tuple(S), tuple(bhat))


# --- cone partitioning of fractional multisets -------------------------------------------

def point_set(d: int, delta: int) -> list[Point]:
    """All integer vectors of dimension d with ||p||_inf <= delta, lexicographic."""
    return list(itertools.product(range(-delta, delta + 1), repeat=d))


@dataclass(frozen=True)
class SingleElement:
    bhat: tuple[int, ...]
    bases: tuple[tuple[Point, ...], ...]  # columns of each basis
    x: tuple[tuple[Fraction, ...], ...]  # coefficients over the columns of each basis

    def matrix(self, i: int) -> list[list[int]]:
        return [list(row) for row in zip(*self.bases[i])]

    def usage(self, i: int) -> Multiset:
        """x^(i) as a multiplicity vector over points."""
        return Multiset(dict(zip(self.bases[i], self.x[i])), len(self.bhat))


def _infer_delta(lambdas, delta):
    if delta is not None:
        return delta
    return max([1] + [norm_inf(p) for lam in lambdas for p in lam.support()])


def _candidate_bases(lam: Multiset, d: int, P: list[Point]):
    """Invertible d-subsets of support(lam) ∪ P with their inverses, support first."""
    support = lam.support()
    rest = [p for p in P if p not in lam._mult and any(p)]
    cols = support + rest
    out = []
    for combo in itertools.combinations(cols, d):
        if not any(c in lam._mult for c in combo):
            continue
        B = [list(row) for row in zip(*combo)]
        inv = inverse(B)
        if inv is not None:
            caps = [lam[c] for c in combo]
            out.append((combo, inv, caps))
    return out


def single_element(lambdas: Sequence[Multiset], b: Sequence, rho, delta: Optional[int] = None,
                   budget: int = DEFAULT_SEARCH_BUDGET) -> Optional[SingleElement]:
    """Find bhat != 0 with ||bhat||_inf <= (dΔ)^(d^2) and, per multiset, a basis B
    from the bounded point set with 0 <= B^{-1} bhat <= λ over B's columns.

    Candidates are tried by increasing norm, then lexicographically; the first
    success is returned, or None when the bounded search space is exhausted.
    """
    b = rat_vector(b)
    rho = Fraction(rho)
    d = len(b)
    if not lambdas:
        raise ValueError("need at least one multiset")
    for i, lam in enumerate(lambdas):
        if lam.dim is not None and lam.dim != d:
            raise ValueError(f"multiset {i} has dimension {lam.dim}, expected {d}")
        if norm_inf([s - x for s, x in zip(lam.total(d), b)]) >= rho:
            raise ValueError(f"multiset {i} is not within rho of b")
    delta = _infer_delta(lambdas, delta)
    P = point_set(d, delta)
    for i, lam in enumerate(lambdas):
        if any(norm_inf(p) > delta for p in lam.support()):
            raise ValueError(f"multiset {i} has points outside the bounded set")
    cap = (d * delta) ** (d * d)
    # bhat must be a nonnegative combination within every multiset's box of reachable sums
    reach_lo = [-cap] * d
    reach_hi = [cap] * d
    for lam in lambdas:
        for j in range(d):
            lo = sum((k * p[j] for p, k in lam.items() if p[j] < 0), Fraction(0))
            hi = sum((k * p[j] for p, k in lam.items() if p[j] > 0), Fraction(0))
            reach_lo[j] = max(reach_lo[j], math.ceil(lo))
            reach_hi[j] = min(reach_hi[j], math.floor(hi))
    if any(lo > hi for lo, hi in zip(reach_lo, reach_hi)):
        return None
    count = math.prod(hi - lo + 1 for lo, hi in zip(reach_lo, reach_hi))
    bases = [_candidate_bases(lam, d, P) for lam in lambdas]
    if count * sum(len(x) for x in bases) > budget:
        raise BudgetExceeded(f"single_element search of {count} candidates exceeds budget")

    candidates = [c for c in itertools.product(*(range(lo, hi + 1) for lo, hi in zip(reach_lo, reach_hi)))
                  if any(c)]
    candidates.sort(key=lambda c: (norm_inf(c), c))
    for bhat in candidates:
        found_bases, found_x = [], []
        for opts in bases:
            hit = None
            for combo, inv, caps in opts:
                x = [sum((a * v for a, v in zip(row, bhat)), Fraction(0)) for row in inv]
                if all(0 <= xi <= ci for xi, ci in zip(x, caps)):
                    hit = (combo, tuple(x))
                    break
            if hit is None:
                break
            found_bases.append(hit[0])
            found_x.append(hit[1])
        else:
            return SingleElement(tuple(bhat), tuple(found_bases), tuple(found_x))
    return None


@dataclass(frozen=True)
class AlmostPartition:
    family: dict  # (basis columns, i) -> Multiset of extracted bhat vectors
    residual: tuple[Fraction, ...]
    steps: tuple[SingleElement, ...] = field(repr=False)
    remaining: tuple[Multiset, ...] = field(repr=False)

    def aggregate(self, i: int, d: int) -> Multiset:
        """Σ_B λ[B, i]."""
        out = Multiset({}, d)
        for (basis, k), ms in self.family.items():
            if k == i:
                out = out + ms
        return out


def almost_partition(lambdas: Sequence[Multiset], b: Sequence, rho, delta: Optional[int] = None,
                     budget: int = DEFAULT_SEARCH_BUDGET) -> AlmostPartition:
    """Extract common elements with :func:`single_element` until none is left."""
    b = rat_vector(b)
    d = len(b)
    delta = _infer_delta(lambdas, delta)
    current = list(lambdas)
    rest = list(b)
    steps = []
    counts: dict = {}
    while True:
        step = single_element(current, rest, rho, delta=delta, budget=budget)
        if step is None:
            break
        steps.append(step)
        rest = [r - x for r, x in zip(rest, step.bhat)]
        for i in range(len(current)):
            current[i] = current[i] - step.usage(i)
            key = (step.bases[i], i)
            bucket = counts.setdefault(key, {})
            bucket[step.bhat] = bucket.get(step.bhat, 0) + 1
    family = {k: Multiset(v, d) for k, v in counts.items()}
    return AlmostPartition(family, tuple(rest), tuple(steps), tuple(current))


# --- bound constants ------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundTable:
    d: int
    delta: int
    t: int
    rho: Fraction
    k1: int
    Delta: tuple[int, ...]  # Δ_i = (dΔ)^(d^(3i))
    nu: int
    alpha: tuple[int, ...]
    beta: tuple[int, ...]
    D: tuple[int, ...]
    rho_ladder: tuple[Fraction, ...]
    threshold: Fraction
    lcm_cap: int

    def as_dict(self) -> dict[str, str]:
        out = {"d": str(self.d), "delta": str(self.delta), "t": str(self.t),
               "rho": str(self.rho), "K1": str(self.k1), "lcm_cap": str(self.lcm_cap)}
        for i in range(self.t + 1):
            out[f"Delta_{i}"] = str(self.Delta[i])
        out["nu"] = str(self.nu)
        for name, seq in (("alpha", self.alpha), ("beta", self.beta), ("D", self.D), ("rho", self.rho_ladder)):
            for i, v in enumerate(seq):
                out[f"{name}_{i}"] = str(v)
        out["threshold"] = str(self.threshold)
        return out


def lcm_upto(n: int) -> int:
    """lcm(1, ..., n) as the product of maximal prime powers <= n; 1 for n < 1."""
    if n < 2:
        return 1
    sieve = bytearray([1]) * (n + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(range(p * p, n + 1, p)))
    out = 1
    for p in range(2, n + 1):
        if sieve[p]:
            q = p
            while q * p <= n:
                q *= p
            out *= q
    return out


def bound_constants(d: int, delta: int, t: int, rho=1, k1: int = 1,
                    lcm_limit: int = DEFAULT_LCM_CAP) -> BoundTable:
    if d < 1 or delta < 1 or t < 0:
        raise ValueError("need d >= 1, delta >= 1, t >= 0")
    rho = Fraction(rho)
    base = d * delta
    Delta = tuple(base ** (d ** (3 * i)) for i in range(t + 1))
    cap = (d * Delta[t - 1]) ** d if t >= 1 else 0
    if cap > lcm_limit:
        raise BudgetExceeded(f"lcm(1..{cap}) is beyond the configured limit {lcm_limit}")
    nu = lcm_upto(cap)
    alpha = tuple(nu ** i for i in range(t + 1))
    beta = tuple(Delta[t] ** (2 * i * d * d) for i in range(t + 1))
    D = tuple(a * b for a, b in zip(alpha, beta))
    rho_ladder = tuple(rho * (d * Delta[t]) ** (i * k1 * d * d) for i in range(t + 1))
    Dt, rt = Delta[t], rho_ladder[t]
    threshold = Dt ** (2 * t) * d ** t * (Dt ** (d + 1) * (alpha[t] * beta[t] + rt) + 4 * t * rt + 2 * t * D[t])
    return BoundTable(d, delta, t, rho, k1, Delta, nu, alpha, beta, D, rho_ladder,
                      Fraction(threshold), cap)
