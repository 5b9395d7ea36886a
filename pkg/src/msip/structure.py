"""Multistage stochastic matrices, their block tree and the projection calculus.

Indices are 0-based internally; the JSON layer in :mod:`msip.instances`
converts from and to the 1-based external format.

Two orientations of "level" appear in this package.  Tree nodes carry a
*depth* (root at 0, leaves at ``t``), used by the tree, the partitions and the
projections.  The bound ladder in :mod:`msip.multisets` counts *height* from
the leaves (leaves at 0).  The partial sums ``d_i = s_0 + ... + s_{t-i}`` are
indexed by height, so ``d_0`` is the full path width and ``d_t = s_0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

NONZERO_OUTSIDE_BLOCK = "nonzero-outside-block"
COLUMN_OVERLAP = "column-overlap"
COLUMN_UNCOVERED = "column-uncovered"
NON_LAMINAR_ROWS = "non-laminar-rows"
NO_ROOT = "no-root"
EMPTY_BLOCK = "empty-block"
DUPLICATE_ROWS = "duplicate-rows"
ROW_OUTSIDE_LEAVES = "row-outside-leaves"
INDEX_RANGE = "index-out-of-range"
UNSUPPORTED_SHAPE = "unsupported-shape"


class StructureError(ValueError):
    """Raised when a matrix/block layout is not a supported multistage matrix."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


@dataclass(frozen=True)
class Block:
    rows: tuple[int, ...]
    cols: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(sorted(self.rows)))
        object.__setattr__(self, "cols", tuple(sorted(self.cols)))


@dataclass(frozen=True)
class MultistageMatrix:
    entries: tuple[tuple[int, ...], ...]
    blocks: tuple[Block, ...]
    ncols: int

    @property
    def nrows(self) -> int:
        return len(self.entries)

    @property
    def delta(self) -> int:
        return max((abs(x) for row in self.entries for x in row), default=0)

    def rows_list(self) -> list[list[int]]:
        return [list(r) for r in self.entries]


@dataclass(frozen=True)
class TreeNode:
    cols: tuple[int, ...]
    rows: tuple[int, ...]
    depth: int
    parent: Optional[int]
    children: tuple[int, ...]


@dataclass(frozen=True)
class StageDims:
    s: tuple[int, ...]
    d: tuple[int, ...]
    t: int
    n: int
    r: int

    @property
    def width(self) -> int:
        return self.d[0]


@dataclass(frozen=True)
class MultistageTree:
    nodes: tuple[TreeNode, ...]
    root: int
    leaves: tuple[int, ...]  # leaves[i] is the node numbered i+1
    paths: tuple[tuple[int, ...], ...] = field(repr=False)  # root-to-leaf node ids per leaf

    @property
    def n(self) -> int:
        return len(self.leaves)

    @property
    def t(self) -> int:
        return self.nodes[self.leaves[0]].depth

    @property
    def ncols(self) -> int:
        return sum(len(v.cols) for v in self.nodes)

    def path_columns(self, i: int) -> list[int]:
        """Columns on the root-to-leaf path of leaf ``i`` (0-based), root first."""
        return [c for v in self.paths[i] for c in self.nodes[v].cols]

    def leaf_number(self, node: int) -> int:
        return self.leaves.index(node)

    def leaves_below(self, node: int) -> tuple[int, ...]:
        return tuple(i for i, path in enumerate(self.paths) if node in path)

    def blocks(self) -> list[Block]:
        return sorted((Block(v.rows, v.cols) for v in self.nodes), key=lambda b: b.cols)

    def dims(self) -> StageDims:
        t = self.t
        s = [0] * (t + 1)
        for v in self.nodes:
            s[v.depth] = len(v.cols)
        d = tuple(sum(s[: t - i + 1]) for i in range(t + 1))
        r = max(len(self.nodes[v].rows) for v in self.leaves)
        return StageDims(tuple(s), d, t, self.n, r)

    def segment(self, depth: int) -> tuple[int, int]:
        """Half-open index range of the depth-``depth`` columns inside any path vector."""
        s = self.dims().s
        lo = sum(s[:depth])
        return lo, lo + s[depth]


def _check_blocks(entries, blocks, ncols):
    nrows = len(entries)
    owner = [None] * ncols
    for k, blk in enumerate(blocks):
        if not blk.cols:
            raise StructureError(EMPTY_BLOCK, f"block {k} has no columns")
        if not blk.rows:
            raise StructureError(EMPTY_BLOCK, f"block {k} has no rows")
        for c in blk.cols:
            if not 0 <= c < ncols:
                raise StructureError(INDEX_RANGE, f"block {k} column {c} outside 0..{ncols - 1}")
            if owner[c] is not None:
                raise StructureError(COLUMN_OVERLAP, f"column {c} in blocks {owner[c]} and {k}")
            owner[c] = k
        for r in blk.rows:
            if not 0 <= r < nrows:
                raise StructureError(INDEX_RANGE, f"block {k} row {r} outside 0..{nrows - 1}")
    missing = [c for c in range(ncols) if owner[c] is None]
    if missing:
        raise StructureError(COLUMN_UNCOVERED, f"columns {missing} belong to no block")
    return owner


def validate_structure(entries: Sequence[Sequence[int]], blocks: Sequence[Block],
                       ncols: Optional[int] = None) -> MultistageMatrix:
    entries = tuple(tuple(row) for row in entries)
    if ncols is None:
        if not entries:
            raise ValueError("ncols required for a matrix without rows")
        ncols = len(entries[0])
    for i, row in enumerate(entries):
        if len(row) != ncols:
            raise ValueError(f"row {i} has {len(row)} entries, expected {ncols}")
        for x in row:
            if not isinstance(x, int) or isinstance(x, bool):
                raise TypeError(f"non-integer entry {x!r} in row {i}")
    blocks = tuple(b if isinstance(b, Block) else Block(*b) for b in blocks)
    owner = _check_blocks(entries, blocks, ncols)

    row_sets = [frozenset(b.rows) for b in blocks]
    for i, row in enumerate(entries):
        for c, x in enumerate(row):
            if x != 0 and i not in row_sets[owner[c]]:
                raise StructureError(NONZERO_OUTSIDE_BLOCK, f"entry ({i}, {c}) = {x} lies outside block {owner[c]}")
    for a in range(len(blocks)):
        for b in range(a + 1, len(blocks)):
            ra, rb = row_sets[a], row_sets[b]
            if ra == rb:
                raise StructureError(DUPLICATE_ROWS, f"blocks {a} and {b} have identical row sets")
            if ra & rb and not (ra <= rb or rb <= ra):
                raise StructureError(NON_LAMINAR_ROWS, f"row sets of blocks {a} and {b} overlap without nesting")
    if not any(all(other <= rs for other in row_sets) for rs in row_sets):
        raise StructureError(NO_ROOT, "no block contains the rows of every other block")
    return MultistageMatrix(entries, blocks, ncols)


def _finish_tree(nodes: list[TreeNode], root: int) -> MultistageTree:
    leaves, paths = [], []

    def walk(v, path):
        path = path + (v,)
        if not nodes[v].children:
            leaves.append(v)
            paths.append(path)
        for ch in nodes[v].children:
            walk(ch, path)

    walk(root, ())
    depths = {nodes[v].depth for v in leaves}
    if len(depths) != 1:
        raise StructureError(UNSUPPORTED_SHAPE, f"leaves at different depths {sorted(depths)}")
    widths = {}
    for v in nodes:
        w = widths.setdefault(v.depth, len(v.cols))
        if w != len(v.cols):
            raise StructureError(UNSUPPORTED_SHAPE, f"nodes at depth {v.depth} have different column counts")
    return MultistageTree(tuple(nodes), root, tuple(leaves), tuple(paths))


def build_tree(M: MultistageMatrix) -> tuple[MultistageTree, StageDims]:
    """Containment tree of the blocks; leaves numbered in DFS order, children by smallest column."""
    blocks = M.blocks
    row_sets = [frozenset(b.rows) for b in blocks]
    parent: list[Optional[int]] = []
    for k, rs in enumerate(row_sets):
        supers = [j for j, other in enumerate(row_sets) if j != k and rs < other]
        parent.append(min(supers, key=lambda j: len(row_sets[j])) if supers else None)
    roots = [k for k, p in enumerate(parent) if p is None]
    if len(roots) != 1:
        raise StructureError(NO_ROOT, f"{len(roots)} candidate roots")
    children = [[] for _ in blocks]
    for k, p in enumerate(parent):
        if p is not None:
            children[p].append(k)
    depth = [0] * len(blocks)
    order = [roots[0]]
    for v in order:
        for ch in children[v]:
            depth[ch] = depth[v] + 1
            order.append(ch)
    nodes = [
        TreeNode(blocks[k].cols, blocks[k].rows, depth[k], parent[k],
                 tuple(sorted(children[k], key=lambda j: blocks[j].cols[0])))
        for k in range(len(blocks))
    ]
    tree = _finish_tree(nodes, roots[0])
    covered = set()
    for v in tree.leaves:
        covered.update(tree.nodes[v].rows)
    uncovered = sorted(set(range(M.nrows)) - covered)
    if uncovered:
        raise StructureError(ROW_OUTSIDE_LEAVES, f"rows {uncovered} are in no leaf block")
    return tree, tree.dims()


def tree_from_nested(root: dict) -> MultistageTree:
    """Build a tree from ``{"cols": [...], "children": [...]}`` (0-based columns, no rows)."""
    nodes: list[dict] = []

    def add(node, parent, depth):
        k = len(nodes)
        nodes.append({"cols": tuple(sorted(node["cols"])), "parent": parent, "depth": depth, "children": []})
        for ch in node.get("children", []):
            nodes[k]["children"].append(add(ch, k, depth + 1))
        return k

    add(root, None, 0)
    seen = [c for v in nodes for c in v["cols"]]
    if any(not v["cols"] for v in nodes):
        raise StructureError(EMPTY_BLOCK, "tree node without columns")
    if len(seen) != len(set(seen)):
        raise StructureError(COLUMN_OVERLAP, "a column appears in two tree nodes")
    if sorted(seen) != list(range(len(seen))):
        raise StructureError(COLUMN_UNCOVERED, "tree columns are not 0..N-1")
    built = [
        TreeNode(v["cols"], (), v["depth"], v["parent"],
                 tuple(sorted(v["children"], key=lambda j: nodes[j]["cols"][0])))
        for v in nodes
    ]
    return _finish_tree(built, 0)


def tree_to_nested(tree: MultistageTree, node: Optional[int] = None) -> dict:
    v = tree.root if node is None else node
    return {"cols": list(tree.nodes[v].cols),
            "children": [tree_to_nested(tree, ch) for ch in tree.nodes[v].children]}


@dataclass(frozen=True)
class Program:
    """min c.x s.t. Ax = b, lower <= x <= upper, x integral (None = unbounded side)."""

    A: MultistageMatrix
    b: tuple[int, ...]
    c: tuple[int, ...]
    lower: tuple[Optional[int], ...] = None
    upper: tuple[Optional[int], ...] = None

    def __post_init__(self):
        N = self.A.ncols
        object.__setattr__(self, "b", tuple(self.b))
        object.__setattr__(self, "c", tuple(self.c))
        lower = tuple(self.lower) if self.lower is not None else (0,) * N
        upper = tuple(self.upper) if self.upper is not None else (None,) * N
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if len(self.b) != self.A.nrows:
            raise ValueError(f"b has {len(self.b)} entries, A has {self.A.nrows} rows")
        for name in ("c", "lower", "upper"):
            if len(getattr(self, name)) != N:
                raise ValueError(f"{name} has {len(getattr(self, name))} entries, A has {N} columns")

    @property
    def ncols(self) -> int:
        return self.A.ncols

    def tree(self) -> tuple[MultistageTree, StageDims]:
        return build_tree(self.A)


def leaf_subprogram(P: Program, i: int, tree: Optional[MultistageTree] = None):
    """(A_i, b_i, c_i) for leaf ``i`` (0-based): leaf rows times root-to-leaf columns."""
    if tree is None:
        tree, _ = build_tree(P.A)
    if not 0 <= i < tree.n:
        raise IndexError(f"leaf index {i} outside 0..{tree.n - 1}")
    rows = tree.nodes[tree.leaves[i]].rows
    cols = tree.path_columns(i)
    A_i = [[P.A.entries[r][c] for c in cols] for r in rows]
    return A_i, [P.b[r] for r in rows], [P.c[c] for c in cols]


def leaf_matrix(M: MultistageMatrix, tree: MultistageTree, i: int) -> list[list[int]]:
    rows = tree.nodes[tree.leaves[i]].rows
    cols = tree.path_columns(i)
    return [[M.entries[r][c] for c in cols] for r in rows]


def project(tree: MultistageTree, i: int, b: Sequence) -> list:
    if len(b) != tree.ncols:
        raise ValueError(f"vector of length {len(b)} for a tree over {tree.ncols} columns")
    return [b[c] for c in tree.path_columns(i)]


def project_prefix(tree: MultistageTree, i: int, b: Sequence, j: int) -> list:
    """First d_j entries of project(tree, i, b); j counts height (0 keeps everything)."""
    dims = tree.dims()
    if not 0 <= j <= dims.t:
        raise ValueError(f"height {j} outside 0..{dims.t}")
    return project(tree, i, b)[: dims.d[j]]


def drop_last_stage(tree: MultistageTree, v: Sequence, j: int) -> list:
    """Map a length-d_j vector to its first d_{j+1} entries."""
    dims = tree.dims()
    if not 0 <= j < dims.t:
        raise ValueError(f"height {j} outside 0..{dims.t - 1}")
    if len(v) != dims.d[j]:
        raise ValueError(f"expected length {dims.d[j]}, got {len(v)}")
    return list(v[: dims.d[j + 1]])


def tree_partitions(tree: MultistageTree) -> list[list[tuple[int, ...]]]:
    """P_0..P_t: for each depth, the leaf sets (0-based leaf numbers) of the subtrees."""
    parts = [[] for _ in range(tree.t + 1)]
    for v, node in enumerate(tree.nodes):
        parts[node.depth].append(tree.leaves_below(v))
    return [sorted(p) for p in parts]
