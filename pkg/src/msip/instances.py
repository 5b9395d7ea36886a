"""Seeded instance generation and the canonical JSON formats (1-based indices).

Random numbers come from SplitMix64 (Steele, Lea, Flood 2014), defined by
its constants below, so a corpus is reproducible from (parameters, seed) in any
language:

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)            (all arithmetic mod 2**64)

Integers in [lo, hi] are drawn by rejection sampling on the raw 64-bit output.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Optional, Sequence

from .multisets import Multiset
from .structure import (Block, MultistageTree, Program, build_tree, tree_from_nested, tree_to_nested,
                        validate_structure)

MASK64 = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi]."""
        span = hi - lo + 1
        if span <= 0:
            raise ValueError("empty range")
        limit = (1 << 64) - (1 << 64) % span
        while True:
            r = self.next()
            if r < limit:
                return lo + r % span


class InstanceFormatError(ValueError):
    """Malformed instance or multiset document; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class GenParams:
    t: int
    s: tuple[int, ...]
    branching: int = 2
    r: int = 1
    delta: int = 1
    b_range: tuple[int, int] = (-3, 3)
    c_range: tuple[int, int] = (-3, 3)
    seed: int = 0
    # when set, b = A x0 for x0 drawn uniformly from this box instead of from b_range
    x0_range: Optional[tuple[int, int]] = None

    def __post_init__(self):
        if self.t < 0 or len(self.s) != self.t + 1:
            raise ValueError("s must list one width per depth 0..t")
        if min(self.s) < 1 or self.branching < 1 or self.r < 1 or self.delta < 1:
            raise ValueError("widths, branching, r and delta must be >= 1")


def generate(p: GenParams) -> Program:
    """Complete branching-regular instance; columns and leaf rows are laid out in DFS order."""
    rng = SplitMix64(p.seed)
    layout = []  # (depth, cols, leaf rows)
    next_col = [0]
    next_row = [0]
    leaf_paths = []

    def build(depth, path_cols):
        cols = list(range(next_col[0], next_col[0] + p.s[depth]))
        next_col[0] += p.s[depth]
        k = len(layout)
        layout.append([cols, []])
        if depth == p.t:
            rows = list(range(next_row[0], next_row[0] + p.r))
            next_row[0] += p.r
            layout[k][1] = rows
            leaf_paths.append((rows, path_cols + cols))
            return rows
        rows = []
        for _ in range(p.branching):
            rows += build(depth + 1, path_cols + cols)
        layout[k][1] = rows
        return rows

    build(0, [])
    m, N = next_row[0], next_col[0]
    entries = [[0] * N for _ in range(m)]
    for rows, cols in leaf_paths:
        for i in rows:
            for j in cols:
                entries[i][j] = rng.randint(-p.delta, p.delta)
    A = validate_structure(entries, [Block(r, c) for c, r in layout], N)
    if p.x0_range is not None:
        x0 = [rng.randint(*p.x0_range) for _ in range(N)]
        b = [sum(a * x for a, x in zip(row, x0)) for row in entries]
    else:
        b = [rng.randint(*p.b_range) for _ in range(m)]
    c = [rng.randint(*p.c_range) for _ in range(N)]
    P = Program(A, b, c)
    build_tree(A)
    return P


# --- instance JSON ------------------------------------------------------------------------

def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _int_list(doc, key, length=None, nullable=False) -> list:
    val = doc.get(key)
    if not isinstance(val, list):
        raise InstanceFormatError(key, "expected a list")
    if length is not None and len(val) != length:
        raise InstanceFormatError(key, f"expected {length} entries, got {len(val)}")
    for k, x in enumerate(val):
        if x is None and nullable:
            continue
        if not _is_int(x):
            raise InstanceFormatError(f"{key}[{k}]", f"expected integer, got {type(x).__name__} {x!r}")
    return val


def to_document(P: Program) -> dict[str, Any]:
    blocks = sorted(P.A.blocks, key=lambda b: b.cols)
    return {
        "m": P.A.nrows,
        "N": P.ncols,
        "entries": [list(r) for r in P.A.entries],
        "blocks": [{"rows": [r + 1 for r in b.rows], "cols": [c + 1 for c in b.cols]} for b in blocks],
        "b": list(P.b),
        "c": list(P.c),
        "lower": list(P.lower),
        "upper": list(P.upper),
    }


def serialize(P: Program) -> str:
    doc = to_document(P)
    lines = ["{"]
    lines.append(f'  "m": {doc["m"]},')
    lines.append(f'  "N": {doc["N"]},')
    lines.append('  "entries": [' + ", ".join(json.dumps(r) for r in doc["entries"]) + "],")
    lines.append('  "blocks": [' + ", ".join(json.dumps(b) for b in doc["blocks"]) + "],")
    for key in ("b", "c", "lower"):
        lines.append(f'  "{key}": {json.dumps(doc[key])},')
    lines.append(f'  "upper": {json.dumps(doc["upper"])}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def from_document(doc: Any) -> Program:
    if not isinstance(doc, dict):
        raise InstanceFormatError("<root>", "expected a JSON object")
    for key in ("m", "N"):
        if not _is_int(doc.get(key)) or doc[key] < 0:
            raise InstanceFormatError(key, "expected a nonnegative integer")
    m, N = doc["m"], doc["N"]
    entries = doc.get("entries")
    if not isinstance(entries, list) or len(entries) != m:
        raise InstanceFormatError("entries", f"expected {m} rows")
    for i, row in enumerate(entries):
        if not isinstance(row, list) or len(row) != N:
            raise InstanceFormatError(f"entries[{i}]", f"expected {N} entries")
        for j, x in enumerate(row):
            if not _is_int(x):
                raise InstanceFormatError(f"entries[{i}][{j}]", f"expected integer, got {type(x).__name__} {x!r}")
    raw_blocks = doc.get("blocks")
    if not isinstance(raw_blocks, list) or not raw_blocks:
        raise InstanceFormatError("blocks", "expected a nonempty list")
    blocks = []
    for k, blk in enumerate(raw_blocks):
        if not isinstance(blk, dict):
            raise InstanceFormatError(f"blocks[{k}]", "expected an object")
        rows = _int_list(blk, "rows")
        cols = _int_list(blk, "cols")
        blocks.append(Block([r - 1 for r in rows], [c - 1 for c in cols]))
    b = _int_list(doc, "b", m)
    c = _int_list(doc, "c", N)
    lower = _int_list(doc, "lower", N, nullable=True) if "lower" in doc else None
    upper = _int_list(doc, "upper", N, nullable=True) if "upper" in doc else None
    A = validate_structure(entries, blocks, N)
    build_tree(A)
    return Program(A, b, c, lower, upper)


def parse(text: str) -> Program:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"line {exc.lineno} column {exc.colno}", exc.msg) from exc
    return from_document(doc)


# --- multiset families ----------------------------------------------------------------------

@dataclass(frozen=True)
class MultisetFamily:
    d: int
    delta: int
    tree: MultistageTree
    sets: tuple[Multiset, ...]


def _parse_mult(x, where) -> Fraction:
    if _is_int(x):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise InstanceFormatError(where, f"bad rational {x!r}") from exc
    raise InstanceFormatError(where, f"expected 'num/den' string or integer, got {x!r}")


def _nested_to_zero_based(node, where):
    if not isinstance(node, dict) or "cols" not in node:
        raise InstanceFormatError(where, "expected {'cols': [...], 'children': [...]}")
    cols = node["cols"]
    if not isinstance(cols, list) or not all(_is_int(c) for c in cols):
        raise InstanceFormatError(f"{where}.cols", "expected integer list")
    kids = node.get("children", [])
    return {"cols": [c - 1 for c in cols],
            "children": [_nested_to_zero_based(ch, f"{where}.children[{k}]") for k, ch in enumerate(kids)]}


def parse_multisets(text: str) -> MultisetFamily:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"line {exc.lineno} column {exc.colno}", exc.msg) from exc
    if not isinstance(doc, dict):
        raise InstanceFormatError("<root>", "expected a JSON object")
    for key in ("d", "delta"):
        if not _is_int(doc.get(key)):
            raise InstanceFormatError(key, "expected integer")
    tree = tree_from_nested(_nested_to_zero_based(doc.get("tree"), "tree"))
    d = doc["d"]
    if tree.dims().width != d:
        raise InstanceFormatError("d", f"tree paths have {tree.dims().width} columns, d is {d}")
    raw = doc.get("sets")
    if not isinstance(raw, list) or len(raw) != tree.n:
        raise InstanceFormatError("sets", f"expected {tree.n} multisets, one per leaf")
    sets = []
    for i, items in enumerate(raw):
        mult: dict = {}
        if not isinstance(items, list):
            raise InstanceFormatError(f"sets[{i}]", "expected a list")
        for k, item in enumerate(items):
            where = f"sets[{i}][{k}]"
            if not isinstance(item, dict):
                raise InstanceFormatError(where, "expected {'v': [...], 'mult': ...}")
            v = _int_list(item, "v", d)
            key = tuple(v)
            mult[key] = mult.get(key, Fraction(0)) + _parse_mult(item.get("mult", 1), where + ".mult")
        sets.append(Multiset(mult, d))
    return MultisetFamily(d, doc["delta"], tree, tuple(sets))


def _nested_to_one_based(node):
    return {"cols": [c + 1 for c in node["cols"]], "children": [_nested_to_one_based(ch) for ch in node["children"]]}


def serialize_multisets(family: MultisetFamily) -> str:
    doc = {
        "d": family.d,
        "delta": family.delta,
        "tree": _nested_to_one_based(tree_to_nested(family.tree)),
        "sets": [[{"v": list(p), "mult": str(k)} for p, k in T.items()] for T in family.sets],
    }
    return json.dumps(doc) + "\n"
