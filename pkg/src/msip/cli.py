"""Command line entry point ``msip``.

Exit codes: 0 success, 1 domain error (bad structure, bad input, infeasible
certificate requests), 2 usage error, 3 budget exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence

from .exact import OPTIMAL
from .graver import BudgetExceeded, graver_basis, graver_complexity
from .instances import (GenParams, InstanceFormatError, generate, parse, parse_multisets, serialize)
from .multisets import bound_constants, find_small_valid_submultisets, rho_valid
from .solver import (brute_force_ilp, graver_norm_experiment, proximity_experiment, solve_augmentation)
from .structure import StructureError, build_tree, leaf_matrix

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

SWEEP_COLUMNS = ["instance_id", "d", "t", "delta", "n", "N", "g_inf", "column_bound",
                 "dist_inf", "lemma33_bound", "steps", "max_step_norm"]

# default corpus shapes for ``sweep``: (t, s, branching); all have N <= 7
DESK_SHAPES = [
    (0, (3,), 1),
    (1, (1, 1), 2),
    (1, (1, 1), 3),
    (1, (2, 1), 2),
    (1, (1, 2), 2),
    (1, (1, 1), 4),
    (1, (2, 2), 2),
    (1, (1, 2), 3),
    (2, (1, 1, 1), 2),
]


class UsageError(Exception):
    pass


def _budget(args) -> dict:
    return {} if args.budget is None else {"budget": args.budget}


def _load(path: str):
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def _frac(x) -> str:
    return str(Fraction(x))


def _emit(payload, fmt: str, out):
    if fmt == "json":
        out.write(json.dumps(payload, indent=2) + "\n")
    else:
        w = csv.writer(out, lineterminator="\n")
        if isinstance(payload, list):
            w.writerow(list(payload[0].keys()) if payload else [])
            for row in payload:
                w.writerow(row.values())
        else:
            w.writerow(payload.keys())
            w.writerow(payload.values())


def _box(args, required=True):
    if args.box_lo is None or args.box_hi is None:
        if required:
            raise UsageError("--box-lo and --box-hi are required")
        return None
    return args.box_lo, args.box_hi


def cmd_validate(args, out):
    P = _load(args.instance)
    tree, dims = build_tree(P.A)
    _emit({
        "valid": True, "m": P.A.nrows, "N": P.ncols, "delta": P.A.delta,
        "t": dims.t, "n": dims.n, "s": list(dims.s), "d": list(dims.d), "r": dims.r,
        "leaves": [[c + 1 for c in tree.path_columns(i)] for i in range(tree.n)],
    }, args.format, out)


def cmd_graver(args, out):
    P = _load(args.instance)
    if args.submatrix is not None:
        tree, dims = build_tree(P.A)
        if not 1 <= args.submatrix <= tree.n:
            raise UsageError(f"--submatrix must be in 1..{tree.n}")
        A = leaf_matrix(P.A, tree, args.submatrix - 1)
        ncols = dims.width
    else:
        A, ncols = P.A.rows_list(), P.ncols
    G = graver_basis(A, ncols=ncols, **_budget(args))
    if args.format == "json":
        _emit({"elements": [list(g) for g in G.elements], "g_inf": graver_complexity(G),
               "norm_bound": str(G.norm_bound)}, "json", out)
        return
    if args.format == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow([f"x{j + 1}" for j in range(ncols)])
        w.writerows(G.elements)
        return
    for g in G.elements:
        out.write("(" + ", ".join(map(str, g)) + ")\n")
    out.write(f"g_inf={graver_complexity(G)}\n")
    out.write(f"norm_bound={G.norm_bound}\n")


def _report_dict(rep):
    return {
        "status": rep.status,
        "x": None if rep.x is None else list(rep.x),
        "objective": rep.objective,
        "steps": [{"g": list(g), "lambda": lam} for g, lam in rep.steps],
        "max_step_norm": rep.max_step_norm,
    }


def cmd_solve(args, out):
    box = _box(args)
    P = _load(args.instance)
    kw = {} if args.budget is None else {"budget": args.budget}
    if args.method == "brute":
        rep = brute_force_ilp(P, box, **kw)
    else:
        gkw = {} if args.budget is None else {"graver_budget": args.budget, "box_budget": args.budget}
        rep = solve_augmentation(P, box, **gkw)
    _emit(_report_dict(rep), args.format, out)
    if rep.status == "BudgetExceeded":
        return EXIT_BUDGET
    return EXIT_OK


def _proximity_dict(rep):
    return {
        "status": rep.status,
        "x_frac": None if rep.x_frac is None else [_frac(v) for v in rep.x_frac],
        "x_int": None if rep.x_int is None else list(rep.x_int),
        "dist_inf": None if rep.dist_inf is None else _frac(rep.dist_inf),
        "proximity_bound": str(rep.column_bound),
        "within_bound": rep.within_bound,
        "d": rep.params[0], "delta": rep.params[1], "t": rep.params[2],
    }


def cmd_proximity(args, out):
    box = _box(args)
    P = _load(args.instance)
    rep = proximity_experiment(P, box, **_budget(args))
    _emit(_proximity_dict(rep), args.format, out)
    return EXIT_BUDGET if rep.status == "BudgetExceeded" else EXIT_OK


def cmd_graver_exp(args, out):
    P = _load(args.instance)
    rep = graver_norm_experiment(P.A, **_budget(args))
    _emit({"g_inf": rep.g_inf, "column_bound": str(rep.column_bound), "d": rep.d, "delta": rep.delta,
           "t": rep.t, "n": rep.n, "N": rep.ncols, "basis_size": rep.basis_size,
           "asymptotic_bound": rep.asymptotic_bound}, args.format, out)


def cmd_submultisets(args, out):
    with open(args.multisets, encoding="utf-8") as fh:
        fam = parse_multisets(fh.read())
    kw = {} if args.budget is None else {"budget": args.budget}
    w = find_small_valid_submultisets(fam.tree, fam.sets, args.max_card, delta=fam.delta, **kw)
    if w is None:
        _emit({"found": False, "max_card": args.max_card}, args.format, out)
        return EXIT_OK
    payload = {
        "found": True,
        "max_card": args.max_card,
        "bhat": list(w.bhat),
        "sets": [[{"v": list(p), "mult": str(k)} for p, k in S.items()] for S in w.S],
        "valid": rho_valid(fam.tree, w.bhat, 1, w.S),
    }
    _emit(payload, args.format, out)
    return EXIT_OK


def cmd_bounds(args, out):
    table = bound_constants(args.d, args.delta, args.t, Fraction(args.rho), args.k1)
    payload = table.as_dict()
    if args.format in ("json", "csv"):
        _emit(payload, args.format, out)
    else:
        for k, v in payload.items():
            out.write(f"{k}={v}\n")


def _int_pair(text: str) -> tuple[int, int]:
    lo, hi = (int(x) for x in text.split(","))
    return lo, hi


def _int_tuple(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(","))


def cmd_gen(args, out):
    if len(args.s) != args.t + 1:
        raise UsageError("--s needs t+1 comma-separated widths")
    p = GenParams(t=args.t, s=args.s, branching=args.branching, r=args.r, delta=args.delta,
                  b_range=args.b_range, c_range=args.c_range, seed=args.seed, x0_range=args.x0_range)
    text = serialize(generate(p))
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        out.write(text)


def sweep_row(P, instance_id: str, box, budget: Optional[int] = None) -> dict:
    """One CSV row: Graver norm, proximity and augmentation statistics of an instance."""
    gkw = {} if budget is None else {"budget": budget}
    G = graver_basis(P.A.rows_list(), ncols=P.ncols, **gkw)
    gexp = graver_norm_experiment(P.A, basis=G)
    prox = proximity_experiment(P, box, **gkw)
    sol = solve_augmentation(P, box, basis=G)
    if "BudgetExceeded" in (prox.status, sol.status):
        raise BudgetExceeded(f"instance {instance_id} exceeded the budget")
    return {
        "instance_id": instance_id,
        "d": gexp.d, "t": gexp.t, "delta": gexp.delta, "n": gexp.n, "N": gexp.ncols,
        "g_inf": gexp.g_inf, "column_bound": gexp.column_bound,
        "dist_inf": _frac(prox.dist_inf) if prox.dist_inf is not None else "NA",
        "lemma33_bound": prox.column_bound,
        "steps": len(sol.steps) if sol.status == OPTIMAL else "NA",
        "max_step_norm": sol.max_step_norm if sol.status == OPTIMAL else "NA",
    }


def sweep_params(k: int, args) -> GenParams:
    if args.s is not None:
        t, s, branching = args.t, args.s, args.branching
    else:
        t, s, branching = DESK_SHAPES[k % len(DESK_SHAPES)]
    delta = args.delta if args.delta is not None else 1 + (k // len(DESK_SHAPES)) % 2
    return GenParams(t=t, s=tuple(s), branching=branching, r=args.r, delta=delta,
                     c_range=args.c_range, seed=args.seed + k, x0_range=(args.box_lo, args.box_hi))


def cmd_sweep(args, out):
    box = _box(args)
    rows = []
    for k in range(args.count):
        P = generate(sweep_params(k, args))
        rows.append(sweep_row(P, f"seed{args.seed + k}", box, args.budget))
    if args.format == "json":
        _emit(rows, "json", out)
        return
    w = csv.DictWriter(out, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="msip", description="Exact tools for multistage stochastic integer programs.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv"], default=None)
    common.add_argument("--budget", type=int, default=None, help="cap on enumeration/completion work")
    sub = ap.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("validate", parents=[common], help="check structure, print the tree summary")
    p.add_argument("instance")
    p.set_defaults(func=cmd_validate, default_format="json")

    p = sub.add_parser("graver", parents=[common], help="Graver basis of A or of a leaf submatrix")
    p.add_argument("instance")
    p.add_argument("--submatrix", type=int, default=None, help="leaf number (1-based)")
    p.set_defaults(func=cmd_graver, default_format="text")

    def box_args(p):
        p.add_argument("--box-lo", type=int, default=None)
        p.add_argument("--box-hi", type=int, default=None)

    p = sub.add_parser("solve", parents=[common], help="solve an instance inside a box")
    p.add_argument("instance")
    p.add_argument("--method", choices=["augment", "brute"], default="augment")
    box_args(p)
    p.set_defaults(func=cmd_solve, default_format="json")

    p = sub.add_parser("proximity", parents=[common], help="LP/IP proximity inside a box")
    p.add_argument("instance")
    box_args(p)
    p.set_defaults(func=cmd_proximity, default_format="json")

    p = sub.add_parser("graver-exp", parents=[common], help="Graver norm against the column bound")
    p.add_argument("instance")
    p.set_defaults(func=cmd_graver_exp, default_format="json")

    p = sub.add_parser("lemma42", parents=[common], help="search small valid submultisets")
    p.add_argument("multisets")
    p.add_argument("--max-card", type=int, required=True)
    p.set_defaults(func=cmd_submultisets, default_format="json")

    p = sub.add_parser("bounds", parents=[common], help="exact bound constants")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--k1", type=int, default=1)
    p.add_argument("--rho", default="1")
    p.set_defaults(func=cmd_bounds, default_format="text")

    p = sub.add_parser("gen", parents=[common], help="generate a seeded instance")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--s", type=_int_tuple, required=True)
    p.add_argument("--branching", type=int, default=2)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--delta", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--b-range", type=_int_pair, default=(-3, 3))
    p.add_argument("--c-range", type=_int_pair, default=(-3, 3))
    p.add_argument("--x0-range", type=_int_pair, default=None,
                   help="draw x0 from this range and set b = A x0")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_gen, default_format="json")

    p = sub.add_parser("sweep", parents=[common], help="run a seeded corpus, emit CSV")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--t", type=int, default=1)
    p.add_argument("--s", type=_int_tuple, default=None, help="fixed widths; default cycles desk shapes")
    p.add_argument("--branching", type=int, default=2)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--delta", type=int, default=None)
    p.add_argument("--c-range", type=_int_pair, default=(-3, 3))
    box_args(p)
    p.set_defaults(func=cmd_sweep, default_format="csv")
    return ap


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.command is None:
        parser.print_help(err)
        return EXIT_USAGE
    if args.format is None:
        args.format = args.default_format
    buf = io.StringIO()
    try:
        code = args.func(args, buf)
    except UsageError as exc:
        err.write(f"msip {args.command}: usage error: {exc}\n")
        return EXIT_USAGE
    except BudgetExceeded as exc:
        err.write(f"msip {args.command}: budget exceeded: {exc}\n")
        return EXIT_BUDGET
    except (StructureError, InstanceFormatError, ValueError, TypeError, OSError) as exc:
        err.write(f"msip {args.command}: error: {exc}\n")
        return EXIT_DOMAIN
    # output is buffered so that a failing command never leaves partial rows behind
    out.write(buf.getvalue())
    return EXIT_OK if code is None else code


def run():
    sys.exit(main())

