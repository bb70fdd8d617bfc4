"""Command line entry points: solve | verify | oracle | bench.

Exit codes: 0 success, 1 input error (or failed verification), 2 search
budget exceeded, 3 demand-contract violation. All configuration is explicit
flags or instance-file config; no environment variables are consulted.
"""

from __future__ import annotations

import argparse
import random
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from .bench import bench_rows, rows_to_csv
from .errors import BudgetExceededError, ContractViolationError, InputError
from .generators import random_valuations
from .groups import assemble_groups, solve_groups
from .instances import (Instance, Player, SolverConfig, allocation_from_result,
                        dump_json, load_instance, load_result, result_document,
                        verification_document)
from .oracle import (fixed_group_min_envy, grid_min_envy_groups,
                     grid_min_envy_individual)
from .rationals import decimal_str, parse_rational, rational_str


def _add_solver_flags(p):
    p.add_argument("--epsilon", help="envy tolerance as p/q (overrides the instance)")
    p.add_argument("--mesh", type=int, help="initial mesh K (default: from the envy bound)")
    p.add_argument("--mode", choices=("auto", "scan", "walk"), help="cell search mode")
    p.add_argument("--workers", type=int, help="worker count for the scan")
    p.add_argument("--budget-cells", type=int, dest="budget_cells",
                   help="abort after visiting this many cells")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cakefair",
        description="Envy-free contiguous cake divisions for individuals and ad-hoc groups.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="divide the cake for an instance file")
    p_solve.add_argument("instance", type=Path)
    _add_solver_flags(p_solve)
    p_solve.add_argument("--out", type=Path, help="result file path (default: stdout)")

    p_verify = sub.add_parser("verify", help="recompute the envy of a stored result")
    p_verify.add_argument("instance", type=Path)
    p_verify.add_argument("result", type=Path)
    p_verify.add_argument("--epsilon", help="tolerance as p/q (default: instance epsilon)")
    p_verify.add_argument("--out", type=Path, help="verification report path (default: stdout)")

    p_oracle = sub.add_parser("oracle", help="exact brute-force minimum envy on a grid")
    p_oracle.add_argument("instance", type=Path)
    p_oracle.add_argument("--resolution", type=int, default=16,
                          help="cuts restricted to multiples of 1/R (default 16)")
    p_oracle.add_argument("--mode", choices=("individual", "variable", "fixed"),
                          help="search mode (default: variable when groups exist)")
    p_oracle.add_argument("--out", type=Path, help="oracle report path (default: stdout)")

    p_bench = sub.add_parser("bench", help="mesh ladder benchmark with figure output")
    p_bench.add_argument("instance", nargs="?", type=Path,
                         help="instance file; omit to generate one from --seed")
    p_bench.add_argument("--seed", type=int, default=0, help="generator seed")
    p_bench.add_argument("--players", type=int, default=3,
                         help="generated player count (default 3)")
    p_bench.add_argument("--sizes", help="generated group sizes, e.g. 2,2 (default: all 1)")
    p_bench.add_argument("--mesh", help="comma-separated mesh ladder, e.g. 8,16,32")
    p_bench.add_argument("--mode", choices=("auto", "scan", "walk"), default="auto")
    p_bench.add_argument("--workers", type=int, default=1)
    p_bench.add_argument("--budget-cells", type=int, dest="budget_cells")
    p_bench.add_argument("--out", type=Path, help="CSV path; a .png figure lands alongside")
    p_bench.add_argument("--no-plot", action="store_true", help="skip the figure")
    return parser


def _emit(doc, out):
    text = dump_json(doc, out)
    if out is None:
        sys.stdout.write(text)


def _apply_overrides(instance, args):
    cfg = instance.config
    new_cfg = SolverConfig(
        mesh=args.mesh if args.mesh is not None else cfg.mesh,
        mode=args.mode if args.mode is not None else cfg.mode,
        budget=args.budget_cells if args.budget_cells is not None else cfg.budget,
        workers=args.workers if args.workers is not None else cfg.workers,
        seed=cfg.seed)
    epsilon = instance.epsilon
    if args.epsilon is not None:
        epsilon = parse_rational(args.epsilon, "--epsilon")
    return Instance(players=instance.players, sizes=instance.sizes, epsilon=epsilon,
                    fixed_membership=instance.fixed_membership, config=new_cfg)


def cmd_solve(args) -> int:
    instance = _apply_overrides(load_instance(args.instance), args)
    if instance.epsilon <= 0:
        raise InputError(f"solve needs epsilon > 0, got {instance.epsilon}")
    cfg = instance.config
    started = time.perf_counter()
    created = datetime.now(timezone.utc).isoformat(timespec="seconds")
    try:
        alloc = solve_groups(instance.groups, instance.epsilon,
                             valuations=instance.valuations, mesh=cfg.mesh,
                             mode=cfg.mode, workers=cfg.workers,
                             budget_cells=cfg.budget)
    except BudgetExceededError as exc:
        if exc.best_allocation is None:
            raise
        best = assemble_groups(exc.best_allocation.partition,
                               exc.best_allocation.assignment, instance.groups,
                               individual=exc.best_allocation)
        doc = result_document(instance, best, budget_exceeded=True,
                              timing_seconds=time.perf_counter() - started,
                              created=created)
        _emit(doc, args.out)
        print(f"cakefair: budget exceeded; best envy {doc['envy']['maxEnvy']}",
              file=sys.stderr)
        return 2
    doc = result_document(instance, alloc,
                          timing_seconds=time.perf_counter() - started,
                          created=created)
    _emit(doc, args.out)
    return 0 if doc["envy"]["pass"] else 2


def cmd_verify(args) -> int:
    instance = load_instance(args.instance)
    epsilon = instance.epsilon
    if args.epsilon is not None:
        epsilon = parse_rational(args.epsilon, "--epsilon")
    result = load_result(args.result)
    alloc = allocation_from_result(instance, result)
    doc = verification_document(instance, alloc, epsilon)
    _emit(doc, args.out)
    return 0 if doc["verification"]["pass"] else 1


def _cuts_doc(cuts):
    return {"cuts": [rational_str(c) for c in cuts.cuts],
            "cutsDecimal": [decimal_str(c) for c in cuts.cuts]}


def cmd_oracle(args) -> int:
    instance = load_instance(args.instance)
    mode = args.mode
    if mode is None:
        mode = "individual" if all(k == 1 for k in instance.sizes) else "variable"
    if mode == "individual":
        res = grid_min_envy_individual(instance.valuations, args.resolution)
    elif mode == "variable":
        res = grid_min_envy_groups(instance.valuations, instance.groups, args.resolution)
    else:
        res = fixed_group_min_envy(instance.valuations, instance.membership_indices(),
                                   args.resolution)
    names = instance.names
    doc = {
        "mode": res.mode,
        "resolution": res.grid.resolution,
        "minMaxEnvy": rational_str(res.min_max_envy),
        "minMaxEnvyDecimal": decimal_str(res.min_max_envy),
        "bestCuts": _cuts_doc(res.best_cuts),
        "bestOwner": {names[p - 1]: target for p, target in sorted(res.best_owner.items())},
        "argminCuts": [[rational_str(c) for c in cv.cuts] for cv in res.argmin_cuts],
    }
    _emit(doc, args.out)
    return 0


def _parse_meshes(text, n):
    if text is None:
        k0 = max(4, n)
        return [k0, 2 * k0, 4 * k0, 8 * k0]
    try:
        meshes = [int(part) for part in text.split(",") if part]
    except ValueError as exc:
        raise InputError(f"--mesh: expected comma-separated integers: {exc}") from exc
    if not meshes or any(k < 1 for k in meshes):
        raise InputError(f"--mesh: need positive mesh sizes, got {text!r}")
    return meshes


def cmd_bench(args) -> int:
    if args.instance is not None:
        instance = load_instance(args.instance)
        name = args.instance.stem
        valuations, sizes = instance.valuations, instance.sizes
    else:
        n = args.players
        if n < 2:
            raise InputError("--players must be at least 2")
        sizes = tuple(int(k) for k in args.sizes.split(",")) if args.sizes else (1,) * n
        if sum(sizes) != n:
            raise InputError(f"--sizes {sizes} must sum to --players {n}")
        valuations = random_valuations(random.Random(args.seed), n)
        name = f"gen-s{args.seed}-n{n}"
    meshes = _parse_meshes(args.mesh, len(valuations))
    rows = bench_rows(name, valuations, sizes, meshes, mode=args.mode,
                      workers=args.workers, budget=args.budget_cells)
    csv_text = rows_to_csv(rows)
    if args.out is None:
        sys.stdout.write(csv_text)
    else:
        args.out.write_text(csv_text)
        if not args.no_plot:
            from .plotting import render_bench_figure
            render_bench_figure(rows, args.out.with_suffix(".png"), title=name)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"solve": cmd_solve, "verify": cmd_verify,
                "oracle": cmd_oracle, "bench": cmd_bench}
    try:
        return handlers[args.command](args)
    except InputError as exc:
        print(f"cakefair: input error: {exc}", file=sys.stderr)
        return 1
    except BudgetExceededError as exc:
        print(f"cakefair: budget exceeded: {exc}", file=sys.stderr)
        return 2
    except ContractViolationError as exc:
        print(f"cakefair: contract violation: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
