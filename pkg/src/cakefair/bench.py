"""Benchmark harness: solve one instance across a mesh ladder and tabulate
mesh size, cells visited, time, and envy.

The envy column is the best envy achieved by any mesh up to that row, so it
is nonincreasing down the ladder; every row also carries the a-priori bound
2*D*(n-1)/K for its own mesh. All columns except time_ms are deterministic
for a fixed instance and configuration.
"""

from __future__ import annotations

import time
from fractions import Fraction
from typing import Optional, Sequence

from .cake import PiecewiseConstantValuation, ValuationDemand
from .errors import InputError
from .groups import GroupStructure, assemble_groups, lift_demand, verify_group_envy
from .rationals import rational_str
from .sperner import SearchStats, allocation_from_cell, find_fully_labeled

CSV_COLUMNS = ("instance", "n", "m", "mode", "mesh_k", "cells_visited",
               "envy", "envy_bound", "time_ms")
STABLE_COLUMNS = tuple(c for c in CSV_COLUMNS if c != "time_ms")


def bench_rows(name: str, valuations: Sequence[PiecewiseConstantValuation],
               sizes: Sequence[int], meshes: Sequence[int], *,
               mode: str = "auto", workers: int = 1,
               budget: Optional[int] = None) -> list[dict]:
    groups = GroupStructure(tuple(sizes))
    n, m = groups.n, groups.m
    if m < 2:
        raise InputError("bench needs at least two pieces to search over")
    inner = [ValuationDemand(v) for v in valuations]
    demands = [lift_demand(f, groups, player=t) for t, f in enumerate(inner, start=1)]
    d_max = max(v.max_density for v in valuations)
    rows = []
    best = None
    for mesh_k in meshes:
        stats = SearchStats()
        t0 = time.perf_counter()
        mode_used, lcell = find_fully_labeled(demands, mesh_k, mode=mode,
                                              workers=workers, budget=budget,
                                              stats=stats)
        elapsed_ms = (time.perf_counter() - t0) * 1000.0
        ind = allocation_from_cell(lcell)
        alloc = assemble_groups(ind.partition, ind.assignment, groups)
        envy = verify_group_envy(valuations, alloc, 0).max_envy
        best = envy if best is None else min(best, envy)
        bound = 2 * Fraction(d_max) * (n - 1) / mesh_k
        rows.append({
            "instance": name, "n": n, "m": m, "mode": mode_used,
            "mesh_k": mesh_k, "cells_visited": stats.cells_visited,
            "envy": rational_str(best), "envy_bound": rational_str(bound),
            "time_ms": f"{elapsed_ms:.3f}",
        })
    return rows


def rows_to_csv(rows, include_time=True) -> str:
    columns = CSV_COLUMNS if include_time else STABLE_COLUMNS
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(str(row[c]) for c in columns))
    return "\n".join(lines) + "\n"
