"""Independent brute-force ground truth for small instances.

Everything here enumerates exhaustively on a 1/R grid with exact arithmetic
and never calls the simplicial solver, so it can serve as an oracle for it.
Deliberately capped in size; refuse rather than crawl.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .cake import ContiguousPartition, CutVector, PiecewiseConstantValuation, partition_from_cuts
from .errors import InputError, OracleCapError
from .generators import random_valuations
from .groups import GroupStructure, GroupAllocation, assemble_groups, coarsen, verify_group_envy

ZERO = Fraction(0)

DEFAULT_PLAYER_CAP = 4
DEFAULT_RESOLUTION_CAP = 64


@dataclass(frozen=True)
class GridSpec:
    """Cut positions restricted to multiples of 1/resolution."""

    resolution: int

    def __post_init__(self):
        if self.resolution < 1:
            raise InputError(f"grid resolution must be >= 1, got {self.resolution}")


@dataclass(frozen=True)
class OracleResult:
    mode: str  # individual | variable | fixed
    grid: GridSpec
    min_max_envy: Fraction
    best_cuts: CutVector
    best_owner: dict[int, int]  # player -> piece (individual/fixed) or group (variable)
    argmin_cuts: tuple[CutVector, ...]


def _check_caps(n, pieces, resolution, player_cap, resolution_cap, assignments):
    if n > player_cap or resolution > resolution_cap:
        cuts = _count_cuts(resolution, pieces)
        raise OracleCapError(
            f"oracle request n={n}, R={resolution} exceeds caps "
            f"(players<={player_cap}, R<={resolution_cap}); this search would "
            f"visit about {cuts} grid cuts x {assignments} assignments")


def _count_cuts(resolution, pieces):
    from math import comb
    return comb(resolution + pieces - 1, pieces - 1)


def _prefix_tables(valuations, resolution):
    return [[v.prefix(Fraction(j, resolution)) for j in range(resolution + 1)]
            for v in valuations]


def _iter_grid_cuts(resolution, pieces):
    # Nondecreasing index tuples, lexicographic; cut vector = indices / R.
    return itertools.combinations_with_replacement(range(resolution + 1), pieces - 1)


def _piece_values(table, zf):
    return [table[b] - table[a] for a, b in zip(zf, zf[1:])]


def _to_cut_vector(z, resolution):
    return CutVector(tuple(Fraction(j, resolution) for j in z))


def grid_min_envy_individual(valuations: Sequence[PiecewiseConstantValuation],
                             resolution: int, *, player_cap: int = DEFAULT_PLAYER_CAP,
                             resolution_cap: int = DEFAULT_RESOLUTION_CAP) -> OracleResult:
    """Exact minimum over all grid cut vectors and all player-to-piece
    bijections of the maximum envy."""
    n = len(valuations)
    GridSpec(resolution)
    import math
    _check_caps(n, n, resolution, player_cap, resolution_cap, math.factorial(n))
    tables = _prefix_tables(valuations, resolution)
    perms = list(itertools.permutations(range(n)))
    best = None
    best_cuts = None
    best_owner = None
    argmin = []
    for z in _iter_grid_cuts(resolution, n):
        zf = (0, *z, resolution)
        values = [_piece_values(t, zf) for t in tables]
        tops = [max(row) for row in values]
        cut_best = None
        cut_owner = None
        for perm in perms:  # perm[i] = 0-based piece of player i
            worst = max(tops[i] - values[i][perm[i]] for i in range(n))
            if cut_best is None or worst < cut_best:
                cut_best = worst
                cut_owner = perm
        if best is None or cut_best < best:
            best = cut_best
            best_cuts = z
            best_owner = cut_owner
            argmin = [z]
        elif cut_best == best:
            argmin.append(z)
    owner = {i + 1: cut_owner_piece + 1 for i, cut_owner_piece in enumerate(best_owner)}
    return OracleResult(mode="individual", grid=GridSpec(resolution),
                        min_max_envy=best,
                        best_cuts=_to_cut_vector(best_cuts, resolution),
                        best_owner=owner,
                        argmin_cuts=tuple(_to_cut_vector(z, resolution) for z in argmin))


def _minmax_capacity_assignment(envies, sizes):
    """Assign players to groups respecting capacities, minimizing the maximum
    envy; exact, with deterministic lexicographically-smallest tie-breaks."""
    n = len(envies)
    memo = {}

    def best_value(i, caps):
        if i == n:
            return ZERO
        key = (i, caps)
        val = memo.get(key)
        if val is None:
            val = None
            for j, cap in enumerate(caps):
                if cap == 0:
                    continue
                sub = best_value(i + 1, caps[:j] + (cap - 1,) + caps[j + 1:])
                cand = max(envies[i][j], sub)
                if val is None or cand < val:
                    val = cand
            memo[key] = val
        return val

    caps = tuple(sizes)
    value = best_value(0, caps)
    assignment = {}
    for i in range(n):
        for j, cap in enumerate(caps):
            if cap == 0:
                continue
            rest = best_value(i + 1, caps[:j] + (cap - 1,) + caps[j + 1:])
            if max(envies[i][j], rest) == value:
                assignment[i + 1] = j + 1
                caps = caps[:j] + (cap - 1,) + caps[j + 1:]
                break
    return value, assignment


def grid_min_envy_groups(valuations: Sequence[PiecewiseConstantValuation],
                         groups: GroupStructure, resolution: int, *,
                         player_cap: int = DEFAULT_PLAYER_CAP,
                         resolution_cap: int = DEFAULT_RESOLUTION_CAP) -> OracleResult:
    """Exact minimum of max envy over grid m-cuts and all capacity-respecting
    player-to-group assignments (groups formed freely)."""
    n, m = groups.n, groups.m
    if len(valuations) != n:
        raise InputError(f"expected {n} valuations, got {len(valuations)}")
    GridSpec(resolution)
    _check_caps(n, m, resolution, player_cap, resolution_cap,
                f"<= {m}^{n} capacity-respecting")
    tables = _prefix_tables(valuations, resolution)
    best = None
    best_cuts = None
    best_owner = None
    argmin = []
    for z in _iter_grid_cuts(resolution, m):
        zf = (0, *z, resolution)
        values = [_piece_values(t, zf) for t in tables]
        envies = [[max(row) - row[j] for j in range(m)] for row in values]
        value, assignment = _minmax_capacity_assignment(envies, groups.sizes)
        if best is None or value < best:
            best = value
            best_cuts = z
            best_owner = assignment
            argmin = [z]
        elif value == best:
            argmin.append(z)
    return OracleResult(mode="variable", grid=GridSpec(resolution),
                        min_max_envy=best,
                        best_cuts=_to_cut_vector(best_cuts, resolution),
                        best_owner=best_owner,
                        argmin_cuts=tuple(_to_cut_vector(z, resolution) for z in argmin))


def fixed_group_min_envy(valuations: Sequence[PiecewiseConstantValuation],
                         membership: Sequence[int], resolution: int, *,
                         player_cap: int = DEFAULT_PLAYER_CAP,
                         resolution_cap: int = DEFAULT_RESOLUTION_CAP) -> OracleResult:
    """Exact minimum of max envy when the groups are frozen in advance: only
    the cuts and the group-to-piece order may vary."""
    n = len(valuations)
    if len(membership) != n:
        raise InputError("one group index per player required")
    m = max(membership)
    if sorted(set(membership)) != list(range(1, m + 1)):
        raise InputError(f"membership must use group indices 1..{m}, got {membership}")
    GridSpec(resolution)
    import math
    _check_caps(n, m, resolution, player_cap, resolution_cap, math.factorial(m))
    tables = _prefix_tables(valuations, resolution)
    orders = list(itertools.permutations(range(m)))
    best = None
    best_cuts = None
    best_owner = None
    argmin = []
    for z in _iter_grid_cuts(resolution, m):
        zf = (0, *z, resolution)
        values = [_piece_values(t, zf) for t in tables]
        tops = [max(row) for row in values]
        cut_best = None
        cut_owner = None
        for order in orders:  # order[g] = 0-based piece of group g+1
            worst = max(tops[i] - values[i][order[membership[i] - 1]] for i in range(n))
            if cut_best is None or worst < cut_best:
                cut_best = worst
                cut_owner = order
        if best is None or cut_best < best:
            best = cut_best
            best_cuts = z
            best_owner = cut_owner
            argmin = [z]
        elif cut_best == best:
            argmin.append(z)
    owner = {i + 1: best_owner[membership[i] - 1] + 1 for i in range(n)}
    return OracleResult(mode="fixed", grid=GridSpec(resolution),
                        min_max_envy=best,
                        best_cuts=_to_cut_vector(best_cuts, resolution),
                        best_owner=owner,
                        argmin_cuts=tuple(_to_cut_vector(z, resolution) for z in argmin))


@dataclass(frozen=True)
class NaiveReductionExample:
    """An instance where an exactly envy-free individual division, grouped by
    consecutive blocks, leaves some player envious of another block."""

    valuations: tuple[PiecewiseConstantValuation, ...]
    sizes: tuple[int, ...]
    cuts: CutVector
    assignment: dict[int, int]  # player -> individual piece
    blocked_allocation: GroupAllocation
    group_envy: Fraction


def naive_reduction_counterexample_search(seed: int, trials: int, *,
                                          sizes=(2, 2), resolution: int = 16,
                                          ) -> Optional[NaiveReductionExample]:
    """Search random instances for one where block-grouping an exactly
    envy-free individual division is not group envy-free.

    Uses the individual grid oracle to certify exact envy-freeness of the
    division being blocked, so any positive group envy is a genuine failure of
    the reduction rather than approximation noise.
    """
    groups = GroupStructure(sizes)
    rng = random.Random(seed)
    for _ in range(trials):
        valuations = random_valuations(rng, groups.n)
        res = grid_min_envy_individual(valuations, resolution)
        if res.min_max_envy != 0:
            continue
        x = partition_from_cuts(res.best_cuts)
        alloc = assemble_groups(x, res.best_owner, groups)
        report = verify_group_envy(valuations, alloc, ZERO)
        if report.max_envy > 0:
            return NaiveReductionExample(
                valuations=tuple(valuations), sizes=tuple(sizes),
                cuts=res.best_cuts, assignment=res.best_owner,
                blocked_allocation=alloc, group_envy=report.max_envy)
    return None
