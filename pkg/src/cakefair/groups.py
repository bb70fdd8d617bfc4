"""Dividing the cake among ad-hoc groups of prescribed sizes.

Players are not pre-assigned to groups. Each player's preference over the m
group pieces is lifted to a preference over n individual pieces: coarsen the
n-partition by uniting consecutive blocks of k_j pieces, ask the player which
coarse piece(s) they prefer, and demand the longest fine piece(s) inside each
preferred block. Solving the individual problem for the lifted demands and
uniting blocks again yields a group division no player envies.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .cake import (ContiguousPartition, DemandFunction, EnvyReport,
                   PiecewiseConstantValuation, ValuationDemand, envy_report)
from .errors import HungryViolationError, InputError
from .sperner import IndividualAllocation, SearchStats, solve_individual

ZERO = Fraction(0)


@dataclass(frozen=True)
class GroupStructure:
    """m group sizes k_1..k_m over n = sum(sizes) players/pieces.

    Block j is the consecutive 1-based index range (K_{j-1}, K_j] where K_j is
    the prefix sum of sizes."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(k) for k in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if not sizes or any(k < 1 for k in sizes):
            raise InputError(f"group sizes must be positive integers, got {sizes}")

    @property
    def m(self) -> int:
        return len(self.sizes)

    @property
    def n(self) -> int:
        return sum(self.sizes)

    @property
    def prefix_sums(self) -> tuple[int, ...]:
        acc = 0
        out = [0]
        for k in self.sizes:
            acc += k
            out.append(acc)
        return tuple(out)

    def block(self, j: int) -> range:
        """1-based piece indices belonging to group j."""
        if not 1 <= j <= self.m:
            raise InputError(f"group index {j} out of range 1..{self.m}")
        ps = self.prefix_sums
        return range(ps[j - 1] + 1, ps[j] + 1)

    def block_of(self, i: int) -> int:
        """The group whose block contains piece i."""
        if not 1 <= i <= self.n:
            raise InputError(f"piece index {i} out of range 1..{self.n}")
        for j, hi in enumerate(self.prefix_sums[1:], start=1):
            if i <= hi:
                return j
        raise AssertionError("unreachable")


@dataclass(frozen=True)
class GroupAllocation:
    """An m-piece partition with group j owning the j-th piece from the left,
    plus the player-to-group membership."""

    partition: ContiguousPartition
    membership: dict[int, int]  # player -> group
    groups: GroupStructure
    individual: Optional[IndividualAllocation] = None

    def members(self, j: int) -> tuple[int, ...]:
        return tuple(sorted(p for p, g in self.membership.items() if g == j))


def coarsen(x: ContiguousPartition, g: GroupStructure) -> ContiguousPartition:
    """Unite each block of consecutive pieces into one piece (exact sums)."""
    if x.arity != g.n:
        raise InputError(f"partition arity {x.arity} does not match n={g.n}")
    return ContiguousPartition(tuple(
        sum((x.lengths[i - 1] for i in g.block(j)), ZERO) for j in range(1, g.m + 1)))


class LiftedDemand(DemandFunction):
    """Per-player demand over n-partitions induced by an m-partition demand:
    coarsen, query the inner demand, then take the longest piece(s) inside
    each demanded block (exact ties kept)."""

    def __init__(self, inner: DemandFunction, groups: GroupStructure, player=None):
        self.inner = inner
        self.groups = groups
        self.player = player

    def demand(self, x: ContiguousPartition) -> frozenset[int]:
        g = self.groups
        y = coarsen(x, g)
        chosen = self.inner.demand(y)
        if not chosen:
            raise HungryViolationError(self.player, y)
        out = set()
        for j in chosen:
            if y.lengths[j - 1] == 0 and any(length > 0 for length in y.lengths):
                raise HungryViolationError(self.player, y, j)
            block = g.block(j)
            best = max(x.lengths[i - 1] for i in block)
            out.update(i for i in block if x.lengths[i - 1] == best)
        return frozenset(out)

    def demand_at_cuts(self, z: tuple[int, ...], mesh_k: int) -> frozenset[int]:
        g = self.groups
        zf = (0, *z, mesh_k)
        coarse = tuple(zf[p] for p in g.prefix_sums[1:-1])
        chosen = self.inner.demand_at_cuts(coarse, mesh_k)
        cf = (0, *coarse, mesh_k)
        if not chosen:
            raise HungryViolationError(self.player, coarse)
        out = set()
        for j in chosen:
            if cf[j] - cf[j - 1] == 0 and mesh_k > 0:
                raise HungryViolationError(self.player, coarse, j)
            block = g.block(j)
            best = max(zf[i] - zf[i - 1] for i in block)
            out.update(i for i in block if zf[i] - zf[i - 1] == best)
        return frozenset(out)


def lift_demand(f: DemandFunction, g: GroupStructure, player=None) -> DemandFunction:
    """Lift an m-piece demand to an n-piece demand through the block structure."""
    return LiftedDemand(f, g, player)


def assemble_groups(x_star: ContiguousPartition, assignment: dict[int, int],
                    g: GroupStructure,
                    individual: Optional[IndividualAllocation] = None) -> GroupAllocation:
    """Turn an individual solution into a group allocation: the player holding
    piece i joins the group whose block contains i, and group j receives the
    j-th coarse piece. Block sizes force each group to have exactly k_j members."""
    if sorted(assignment) != list(range(1, g.n + 1)) or \
            sorted(assignment.values()) != list(range(1, g.n + 1)):
        raise InputError(f"assignment must be a bijection on 1..{g.n}, got {assignment}")
    membership = {player: g.block_of(piece) for player, piece in assignment.items()}
    return GroupAllocation(partition=coarsen(x_star, g), membership=membership,
                           groups=g, individual=individual)


def verify_group_envy(valuations: Sequence[PiecewiseConstantValuation],
                      alloc: GroupAllocation, eps) -> EnvyReport:
    """Exact envy of every player for their group's piece against all group
    pieces; eps = 0 checks exact envy-freeness."""
    if len(valuations) != len(alloc.membership):
        raise InputError("one valuation per player required")
    return envy_report(valuations, alloc.partition, alloc.membership, eps)


def solve_groups(groups: GroupStructure, eps=None, *,
                 valuations: Optional[Sequence[PiecewiseConstantValuation]] = None,
                 demands: Optional[Sequence[DemandFunction]] = None,
                 mesh: Optional[int] = None, mode: str = "auto", workers: int = 1,
                 budget_cells=None, stats: Optional[SearchStats] = None) -> GroupAllocation:
    """Divide the cake among ad-hoc groups of the prescribed sizes.

    Pass per-player valuations (envy-driven: the result's verify_group_envy
    passes at eps) or abstract per-player demands over m-partitions (the
    result carries the mesh certificate instead; see SolveCertificate).
    Unit sizes reproduce solve_individual exactly.
    """
    n, m = groups.n, groups.m
    if valuations is not None:
        if len(valuations) != n:
            raise InputError(f"expected {n} valuations, got {len(valuations)}")
        inner = [ValuationDemand(v) for v in valuations]
    elif demands is not None:
        if len(demands) != n:
            raise InputError(f"expected {n} demands, got {len(demands)}")
        inner = list(demands)
    else:
        raise InputError("solve_groups needs valuations or demands")

    if m == 1:
        partition = ContiguousPartition((Fraction(1),))
        return GroupAllocation(partition=partition,
                               membership={p: 1 for p in range(1, n + 1)},
                               groups=groups, individual=None)

    lifted = [lift_demand(f, groups, player=t) for t, f in enumerate(inner, start=1)]
    kwargs = dict(mesh=mesh, mode=mode, workers=workers, stats=stats)
    if budget_cells is not None:
        kwargs["budget_cells"] = budget_cells

    if valuations is not None:
        eps_f = Fraction(eps)
        vals = list(valuations)

        def group_envy(ind_alloc):
            assembled = assemble_groups(ind_alloc.partition, ind_alloc.assignment,
                                        groups, individual=ind_alloc)
            return verify_group_envy(vals, assembled, eps_f).max_envy

        ind = solve_individual(lifted, eps_f, envy_of=group_envy,
                               max_density=max(v.max_density for v in vals), **kwargs)
    else:
        ind = solve_individual(lifted, **kwargs)
    return assemble_groups(ind.partition, ind.assignment, groups, individual=ind)
