"""Cake model: contiguous partitions of [0,1], exact piecewise-constant
valuations, and demand functions over partitions.

All quantities are exact rationals. Pieces are indexed 1..p from the left.
Every type here is immutable and safe to share across workers.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import HungryViolationError, InputError

ZERO = Fraction(0)
ONE = Fraction(1)


def _fractions(values, where):
    out = []
    for v in values:
        if isinstance(v, Fraction):
            out.append(v)
        elif isinstance(v, int):
            out.append(Fraction(v))
        elif isinstance(v, str):
            out.append(Fraction(v))
        else:
            raise InputError(f"{where}: expected exact rationals, got {type(v).__name__}")
    return tuple(out)


@dataclass(frozen=True)
class ContiguousPartition:
    """A division of [0,1] into consecutive pieces, stored as piece lengths."""

    lengths: tuple[Fraction, ...]

    def __post_init__(self):
        lengths = _fractions(self.lengths, "partition lengths")
        object.__setattr__(self, "lengths", lengths)
        if not lengths:
            raise InputError("partition needs at least one piece")
        if any(x < 0 for x in lengths):
            raise InputError(f"negative piece length in {lengths}")
        if sum(lengths) != 1:
            raise InputError(f"piece lengths must sum to exactly 1, got {sum(lengths)}")

    @property
    def arity(self) -> int:
        return len(self.lengths)

    def piece_interval(self, i: int) -> tuple[Fraction, Fraction]:
        """Endpoints of piece i (1-based)."""
        if not 1 <= i <= self.arity:
            raise InputError(f"piece index {i} out of range 1..{self.arity}")
        left = sum(self.lengths[: i - 1], ZERO)
        return left, left + self.lengths[i - 1]


@dataclass(frozen=True)
class CutVector:
    """The p-1 sorted cut positions of a p-piece contiguous partition."""

    cuts: tuple[Fraction, ...]

    def __post_init__(self):
        cuts = _fractions(self.cuts, "cuts")
        object.__setattr__(self, "cuts", cuts)
        prev = ZERO
        for c in cuts:
            if c < prev:
                raise InputError(f"cuts must be nondecreasing within [0,1], got {cuts}")
            prev = c
        if prev > 1:
            raise InputError(f"cuts must lie in [0,1], got {cuts}")

    @property
    def arity(self) -> int:
        return len(self.cuts) + 1


def partition_from_cuts(c: CutVector) -> ContiguousPartition:
    """Piece lengths between consecutive cuts, with sentinels 0 and 1."""
    bounds = (ZERO,) + c.cuts + (ONE,)
    return ContiguousPartition(tuple(bounds[i + 1] - bounds[i] for i in range(len(bounds) - 1)))


def cuts_from_partition(x: ContiguousPartition) -> CutVector:
    """Inverse of partition_from_cuts: prefix sums of the lengths."""
    acc = ZERO
    cuts = []
    for length in x.lengths[:-1]:
        acc += length
        cuts.append(acc)
    return CutVector(tuple(cuts))


class PiecewiseConstantValuation:
    """A normalized piecewise-constant density on [0,1].

    breakpoints: strictly increasing rationals from 0 to 1.
    densities: one nonnegative rational per segment; the integral must be
    exactly 1 (use `normalized` to rescale arbitrary nonnegative weights).
    """

    __slots__ = ("breakpoints", "densities", "_cum")

    def __init__(self, breakpoints, densities):
        breakpoints = _fractions(breakpoints, "breakpoints")
        densities = _fractions(densities, "densities")
        if len(breakpoints) < 2 or breakpoints[0] != 0 or breakpoints[-1] != 1:
            raise InputError(f"breakpoints must run from 0 to 1, got {breakpoints}")
        if any(b >= c for b, c in zip(breakpoints, breakpoints[1:])):
            raise InputError(f"breakpoints must be strictly increasing, got {breakpoints}")
        if len(densities) != len(breakpoints) - 1:
            raise InputError(
                f"need {len(breakpoints) - 1} densities for {len(breakpoints)} breakpoints, "
                f"got {len(densities)}")
        if any(d < 0 for d in densities):
            raise InputError(f"densities must be nonnegative, got {densities}")
        cum = [ZERO]
        for (b, c), d in zip(zip(breakpoints, breakpoints[1:]), densities):
            cum.append(cum[-1] + d * (c - b))
        if cum[-1] != 1:
            raise InputError(
                f"density must integrate to exactly 1, got {cum[-1]} "
                "(pass normalize or use PiecewiseConstantValuation.normalized)")
        self.breakpoints = breakpoints
        self.densities = densities
        self._cum = tuple(cum)

    @classmethod
    def normalized(cls, breakpoints, densities):
        """Rescale nonnegative densities so they integrate to exactly 1."""
        breakpoints = _fractions(breakpoints, "breakpoints")
        densities = _fractions(densities, "densities")
        if len(densities) != len(breakpoints) - 1:
            raise InputError("breakpoint/density length mismatch")
        total = sum((d * (c - b) for (b, c), d in
                     zip(zip(breakpoints, breakpoints[1:]), densities)), ZERO)
        if total <= 0:
            raise InputError("cannot normalize an everywhere-zero density")
        return cls(breakpoints, tuple(d / total for d in densities))

    @classmethod
    def uniform(cls):
        return cls((ZERO, ONE), (ONE,))

    def __eq__(self, other):
        return (isinstance(other, PiecewiseConstantValuation)
                and self.breakpoints == other.breakpoints
                and self.densities == other.densities)

    def __hash__(self):
        return hash((self.breakpoints, self.densities))

    def __repr__(self):
        return f"PiecewiseConstantValuation({self.breakpoints!r}, {self.densities!r})"

    @property
    def max_density(self) -> Fraction:
        return max(self.densities)

    def prefix(self, t: Fraction) -> Fraction:
        """Exact measure of [0, t]."""
        if not 0 <= t <= 1:
            raise InputError(f"point {t} outside [0,1]")
        j = bisect_right(self.breakpoints, t) - 1
        if j >= len(self.densities):
            return self._cum[-1]
        return self._cum[j] + self.densities[j] * (t - self.breakpoints[j])

    def value(self, a: Fraction, b: Fraction) -> Fraction:
        """Exact measure of [a, b]; requires a <= b."""
        a, b = Fraction(a), Fraction(b)
        if a > b:
            raise InputError(f"malformed interval: a={a} > b={b}")
        return self.prefix(b) - self.prefix(a)

    def piece_values(self, x: ContiguousPartition) -> tuple[Fraction, ...]:
        """Exact value of every piece of a partition."""
        acc = ZERO
        out = []
        prev = self.prefix(ZERO)
        for length in x.lengths:
            acc += length
            nxt = self.prefix(acc)
            out.append(nxt - prev)
            prev = nxt
        return tuple(out)


def measure_value(v: PiecewiseConstantValuation, a, b) -> Fraction:
    """Exact value of the interval [a, b] under valuation v."""
    return v.value(a, b)


class DemandFunction:
    """Maps a p-piece partition to the nonempty set of preferred piece indices.

    Behavioral contract (not machine-checkable for arbitrary subclasses):
      - the returned set is nonempty;
      - hungry: a zero-length piece is never preferred while a positive piece
        exists;
      - closed preference sets: a piece preferred along a convergent sequence
        of partitions is preferred at the limit. The library verifies this
        only for its own valuation-backed demands (by continuity of the
        measure); user subclasses declare it by inheriting this class.
    """

    def demand(self, x: ContiguousPartition) -> frozenset[int]:
        raise NotImplementedError

    def demand_at_cuts(self, z: tuple[int, ...], mesh_k: int) -> frozenset[int]:
        """Demand at the lattice cut vector z / mesh_k.

        Subclasses may override with an exact fast path; the default builds
        the partition and defers to demand().
        """
        cuts = CutVector(tuple(Fraction(zi, mesh_k) for zi in z))
        return self.demand(partition_from_cuts(cuts))


class ValuationDemand(DemandFunction):
    """Demand induced by a valuation: the exact argmax set of piece values."""

    def __init__(self, valuation: PiecewiseConstantValuation):
        self.valuation = valuation
        self._tables: dict[int, list[int]] = {}

    def demand(self, x: ContiguousPartition) -> frozenset[int]:
        values = self.valuation.piece_values(x)
        best = max(values)
        return frozenset(i + 1 for i, val in enumerate(values) if val == best)

    def _grid_table(self, mesh_k: int) -> list[int]:
        # Prefix measures at j/mesh_k, cleared to a common integer denominator
        # so piece comparisons on the lattice are plain int comparisons.
        table = self._tables.get(mesh_k)
        if table is None:
            fracs = [self.valuation.prefix(Fraction(j, mesh_k)) for j in range(mesh_k + 1)]
            denom = math.lcm(*(f.denominator for f in fracs))
            table = [f.numerator * (denom // f.denominator) for f in fracs]
            self._tables[mesh_k] = table
        return table

    def demand_at_cuts(self, z: tuple[int, ...], mesh_k: int) -> frozenset[int]:
        table = self._grid_table(mesh_k)
        prev = 0
        best = -1
        arg: list[int] = []
        for i, zi in enumerate((*z, mesh_k), start=1):
            val = table[zi] - table[prev]
            if val > best:
                best = val
                arg = [i]
            elif val == best:
                arg.append(i)
            prev = zi
        return frozenset(arg)


def demand_from_valuation(v: PiecewiseConstantValuation, x: ContiguousPartition) -> frozenset[int]:
    """Exact argmax piece set of valuation v on partition x (no tolerance)."""
    return ValuationDemand(v).demand(x)


def check_demand_set(indices, x: ContiguousPartition, player=None) -> frozenset[int]:
    """Enforce the nonempty and hungry contracts on an already-computed demand set."""
    indices = frozenset(indices)
    if not indices:
        raise HungryViolationError(player, x)
    positives = sum(1 for length in x.lengths if length > 0)
    if positives == 0:
        return indices
    for i in indices:
        if not 1 <= i <= x.arity:
            raise InputError(f"demand index {i} out of range 1..{x.arity}")
        if x.lengths[i - 1] == 0:
            raise HungryViolationError(player, x, i)
    return indices


def validate_hungry(d: DemandFunction, x: ContiguousPartition, player=None) -> frozenset[int]:
    """Evaluate d on x and fail if the result names a zero-length piece.

    Used as a runtime guard on every demand evaluation inside the solver.
    Returns the demand set on success; raises HungryViolationError naming the
    offending player, partition, and piece index otherwise.
    """
    return check_demand_set(d.demand(x), x, player)


@dataclass(frozen=True)
class PlayerEnvy:
    player: int
    piece: int
    envy: Fraction


@dataclass(frozen=True)
class EnvyReport:
    """Per-player envy against a partition: max value elsewhere minus own value."""

    entries: tuple[PlayerEnvy, ...]
    epsilon: Fraction

    @property
    def max_envy(self) -> Fraction:
        return max((e.envy for e in self.entries), default=ZERO)

    @property
    def passed(self) -> bool:
        return self.max_envy <= self.epsilon

    def enviers(self) -> tuple[int, ...]:
        return tuple(e.player for e in self.entries if e.envy > self.epsilon)


def envy_report(valuations: Sequence[PiecewiseConstantValuation],
                partition: ContiguousPartition,
                owned_piece: dict[int, int],
                eps) -> EnvyReport:
    """Envy of each player for their owned piece against all pieces.

    owned_piece maps 1-based player index to 1-based piece index; works for
    both the individual (one player per piece) and the group (one piece per
    group) settings.
    """
    eps = Fraction(eps)
    if eps < 0:
        raise InputError(f"epsilon must be nonnegative, got {eps}")
    entries = []
    for player, valuation in enumerate(valuations, start=1):
        piece = owned_piece[player]
        values = valuation.piece_values(partition)
        envy = max(values) - values[piece - 1]
        entries.append(PlayerEnvy(player=player, piece=piece, envy=envy))
    return EnvyReport(entries=tuple(entries), epsilon=eps)
