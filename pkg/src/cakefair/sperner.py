"""Simplicial search for an envy-free division among n individual players.

The space of sorted cut vectors (c_1 <= ... <= c_{n-1} in [0,1]) is a simplex.
It is triangulated by the Freudenthal cells of the 1/K lattice that fit inside
the sorted region; each cell is a base lattice point plus a permutation order
in which coordinates are incremented. Vertices are owned by players in
rotation (coordinate sum mod n), which makes every cell's owners pairwise
distinct, and each vertex is labeled with a piece its owner demands there.
Hungry demands never label a vertex with an empty piece, so a fully-labeled
cell exists; reading owners against labels on such a cell gives each player a
different piece they demanded within mesh distance of the output partition.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .cake import (ContiguousPartition, CutVector, DemandFunction, EnvyReport,
                   PiecewiseConstantValuation, check_demand_set, envy_report,
                   partition_from_cuts)
from .errors import (BudgetExceededError, ContractViolationError,
                     HungryViolationError, InputError)

log = logging.getLogger(__name__)

DEFAULT_BUDGET_CELLS = 20_000_000
SCAN_AUTO_CELL_CAP = 50_000


# ---------------------------------------------------------------------------
# Public lattice types (internals work on plain tuples for speed)

@dataclass(frozen=True)
class LatticeVertex:
    """A lattice point z with 0 <= z_1 <= ... <= z_{n-1} <= mesh_k, encoding
    the cut vector z / mesh_k."""

    z: tuple[int, ...]
    mesh_k: int

    def __post_init__(self):
        if not _vertex_ok(self.z, self.mesh_k):
            raise InputError(f"lattice point {self.z} outside the sorted region at K={self.mesh_k}")

    def cut_vector(self) -> CutVector:
        return CutVector(tuple(Fraction(zi, self.mesh_k) for zi in self.z))

    def partition(self) -> ContiguousPartition:
        return partition_from_cuts(self.cut_vector())


@dataclass(frozen=True)
class ElementaryCell:
    """A Freudenthal cell: base vertex plus the coordinate order (1-based) in
    which unit increments produce the remaining vertices."""

    base: LatticeVertex
    perm: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.perm) != list(range(1, len(self.base.z) + 1)):
            raise InputError(f"perm must permute 1..{len(self.base.z)}, got {self.perm}")
        if not _cell_ok(self.base.z, tuple(p - 1 for p in self.perm), self.base.mesh_k):
            raise InputError(f"cell ({self.base.z}, {self.perm}) leaves the sorted region")

    def vertices(self) -> tuple[LatticeVertex, ...]:
        k = self.base.mesh_k
        return tuple(LatticeVertex(z, k) for z in
                     _cell_vertices(self.base.z, tuple(p - 1 for p in self.perm)))


@dataclass(frozen=True)
class LabeledCell:
    """An elementary cell with per-vertex owners and demanded-piece labels."""

    cell: ElementaryCell
    owners: tuple[int, ...]
    labels: tuple[int, ...]


@dataclass(frozen=True)
class SolveCertificate:
    """Evidence for an allocation: at mesh_k, each player demanded their piece
    at a cell vertex within cut-space distance delta of the output."""

    mesh_k: int
    cell: LabeledCell
    delta: Fraction
    mode: str
    cells_visited: int


@dataclass(frozen=True)
class IndividualAllocation:
    partition: ContiguousPartition
    assignment: dict[int, int]  # player -> piece, bijective
    certificate: Optional[SolveCertificate]


@dataclass
class SearchStats:
    cells_visited: int = 0
    fallbacks: int = 0


# ---------------------------------------------------------------------------
# Raw lattice helpers (z tuples, 0-based coordinate indices)

def _vertex_ok(z, mesh_k):
    prev = 0
    for x in z:
        if x < prev:
            return False
        prev = x
    return prev <= mesh_k


def _cell_vertices(base, perm):
    verts = [tuple(base)]
    cur = list(base)
    for j in perm:
        cur[j] += 1
        verts.append(tuple(cur))
    return verts


def _cell_ok(base, perm, mesh_k):
    # Incrementing coordinate j can only violate ordering against j+1 (or the
    # mesh bound for the last coordinate); earlier neighbors only shrink gaps.
    if not _vertex_ok(base, mesh_k):
        return False
    cur = list(base)
    last = len(base) - 1
    for j in perm:
        cur[j] += 1
        bound = cur[j + 1] if j < last else mesh_k
        if cur[j] > bound:
            return False
    return True


def _iter_cells_raw(n, mesh_k):
    """All Freudenthal cells inside the sorted region, lexicographic by
    (base, perm). There are exactly mesh_k**(n-1) of them."""
    dims = n - 1
    for base in itertools.combinations_with_replacement(range(mesh_k), dims):
        for perm in itertools.permutations(range(dims)):
            if _cell_ok(base, perm, mesh_k):
                yield base, perm


def owner_of(v: LatticeVertex, n: int) -> int:
    """Owner of a lattice vertex: coordinate sum mod n, 1-based.

    Consecutive vertices of any cell raise the coordinate sum by exactly one,
    so the n owners within a cell are pairwise distinct.
    """
    return (sum(v.z) % n) + 1


def enumerate_cells(n: int, mesh_k: int, cap: Optional[int] = None):
    """Yield every cell of the triangulated cut space exactly once, in
    deterministic lexicographic order. Guards against runaway sizes."""
    if n < 2 or mesh_k < 1:
        raise InputError(f"need n >= 2 and mesh >= 1, got n={n}, K={mesh_k}")
    total = mesh_k ** (n - 1)
    if cap is not None and total > cap:
        raise BudgetExceededError(
            f"cell enumeration of {total} cells (K={mesh_k}, n={n}) exceeds cap {cap}")
    for base, perm in _iter_cells_raw(n, mesh_k):
        yield ElementaryCell(LatticeVertex(base, mesh_k), tuple(p + 1 for p in perm))


# ---------------------------------------------------------------------------
# Vertex labeling

class _Labeler:
    """Caches demanded-piece labels per lattice vertex, with the hungry guard."""

    def __init__(self, demands: Sequence[DemandFunction], mesh_k: int):
        self.demands = demands
        self.n = len(demands)
        self.mesh_k = mesh_k
        self.cache: dict[tuple[int, ...], int] = {}

    def demand_set(self, z) -> frozenset[int]:
        owner = sum(z) % self.n
        indices = self.demands[owner].demand_at_cuts(z, self.mesh_k)
        zf = (0, *z, self.mesh_k)
        if not indices:
            raise HungryViolationError(owner + 1, self._partition(z))
        for i in indices:
            if zf[i] - zf[i - 1] == 0:
                raise HungryViolationError(owner + 1, self._partition(z), i)
        return indices

    def label(self, z) -> int:
        lab = self.cache.get(z)
        if lab is None:
            lab = min(self.demand_set(z))
            self.cache[z] = lab
        return lab

    def _partition(self, z):
        return LatticeVertex(tuple(z), self.mesh_k).partition()


def label_vertex(v: LatticeVertex, demands: Sequence[DemandFunction]) -> int:
    """Label of a vertex: the smallest piece index its owner demands there.

    The smallest-index tie-break keeps labeling deterministic; the hungry
    guard rejects labels naming zero-length pieces.
    """
    n = len(demands)
    owner = owner_of(v, n)
    x = v.partition()
    indices = check_demand_set(demands[owner - 1].demand_at_cuts(v.z, v.mesh_k), x, owner)
    return min(indices)


# ---------------------------------------------------------------------------
# Exhaustive scan

def _chunk_first_hit(labeler, chunk, mesh_k, stats):
    dims = labeler.n - 1
    for base in chunk:
        for perm in itertools.permutations(range(dims)):
            if not _cell_ok(base, perm, mesh_k):
                continue
            stats.cells_visited += 1
            verts = _cell_vertices(base, perm)
            labels = [labeler.label(v) for v in verts]
            if len(set(labels)) == labeler.n:
                return base, perm, tuple(labels)
    return None


def find_fully_labeled_scan(demands: Sequence[DemandFunction], mesh_k: int, *,
                            workers: int = 1, budget: Optional[int] = None,
                            stats: Optional[SearchStats] = None) -> LabeledCell:
    """Lexicographically first fully-labeled cell, by exhaustive enumeration.

    The merge over worker chunks is deterministic: the result is the same
    lexicographically smallest cell for any worker count.
    """
    n = len(demands)
    stats = stats if stats is not None else SearchStats()
    total = mesh_k ** (n - 1)
    if budget is not None and total > budget:
        raise BudgetExceededError(
            f"scan at K={mesh_k} needs up to {total} cells, over budget {budget}")
    labeler = _Labeler(demands, mesh_k)
    bases = list(itertools.combinations_with_replacement(range(mesh_k), n - 1))
    hit = None
    if workers <= 1:
        hit = _chunk_first_hit(labeler, bases, mesh_k, stats)
    else:
        from concurrent.futures import ThreadPoolExecutor
        step = -(-len(bases) // workers)
        chunks = [bases[i:i + step] for i in range(0, len(bases), step)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(
                lambda ch: _chunk_first_hit(labeler, ch, mesh_k, stats), chunks))
        for res in results:
            if res is not None:
                hit = res
                break
    if hit is None:
        raise ContractViolationError(
            "no fully-labeled cell exists at K=%d: a demand function violates its "
            "contract; label snapshot: %s" % (mesh_k, _label_dump(labeler)))
    base, perm, labels = hit
    return _labeled_cell(base, perm, labels, mesh_k, n)


def _label_dump(labeler, cap=64):
    items = sorted(labeler.cache.items())[:cap]
    return "; ".join(f"{z}->{lab}" for z, lab in items)


def _labeled_cell(base, perm, labels, mesh_k, n):
    owners = tuple((sum(z) % n) + 1 for z in _cell_vertices(base, perm))
    cell = ElementaryCell(LatticeVertex(tuple(base), mesh_k), tuple(p + 1 for p in perm))
    return LabeledCell(cell=cell, owners=owners, labels=tuple(labels))


def count_fully_labeled(demands: Sequence[DemandFunction], mesh_k: int) -> int:
    """Number of fully-labeled cells under exhaustive enumeration (odd for any
    contract-respecting labeling)."""
    labeler = _Labeler(demands, mesh_k)
    n = len(demands)
    count = 0
    for base, perm in _iter_cells_raw(n, mesh_k):
        labels = {labeler.label(v) for v in _cell_vertices(base, perm)}
        if len(labels) == n:
            count += 1
    return count


# ---------------------------------------------------------------------------
# Door-to-door walk through a one-layer prism (homotopy start)
#
# The walk operates on the prism (cut simplex) x [0,1], triangulated by
# Freudenthal cells in n dimensions (the n-1 cut coordinates plus a layer
# coordinate t). Vertices at t=1 carry the real demand labels; vertices at
# t=0 carry an artificial labeling (first nonempty piece) that has exactly
# one fully-labeled cell. A facet whose labels are {1..n} is a door. Doors
# cannot lie on the prism sides (an empty piece is never labeled), so the
# single path entered through the unique bottom door must leave through the
# top, and the top facet it leaves through is a real fully-labeled cell.

def _artificial_label(z, mesh_k):
    # First piece with positive length; unique fully-labeled cell at the
    # all-zero corner chain.
    prev = 0
    for i, zi in enumerate((*z, mesh_k), start=1):
        if zi > prev:
            return i
        prev = zi
    raise AssertionError("empty lattice partition")


def find_fully_labeled_walk(demands: Sequence[DemandFunction], mesh_k: int, *,
                            budget: Optional[int] = None,
                            stats: Optional[SearchStats] = None) -> LabeledCell:
    """Some fully-labeled cell, found by a single door-in/door-out pivoting
    path from the artificial start layer. Falls back to the exhaustive scan if
    a cycle is ever detected (possible only for contract-breaking demands)."""
    n = len(demands)
    stats = stats if stats is not None else SearchStats()
    labeler = _Labeler(demands, mesh_k)
    nz = n - 1
    K = mesh_k

    def vlabel(w):
        if w[nz] == 1:
            return min(labeler.demand_set(w[:nz]))
        return _artificial_label(w[:nz], K)

    def grow_bound(w, j):
        # After incrementing coordinate j of w, the vertex stays in the prism
        # iff w[j] does not pass this bound; lower neighbors only gain slack.
        if j == nz:
            return 1
        if j == nz - 1:
            return K
        return w[j + 1]

    # Start cell: the artificial corner chain at t=0 plus one top vertex.
    # Pivots keep the state canonical: verts[k] is the base plus the first k
    # increments of perm, and each step replaces exactly one vertex.
    perm = list(range(nz - 1, -1, -1)) + [nz]
    verts = _cell_vertices((0,) * (nz + 1), tuple(perm))
    labels = [vlabel(v) for v in verts]
    extra = n  # the vertex across from the door we entered through
    cap = n * K ** nz  # prism cell count; a correct path never revisits
    steps = 0
    brent_saved = None
    brent_power = 1
    brent_lam = 0

    while True:
        stats.cells_visited += 1
        steps += 1
        if budget is not None and stats.cells_visited > budget:
            raise BudgetExceededError(
                f"walk exceeded the cell budget of {budget} at K={K}")
        if steps > cap:
            raise ContractViolationError(
                f"walk path longer than the {cap} prism cells at K={K}: "
                "demand functions are not behaving as contracted")
        key = (verts[0], tuple(perm), extra)
        if key == brent_saved:
            log.warning("walk cycle detected at K=%d; falling back to exhaustive scan", K)
            stats.fallbacks += 1
            return find_fully_labeled_scan(demands, K, budget=budget, stats=stats)
        if brent_lam == brent_power:
            brent_saved = key
            brent_power *= 2
            brent_lam = 0
        brent_lam += 1

        ell = labels[extra]
        drop = next(i for i in range(n + 1) if labels[i] == ell and i != extra)
        if 0 < drop < n:
            j = perm[drop]
            w = list(verts[drop - 1])
            w[j] += 1
            if w[j] <= grow_bound(w, j):
                w = tuple(w)
                perm[drop - 1], perm[drop] = perm[drop], perm[drop - 1]
                verts[drop] = w
                labels[drop] = vlabel(w)
                extra = drop
                continue
        elif drop == 0:
            j = perm[0]
            w = list(verts[n])
            w[j] += 1
            if w[j] <= grow_bound(w, j):
                w = tuple(w)
                del verts[0], labels[0], perm[0]
                verts.append(w)
                labels.append(vlabel(w))
                perm.append(j)
                extra = n
                continue
            if j == nz:
                # Left through the top: the remaining facet is a real
                # fully-labeled cell (the entered cell minus its t=0 vertex).
                return _labeled_cell(verts[0][:nz], tuple(perm[1:]),
                                     tuple(labels[1:]), K, n)
        else:  # drop == n
            j = perm[-1]
            w = list(verts[0])
            w[j] -= 1
            lower = 0 if (j == 0 or j == nz) else w[j - 1]
            if w[j] >= lower:
                w = tuple(w)
                del verts[n], labels[n], perm[-1]
                verts.insert(0, w)
                labels.insert(0, vlabel(w))
                perm.insert(0, j)
                extra = 0
                continue
        raise ContractViolationError(
            "walk left the prism other than through its top face: a demand "
            "function violates its contract; label snapshot: %s"
            % _label_dump(labeler))


# ---------------------------------------------------------------------------
# Solve loop

def _choose_mode(mode, n, mesh_k):
    if mode in ("scan", "walk"):
        return mode
    if mode != "auto":
        raise InputError(f"mode must be scan, walk, or auto, got {mode!r}")
    return "scan" if mesh_k ** (n - 1) <= SCAN_AUTO_CELL_CAP else "walk"


def find_fully_labeled(demands: Sequence[DemandFunction], mesh_k: int, *,
                       mode: str = "auto", workers: int = 1,
                       budget: Optional[int] = None,
                       stats: Optional[SearchStats] = None):
    """Find a fully-labeled cell by the requested mode; auto picks the scan
    while the cell count stays small and the walk beyond that. Returns
    (mode_used, LabeledCell)."""
    used = _choose_mode(mode, len(demands), mesh_k)
    if used == "scan":
        return used, find_fully_labeled_scan(demands, mesh_k, workers=workers,
                                             budget=budget, stats=stats)
    return used, find_fully_labeled_walk(demands, mesh_k, budget=budget, stats=stats)


def allocation_from_cell(lcell: LabeledCell) -> IndividualAllocation:
    """Read the allocation off a fully-labeled cell: each owner takes the piece
    they are labeled with, and the partition sits at the cell barycenter."""
    mesh_k = lcell.cell.base.mesh_k
    verts = [v.z for v in lcell.cell.vertices()]
    n = len(verts)
    assignment = dict(zip(lcell.owners, lcell.labels))
    if sorted(assignment) != list(range(1, n + 1)) or sorted(assignment.values()) != list(range(1, n + 1)):
        raise ContractViolationError(f"cell readout is not a bijection: {assignment}")
    cuts = CutVector(tuple(Fraction(sum(v[i] for v in verts), n * mesh_k)
                           for i in range(n - 1)))
    return IndividualAllocation(
        partition=partition_from_cuts(cuts),
        assignment=assignment,
        certificate=None)


def _with_certificate(alloc, lcell, mesh_k, mode, stats):
    n = len(alloc.assignment)
    cert = SolveCertificate(mesh_k=mesh_k, cell=lcell,
                            delta=Fraction(n - 1, mesh_k),
                            mode=mode, cells_visited=stats.cells_visited)
    return IndividualAllocation(partition=alloc.partition,
                                assignment=alloc.assignment,
                                certificate=cert)


def solve_individual(demands: Sequence[DemandFunction], eps=None, *,
                     valuations: Optional[Sequence[PiecewiseConstantValuation]] = None,
                     envy_of: Optional[Callable[[IndividualAllocation], Fraction]] = None,
                     mesh: Optional[int] = None, mode: str = "auto",
                     workers: int = 1, budget_cells: int = DEFAULT_BUDGET_CELLS,
                     max_density: Optional[Fraction] = None,
                     stats: Optional[SearchStats] = None) -> IndividualAllocation:
    """Envy-driven simplicial solve over a doubling mesh schedule.

    With valuations (or an explicit envy_of callback) the mesh starts at
    K0 = max(n, ceil(2*D*(n-1)/eps)) and doubles until measured envy <= eps.
    For purely abstract demands the solve runs once at the requested mesh
    (default n) and the certificate itself is the guarantee: every player
    demanded their assigned piece within cut-space distance (n-1)/K of the
    output partition.
    """
    n = len(demands)
    if n < 1:
        raise InputError("need at least one player")
    if n == 1:
        return IndividualAllocation(
            partition=ContiguousPartition((Fraction(1),)),
            assignment={1: 1}, certificate=None)

    if envy_of is None and valuations is not None:
        if len(valuations) != n:
            raise InputError("one valuation per demand required")
        vals = list(valuations)
        eps_f = Fraction(eps)

        def envy_of(alloc):
            return envy_report(vals, alloc.partition, alloc.assignment, eps_f).max_envy

    if envy_of is not None:
        eps = Fraction(eps)
        if eps <= 0:
            raise InputError(f"epsilon must be positive, got {eps}")
        if max_density is None:
            if valuations is None:
                raise InputError("envy-driven solve needs valuations or max_density")
            max_density = max(v.max_density for v in valuations)
        k0 = mesh if mesh else max(n, math.ceil(2 * Fraction(max_density) * (n - 1) / eps))
    else:
        k0 = mesh if mesh else n

    stats = stats if stats is not None else SearchStats()
    best = None
    best_envy = None
    mesh_k = k0
    while True:
        remaining = budget_cells - stats.cells_visited
        try:
            used_mode, lcell = find_fully_labeled(demands, mesh_k, mode=mode,
                                                  workers=workers, budget=remaining,
                                                  stats=stats)
        except BudgetExceededError as exc:
            raise BudgetExceededError(str(exc), best_allocation=best,
                                      best_envy=best_envy) from exc
        alloc = _with_certificate(allocation_from_cell(lcell), lcell, mesh_k,
                                  used_mode, stats)
        if envy_of is None:
            return alloc
        envy = envy_of(alloc)
        if best_envy is None or envy < best_envy:
            best, best_envy = alloc, envy
        if envy <= eps:
            return alloc
        mesh_k *= 2


def check_envy_individual(valuations: Sequence[PiecewiseConstantValuation],
                          alloc: IndividualAllocation, eps) -> EnvyReport:
    """Exact per-player envy of an individual allocation."""
    return envy_report(valuations, alloc.partition, alloc.assignment, eps)
