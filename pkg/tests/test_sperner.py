import random
from fractions import Fraction as F

import pytest

from cakefair.cake import (ContiguousPartition, CutVector, DemandFunction,
                           PiecewiseConstantValuation, ValuationDemand,
                           partition_from_cuts)
from cakefair.errors import (BudgetExceededError, ContractViolationError,
                             HungryViolationError, InputError)
from cakefair.generators import random_valuations
from cakefair.oracle import grid_min_envy_individual
from cakefair.sperner import (ElementaryCell, LatticeVertex, SearchStats,
                              allocation_from_cell, check_envy_individual,
                              count_fully_labeled, enumerate_cells,
                              find_fully_labeled_scan, find_fully_labeled_walk,
                              label_vertex, owner_of, solve_individual)

UNIFORM = PiecewiseConstantValuation.uniform()
MORNING = PiecewiseConstantValuation((0, F(1, 10), 1), (10, 0))
EVENING = PiecewiseConstantValuation((0, F(9, 10), 1), (0, 10))


def demands_of(vals):
    return [ValuationDemand(v) for v in vals]


class TestOwner:
    def test_origin_is_player_one(self):
        assert owner_of(LatticeVertex((0, 0), 4), 3) == 1

    def test_cell_owners_distinct(self):
        zs = [(0, 0), (0, 1), (1, 1)]
        owners = [owner_of(LatticeVertex(z, 4), 3) for z in zs]
        assert owners == [1, 2, 3]

    def test_modular(self):
        assert owner_of(LatticeVertex((3,), 4), 2) == 2


class TestEnumerateCells:
    @pytest.mark.parametrize("n,k,count", [(2, 5, 5), (3, 4, 16), (3, 1, 1),
                                           (4, 3, 27), (5, 2, 16)])
    def test_counts(self, n, k, count):
        cells = list(enumerate_cells(n, k))
        assert len(cells) == count
        assert len(set((c.base.z, c.perm) for c in cells)) == count

    def test_cells_cover_region_volume(self):
        # Every cell is valid and they are pairwise distinct; equal volumes
        # force the count to be K^(n-1), which test_counts pins.
        for cell in enumerate_cells(3, 4):
            for v in cell.vertices():
                assert v.z[0] <= v.z[1] <= 4

    def test_lexicographic_order(self):
        cells = [(c.base.z, c.perm) for c in enumerate_cells(3, 3)]
        assert cells == sorted(cells)

    def test_resource_guard(self):
        with pytest.raises(BudgetExceededError):
            list(enumerate_cells(5, 100, cap=1000))


class TestLabelVertex:
    def test_smallest_index_tie_break(self):
        v = LatticeVertex((1, 2), 3)
        demands = demands_of([UNIFORM] * 3)
        assert v.partition().lengths == (F(1, 3), F(1, 3), F(1, 3))
        assert label_vertex(v, demands) == 1

    def test_empty_piece_never_labeled(self):
        v = LatticeVertex((0, 2), 3)  # piece 1 empty
        demands = demands_of([UNIFORM] * 3)
        assert label_vertex(v, demands) != 1

    def test_concentrated_owner(self):
        # owner of z=(2) with K=4 is player 1 (sum mod 2); give player 1 the
        # left-concentrated valuation so the label is forced to 1.
        demands = demands_of([MORNING, UNIFORM])
        assert label_vertex(LatticeVertex((2,), 4), demands) == 1

    def test_hungry_violation_names_player(self):
        class Stubborn(DemandFunction):
            def demand(self, x):
                return frozenset({1})

        demands = [Stubborn(), Stubborn()]
        with pytest.raises(HungryViolationError):
            label_vertex(LatticeVertex((0,), 4), demands)


class TestScan:
    def test_two_uniform_players_midpoint(self):
        lc = find_fully_labeled_scan(demands_of([UNIFORM, UNIFORM]), 2)
        cuts = [v.cut_vector().cuts[0] for v in lc.cell.vertices()]
        assert F(1, 2) in cuts

    def test_three_uniform_players_thirds(self):
        lc = find_fully_labeled_scan(demands_of([UNIFORM] * 3), 3)
        verts = [v.z for v in lc.cell.vertices()]
        assert (1, 2) in verts  # cuts (1/3, 2/3)
        assert sorted(lc.labels) == [1, 2, 3]
        assert sorted(lc.owners) == [1, 2, 3]

    def test_concentrated_player_segment_location(self):
        lc = find_fully_labeled_scan(demands_of([UNIFORM, EVENING]), 10)
        lo = lc.cell.base.z[0]
        assert F(1, 2) <= F(lo, 10) and F(lo + 1, 10) <= F(9, 10)

    def test_contract_violation_diagnosed(self):
        # Any deterministic hungry demand admits a fully-labeled cell, so the
        # only way a search can fail is a broken demand function; the hungry
        # guard reports it as a contract violation naming the player.
        class Stubborn(DemandFunction):
            def demand(self, x):
                return frozenset({1})

        with pytest.raises(ContractViolationError) as err:
            find_fully_labeled_scan([Stubborn(), Stubborn()], 4)
        assert isinstance(err.value, HungryViolationError)
        assert err.value.index == 1

    def test_budget_guard(self):
        with pytest.raises(BudgetExceededError):
            find_fully_labeled_scan(demands_of([UNIFORM] * 4), 100, budget=1000)

    def test_worker_merge_matches_serial(self):
        rng = random.Random(51)
        for _ in range(10):
            n = rng.choice((2, 3))
            vals = random_valuations(rng, n)
            serial = find_fully_labeled_scan(demands_of(vals), 8)
            for workers in (2, 4):
                par = find_fully_labeled_scan(demands_of(vals), 8, workers=workers)
                assert (par.cell, par.labels) == (serial.cell, serial.labels)


def certificate_sound(lc, demands):
    n = len(demands)
    assert sorted(lc.owners) == list(range(1, n + 1))
    assert sorted(lc.labels) == list(range(1, n + 1))
    for v, owner, label in zip(lc.cell.vertices(), lc.owners, lc.labels):
        assert owner_of(v, n) == owner
        assert label_vertex(v, demands) == label


class TestWalk:
    def test_one_dimensional_walk_equals_scan(self):
        rng = random.Random(53)
        for _ in range(10):
            vals = random_valuations(rng, 2)
            ls = find_fully_labeled_scan(demands_of(vals), 16)
            lw = find_fully_labeled_walk(demands_of(vals), 16)
            assert (ls.cell, ls.labels) == (lw.cell, lw.labels)

    def test_certificates_sound_against_scan_parity(self):
        rng = random.Random(57)
        for _ in range(10):
            n = rng.choice((3, 4))
            vals = random_valuations(rng, n)
            demands = demands_of(vals)
            lw = find_fully_labeled_walk(demands, 6)
            certificate_sound(lw, demands)
            assert count_fully_labeled(demands, 6) % 2 == 1

    def test_visits_bounded_by_prism_cells(self):
        rng = random.Random(59)
        vals = random_valuations(rng, 4)
        stats = SearchStats()
        find_fully_labeled_walk(demands_of(vals), 12, stats=stats)
        assert stats.cells_visited <= 4 * 12 ** 3

    def test_budget_guard(self):
        rng = random.Random(61)
        vals = random_valuations(rng, 4)
        with pytest.raises(BudgetExceededError):
            find_fully_labeled_walk(demands_of(vals), 64, budget=10)


class TestAllocationReadout:
    def test_owner_label_bijection(self):
        rng = random.Random(63)
        for _ in range(10):
            n = rng.choice((2, 3, 4))
            vals = random_valuations(rng, n)
            lc = find_fully_labeled_scan(demands_of(vals), 8)
            alloc = allocation_from_cell(lc)
            assert sorted(alloc.assignment) == list(range(1, n + 1))
            assert sorted(alloc.assignment.values()) == list(range(1, n + 1))
            assert sum(alloc.partition.lengths) == 1

    def test_barycenter_within_cell(self):
        lc = find_fully_labeled_scan(demands_of([UNIFORM] * 3), 3)
        alloc = allocation_from_cell(lc)
        cuts = alloc.partition
        zs = [v.z for v in lc.cell.vertices()]
        for i, c in enumerate([sum(cuts.lengths[:j + 1]) for j in range(2)]):
            lo = min(z[i] for z in zs)
            hi = max(z[i] for z in zs)
            assert F(lo, 3) <= c <= F(hi, 3)


class TestSolveIndividual:
    def test_single_player_whole_cake(self):
        alloc = solve_individual(demands_of([UNIFORM]), F(1, 100),
                                 valuations=[UNIFORM])
        assert alloc.partition.lengths == (F(1),)
        assert alloc.assignment == {1: 1}
        assert alloc.certificate is None

    def test_three_uniform_near_thirds(self):
        vals = [UNIFORM] * 3
        alloc = solve_individual(demands_of(vals), F(1, 100), valuations=vals)
        cuts = [sum(alloc.partition.lengths[:j + 1]) for j in range(2)]
        assert abs(cuts[0] - F(1, 3)) <= F(1, 100)
        assert abs(cuts[1] - F(2, 3)) <= F(1, 100)
        assert check_envy_individual(vals, alloc, F(1, 100)).passed

    def test_concentrated_player_gets_right_piece(self):
        vals = [UNIFORM, EVENING]
        eps = F(1, 100)
        alloc = solve_individual(demands_of(vals), eps, valuations=vals)
        assert alloc.assignment[2] == 2
        cut = alloc.partition.lengths[0]
        # The exact envy-free cut interval, characterized by the grid oracle
        # (argmin grid points at R=20 fill [1/2, 19/20]).
        oracle = grid_min_envy_individual(vals, 20)
        assert oracle.min_max_envy == 0
        grid_cuts = [cv.cuts[0] for cv in oracle.argmin_cuts]
        assert grid_cuts == [F(j, 20) for j in range(10, 20)]
        assert min(grid_cuts) - eps <= cut <= max(grid_cuts) + F(1, 20) + eps
        assert check_envy_individual(vals, alloc, eps).passed

    def test_mesh_certificate_for_abstract_demands(self):
        class LongestPiece(DemandFunction):
            def demand(self, x):
                best = max(x.lengths)
                return frozenset(i + 1 for i, l in enumerate(x.lengths) if l == best)

        demands = [LongestPiece() for _ in range(3)]
        alloc = solve_individual(demands, mesh=9)
        cert = alloc.certificate
        assert cert.mesh_k == 9
        assert cert.delta == F(2, 9)
        # each player demanded their assigned piece at their vertex, and that
        # vertex is within cut-space distance delta of the output cuts
        out_cuts = [sum(alloc.partition.lengths[:j + 1]) for j in range(2)]
        for v, owner, label in zip(cert.cell.cell.vertices(), cert.cell.owners,
                                   cert.cell.labels):
            assert alloc.assignment[owner] == label
            assert label in demands[owner - 1].demand(v.partition())
            dist = sum(abs(F(zi, 9) - c) for zi, c in zip(v.z, out_cuts))
            assert dist <= cert.delta

    def test_budget_exceeded_carries_best(self):
        vals = random_valuations(random.Random(67), 4)
        with pytest.raises(BudgetExceededError):
            solve_individual(demands_of(vals), F(1, 1000), valuations=vals,
                             budget_cells=50)

    def test_epsilon_must_be_positive(self):
        with pytest.raises(InputError):
            solve_individual(demands_of([UNIFORM, UNIFORM]), F(0),
                             valuations=[UNIFORM, UNIFORM])


class TestInvariants:
    def test_rainbow_ownership_exhaustive(self):
        for n in (2, 3, 4, 5):
            for k in (1, 2, 5, 8):
                for cell in enumerate_cells(n, k):
                    owners = [owner_of(v, n) for v in cell.vertices()]
                    assert sorted(owners) == list(range(1, n + 1))

    def test_boundary_condition_random(self):
        rng = random.Random(71)
        for _ in range(10):
            n = rng.choice((2, 3, 4))
            vals = random_valuations(rng, n)
            demands = demands_of(vals)
            k = rng.randint(1, 8)
            import itertools
            for z in itertools.combinations_with_replacement(range(k + 1), n - 1):
                v = LatticeVertex(z, k)
                label = label_vertex(v, demands)
                lengths = v.partition().lengths
                assert lengths[label - 1] > 0

    def test_parity_random(self):
        rng = random.Random(73)
        for _ in range(10):
            n = rng.choice((2, 3, 4))
            vals = random_valuations(rng, n)
            k = rng.randint(1, 8)
            assert count_fully_labeled(demands_of(vals), k) % 2 == 1

    def test_envy_bound_from_mesh(self):
        rng = random.Random(79)
        for _ in range(15):
            n = rng.choice((2, 3, 4))
            vals = random_valuations(rng, n)
            demands = demands_of(vals)
            k = rng.randint(n, 8)
            lc = find_fully_labeled_scan(demands, k)
            alloc = allocation_from_cell(lc)
            envy = check_envy_individual(vals, alloc, 0).max_envy
            d_max = max(v.max_density for v in vals)
            assert envy <= 2 * d_max * (n - 1) / k

    def test_scan_walk_agreement_on_soundness(self):
        rng = random.Random(83)
        for _ in range(8):
            n = rng.choice((2, 3, 4))
            vals = random_valuations(rng, n)
            demands = demands_of(vals)
            certificate_sound(find_fully_labeled_scan(demands, 7), demands)
            certificate_sound(find_fully_labeled_walk(demands, 7), demands)

    def test_scale_invariance_of_labels_and_scan(self):
        rng = random.Random(89)
        for _ in range(10):
            n = rng.choice((2, 3))
            vals = random_valuations(rng, n)
            scaled = list(vals)
            idx = rng.randrange(n)
            scaled[idx] = PiecewiseConstantValuation.normalized(
                vals[idx].breakpoints, tuple(d * 7 for d in vals[idx].densities))
            k = rng.randint(2, 8)
            import itertools
            for z in itertools.combinations_with_replacement(range(k + 1), n - 1):
                v = LatticeVertex(z, k)
                assert label_vertex(v, demands_of(vals)) == \
                    label_vertex(v, demands_of(scaled))
            a = find_fully_labeled_scan(demands_of(vals), k)
            b = find_fully_labeled_scan(demands_of(scaled), k)
            assert (a.cell, a.labels) == (b.cell, b.labels)
