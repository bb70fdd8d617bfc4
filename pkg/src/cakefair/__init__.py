"""Envy-free contiguous cake divisions for individuals and ad-hoc groups.

The cake is the unit interval; players value it through normalized
piecewise-constant densities (or arbitrary demand functions). The solver
triangulates the space of sorted cut vectors and pivots to a fully-labeled
cell whose owners each demanded a different piece; the group solver lifts
per-player preferences over m group pieces to preferences over n individual
pieces, solves, and unites consecutive blocks. A brute-force grid oracle
provides independent ground truth at desk scale.
"""

__version__ = "0.1.0"

from .cake import (ContiguousPartition, CutVector, DemandFunction, EnvyReport,
                   PiecewiseConstantValuation, PlayerEnvy, ValuationDemand,
                   cuts_from_partition, demand_from_valuation, envy_report,
                   measure_value, partition_from_cuts, validate_hungry)
from .errors import (BudgetExceededError, ContractViolationError,
                     HungryViolationError, InputError, OracleCapError)
from .groups import (GroupAllocation, GroupStructure, LiftedDemand,
                     assemble_groups, coarsen, lift_demand, solve_groups,
                     verify_group_envy)
from .oracle import (GridSpec, NaiveReductionExample, OracleResult,
                     fixed_group_min_envy, grid_min_envy_groups,
                     grid_min_envy_individual,
                     naive_reduction_counterexample_search)
from .sperner import (ElementaryCell, IndividualAllocation, LabeledCell,
                      LatticeVertex, SearchStats, SolveCertificate,
                      check_envy_individual, count_fully_labeled,
                      enumerate_cells, find_fully_labeled_scan,
                      find_fully_labeled_walk, label_vertex, owner_of,
                      solve_individual)

__all__ = [name for name in dir() if not name.startswith("_")]
