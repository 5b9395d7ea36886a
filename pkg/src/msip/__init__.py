"""Exact-arithmetic toolkit for multistage stochastic integer programs."""
from .exact import LpResult, cone_member, integer_kernel_basis, simplex_solve, solve_square
from .graver import (BudgetExceeded, ConformalDecomposition, GraverBasis, conformal_decompose, conformal_leq,
                     graver_basis, graver_complexity)
from .instances import GenParams, generate, parse, serialize
from .multisets import (Multiset, almost_partition, bound_constants, find_small_valid_submultisets, rho_valid,
                        single_element, valid_witness_from_kernel)
from .solver import (ProximityReport, SolveReport, brute_force_ilp, find_feasible, graver_norm_experiment,
                     proximity_experiment, solve_augmentation)
from .structure import (Block, MultistageMatrix, MultistageTree, Program, StageDims, StructureError, build_tree,
                        drop_last_stage, leaf_subprogram, project, project_prefix, tree_partitions,
                        validate_structure)

__version__ = "0.1.0"
