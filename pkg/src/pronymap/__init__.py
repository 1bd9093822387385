"""Inversion of the Prony moment map for signals with multiple (colliding) nodes.

A signal is a finite combination of Dirac deltas and their derivatives; its
moments m_k = integral x^k F(x) dx are inverted through diagonal Padé
approximation, with solvability decided from Hankel ranks and near-collisions
handled in a divided-difference basis.
"""
from .collision import (
    Configuration,
    build_basis,
    chakalov_expansion,
    collocation_matrix,
    dd_evaluate,
    dd_on_cauchy_kernel,
    divided_difference,
    is_subordinated,
    reassemble,
    solve_in_dd_basis,
    solve_with_collisions,
)
from .errors import (
    ConditioningError,
    DegenerateBasis,
    DegenerateJacobian,
    DegenerateLeadingMinor,
    InputError,
    NoConvergence,
    NotIrreducible,
    PoleError,
    PronyError,
    UndefinedSeparation,
    Unsolvable,
)
from .hankel import MINOR_TOL, RANK_TOL, SolvabilityReport, build_hankel, classify, numeric_rank
from .pade import agreement_order, pade_solve, solve_denominator, solve_numerator, taylor_expand
from .signal import Signal, configuration_of, moments, signal_distance
from .solver import (
    SolveResult,
    confluent_vandermonde,
    error_bounds,
    invert_multiplicity_restricted,
    invert_prony,
    invert_rank_restricted,
    jacobian_factorization,
    solve_linear_part,
)
from .stieltjes import RationalFunction, find_poles, partial_fractions, stieltjes_transform

__version__ = "0.1.0"
