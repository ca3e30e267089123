"""Quon algebra toolkit: operators ``b_m, bd_m`` with ``b_k bd_l - q bd_l b_k = delta_kl``."""

from .algebra import OperatorPolynomial, QuonAlgebra, normal_order, q_mutator, vacuum_expectation
from .fock import FockSpace, OperatorMatrix, check_positivity, gram_matrix, inner_product
from .number_ops import direct_N, series_N, solve_series_coefficients
from .report import CheckResult, Report
from .scalars import ConfigurationError, DeformationParameter, EndpointError, Surd
from .su2 import build_generators, casimir, clebsch_gordan, couple_pair
from .suites import RunConfig, run_suite

__version__ = "0.1.0"

__all__ = [
    "CheckResult",
    "ConfigurationError",
    "DeformationParameter",
    "EndpointError",
    "FockSpace",
    "OperatorMatrix",
    "OperatorPolynomial",
    "QuonAlgebra",
    "Report",
    "RunConfig",
    "Surd",
    "build_generators",
    "casimir",
    "check_positivity",
    "clebsch_gordan",
    "couple_pair",
    "direct_N",
    "gram_matrix",
    "inner_product",
    "normal_order",
    "q_mutator",
    "run_suite",
    "series_N",
    "solve_series_coefficients",
    "vacuum_expectation",
]
