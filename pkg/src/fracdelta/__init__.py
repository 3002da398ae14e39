"""Fractional delta calculus, Gronwall bounds and Picard solvers on discretized time scales."""

from .errors import (
    DomainError,
    FracDeltaError,
    GridMismatchError,
    HypothesisError,
    InsufficientGridError,
    NonConvergenceError,
    RHSEvaluationError,
    TerminalPointError,
    TruncationError,
    UnsupportedScaleError,
)
from .fracops import (
    FractionalOrder,
    PowerFunctionTable,
    caputo_derivative,
    convolution_weights,
    max_semigroup_residual,
    power_function,
    power_matrix,
    power_table,
    rl_derivative,
    rl_integral,
    semigroup_residual,
)
from .gronwall import BoundReport, GronwallInput, Verdict, fixed_point, gronwall_bound, verify_dominance
from .solver import (
    CauchyProblem,
    DependenceInput,
    DivergenceWarning,
    SolveResult,
    dependence_certify,
    picard_solve,
)
from .timescale import (
    GridFunction,
    ScaleKind,
    TimeScaleGrid,
    WeightedNormContext,
    delta_derivative,
    delta_integral,
    exp_eta,
    graininess,
    sigma,
    weighted_metric,
    weighted_norm,
)

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "caputo_derivative",
    "CauchyProblem",
    "convolution_weights",
    "delta_derivative",
    "delta_integral",
    "dependence_certify",
    "DependenceInput",
    "DivergenceWarning",
    "DomainError",
    "exp_eta",
    "fixed_point",
    "FracDeltaError",
    "FractionalOrder",
    "graininess",
    "GridFunction",
    "GridMismatchError",
    "gronwall_bound",
    "GronwallInput",
    "HypothesisError",
    "InsufficientGridError",
    "max_semigroup_residual",
    "NonConvergenceError",
    "picard_solve",
    "power_function",
    "power_matrix",
    "power_table",
    "PowerFunctionTable",
    "RHSEvaluationError",
    "rl_derivative",
    "rl_integral",
    "ScaleKind",
    "semigroup_residual",
    "sigma",
    "SolveResult",
    "TerminalPointError",
    "TimeScaleGrid",
    "TruncationError",
    "UnsupportedScaleError",
    "Verdict",
    "verify_dominance",
    "weighted_metric",
    "weighted_norm",
    "WeightedNormContext",
]
