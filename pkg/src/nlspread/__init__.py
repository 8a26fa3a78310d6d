"""Nonlocal-dispersal spreading laboratory.

Simulates cooperative reaction systems whose populations disperse through
convolution kernels, either on the whole line or inside a range whose
edges move in proportion to the dispersal mass crossing them.  Includes
semi-wave speed solvers, growth-law regression, and a scenario CLI.
"""

from .kernels import (
    ClassReport,
    INFINITE,
    InvalidLambda,
    Kernel,
    KernelError,
    KernelSpec,
    NegativeTableValue,
    NonNormalizable,
    classify,
    exp_moment,
    first_moment,
    kernel_from_json,
    make_kernel,
    tail_mass,
)
from .nonlocal_ops import (
    GridFunction,
    MeshTooCoarse,
    boundary_flux,
    check_mesh,
    convolve,
    convolve_values,
    kernel_weights,
    mirror_stable_sum,
)
from .reactions import (
    AssumptionReport,
    CheckResult,
    NoPositiveRoot,
    NonConvergence,
    ReactionError,
    ReactionModel,
    cholera,
    concave,
    custom,
    eval_F,
    jacobian,
    lipschitz_bound,
    model_from_json,
    positive_equilibrium,
    verify_assumptions,
    wnv,
)
from .freeboundary import (
    FBConfig,
    FBState,
    FrontSeries,
    Instability,
    Thresholds,
    classify_outcome,
    make_initial_state,
    run,
    step,
)
from .cauchy import (
    CauchyConfig,
    CauchySeries,
    CauchyState,
    InvalidLevel,
    cstep,
    level_set,
    make_initial_cauchy_state,
    run_cauchy,
)
from .semiwave import (
    BracketNotFound,
    FirstMomentDiverges,
    FrontSpeedResult,
    MinimalSpeedResult,
    NoConvergence,
    SemiWaveSolution,
    SemiwaveError,
    ThresholdNotBracketed,
    estimate_cstar,
    find_c0,
    flux_functional,
    linearized_front_speed,
    solve_profile,
)
from .analysis import (
    FitReport,
    GridMismatch,
    InsufficientData,
    LAWS,
    OrderReport,
    Violation,
    best_growth_law,
    compare_orderings,
    fit_front,
    report_to_json_dict,
)
from .config import (
    ConfigError,
    SCENARIO_SCHEMA,
    build_cauchy_config,
    build_fb_config,
    build_kernels,
    build_model,
    load_scenario,
    scenario_dir,
    validate_scenario,
)
from .verification import CriterionResult, run_suite

__all__ = [
    "AssumptionReport",
    "BracketNotFound",
    "CauchyConfig",
    "CauchySeries",
    "CauchyState",
    "CheckResult",
    "ClassReport",
    "ConfigError",
    "CriterionResult",
    "FBConfig",
    "FBState",
    "FirstMomentDiverges",
    "FitReport",
    "FrontSeries",
    "FrontSpeedResult",
    "GridFunction",
    "GridMismatch",
    "INFINITE",
    "Instability",
    "InsufficientData",
    "InvalidLambda",
    "InvalidLevel",
    "Kernel",
    "KernelError",
    "KernelSpec",
    "LAWS",
    "MeshTooCoarse",
    "MinimalSpeedResult",
    "NegativeTableValue",
    "NoConvergence",
    "NoPositiveRoot",
    "NonConvergence",
    "NonNormalizable",
    "OrderReport",
    "ReactionError",
    "ReactionModel",
    "SCENARIO_SCHEMA",
    "SemiWaveSolution",
    "SemiwaveError",
    "ThresholdNotBracketed",
    "Thresholds",
    "Violation",
    "best_growth_law",
    "boundary_flux",
    "build_cauchy_config",
    "build_fb_config",
    "build_kernels",
    "build_model",
    "check_mesh",
    "cholera",
    "classify",
    "classify_outcome",
    "compare_orderings",
    "concave",
    "convolve",
    "convolve_values",
    "cstep",
    "custom",
    "estimate_cstar",
    "eval_F",
    "exp_moment",
    "find_c0",
    "first_moment",
    "fit_front",
    "flux_functional",
    "jacobian",
    "kernel_from_json",
    "kernel_weights",
    "level_set",
    "linearized_front_speed",
    "lipschitz_bound",
    "load_scenario",
    "make_initial_cauchy_state",
    "make_initial_state",
    "make_kernel",
    "mirror_stable_sum",
    "model_from_json",
    "positive_equilibrium",
    "report_to_json_dict",
    "run",
    "run_cauchy",
    "run_suite",
    "scenario_dir",
    "solve_profile",
    "step",
    "tail_mass",
    "validate_scenario",
    "verify_assumptions",
    "wnv",
]

__version__ = "0.1.0"
