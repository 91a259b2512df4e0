"""Adaptive mirror descent for convex programs with functional constraints.

Minimize a convex objective subject to convex functional constraints over a
simple feasible set (all of R^n, a Euclidean ball, or the unit simplex),
with step sizes and stopping driven entirely by observed subgradient norms.
"""

from .geometry import (
    EntropySimplex,
    EuclideanBall,
    EuclideanSpace,
    ProxGeometry,
    bregman_divergence,
    dual_norm,
    mirror_step,
)
from .problems import (
    AbsAffinePlusOracle,
    AffineOracle,
    EvaluationError,
    MaxOracle,
    Oracle,
    OracleBank,
    ProblemInstance,
    QuadraticOracle,
    SqrtQuadraticOracle,
    estimate_lipschitz,
    evaluate,
    max_violation,
)
from .solver import (
    Policy,
    Regime,
    RunConfig,
    SolverReport,
    StepKind,
    StepRecord,
    StopReason,
    corollary_bound,
    iteration_bound,
    run,
    select_constraint,
    vf_gap,
)
from .benchmarks import (
    BenchmarkExample,
    ExperimentSettings,
    GridSpec,
    REFERENCE_RESULTS,
    ReferenceResult,
    VerificationCheck,
    VerificationResult,
    brute_force_optimum,
    build_example,
    default_geometry,
    verify_example,
)
from .probfile import (
    ProblemDocument,
    ProblemFileError,
    dump_problem,
    load_problem,
    parse_problem,
    problem_to_mapping,
)

__version__ = "0.1.0"

__all__ = [
    "ProxGeometry",
    "EuclideanSpace",
    "EuclideanBall",
    "EntropySimplex",
    "dual_norm",
    "bregman_divergence",
    "mirror_step",
    "Oracle",
    "AffineOracle",
    "QuadraticOracle",
    "SqrtQuadraticOracle",
    "AbsAffinePlusOracle",
    "MaxOracle",
    "OracleBank",
    "ProblemInstance",
    "EvaluationError",
    "evaluate",
    "max_violation",
    "estimate_lipschitz",
    "Regime",
    "Policy",
    "StopReason",
    "StepKind",
    "RunConfig",
    "StepRecord",
    "SolverReport",
    "select_constraint",
    "run",
    "vf_gap",
    "iteration_bound",
    "corollary_bound",
    "BenchmarkExample",
    "ExperimentSettings",
    "ReferenceResult",
    "REFERENCE_RESULTS",
    "build_example",
    "default_geometry",
    "verify_example",
    "VerificationCheck",
    "VerificationResult",
    "GridSpec",
    "brute_force_optimum",
    "ProblemDocument",
    "ProblemFileError",
    "parse_problem",
    "load_problem",
    "problem_to_mapping",
    "dump_problem",
    "__version__",
]
