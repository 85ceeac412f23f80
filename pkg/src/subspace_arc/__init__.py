"""Adaptive cubic regularization in random subspaces.

Public surface: sketching ensembles, the reduced cubic model and its exact
subproblem solver, the ARC / R-ARC / R-ARC-D driver, closed-form benchmark
problems with low-rank liftings, and the data-profile benchmark harness.
"""

from .bench import (
    ConfigError,
    ProblemSpec,
    ProfilePoint,
    SolverSpec,
    SuiteConfig,
    data_profile,
    default_alpha_grid,
    n_p,
    parse_suite_config,
    run_suite,
)
from .driver import (
    IterationRow,
    RunRecord,
    SolverConfig,
    Status,
    rarc_iteration,
    rho,
    run,
    update_sketch_dim,
)
from .model import (
    ReducedModel,
    RegMode,
    model_gradient,
    model_hessian,
    model_value,
    quadratic_part,
    regularizer_norm,
)
from .problems import (
    LowRankSpec,
    Problem,
    builtin_problem,
    dense_hessian,
    make_low_rank,
    make_low_rank_spec,
    wrap_low_rank,
)
from .sketch import (
    GAUSSIAN,
    HAAR,
    IDENTITY,
    SAMPLING,
    Ensemble,
    SketchMatrix,
    draw_sketch,
    embedding_trial,
    hashing,
    jl_sketch_dim,
    numeric_rank,
    sketch_hessian,
    sketch_vector,
)
from .subproblem import NumericError, SolverFailure, SubproblemSolution, solve_cubic

__version__ = "0.1.0"
