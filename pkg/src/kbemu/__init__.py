"""Bayes linear emulation of deterministic simulators with known boundaries.

The package updates a second-order prior for an expensive simulator by
closed-form conditioning on one or two axis-aligned hyperplanes where the
simulator's behaviour is known analytically, then by a standard adjustment
on training runs. Design utilities (warped Latin hypercubes, greedy
V-optimal selection) exploit the same boundary structure, and diagnostics
quantify how well the result emulates held-out runs.
"""

from .errors import (
    ConditioningError,
    ConfigError,
    DegenerateBoundaryError,
    DomainError,
    EmulatorInconsistencyError,
    InvalidParameterError,
    KbemuError,
    ModelEvaluationError,
    NumericalConsistencyError,
    ShapeError,
    StiffnessError,
    UsageError,
)
from .kernel import (
    KernelFamily,
    KernelSpec,
    corr_1d,
    corr_product,
    ratio_corr_component,
    updated_corr_component,
    warp_integral,
    warp_integral_quad,
)
from .emulator import (
    AdjustedEmulator,
    AxisBoundary,
    BoundaryConfig,
    PriorSpec,
    SingleBoundary,
    TrainingSet,
    TwoParallelBoundaries,
    TwoPerpendicularBoundaries,
    blackbox_augmented_data,
    blackbox_augmented_points,
    boundary_cov,
    boundary_mean,
    boundary_var,
    brute_force_update,
    build_adjusted,
    emulator_config_from_json,
    emulator_config_to_json,
    project,
    query_cov,
    query_mean,
    query_var,
)

from .design import (
    CriterionGrid,
    Design,
    GreedyResult,
    greedy_v_optimal,
    latin_hypercube,
    load_design_csv,
    load_design_json,
    maximin_lhc,
    save_design_csv,
    save_design_json,
    sobol_pool,
    v_criterion,
    warp_design,
)
from .diagnostics import (
    DiagnosticReport,
    SliceSpec,
    SweepResult,
    format_summary_table,
    grid_sweep,
    rmse,
    standardized_errors,
)
from .models import (
    ArabidopsisSpec,
    arabidopsis_boundary_k6,
    arabidopsis_boundary_k8,
    boundary_names,
    default_arabidopsis_spec,
    get_boundary,
    integrate,
    load_arabidopsis_spec,
    make_plsp_simulator,
    plsp_boundary_k6,
    plsp_boundary_k8,
    plsp_output,
    register_boundary,
    toy_boundary_K,
    toy_boundary_L,
    toy_boundary_x1_one,
    toy_f,
)

__version__ = "0.1.0"
__all__ = [name for name in dir() if not name.startswith("_")]
