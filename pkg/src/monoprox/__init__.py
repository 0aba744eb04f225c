"""Proximal point and relaxed HPE methods for monotone inclusions, with
executable certificates for their convergence and complexity bounds."""

from monoprox.certify import (
    AffineMinorant,
    CheckReport,
    all_passed,
    check_large_step_bounds,
    check_ppm_trajectory,
    check_prox_error_bound,
    check_step_inequalities,
    check_sum_lower_bound,
    check_trace_scalars,
    check_trajectory,
)
from monoprox.ergodic import ErgodicAccumulator, ErgodicSnapshot, ergodic_recompute
from monoprox.exceptions import (
    ConfigError,
    DimensionError,
    InvalidCertificateError,
    MonoproxError,
    NoZeroError,
    NumericalFailure,
    Solved,
    UnsupportedOperatorError,
)
from monoprox.operators import (
    MonotoneOperator,
    affine,
    distance_to_zero,
    enlargement_gap,
    identity,
    operator_value,
    project_to_zero_set,
    random_spd,
    resolvent,
    sampled_enlargement_violation,
    subdiff_abs,
)
from monoprox.solver import (
    ErrorSchedule,
    ExactOracle,
    HpeParams,
    IterationRecord,
    LargeStepOracle,
    PerturbedOracle,
    Schedule,
    StepCertificate,
    Trajectory,
    exact_prox_step,
    large_step_search,
    perturbed_step,
    ppm_solve,
    rhpe_solve,
    validate_step,
)

__version__ = "0.1.0"
