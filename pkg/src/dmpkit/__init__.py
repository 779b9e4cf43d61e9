"""Movement primitives for point-to-point, cyclic and geometric motions.

A second-order attractor with a learnable forcing term, in the classical
and goal-scaled formulations, on vector spaces and on the unit-quaternion,
rotation-matrix and symmetric-positive-definite manifolds; batch and
recursive fitting; segment joining by switching, moving-target crossing or
kernel overlay; obstacle, force and speed couplings; and a small model
library with similarity-based recognition.
"""

from ._fast import BACKEND
from .basis import (
    GAUSSIAN_PHASE,
    GAUSSIAN_TIME,
    VON_MISES,
    ForcingModel,
    KernelLayout,
    basis_row,
    default_layout,
    eval_forcing,
    kernel_values,
)
from .coupling import (
    CouplingState,
    ForceCoupling,
    ObstacleField,
    SpeedProfile,
    coupling_init,
    fit_speed_profile,
    force_coupled_step,
    obstacle_term,
    rollout_coupled,
    speed_scaled_step,
)
from .discrete import (
    VARIANTS,
    DiscreteDmp,
    TransformStateR,
    ViaGoalSchedule,
    goal_switch_step,
    init_state,
    rollout,
    step,
    train_discrete,
    via_goal,
)
from .errors import (
    DegenerateDemo,
    DimensionMismatch,
    DmpError,
    DomainError,
    InvalidArgument,
    InvalidStep,
    InvariantViolation,
    LayoutMismatch,
    NoNeighbors,
    NoSwitch,
    NotSpd,
    ParseError,
    RankDeficient,
    StepTooLarge,
    ZeroVariance,
)
from .fileio import (
    dump_model,
    dump_trajectory,
    load_library,
    load_model,
    load_trajectory,
    parse_model,
    parse_trajectory,
    save_library,
    save_model,
    save_trajectory,
)
from .geometric import (
    QuaternionDmp,
    QuaternionState,
    RotationDmp,
    RotationState,
    SpdDmp,
    SpdState,
    quat_goal_error,
    quat_goal_switch_step,
    quat_init_state,
    quat_rollout,
    quat_step,
    rot_goal_error,
    rot_goal_switch_step,
    rot_init_state,
    rot_rollout,
    rot_step,
    spd_goal_error,
    spd_goal_switch_step,
    spd_init_state,
    spd_rollout,
    spd_step,
    train_quaternion,
    train_rotation,
    train_spd,
)
from .joining import (
    DelayedGoal,
    DmpSequence,
    JoinedRollout,
    MovingTarget,
    OverlayDmp,
    OverlayQuaternionDmp,
    PoseSegment,
    QuatDelayedGoal,
    join_overlay,
    join_target_crossing,
    join_velocity_threshold,
    moving_quat_target,
    overlay_rollout,
    train_overlay,
)
from .learning import (
    RecursiveLearnerState,
    batch_fit,
    default_ridge,
    estimate_derivatives,
    feedback_adapt_step,
    forcing_target,
    recursive_fit_step,
    recursive_init,
    regression_matrix,
)
from .library import (
    LibraryEntry,
    ModelLibrary,
    classify,
    interpolate_weights,
    similarity,
)
from .periodic import (
    PeriodicDmp,
    PeriodicState,
    forcing_target_periodic,
    infer_frequency,
    train_periodic,
)
from .phase import (
    CanonicalState,
    ExponentialPhase,
    LinearPhase,
    PeriodicPhase,
    SigmoidalPhase,
    StopFeedback,
    make_phase,
    phase_angle,
    phase_done,
    step_phase,
)
from .trajectory import (
    KINDS,
    QUATERNION,
    REAL,
    ROTATION,
    SPD,
    Demonstration,
    Trajectory,
)

__version__ = "0.1.0"
