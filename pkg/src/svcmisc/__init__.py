"""Vestibular motion-sickness toolkit: SVC observer, MISC output dynamics,
scenario synthesis, and per-individual parameter fitting."""

__version__ = "0.1.0"

from .motion_data import (  # noqa: F401
    MotionSample,
    MotionTrace,
    MiscObservation,
    MiscTrace,
    RawMotion,
    load_motion_csv,
    load_misc_csv,
    resample_linear,
    write_motion_csv,
    write_misc_csv,
)
from .svc_observer import (  # noqa: F401
    SvcParams,
    SvcState,
    FeedbackSolution,
    initial_state,
    resolve_feedback,
    derivatives,
    conflict_norm,
)
from .misc_output import (  # noqa: F401
    OutputVariant,
    OutputParams,
    OutputState,
    hill,
    output_input,
    output_derivatives,
    output_misc,
    steady_state_misc,
)
from .simulator import SimConfig, SimResult, simulate, sample_at  # noqa: F401
from .scenario import (  # noqa: F401
    ShuttleConfig,
    HeadTilt,
    HeadTiltCondition,
    ShuttleProfile,
    shuttle_accel_profile,
    head_motion,
)
from .fitting import (  # noqa: F401
    ConditionData,
    FitConfig,
    FitResult,
    objective_j,
    fit,
    pearson_r,
    mean_abs_error,
)
