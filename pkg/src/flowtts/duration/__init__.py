from .mas import mas, gaussian_log_lik_matrix
from .sdp import (
    DurationFlow,
    DurationFlowConfig,
    build_condition,
    duration_nll,
    expand_prior,
    sample_durations,
)

__all__ = [
    "mas",
    "gaussian_log_lik_matrix",
    "DurationFlow",
    "DurationFlowConfig",
    "build_condition",
    "duration_nll",
    "expand_prior",
    "sample_durations",
]
