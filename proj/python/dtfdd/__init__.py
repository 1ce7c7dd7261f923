from ._dtfdd import (
    ActionSpace,
    ConfigError,
    FrameAction,
    NO_UE,
    TrainingError,
    action_space_size,
    count_subchannel_assignments,
    los_probability,
    metropolis_weights,
    policies,
    render_config,
    run,
)

__all__ = [
    "ActionSpace",
    "ConfigError",
    "FrameAction",
    "NO_UE",
    "TrainingError",
    "action_space_size",
    "count_subchannel_assignments",
    "los_probability",
    "metropolis_weights",
    "policies",
    "render_config",
    "run",
]
