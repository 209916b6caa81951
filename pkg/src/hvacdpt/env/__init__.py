from .mdp import (
    HORIZON_DEFAULT,
    AgentAction,
    BuildingEnv,
    EpisodeConfig,
    EpisodeDone,
    TransitionTuple,
    ZoneObservation,
)
from .norm import (
    DEFAULT_NORM_STATS,
    OBS_FIELDS,
    NormStats,
    denormalize_observation,
    normalize_observation,
)
from .translog import (
    read_transition_log,
    record_to_transition,
    transition_to_record,
    write_transition_log,
)

__all__ = [
    "HORIZON_DEFAULT", "AgentAction", "BuildingEnv", "EpisodeConfig",
    "EpisodeDone", "TransitionTuple", "ZoneObservation", "DEFAULT_NORM_STATS",
    "OBS_FIELDS", "NormStats", "denormalize_observation", "normalize_observation",
    "read_transition_log", "record_to_transition", "transition_to_record",
    "write_transition_log",
]
