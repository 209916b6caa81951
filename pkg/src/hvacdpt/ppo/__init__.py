from .policy import LOG_STD_MAX, LOG_STD_MIN, PpoPolicy
from .train import (
    NonFiniteLoss,
    PpoConfig,
    RunningStd,
    collect_rollout,
    compute_gae,
    evaluate_policies,
    make_optimizers,
    ppo_update,
    trajectory_to_batch,
)
from .library import DiversityConfig, LibraryEntry, PolicyLibrary, TrainingRun, train_policy_library

__all__ = [
    "LOG_STD_MAX", "LOG_STD_MIN", "PpoPolicy", "NonFiniteLoss", "PpoConfig",
    "RunningStd", "collect_rollout", "compute_gae", "evaluate_policies",
    "make_optimizers", "ppo_update", "trajectory_to_batch", "DiversityConfig",
    "LibraryEntry", "PolicyLibrary", "TrainingRun", "train_policy_library",
]
