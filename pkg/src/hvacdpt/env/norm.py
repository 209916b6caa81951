"""Observation normalization for network inputs.

Continuous components use affine (x - mean) / std maps; the binary
occupancy flag and the hour index use fixed maps onto [-1, 1] so their
scale never depends on data statistics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Canonical observation component order.
OBS_FIELDS = (
    "zone_mean_temp",
    "zone_mean_humidity",
    "zone_occupancy",
    "outdoor_temp",
    "solar_radiation",
    "hour_of_day",
)
IDX_OCCUPANCY = 2
IDX_HOUR = 5
_CONTINUOUS = (0, 1, 3, 4)


@dataclass(frozen=True)
class NormStats:
    mean: tuple[float, ...]
    std: tuple[float, ...]

    def __post_init__(self):
        if len(self.mean) != 6 or len(self.std) != 6:
            raise ValueError("NormStats needs 6 means and 6 stds")
        arr = np.array(self.mean + self.std, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise ValueError("NormStats must be finite")
        if any(self.std[i] <= 0 for i in _CONTINUOUS):
            raise ValueError("NormStats stds must be > 0 on continuous components")

    def to_dict(self) -> dict:
        return {"mean": list(self.mean), "std": list(self.std)}

    @classmethod
    def from_dict(cls, data: dict) -> "NormStats":
        return cls(mean=tuple(data["mean"]), std=tuple(data["std"]))


# Fixed stats matched to the surrogate's physical ranges. Entries at the
# occupancy/hour slots are placeholders kept for layout stability.
DEFAULT_NORM_STATS = NormStats(
    mean=(21.0, 40.0, 0.0, 10.0, 130.0, 0.0),
    std=(4.0, 18.0, 1.0, 12.0, 220.0, 1.0),
)


def normalize_observation(obs: np.ndarray, stats: NormStats) -> np.ndarray:
    """Map a raw 6-vector (or batch thereof, last axis 6) to network scale."""
    obs = np.asarray(obs, dtype=np.float64)
    if obs.shape[-1] != 6:
        raise ValueError(f"observation must have 6 components, got {obs.shape}")
    mean = np.asarray(stats.mean)
    std = np.asarray(stats.std)
    out = (obs - mean) / std
    out[..., IDX_OCCUPANCY] = 2.0 * obs[..., IDX_OCCUPANCY] - 1.0
    out[..., IDX_HOUR] = 2.0 * obs[..., IDX_HOUR] / 23.0 - 1.0
    return out


def denormalize_observation(vec: np.ndarray, stats: NormStats) -> np.ndarray:
    vec = np.asarray(vec, dtype=np.float64)
    if vec.shape[-1] != 6:
        raise ValueError(f"normalized observation must have 6 components, got {vec.shape}")
    mean = np.asarray(stats.mean)
    std = np.asarray(stats.std)
    out = vec * std + mean
    out[..., IDX_OCCUPANCY] = (vec[..., IDX_OCCUPANCY] + 1.0) / 2.0
    out[..., IDX_HOUR] = (vec[..., IDX_HOUR] + 1.0) * 23.0 / 2.0
    return out
