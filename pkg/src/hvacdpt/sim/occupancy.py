"""Deterministic synthetic occupancy schedules.

Weekday office profile (roughly 8h to 18h) with small per-zone, per-day
seeded jitter and occasional absence days. Episodes start on a Monday at
local midnight.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .weather import STEPS_PER_DAY, STEPS_PER_HOUR


@dataclass(frozen=True)
class OccupancySchedule:
    occupied: np.ndarray  # uint8 array of shape (zone_count, n_steps), values 0/1

    def __post_init__(self):
        vals = np.unique(self.occupied)
        if not np.all(np.isin(vals, [0, 1])):
            raise ValueError("occupancy values must be 0 or 1")

    @property
    def zone_count(self) -> int:
        return self.occupied.shape[0]

    def __len__(self) -> int:
        return self.occupied.shape[1]


def generate_occupancy(seed: int, zone_count: int, n_steps: int) -> OccupancySchedule:
    if n_steps <= 0 or zone_count <= 0:
        raise ValueError("zone_count and n_steps must be > 0")
    n_days = n_steps // STEPS_PER_DAY + 1
    occ = np.zeros((zone_count, n_steps), dtype=np.uint8)
    t = np.arange(n_steps)
    day = t // STEPS_PER_DAY
    hour = (t // STEPS_PER_HOUR) % 24
    weekday = (day % 7) < 5
    for z in range(zone_count):
        rng = np.random.default_rng([int(seed), z, 0x0CC])
        start = 8 + rng.integers(-1, 2, size=n_days)
        end = 18 + rng.integers(-1, 2, size=n_days)
        absent = rng.random(n_days) < 0.05
        on = weekday & ~absent[day] & (hour >= start[day]) & (hour < end[day])
        occ[z] = on.astype(np.uint8)
    return OccupancySchedule(occupied=occ)
