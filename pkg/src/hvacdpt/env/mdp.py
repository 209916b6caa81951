"""Episodic multi-agent MDP over the building simulator.

One agent per zone; the joint action is a vector of minimum damper
positions. Per-zone reward is the negated VAV energy (Wh) of the step, so
the summed negative reward over an episode is exactly the zone's energy
accumulator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..sim.building import CompiledBuilding, HvacEnergyBreakdown, SimState, step_building
from ..sim.occupancy import generate_occupancy
from ..sim.types import BuildingSpec
from ..sim.weather import WeatherSeries, generate_weather

HORIZON_DEFAULT = 2976  # 31 days at 15-minute steps
STEPS_PER_HOUR = 4


@dataclass(frozen=True)
class ZoneObservation:
    zone_mean_temp: float
    zone_mean_humidity: float
    zone_occupancy: int
    outdoor_temp: float
    solar_radiation: float
    hour_of_day: int

    def as_vector(self) -> np.ndarray:
        return np.array(
            [
                self.zone_mean_temp,
                self.zone_mean_humidity,
                float(self.zone_occupancy),
                self.outdoor_temp,
                self.solar_radiation,
                float(self.hour_of_day),
            ],
            dtype=np.float64,
        )

    @classmethod
    def from_vector(cls, vec) -> "ZoneObservation":
        return cls(
            zone_mean_temp=float(vec[0]),
            zone_mean_humidity=float(vec[1]),
            zone_occupancy=int(round(float(vec[2]))),
            outdoor_temp=float(vec[3]),
            solar_radiation=float(vec[4]),
            hour_of_day=int(round(float(vec[5]))),
        )


@dataclass(frozen=True)
class AgentAction:
    min_damper_position: float

    def __post_init__(self):
        if not (0.0 <= self.min_damper_position <= 1.0):
            raise ValueError(f"min_damper_position must lie in [0,1], got {self.min_damper_position}")


@dataclass(frozen=True)
class TransitionTuple:
    s: ZoneObservation
    a: float
    s_next: ZoneObservation
    r: float  # negated Wh, <= 0


@dataclass(frozen=True)
class EpisodeConfig:
    horizon: int = HORIZON_DEFAULT
    start_month: int = 1
    weather_seed: int = 0
    occupancy_seed: int = 0
    initial_temp: float = 21.0
    initial_humidity: float = 40.0

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not (1 <= self.start_month <= 12):
            raise ValueError("start_month must be in 1..12")


class EpisodeDone(RuntimeError):
    """step() called after the horizon was reached."""


class BuildingEnv:
    """One controllable building episode. Instances are single-writer."""

    def __init__(
        self,
        building: BuildingSpec,
        cfg: EpisodeConfig,
        weather: WeatherSeries | None = None,
    ):
        self.spec = building.validate()
        self.cfg = cfg
        self.compiled = CompiledBuilding(self.spec)
        self.n_zones = self.spec.zone_count
        self.weather = weather if weather is not None else generate_weather(
            cfg.weather_seed, cfg.start_month, cfg.horizon
        )
        if len(self.weather) < cfg.horizon:
            raise ValueError(
                f"weather series has {len(self.weather)} steps, horizon needs {cfg.horizon}"
            )
        self.occupancy = generate_occupancy(cfg.occupancy_seed, self.n_zones, cfg.horizon)
        self.state: SimState | None = None
        self._done = True

    @property
    def horizon(self) -> int:
        return self.cfg.horizon

    @property
    def done(self) -> bool:
        return self._done

    def reset(self) -> list[ZoneObservation]:
        self.state = self.compiled.initial_state(
            self.cfg.initial_temp, self.cfg.initial_humidity
        )
        self._done = False
        return self._observe()

    def _observe(self) -> list[ZoneObservation]:
        t = self.state.timestep_index
        w_idx = min(t, len(self.weather) - 1)
        occ_idx = min(t, len(self.occupancy) - 1)
        hour = (t // STEPS_PER_HOUR) % 24
        return [
            ZoneObservation(
                zone_mean_temp=float(self.state.zone_temps[z]),
                zone_mean_humidity=float(self.state.zone_humidities[z]),
                zone_occupancy=int(self.occupancy.occupied[z, occ_idx]),
                outdoor_temp=float(self.weather.outdoor_temp[w_idx]),
                solar_radiation=float(self.weather.solar_radiation[w_idx]),
                hour_of_day=int(hour),
            )
            for z in range(self.n_zones)
        ]

    def step(
        self, actions: np.ndarray | list[float]
    ) -> tuple[list[ZoneObservation], np.ndarray, bool, list[HvacEnergyBreakdown]]:
        """Advance one 900 s step. Returns (observations, rewards, done, breakdowns)."""
        if self.state is None:
            raise RuntimeError("call reset() before step()")
        if self._done:
            raise EpisodeDone(f"episode finished after {self.cfg.horizon} steps")
        actions = np.asarray(
            [a.min_damper_position if isinstance(a, AgentAction) else a for a in actions],
            dtype=np.float64,
        )
        t = self.state.timestep_index
        self.state, breakdowns = step_building(
            self.compiled,
            self.state,
            actions,
            float(self.weather.outdoor_temp[t]),
            float(self.weather.solar_radiation[t]),
            self.occupancy.occupied[:, t],
        )
        rewards = -np.array([b.total for b in breakdowns], dtype=np.float64)
        self._done = self.state.timestep_index >= self.cfg.horizon
        return self._observe(), rewards, self._done, breakdowns

    def zone_energy_totals(self) -> np.ndarray:
        """Per-zone accumulated energy (Wh) since reset, shape (n_zones,)."""
        return self.state.energy_accumulators.sum(axis=1)

    def energy_by_category(self) -> dict[str, float]:
        acc = self.state.energy_accumulators
        return {
            "fan": float(acc[:, 0].sum()),
            "reheat": float(acc[:, 1].sum()),
            "cooling": float(acc[:, 2].sum()),
        }
