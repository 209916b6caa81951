"""Building-level stepping on top of the zone kernel."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernel
from .types import AIR_CP, AirLoopSpec, BuildingSpec, ZoneThermalParams

ENERGY_CATEGORIES = ("fan", "reheat", "cooling")


@dataclass(frozen=True)
class HvacEnergyBreakdown:
    fan: float
    reheat: float
    cooling: float

    @property
    def total(self) -> float:
        return self.fan + self.reheat + self.cooling


@dataclass
class SimState:
    zone_temps: np.ndarray        # degC, f8[n]
    zone_humidities: np.ndarray   # %, f8[n]
    timestep_index: int = 0
    energy_accumulators: np.ndarray = field(default=None)  # Wh, f8[n, 3]

    def __post_init__(self):
        if self.energy_accumulators is None:
            self.energy_accumulators = np.zeros((len(self.zone_temps), 3), dtype=np.float64)

    def copy(self) -> "SimState":
        return SimState(
            zone_temps=self.zone_temps.copy(),
            zone_humidities=self.zone_humidities.copy(),
            timestep_index=self.timestep_index,
            energy_accumulators=self.energy_accumulators.copy(),
        )


class CompiledBuilding:
    """BuildingSpec flattened into the arrays the step kernel consumes."""

    def __init__(self, spec: BuildingSpec):
        spec.validate()
        self.spec = spec
        n = spec.zone_count
        self.n_zones = n
        self.dt = float(spec.timestep)

        self.cap = np.array([z.capacitance for z in spec.zones], dtype=np.float64)
        self.r_env = np.array([z.envelope_resistance for z in spec.zones], dtype=np.float64)
        self.aperture = np.array([z.solar_aperture for z in spec.zones], dtype=np.float64)
        self.gain_w = np.array([z.internal_gain_per_occupant for z in spec.zones], dtype=np.float64)
        self.moist_gain = np.array([z.moisture_gain_per_occupant for z in spec.zones], dtype=np.float64)

        self.g_inter = np.zeros((n, n), dtype=np.float64)
        for i, zone in enumerate(spec.zones):
            for j, r in zone.inter_zone_resistances.items():
                self.g_inter[i, j] = 1.0 / r

        def per_zone(attr):
            return np.array([getattr(spec.loop_of(z), attr) for z in range(n)], dtype=np.float64)

        self.sup_heat = per_zone("supply_temp_heating")
        self.sup_cool = per_zone("supply_temp_cooling")
        self.max_flow = per_zone("max_zone_airflow")
        self.fan_coeff = per_zone("fan_power_coefficient")
        self.reheat_cop = per_zone("reheat_cop")
        self.cool_cop = per_zone("cooling_cop")
        self.band_lo = np.array([spec.loop_of(z).comfort_band[0] for z in range(n)], dtype=np.float64)
        self.band_hi = np.array([spec.loop_of(z).comfort_band[1] for z in range(n)], dtype=np.float64)
        self.oa_frac = per_zone("outdoor_air_fraction")

    def initial_state(self, initial_temp: float = 21.0, initial_humidity: float = 40.0) -> SimState:
        return SimState(
            zone_temps=np.full(self.n_zones, float(initial_temp), dtype=np.float64),
            zone_humidities=np.full(self.n_zones, float(initial_humidity), dtype=np.float64),
        )


def step_building(
    building: CompiledBuilding,
    state: SimState,
    actions: np.ndarray,
    outdoor_temp: float,
    solar: float,
    occupancy: np.ndarray,
) -> tuple[SimState, list[HvacEnergyBreakdown]]:
    """Advance every zone one timestep (Jacobi update on pre-step temps).

    Returns the successor state and one energy breakdown per zone; the
    successor's accumulators include this step's energy.
    """
    n = building.n_zones
    actions = np.asarray(actions, dtype=np.float64)
    if actions.shape != (n,):
        raise ValueError(f"expected {n} actions, got shape {actions.shape}")
    if np.any(actions < 0.0) or np.any(actions > 1.0):
        raise ValueError(f"actions must lie in [0,1], got {actions}")
    occupancy = np.asarray(occupancy, dtype=np.float64)
    if occupancy.shape != (n,):
        raise ValueError(f"expected {n} occupancy flags, got shape {occupancy.shape}")

    out_temps = np.empty(n, dtype=np.float64)
    out_hums = np.empty(n, dtype=np.float64)
    out_fan = np.empty(n, dtype=np.float64)
    out_reheat = np.empty(n, dtype=np.float64)
    out_cool = np.empty(n, dtype=np.float64)

    phys = building.spec.physics
    kernel.step_zones(
        state.zone_temps, state.zone_humidities, actions, occupancy,
        float(outdoor_temp), float(solar), building.dt,
        AIR_CP, phys.comfort_gain, phys.zone_air_mass,
        phys.moisture_capacity, phys.supply_humidity,
        building.cap, building.r_env, building.aperture, building.gain_w,
        building.moist_gain, building.g_inter,
        building.sup_heat, building.sup_cool, building.max_flow,
        building.fan_coeff, building.reheat_cop, building.cool_cop,
        building.band_lo, building.band_hi, building.oa_frac,
        out_temps, out_hums, out_fan, out_reheat, out_cool,
    )

    acc = state.energy_accumulators.copy()
    acc[:, 0] += out_fan
    acc[:, 1] += out_reheat
    acc[:, 2] += out_cool
    new_state = SimState(
        zone_temps=out_temps,
        zone_humidities=out_hums,
        timestep_index=state.timestep_index + 1,
        energy_accumulators=acc,
    )
    breakdowns = [
        HvacEnergyBreakdown(fan=float(out_fan[i]), reheat=float(out_reheat[i]), cooling=float(out_cool[i]))
        for i in range(n)
    ]
    return new_state, breakdowns


def step_zone_hvac(
    zone: ZoneThermalParams,
    loop: AirLoopSpec,
    zone_temp: float,
    zone_humidity: float,
    min_damper: float,
    outdoor_temp: float,
    solar: float,
    occupied: int,
    dt: float = 900.0,
    physics=None,
) -> tuple[tuple[float, float], HvacEnergyBreakdown]:
    """Single-zone step (no inter-zone coupling), sharing the building kernel."""
    if not (0.0 <= min_damper <= 1.0):
        raise ValueError(f"min_damper must lie in [0,1], got {min_damper}")
    from .types import BuildingSpec, PhysicsConstants

    spec = BuildingSpec(
        name="single-zone",
        zone_count=1,
        floor_area=1.0,
        zones=(ZoneThermalParams(
            capacitance=zone.capacitance,
            envelope_resistance=zone.envelope_resistance,
            inter_zone_resistances={},
            solar_aperture=zone.solar_aperture,
            internal_gain_per_occupant=zone.internal_gain_per_occupant,
            moisture_gain_per_occupant=zone.moisture_gain_per_occupant,
        ),),
        air_loops=(AirLoopSpec(
            zones=(0,),
            supply_temp_heating=loop.supply_temp_heating,
            supply_temp_cooling=loop.supply_temp_cooling,
            max_zone_airflow=loop.max_zone_airflow,
            fan_power_coefficient=loop.fan_power_coefficient,
            reheat_cop=loop.reheat_cop,
            cooling_cop=loop.cooling_cop,
            comfort_band=loop.comfort_band,
            outdoor_air_fraction=loop.outdoor_air_fraction,
        ),),
        timestep=dt,
        physics=physics if physics is not None else PhysicsConstants(),
    )
    compiled = CompiledBuilding(spec)
    state = SimState(
        zone_temps=np.array([zone_temp], dtype=np.float64),
        zone_humidities=np.array([zone_humidity], dtype=np.float64),
    )
    new_state, breakdowns = step_building(
        compiled, state, np.array([min_damper]), outdoor_temp, solar,
        np.array([occupied], dtype=np.float64),
    )
    return (float(new_state.zone_temps[0]), float(new_state.zone_humidities[0])), breakdowns[0]
