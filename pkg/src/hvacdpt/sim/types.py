"""Building description types and validation.

A building is a set of thermal zones (lumped RC nodes) grouped into air
loops. Each zone has one VAV box on its loop; the control action is the
minimum damper position of that box.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

SPEC_VERSION = 1

# Specific heat of air, J/(kg K). Shared by the step kernel and sizing checks.
AIR_CP = 1006.0


class SpecError(ValueError):
    """Invalid building specification."""


@dataclass(frozen=True)
class ZoneThermalParams:
    capacitance: float                      # J/K
    envelope_resistance: float              # K/W, zone air to outdoor
    inter_zone_resistances: dict[int, float] = field(default_factory=dict)  # K/W
    solar_aperture: float = 0.0             # m^2 effective gain area
    internal_gain_per_occupant: float = 0.0  # W while occupied
    moisture_gain_per_occupant: float = 0.0  # kg/s while occupied

    def validate(self, zone_id: int, zone_count: int) -> None:
        if self.capacitance <= 0:
            raise SpecError(f"zone {zone_id}: capacitance must be > 0")
        if self.envelope_resistance <= 0:
            raise SpecError(f"zone {zone_id}: envelope_resistance must be > 0")
        for j, r in self.inter_zone_resistances.items():
            if not (0 <= j < zone_count) or j == zone_id:
                raise SpecError(f"zone {zone_id}: bad neighbor id {j}")
            if r <= 0:
                raise SpecError(f"zone {zone_id}: resistance to zone {j} must be > 0")
        if self.solar_aperture < 0:
            raise SpecError(f"zone {zone_id}: solar_aperture must be >= 0")


@dataclass(frozen=True)
class AirLoopSpec:
    zones: tuple[int, ...]
    supply_temp_heating: float = 40.0       # degC at the reheat coil outlet
    supply_temp_cooling: float = 14.0       # degC at the cooling coil outlet
    max_zone_airflow: float = 0.55          # kg/s per zone at damper 1.0
    fan_power_coefficient: float = 250.0    # W per kg/s of airflow
    reheat_cop: float = 0.95
    cooling_cop: float = 3.0
    comfort_band: tuple[float, float] = (20.0, 24.0)
    outdoor_air_fraction: float = 0.5       # share of supply drawn from outside

    def validate(self, loop_id: int) -> None:
        lo, hi = self.comfort_band
        if not (self.supply_temp_cooling < lo < hi < self.supply_temp_heating):
            raise SpecError(
                f"air loop {loop_id}: need supply_cool < band_lo < band_hi < supply_heat, "
                f"got {self.supply_temp_cooling} < {lo} < {hi} < {self.supply_temp_heating}"
            )
        if self.reheat_cop <= 0 or self.cooling_cop <= 0:
            raise SpecError(f"air loop {loop_id}: COPs must be > 0")
        if self.max_zone_airflow <= 0:
            raise SpecError(f"air loop {loop_id}: max_zone_airflow must be > 0")
        if self.fan_power_coefficient < 0:
            raise SpecError(f"air loop {loop_id}: fan_power_coefficient must be >= 0")
        if not (0.0 <= self.outdoor_air_fraction <= 1.0):
            raise SpecError(f"air loop {loop_id}: outdoor_air_fraction must be in [0,1]")
        if not self.zones:
            raise SpecError(f"air loop {loop_id}: owns no zones")


@dataclass(frozen=True)
class PhysicsConstants:
    """Moisture-balance constants shared by all zones of a building."""

    zone_air_mass: float = 350.0        # kg of air per zone
    moisture_capacity: float = 4.0      # kg of water corresponding to 100 %
    supply_humidity: float = 30.0       # % carried by supply air
    comfort_gain: float = 1.0           # demanded damper fraction per degC of band violation

    def validate(self) -> None:
        if min(self.zone_air_mass, self.moisture_capacity) <= 0:
            raise SpecError("physics: air mass and moisture capacity must be > 0")
        if not (0 <= self.supply_humidity <= 100):
            raise SpecError("physics: supply_humidity must be in [0,100]")
        if self.comfort_gain <= 0:
            raise SpecError("physics: comfort_gain must be > 0")


@dataclass(frozen=True)
class BuildingSpec:
    name: str
    zone_count: int
    floor_area: float                   # m^2
    zones: tuple[ZoneThermalParams, ...]
    air_loops: tuple[AirLoopSpec, ...]
    timestep: float = 900.0             # s
    physics: PhysicsConstants = field(default_factory=PhysicsConstants)

    def validate(self) -> "BuildingSpec":
        if self.zone_count < 1:
            raise SpecError("zone_count must be >= 1")
        if self.floor_area <= 0:
            raise SpecError("floor_area must be > 0")
        if self.timestep <= 0:
            raise SpecError("timestep must be > 0")
        if len(self.zones) != self.zone_count:
            raise SpecError(f"expected {self.zone_count} zones, got {len(self.zones)}")
        self.physics.validate()

        owners: dict[int, int] = {}
        for li, loop in enumerate(self.air_loops):
            loop.validate(li)
            for z in loop.zones:
                if not (0 <= z < self.zone_count):
                    raise SpecError(f"air loop {li}: unknown zone {z}")
                if z in owners:
                    raise SpecError(f"zone {z} belongs to air loops {owners[z]} and {li}")
                owners[z] = li
        missing = [z for z in range(self.zone_count) if z not in owners]
        if missing:
            raise SpecError(f"zones {missing} belong to no air loop")

        for zi, zone in enumerate(self.zones):
            zone.validate(zi, self.zone_count)
            for j, r in zone.inter_zone_resistances.items():
                back = self.zones[j].inter_zone_resistances.get(zi)
                if back is None or abs(back - r) > 1e-9 * max(abs(r), 1.0):
                    raise SpecError(f"inter-zone resistance {zi}<->{j} is not symmetric")

        self._check_euler_stability()
        return self

    def _check_euler_stability(self) -> None:
        # Explicit Euler at `timestep` needs the fastest zone time constant to
        # stay well above the step; reject parameterizations that do not.
        for zi, zone in enumerate(self.zones):
            loop = self.loop_of(zi)
            u_total = 1.0 / zone.envelope_resistance
            u_total += sum(1.0 / r for r in zone.inter_zone_resistances.values())
            u_total += loop.max_zone_airflow * AIR_CP
            tau = zone.capacitance / u_total
            if tau <= 2.0 * self.timestep:
                raise SpecError(
                    f"zone {zi}: time constant {tau:.0f} s must exceed twice the "
                    f"timestep ({2 * self.timestep:.0f} s) for a stable Euler step"
                )

    def loop_of(self, zone_id: int) -> AirLoopSpec:
        for loop in self.air_loops:
            if zone_id in loop.zones:
                return loop
        raise SpecError(f"zone {zone_id} has no air loop")


def building_spec_to_dict(spec: BuildingSpec) -> dict:
    return {
        "spec_version": SPEC_VERSION,
        "name": spec.name,
        "zone_count": spec.zone_count,
        "floor_area_m2": spec.floor_area,
        "timestep_s": spec.timestep,
        "physics": {
            "zone_air_mass_kg": spec.physics.zone_air_mass,
            "moisture_capacity_kg": spec.physics.moisture_capacity,
            "supply_humidity_pct": spec.physics.supply_humidity,
            "comfort_gain_per_degc": spec.physics.comfort_gain,
        },
        "air_loops": [
            {
                "zones": list(loop.zones),
                "supply_temp_heating_c": loop.supply_temp_heating,
                "supply_temp_cooling_c": loop.supply_temp_cooling,
                "max_zone_airflow_kg_s": loop.max_zone_airflow,
                "fan_power_w_per_kg_s": loop.fan_power_coefficient,
                "reheat_cop": loop.reheat_cop,
                "cooling_cop": loop.cooling_cop,
                "comfort_band_c": list(loop.comfort_band),
                "outdoor_air_fraction": loop.outdoor_air_fraction,
            }
            for loop in spec.air_loops
        ],
        "zones": [
            {
                "capacitance_j_per_k": z.capacitance,
                "envelope_resistance_k_per_w": z.envelope_resistance,
                "inter_zone_resistance_k_per_w": {
                    str(j): r for j, r in sorted(z.inter_zone_resistances.items())
                },
                "solar_aperture_m2": z.solar_aperture,
                "internal_gain_w": z.internal_gain_per_occupant,
                "moisture_gain_kg_s": z.moisture_gain_per_occupant,
            }
            for z in spec.zones
        ],
    }


def building_spec_from_dict(data: dict) -> BuildingSpec:
    version = data.get("spec_version")
    if version != SPEC_VERSION:
        raise SpecError(f"unsupported spec_version {version!r}, expected {SPEC_VERSION}")
    try:
        phys = data.get("physics", {})
        spec = BuildingSpec(
            name=data["name"],
            zone_count=data["zone_count"],
            floor_area=data["floor_area_m2"],
            timestep=data.get("timestep_s", 900.0),
            physics=PhysicsConstants(
                zone_air_mass=phys.get("zone_air_mass_kg", 350.0),
                moisture_capacity=phys.get("moisture_capacity_kg", 4.0),
                supply_humidity=phys.get("supply_humidity_pct", 30.0),
                comfort_gain=phys.get("comfort_gain_per_degc", 1.0),
            ),
            air_loops=tuple(
                AirLoopSpec(
                    zones=tuple(l["zones"]),
                    supply_temp_heating=l["supply_temp_heating_c"],
                    supply_temp_cooling=l["supply_temp_cooling_c"],
                    max_zone_airflow=l["max_zone_airflow_kg_s"],
                    fan_power_coefficient=l["fan_power_w_per_kg_s"],
                    reheat_cop=l["reheat_cop"],
                    cooling_cop=l["cooling_cop"],
                    comfort_band=tuple(l["comfort_band_c"]),
                    outdoor_air_fraction=l.get("outdoor_air_fraction", 0.3),
                )
                for l in data["air_loops"]
            ),
            zones=tuple(
                ZoneThermalParams(
                    capacitance=z["capacitance_j_per_k"],
                    envelope_resistance=z["envelope_resistance_k_per_w"],
                    inter_zone_resistances={
                        int(j): r
                        for j, r in z.get("inter_zone_resistance_k_per_w", {}).items()
                    },
                    solar_aperture=z.get("solar_aperture_m2", 0.0),
                    internal_gain_per_occupant=z.get("internal_gain_w", 0.0),
                    moisture_gain_per_occupant=z.get("moisture_gain_kg_s", 0.0),
                )
                for z in data["zones"]
            ),
        )
    except KeyError as exc:
        raise SpecError(f"building spec is missing key {exc}") from exc
    return spec.validate()


def save_building_spec(spec: BuildingSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(building_spec_to_dict(spec), indent=2) + "\n")


def load_building_spec(path: str | Path) -> BuildingSpec:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: not valid JSON ({exc})") from exc
    return building_spec_from_dict(data)
