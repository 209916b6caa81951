"""Shipped building presets and training-variant generation.

``b_train``: 5-zone single-loop small office, 511.16 m^2.
``b_denver``: 15-zone medium office on 3 air loops (one per floor), 4982.19 m^2.

The JSON files under ``hvacdpt/presets/`` are the canonical shipped specs;
the constructors here regenerate them.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .types import (
    AirLoopSpec,
    BuildingSpec,
    PhysicsConstants,
    ZoneThermalParams,
    building_spec_from_dict,
    load_building_spec,
    save_building_spec,
)

import json

PRESET_NAMES = ("b_train", "b_denver")


def _chain_resistances(zone_ids: list[int], r: float) -> dict[int, dict[int, float]]:
    """Line topology: consecutive zones share a partition of resistance r."""
    res: dict[int, dict[int, float]] = {z: {} for z in zone_ids}
    for a, b in zip(zone_ids, zone_ids[1:]):
        res[a][b] = r
        res[b][a] = r
    return res


def make_b_train() -> BuildingSpec:
    zone_ids = list(range(5))
    inter = _chain_resistances(zone_ids, 0.02)
    apertures = [6.0, 4.0, 2.5, 4.0, 6.0]
    zones = tuple(
        ZoneThermalParams(
            capacitance=9.0e6,
            envelope_resistance=1.0 / 120.0,
            inter_zone_resistances=inter[z],
            solar_aperture=apertures[z],
            internal_gain_per_occupant=1200.0,
            moisture_gain_per_occupant=8.0e-5,
        )
        for z in zone_ids
    )
    loop = AirLoopSpec(
        zones=tuple(zone_ids),
        supply_temp_heating=40.0,
        supply_temp_cooling=14.0,
        max_zone_airflow=0.55,
        fan_power_coefficient=250.0,
        reheat_cop=0.95,
        cooling_cop=3.0,
        comfort_band=(20.0, 24.0),
        outdoor_air_fraction=0.5,
    )
    return BuildingSpec(
        name="b_train",
        zone_count=5,
        floor_area=511.16,
        zones=zones,
        air_loops=(loop,),
        timestep=900.0,
        physics=PhysicsConstants(zone_air_mass=350.0, moisture_capacity=4.0),
    ).validate()


def make_b_denver() -> BuildingSpec:
    # Three floors of five zones; each floor is one air loop. Zones 0..4 on
    # floor 0, 5..9 on floor 1, 10..14 on floor 2. Perimeter zones carry the
    # solar apertures, the middle zone of each floor is a core zone.
    n = 15
    inter: dict[int, dict[int, float]] = {z: {} for z in range(n)}
    for floor in range(3):
        ids = [floor * 5 + k for k in range(5)]
        for a, b in zip(ids, ids[1:]):
            inter[a][b] = 0.012
            inter[b][a] = 0.012
    for z in range(10):  # vertical coupling through slabs
        inter[z][z + 5] = 0.03
        inter[z + 5][z] = 0.03

    aperture_by_pos = [16.0, 10.0, 3.0, 10.0, 16.0]
    zones = tuple(
        ZoneThermalParams(
            capacitance=2.8e7,
            envelope_resistance=1.0 / 300.0 if (z % 5) != 2 else 1.0 / 150.0,
            inter_zone_resistances=inter[z],
            solar_aperture=aperture_by_pos[z % 5],
            internal_gain_per_occupant=3600.0,
            moisture_gain_per_occupant=2.4e-4,
        )
        for z in range(n)
    )
    loops = tuple(
        AirLoopSpec(
            zones=tuple(floor * 5 + k for k in range(5)),
            supply_temp_heating=40.0,
            supply_temp_cooling=14.0,
            max_zone_airflow=1.7,
            fan_power_coefficient=250.0,
            reheat_cop=0.95,
            cooling_cop=3.0,
            comfort_band=(20.0, 24.0),
            outdoor_air_fraction=0.5,
        )
        for floor in range(3)
    )
    return BuildingSpec(
        name="b_denver",
        zone_count=n,
        floor_area=4982.19,
        zones=zones,
        air_loops=loops,
        timestep=900.0,
        physics=PhysicsConstants(zone_air_mass=1100.0, moisture_capacity=12.0),
    ).validate()


_MAKERS = {"b_train": make_b_train, "b_denver": make_b_denver}

# Named sizing/mass variants of the base training building, used to widen
# the pretraining task distribution.
_DERIVED = {
    "b_train_heavy": lambda: scale_building(
        make_b_train(), "b_train_heavy", airflow_scale=0.75, mass_scale=2.0, aperture_scale=0.8
    ),
    "b_train_light": lambda: scale_building(
        make_b_train(), "b_train_light", airflow_scale=1.6, mass_scale=0.55, aperture_scale=1.25
    ),
}


def load_preset(name: str) -> BuildingSpec:
    """Load a shipped preset by name, a derived variant, or a spec file path."""
    if name in PRESET_NAMES:
        data = resources.files("hvacdpt.presets").joinpath(f"{name}.json").read_text()
        return building_spec_from_dict(json.loads(data))
    if name in _DERIVED:
        return _DERIVED[name]()
    path = Path(name)
    if path.exists():
        return load_building_spec(path)
    known = ", ".join(list(PRESET_NAMES) + list(_DERIVED))
    raise ValueError(f"unknown preset {name!r} (known: {known})")


def scale_building(
    spec: BuildingSpec,
    name: str,
    airflow_scale: float = 1.0,
    mass_scale: float = 1.0,
    aperture_scale: float = 1.0,
) -> BuildingSpec:
    """Derive a building variant with rescaled VAV sizing and thermal mass."""
    zones = tuple(
        ZoneThermalParams(
            capacitance=z.capacitance * mass_scale,
            envelope_resistance=z.envelope_resistance,
            inter_zone_resistances=dict(z.inter_zone_resistances),
            solar_aperture=z.solar_aperture * aperture_scale,
            internal_gain_per_occupant=z.internal_gain_per_occupant,
            moisture_gain_per_occupant=z.moisture_gain_per_occupant,
        )
        for z in spec.zones
    )
    loops = tuple(
        AirLoopSpec(
            zones=loop.zones,
            supply_temp_heating=loop.supply_temp_heating,
            supply_temp_cooling=loop.supply_temp_cooling,
            max_zone_airflow=loop.max_zone_airflow * airflow_scale,
            fan_power_coefficient=loop.fan_power_coefficient,
            reheat_cop=loop.reheat_cop,
            cooling_cop=loop.cooling_cop,
            comfort_band=loop.comfort_band,
            outdoor_air_fraction=loop.outdoor_air_fraction,
        )
        for loop in spec.air_loops
    )
    return BuildingSpec(
        name=name,
        zone_count=spec.zone_count,
        floor_area=spec.floor_area,
        zones=zones,
        air_loops=loops,
        timestep=spec.timestep,
        physics=spec.physics,
    ).validate()


def training_buildings() -> list[BuildingSpec]:
    """The default pretraining task distribution: the base small office plus
    variants that shift VAV sizing and thermal mass in opposite directions."""
    return [make_b_train(), _DERIVED["b_train_heavy"](), _DERIVED["b_train_light"]()]


def regenerate_preset_files(out_dir: str | Path) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, maker in _MAKERS.items():
        save_building_spec(maker(), out_dir / f"{name}.json")
