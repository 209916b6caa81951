from .types import (
    AIR_CP,
    AirLoopSpec,
    BuildingSpec,
    PhysicsConstants,
    SpecError,
    ZoneThermalParams,
    load_building_spec,
    save_building_spec,
)
from .weather import WeatherSeries, WeatherCsvError, generate_weather, load_weather_csv, save_weather_csv
from .occupancy import OccupancySchedule, generate_occupancy
from .building import (
    CompiledBuilding,
    HvacEnergyBreakdown,
    SimState,
    step_building,
    step_zone_hvac,
)
from .presets import load_preset, make_b_denver, make_b_train, scale_building, training_buildings
from . import kernel

__all__ = [
    "AIR_CP", "AirLoopSpec", "BuildingSpec", "PhysicsConstants", "SpecError",
    "ZoneThermalParams", "load_building_spec", "save_building_spec",
    "WeatherSeries", "WeatherCsvError", "generate_weather", "load_weather_csv",
    "save_weather_csv", "OccupancySchedule", "generate_occupancy",
    "CompiledBuilding", "HvacEnergyBreakdown", "SimState", "step_building",
    "step_zone_hvac", "load_preset", "make_b_denver", "make_b_train",
    "scale_building", "training_buildings", "kernel",
]
