import math

import numpy as np
import pytest

from hvacdpt.sim import (
    AirLoopSpec,
    BuildingSpec,
    CompiledBuilding,
    PhysicsConstants,
    SpecError,
    ZoneThermalParams,
    generate_weather,
    load_building_spec,
    load_preset,
    load_weather_csv,
    save_building_spec,
    save_weather_csv,
    step_building,
    step_zone_hvac,
)
from hvacdpt.sim import kernel
from hvacdpt.sim.types import AIR_CP
from hvacdpt.sim.weather import WeatherCsvError


def quiet_zone(**kw):
    defaults = dict(
        capacitance=9.0e6,
        envelope_resistance=1.0 / 120.0,
        inter_zone_resistances={},
        solar_aperture=0.0,
        internal_gain_per_occupant=0.0,
        moisture_gain_per_occupant=0.0,
    )
    defaults.update(kw)
    return ZoneThermalParams(**defaults)


def default_loop(**kw):
    defaults = dict(zones=(0,))
    defaults.update(kw)
    return AirLoopSpec(**defaults)


# ---------------------------------------------------------------- weather


def test_weather_length_and_solar_nonnegative():
    w = generate_weather(seed=7, start_month=1, n_steps=2976)
    assert len(w) == 2976
    assert np.all(w.solar_radiation >= 0)


def test_weather_deterministic():
    a = generate_weather(seed=7, start_month=1, n_steps=500)
    b = generate_weather(seed=7, start_month=1, n_steps=500)
    assert np.array_equal(a.outdoor_temp, b.outdoor_temp)
    assert np.array_equal(a.solar_radiation, b.solar_radiation)


def test_weather_summer_warmer_than_winter():
    july = generate_weather(seed=7, start_month=7, n_steps=96)
    january = generate_weather(seed=7, start_month=1, n_steps=96)
    assert july.outdoor_temp.mean() > january.outdoor_temp.mean()


def test_weather_solar_zero_at_night():
    w = generate_weather(seed=3, start_month=6, n_steps=96)
    hours = (np.arange(96) / 4.0) % 24
    night = (hours < 4.0) | (hours > 22.0)
    assert np.all(w.solar_radiation[night] == 0.0)


def test_weather_csv_round_trip(tmp_path):
    w = generate_weather(seed=1, start_month=3, n_steps=200)
    path = tmp_path / "w.csv"
    save_weather_csv(w, path)
    loaded = load_weather_csv(path)
    assert len(loaded) == 200
    assert np.array_equal(loaded.outdoor_temp, w.outdoor_temp)
    assert np.array_equal(loaded.solar_radiation, w.solar_radiation)


def test_weather_csv_missing_column(tmp_path):
    path = tmp_path / "w.csv"
    path.write_text("step,outdoor_c\n0,5.0\n")
    with pytest.raises(WeatherCsvError, match="solar_w"):
        load_weather_csv(path)


def test_weather_csv_bad_cell_cites_row(tmp_path):
    path = tmp_path / "w.csv"
    rows = ["step,outdoor_c,solar_w"]
    rows += [f"{i},5.0,10.0" for i in range(41)]
    rows.append("41,NaN,10.0")
    path.write_text("\n".join(rows) + "\n")
    with pytest.raises(WeatherCsvError, match="row 42"):
        load_weather_csv(path)


def test_weather_csv_empty_is_error(tmp_path):
    path = tmp_path / "w.csv"
    path.write_text("step,outdoor_c,solar_w\n")
    with pytest.raises(WeatherCsvError, match="too short"):
        load_weather_csv(path)


# ---------------------------------------------------------------- zone step


def test_equilibrium_no_gains_no_flow():
    zone = quiet_zone()
    loop = default_loop()
    t_out = 22.0  # inside the band so demand is zero
    (t_new, _), energy = step_zone_hvac(
        zone, loop, zone_temp=t_out, zone_humidity=40.0, min_damper=0.0,
        outdoor_temp=t_out, solar=0.0, occupied=0,
    )
    assert t_new == t_out
    assert energy.total == 0.0


def test_rc_step_matches_analytic_exponential():
    # Single zone, no gains, zero airflow: the Euler step must stay within
    # 2 % of T_out + (T0 - T_out) * exp(-dt / (R C)), measured against the
    # initial temperature gap.
    zone = quiet_zone()
    loop = default_loop()
    t0, t_out, dt = 23.0, 10.0, 900.0
    (t_new, _), energy = step_zone_hvac(
        zone, loop, zone_temp=t0, zone_humidity=40.0, min_damper=0.0,
        outdoor_temp=t_out, solar=0.0, occupied=0, dt=dt,
    )
    assert energy.total == 0.0
    tau = zone.envelope_resistance * zone.capacitance
    t_exact = t_out + (t0 - t_out) * math.exp(-dt / tau)
    assert abs(t_new - t_exact) <= 0.02 * abs(t0 - t_out)


def test_damper_monotonicity_1000_random_conditions():
    # For a fixed state, one-step total energy must be non-decreasing in the
    # minimum damper position.
    rng = np.random.default_rng(42)
    for _ in range(1000):
        zone = quiet_zone(
            capacitance=float(rng.uniform(8.0e6, 4.0e7)),
            envelope_resistance=float(rng.uniform(0.004, 0.02)),
            solar_aperture=float(rng.uniform(0.0, 15.0)),
            internal_gain_per_occupant=float(rng.uniform(0.0, 4000.0)),
        )
        loop = default_loop(
            max_zone_airflow=float(rng.uniform(0.3, 2.0)),
            fan_power_coefficient=float(rng.uniform(200.0, 1500.0)),
            outdoor_air_fraction=float(rng.uniform(0.0, 1.0)),
        )
        state = dict(
            zone_temp=float(rng.uniform(14.0, 30.0)),
            zone_humidity=float(rng.uniform(0.0, 100.0)),
            outdoor_temp=float(rng.uniform(-15.0, 35.0)),
            solar=float(rng.uniform(0.0, 800.0)),
            occupied=int(rng.integers(0, 2)),
        )
        m1, m2 = sorted(rng.uniform(0.0, 1.0, size=2))
        _, e1 = step_zone_hvac(zone, loop, min_damper=float(m1), **state)
        _, e2 = step_zone_hvac(zone, loop, min_damper=float(m2), **state)
        assert e2.total >= e1.total
        assert min(e1.fan, e1.reheat, e1.cooling, e2.fan, e2.reheat, e2.cooling) >= 0.0


def test_passive_relaxation_is_monotone():
    zone = quiet_zone()
    loop = default_loop(max_zone_airflow=1e-9)  # effectively sealed
    t, h = 30.0, 40.0
    t_out = 5.0
    gaps = []
    for _ in range(50):
        (t, h), _ = step_zone_hvac(
            zone, loop, zone_temp=t, zone_humidity=h, min_damper=0.0,
            outdoor_temp=t_out, solar=0.0, occupied=0,
        )
        gaps.append(abs(t - t_out))
    assert all(b <= a for a, b in zip(gaps, gaps[1:]))


def test_humidity_stays_clamped():
    zone = quiet_zone(moisture_gain_per_occupant=5e-2)  # absurdly humid occupants
    loop = default_loop()
    h = 99.0
    for _ in range(200):
        (_, h), _ = step_zone_hvac(
            zone, loop, zone_temp=22.0, zone_humidity=h, min_damper=0.0,
            outdoor_temp=22.0, solar=0.0, occupied=1,
        )
        assert 0.0 <= h <= 100.0
    assert h == 100.0


def test_min_damper_out_of_range_rejected():
    with pytest.raises(ValueError, match="min_damper"):
        step_zone_hvac(
            quiet_zone(), default_loop(), zone_temp=21.0, zone_humidity=40.0,
            min_damper=1.2, outdoor_temp=5.0, solar=0.0, occupied=0,
        )


def test_forced_ventilation_heats_bill_in_winter():
    # Raising the floor above demand must waste energy over a closed loop:
    # cold outdoor air enters the mix and the reheat coil pays for it.
    zone = quiet_zone()
    loop = default_loop()

    def month_energy(floor):
        t, h, total = 21.0, 40.0, 0.0
        for _ in range(960):
            (t, h), e = step_zone_hvac(
                zone, loop, zone_temp=t, zone_humidity=h, min_damper=floor,
                outdoor_temp=-2.0, solar=0.0, occupied=0,
            )
            total += e.total
        return total

    assert month_energy(0.5) > 1.15 * month_energy(0.0)


# ---------------------------------------------------------------- building step


def two_zone_symmetric_spec():
    zones = (
        quiet_zone(inter_zone_resistances={1: 0.02}),
        quiet_zone(inter_zone_resistances={0: 0.02}),
    )
    return BuildingSpec(
        name="mirror",
        zone_count=2,
        floor_area=200.0,
        zones=zones,
        air_loops=(AirLoopSpec(zones=(0, 1)),),
    ).validate()


def test_step_building_shapes_and_nonnegative_energy():
    spec = load_preset("b_train")
    cb = CompiledBuilding(spec)
    state = cb.initial_state()
    state, breakdowns = step_building(cb, state, np.full(5, 0.5), -1.0, 100.0, np.ones(5))
    assert len(breakdowns) == 5
    assert all(b.total >= 0 for b in breakdowns)
    assert state.timestep_index == 1


def test_step_building_pure_and_deterministic():
    spec = load_preset("b_train")
    cb = CompiledBuilding(spec)
    s0 = cb.initial_state()
    a = np.array([0.1, 0.3, 0.5, 0.7, 0.9])
    r1 = step_building(cb, s0.copy(), a, 2.0, 300.0, np.ones(5))
    r2 = step_building(cb, s0.copy(), a, 2.0, 300.0, np.ones(5))
    assert np.array_equal(r1[0].zone_temps, r2[0].zone_temps)
    assert np.array_equal(r1[0].zone_humidities, r2[0].zone_humidities)
    assert [b.total for b in r1[1]] == [b.total for b in r2[1]]


def test_step_building_symmetric_zones_stay_symmetric():
    cb = CompiledBuilding(two_zone_symmetric_spec())
    state = cb.initial_state(23.0)
    for _ in range(100):
        state, _ = step_building(cb, state, np.array([0.4, 0.4]), -3.0, 150.0, np.ones(2))
    assert state.zone_temps[0] == state.zone_temps[1]
    assert state.zone_humidities[0] == state.zone_humidities[1]


def test_step_building_rejects_bad_actions():
    cb = CompiledBuilding(load_preset("b_train"))
    state = cb.initial_state()
    with pytest.raises(ValueError, match="expected 5 actions"):
        step_building(cb, state, np.array([0.5, 0.5]), 0.0, 0.0, np.ones(5))
    with pytest.raises(ValueError, match=r"\[0,1\]"):
        step_building(cb, state, np.array([0.5, 0.5, 0.5, 0.5, 1.5]), 0.0, 0.0, np.ones(5))


def test_energy_accumulators_monotone():
    cb = CompiledBuilding(load_preset("b_train"))
    state = cb.initial_state()
    prev = state.energy_accumulators.copy()
    for t in range(50):
        state, _ = step_building(cb, state, np.full(5, 0.6), -5.0, 0.0, np.ones(5))
        assert np.all(state.energy_accumulators >= prev)
        prev = state.energy_accumulators.copy()


# ---------------------------------------------------------------- spec validation


def test_preset_invariants():
    bt = load_preset("b_train")
    assert bt.zone_count == 5 and bt.floor_area == pytest.approx(511.16)
    bd = load_preset("b_denver")
    assert bd.zone_count == 15 and bd.floor_area == pytest.approx(4982.19)
    assert len(bd.air_loops) == 3
    assert all(len(l.zones) == 5 for l in bd.air_loops)


def test_spec_file_round_trip(tmp_path):
    spec = load_preset("b_train")
    path = tmp_path / "b.json"
    save_building_spec(spec, path)
    loaded = load_building_spec(path)
    assert loaded == spec


def test_spec_rejects_unstable_parameterization():
    zone = quiet_zone(capacitance=1.0e5)  # tiny mass -> sub-step time constant
    with pytest.raises(SpecError, match="time constant"):
        BuildingSpec(
            name="unstable", zone_count=1, floor_area=10.0,
            zones=(zone,), air_loops=(AirLoopSpec(zones=(0,)),),
        ).validate()


def test_spec_rejects_asymmetric_coupling():
    zones = (
        quiet_zone(inter_zone_resistances={1: 0.02}),
        quiet_zone(inter_zone_resistances={0: 0.05}),
    )
    with pytest.raises(SpecError, match="symmetric"):
        BuildingSpec(
            name="bad", zone_count=2, floor_area=10.0,
            zones=zones, air_loops=(AirLoopSpec(zones=(0, 1)),),
        ).validate()


def test_spec_rejects_orphan_zone():
    with pytest.raises(SpecError, match="no air loop"):
        BuildingSpec(
            name="orphan", zone_count=2, floor_area=10.0,
            zones=(quiet_zone(), quiet_zone()),
            air_loops=(AirLoopSpec(zones=(0,)),),
        ).validate()


# ---------------------------------------------------------------- kernel backends


@pytest.mark.skipif(not kernel.HAVE_NUMBA, reason="numba unavailable")
def test_kernel_backends_bit_identical():
    rng = np.random.default_rng(0)
    n = 8
    g = np.zeros((n, n))
    for i in range(n - 1):
        g[i, i + 1] = g[i + 1, i] = 40.0
    args_in = dict(
        temps=rng.uniform(15, 28, n), hums=rng.uniform(10, 90, n),
        actions=rng.uniform(0, 1, n), occupied=rng.integers(0, 2, n).astype(np.float64),
        t_out=-4.0, solar=220.0, dt=900.0, air_cp=AIR_CP, comfort_gain=1.0,
        zone_air_mass=350.0, moisture_capacity=4.0, supply_humidity=30.0,
        cap=rng.uniform(8e6, 3e7, n), r_env=rng.uniform(0.004, 0.02, n),
        aperture=rng.uniform(0, 10, n), gain_w=rng.uniform(0, 3000, n),
        moist_gain=rng.uniform(0, 2e-4, n), g_inter=g,
        sup_heat=np.full(n, 40.0), sup_cool=np.full(n, 14.0),
        max_flow=rng.uniform(0.3, 1.5, n), fan_coeff=np.full(n, 900.0),
        reheat_cop=np.full(n, 0.95), cool_cop=np.full(n, 3.0),
        band_lo=np.full(n, 20.0), band_hi=np.full(n, 24.0),
        oa_frac=np.full(n, 0.3),
    )
    outs_py = [np.empty(n) for _ in range(5)]
    outs_nb = [np.empty(n) for _ in range(5)]
    kernel.step_zones_python(*args_in.values(), *outs_py)
    kernel.step_zones_numba(*args_in.values(), *outs_nb)
    for a, b in zip(outs_py, outs_nb):
        assert np.array_equal(a, b)
