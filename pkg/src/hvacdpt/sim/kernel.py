"""Hot per-step zone update kernel.

This is the innermost loop of every rollout: policy-library training alone
steps it a few million times, so the kernel is compiled with numba when
available. Setting ``HVACDPT_NO_NUMBA=1`` before import selects the plain
interpreted fallback, which executes the identical function body and
therefore produces bit-identical results. ``benchmarks/bench_sim.py``
compares the two paths.

Physics per zone and step (explicit Euler, all pre-step temperatures):

* demanded damper ``d_dem`` from proportional control on comfort-band
  violation (``comfort_gain`` per degC, saturating at 1); the effective
  damper is ``max(min_damper, d_dem)`` and airflow scales with it
* supply air is a mix of return and outdoor air (``oa_frac``); out of band
  the coil lifts or drops the mixed stream to the loop's heating/cooling
  supply temperature, and the coil's thermal duty divided by the COP is
  the metered conditioning energy; inside the band the mixed stream enters
  unconditioned, so forced ventilation costs fan energy now and shows up
  thermally later
* zone temperature integrates envelope, inter-zone, solar, internal and
  supply-air heat flows; humidity integrates occupant moisture against
  supply-air dilution and is clamped to [0, 100]

Energies are returned in Wh per category (fan, reheat, cooling).
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None
    HAVE_NUMBA = False

J_PER_WH = 3600.0


def _step_zones(
    temps,        # f8[n] zone temperatures, degC (pre-step)
    hums,         # f8[n] zone humidities, %
    actions,      # f8[n] minimum damper positions in [0,1]
    occupied,     # f8[n] 0/1
    t_out,        # f8 outdoor temperature, degC
    solar,        # f8 solar radiation, W per m^2 of aperture
    dt,           # f8 step length, s
    air_cp,       # f8 J/(kg K)
    comfort_gain,  # f8 demanded damper per degC of violation
    zone_air_mass,  # f8 kg
    moisture_capacity,  # f8 kg at 100 %
    supply_humidity,    # f8 %
    cap,          # f8[n] J/K
    r_env,        # f8[n] K/W
    aperture,     # f8[n] m^2
    gain_w,       # f8[n] W while occupied
    moist_gain,   # f8[n] kg/s while occupied
    g_inter,      # f8[n,n] inter-zone conductance, W/K, zero diagonal
    sup_heat,     # f8[n] degC
    sup_cool,     # f8[n] degC
    max_flow,     # f8[n] kg/s
    fan_coeff,    # f8[n] W/(kg/s)
    reheat_cop,   # f8[n]
    cool_cop,     # f8[n]
    band_lo,      # f8[n] degC
    band_hi,      # f8[n] degC
    oa_frac,      # f8[n]
    out_temps,    # f8[n] output
    out_hums,     # f8[n] output
    out_fan,      # f8[n] output, Wh
    out_reheat,   # f8[n] output, Wh
    out_cool,     # f8[n] output, Wh
):
    n = temps.shape[0]
    for i in range(n):
        t_zone = temps[i]

        # Comfort loop: proportional demand on band violation.
        if t_zone < band_lo[i]:
            d_dem = comfort_gain * (band_lo[i] - t_zone)
            mode = 1
        elif t_zone > band_hi[i]:
            d_dem = comfort_gain * (t_zone - band_hi[i])
            mode = 2
        else:
            d_dem = 0.0
            mode = 0
        if d_dem > 1.0:
            d_dem = 1.0

        d = actions[i] if actions[i] > d_dem else d_dem
        flow = d * max_flow[i]
        t_mix = (1.0 - oa_frac[i]) * t_zone + oa_frac[i] * t_out

        reheat_wh = 0.0
        cool_wh = 0.0
        if mode == 1:
            t_sup = sup_heat[i]
            lift = t_sup - t_mix
            if lift < 0.0:
                lift = 0.0
            reheat_wh = flow * air_cp * lift / reheat_cop[i] * dt / J_PER_WH
        elif mode == 2:
            t_sup = sup_cool[i]
            drop = t_mix - t_sup
            if drop < 0.0:
                drop = 0.0
            cool_wh = flow * air_cp * drop / cool_cop[i] * dt / J_PER_WH
        else:
            t_sup = t_mix

        q_supply = flow * air_cp * (t_sup - t_zone)
        q_in = (t_out - t_zone) / r_env[i]
        q_in += aperture[i] * solar
        q_in += occupied[i] * gain_w[i]
        q_in += q_supply
        for j in range(n):
            g = g_inter[i, j]
            if g > 0.0:
                q_in += g * (temps[j] - t_zone)
        out_temps[i] = t_zone + dt * q_in / cap[i]

        h = hums[i] + dt * (
            occupied[i] * moist_gain[i] / moisture_capacity * 100.0
            - flow / zone_air_mass * (hums[i] - supply_humidity)
        )
        if h < 0.0:
            h = 0.0
        elif h > 100.0:
            h = 100.0
        out_hums[i] = h

        out_fan[i] = fan_coeff[i] * flow * dt / J_PER_WH
        out_reheat[i] = reheat_wh
        out_cool[i] = cool_wh


step_zones_python = _step_zones
step_zones_numba = njit(cache=True)(_step_zones) if HAVE_NUMBA else None

USE_NUMBA = step_zones_numba is not None and os.environ.get("HVACDPT_NO_NUMBA", "0") != "1"
step_zones = step_zones_numba if USE_NUMBA else step_zones_python


def backend_name() -> str:
    return "numba" if USE_NUMBA else "python"
