"""Shared episode loop and the paired-seed controller comparison."""

from __future__ import annotations

import numpy as np

from ..controllers import (
    BaselineController,
    Controller,
    DptController,
    ExpertController,
    ExpertSchedule,
    MarlController,
    SarlController,
)
from ..dpt.model import DptModel
from ..env.mdp import BuildingEnv, EpisodeConfig
from ..ppo.train import PpoConfig
from ..sim.types import BuildingSpec
from .report import MonthlyEnergyReport


def run_controller_episode(env: BuildingEnv, controller: Controller) -> np.ndarray:
    """One episode through the shared loop; returns per-zone energy (Wh)."""
    obs = env.reset()
    done = False
    while not done:
        actions = np.clip(np.asarray(controller.act_all(obs), dtype=np.float64), 0.0, 1.0)
        nxt, rewards, done, _ = env.step(actions)
        controller.observe(obs, actions, rewards, nxt)
        obs = nxt
    controller.on_episode_end()
    return env.zone_energy_totals()


def make_controller(
    name: str,
    building: BuildingSpec,
    seed: int,
    model: DptModel | None = None,
    bench_cfg: dict | None = None,
    ppo_cfg: PpoConfig | None = None,
) -> Controller:
    bench_cfg = bench_cfg or {}
    if name == "baseline":
        return BaselineController()
    if name == "expert":
        schedules = bench_cfg.get("expert", {})
        params = schedules.get(building.name, schedules.get("default", {}))
        return ExpertController(ExpertSchedule(**params))
    if name == "sarl":
        cfg = ppo_cfg or PpoConfig(batch_size=bench_cfg.get("horizon", 2976))
        return SarlController(building.zone_count, cfg, seed=seed)
    if name == "marl":
        cfg = ppo_cfg or PpoConfig(batch_size=bench_cfg.get("horizon", 2976))
        return MarlController(building.zone_count, cfg, seed=seed)
    if name in ("hvac-dpt", "hvac-dpt-nocontext"):
        if model is None:
            raise ValueError(f"controller '{name}' needs a pretrained model artifact")
        return DptController(
            model,
            capacity=bench_cfg.get("capacity", 256),
            eviction=bench_cfg.get("eviction", "fifo"),
            keep_context=(name == "hvac-dpt"),
            seed=seed,
        )
    raise ValueError(f"unknown controller '{name}'")


def benchmark(
    controller_names: list[str],
    building: BuildingSpec,
    seeds: int,
    episodes: int,
    horizon: int,
    bench_cfg: dict | None = None,
    model: DptModel | None = None,
    base_seed: int = 0,
    start_months: tuple[int, ...] = tuple(range(1, 13)),
) -> tuple[list[MonthlyEnergyReport], dict]:
    """Run every controller through identical weather/occupancy seeds.

    Learned controllers restart fresh for each seed (run); within a run,
    online learners carry their policy across the year's episodes. Returns
    mean monthly reports plus per-run, per-episode raw totals.
    """
    bench_cfg = bench_cfg or {}
    raw: dict[str, np.ndarray] = {}
    zone_raw: dict[str, np.ndarray] = {}
    n = building.zone_count
    for name in controller_names:
        totals = np.zeros((seeds, episodes), dtype=np.float64)
        zone_totals = np.zeros((seeds, episodes, n), dtype=np.float64)
        for run in range(seeds):
            controller = make_controller(name, building, seed=base_seed + run, model=model, bench_cfg=bench_cfg)
            controller.reset(n)
            for ep in range(episodes):
                month = start_months[ep % len(start_months)]
                env = BuildingEnv(
                    building,
                    EpisodeConfig(
                        horizon=horizon,
                        start_month=month,
                        weather_seed=base_seed * 100003 + run * 1009 + ep,
                        occupancy_seed=base_seed * 90001 + run * 2003 + ep,
                    ),
                )
                zone_energy = run_controller_episode(env, controller)
                totals[run, ep] = zone_energy.sum()
                zone_totals[run, ep] = zone_energy
        raw[name] = totals
        zone_raw[name] = zone_totals

    reports = []
    for name in controller_names:
        per_month = raw[name].mean(axis=0)
        monthly = [float(per_month[m]) if m < episodes else 0.0 for m in range(12)]
        zone_monthly = zone_raw[name].mean(axis=0)
        reports.append(
            MonthlyEnergyReport(
                controller=name,
                monthly_wh=monthly,
                zone_monthly_wh=[[float(v) for v in zone_monthly[m]] for m in range(episodes)],
            )
        )
    detail = {
        "per_run_totals": {k: v.tolist() for k, v in raw.items()},
        "horizon": horizon,
        "episodes": episodes,
        "seeds": seeds,
    }
    return reports, detail
