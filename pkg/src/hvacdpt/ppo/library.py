"""Training and persistence of the per-zone policy library.

Diversity comes from three axes: independent seeds, varied episode start
months and weather draws (environment diversity), and varied entropy
coefficients plus mid-training snapshots (policy diversity). Each library
entry is one (building, zone, tag) policy with its training metadata.

Directory layout::

    library/<building>/<zone>/<tag>/policy.ntc
    library/<building>/<zone>/<tag>/meta.json
    library/index.json
"""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..env.mdp import BuildingEnv, EpisodeConfig
from ..sim.types import BuildingSpec
from .policy import PpoPolicy
from .train import (
    NonFiniteLoss,
    PpoConfig,
    RunningStd,
    collect_rollout,
    evaluate_policies,
    make_optimizers,
    ppo_update,
    trajectory_to_batch,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainingRun:
    tag: str
    seed: int
    entropy_coef: float
    episodes: int
    snapshot_episodes: tuple[int, ...] = ()


@dataclass
class DiversityConfig:
    runs: list[TrainingRun] = field(default_factory=list)
    start_months: tuple[int, ...] = tuple(range(1, 13))
    eval_episodes: int = 3
    eval_horizon: int = 480

    @classmethod
    def desk(cls, episodes: int = 40, snapshots: tuple[int, ...] = (10,)) -> "DiversityConfig":
        return cls(
            runs=[
                TrainingRun("r0", seed=0, entropy_coef=0.01, episodes=episodes, snapshot_episodes=snapshots),
                TrainingRun("r1", seed=1, entropy_coef=0.04, episodes=episodes, snapshot_episodes=snapshots),
            ]
        )

    @classmethod
    def full_scale(cls, tags_per_zone: int = 20, episodes: int = 1000) -> "DiversityConfig":
        # tags_per_zone entries arise as runs x (snapshots + final).
        runs = []
        n_runs = max(tags_per_zone // 2, 1)
        for i in range(n_runs):
            runs.append(
                TrainingRun(
                    f"r{i}",
                    seed=i,
                    entropy_coef=[0.01, 0.03, 0.05][i % 3],
                    episodes=episodes,
                    snapshot_episodes=(episodes // 3,),
                )
            )
        return cls(runs=runs)


@dataclass
class LibraryEntry:
    building: str
    zone: int
    tag: str
    stage: str                  # "final" or "snapshot"
    policy: PpoPolicy
    meta: dict

    @property
    def key(self) -> tuple[str, int, str]:
        return (self.building, self.zone, self.tag)


class PolicyLibrary:
    def __init__(self, entries: list[LibraryEntry] | None = None):
        self.entries: list[LibraryEntry] = entries or []

    def add(self, entry: LibraryEntry):
        if any(e.key == entry.key for e in self.entries):
            raise ValueError(f"duplicate library entry {entry.key}")
        self.entries.append(entry)

    def buildings(self) -> list[str]:
        seen = []
        for e in self.entries:
            if e.building not in seen:
                seen.append(e.building)
        return seen

    def zones_of(self, building: str) -> list[int]:
        return sorted({e.zone for e in self.entries if e.building == building})

    def entries_for(self, building: str, zone: int, stage: str | None = None) -> list[LibraryEntry]:
        out = [e for e in self.entries if e.building == building and e.zone == zone]
        if stage is not None:
            out = [e for e in out if e.stage == stage]
        return out

    def validate(self):
        for b in self.buildings():
            for z in self.zones_of(b):
                if not self.entries_for(b, z):
                    raise ValueError(f"no policy for ({b}, zone {z})")

    # -- persistence ---------------------------------------------------------

    def save(self, root: str | Path):
        root = Path(root)
        root.mkdir(parents=True, exist_ok=True)
        index = []
        for e in sorted(self.entries, key=lambda x: (x.building, x.zone, x.tag)):
            d = root / e.building / str(e.zone) / e.tag
            d.mkdir(parents=True, exist_ok=True)
            e.policy.save(d / "policy.ntc")
            meta = dict(e.meta)
            meta.update(
                building=e.building, zone=e.zone, tag=e.tag, stage=e.stage,
                policy_config=e.policy.config_dict(),
            )
            (d / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
            index.append({"building": e.building, "zone": e.zone, "tag": e.tag, "stage": e.stage})
        (root / "index.json").write_text(json.dumps(index, indent=2) + "\n")

    @classmethod
    def load(cls, root: str | Path) -> "PolicyLibrary":
        root = Path(root)
        index = json.loads((root / "index.json").read_text())
        entries = []
        for item in index:
            d = root / item["building"] / str(item["zone"]) / item["tag"]
            meta = json.loads((d / "meta.json").read_text())
            policy = PpoPolicy.load(d / "policy.ntc", meta["policy_config"])
            entries.append(
                LibraryEntry(
                    building=item["building"], zone=item["zone"], tag=item["tag"],
                    stage=item["stage"], policy=policy, meta=meta,
                )
            )
        return cls(entries)


def train_policy_library(
    buildings: list[BuildingSpec],
    diversity: DiversityConfig,
    cfg: PpoConfig,
    base_seed: int = 0,
) -> PolicyLibrary:
    """Train one joint run per (building, run spec); every zone's policy
    learns from its own trajectory. Snapshot episodes contribute additional
    library entries frozen mid-run."""
    if not buildings:
        raise ValueError("need at least one training building")
    library = PolicyLibrary()
    for b_idx, building in enumerate(buildings):
        n = building.zone_count
        for run in diversity.runs:
            reward_scale = RunningStd()
            policies = [
                PpoPolicy(seed=int(base_seed + 1000 * b_idx + 100 * run.seed + z))
                for z in range(n)
            ]
            run_cfg = PpoConfig(**{**cfg.__dict__, "entropy_coef": run.entropy_coef})
            optimizers = [make_optimizers(p, run_cfg) for p in policies]
            initial_return = evaluate_policies(
                building, policies, episodes=diversity.eval_episodes,
                horizon=diversity.eval_horizon, seed=base_seed + 7,
            )
            return_curve = []
            diverged = False
            for episode in range(1, run.episodes + 1):
                month = diversity.start_months[(episode - 1) % len(diversity.start_months)]
                ep_cfg = EpisodeConfig(
                    horizon=cfg.batch_size,
                    start_month=month,
                    weather_seed=base_seed + 9173 * run.seed + episode,
                    occupancy_seed=base_seed + 7919 * run.seed + episode,
                )
                env = BuildingEnv(building, ep_cfg)
                trajectories = collect_rollout(env, policies, seed=base_seed + 31 * episode + run.seed)
                reward_scale.update(np.concatenate([t["reward"] for t in trajectories]))
                return_curve.append(float(np.mean([t["reward"].sum() for t in trajectories])))
                try:
                    for z in range(n):
                        batch = trajectory_to_batch(trajectories[z], policies[z], run_cfg, reward_scale.std)
                        ppo_update(policies[z], batch, run_cfg, optimizers[z], seed=episode * n + z)
                except NonFiniteLoss as exc:
                    warnings.warn(
                        f"run {run.tag} on {building.name} diverged at episode {episode}: {exc}; "
                        "tag excluded"
                    )
                    diverged = True
                    break
                if episode in run.snapshot_episodes:
                    snap_return = evaluate_policies(
                        building, policies, episodes=diversity.eval_episodes,
                        horizon=diversity.eval_horizon, seed=base_seed + 7,
                    )
                    for z in range(n):
                        library.add(
                            LibraryEntry(
                                building=building.name, zone=z,
                                tag=f"{run.tag}-ep{episode}", stage="snapshot",
                                policy=policies[z].clone(),
                                meta=_entry_meta(run, episode, base_seed, initial_return[z],
                                                 snap_return[z], return_curve, reward_scale.std),
                            )
                        )
            if diverged:
                continue
            final_return = evaluate_policies(
                building, policies, episodes=diversity.eval_episodes,
                horizon=diversity.eval_horizon, seed=base_seed + 7,
            )
            for z in range(n):
                library.add(
                    LibraryEntry(
                        building=building.name, zone=z, tag=run.tag, stage="final",
                        policy=policies[z].clone(),
                        meta=_entry_meta(run, run.episodes, base_seed, initial_return[z],
                                         final_return[z], return_curve, reward_scale.std),
                    )
                )
    library.validate()
    return library


def _entry_meta(run, episodes, base_seed, initial_return, final_return, curve, reward_scale):
    return {
        "seed": run.seed,
        "base_seed": base_seed,
        "entropy_coef": run.entropy_coef,
        "episodes_trained": episodes,
        "eval_return_initial": float(initial_return),
        "eval_return_final": float(final_return),
        "return_curve": [round(v, 3) for v in curve],
        "reward_scale": float(reward_scale),
    }
