"""Pretraining-sample generation from policy-library rollouts.

Each sample pairs a query state with an ordered interaction context drawn
from a mixed-policy rollout on one training building, labeled with the
mean action of a library policy for that (building, zone). Context rollouts
use the whole library (snapshots included) for behavioral diversity; the
label pool defaults to final-stage policies.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..env.mdp import BuildingEnv, EpisodeConfig
from ..env.norm import NormStats, normalize_observation
from ..ppo.library import PolicyLibrary
from ..sim.types import BuildingSpec
from .tokenize import TOKEN_LAYOUT_VERSION

DATASET_VERSION = 1


@dataclass(frozen=True)
class PretrainingSample:
    s_query: np.ndarray                 # raw observation, 6 floats
    context: list[tuple]                # ordered (s, a, r, s_next) tuples, raw
    a_star: float
    provenance: tuple[str, int, str]    # (building, zone, label tag)

    def __post_init__(self):
        if not (0.0 <= self.a_star <= 1.0):
            raise ValueError(f"a_star must lie in [0,1], got {self.a_star}")


@dataclass
class DatasetGenConfig:
    trajectories: int = 100             # rollouts used to harvest contexts
    samples_per_trajectory: int = 100   # samples drawn from each rollout
    n_context: int = 16
    horizon: int = 672                  # rollout length, steps
    label_pool: str = "final"           # "final" or "all"
    start_months: tuple[int, ...] = tuple(range(1, 13))

    @property
    def n_samples(self) -> int:
        return self.trajectories * self.samples_per_trajectory


def generate_pretraining_dataset(
    library: PolicyLibrary,
    buildings: dict[str, BuildingSpec],
    cfg: DatasetGenConfig,
    seed: int = 0,
) -> tuple[list[PretrainingSample], float]:
    """Returns (samples, reward_scale). reward_scale is the standard
    deviation of all harvested context rewards, used to normalize the reward
    channel of context tokens."""
    if not library.entries:
        raise ValueError("policy library is empty")
    lib_buildings = library.buildings()
    for b in lib_buildings:
        if b not in buildings:
            raise ValueError(f"library references unknown building '{b}'")

    rng = np.random.default_rng([int(seed), 0xDA7A])
    samples: list[PretrainingSample] = []
    all_rewards: list[np.ndarray] = []

    for traj_idx in range(cfg.trajectories):
        b_name = lib_buildings[traj_idx % len(lib_buildings)]
        spec = buildings[b_name]
        n = spec.zone_count
        month = cfg.start_months[traj_idx % len(cfg.start_months)]
        env = BuildingEnv(
            spec,
            EpisodeConfig(
                horizon=cfg.horizon,
                start_month=month,
                weather_seed=int(rng.integers(2**31)),
                occupancy_seed=int(rng.integers(2**31)),
            ),
        )
        # Behavior policies: one library entry per zone, any stage.
        behavior = []
        for z in range(n):
            pool = library.entries_for(b_name, z)
            behavior.append(pool[int(rng.integers(len(pool)))].policy)

        H = cfg.horizon
        obs_raw = np.zeros((H + 1, n, 6), dtype=np.float64)
        acts = np.zeros((H, n), dtype=np.float64)
        rewards = np.zeros((H, n), dtype=np.float64)
        obs = env.reset()
        obs_raw[0] = [o.as_vector() for o in obs]
        for t in range(H):
            normed = normalize_observation(obs_raw[t], behavior[0].norm_stats).astype(np.float32)
            a_env = np.zeros(n)
            for z in range(n):
                _, a, _ = behavior[z].sample_np(normed[z : z + 1], rng)
                a_env[z] = a[0, 0]
            obs, r, _, _ = env.step(a_env)
            obs_raw[t + 1] = [o.as_vector() for o in obs]
            acts[t] = a_env
            rewards[t] = r
        all_rewards.append(rewards.reshape(-1))

        # (time, zone) pool of transitions across all zones, ordered by time.
        flat = [(t, z) for t in range(H) for z in range(n)]
        if cfg.n_context > len(flat):
            raise ValueError(
                f"n_context {cfg.n_context} exceeds the {len(flat)} transitions collected"
            )

        if cfg.label_pool not in ("final", "all"):
            raise ValueError(f"unknown label_pool {cfg.label_pool!r}")
        for k in range(cfg.samples_per_trajectory):
            zone = (traj_idx + k) % n
            pick = rng.choice(len(flat), size=cfg.n_context, replace=False)
            pick.sort()
            context = [
                (
                    obs_raw[flat[i][0], flat[i][1]].copy(),
                    float(acts[flat[i][0], flat[i][1]]),
                    float(rewards[flat[i][0], flat[i][1]]),
                    obs_raw[flat[i][0] + 1, flat[i][1]].copy(),
                )
                for i in pick
            ]
            t_q = int(rng.integers(H + 1))
            s_query = obs_raw[t_q, zone].copy()
            label_entries = library.entries_for(
                b_name, zone, stage=None if cfg.label_pool == "all" else "final"
            )
            entry = label_entries[int(rng.integers(len(label_entries)))]
            a_star = float(entry.policy.mean_action_raw_obs(s_query)[0, 0])
            samples.append(
                PretrainingSample(
                    s_query=s_query,
                    context=context,
                    a_star=a_star,
                    provenance=(b_name, zone, entry.tag),
                )
            )

    reward_scale = float(max(np.concatenate(all_rewards).std(), 1e-6))
    return samples, reward_scale


# ---------------------------------------------------------------- serialization


def save_dataset(
    path: str | Path,
    samples: list[PretrainingSample],
    reward_scale: float,
    norm_stats: NormStats,
    n_context: int,
) -> None:
    with Path(path).open("w") as fh:
        header = {
            "version": DATASET_VERSION,
            "token_layout_version": TOKEN_LAYOUT_VERSION,
            "n_samples": len(samples),
            "n_context": n_context,
            "reward_scale": reward_scale,
            "norm_stats": norm_stats.to_dict(),
        }
        fh.write(json.dumps(header) + "\n")
        for s in samples:
            rec = {
                "s_query": [float(x) for x in s.s_query],
                "a_star": s.a_star,
                "context": [
                    {
                        "s": [float(x) for x in c[0]],
                        "a": c[1],
                        "r": c[2],
                        "sn": [float(x) for x in c[3]],
                    }
                    for c in s.context
                ],
                "provenance": {
                    "building": s.provenance[0],
                    "zone": s.provenance[1],
                    "tag": s.provenance[2],
                },
            }
            fh.write(json.dumps(rec) + "\n")


def load_dataset(path: str | Path) -> tuple[list[PretrainingSample], dict]:
    with Path(path).open() as fh:
        header = json.loads(fh.readline())
        if header.get("version") != DATASET_VERSION:
            raise ValueError(f"unsupported dataset version {header.get('version')}")
        samples = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            samples.append(
                PretrainingSample(
                    s_query=np.array(rec["s_query"], dtype=np.float64),
                    context=[
                        (
                            np.array(c["s"], dtype=np.float64),
                            float(c["a"]),
                            float(c["r"]),
                            np.array(c["sn"], dtype=np.float64),
                        )
                        for c in rec["context"]
                    ],
                    a_star=float(rec["a_star"]),
                    provenance=(
                        rec["provenance"]["building"],
                        int(rec["provenance"]["zone"]),
                        rec["provenance"]["tag"],
                    ),
                )
            )
    return samples, header
