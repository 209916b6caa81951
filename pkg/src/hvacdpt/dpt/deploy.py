"""Frozen-weights online deployment with per-zone context buffers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..env.mdp import BuildingEnv, EpisodeConfig, TransitionTuple
from ..sim.types import BuildingSpec
from .model import DptModel
from .tokenize import tokenize


@dataclass
class ContextBuffer:
    """Grows by whole episodes; evicts down to capacity by the chosen policy."""

    capacity: int = 256
    eviction: str = "fifo"              # "fifo" or "uniform"
    seed: int = 0
    items: list[tuple] = field(default_factory=list)
    _appends: int = 0

    def __post_init__(self):
        if self.eviction not in ("fifo", "uniform"):
            raise ValueError(f"unknown eviction policy {self.eviction!r}")

    def append_episode(self, transitions: list[tuple]):
        self._appends += 1
        self.items.extend(transitions)
        if len(self.items) <= self.capacity:
            return
        if self.eviction == "fifo":
            self.items = self.items[-self.capacity :]
        else:
            rng = np.random.default_rng([self.seed, self._appends, 0xEB1C])
            keep = rng.choice(len(self.items), size=self.capacity, replace=False)
            keep.sort()
            self.items = [self.items[i] for i in keep]

    def __len__(self) -> int:
        return len(self.items)


@dataclass
class DeployConfig:
    episodes: int = 12
    horizon: int = 2976
    capacity: int = 256
    eviction: str = "fifo"
    start_months: tuple[int, ...] = tuple(range(1, 13))
    keep_context: bool = True           # False forces empty context every episode
    explore_sigma: float = 0.0
    initial_temp: float = 21.0


def predict_action(model: DptModel, s_query: np.ndarray, context: list[tuple]) -> float:
    """Forward pass only; output of the head at the final position."""
    tokens = tokenize(
        np.asarray(s_query, dtype=np.float64), context,
        model.norm_stats, model.reward_scale, model.config.max_seq,
    )
    return float(model.forward_np(tokens[None])[0, -1])


def predict_actions_batch(model: DptModel, queries: np.ndarray, contexts: list[list[tuple]]) -> np.ndarray:
    """One batched forward for several zones with equal context lengths."""
    seqs = [
        tokenize(q, c, model.norm_stats, model.reward_scale, model.config.max_seq)
        for q, c in zip(queries, contexts)
    ]
    lengths = {s.shape[0] for s in seqs}
    if len(lengths) == 1:
        return model.forward_np(np.stack(seqs))[:, -1].astype(np.float64)
    return np.array([model.forward_np(s[None])[0, -1] for s in seqs], dtype=np.float64)


def deploy_online(
    model: DptModel,
    building: BuildingSpec,
    cfg: DeployConfig,
    seed: int = 0,
) -> dict:
    """Run cfg.episodes episodes with frozen weights; each zone keeps its own
    growing interaction buffer, refreshed at episode boundaries.

    Returns a report with per-episode, per-zone energy (Wh) and the final
    per-zone context sizes.
    """
    n = building.zone_count
    buffers = [
        ContextBuffer(capacity=cfg.capacity, eviction=cfg.eviction, seed=seed * 1000 + z)
        for z in range(n)
    ]
    noise_rng = np.random.default_rng([int(seed), 0x5161])
    episodes = []
    for ep in range(cfg.episodes):
        month = cfg.start_months[ep % len(cfg.start_months)]
        env = BuildingEnv(
            building,
            EpisodeConfig(
                horizon=cfg.horizon,
                start_month=month,
                weather_seed=seed * 10007 + ep,
                occupancy_seed=seed * 20011 + ep,
                initial_temp=cfg.initial_temp,
            ),
        )
        obs = env.reset()
        ep_transitions: list[list[tuple]] = [[] for _ in range(n)]
        done = False
        while not done:
            queries = np.array([o.as_vector() for o in obs])
            actions = predict_actions_batch(model, queries, [b.items for b in buffers])
            if cfg.explore_sigma > 0:
                actions = actions + noise_rng.normal(0.0, cfg.explore_sigma, size=n)
            actions = np.clip(actions, 0.0, 1.0)
            nxt, rewards, done, _ = env.step(actions)
            for z in range(n):
                ep_transitions[z].append(
                    (queries[z], float(actions[z]), float(rewards[z]), nxt[z].as_vector())
                )
            obs = nxt
        if cfg.keep_context:
            for z in range(n):
                buffers[z].append_episode(ep_transitions[z])
        episodes.append(
            {
                "episode": ep,
                "month": month,
                "zone_energy_wh": [float(v) for v in env.zone_energy_totals()],
                "total_wh": float(env.zone_energy_totals().sum()),
                "context_sizes": [len(b) for b in buffers],
            }
        )
    return {
        "building": building.name,
        "zone_count": n,
        "episodes": episodes,
        "context_sizes": [len(b) for b in buffers],
        "buffers": buffers,
    }
