"""Gaussian-policy actor/critic networks.

The actor is an MLP with two 64-unit tanh hidden layers emitting a mean
and a log-std per action dimension; log-std is clamped to [-5, 1] and
sampled actions are clipped into [0, 1] before reaching the environment.
Per-zone agents use (obs_dim=6, act_dim=1); the single-agent variant
concatenates all zone observations.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from ..env.norm import DEFAULT_NORM_STATS, NormStats, normalize_observation
from ..nn import Tensor, load_ntc, save_ntc
from ..nn import tensor as tn

LOG_STD_MIN, LOG_STD_MAX = -5.0, 1.0
HIDDEN = 64
LOG_2PI = math.log(2.0 * math.pi)
# Raw log-std head output passes through a tanh bound onto [MIN, MAX]; this
# bias puts the initial sigma near 1 for wide early exploration.
_LOG_STD_BIAS = 0.8


def _bound_log_std_np(raw: np.ndarray) -> np.ndarray:
    return LOG_STD_MIN + 0.5 * (LOG_STD_MAX - LOG_STD_MIN) * (np.tanh(raw) + 1.0)


def _mlp_params(rng: np.random.Generator, sizes: list[int], prefix: str, out_scale: float = 1.0):
    params: dict[str, Tensor] = {}
    for i, (a, b) in enumerate(zip(sizes, sizes[1:])):
        w = tn.scaled_uniform(rng, (a, b))
        if i == len(sizes) - 2:
            w = tn.parameter(w.data * out_scale)
        params[f"{prefix}.w{i}"] = w
        params[f"{prefix}.b{i}"] = tn.parameter(np.zeros(b))
    return params


class PpoPolicy:
    def __init__(
        self,
        obs_dim: int = 6,
        act_dim: int = 1,
        seed: int = 0,
        norm_stats: NormStats = DEFAULT_NORM_STATS,
    ):
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self.norm_stats = norm_stats
        rng = np.random.default_rng([int(seed), 0x9907])
        self.params: dict[str, Tensor] = {}
        # Small final-layer scale keeps the initial mean near zero and the
        # initial log-std near zero (sigma ~ 1, wide exploration).
        self.params.update(_mlp_params(rng, [obs_dim, HIDDEN, HIDDEN, 2 * act_dim], "actor", out_scale=0.01))
        self.params.update(_mlp_params(rng, [obs_dim, HIDDEN, HIDDEN, 1], "critic"))
        self.params["actor.b2"].data[act_dim:] = _LOG_STD_BIAS

    # -- fast inference (plain numpy, no tape) -------------------------------

    def _actor_np(self, obs_n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        h = obs_n.astype(np.float32)
        p = self.params
        h = np.tanh(h @ p["actor.w0"].data + p["actor.b0"].data)
        h = np.tanh(h @ p["actor.w1"].data + p["actor.b1"].data)
        out = h @ p["actor.w2"].data + p["actor.b2"].data
        mean = out[..., : self.act_dim]
        log_std = _bound_log_std_np(out[..., self.act_dim :])
        return mean, log_std

    def value_np(self, obs_n: np.ndarray) -> np.ndarray:
        h = obs_n.astype(np.float32)
        p = self.params
        h = np.tanh(h @ p["critic.w0"].data + p["critic.b0"].data)
        h = np.tanh(h @ p["critic.w1"].data + p["critic.b1"].data)
        return (h @ p["critic.w2"].data + p["critic.b2"].data)[..., 0]

    def sample_np(self, obs_n: np.ndarray, rng: np.random.Generator):
        """Sample raw (pre-clip) actions; returns (raw, env_action, logp)."""
        mean, log_std = self._actor_np(obs_n)
        std = np.exp(log_std)
        raw = mean + std * rng.standard_normal(mean.shape).astype(np.float32)
        logp = (-0.5 * ((raw - mean) / std) ** 2 - log_std - 0.5 * LOG_2PI).sum(axis=-1)
        return raw, np.clip(raw, 0.0, 1.0), logp

    def mean_action_np(self, obs_n: np.ndarray) -> np.ndarray:
        mean, _ = self._actor_np(obs_n)
        return np.clip(mean, 0.0, 1.0)

    def mean_action_raw_obs(self, obs_raw: np.ndarray) -> np.ndarray:
        """Mean action from raw zone observation(s); returns (batch, act_dim)."""
        obs_raw = np.asarray(obs_raw, dtype=np.float64).reshape(-1, 6)
        normed = normalize_observation(obs_raw, self.norm_stats)
        return self.mean_action_np(normed.astype(np.float32))

    # -- tape forward for updates ---------------------------------------------

    def actor_heads(self, obs: Tensor) -> tuple[Tensor, Tensor]:
        p = self.params
        h = tn.tanh(tn.linear(obs, p["actor.w0"], p["actor.b0"]))
        h = tn.tanh(tn.linear(h, p["actor.w1"], p["actor.b1"]))
        out = tn.linear(h, p["actor.w2"], p["actor.b2"])
        d = self.act_dim
        sel_mean = np.zeros((2 * d, d), dtype=np.float32)
        sel_std = np.zeros((2 * d, d), dtype=np.float32)
        sel_mean[:d, :] = np.eye(d, dtype=np.float32)
        sel_std[d:, :] = np.eye(d, dtype=np.float32)
        mean = tn.matmul(out, Tensor(sel_mean))
        raw_std = tn.matmul(out, Tensor(sel_std))
        half_range = 0.5 * (LOG_STD_MAX - LOG_STD_MIN)
        log_std = tn.add(tn.mul(tn.add(tn.tanh(raw_std), 1.0), half_range), LOG_STD_MIN)
        return mean, log_std

    def critic_value(self, obs: Tensor) -> Tensor:
        p = self.params
        h = tn.tanh(tn.linear(obs, p["critic.w0"], p["critic.b0"]))
        h = tn.tanh(tn.linear(h, p["critic.w1"], p["critic.b1"]))
        return tn.linear(h, p["critic.w2"], p["critic.b2"])

    def log_prob(self, obs: Tensor, raw_actions: Tensor) -> tuple[Tensor, Tensor]:
        """Tape log-probability of raw actions and the entropy, both (B,)."""
        mean, log_std = self.actor_heads(obs)
        std = tn.exp(log_std)
        z = tn.div(tn.sub(raw_actions, mean), std)
        per_dim = tn.sub(tn.mul(tn.square(z), -0.5), tn.add(log_std, 0.5 * LOG_2PI))
        logp = tn.tsum(per_dim, axis=-1)
        entropy = tn.tsum(tn.add(log_std, 0.5 * (LOG_2PI + 1.0)), axis=-1)
        return logp, entropy

    # -- persistence --------------------------------------------------------

    def actor_param_names(self) -> list[str]:
        return [k for k in self.params if k.startswith("actor.")]

    def critic_param_names(self) -> list[str]:
        return [k for k in self.params if k.startswith("critic.")]

    def checksum(self) -> str:
        return tn.params_checksum(self.params)

    def save(self, path: str | Path) -> None:
        save_ntc(path, self.params)

    def config_dict(self) -> dict:
        return {
            "obs_dim": self.obs_dim,
            "act_dim": self.act_dim,
            "norm_stats": self.norm_stats.to_dict(),
        }

    @classmethod
    def load(cls, path: str | Path, config: dict) -> "PpoPolicy":
        policy = cls(
            obs_dim=config["obs_dim"],
            act_dim=config["act_dim"],
            norm_stats=NormStats.from_dict(config["norm_stats"]),
        )
        for name, arr in load_ntc(path).items():
            policy.params[name].data = arr.astype(np.float32)
        return policy

    def clone(self) -> "PpoPolicy":
        other = PpoPolicy(self.obs_dim, self.act_dim, norm_stats=self.norm_stats)
        for k, p in self.params.items():
            other.params[k].data = p.data.copy()
        return other
