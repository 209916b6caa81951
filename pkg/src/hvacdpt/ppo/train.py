"""Clipped-surrogate policy optimization and library training."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..env.mdp import BuildingEnv, EpisodeConfig, HORIZON_DEFAULT
from ..env.norm import normalize_observation
from ..nn import AdamW, Tensor
from ..nn import tensor as tn
from .policy import PpoPolicy


@dataclass
class PpoConfig:
    clip_epsilon: float = 0.2
    lr: float = 3e-4
    batch_size: int = HORIZON_DEFAULT   # one episode
    epochs_per_update: int = 10
    minibatches: int = 8
    gamma: float = 0.99
    gae_lambda: float = 0.95
    entropy_coef: float = 0.01
    episodes: int = 1000                # full-scale; desk configs override
    max_grad_norm: float = 0.5

    def __post_init__(self):
        if self.clip_epsilon <= 0:
            raise ValueError("clip_epsilon must be > 0")
        if not (0.0 < self.gamma <= 1.0):
            raise ValueError("gamma must be in (0, 1]")


class RunningStd:
    """Welford accumulator used to scale rewards per building."""

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0

    def update(self, values: np.ndarray):
        for v in np.asarray(values, dtype=np.float64).reshape(-1):
            self.count += 1
            delta = v - self.mean
            self.mean += delta / self.count
            self.m2 += delta * (v - self.mean)

    @property
    def std(self) -> float:
        if self.count < 2:
            return 1.0
        return max(math.sqrt(self.m2 / (self.count - 1)), 1e-6)


def collect_rollout(
    env: BuildingEnv,
    policies: list[PpoPolicy],
    seed: int,
) -> list[dict]:
    """Roll one episode with per-zone policies acting on their own zones.

    Returns one trajectory dict per zone with raw observations, raw and
    clipped actions, log-probs and raw rewards (Wh, negated energy).
    """
    n = env.n_zones
    if len(policies) != n:
        raise ValueError(f"need {n} policies, got {len(policies)}")
    rng = np.random.default_rng([int(seed), 0x011])
    H = env.horizon
    obs_raw = np.zeros((H + 1, n, 6), dtype=np.float64)
    act_raw = np.zeros((H, n), dtype=np.float32)
    act_env = np.zeros((H, n), dtype=np.float32)
    logps = np.zeros((H, n), dtype=np.float32)
    rewards = np.zeros((H, n), dtype=np.float64)

    obs = env.reset()
    obs_raw[0] = [o.as_vector() for o in obs]
    for t in range(H):
        normed = normalize_observation(obs_raw[t], policies[0].norm_stats).astype(np.float32)
        for z in range(n):
            raw, a_env, lp = policies[z].sample_np(normed[z : z + 1], rng)
            act_raw[t, z] = raw[0, 0]
            act_env[t, z] = a_env[0, 0]
            logps[t, z] = lp[0]
        obs, r, done, _ = env.step(act_env[t])
        obs_raw[t + 1] = [o.as_vector() for o in obs]
        rewards[t] = r
    return [
        {
            "obs": obs_raw[:, z, :],          # (H + 1, 6)
            "act_raw": act_raw[:, z],
            "act_env": act_env[:, z],
            "logp": logps[:, z],
            "reward": rewards[:, z],
        }
        for z in range(n)
    ]


def compute_gae(
    rewards: np.ndarray, values: np.ndarray, gamma: float, lam: float
) -> tuple[np.ndarray, np.ndarray]:
    """Generalized advantage estimation; values has one bootstrap entry more
    than rewards (truncated-episode bootstrap)."""
    H = len(rewards)
    adv = np.zeros(H, dtype=np.float64)
    acc = 0.0
    for t in range(H - 1, -1, -1):
        delta = rewards[t] + gamma * values[t + 1] - values[t]
        acc = delta + gamma * lam * acc
        adv[t] = acc
    returns = adv + values[:-1]
    return adv, returns


def _global_grad_norm(params: dict[str, Tensor], names: list[str]) -> float:
    total = 0.0
    for n in names:
        g = params[n].grad
        if g is not None:
            total += float((g.astype(np.float64) ** 2).sum())
    return math.sqrt(total)


def _scale_grads(params: dict[str, Tensor], names: list[str], scale: float):
    for n in names:
        if params[n].grad is not None:
            params[n].grad *= scale


class NonFiniteLoss(RuntimeError):
    pass


def ppo_update(
    policy: PpoPolicy,
    batch: dict,
    cfg: PpoConfig,
    optimizers: tuple[AdamW, AdamW] | None = None,
    seed: int = 0,
) -> dict:
    """One update pass: cfg.epochs_per_update epochs of shuffled minibatches.

    batch keys: obs_n (B, obs_dim) normalized, act_raw (B, act_dim),
    logp_old (B,), adv (B,), ret (B,). Advantages are normalized here.
    Returns loss statistics.
    """
    if optimizers is None:
        optimizers = make_optimizers(policy, cfg)
    opt_actor, opt_critic = optimizers

    obs_n = np.asarray(batch["obs_n"], dtype=np.float32)
    act_raw = np.asarray(batch["act_raw"], dtype=np.float32)
    if act_raw.ndim == 1:
        act_raw = act_raw[:, None]
    logp_old = np.asarray(batch["logp_old"], dtype=np.float32)
    adv = np.asarray(batch["adv"], dtype=np.float64)
    ret = np.asarray(batch["ret"], dtype=np.float32)
    B = len(obs_n)

    adv = (adv - adv.mean()) / (adv.std() + 1e-8)
    adv = adv.astype(np.float32)

    rng = np.random.default_rng([int(seed), 0xBB])
    mb = max(B // cfg.minibatches, 1)
    stats = {"actor_loss": 0.0, "critic_loss": 0.0, "entropy": 0.0, "n": 0}
    for _ in range(cfg.epochs_per_update):
        order = rng.permutation(B)
        for start in range(0, B, mb):
            idx = order[start : start + mb]
            o = Tensor(obs_n[idx])
            a = Tensor(act_raw[idx])
            lp_old = Tensor(logp_old[idx])
            ad = Tensor(adv[idx])
            rt = Tensor(ret[idx])

            logp, entropy = policy.log_prob(o, a)
            ratio = tn.exp(tn.sub(logp, lp_old))
            surr1 = tn.mul(ratio, ad)
            surr2 = tn.mul(tn.clip(ratio, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon), ad)
            pg = tn.tmean(tn.minimum(surr1, surr2))
            ent = tn.tmean(entropy)
            actor_loss = tn.sub(tn.mul(pg, -1.0), tn.mul(ent, cfg.entropy_coef))

            value = tn.reshape(policy.critic_value(o), (len(idx),))
            critic_loss = tn.mse_loss(value, rt)

            a_val = float(actor_loss.data)
            c_val = float(critic_loss.data)
            if not (math.isfinite(a_val) and math.isfinite(c_val)):
                raise NonFiniteLoss(
                    f"non-finite PPO loss (actor={a_val}, critic={c_val}) "
                    f"at update step {stats['n']}"
                )

            opt_actor.zero_grad()
            opt_critic.zero_grad()
            actor_loss.backward()
            critic_loss.backward()
            if cfg.max_grad_norm:
                for opt, names in (
                    (opt_actor, policy.actor_param_names()),
                    (opt_critic, policy.critic_param_names()),
                ):
                    norm = _global_grad_norm(policy.params, names)
                    if norm > cfg.max_grad_norm:
                        _scale_grads(policy.params, names, cfg.max_grad_norm / norm)
            opt_actor.step()
            opt_critic.step()

            stats["actor_loss"] += a_val
            stats["critic_loss"] += c_val
            stats["entropy"] += float(ent.data)
            stats["n"] += 1
    for k in ("actor_loss", "critic_loss", "entropy"):
        stats[k] /= max(stats["n"], 1)
    return stats


def make_optimizers(policy: PpoPolicy, cfg: PpoConfig) -> tuple[AdamW, AdamW]:
    actor_params = {k: policy.params[k] for k in policy.actor_param_names()}
    critic_params = {k: policy.params[k] for k in policy.critic_param_names()}
    return (
        AdamW(actor_params, lr=cfg.lr, weight_decay=0.0),
        AdamW(critic_params, lr=cfg.lr, weight_decay=0.0),
    )


def trajectory_to_batch(traj: dict, policy: PpoPolicy, cfg: PpoConfig, reward_scale: float) -> dict:
    """Turn a raw per-zone trajectory into a PPO batch with GAE targets."""
    obs_n = normalize_observation(traj["obs"], policy.norm_stats).astype(np.float32)
    values = policy.value_np(obs_n).astype(np.float64)
    scaled_r = traj["reward"] / reward_scale
    adv, ret = compute_gae(scaled_r, values, cfg.gamma, cfg.gae_lambda)
    return {
        "obs_n": obs_n[:-1],
        "act_raw": traj["act_raw"],
        "logp_old": traj["logp"],
        "adv": adv,
        "ret": ret,
    }


def evaluate_policies(
    building,
    policies: list[PpoPolicy],
    episodes: int = 5,
    horizon: int = HORIZON_DEFAULT,
    seed: int = 1000,
    start_month: int = 1,
) -> np.ndarray:
    """Mean per-zone episodic return (negated Wh) using mean actions."""
    n = building.zone_count
    totals = np.zeros(n, dtype=np.float64)
    for e in range(episodes):
        cfg = EpisodeConfig(
            horizon=horizon,
            start_month=start_month,
            weather_seed=seed + 17 * e,
            occupancy_seed=seed + 31 * e,
        )
        env = BuildingEnv(building, cfg)
        obs = env.reset()
        done = False
        while not done:
            vecs = np.array([o.as_vector() for o in obs])
            normed = normalize_observation(vecs, policies[0].norm_stats).astype(np.float32)
            actions = np.array(
                [policies[z].mean_action_np(normed[z : z + 1])[0, 0] for z in range(n)]
            )
            obs, r, done, _ = env.step(actions)
            totals += r
    return totals / episodes
