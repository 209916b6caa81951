"""The five comparison controllers behind one interface.

Every controller sees the same episode loop (``harness.benchmark``): the
harness calls ``act_all`` each step, ``observe`` after the step, and
``on_episode_end`` at episode boundaries. Baseline and Expert are
stateless; the fresh single-agent and per-zone learners update their
policies only between episodes; the in-context controller mutates only its
context buffers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dpt.deploy import ContextBuffer, predict_actions_batch
from .dpt.model import DptModel
from .env.mdp import ZoneObservation
from .env.norm import normalize_observation
from .ppo.policy import PpoPolicy
from .ppo.train import PpoConfig, RunningStd, compute_gae, make_optimizers, ppo_update

CONTROLLER_NAMES = ("baseline", "expert", "sarl", "marl", "hvac-dpt")


class Controller:
    name = "controller"
    learns_online = False

    def reset(self, n_zones: int) -> None:
        pass

    def act_all(self, obs: list[ZoneObservation]) -> np.ndarray:
        raise NotImplementedError

    def observe(self, obs, actions, rewards, next_obs) -> None:
        pass

    def on_episode_end(self) -> None:
        pass


class BaselineController(Controller):
    """Holds every damper at 50 %."""

    name = "baseline"

    def act_all(self, obs):
        return np.full(len(obs), 0.5)


@dataclass(frozen=True)
class ExpertSchedule:
    occupied_floor: float = 0.3
    unoccupied_floor: float = 0.05
    boost_gain: float = 0.2            # extra damper per degC outside the band
    comfort_band: tuple[float, float] = (20.0, 24.0)


class ExpertController(Controller):
    """Building-specific engineered rule: ventilation floors by occupancy
    plus a proportional boost on comfort-band violations."""

    name = "expert"

    def __init__(self, schedule: ExpertSchedule):
        if schedule is None:
            raise ValueError("expert controller needs a building schedule")
        self.schedule = schedule

    def act_one(self, obs: ZoneObservation) -> float:
        s = self.schedule
        a = s.occupied_floor if obs.zone_occupancy else s.unoccupied_floor
        lo, hi = s.comfort_band
        if obs.zone_mean_temp > hi:
            a += s.boost_gain * (obs.zone_mean_temp - hi)
        elif obs.zone_mean_temp < lo:
            a += s.boost_gain * (lo - obs.zone_mean_temp)
        return min(1.0, max(0.0, a))

    def act_all(self, obs):
        return np.array([self.act_one(o) for o in obs])


class _OnlinePpoBase(Controller):
    learns_online = True

    def __init__(self, cfg: PpoConfig, seed: int):
        self.cfg = cfg
        self.seed = seed
        self.rng = np.random.default_rng([int(seed), 0x0213])
        self.reward_scale = RunningStd()
        self.updates_done = 0
        self._traj: list = []

    def _update_from(self, policy, optimizers, obs_n, act_raw, logp, rewards):
        self.reward_scale.update(rewards)
        values = policy.value_np(obs_n).astype(np.float64)
        adv, ret = compute_gae(
            rewards / self.reward_scale.std, values, self.cfg.gamma, self.cfg.gae_lambda
        )
        batch = {
            "obs_n": obs_n[:-1],
            "act_raw": act_raw,
            "logp_old": logp,
            "adv": adv,
            "ret": ret,
        }
        ppo_update(policy, batch, self.cfg, optimizers, seed=self.seed + self.updates_done)
        self.updates_done += 1


class SarlController(_OnlinePpoBase):
    """One fresh policy over the concatenated observations of every zone,
    emitting all dampers at once; updates at episode boundaries only."""

    name = "sarl"

    def __init__(self, n_zones: int, cfg: PpoConfig, seed: int = 0):
        super().__init__(cfg, seed)
        self.n = n_zones
        self.policy = PpoPolicy(obs_dim=6 * n_zones, act_dim=n_zones, seed=seed)
        self.optimizers = make_optimizers(self.policy, cfg)

    def _concat_norm(self, obs):
        vecs = np.stack([o.as_vector() for o in obs])
        return normalize_observation(vecs, self.policy.norm_stats).reshape(-1).astype(np.float32)

    def act_all(self, obs):
        flat = self._concat_norm(obs)[None]
        raw, a_env, logp = self.policy.sample_np(flat, self.rng)
        self._last = (flat[0], raw[0], float(logp[0]))
        return a_env[0]

    def observe(self, obs, actions, rewards, next_obs):
        flat, raw, logp = self._last
        self._traj.append((flat, raw, logp, float(np.sum(rewards))))
        self._final_obs = self._concat_norm(next_obs)

    def on_episode_end(self):
        if not self._traj:
            return
        obs_n = np.stack([t[0] for t in self._traj] + [self._final_obs])
        act_raw = np.stack([t[1] for t in self._traj])
        logp = np.array([t[2] for t in self._traj], dtype=np.float32)
        rewards = np.array([t[3] for t in self._traj], dtype=np.float64)
        self._update_from(self.policy, self.optimizers, obs_n, act_raw, logp, rewards)
        self._traj = []


class MarlController(_OnlinePpoBase):
    """Fresh per-zone policies, each learning from its own zone; updates at
    episode boundaries only."""

    name = "marl"

    def __init__(self, n_zones: int, cfg: PpoConfig, seed: int = 0):
        super().__init__(cfg, seed)
        self.n = n_zones
        self.policies = [PpoPolicy(seed=seed + z) for z in range(n_zones)]
        self.optimizers = [make_optimizers(p, cfg) for p in self.policies]

    def act_all(self, obs):
        vecs = np.stack([o.as_vector() for o in obs])
        normed = normalize_observation(vecs, self.policies[0].norm_stats).astype(np.float32)
        actions = np.zeros(self.n)
        self._last = []
        for z in range(self.n):
            raw, a_env, logp = self.policies[z].sample_np(normed[z : z + 1], self.rng)
            actions[z] = a_env[0, 0]
            self._last.append((normed[z], raw[0], float(logp[0])))
        return actions

    def observe(self, obs, actions, rewards, next_obs):
        self._traj.append((self._last, np.asarray(rewards, dtype=np.float64)))
        vecs = np.stack([o.as_vector() for o in next_obs])
        self._final_obs = normalize_observation(vecs, self.policies[0].norm_stats).astype(np.float32)

    def on_episode_end(self):
        if not self._traj:
            return
        H = len(self._traj)
        for z in range(self.n):
            obs_n = np.stack([step[0][z][0] for step in self._traj] + [self._final_obs[z]])
            act_raw = np.stack([step[0][z][1] for step in self._traj])
            logp = np.array([step[0][z][2] for step in self._traj], dtype=np.float32)
            rewards = np.array([step[1][z] for step in self._traj], dtype=np.float64)
            self._update_from(self.policies[z], self.optimizers[z], obs_n, act_raw, logp, rewards)
        self._traj = []


class DptController(Controller):
    """Frozen pretrained transformer conditioning on per-zone context
    buffers; only the buffers change between episodes."""

    name = "hvac-dpt"

    def __init__(
        self,
        model: DptModel,
        capacity: int = 256,
        eviction: str = "fifo",
        keep_context: bool = True,
        seed: int = 0,
    ):
        self.model = model
        self.capacity = capacity
        self.eviction = eviction
        self.keep_context = keep_context
        self.seed = seed
        self.buffers: list[ContextBuffer] = []
        self._episode: list[list[tuple]] = []

    def reset(self, n_zones: int):
        self.buffers = [
            ContextBuffer(capacity=self.capacity, eviction=self.eviction, seed=self.seed * 997 + z)
            for z in range(n_zones)
        ]
        self._episode = [[] for _ in range(n_zones)]

    def act_all(self, obs):
        queries = np.stack([o.as_vector() for o in obs])
        return predict_actions_batch(self.model, queries, [b.items for b in self.buffers])

    def observe(self, obs, actions, rewards, next_obs):
        for z in range(len(obs)):
            self._episode[z].append(
                (obs[z].as_vector(), float(actions[z]), float(rewards[z]), next_obs[z].as_vector())
            )

    def on_episode_end(self):
        if self.keep_context:
            for z, buf in enumerate(self.buffers):
                buf.append_episode(self._episode[z])
        self._episode = [[] for _ in self.buffers]
