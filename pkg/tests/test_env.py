import numpy as np
import pytest

from hvacdpt.env import (
    DEFAULT_NORM_STATS,
    BuildingEnv,
    EpisodeConfig,
    EpisodeDone,
    NormStats,
    TransitionTuple,
    ZoneObservation,
    denormalize_observation,
    normalize_observation,
    read_transition_log,
    record_to_transition,
    transition_to_record,
    write_transition_log,
)
from hvacdpt.sim import load_preset


def short_cfg(horizon=96, **kw):
    return EpisodeConfig(horizon=horizon, start_month=1, weather_seed=11, occupancy_seed=5, **kw)


def test_reset_returns_one_observation_per_zone():
    env = BuildingEnv(load_preset("b_train"), short_cfg())
    obs = env.reset()
    assert len(obs) == 5
    assert all(isinstance(o, ZoneObservation) for o in obs)


def test_episode_starts_at_midnight():
    env = BuildingEnv(load_preset("b_train"), short_cfg())
    obs = env.reset()
    assert all(o.hour_of_day == 0 for o in obs)


def test_reset_deterministic():
    spec = load_preset("b_train")
    a = BuildingEnv(spec, short_cfg()).reset()
    b = BuildingEnv(spec, short_cfg()).reset()
    assert a == b


def test_rewards_are_nonpositive():
    env = BuildingEnv(load_preset("b_train"), short_cfg())
    env.reset()
    _, rewards, _, _ = env.step(np.full(5, 0.5))
    assert np.all(rewards <= 0.0)


def test_horizon_contract():
    env = BuildingEnv(load_preset("b_train"), short_cfg(horizon=4))
    env.reset()
    for t in range(4):
        _, _, done, _ = env.step(np.full(5, 0.2))
    assert done
    with pytest.raises(EpisodeDone):
        env.step(np.full(5, 0.2))


def test_episode_reward_equals_energy_accumulator():
    env = BuildingEnv(load_preset("b_train"), short_cfg(horizon=192))
    env.reset()
    total_neg_reward = np.zeros(5)
    done = False
    while not done:
        _, rewards, done, _ = env.step(np.full(5, 0.4))
        total_neg_reward += -rewards
    totals = env.zone_energy_totals()
    assert np.allclose(total_neg_reward, totals, rtol=1e-10, atol=1e-6)


def test_action_validation():
    env = BuildingEnv(load_preset("b_train"), short_cfg())
    env.reset()
    with pytest.raises(ValueError):
        env.step([0.5, 0.5])
    with pytest.raises(ValueError):
        env.step([0.5, 0.5, 0.5, 0.5, 2.0])


def test_hour_advances_with_steps():
    env = BuildingEnv(load_preset("b_train"), short_cfg(horizon=12))
    env.reset()
    obs, _, _, _ = env.step(np.zeros(5))
    assert obs[0].hour_of_day == 0
    for _ in range(3):
        obs, _, _, _ = env.step(np.zeros(5))
    assert obs[0].hour_of_day == 1


# ---------------------------------------------------------------- normalization


def test_normalize_mean_maps_to_zero():
    stats = DEFAULT_NORM_STATS
    obs = np.array(stats.mean)
    vec = normalize_observation(obs, stats)
    for i in (0, 1, 3, 4):
        assert vec[i] == pytest.approx(0.0)


def test_hour_endpoint_mapping():
    stats = DEFAULT_NORM_STATS
    lo = normalize_observation(np.array([21.0, 40.0, 0.0, 10.0, 130.0, 0.0]), stats)
    hi = normalize_observation(np.array([21.0, 40.0, 1.0, 10.0, 130.0, 23.0]), stats)
    assert lo[5] == pytest.approx(-1.0)
    assert hi[5] == pytest.approx(1.0)
    assert lo[2] == pytest.approx(-1.0)
    assert hi[2] == pytest.approx(1.0)


def test_normalize_round_trip():
    stats = DEFAULT_NORM_STATS
    rng = np.random.default_rng(1)
    for _ in range(100):
        obs = np.array([
            rng.uniform(10, 35), rng.uniform(0, 100), rng.integers(0, 2),
            rng.uniform(-20, 40), rng.uniform(0, 900), rng.integers(0, 24),
        ], dtype=np.float64)
        back = denormalize_observation(normalize_observation(obs, stats), stats)
        assert np.all(np.abs(back - obs) < 1e-9)


def test_degenerate_stats_rejected():
    with pytest.raises(ValueError):
        NormStats(mean=(0.0,) * 6, std=(0.0,) * 6)
    with pytest.raises(ValueError):
        NormStats(mean=(float("nan"),) * 6, std=(1.0,) * 6)


# ---------------------------------------------------------------- transition log


def test_transition_log_round_trip(tmp_path):
    env = BuildingEnv(load_preset("b_train"), short_cfg(horizon=8))
    obs = env.reset()
    records = []
    for t in range(8):
        actions = np.full(5, 0.3)
        nxt, rewards, _, _ = env.step(actions)
        for z in range(5):
            tr = TransitionTuple(s=obs[z], a=0.3, s_next=nxt[z], r=float(rewards[z]))
            records.append(transition_to_record(tr, zone=z, t=t, episode=0))
        obs = nxt
    path = tmp_path / "log.jsonl"
    write_transition_log(path, records)
    loaded = read_transition_log(path)
    assert loaded == records
    tr, zone, t, ep = record_to_transition(loaded[-1])
    assert zone == 4 and t == 7 and ep == 0
    assert tr.r <= 0
