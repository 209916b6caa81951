import numpy as np
import pytest

from hvacdpt.dpt import (
    ContextBuffer,
    ContextTooLong,
    DatasetGenConfig,
    DeployConfig,
    DptConfig,
    DptModel,
    DptTrainConfig,
    build_token_batch,
    deploy_online,
    detokenize,
    generate_pretraining_dataset,
    load_dataset,
    predict_action,
    pretrain,
    save_dataset,
    tokenize,
)
from hvacdpt.env import DEFAULT_NORM_STATS
from hvacdpt.ppo import DiversityConfig, PpoConfig, TrainingRun, train_policy_library
from hvacdpt.sim import load_preset

STATS = DEFAULT_NORM_STATS
MINI = DptConfig(n_layers=2, n_heads=2, width=32, max_seq=64)


def rand_obs(rng):
    return np.array([
        rng.uniform(14, 30), rng.uniform(0, 100), rng.integers(0, 2),
        rng.uniform(-15, 35), rng.uniform(0, 800), rng.integers(0, 24),
    ], dtype=np.float64)


def rand_context(rng, n):
    return [
        (rand_obs(rng), float(rng.uniform(0, 1)), float(-rng.uniform(0, 900)), rand_obs(rng))
        for _ in range(n)
    ]


# ---------------------------------------------------------------- tokenize


def test_tokenize_lengths():
    rng = np.random.default_rng(0)
    q = rand_obs(rng)
    assert tokenize(q, [], STATS, 100.0).shape == (1, 20)
    assert tokenize(q, rand_context(rng, 10), STATS, 100.0).shape == (11, 20)


def test_tokenize_round_trip():
    rng = np.random.default_rng(1)
    q = rand_obs(rng)
    ctx = rand_context(rng, 5)
    seq = tokenize(q, ctx, STATS, 250.0)
    q2, ctx2 = detokenize(seq, STATS, 250.0)
    assert np.allclose(q2, q, atol=1e-4)
    for orig, back in zip(ctx, ctx2):
        assert np.allclose(back[0], orig[0], atol=1e-4)
        assert back[1] == pytest.approx(orig[1], abs=1e-6)
        assert back[2] == pytest.approx(orig[2], abs=1e-2)
        assert np.allclose(back[3], orig[3], atol=1e-4)


def test_tokenize_rejects_overlong_context():
    rng = np.random.default_rng(2)
    with pytest.raises(ContextTooLong):
        tokenize(rand_obs(rng), rand_context(rng, 64), STATS, 100.0, max_seq=64)


def test_query_and_context_flags_differ():
    rng = np.random.default_rng(3)
    seq = tokenize(rand_obs(rng), rand_context(rng, 3), STATS, 100.0)
    assert seq[0, 14] == 0.0
    assert np.all(seq[1:, 14] == 1.0)
    assert np.all(seq[0, 6:] == 0.0)


# ---------------------------------------------------------------- model


def test_forward_tape_and_numpy_agree():
    rng = np.random.default_rng(4)
    model = DptModel(MINI, seed=0)
    tokens = rng.normal(size=(3, 9, 20)).astype(np.float32)
    a = model.forward(tokens).data
    b = model.forward_np(tokens)
    assert np.allclose(a, b, atol=1e-6)


def test_predictions_in_unit_interval():
    rng = np.random.default_rng(5)
    model = DptModel(MINI, seed=1)
    tokens = rng.normal(0, 3, size=(2, 12, 20)).astype(np.float32)
    out = model.forward_np(tokens)
    assert np.all(out >= 0.0) and np.all(out <= 1.0)


def test_prefix_causality_exact():
    rng = np.random.default_rng(6)
    model = DptModel(MINI, seed=2)
    tokens = rng.normal(size=(1, 10, 20)).astype(np.float32)
    base = model.forward_np(tokens)
    for j in range(9):
        mutated = tokens.copy()
        mutated[0, j + 1 :, :] += rng.normal(size=(9 - j, 20)).astype(np.float32)
        out = model.forward_np(mutated)
        assert np.array_equal(out[0, : j + 1], base[0, : j + 1])


def test_empty_context_prediction_in_range():
    rng = np.random.default_rng(7)
    model = DptModel(MINI, seed=3)
    a = predict_action(model, rand_obs(rng), [])
    assert 0.0 <= a <= 1.0


def test_checksum_unchanged_by_prediction():
    rng = np.random.default_rng(8)
    model = DptModel(MINI, seed=4)
    before = model.checksum()
    for _ in range(50):
        predict_action(model, rand_obs(rng), rand_context(rng, 6))
    assert model.checksum() == before


def test_model_save_load_round_trip(tmp_path):
    model = DptModel(MINI, seed=5, reward_scale=123.0)
    path = tmp_path / "model.ntc"
    model.save(path)
    loaded = DptModel.load(path)
    assert loaded.config == model.config
    assert loaded.reward_scale == 123.0
    assert loaded.checksum() == model.checksum()
    rng = np.random.default_rng(9)
    tokens = rng.normal(size=(1, 5, 20)).astype(np.float32)
    assert np.array_equal(model.forward_np(tokens), loaded.forward_np(tokens))


# ---------------------------------------------------------------- pretraining


def synthetic_samples(n, n_context, label_fn, seed=0):
    from hvacdpt.dpt import PretrainingSample

    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        q = rand_obs(rng)
        out.append(
            PretrainingSample(
                s_query=q,
                context=rand_context(rng, n_context),
                a_star=float(np.clip(label_fn(q, rng), 0.0, 1.0)),
                provenance=("b", 0, "t"),
            )
        )
    return out


def test_constant_labels_learned():
    samples = synthetic_samples(64, 4, lambda q, rng: 0.5, seed=1)
    cfg = DptTrainConfig(epochs=60, batch_size=16, seed=0)
    model, report = pretrain(samples, cfg, MINI, reward_scale=300.0)
    tokens, labels = build_token_batch(samples, model.norm_stats, 300.0, MINI.max_seq)
    preds = model.forward_np(tokens)
    assert np.all(np.abs(preds - 0.5) < 0.01)
    assert report["train_mse"][-1] < report["train_mse"][0]


def test_pretrain_needs_ten_samples():
    samples = synthetic_samples(5, 2, lambda q, rng: 0.5)
    with pytest.raises(ValueError, match="10"):
        pretrain(samples, DptTrainConfig(epochs=1), MINI)


def test_mini_memorization():
    samples = synthetic_samples(10, 4, lambda q, rng: rng.uniform(0.1, 0.9), seed=2)
    cfg = DptTrainConfig(epochs=150, batch_size=10, test_split=0.1, seed=0)
    model, report = pretrain(samples, cfg, MINI)
    assert report["train_mse"][-1] < 1e-2


# ---------------------------------------------------------------- dataset generation


@pytest.fixture(scope="module")
def tiny_library():
    spec = load_preset("b_train")
    diversity = DiversityConfig(
        runs=[TrainingRun("t0", seed=0, entropy_coef=0.01, episodes=2, snapshot_episodes=(1,))],
        start_months=(1,),
        eval_episodes=1,
        eval_horizon=48,
    )
    cfg = PpoConfig(batch_size=96, epochs_per_update=2, minibatches=4)
    return spec, train_policy_library([spec], diversity, cfg, base_seed=3)


def test_dataset_generation_and_round_trip(tiny_library, tmp_path):
    spec, library = tiny_library
    cfg = DatasetGenConfig(trajectories=2, samples_per_trajectory=20, n_context=6, horizon=48)
    samples, scale = generate_pretraining_dataset(library, {spec.name: spec}, cfg, seed=0)
    assert len(samples) == 40
    assert all(0.0 <= s.a_star <= 1.0 for s in samples)
    assert all(len(s.context) == 6 for s in samples)
    assert scale > 0

    path = tmp_path / "ds.jsonl"
    save_dataset(path, samples, scale, DEFAULT_NORM_STATS, cfg.n_context)
    loaded, header = load_dataset(path)
    assert header["n_samples"] == 40
    assert header["reward_scale"] == pytest.approx(scale)
    assert len(loaded) == 40
    assert np.allclose(loaded[7].s_query, samples[7].s_query)
    assert loaded[7].a_star == pytest.approx(samples[7].a_star)


def test_dataset_generation_deterministic(tiny_library, tmp_path):
    spec, library = tiny_library
    cfg = DatasetGenConfig(trajectories=1, samples_per_trajectory=10, n_context=4, horizon=48)

    def gen(path):
        samples, scale = generate_pretraining_dataset(library, {spec.name: spec}, cfg, seed=9)
        save_dataset(path, samples, scale, DEFAULT_NORM_STATS, cfg.n_context)
        return path.read_bytes()

    assert gen(tmp_path / "a.jsonl") == gen(tmp_path / "b.jsonl")


def test_label_replay_oracle(tiny_library):
    # Re-evaluating the provenance policy at s_query must reproduce a_star.
    spec, library = tiny_library
    cfg = DatasetGenConfig(trajectories=1, samples_per_trajectory=15, n_context=4, horizon=48)
    samples, _ = generate_pretraining_dataset(library, {spec.name: spec}, cfg, seed=4)
    for s in samples:
        building, zone, tag = s.provenance
        entry = next(
            e for e in library.entries_for(building, zone) if e.tag == tag
        )
        replay = float(entry.policy.mean_action_raw_obs(s.s_query)[0, 0])
        assert replay == pytest.approx(s.a_star, abs=1e-6)


def test_context_longer_than_collected_rejected(tiny_library):
    spec, library = tiny_library
    cfg = DatasetGenConfig(trajectories=1, samples_per_trajectory=1, n_context=1000, horizon=24)
    with pytest.raises(ValueError, match="n_context"):
        generate_pretraining_dataset(library, {spec.name: spec}, cfg, seed=0)


# ---------------------------------------------------------------- deployment


def test_context_buffer_fifo_and_uniform():
    fifo = ContextBuffer(capacity=5, eviction="fifo")
    fifo.append_episode([(i,) for i in range(8)])
    assert [t[0] for t in fifo.items] == [3, 4, 5, 6, 7]

    uni = ContextBuffer(capacity=5, eviction="uniform", seed=1)
    uni.append_episode([(i,) for i in range(50)])
    assert len(uni) == 5
    vals = [t[0] for t in uni.items]
    assert vals == sorted(vals)  # chronological order preserved


def test_deploy_frozen_weights_and_report(tiny_library):
    model = DptModel(MINI, seed=6, reward_scale=400.0)
    spec = load_preset("b_train")
    cfg = DeployConfig(episodes=2, horizon=24, capacity=8, start_months=(1, 7))
    before = model.checksum()
    report = deploy_online(model, spec, cfg, seed=0)
    assert model.checksum() == before
    assert len(report["episodes"]) == 2
    assert report["zone_count"] == 5
    assert all(len(ep["zone_energy_wh"]) == 5 for ep in report["episodes"])
    assert report["context_sizes"] == [8] * 5


def test_deploy_no_context_keeps_buffers_empty():
    model = DptModel(MINI, seed=7)
    spec = load_preset("b_train")
    cfg = DeployConfig(episodes=2, horizon=12, capacity=8, keep_context=False)
    report = deploy_online(model, spec, cfg, seed=0)
    assert report["context_sizes"] == [0] * 5
