"""Supervised pretraining of the transformer on (query, context, label)
samples.

The loss for a sample averages the squared error of the prediction at
every context prefix, from the bare query (prefix 0) to the full context;
the causal mask makes one forward pass score all prefixes at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..env.norm import NormStats
from ..nn import AdamW
from ..nn import tensor as tn
from .dataset import PretrainingSample
from .model import DptConfig, DptModel
from .tokenize import tokenize


@dataclass
class DptTrainConfig:
    lr: float = 1e-3
    weight_decay: float = 1e-4
    epochs: int = 118
    batch_size: int = 64
    test_split: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.test_split < 1.0):
            raise ValueError("test_split must lie in (0, 1)")


class PretrainDiverged(RuntimeError):
    pass


def build_token_batch(
    samples: list[PretrainingSample], stats: NormStats, reward_scale: float, max_seq: int
) -> tuple[np.ndarray, np.ndarray]:
    """Stack equal-length samples to (B, T, token_dim) plus labels (B,)."""
    seqs = [tokenize(s.s_query, s.context, stats, reward_scale, max_seq) for s in samples]
    lengths = {s.shape[0] for s in seqs}
    if len(lengths) != 1:
        raise ValueError(f"samples have mixed context lengths: {sorted(lengths)}")
    tokens = np.stack(seqs).astype(np.float32)
    labels = np.array([s.a_star for s in samples], dtype=np.float32)
    return tokens, labels


def _eval_mse(model: DptModel, tokens: np.ndarray, labels: np.ndarray, batch: int) -> float:
    total, count = 0.0, 0
    for i in range(0, len(tokens), batch):
        pred = model.forward_np(tokens[i : i + batch])
        diff = pred - labels[i : i + batch, None]
        total += float((diff**2).sum())
        count += diff.size
    return total / count


def pretrain(
    samples: list[PretrainingSample],
    cfg: DptTrainConfig,
    model_config: DptConfig = DptConfig(),
    norm_stats: NormStats | None = None,
    reward_scale: float = 1.0,
) -> tuple[DptModel, dict]:
    """Train a fresh model; returns (model, report with per-epoch MSE)."""
    if len(samples) < 10:
        raise ValueError(f"need at least 10 samples, got {len(samples)}")
    from ..env.norm import DEFAULT_NORM_STATS

    stats = norm_stats or DEFAULT_NORM_STATS
    model = DptModel(model_config, seed=cfg.seed, norm_stats=stats, reward_scale=reward_scale)
    tokens, labels = build_token_batch(samples, stats, reward_scale, model_config.max_seq)

    rng = np.random.default_rng([cfg.seed, 0x7124])
    order = rng.permutation(len(samples))
    n_test = max(int(round(len(samples) * cfg.test_split)), 1)
    test_idx, train_idx = order[:n_test], order[n_test:]
    tr_tokens, tr_labels = tokens[train_idx], labels[train_idx]
    te_tokens, te_labels = tokens[test_idx], labels[test_idx]

    opt = AdamW(model.params, lr=cfg.lr, weight_decay=cfg.weight_decay)
    report = {
        "train_mse": [],
        "test_mse": [],
        "n_train": len(train_idx),
        "n_test": len(test_idx),
        "test_label_variance": float(te_labels.var()),
        "steps": 0,
    }
    for epoch in range(cfg.epochs):
        perm = rng.permutation(len(tr_tokens))
        epoch_loss, n_batches = 0.0, 0
        for i in range(0, len(perm), cfg.batch_size):
            idx = perm[i : i + cfg.batch_size]
            pred = model.forward(tr_tokens[idx])
            target = np.repeat(tr_labels[idx][:, None], tokens.shape[1], axis=1)
            loss = tn.mse_loss(pred, target)
            value = float(loss.data)
            if not math.isfinite(value):
                raise PretrainDiverged(f"non-finite loss at epoch {epoch}, batch {n_batches}")
            opt.zero_grad()
            loss.backward()
            opt.step()
            epoch_loss += value
            n_batches += 1
            report["steps"] += 1
        report["train_mse"].append(epoch_loss / max(n_batches, 1))
        report["test_mse"].append(_eval_mse(model, te_tokens, te_labels, cfg.batch_size))
    return model, report
