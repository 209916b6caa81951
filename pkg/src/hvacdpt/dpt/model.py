"""Causal transformer that maps (query state, interaction context) to a
damper action in [0, 1].

Pre-layer-norm GPT blocks; the action head reads every position, so one
forward pass scores the prediction at every context prefix.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..env.norm import DEFAULT_NORM_STATS, NormStats
from ..nn import Tensor, load_ntc, save_ntc
from ..nn import tensor as tn
from .tokenize import TOKEN_DIM, TOKEN_LAYOUT_VERSION


@dataclass(frozen=True)
class DptConfig:
    n_layers: int = 3
    n_heads: int = 8
    width: int = 128
    max_seq: int = 256
    mlp_ratio: int = 4
    dropout: float = 0.0
    token_dim: int = TOKEN_DIM

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: dict) -> "DptConfig":
        return cls(**d)


class DptModel:
    def __init__(
        self,
        config: DptConfig = DptConfig(),
        seed: int = 0,
        norm_stats: NormStats = DEFAULT_NORM_STATS,
        reward_scale: float = 1.0,
    ):
        self.config = config
        self.norm_stats = norm_stats
        self.reward_scale = float(reward_scale)
        self.mask = tn.causal_mask(config.max_seq)
        rng = np.random.default_rng([int(seed), 0xD97])
        C, M = config.width, config.mlp_ratio * config.width
        p: dict[str, Tensor] = {}
        p["tok.w"] = tn.truncated_normal(rng, (config.token_dim, C), std=0.02)
        p["tok.b"] = tn.parameter(np.zeros(C))
        p["pos"] = tn.truncated_normal(rng, (config.max_seq, C), std=0.02)
        for i in range(config.n_layers):
            b = f"block{i}."
            p[b + "ln1.g"] = tn.parameter(np.ones(C))
            p[b + "ln1.b"] = tn.parameter(np.zeros(C))
            for name in ("wq", "wk", "wv", "wo"):
                p[b + name] = tn.truncated_normal(rng, (C, C), std=0.02)
            for name in ("bq", "bk", "bv", "bo"):
                p[b + name] = tn.parameter(np.zeros(C))
            p[b + "ln2.g"] = tn.parameter(np.ones(C))
            p[b + "ln2.b"] = tn.parameter(np.zeros(C))
            p[b + "fc1.w"] = tn.truncated_normal(rng, (C, M), std=0.02)
            p[b + "fc1.b"] = tn.parameter(np.zeros(M))
            p[b + "fc2.w"] = tn.truncated_normal(rng, (M, C), std=0.02)
            p[b + "fc2.b"] = tn.parameter(np.zeros(C))
        p["lnf.g"] = tn.parameter(np.ones(C))
        p["lnf.b"] = tn.parameter(np.zeros(C))
        p["head.w"] = tn.truncated_normal(rng, (C, 1), std=0.02)
        p["head.b"] = tn.parameter(np.zeros(1))
        self.params = p

    # -- tape forward (training) ----------------------------------------------

    def forward(self, tokens: np.ndarray) -> Tensor:
        """tokens (B, T, token_dim) -> predictions (B, T) in [0, 1]."""
        B, T, D = tokens.shape
        if T > self.config.max_seq:
            raise ValueError(f"sequence {T} exceeds max_seq {self.config.max_seq}")
        p = self.params
        x = tn.add(tn.matmul(Tensor(tokens.astype(np.float32)), p["tok.w"]), p["tok.b"])
        pos = tn.embedding_lookup(p["pos"], np.arange(T))
        x = tn.add(x, pos)
        for i in range(self.config.n_layers):
            b = f"block{i}."
            h = tn.layer_norm(x, p[b + "ln1.g"], p[b + "ln1.b"])
            att = tn.causal_self_attention(
                h, p[b + "wq"], p[b + "bq"], p[b + "wk"], p[b + "bk"],
                p[b + "wv"], p[b + "bv"], p[b + "wo"], p[b + "bo"],
                self.config.n_heads, self.mask,
            )
            x = tn.add(x, att)
            h = tn.layer_norm(x, p[b + "ln2.g"], p[b + "ln2.b"])
            h = tn.linear(tn.gelu(tn.linear(h, p[b + "fc1.w"], p[b + "fc1.b"])), p[b + "fc2.w"], p[b + "fc2.b"])
            x = tn.add(x, h)
        x = tn.layer_norm(x, p["lnf.g"], p["lnf.b"])
        out = tn.sigmoid(tn.linear(x, p["head.w"], p["head.b"]))
        return tn.reshape(out, (B, T))

    # -- fast numpy forward (deployment) --------------------------------------

    def forward_np(self, tokens: np.ndarray) -> np.ndarray:
        B, T, D = tokens.shape
        if T > self.config.max_seq:
            raise ValueError(f"sequence {T} exceeds max_seq {self.config.max_seq}")
        g = {k: v.data for k, v in self.params.items()}
        H, C = self.config.n_heads, self.config.width
        hd = C // H
        scale = np.float32(1.0 / np.sqrt(hd))

        def mm(a2, w):
            # flatten to one GEMM instead of a stacked matmul per batch row
            return (a2.reshape(-1, a2.shape[-1]) @ w).reshape(*a2.shape[:-1], w.shape[-1])

        def ln(v, gamma, beta):
            mu = v.mean(axis=-1, keepdims=True)
            var = v.var(axis=-1, keepdims=True)
            return gamma * (v - mu) / np.sqrt(var + 1e-5) + beta

        x = mm(tokens.astype(np.float32), g["tok.w"]) + g["tok.b"]
        x += g["pos"][:T]
        mask = self.mask[:T, :T]
        for i in range(self.config.n_layers):
            b = f"block{i}."
            h = ln(x, g[b + "ln1.g"], g[b + "ln1.b"])
            q = (mm(h, g[b + "wq"]) + g[b + "bq"]).reshape(B, T, H, hd).transpose(0, 2, 1, 3)
            k = (mm(h, g[b + "wk"]) + g[b + "bk"]).reshape(B, T, H, hd).transpose(0, 2, 1, 3)
            v = (mm(h, g[b + "wv"]) + g[b + "bv"]).reshape(B, T, H, hd).transpose(0, 2, 1, 3)
            att = np.matmul(q, k.transpose(0, 1, 3, 2)) * scale
            att += mask
            att -= att.max(axis=-1, keepdims=True)
            e = np.exp(att)
            probs = e / e.sum(axis=-1, keepdims=True)
            y = np.matmul(probs, v).transpose(0, 2, 1, 3).reshape(B, T, C)
            x = x + (mm(y, g[b + "wo"]) + g[b + "bo"])
            h = ln(x, g[b + "ln2.g"], g[b + "ln2.b"])
            h1 = mm(h, g[b + "fc1.w"]) + g[b + "fc1.b"]
            h1 = 0.5 * h1 * (1.0 + np.tanh(0.7978845608028654 * (h1 + 0.044715 * (h1 * h1 * h1))))
            x = x + (mm(h1, g[b + "fc2.w"]) + g[b + "fc2.b"])
        x = ln(x, g["lnf.g"], g["lnf.b"])
        out = mm(x, g["head.w"]) + g["head.b"]
        return (1.0 / (1.0 + np.exp(-out)))[..., 0]

    # -- persistence ------------------------------------------------------------

    def checksum(self) -> str:
        return tn.params_checksum(self.params)

    def save(self, path: str | Path) -> None:
        """Write <path> (NTC container) plus a <path>.json sidecar config."""
        path = Path(path)
        save_ntc(path, self.params)
        sidecar = {
            "config": self.config.to_dict(),
            "norm_stats": self.norm_stats.to_dict(),
            "reward_scale": self.reward_scale,
            "token_layout_version": TOKEN_LAYOUT_VERSION,
        }
        path.with_suffix(path.suffix + ".json").write_text(
            json.dumps(sidecar, indent=2, sort_keys=True) + "\n"
        )

    @classmethod
    def load(cls, path: str | Path) -> "DptModel":
        path = Path(path)
        sidecar = json.loads(path.with_suffix(path.suffix + ".json").read_text())
        if sidecar.get("token_layout_version") != TOKEN_LAYOUT_VERSION:
            raise ValueError(f"unsupported token layout {sidecar.get('token_layout_version')}")
        model = cls(
            config=DptConfig.from_dict(sidecar["config"]),
            norm_stats=NormStats.from_dict(sidecar["norm_stats"]),
            reward_scale=sidecar["reward_scale"],
        )
        for name, arr in load_ntc(path).items():
            model.params[name].data = arr.astype(np.float32)
        return model
