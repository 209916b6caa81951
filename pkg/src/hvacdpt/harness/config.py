"""Run configuration: defaults, file loading, and content hashing for
phase caching."""

from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path


class ConfigError(ValueError):
    pass


def default_run_config() -> dict:
    """Desk-scale defaults: the whole pipeline runs on a workstation in
    roughly an hour. Paper-scale values are noted inline."""
    return {
        "seed": 0,
        "out_dir": "runs/default",
        "deploy_building": "b_denver",
        "training_buildings": ["b_train", "b_train_heavy", "b_train_light"],
        "ppo": {
            "clip_epsilon": 0.2,
            "lr": 3e-4,
            "batch_size": 2976,          # one episode
            "epochs_per_update": 10,
            "minibatches": 8,
            "gamma": 0.99,
            "gae_lambda": 0.95,
            "entropy_coef": 0.01,
            "episodes": 1000,            # per-run cap; diversity runs set their own
            "max_grad_norm": 0.5,
        },
        "diversity": {
            "runs": [
                {"tag": "r0", "seed": 0, "entropy_coef": 0.01, "episodes": 40, "snapshot_episodes": [10]},
                {"tag": "r1", "seed": 1, "entropy_coef": 0.04, "episodes": 40, "snapshot_episodes": [10]},
            ],
            "start_months": list(range(1, 13)),
            "eval_episodes": 2,
            "eval_horizon": 480,
        },
        "dataset": {
            "trajectories": 12,            # paper scale: 100
            "samples_per_trajectory": 84,  # ~100 at paper scale
            "n_context": 16,
            "horizon": 672,
            "label_pool": "final",
            "start_months": list(range(1, 13)),
        },
        "pretrain": {
            "lr": 1e-3,
            "weight_decay": 1e-4,
            "epochs": 118,
            "batch_size": 64,
            "test_split": 0.2,
        },
        "model": {
            "n_layers": 3,
            "n_heads": 8,
            "width": 128,
            "max_seq": 256,
            "mlp_ratio": 4,
            "dropout": 0.0,
        },
        "deploy": {
            "episodes": 12,
            "horizon": 2976,
            "capacity": 16,
            "eviction": "fifo",
            "start_months": list(range(1, 13)),
            "keep_context": True,
            "explore_sigma": 0.0,
        },
        "benchmark": {
            "controllers": ["baseline", "expert", "sarl", "marl", "hvac-dpt"],
            "seeds": 10,
            "episodes": 12,
            "horizon": 2976,
            "start_months": list(range(1, 13)),
            "capacity": 16,
            "eviction": "fifo",
            "expert": {
                "b_denver": {"occupied_floor": 0.12, "unoccupied_floor": 0.02, "boost_gain": 0.3},
                "default": {"occupied_floor": 0.3, "unoccupied_floor": 0.05, "boost_gain": 0.2},
            },
        },
    }


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key '{where}'")
        if isinstance(base[key], dict) and isinstance(value, dict):
            out[key] = _merge(base[key], value, where)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_run_config(path: str | Path | None) -> dict:
    cfg = default_run_config()
    if path is None:
        return cfg
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return _merge(cfg, data)


def config_hash(*parts) -> str:
    """Stable hash of config fragments; any field change changes the hash."""
    blob = json.dumps(parts, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]
