"""Five-phase pipeline with cached-artifact skipping.

Phases: train-policies -> gen-dataset -> pretrain -> deploy -> benchmark
(-> report). Each phase writes its artifacts plus a hash of the config
slice it depends on; re-running with an unchanged slice skips the phase.
"""

from __future__ import annotations

import json
import logging
import time
from pathlib import Path

from ..dpt.dataset import DatasetGenConfig, generate_pretraining_dataset, load_dataset, save_dataset
from ..dpt.deploy import DeployConfig, deploy_online
from ..dpt.model import DptConfig, DptModel
from ..dpt.pretrain import DptTrainConfig, pretrain
from ..env.norm import DEFAULT_NORM_STATS
from ..env.translog import write_transition_log
from ..ppo.library import DiversityConfig, PolicyLibrary, TrainingRun, train_policy_library
from ..ppo.train import PpoConfig
from ..sim.presets import load_preset
from .benchmark import benchmark
from .config import config_hash
from .report import MonthlyEnergyReport, write_delta_csv, write_report_csv

log = logging.getLogger(__name__)

PHASES = ("train-policies", "gen-dataset", "pretrain", "deploy", "benchmark", "report")


class PhaseError(RuntimeError):
    def __init__(self, phase: str, cause: Exception):
        super().__init__(f"phase '{phase}' failed: {cause}")
        self.phase = phase
        self.cause = cause


def _phase_done(out: Path, phase: str, digest: str, artifacts: list[Path]) -> bool:
    marker = out / f".{phase}.hash"
    return (
        marker.exists()
        and marker.read_text().strip() == digest
        and all(a.exists() for a in artifacts)
    )


def _mark_phase(out: Path, phase: str, digest: str) -> None:
    (out / f".{phase}.hash").write_text(digest + "\n")


def _ppo_config(cfg: dict) -> PpoConfig:
    return PpoConfig(**cfg["ppo"])


def _diversity(cfg: dict) -> DiversityConfig:
    d = cfg["diversity"]
    return DiversityConfig(
        runs=[
            TrainingRun(
                tag=r["tag"], seed=r["seed"], entropy_coef=r["entropy_coef"],
                episodes=r["episodes"], snapshot_episodes=tuple(r.get("snapshot_episodes", [])),
            )
            for r in d["runs"]
        ],
        start_months=tuple(d["start_months"]),
        eval_episodes=d["eval_episodes"],
        eval_horizon=d["eval_horizon"],
    )


def phase_train_policies(cfg: dict, out: Path) -> Path:
    lib_dir = out / "library"
    digest = config_hash(cfg["training_buildings"], cfg["ppo"], cfg["diversity"], cfg["seed"])
    if _phase_done(out, "train-policies", digest, [lib_dir / "index.json"]):
        log.info("train-policies: cached, skipping")
        return lib_dir
    buildings = [load_preset(name) for name in cfg["training_buildings"]]
    library = train_policy_library(buildings, _diversity(cfg), _ppo_config(cfg), base_seed=cfg["seed"])
    library.save(lib_dir)
    _mark_phase(out, "train-policies", digest)
    return lib_dir


def phase_gen_dataset(cfg: dict, out: Path) -> Path:
    ds_path = out / "dataset.jsonl"
    digest = config_hash(cfg["training_buildings"], cfg["ppo"], cfg["diversity"], cfg["dataset"], cfg["seed"])
    if _phase_done(out, "gen-dataset", digest, [ds_path]):
        log.info("gen-dataset: cached, skipping")
        return ds_path
    library = PolicyLibrary.load(phase_train_policies(cfg, out))
    buildings = {name: load_preset(name) for name in cfg["training_buildings"]}
    gen_cfg = DatasetGenConfig(
        trajectories=cfg["dataset"]["trajectories"],
        samples_per_trajectory=cfg["dataset"]["samples_per_trajectory"],
        n_context=cfg["dataset"]["n_context"],
        horizon=cfg["dataset"]["horizon"],
        label_pool=cfg["dataset"]["label_pool"],
        start_months=tuple(cfg["dataset"]["start_months"]),
    )
    samples, reward_scale = generate_pretraining_dataset(library, buildings, gen_cfg, seed=cfg["seed"])
    save_dataset(ds_path, samples, reward_scale, DEFAULT_NORM_STATS, gen_cfg.n_context)
    _mark_phase(out, "gen-dataset", digest)
    return ds_path


def phase_pretrain(cfg: dict, out: Path) -> Path:
    model_path = out / "model.ntc"
    digest = config_hash(
        cfg["training_buildings"], cfg["ppo"], cfg["diversity"], cfg["dataset"],
        cfg["pretrain"], cfg["model"], cfg["seed"],
    )
    if _phase_done(out, "pretrain", digest, [model_path]):
        log.info("pretrain: cached, skipping")
        return model_path
    samples, header = load_dataset(phase_gen_dataset(cfg, out))
    train_cfg = DptTrainConfig(seed=cfg["seed"], **cfg["pretrain"])
    model, report = pretrain(
        samples,
        train_cfg,
        model_config=DptConfig(**cfg["model"]),
        reward_scale=header["reward_scale"],
    )
    model.save(model_path)
    (out / "pretrain_report.json").write_text(json.dumps(report, indent=2) + "\n")
    _mark_phase(out, "pretrain", digest)
    return model_path


def phase_deploy(cfg: dict, out: Path) -> Path:
    report_path = out / "deploy_report.json"
    digest = config_hash(
        cfg["training_buildings"], cfg["ppo"], cfg["diversity"], cfg["dataset"],
        cfg["pretrain"], cfg["model"], cfg["deploy"], cfg["deploy_building"], cfg["seed"],
    )
    if _phase_done(out, "deploy", digest, [report_path]):
        log.info("deploy: cached, skipping")
        return report_path
    model = DptModel.load(phase_pretrain(cfg, out))
    building = load_preset(cfg["deploy_building"])
    d = cfg["deploy"]
    deploy_cfg = DeployConfig(
        episodes=d["episodes"], horizon=d["horizon"], capacity=d["capacity"],
        eviction=d["eviction"], start_months=tuple(d["start_months"]),
        keep_context=d["keep_context"], explore_sigma=d["explore_sigma"],
    )
    result = deploy_online(model, building, deploy_cfg, seed=cfg["seed"])
    buffers = result.pop("buffers")
    log_dir = out / "context_logs"
    log_dir.mkdir(parents=True, exist_ok=True)
    for z, buf in enumerate(buffers):
        records = [
            {
                "s": [float(x) for x in s], "a": a, "s_next": [float(x) for x in sn],
                "r": r, "zone": z, "t": t, "episode": -1,
            }
            for t, (s, a, r, sn) in enumerate(buf.items)
        ]
        write_transition_log(log_dir / f"zone_{z}.jsonl", records)
    report_path.write_text(json.dumps(result, indent=2) + "\n")
    _mark_phase(out, "deploy", digest)
    return report_path


def phase_benchmark(cfg: dict, out: Path) -> Path:
    csv_path = out / "benchmark.csv"
    digest = config_hash(
        cfg["training_buildings"], cfg["ppo"], cfg["diversity"], cfg["dataset"],
        cfg["pretrain"], cfg["model"], cfg["benchmark"], cfg["deploy_building"], cfg["seed"],
    )
    if _phase_done(out, "benchmark", digest, [csv_path]):
        log.info("benchmark: cached, skipping")
        return csv_path
    b = cfg["benchmark"]
    needs_model = any(name.startswith("hvac-dpt") for name in b["controllers"])
    model = DptModel.load(phase_pretrain(cfg, out)) if needs_model else None
    building = load_preset(cfg["deploy_building"])
    reports, detail = benchmark(
        controller_names=b["controllers"],
        building=building,
        seeds=b["seeds"],
        episodes=b["episodes"],
        horizon=b["horizon"],
        bench_cfg=b,
        model=model,
        base_seed=cfg["seed"],
        start_months=tuple(b["start_months"]),
    )
    write_report_csv(csv_path, reports)
    (out / "benchmark_runs.json").write_text(json.dumps(detail, indent=2) + "\n")
    _mark_phase(out, "benchmark", digest)
    return csv_path


def phase_report(cfg: dict, out: Path) -> Path:
    from .report import read_report_csv

    delta_path = out / "deltas.csv"
    reports = read_report_csv(phase_benchmark(cfg, out))
    write_delta_csv(delta_path, reports)
    return delta_path


_PHASE_FUNCS = {
    "train-policies": phase_train_policies,
    "gen-dataset": phase_gen_dataset,
    "pretrain": phase_pretrain,
    "deploy": phase_deploy,
    "benchmark": phase_benchmark,
    "report": phase_report,
}


def run_pipeline(cfg: dict, phases: tuple[str, ...] = PHASES) -> dict[str, Path]:
    """Execute phases in order; any failure halts with the phase name."""
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    artifacts: dict[str, Path] = {}
    for phase in phases:
        if phase not in _PHASE_FUNCS:
            raise ValueError(f"unknown phase '{phase}'")
        t0 = time.perf_counter()
        try:
            artifacts[phase] = _PHASE_FUNCS[phase](cfg, out)
        except Exception as exc:
            raise PhaseError(phase, exc) from exc
        log.info("%s finished in %.1f s", phase, time.perf_counter() - t0)
    return artifacts
