"""Experiment config files (YAML or JSON)."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import yaml

from .corpus import (CorpusSplit, Debate, SyntheticSpec, generate_synthetic_corpus, parse_corpus,
                     split_debates)
from .errors import ConfigurationError
from .pipeline import ALPHA_GRID, ExperimentConfig

_TOP_KEYS = {"corpus", "synthetic", "split", "c", "seed", "experiments", "variant", "theta_mode",
             "alpha", "alpha_grid", "output", "model_dir"}


def load_mapping(path) -> dict:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{path}: {exc}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: top level must be a mapping")
    return data


def load_synthetic(data: dict, base: Path) -> tuple[SyntheticSpec, int, int]:
    """Spec plus ``n_debates`` and ``seed`` from a synth mapping.

    ``spec`` may hold the generator keys inline or name another file; keys
    given next to it take precedence.
    """
    data = dict(data)
    if "spec" in data:
        spec = data.pop("spec")
        if isinstance(spec, str):
            spec = load_mapping(base / spec)
        if not isinstance(spec, dict):
            raise ConfigurationError("'spec' must be a mapping or a file name")
        data = {**spec, **data}
    n_debates = data.pop("n_debates", 20)
    seed = data.pop("seed", 0)
    if not isinstance(n_debates, int) or n_debates < 1:
        raise ConfigurationError("n_debates must be a positive integer")
    return SyntheticSpec.from_mapping(data), n_debates, int(seed)


@dataclass
class RunConfig:
    debates: list[Debate]
    split: CorpusSplit
    experiments: list[ExperimentConfig]
    c: float
    seed: int
    output: Path | None
    model_dir: Path


def load_run_config(path) -> RunConfig:
    path = Path(path)
    base = path.parent
    data = load_mapping(path)
    unknown = sorted(set(data) - _TOP_KEYS)
    if unknown:
        raise ConfigurationError(f"unknown config key(s): {', '.join(unknown)}")
    if ("corpus" in data) == ("synthetic" in data):
        raise ConfigurationError("config needs exactly one of 'corpus' or 'synthetic'")
    if "corpus" in data:
        debates = parse_corpus(base / data["corpus"])
    else:
        spec, n_debates, syn_seed = load_synthetic(data["synthetic"] or {}, base)
        debates = generate_synthetic_corpus(spec, n_debates, syn_seed)

    split_cfg = data.get("split") or {}
    seed = int(data.get("seed", 0))
    c = float(data.get("c", 1.0))
    split = split_debates(debates, tuple(split_cfg.get("ratios", (0.7, 0.2, 0.1))),
                          int(split_cfg.get("seed", seed)))

    defaults = {"c": c, "seed": seed, "alpha_grid": tuple(data.get("alpha_grid", ALPHA_GRID))}
    if "experiments" in data:
        if "variant" in data:
            raise ConfigurationError("use either 'variant' or 'experiments', not both")
        raw = data["experiments"]
        if not isinstance(raw, list) or not raw:
            raise ConfigurationError("'experiments' must be a non-empty list")
        if "theta_mode" in data or "alpha" in data:
            raise ConfigurationError("set theta_mode/alpha inside each experiment")
    elif "variant" in data:
        raw = [{k: data[k] for k in ("variant", "theta_mode", "alpha") if k in data}]
    else:
        raise ConfigurationError("config needs 'variant' or 'experiments'")
    experiments = []
    for item in raw:
        if not isinstance(item, dict):
            raise ConfigurationError("each experiment must be a mapping")
        merged = {**defaults, **item}
        experiments.append(ExperimentConfig.from_mapping(merged))
    if any(e.c != c or e.seed != seed for e in experiments):
        raise ConfigurationError("c and seed are set once per config, not per experiment")

    output = base / data["output"] if data.get("output") else None
    model_dir = base / data.get("model_dir", "models")
    return RunConfig(debates, split, experiments, c, seed, output, model_dir)
