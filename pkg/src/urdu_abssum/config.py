"""Run configuration: one JSON file describing paths, model dimensions,
training and decoding settings, and the preprocessing pipeline."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .decoding import DecodeConfig
from .errors import ParseError
from .preprocess import (
    Pipeline,
    PipelineConfig,
    load_lemma_rules,
    load_normalization_table,
    load_stopwords,
)
from .training import TrainConfig

DEFAULT_TRAIN_FRACTION = 0.7


@dataclass(frozen=True)
class PathsConfig:
    corpus: str = "corpus.jsonl"
    preprocessed: str = "preprocessed.jsonl"
    checkpoint: str = "model.ckpt"
    test_ids: str = ""  # defaults to "<checkpoint>.test_ids.json"
    eval_report: str = "eval_report.json"
    normalization: str = ""  # empty = packaged table
    stopwords: str = ""
    lemma_rules: str = ""

    def test_ids_path(self) -> str:
        return self.test_ids or self.checkpoint + ".test_ids.json"


@dataclass(frozen=True)
class ModelDims:
    embedding_dim: int = 64
    hidden_dim: int = 128
    num_layers: int = 1
    max_source_len: int = 400
    max_target_len: int = 64


@dataclass(frozen=True)
class VocabConfig:
    min_freq: int = 1
    max_size: int = 50000


@dataclass(frozen=True)
class RunConfig:
    paths: PathsConfig = field(default_factory=PathsConfig)
    model: ModelDims = field(default_factory=ModelDims)
    vocab: VocabConfig = field(default_factory=VocabConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    decode: DecodeConfig = field(default_factory=DecodeConfig)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    train_fraction: float = DEFAULT_TRAIN_FRACTION

    def build_pipeline(self) -> Pipeline:
        table = load_normalization_table(self.paths.normalization or None)
        return Pipeline(
            table=table,
            lemma_rules=load_lemma_rules(self.paths.lemma_rules or None),
            stopwords=load_stopwords(self.paths.stopwords or None, table),
            config=self.pipeline,
        )


def _build_section(cls, data: dict, path: str, section: str):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ParseError(f"unknown keys in [{section}]: {sorted(unknown)}", path=path)
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"invalid [{section}] section: {exc}", path=path) from None


def load_run_config(path: str | Path) -> RunConfig:
    """Parse and validate a JSON run configuration."""
    path = str(path)
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno, path=path) from None
    if not isinstance(data, dict):
        raise ParseError("top level must be a JSON object", path=path)
    sections = {
        "paths": PathsConfig,
        "model": ModelDims,
        "vocab": VocabConfig,
        "train": TrainConfig,
        "decode": DecodeConfig,
        "pipeline": PipelineConfig,
    }
    unknown = set(data) - set(sections) - {"train_fraction"}
    if unknown:
        raise ParseError(f"unknown top-level keys: {sorted(unknown)}", path=path)
    kwargs = {}
    for name, cls in sections.items():
        section = data.get(name, {})
        if not isinstance(section, dict):
            raise ParseError(f"[{name}] must be an object", path=path)
        kwargs[name] = _build_section(cls, section, path, name)
    fraction = data.get("train_fraction", DEFAULT_TRAIN_FRACTION)
    if not isinstance(fraction, (int, float)) or not 0.0 < fraction < 1.0:
        raise ParseError("train_fraction must lie strictly between 0 and 1", path=path)
    return RunConfig(train_fraction=float(fraction), **kwargs)
