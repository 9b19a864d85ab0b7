"""Shared builders for tests: deterministic tiny models and synthetic corpora."""

from __future__ import annotations

import numpy as np
import pytest

from urdu_abssum.corpus import EncodedPair, PAD_ID
from urdu_abssum.model import ModelConfig, Parameters
from urdu_abssum.preprocess import TokenizedPair
from urdu_abssum.rng import Xoshiro256StarStar


def scaled_params(cfg: ModelConfig, seed: int, scale: float) -> Parameters:
    """Parameters with every tensor redrawn uniform(-scale, scale); larger
    scales than the training default keep finite differences well conditioned."""
    P = Parameters.initialize(cfg, seed)
    rng = Xoshiro256StarStar(seed + 1000)
    for tensor in P.tensors().values():
        tensor[...] = rng.uniform_array(tensor.shape, -scale, scale)
    return P


def random_source(rng: Xoshiro256StarStar, cfg: ModelConfig) -> tuple[int, ...]:
    """A padded source with at least one real token, ids above the reserved range."""
    n = 1 + rng.randrange(cfg.max_source_len)
    real = tuple(4 + rng.randrange(cfg.vocab_size - 4) for _ in range(n))
    return real + (PAD_ID,) * (cfg.max_source_len - n)


def synthetic_corpus(n_docs: int = 20, n_words: int = 40, seed: int = 77) -> list[TokenizedPair]:
    """Deterministic toy corpus: summaries sample tokens from their sources."""
    words = [f"w{k:02d}" for k in range(n_words)]
    rng = Xoshiro256StarStar(seed)
    pairs = []
    for i in range(n_docs):
        n_src = 6 + rng.randrange(5)
        src = [words[rng.randrange(n_words)] for _ in range(n_src)]
        n_sum = 3 + rng.randrange(3)
        summary = [src[rng.randrange(n_src)] for _ in range(n_sum)]
        pairs.append(TokenizedPair(
            id=f"doc{i}", source_tokens=tuple(src), summary_tokens=tuple(summary)
        ))
    return pairs


@pytest.fixture
def tiny_cfg() -> ModelConfig:
    return ModelConfig(vocab_size=20, embedding_dim=8, hidden_dim=16,
                       max_source_len=6, max_target_len=5, num_layers=1)


@pytest.fixture
def tiny_pair() -> EncodedPair:
    return EncodedPair(source_ids=(5, 6, 7, 8, 13, 14), target_ids=(1, 4, 9, 11, 2))
