"""Summary generation: greedy decoding and beam search.

Both decoders run over a step interface (previous token id, opaque state ->
log-probabilities, new state), so the search logic is testable against
hand-built distributions independently of the network.  PAD and SOS are
never selected as output tokens; log-probabilities always come from the
full-vocabulary softmax.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .corpus import EOS_ID, PAD_ID, SOS_ID, Vocabulary, decode_ids, encode
from .model import ModelConfig, Parameters, decoder_step, encode_sequence, initial_decoder_state
from .numerics import log_softmax

StepFn = Callable[[int, object], tuple[np.ndarray, object]]


@dataclass(frozen=True)
class DecodeConfig:
    beam_size: int = 3
    max_len: int = 64
    length_penalty_alpha: float = 0.0

    def __post_init__(self):
        if self.beam_size < 1 or self.max_len < 1:
            raise ValueError("beam_size and max_len must be >= 1")


@dataclass(frozen=True)
class Hypothesis:
    """A partial decode: ids start with SOS; log_prob accumulates the emitted
    tokens' log-probabilities; finished means EOS was emitted."""

    ids: tuple[int, ...]
    log_prob: float
    finished: bool
    state: object = None

    @property
    def emitted(self) -> int:
        return len(self.ids) - 1

    def score(self, alpha: float) -> float:
        if alpha == 0.0 or self.emitted == 0:
            return self.log_prob
        return self.log_prob / (self.emitted ** alpha)


def _sort_key(hyp: Hypothesis, alpha: float):
    # higher score first, then shorter, then lexicographically smaller ids
    return (-hyp.score(alpha), len(hyp.ids), hyp.ids)


def greedy_steps(step_fn: StepFn, init_state: object, max_len: int) -> list[int]:
    """Argmax chain over the step interface; ties go to the smallest id."""
    ids: list[int] = []
    state = init_state
    prev = SOS_ID
    for _ in range(max_len):
        log_probs, state = step_fn(prev, state)
        masked = log_probs.copy()
        masked[PAD_ID] = -np.inf
        masked[SOS_ID] = -np.inf
        token = int(np.argmax(masked))
        ids.append(token)
        if token == EOS_ID:
            break
        prev = token
    return ids


def beam_steps(step_fn: StepFn, init_state: object, dcfg: DecodeConfig) -> Hypothesis:
    """Beam search over the step interface.

    Each round expands every live hypothesis over the emittable vocabulary
    and ranks all candidates; finished candidates ranking inside the beam are
    set aside, and the beam refills with the best unfinished ones.  The best
    set-aside hypothesis wins; if none finished, the best live one does.
    """
    alpha = dcfg.length_penalty_alpha
    beams = [Hypothesis(ids=(SOS_ID,), log_prob=0.0, finished=False, state=init_state)]
    pool: list[Hypothesis] = []
    for _ in range(dcfg.max_len):
        if not beams:
            break
        candidates: list[Hypothesis] = []
        for hyp in beams:
            log_probs, new_state = step_fn(hyp.ids[-1], hyp.state)
            candidates.extend(_expand(hyp, log_probs, new_state, dcfg.beam_size))
        candidates.sort(key=lambda h: _sort_key(h, alpha))
        next_beams: list[Hypothesis] = []
        for rank, cand in enumerate(candidates):
            if cand.finished:
                if rank < dcfg.beam_size:
                    pool.append(cand)
            elif len(next_beams) < dcfg.beam_size:
                next_beams.append(cand)
        beams = next_beams
    final = pool if pool else beams
    return min(final, key=lambda h: _sort_key(h, alpha))


def _expand(hyp: Hypothesis, log_probs: np.ndarray, state: object,
            beam_size: int) -> list[Hypothesis]:
    """Top continuations of one hypothesis (2*beam_size covers every candidate
    that can reach the global top beam_size, since at most one is finished)."""
    allowed = np.arange(log_probs.shape[0])
    allowed = allowed[(allowed != PAD_ID) & (allowed != SOS_ID)]
    keep = min(len(allowed), 2 * beam_size)
    if keep < len(allowed):
        order = np.lexsort((allowed, -log_probs[allowed]))
        allowed = allowed[order[:keep]]
    out = []
    for token in allowed:
        token = int(token)
        out.append(Hypothesis(
            ids=hyp.ids + (token,),
            log_prob=hyp.log_prob + float(log_probs[token]),
            finished=token == EOS_ID,
            state=state,
        ))
    return out


def _model_step(enc, P: Parameters, cfg: ModelConfig) -> StepFn:
    def step(prev_id: int, st):
        logits, new_st = decoder_step(prev_id, st, enc, P, cfg)
        return log_softmax(logits), new_st

    return step


def greedy_decode(source_ids: Sequence[int], P: Parameters, cfg: ModelConfig,
                  dcfg: DecodeConfig) -> list[int]:
    """Greedy decode of one padded source; returns emitted ids without SOS,
    with EOS included when emitted."""
    enc = encode_sequence(source_ids, P, cfg)
    return greedy_steps(_model_step(enc, P, cfg), initial_decoder_state(enc), dcfg.max_len)


def beam_search(source_ids: Sequence[int], P: Parameters, cfg: ModelConfig,
                dcfg: DecodeConfig) -> list[int]:
    """Beam-search decode of one padded source; returns emitted ids without
    SOS, with EOS included when the winner finished."""
    enc = encode_sequence(source_ids, P, cfg)
    best = beam_steps(_model_step(enc, P, cfg), initial_decoder_state(enc), dcfg)
    return list(best.ids[1:])


def summarize(text: str, pipeline, vocab: Vocabulary, P: Parameters,
              cfg: ModelConfig, dcfg: DecodeConfig) -> str:
    """Full inference path: preprocess, encode, beam-search, and join the
    decoded tokens with single spaces."""
    tokens = pipeline.source_tokens(text)
    source_ids = encode(tokens, vocab, cfg.max_source_len, add_markers=False)
    out_ids = beam_search(source_ids, P, cfg, dcfg)
    return " ".join(decode_ids(out_ids, vocab))
