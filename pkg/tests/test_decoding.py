"""Decoding: greedy chain, beam search semantics, and the summarize path."""

import math

import numpy as np
import pytest

from conftest import random_source, scaled_params
from urdu_abssum.corpus import (
    EOS_ID,
    PAD_ID,
    RESERVED_TOKENS,
    SOS_ID,
    Vocabulary,
)
from urdu_abssum.decoding import (
    DecodeConfig,
    Hypothesis,
    beam_search,
    beam_steps,
    greedy_decode,
    greedy_steps,
    summarize,
)
from urdu_abssum.errors import EmptyAfterPreprocessing
from urdu_abssum.model import ModelConfig, encode_sequence, initial_decoder_state
from urdu_abssum.preprocess import (
    LemmaRules,
    Pipeline,
    PipelineConfig,
    StopwordSet,
    default_normalization_table,
)
from urdu_abssum.rng import Xoshiro256StarStar


def _static_step(log_probs_by_prefix, vocab_size):
    """Step function over explicit conditional distributions; state = prefix."""

    def step(prev_id, state):
        prefix = state + (prev_id,) if state else (prev_id,)
        row = np.full(vocab_size, -1e9)
        for token, prob in log_probs_by_prefix.get(prefix, {}).items():
            row[token] = math.log(prob)
        return row, prefix

    return step


class TestDecodeConfig:
    def test_defaults(self):
        dcfg = DecodeConfig()
        assert dcfg.beam_size == 3
        assert dcfg.max_len == 64
        assert dcfg.length_penalty_alpha == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            DecodeConfig(beam_size=0)


class TestHypothesis:
    def test_score_without_penalty_is_log_prob(self):
        hyp = Hypothesis(ids=(SOS_ID, 5, 6), log_prob=-1.5, finished=False)
        assert hyp.score(0.0) == -1.5
        assert hyp.emitted == 2

    def test_length_penalty_divides(self):
        hyp = Hypothesis(ids=(SOS_ID, 5, 6, 7, 8), log_prob=-2.0, finished=True)
        assert hyp.score(1.0) == pytest.approx(-0.5)


class TestGreedySteps:
    def test_immediate_eos(self):
        step = _static_step({(SOS_ID,): {EOS_ID: 0.9, 4: 0.1}}, 6)
        assert greedy_steps(step, (), max_len=8) == [EOS_ID]

    def test_never_eos_caps_at_max_len(self):
        def step(prev_id, state):
            row = np.full(6, -1e9)
            row[4] = 0.0
            return row, state

        assert greedy_steps(step, (), max_len=5) == [4, 4, 4, 4, 4]

    def test_tie_goes_to_smallest_id(self):
        def step(prev_id, state):
            row = np.full(9, -1e9)
            row[4] = row[7] = -0.1
            row[EOS_ID] = -0.05 if prev_id == 4 else -1e9
            return row, state

        assert greedy_steps(step, (), max_len=4) == [4, EOS_ID]

    def test_pad_and_sos_never_selected(self):
        def step(prev_id, state):
            row = np.zeros(6)  # PAD and SOS look maximal too
            row[PAD_ID] = row[SOS_ID] = 5.0
            row[4] = 1.0
            return row, state

        out = greedy_steps(step, (), max_len=3)
        assert out == [4, 4, 4]


TOY = {
    # step 1: P(A)=0.6, P(B)=0.4 (A=4, B=5); EOS negligible
    (SOS_ID,): {4: 0.6, 5: 0.4, EOS_ID: 1e-12},
    # after A: P(EOS)=0.5; after B: P(EOS)=0.9
    (SOS_ID, 4): {EOS_ID: 0.5, 4: 0.25, 5: 0.25},
    (SOS_ID, 5): {EOS_ID: 0.9, 4: 0.05, 5: 0.05},
    (SOS_ID, 4, 4): {EOS_ID: 1.0},
    (SOS_ID, 4, 5): {EOS_ID: 1.0},
    (SOS_ID, 5, 4): {EOS_ID: 1.0},
    (SOS_ID, 5, 5): {EOS_ID: 1.0},
}


class TestBeamSteps:
    def test_toy_beam_beats_greedy(self):
        step = _static_step(TOY, 6)
        greedy = greedy_steps(step, (), max_len=2)
        assert greedy == [4, EOS_ID]  # probability 0.6 * 0.5 = 0.30
        best = beam_steps(step, (), DecodeConfig(beam_size=2, max_len=2))
        assert best.ids == (SOS_ID, 5, EOS_ID)  # probability 0.4 * 0.9 = 0.36
        assert best.log_prob == pytest.approx(math.log(0.36), abs=1e-9)
        assert best.finished

    def test_beam_one_matches_greedy_on_toy(self):
        step = _static_step(TOY, 6)
        best = beam_steps(step, (), DecodeConfig(beam_size=1, max_len=2))
        assert list(best.ids[1:]) == greedy_steps(step, (), max_len=2)

    def test_length_penalty_can_prefer_longer(self):
        table = {
            (SOS_ID,): {4: 0.5, EOS_ID: 0.5},
            (SOS_ID, 4): {4: 0.9, EOS_ID: 0.1},
            (SOS_ID, 4, 4): {EOS_ID: 1.0},
        }
        step = _static_step(table, 6)
        plain = beam_steps(step, (), DecodeConfig(beam_size=3, max_len=3))
        assert plain.ids == (SOS_ID, EOS_ID)  # 0.5 beats 0.5*0.9*...
        stretched = beam_steps(step, (), DecodeConfig(beam_size=3, max_len=3,
                                                      length_penalty_alpha=2.0))
        assert stretched.ids == (SOS_ID, 4, 4, EOS_ID)

    def test_finished_must_rank_inside_beam_to_be_kept(self):
        # EOS is always second-best: with beam 1 it is pruned until the end
        table = {
            (SOS_ID,): {4: 0.6, EOS_ID: 0.4},
            (SOS_ID, 4): {4: 0.6, EOS_ID: 0.4},
            (SOS_ID, 4, 4): {4: 0.6, EOS_ID: 0.4},
        }
        step = _static_step(table, 6)
        best = beam_steps(step, (), DecodeConfig(beam_size=1, max_len=3))
        assert list(best.ids[1:]) == greedy_steps(step, (), max_len=3)


def _seq_log_prob(step_fn, init_state, ids):
    state = init_state
    prev = SOS_ID
    total = 0.0
    for token in ids:
        log_probs, state = step_fn(prev, state)
        total += float(log_probs[token])
        prev = token
    return total


class TestModelDecoding:
    @pytest.fixture
    def cfg(self):
        return ModelConfig(vocab_size=12, embedding_dim=4, hidden_dim=8,
                           max_source_len=6, max_target_len=10)

    def test_beam_one_equals_greedy_random_models(self, cfg):
        matches = 0
        for m in range(10):
            P = scaled_params(cfg, seed=200 + m, scale=0.6)
            rng = Xoshiro256StarStar(900 + m)
            for _ in range(3):
                src = random_source(rng, cfg)
                dcfg = DecodeConfig(beam_size=1, max_len=10)
                if greedy_decode(src, P, cfg, dcfg) == beam_search(src, P, cfg, dcfg):
                    matches += 1
        assert matches == 30

    def test_beam_never_worse_than_greedy(self, cfg):
        from urdu_abssum.decoding import _model_step
        for m in range(50):
            P = scaled_params(cfg, seed=400 + m, scale=0.6)
            rng = Xoshiro256StarStar(1400 + m)
            src = random_source(rng, cfg)
            dcfg = DecodeConfig(beam_size=3, max_len=6)
            greedy = greedy_decode(src, P, cfg, dcfg)
            beam = beam_search(src, P, cfg, dcfg)
            enc = encode_sequence(src, P, cfg)
            step = _model_step(enc, P, cfg)
            lp_beam = _seq_log_prob(step, initial_decoder_state(enc), beam)
            lp_greedy = _seq_log_prob(step, initial_decoder_state(enc), greedy)
            assert lp_beam >= lp_greedy - 1e-12

    def test_output_contract(self, cfg):
        for m in range(10):
            P = scaled_params(cfg, seed=600 + m, scale=0.8)
            rng = Xoshiro256StarStar(1600 + m)
            src = random_source(rng, cfg)
            out = beam_search(src, P, cfg, DecodeConfig(beam_size=3, max_len=7))
            assert PAD_ID not in out and SOS_ID not in out
            assert out.count(EOS_ID) <= 1
            if EOS_ID in out:
                assert out[-1] == EOS_ID
            assert 1 <= len(out) <= 7


class TestSummarize:
    def _pipeline(self, stops=()):
        return Pipeline(
            table=default_normalization_table(),
            lemma_rules=LemmaRules(exceptions={}, suffix_rules=()),
            stopwords=StopwordSet(words=frozenset(stops)),
            config=PipelineConfig(max_source_tokens=6),
        )

    def test_empty_after_preprocessing_propagates(self):
        cfg = ModelConfig(vocab_size=6, embedding_dim=3, hidden_dim=4,
                          max_source_len=4, max_target_len=4)
        P = scaled_params(cfg, seed=1, scale=0.3)
        vocab = Vocabulary(list(RESERVED_TOKENS) + ["a", "b"])
        with pytest.raises(EmptyAfterPreprocessing):
            summarize("a b", self._pipeline(stops=("a", "b")), vocab, P, cfg, DecodeConfig())

    def test_generates_space_joined_tokens(self):
        cfg = ModelConfig(vocab_size=6, embedding_dim=3, hidden_dim=4,
                          max_source_len=4, max_target_len=4)
        P = scaled_params(cfg, seed=1, scale=0.3)
        vocab = Vocabulary(list(RESERVED_TOKENS) + ["a", "b"])
        out = summarize("a b a", self._pipeline(), vocab, P, cfg,
                        DecodeConfig(beam_size=2, max_len=4))
        assert isinstance(out, str)
        assert len(out.split()) <= 4
        for token in out.split():
            assert token in {"a", "b"}
