"""Sequence-to-sequence model: embedding, stacked LSTM encoder, bilinear
attention, and an LSTM decoder step producing vocabulary logits.

Parameters are plain float64 arrays; forward passes are pure functions, so a
parameter set may be shared freely across threads during inference.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .corpus import EOS_ID, PAD_ID, EncodedPair
from .errors import IdOutOfRange, NoScoredPositions, NoUnmaskedPositions, ShapeMismatch
from .numerics import softmax
from .rng import Xoshiro256StarStar

INIT_SCALE = 0.08  # uniform(-0.08, 0.08) for all weight matrices


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    embedding_dim: int
    hidden_dim: int
    max_source_len: int
    max_target_len: int = 64
    num_layers: int = 1

    def __post_init__(self):
        for name in ("vocab_size", "embedding_dim", "hidden_dim",
                     "max_source_len", "max_target_len", "num_layers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


@dataclass
class LstmWeights:
    W: np.ndarray  # (4H, E_in)
    U: np.ndarray  # (4H, H)
    b: np.ndarray  # (4H,)


class Parameters:
    """All trainable tensors, in a fixed declared order.

    Initialization draws weights uniformly from (-0.08, 0.08) using the
    package PRNG in declaration order; biases start at zero except the
    forget-gate block, which starts at +1.
    """

    def __init__(self, embedding: np.ndarray, encoder: list[LstmWeights],
                 decoder: list[LstmWeights], attn_w: np.ndarray,
                 out_w: np.ndarray, out_b: np.ndarray):
        self.embedding = embedding
        self.encoder = encoder
        self.decoder = decoder
        self.attn_w = attn_w
        self.out_w = out_w
        self.out_b = out_b

    @classmethod
    def initialize(cls, cfg: ModelConfig, seed: int) -> "Parameters":
        rng = Xoshiro256StarStar(seed)
        V, E, H = cfg.vocab_size, cfg.embedding_dim, cfg.hidden_dim

        def uniform(shape):
            return rng.uniform_array(shape, -INIT_SCALE, INIT_SCALE)

        def lstm_layer(e_in):
            b = np.zeros(4 * H, dtype=np.float64)
            b[H:2 * H] = 1.0  # forget gate bias
            return LstmWeights(W=uniform((4 * H, e_in)), U=uniform((4 * H, H)), b=b)

        embedding = uniform((V, E))
        encoder = [lstm_layer(E if k == 0 else H) for k in range(cfg.num_layers)]
        decoder = [lstm_layer(E if k == 0 else H) for k in range(cfg.num_layers)]
        attn_w = uniform((H, H))
        out_w = uniform((V, 2 * H))
        out_b = np.zeros(V, dtype=np.float64)
        return cls(embedding, encoder, decoder, attn_w, out_w, out_b)

    def tensors(self) -> dict[str, np.ndarray]:
        """Name -> array in the fixed checkpoint order."""
        out: dict[str, np.ndarray] = {"embedding": self.embedding}
        for role, layers in (("encoder", self.encoder), ("decoder", self.decoder)):
            for k, layer in enumerate(layers):
                out[f"{role}.{k}.W"] = layer.W
                out[f"{role}.{k}.U"] = layer.U
                out[f"{role}.{k}.b"] = layer.b
        out["attention.W"] = self.attn_w
        out["output.W"] = self.out_w
        out["output.b"] = self.out_b
        return out

    def zero_grads(self) -> dict[str, np.ndarray]:
        return {name: np.zeros_like(arr) for name, arr in self.tensors().items()}

    def copy(self) -> "Parameters":
        enc = [LstmWeights(l.W.copy(), l.U.copy(), l.b.copy()) for l in self.encoder]
        dec = [LstmWeights(l.W.copy(), l.U.copy(), l.b.copy()) for l in self.decoder]
        return Parameters(self.embedding.copy(), enc, dec,
                          self.attn_w.copy(), self.out_w.copy(), self.out_b.copy())


@dataclass
class EncoderOutput:
    states: np.ndarray          # (L_src, H) top-layer hidden states
    final_h: list[np.ndarray]   # per layer, (H,)
    final_c: list[np.ndarray]
    mask: np.ndarray            # (L_src,) bool, True = real token


@dataclass
class DecoderState:
    h: list[np.ndarray]
    c: list[np.ndarray]
    attention: np.ndarray | None = None  # last attention weights, (L_src,)

    def copy(self) -> "DecoderState":
        return DecoderState(
            h=[v.copy() for v in self.h],
            c=[v.copy() for v in self.c],
            attention=None if self.attention is None else self.attention.copy(),
        )


def embed(ids: Sequence[int], P: Parameters) -> np.ndarray:
    V, E = P.embedding.shape
    out = np.empty((len(ids), E), dtype=np.float64)
    for k, i in enumerate(ids):
        if not 0 <= i < V:
            raise IdOutOfRange(f"token id {i} outside vocabulary of size {V}")
        out[k] = P.embedding[i]
    return out


def lstm_step(x: np.ndarray, h: np.ndarray, c: np.ndarray,
              W: np.ndarray, U: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One LSTM cell update; returns (h', c')."""
    H = h.shape[0]
    if W.shape != (4 * H, x.shape[0]) or U.shape != (4 * H, H) or b.shape != (4 * H,):
        raise ShapeMismatch(
            f"lstm_step shapes: x{x.shape} h{h.shape} W{W.shape} U{U.shape} b{b.shape}"
        )
    h_new, c_new, _ = kernels.lstm_cell_forward(x, h, c, W, U, b)
    return h_new, c_new


def encode_sequence(source_ids: Sequence[int], P: Parameters, cfg: ModelConfig) -> EncoderOutput:
    """Run the stacked encoder over a padded source; PAD positions carry
    state through unchanged."""
    if len(source_ids) != cfg.max_source_len:
        raise ShapeMismatch(
            f"source length {len(source_ids)} != configured {cfg.max_source_len}"
        )
    mask = np.array([i != PAD_ID for i in source_ids], dtype=np.uint8)
    H = cfg.hidden_dim
    X = np.ascontiguousarray(embed(source_ids, P))
    final_h: list[np.ndarray] = []
    final_c: list[np.ndarray] = []
    states = np.zeros((len(source_ids), H), dtype=np.float64)
    for layer in P.encoder:
        h0 = np.zeros(H, dtype=np.float64)
        c0 = np.zeros(H, dtype=np.float64)
        states, _, _, h_T, c_T = kernels.lstm_seq_forward(
            X, mask, h0, c0, layer.W, layer.U, layer.b
        )
        final_h.append(h_T)
        final_c.append(c_T)
        X = states
    return EncoderOutput(states=states, final_h=final_h, final_c=final_c,
                         mask=mask.astype(bool))


def initial_decoder_state(enc: EncoderOutput) -> DecoderState:
    """Decoder starts from the encoder's final per-layer states."""
    return DecoderState(h=[v.copy() for v in enc.final_h],
                        c=[v.copy() for v in enc.final_c])


def attention(h_dec: np.ndarray, enc: EncoderOutput, P: Parameters
              ) -> tuple[np.ndarray, np.ndarray]:
    """Bilinear attention: score_i = h_dec . (W_a @ state_i) over unmasked
    positions; returns (context, weights) with zeros at masked positions."""
    idx = np.nonzero(enc.mask)[0]
    if idx.size == 0:
        raise NoUnmaskedPositions("attention over a fully padded source")
    scores = (enc.states[idx] @ (P.attn_w.T @ h_dec))
    weights = np.zeros(enc.states.shape[0], dtype=np.float64)
    weights[idx] = softmax(scores)
    context = weights[idx] @ enc.states[idx]
    return context, weights


def decoder_step(prev_id: int, st: DecoderState, enc: EncoderOutput,
                 P: Parameters, cfg: ModelConfig) -> tuple[np.ndarray, DecoderState]:
    """One decode step: embed the previous token, advance the stacked LSTM,
    attend, and project [context ; h_top] to vocabulary logits."""
    x = embed([prev_id], P)[0]
    new_h: list[np.ndarray] = []
    new_c: list[np.ndarray] = []
    for k, layer in enumerate(P.decoder):
        h_new, c_new = lstm_step(x, st.h[k], st.c[k], layer.W, layer.U, layer.b)
        new_h.append(h_new)
        new_c.append(c_new)
        x = h_new
    h_top = new_h[-1]
    context, weights = attention(h_top, enc, P)
    logits = P.out_w @ np.concatenate([context, h_top]) + P.out_b
    return logits, DecoderState(h=new_h, c=new_c, attention=weights)


def forward_teacher_forced(pair: EncodedPair, P: Parameters, cfg: ModelConfig
                           ) -> list[np.ndarray]:
    """Teacher-forced decode: feed ground-truth previous tokens and return one
    logits vector per scored position (through EOS)."""
    target = list(pair.target_ids)
    try:
        eos_idx = target.index(EOS_ID)
    except ValueError:
        raise NoScoredPositions("target sequence has no EOS") from None
    if eos_idx == 0:
        raise NoScoredPositions("target sequence starts with EOS")
    enc = encode_sequence(pair.source_ids, P, cfg)
    st = initial_decoder_state(enc)
    logits_seq: list[np.ndarray] = []
    for t in range(eos_idx):
        logits, st = decoder_step(target[t], st, enc, P, cfg)
        logits_seq.append(logits)
    return logits_seq
