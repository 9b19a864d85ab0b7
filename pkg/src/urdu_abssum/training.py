"""Teacher-forced training: masked cross-entropy loss, hand-derived
backpropagation through the whole network, gradient clipping, and SGD/Adam
updates.

The backward pass retraces the forward computation in reverse over the
cached activations; `numerics.grad_check` verifies it against central finite
differences (see the test suite).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .corpus import EOS_ID, PAD_ID, EncodedPair
from .errors import NonFiniteLoss, NoScoredPositions, ShapeMismatch
from .model import EncoderOutput, ModelConfig, Parameters, initial_decoder_state
from .numerics import LOG_EPS, softmax
from .rng import Xoshiro256StarStar


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    batch_size: int = 8
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    grad_clip: float = 5.0
    seed: int = 1234

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size < 1:
            raise ValueError("epochs must be >= 0 and batch_size >= 1")
        if self.learning_rate <= 0 or self.grad_clip <= 0:
            raise ValueError("learning_rate and grad_clip must be positive")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


@dataclass(frozen=True)
class TrainStats:
    epoch: int
    mean_loss: float  # nats per scored token
    perplexity: float
    wall_seconds: float


@dataclass
class OptimizerState:
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def sequence_loss(logits_seq: list[np.ndarray], target_ids, pad_id: int = PAD_ID) -> float:
    """Mean cross-entropy over the scored positions (first real token through
    EOS) of a SOS-led target sequence."""
    target = list(target_ids)
    if EOS_ID not in target or target.index(EOS_ID) == 0:
        raise NoScoredPositions("target has no scored positions")
    eos_idx = target.index(EOS_ID)
    if len(logits_seq) != eos_idx:
        raise ShapeMismatch(f"{len(logits_seq)} logit vectors for {eos_idx} scored positions")
    total = 0.0
    for t in range(eos_idx):
        probs = softmax(logits_seq[t])
        total += -math.log(min(probs[target[t + 1]] + LOG_EPS, 1.0))
    return total / eos_idx


def _forward_cached(pair: EncodedPair, P: Parameters, cfg: ModelConfig):
    """Teacher-forced forward pass retaining every activation the backward
    pass needs.  Returns (loss, cache)."""
    target = list(pair.target_ids)
    if EOS_ID not in target or target.index(EOS_ID) == 0:
        raise NoScoredPositions("target has no scored positions")
    eos_idx = target.index(EOS_ID)
    H = cfg.hidden_dim
    mask = np.array([i != PAD_ID for i in pair.source_ids], dtype=np.uint8)

    # Encoder, layer by layer.
    enc_layers = []
    X = np.ascontiguousarray(P.embedding[list(pair.source_ids)])
    final_h, final_c = [], []
    states = None
    for layer in P.encoder:
        h0 = np.zeros(H, dtype=np.float64)
        c0 = np.zeros(H, dtype=np.float64)
        H_seq, C_seq, gates_seq, h_T, c_T = kernels.lstm_seq_forward(
            X, mask, h0, c0, layer.W, layer.U, layer.b
        )
        enc_layers.append({"X": X, "H": H_seq, "C": C_seq, "G": gates_seq})
        final_h.append(h_T)
        final_c.append(c_T)
        states = H_seq
        X = H_seq
    enc = EncoderOutput(states=states, final_h=final_h, final_c=final_c,
                        mask=mask.astype(bool))

    # Decoder, step by step.
    st = initial_decoder_state(enc)
    idx = np.nonzero(mask)[0]
    steps = []
    loss = 0.0
    for t in range(eos_idx):
        prev_id = target[t]
        x = P.embedding[prev_id].copy()
        layer_caches = []
        for k, layer in enumerate(P.decoder):
            h_new, c_new, gates = kernels.lstm_cell_forward(
                x, st.h[k], st.c[k], layer.W, layer.U, layer.b
            )
            layer_caches.append({"x": x, "h_prev": st.h[k], "c_prev": st.c[k],
                                 "gates": gates, "c_new": c_new})
            x = h_new
            st.h[k], st.c[k] = h_new, c_new
        h_top = st.h[-1]
        scores = enc.states[idx] @ (P.attn_w.T @ h_top)
        w_unmasked = softmax(scores)
        context = w_unmasked @ enc.states[idx]
        concat = np.concatenate([context, h_top])
        logits = P.out_w @ concat + P.out_b
        probs = softmax(logits)
        y = target[t + 1]
        loss += -math.log(min(probs[y] + LOG_EPS, 1.0))
        steps.append({"prev_id": prev_id, "layers": layer_caches, "h_top": h_top,
                      "w": w_unmasked, "context": context, "concat": concat,
                      "probs": probs, "y": y})
    loss /= eos_idx
    if not math.isfinite(loss):
        raise NonFiniteLoss(f"loss is {loss!r}")
    cache = {"enc_layers": enc_layers, "enc": enc, "steps": steps,
             "idx": idx, "mask": mask, "eos_idx": eos_idx}
    return loss, cache


def backward(pair: EncodedPair, P: Parameters, cfg: ModelConfig
             ) -> tuple[float, dict[str, np.ndarray]]:
    """Loss and exact gradients for one pair via reverse traversal of the
    forward computation."""
    loss, cache = _forward_cached(pair, P, cfg)
    grads = P.zero_grads()
    H = cfg.hidden_dim
    n_layers = cfg.num_layers
    enc = cache["enc"]
    idx = cache["idx"]
    steps = cache["steps"]
    n = cache["eos_idx"]
    s_unmasked = enc.states[idx]  # (n_unmasked, H)

    d_states = np.zeros_like(enc.states)
    dh_carry = [np.zeros(H) for _ in range(n_layers)]
    dc_carry = [np.zeros(H) for _ in range(n_layers)]

    for t in range(n - 1, -1, -1):
        step = steps[t]
        probs, y = step["probs"], step["y"]
        # d loss / d logits for -log(p_y + eps), mean over n positions
        scale = probs[y] / (probs[y] + LOG_EPS)
        dlogits = (scale / n) * probs
        dlogits[y] -= scale / n
        grads["output.W"] += np.outer(dlogits, step["concat"])
        grads["output.b"] += dlogits
        dconcat = P.out_w.T @ dlogits
        dcontext = dconcat[:H]
        dh_top = dconcat[H:].copy()

        # attention backward
        w = step["w"]
        h_top = step["h_top"]
        dw = s_unmasked @ dcontext
        d_states[idx] += np.outer(w, dcontext)
        dscores = w * (dw - float(w @ dw))
        dh_top += P.attn_w @ (s_unmasked.T @ dscores)
        grads["attention.W"] += np.outer(h_top, dscores @ s_unmasked)
        d_states[idx] += np.outer(dscores, P.attn_w.T @ h_top)

        # stacked decoder cells, top to bottom
        dh_layer = dh_top + dh_carry[-1]
        for k in range(n_layers - 1, -1, -1):
            lc = step["layers"][k]
            dx, dh_prev, dc_prev = kernels.lstm_cell_backward(
                np.ascontiguousarray(dh_layer), dc_carry[k],
                lc["x"], lc["h_prev"], lc["c_prev"], lc["gates"], lc["c_new"],
                P.decoder[k].W, P.decoder[k].U,
                grads[f"decoder.{k}.W"], grads[f"decoder.{k}.U"], grads[f"decoder.{k}.b"],
            )
            dh_carry[k] = dh_prev
            dc_carry[k] = dc_prev
            if k > 0:
                dh_layer = dx + dh_carry[k - 1]
            else:
                grads["embedding"][step["prev_id"]] += dx

    # decoder initial state was the encoder final state, per layer
    d_final_h = dh_carry
    d_final_c = dc_carry

    # encoder layers, top to bottom
    mask = cache["mask"]
    h0 = np.zeros(H, dtype=np.float64)
    c0 = np.zeros(H, dtype=np.float64)
    dH_seq = d_states
    for k in range(n_layers - 1, -1, -1):
        ec = cache["enc_layers"][k]
        layer = P.encoder[k]
        dX, dW, dU, db, _, _ = kernels.lstm_seq_backward(
            np.ascontiguousarray(dH_seq), d_final_h[k], d_final_c[k],
            ec["X"], mask, h0, c0, layer.W, layer.U, ec["H"], ec["C"], ec["G"]
        )
        grads[f"encoder.{k}.W"] += dW
        grads[f"encoder.{k}.U"] += dU
        grads[f"encoder.{k}.b"] += db
        dH_seq = dX
    for t, src_id in enumerate(pair.source_ids):
        if mask[t]:
            grads["embedding"][src_id] += dH_seq[t]

    return loss, grads


def clip_gradients(grads: dict[str, np.ndarray], max_norm: float) -> float:
    """Scale all gradients so the global L2 norm is at most max_norm.
    Returns the pre-clip norm."""
    total = 0.0
    for g in grads.values():
        total += float(np.sum(g * g))
    norm = math.sqrt(total)
    if norm > max_norm and norm > 0.0:
        factor = max_norm / norm
        for g in grads.values():
            g *= factor
    return norm


def apply_update(P: Parameters, grads: dict[str, np.ndarray],
                 opt_state: OptimizerState, cfg: TrainConfig
                 ) -> tuple[Parameters, OptimizerState]:
    """Clip to the global-norm cap, then apply one SGD or Adam step in place."""
    clip_gradients(grads, cfg.grad_clip)
    tensors = P.tensors()
    if cfg.optimizer == "sgd":
        for name, theta in tensors.items():
            theta -= cfg.learning_rate * grads[name]
        return P, opt_state
    opt_state.step += 1
    t = opt_state.step
    b1, b2, eps = cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps
    bias1 = 1.0 - b1 ** t
    bias2 = 1.0 - b2 ** t
    for name, theta in tensors.items():
        g = grads[name]
        if name not in opt_state.m:
            opt_state.m[name] = np.zeros_like(theta)
            opt_state.v[name] = np.zeros_like(theta)
        m = opt_state.m[name]
        v = opt_state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        theta -= cfg.learning_rate * (m / bias1) / (np.sqrt(v / bias2) + eps)
    return P, opt_state


def train(corpus: list[EncodedPair], P: Parameters, cfg: ModelConfig,
          tcfg: TrainConfig, log=None) -> list[TrainStats]:
    """Epoch loop: seeded shuffle, fixed-size batches (last partial batch
    kept), per-batch gradient averaging, clip, update.  Identical seed,
    corpus, and config reproduce the final parameters bit for bit."""
    if not corpus:
        raise ValueError("training corpus is empty")
    stats: list[TrainStats] = []
    opt_state = OptimizerState()
    for epoch in range(tcfg.epochs):
        start = time.perf_counter()
        order = list(range(len(corpus)))
        Xoshiro256StarStar(tcfg.seed + epoch).shuffle(order)
        total_nats = 0.0
        total_tokens = 0
        for batch_index, base in enumerate(range(0, len(order), tcfg.batch_size)):
            batch = order[base:base + tcfg.batch_size]
            acc: dict[str, np.ndarray] | None = None
            for i in batch:
                pair = corpus[i]
                try:
                    loss, grads = backward(pair, P, cfg)
                except NonFiniteLoss as exc:
                    raise NonFiniteLoss(
                        f"epoch {epoch + 1}, batch {batch_index}, pair {pair.id!r}: {exc}"
                    ) from None
                n_scored = list(pair.target_ids).index(EOS_ID)
                total_nats += loss * n_scored
                total_tokens += n_scored
                if acc is None:
                    acc = grads
                else:
                    for name in acc:
                        acc[name] += grads[name]
            assert acc is not None
            for name in acc:
                acc[name] /= len(batch)
            P, opt_state = apply_update(P, acc, opt_state, tcfg)
        mean_loss = total_nats / total_tokens
        entry = TrainStats(epoch=epoch + 1, mean_loss=mean_loss,
                           perplexity=math.exp(mean_loss),
                           wall_seconds=time.perf_counter() - start)
        stats.append(entry)
        if log is not None:
            log(entry)
    return stats
