"""Pure numpy LSTM kernels; the reference semantics for the compiled core.

Gate layout is fixed: the 4H pre-activation vector z = W x + U h + b is
sliced into [input, forget, cell, output] blocks of H each.  Sequence
kernels honor a boolean mask: at masked steps the state is carried through
unchanged and no gate is evaluated.
"""

from __future__ import annotations

import numpy as np


def _gates(z: np.ndarray, H: int) -> np.ndarray:
    gates = np.empty((4, H), dtype=np.float64)
    gates[0] = 1.0 / (1.0 + np.exp(-z[:H]))          # input
    gates[1] = 1.0 / (1.0 + np.exp(-z[H:2 * H]))     # forget
    gates[2] = np.tanh(z[2 * H:3 * H])               # cell candidate
    gates[3] = 1.0 / (1.0 + np.exp(-z[3 * H:]))      # output
    return gates


def lstm_cell_forward(x, h, c, W, U, b):
    """One LSTM step; returns (h_new, c_new, gates[4,H])."""
    H = h.shape[0]
    z = W @ x + U @ h + b
    gates = _gates(z, H)
    c_new = gates[1] * c + gates[0] * gates[2]
    h_new = gates[3] * np.tanh(c_new)
    return h_new, c_new, gates


def lstm_cell_backward(dh, dc, x, h_prev, c_prev, gates, c_new, W, U, dW, dU, db):
    """Backward through one step.  Accumulates into dW/dU/db and returns
    (dx, dh_prev, dc_prev)."""
    H = dh.shape[0]
    gi, gf, gg, go = gates
    tc = np.tanh(c_new)
    d_out = dh * tc
    dc_total = dc + dh * go * (1.0 - tc * tc)
    d_in = dc_total * gg
    d_cand = dc_total * gi
    d_forget = dc_total * c_prev
    dc_prev = dc_total * gf
    dz = np.empty(4 * H, dtype=np.float64)
    dz[:H] = d_in * gi * (1.0 - gi)
    dz[H:2 * H] = d_forget * gf * (1.0 - gf)
    dz[2 * H:3 * H] = d_cand * (1.0 - gg * gg)
    dz[3 * H:] = d_out * go * (1.0 - go)
    dW += np.outer(dz, x)
    dU += np.outer(dz, h_prev)
    db += dz
    dx = W.T @ dz
    dh_prev = U.T @ dz
    return dx, dh_prev, dc_prev


def lstm_seq_forward(X, mask, h0, c0, W, U, b):
    """Run the cell left-to-right over X[T, E_in].

    Returns (H_seq[T,H], C_seq[T,H], gates_seq[T,4,H], h_T, c_T).  Masked
    steps copy the previous state; their gates_seq rows are zero and unused.
    The input-to-hidden product is hoisted out of the sequential loop.
    """
    T = X.shape[0]
    H = h0.shape[0]
    H_seq = np.zeros((T, H), dtype=np.float64)
    C_seq = np.zeros((T, H), dtype=np.float64)
    gates_seq = np.zeros((T, 4, H), dtype=np.float64)
    WX = X @ W.T + b  # (T, 4H); only the U h term is recurrent
    h, c = h0, c0
    for t in range(T):
        if mask[t]:
            gates = _gates(WX[t] + U @ h, H)
            c = gates[1] * c + gates[0] * gates[2]
            h = gates[3] * np.tanh(c)
            gates_seq[t] = gates
        H_seq[t] = h
        C_seq[t] = c
    return H_seq, C_seq, gates_seq, h.copy(), c.copy()


def lstm_seq_backward(dH_seq, dh_T, dc_T, X, mask, h0, c0, W, U, H_seq, C_seq, gates_seq):
    """Backward through lstm_seq_forward.

    dH_seq carries per-step external gradients on the hidden outputs; dh_T and
    dc_T the gradients on the final state.  Returns (dX, dW, dU, db, dh0, dc0).
    The recurrent chain runs stepwise; weight-gradient accumulation over time
    is batched into two matrix products at the end.
    """
    T, H = dH_seq.shape
    dZ = np.zeros((T, 4 * H), dtype=np.float64)
    dh = dh_T.copy()
    dc = dc_T.copy()
    for t in range(T - 1, -1, -1):
        dh = dh + dH_seq[t]
        if not mask[t]:
            continue  # state carried through: gradients pass unchanged
        gi, gf, gg, go = gates_seq[t]
        c_prev = C_seq[t - 1] if t > 0 else c0
        tc = np.tanh(C_seq[t])
        dc_total = dc + dh * go * (1.0 - tc * tc)
        dz = dZ[t]
        dz[:H] = (dc_total * gg) * gi * (1.0 - gi)
        dz[H:2 * H] = (dc_total * c_prev) * gf * (1.0 - gf)
        dz[2 * H:3 * H] = (dc_total * gi) * (1.0 - gg * gg)
        dz[3 * H:] = (dh * tc) * go * (1.0 - go)
        dc = dc_total * gf
        dh = U.T @ dz
    H_prev = np.vstack([h0, H_seq[:-1]])
    dW = dZ.T @ X
    dU = dZ.T @ H_prev
    db = dZ.sum(axis=0)
    dX = dZ @ W
    return dX, dW, dU, db, dh, dc
