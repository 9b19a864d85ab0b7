# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled LSTM kernels; drop-in replacements for the pure numpy versions.

Identical gate layout and masking semantics as kernels._pure; results agree
with the pure backend to floating-point rounding.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, tanh

cnp.import_array()


cdef inline double _sigmoid(double v) noexcept nogil:
    return 1.0 / (1.0 + exp(-v))


cdef void _cell_forward(const double[::1] x, const double[::1] h, const double[::1] c,
                        const double[:, ::1] W, const double[:, ::1] U, const double[::1] b,
                        double[::1] h_new, double[::1] c_new, double[:, ::1] gates,
                        double[::1] z) noexcept nogil:
    cdef Py_ssize_t H = h.shape[0]
    cdef Py_ssize_t E = x.shape[0]
    cdef Py_ssize_t r, k, j
    cdef double acc
    for r in range(4 * H):
        acc = b[r]
        for k in range(E):
            acc += W[r, k] * x[k]
        for k in range(H):
            acc += U[r, k] * h[k]
        z[r] = acc
    cdef double gi, gf, gg, go, cn
    for j in range(H):
        gi = _sigmoid(z[j])
        gf = _sigmoid(z[H + j])
        gg = tanh(z[2 * H + j])
        go = _sigmoid(z[3 * H + j])
        cn = gf * c[j] + gi * gg
        gates[0, j] = gi
        gates[1, j] = gf
        gates[2, j] = gg
        gates[3, j] = go
        c_new[j] = cn
        h_new[j] = go * tanh(cn)


cdef void _cell_backward(const double[::1] dh, const double[::1] dc,
                         const double[::1] x, const double[::1] h_prev, const double[::1] c_prev,
                         const double[:, ::1] gates, const double[::1] c_new,
                         const double[:, ::1] W, const double[:, ::1] U,
                         double[:, ::1] dW, double[:, ::1] dU, double[::1] db,
                         double[::1] dx, double[::1] dh_prev, double[::1] dc_prev,
                         double[::1] dz) noexcept nogil:
    cdef Py_ssize_t H = dh.shape[0]
    cdef Py_ssize_t E = x.shape[0]
    cdef Py_ssize_t j, r, k
    cdef double gi, gf, gg, go, tc, dct, dzr
    for j in range(H):
        gi = gates[0, j]
        gf = gates[1, j]
        gg = gates[2, j]
        go = gates[3, j]
        tc = tanh(c_new[j])
        dct = dc[j] + dh[j] * go * (1.0 - tc * tc)
        dz[j] = (dct * gg) * gi * (1.0 - gi)
        dz[H + j] = (dct * c_prev[j]) * gf * (1.0 - gf)
        dz[2 * H + j] = (dct * gi) * (1.0 - gg * gg)
        dz[3 * H + j] = (dh[j] * tc) * go * (1.0 - go)
        dc_prev[j] = dct * gf
    for k in range(E):
        dx[k] = 0.0
    for k in range(H):
        dh_prev[k] = 0.0
    for r in range(4 * H):
        dzr = dz[r]
        db[r] += dzr
        for k in range(E):
            dW[r, k] += dzr * x[k]
            dx[k] += W[r, k] * dzr
        for k in range(H):
            dU[r, k] += dzr * h_prev[k]
            dh_prev[k] += U[r, k] * dzr


def lstm_cell_forward(double[::1] x, double[::1] h, double[::1] c,
                      double[:, ::1] W, double[:, ::1] U, double[::1] b):
    """One LSTM step; returns (h_new, c_new, gates[4,H])."""
    cdef Py_ssize_t H = h.shape[0]
    h_new = np.empty(H, dtype=np.float64)
    c_new = np.empty(H, dtype=np.float64)
    gates = np.empty((4, H), dtype=np.float64)
    z = np.empty(4 * H, dtype=np.float64)
    _cell_forward(x, h, c, W, U, b, h_new, c_new, gates, z)
    return h_new, c_new, gates


def lstm_cell_backward(double[::1] dh, double[::1] dc,
                       double[::1] x, double[::1] h_prev, double[::1] c_prev,
                       double[:, ::1] gates, double[::1] c_new,
                       double[:, ::1] W, double[:, ::1] U,
                       double[:, ::1] dW, double[:, ::1] dU, double[::1] db):
    """Backward through one step.  Accumulates into dW/dU/db and returns
    (dx, dh_prev, dc_prev)."""
    cdef Py_ssize_t H = dh.shape[0]
    cdef Py_ssize_t E = x.shape[0]
    dx = np.empty(E, dtype=np.float64)
    dh_prev = np.empty(H, dtype=np.float64)
    dc_prev = np.empty(H, dtype=np.float64)
    dz = np.empty(4 * H, dtype=np.float64)
    _cell_backward(dh, dc, x, h_prev, c_prev, gates, c_new, W, U,
                   dW, dU, db, dx, dh_prev, dc_prev, dz)
    return dx, dh_prev, dc_prev


def lstm_seq_forward(double[:, ::1] X, cnp.uint8_t[::1] mask,
                     double[::1] h0, double[::1] c0,
                     double[:, ::1] W, double[:, ::1] U, double[::1] b):
    """Run the cell left-to-right over X[T, E_in] with carry-through masking.

    The input-to-hidden product for all steps is one BLAS matmul up front;
    the sequential loop handles only the recurrent term and the gate math.
    """
    cdef Py_ssize_t T = X.shape[0]
    cdef Py_ssize_t H = h0.shape[0]
    H_seq_arr = np.zeros((T, H), dtype=np.float64)
    C_seq_arr = np.zeros((T, H), dtype=np.float64)
    gates_arr = np.zeros((T, 4, H), dtype=np.float64)
    h_arr = np.asarray(h0).copy()
    c_arr = np.asarray(c0).copy()
    WX_arr = np.asarray(X) @ np.asarray(W).T + np.asarray(b)
    cdef double[:, ::1] H_seq = H_seq_arr
    cdef double[:, ::1] C_seq = C_seq_arr
    cdef double[:, :, ::1] gates_seq = gates_arr
    cdef double[::1] h = h_arr
    cdef double[::1] c = c_arr
    cdef double[:, ::1] WX = WX_arr
    cdef Py_ssize_t t, j, r, k
    cdef double acc, gi, gf, gg, go, cn
    with nogil:
        for t in range(T):
            if mask[t]:
                # gates_seq[t] doubles as scratch for the pre-activations,
                # then is overwritten with the gate values in place
                for r in range(4 * H):
                    acc = WX[t, r]
                    for k in range(H):
                        acc += U[r, k] * h[k]
                    gates_seq[t, r // H, r % H] = acc
                for j in range(H):
                    gi = _sigmoid(gates_seq[t, 0, j])
                    gf = _sigmoid(gates_seq[t, 1, j])
                    gg = tanh(gates_seq[t, 2, j])
                    go = _sigmoid(gates_seq[t, 3, j])
                    cn = gf * c[j] + gi * gg
                    gates_seq[t, 0, j] = gi
                    gates_seq[t, 1, j] = gf
                    gates_seq[t, 2, j] = gg
                    gates_seq[t, 3, j] = go
                    c[j] = cn
                    h[j] = go * tanh(cn)
                    H_seq[t, j] = h[j]
                    C_seq[t, j] = cn
            else:
                for j in range(H):
                    H_seq[t, j] = h[j]
                    C_seq[t, j] = c[j]
    return H_seq_arr, C_seq_arr, gates_arr, h_arr, c_arr


def lstm_seq_backward(double[:, ::1] dH_seq, double[::1] dh_T, double[::1] dc_T,
                      double[:, ::1] X, cnp.uint8_t[::1] mask,
                      double[::1] h0, double[::1] c0,
                      double[:, ::1] W, double[:, ::1] U,
                      double[:, ::1] H_seq, double[:, ::1] C_seq,
                      double[:, :, ::1] gates_seq):
    """Backward through lstm_seq_forward; returns (dX, dW, dU, db, dh0, dc0).

    The recurrent gradient chain runs in C; per-step pre-activation gradients
    are collected into dZ and the weight gradients batched as matrix products.
    """
    cdef Py_ssize_t T = dH_seq.shape[0]
    cdef Py_ssize_t H = dH_seq.shape[1]
    dZ_arr = np.zeros((T, 4 * H), dtype=np.float64)
    dh_arr = np.asarray(dh_T).copy()
    dc_arr = np.asarray(dc_T).copy()
    scratch_arr = np.empty(H, dtype=np.float64)
    cdef double[:, ::1] dZ = dZ_arr
    cdef double[::1] dh = dh_arr
    cdef double[::1] dc = dc_arr
    cdef double[::1] dh_prev = scratch_arr
    cdef Py_ssize_t t, j, r, k
    cdef double gi, gf, gg, go, tc, dct, cp, dzr
    with nogil:
        for t in range(T - 1, -1, -1):
            for j in range(H):
                dh[j] = dh[j] + dH_seq[t, j]
            if not mask[t]:
                continue
            for j in range(H):
                gi = gates_seq[t, 0, j]
                gf = gates_seq[t, 1, j]
                gg = gates_seq[t, 2, j]
                go = gates_seq[t, 3, j]
                tc = tanh(C_seq[t, j])
                dct = dc[j] + dh[j] * go * (1.0 - tc * tc)
                cp = C_seq[t - 1, j] if t > 0 else c0[j]
                dZ[t, j] = (dct * gg) * gi * (1.0 - gi)
                dZ[t, H + j] = (dct * cp) * gf * (1.0 - gf)
                dZ[t, 2 * H + j] = (dct * gi) * (1.0 - gg * gg)
                dZ[t, 3 * H + j] = (dh[j] * tc) * go * (1.0 - go)
                dc[j] = dct * gf
                dh_prev[j] = 0.0
            for r in range(4 * H):  # row-major traversal of U
                dzr = dZ[t, r]
                for k in range(H):
                    dh_prev[k] += U[r, k] * dzr
            for k in range(H):
                dh[k] = dh_prev[k]
    X_arr = np.asarray(X)
    H_prev = np.vstack([np.asarray(h0), np.asarray(H_seq)[:-1]])
    dW_arr = dZ_arr.T @ X_arr
    dU_arr = dZ_arr.T @ H_prev
    db_arr = dZ_arr.sum(axis=0)
    dX_arr = dZ_arr @ np.asarray(W)
    return dX_arr, dW_arr, dU_arr, db_arr, dh_arr, dc_arr
