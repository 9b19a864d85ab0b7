#!/usr/bin/env python3
"""Benchmark the compiled LSTM kernels against the pure numpy fallback.

Times the sequence forward/backward kernels (the encoder's hot path) and a
stepwise cell loop (the decoder's hot path) for several model sizes, and a
whole training step on a small seq2seq model.  Run from the repository root:

    python3 benchmarks/bench_kernels.py [--repeats N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from urdu_abssum import kernels
from urdu_abssum.corpus import EncodedPair, SOS_ID, EOS_ID
from urdu_abssum.kernels import _pure
from urdu_abssum.model import ModelConfig, Parameters
from urdu_abssum.training import backward

try:
    from urdu_abssum.kernels import _ckernels
except ImportError:
    _ckernels = None


def _timeit(fn, repeats: int) -> float:
    fn()  # warmup
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_seq(impl, T, E, H, repeats):
    rng = np.random.default_rng(0)
    X = rng.normal(size=(T, E))
    mask = np.ones(T, dtype=np.uint8)
    h0 = np.zeros(H)
    c0 = np.zeros(H)
    W = rng.normal(size=(4 * H, E), scale=0.1)
    U = rng.normal(size=(4 * H, H), scale=0.1)
    b = rng.normal(size=4 * H, scale=0.1)
    H_seq, C_seq, gates, _, _ = impl.lstm_seq_forward(X, mask, h0, c0, W, U, b)
    dH = rng.normal(size=(T, H))
    dh_T = rng.normal(size=H)
    dc_T = rng.normal(size=H)

    fwd = _timeit(lambda: impl.lstm_seq_forward(X, mask, h0, c0, W, U, b), repeats)
    bwd = _timeit(
        lambda: impl.lstm_seq_backward(dH, dh_T, dc_T, X, mask, h0, c0, W, U,
                                       H_seq, C_seq, gates),
        repeats,
    )
    return fwd, bwd


def bench_cell_loop(impl, steps, E, H, repeats):
    rng = np.random.default_rng(1)
    x = rng.normal(size=E)
    W = rng.normal(size=(4 * H, E), scale=0.1)
    U = rng.normal(size=(4 * H, H), scale=0.1)
    b = rng.normal(size=4 * H, scale=0.1)

    def loop():
        h = np.zeros(H)
        c = np.zeros(H)
        for _ in range(steps):
            h, c, _ = impl.lstm_cell_forward(x, h, c, W, U, b)

    return _timeit(loop, repeats)


def bench_training_step(backend, repeats):
    kernels.set_backend(backend)
    cfg = ModelConfig(vocab_size=200, embedding_dim=64, hidden_dim=128,
                      max_source_len=40, max_target_len=16)
    P = Parameters.initialize(cfg, seed=1)
    pair = EncodedPair(
        source_ids=tuple(4 + (k % 190) for k in range(40)),
        target_ids=(SOS_ID,) + tuple(4 + k for k in range(14)) + (EOS_ID,),
    )
    return _timeit(lambda: backward(pair, P, cfg), repeats)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if _ckernels is None:
        print("compiled kernels unavailable; nothing to compare")
        return

    print(f"{'kernel benchmark':<38}{'python':>12}{'cython':>12}{'speedup':>9}")
    print("-" * 71)
    for T, E, H in ((10, 24, 48), (16, 32, 64), (40, 64, 128), (64, 128, 256)):
        py_f, py_b = bench_seq(_pure, T, E, H, args.repeats)
        cy_f, cy_b = bench_seq(_ckernels, T, E, H, args.repeats)
        label = f"seq forward  T={T:<3} E={E:<4} H={H}"
        print(f"{label:<38}{py_f * 1e3:>10.3f}ms{cy_f * 1e3:>10.3f}ms{py_f / cy_f:>8.1f}x")
        label = f"seq backward T={T:<3} E={E:<4} H={H}"
        print(f"{label:<38}{py_b * 1e3:>10.3f}ms{cy_b * 1e3:>10.3f}ms{py_b / cy_b:>8.1f}x")
    for steps, E, H in ((64, 64, 128),):
        py = bench_cell_loop(_pure, steps, E, H, args.repeats)
        cy = bench_cell_loop(_ckernels, steps, E, H, args.repeats)
        label = f"cell loop    n={steps:<3} E={E:<4} H={H}"
        print(f"{label:<38}{py * 1e3:>10.3f}ms{cy * 1e3:>10.3f}ms{py / cy:>8.1f}x")

    original = kernels.backend()
    try:
        py = bench_training_step("python", args.repeats)
        cy = bench_training_step("cython", args.repeats)
    finally:
        kernels.set_backend(original)
    label = "train step   V=200 E=64 H=128"
    print(f"{label:<38}{py * 1e3:>10.3f}ms{cy * 1e3:>10.3f}ms{py / cy:>8.1f}x")


if __name__ == "__main__":
    main()
