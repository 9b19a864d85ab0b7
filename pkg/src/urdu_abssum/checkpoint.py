"""Single-file checkpoint persistence.

Layout: one JSON header line (format version, model config, vocabulary,
training provenance, and per-tensor shapes/byte lengths), a newline, then
the raw little-endian float64 tensor blocks in header order.  Floats round
trip exactly; files are written to a temporary path and atomically renamed.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Vocabulary
from .errors import CheckpointError
from .model import LstmWeights, ModelConfig, Parameters

FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    config: ModelConfig
    vocab: Vocabulary
    params: Parameters
    seed: int
    epochs_trained: int


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def save_checkpoint(ckpt: Checkpoint, path: str | Path) -> None:
    tensors = ckpt.params.tensors()
    header = {
        "format_version": FORMAT_VERSION,
        "model_config": {
            "vocab_size": ckpt.config.vocab_size,
            "embedding_dim": ckpt.config.embedding_dim,
            "hidden_dim": ckpt.config.hidden_dim,
            "max_source_len": ckpt.config.max_source_len,
            "max_target_len": ckpt.config.max_target_len,
            "num_layers": ckpt.config.num_layers,
        },
        "vocab": list(ckpt.vocab.id_to_token),
        "seed": ckpt.seed,
        "epochs_trained": ckpt.epochs_trained,
        "tensors": [
            {"name": name, "shape": list(arr.shape), "bytes": arr.size * 8}
            for name, arr in tensors.items()
        ],
    }
    blob = [json.dumps(header, ensure_ascii=False).encode("utf-8"), b"\n"]
    for arr in tensors.values():
        blob.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    atomic_write_bytes(path, b"".join(blob))


def load_checkpoint(path: str | Path) -> Checkpoint:
    with open(path, "rb") as fh:
        raw = fh.read()
    newline = raw.find(b"\n")
    if newline < 0:
        raise CheckpointError(f"{path}: missing header line")
    try:
        header = json.loads(raw[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: bad header: {exc}") from None
    if header.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported format version {header.get('format_version')}")
    cfg = ModelConfig(**header["model_config"])
    vocab = Vocabulary(header["vocab"])
    if vocab.size != cfg.vocab_size:
        raise CheckpointError(f"{path}: vocabulary size {vocab.size} != config {cfg.vocab_size}")

    offset = newline + 1
    arrays: dict[str, np.ndarray] = {}
    for entry in header["tensors"]:
        nbytes = entry["bytes"]
        shape = tuple(entry["shape"])
        if nbytes != int(np.prod(shape)) * 8:
            raise CheckpointError(f"{path}: tensor {entry['name']} shape/bytes mismatch")
        chunk = raw[offset:offset + nbytes]
        if len(chunk) != nbytes:
            raise CheckpointError(f"{path}: truncated tensor block {entry['name']}")
        arrays[entry["name"]] = np.frombuffer(chunk, dtype="<f8").reshape(shape).copy()
        offset += nbytes
    if offset != len(raw):
        raise CheckpointError(f"{path}: {len(raw) - offset} trailing bytes")

    params = _params_from_arrays(arrays, cfg, path)
    return Checkpoint(config=cfg, vocab=vocab, params=params,
                      seed=header["seed"], epochs_trained=header["epochs_trained"])


def _params_from_arrays(arrays: dict[str, np.ndarray], cfg: ModelConfig, path) -> Parameters:
    try:
        encoder = [
            LstmWeights(W=arrays[f"encoder.{k}.W"], U=arrays[f"encoder.{k}.U"],
                        b=arrays[f"encoder.{k}.b"])
            for k in range(cfg.num_layers)
        ]
        decoder = [
            LstmWeights(W=arrays[f"decoder.{k}.W"], U=arrays[f"decoder.{k}.U"],
                        b=arrays[f"decoder.{k}.b"])
            for k in range(cfg.num_layers)
        ]
        params = Parameters(
            embedding=arrays["embedding"], encoder=encoder, decoder=decoder,
            attn_w=arrays["attention.W"], out_w=arrays["output.W"], out_b=arrays["output.b"],
        )
    except KeyError as exc:
        raise CheckpointError(f"{path}: missing tensor {exc}") from None
    V, E, H = cfg.vocab_size, cfg.embedding_dim, cfg.hidden_dim
    expected = {
        "embedding": (V, E),
        "attention.W": (H, H),
        "output.W": (V, 2 * H),
        "output.b": (V,),
    }
    for k in range(cfg.num_layers):
        e_in = E if k == 0 else H
        for role in ("encoder", "decoder"):
            expected[f"{role}.{k}.W"] = (4 * H, e_in)
            expected[f"{role}.{k}.U"] = (4 * H, H)
            expected[f"{role}.{k}.b"] = (4 * H,)
    for name, shape in expected.items():
        if arrays[name].shape != shape:
            raise CheckpointError(
                f"{path}: tensor {name} has shape {arrays[name].shape}, expected {shape}"
            )
    return params
