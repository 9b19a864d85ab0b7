"""Command-line entry point: preprocess, train, summarize, evaluate.

Exit codes: 0 success, 2 parse/input error, 3 training failure (non-finite
loss), 4 evaluation failure (empty test split).  Output files are written
atomically; rerunning a command with the same inputs and seed reproduces
its outputs byte for byte.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .checkpoint import Checkpoint, atomic_write_text, load_checkpoint, save_checkpoint
from .config import RunConfig, load_run_config
from .corpus import build_vocab, encode_pair, load_corpus, split_corpus
from .decoding import summarize
from .errors import (
    EmptyAfterPreprocessing,
    NonFiniteLoss,
    NoScoredPositions,
    ParseError,
    TooFewDocuments,
    UrduAbssumError,
)
from .evaluation import evaluate_corpus
from .model import ModelConfig, Parameters
from .preprocess import TokenizedPair, preprocess_pipeline
from .training import train

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_TRAINING = 3
EXIT_EVALUATION = 4


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _require_files(*paths: str) -> None:
    for p in paths:
        if p and not Path(p).exists():
            raise ParseError("file not found", path=p)


def cmd_preprocess(cfg: RunConfig, output: str | None = None) -> int:
    _require_files(cfg.paths.corpus)
    docs = load_corpus(cfg.paths.corpus)
    pipeline = cfg.build_pipeline()
    lines = []
    dropped = 0
    for doc in docs:
        try:
            pair = preprocess_pipeline(doc, pipeline)
        except EmptyAfterPreprocessing:
            dropped += 1
            continue
        lines.append(json.dumps(
            {"id": pair.id, "source_tokens": list(pair.source_tokens),
             "summary_tokens": list(pair.summary_tokens)},
            ensure_ascii=False,
        ))
    out_path = output or cfg.paths.preprocessed
    atomic_write_text(out_path, "".join(line + "\n" for line in lines))
    print(f"wrote {len(lines)} documents to {out_path}; dropped {dropped} empty after preprocessing")
    return EXIT_OK


def load_tokenized(path: str) -> list[TokenizedPair]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", lineno, path) from None
            try:
                pairs.append(TokenizedPair(
                    id=obj["id"],
                    source_tokens=tuple(obj["source_tokens"]),
                    summary_tokens=tuple(obj["summary_tokens"]),
                ))
            except (KeyError, TypeError):
                raise ParseError("expected id, source_tokens, summary_tokens", lineno, path) from None
    return pairs


def cmd_train(cfg: RunConfig) -> int:
    _require_files(cfg.paths.preprocessed)
    pairs = load_tokenized(cfg.paths.preprocessed)
    if len(pairs) < 2:
        raise TooFewDocuments("need at least 2 preprocessed documents to split")
    train_pairs, test_pairs = split_corpus(pairs, cfg.train_fraction, cfg.train.seed)
    vocab = build_vocab(train_pairs, min_freq=cfg.vocab.min_freq, max_size=cfg.vocab.max_size)
    model_cfg = ModelConfig(
        vocab_size=vocab.size,
        embedding_dim=cfg.model.embedding_dim,
        hidden_dim=cfg.model.hidden_dim,
        max_source_len=cfg.model.max_source_len,
        max_target_len=cfg.model.max_target_len,
        num_layers=cfg.model.num_layers,
    )
    encoded = [
        encode_pair(p, vocab, model_cfg.max_source_len, model_cfg.max_target_len)
        for p in train_pairs
    ]
    params = Parameters.initialize(model_cfg, cfg.train.seed)

    def log(stats):
        print(json.dumps({
            "epoch": stats.epoch, "loss": stats.mean_loss,
            "ppl": stats.perplexity, "sec": stats.wall_seconds,
        }))

    train(encoded, params, model_cfg, cfg.train, log=log)
    ckpt = Checkpoint(config=model_cfg, vocab=vocab, params=params,
                      seed=cfg.train.seed, epochs_trained=cfg.train.epochs)
    save_checkpoint(ckpt, cfg.paths.checkpoint)
    atomic_write_text(cfg.paths.test_ids_path(),
                      json.dumps([p.id for p in test_pairs], ensure_ascii=False) + "\n")
    print(f"saved checkpoint to {cfg.paths.checkpoint} "
          f"({len(train_pairs)} train / {len(test_pairs)} held out)")
    return EXIT_OK


def cmd_summarize(cfg: RunConfig, input_path: str, output: str | None = None) -> int:
    _require_files(cfg.paths.checkpoint, input_path)
    ckpt = load_checkpoint(cfg.paths.checkpoint)
    pipeline = cfg.build_pipeline()
    lines = []
    with open(input_path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                doc_id, text = obj["id"], obj["text"]
            except (json.JSONDecodeError, KeyError, TypeError):
                raise ParseError("expected JSON object with id and text", lineno, input_path) from None
            try:
                summary = summarize(text, pipeline, ckpt.vocab, ckpt.params,
                                    ckpt.config, cfg.decode)
                lines.append(json.dumps({"id": doc_id, "summary": summary}, ensure_ascii=False))
            except UrduAbssumError as exc:
                lines.append(json.dumps({"id": doc_id, "error": str(exc)}, ensure_ascii=False))
    text_out = "".join(line + "\n" for line in lines)
    if output:
        atomic_write_text(output, text_out)
    else:
        sys.stdout.write(text_out)
    return EXIT_OK


def cmd_evaluate(cfg: RunConfig, on_train: bool = False, output: str | None = None) -> int:
    _require_files(cfg.paths.checkpoint, cfg.paths.preprocessed, cfg.paths.test_ids_path())
    ckpt = load_checkpoint(cfg.paths.checkpoint)
    pairs = load_tokenized(cfg.paths.preprocessed)
    with open(cfg.paths.test_ids_path(), encoding="utf-8") as fh:
        test_ids = set(json.load(fh))
    if on_train:
        selected = [p for p in pairs if p.id not in test_ids]
    else:
        selected = [p for p in pairs if p.id in test_ids]
    if not selected:
        print("error: evaluation split is empty", file=sys.stderr)
        return EXIT_EVALUATION
    encoded = [
        encode_pair(p, ckpt.vocab, ckpt.config.max_source_len, ckpt.config.max_target_len)
        for p in selected
    ]
    try:
        report = evaluate_corpus(ckpt.params, ckpt.config, encoded, ckpt.vocab, cfg.decode)
    except NoScoredPositions as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EVALUATION
    out_path = output or cfg.paths.eval_report
    atomic_write_text(out_path, report.to_json() + "\n")
    print(f"wrote evaluation report to {out_path}")
    return EXIT_OK


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    train_kw = {}
    if getattr(args, "seed", None) is not None:
        train_kw["seed"] = args.seed
    if getattr(args, "epochs", None) is not None:
        train_kw["epochs"] = args.epochs
    if getattr(args, "lr", None) is not None:
        train_kw["learning_rate"] = args.lr
    decode_kw = {}
    if getattr(args, "beam", None) is not None:
        decode_kw["beam_size"] = args.beam
    if getattr(args, "max_len", None) is not None:
        decode_kw["max_len"] = args.max_len
    if getattr(args, "alpha", None) is not None:
        decode_kw["length_penalty_alpha"] = args.alpha
    if train_kw:
        cfg = dataclasses.replace(cfg, train=dataclasses.replace(cfg.train, **train_kw))
    if decode_kw:
        cfg = dataclasses.replace(cfg, decode=dataclasses.replace(cfg.decode, **decode_kw))
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="urdu-abssum",
        description="Abstractive summarization for Urdu: preprocess, train, summarize, evaluate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="path to the JSON run configuration")
        p.add_argument("--seed", type=int, help="override training seed")

    p_pre = sub.add_parser("preprocess", help="tokenize a raw corpus")
    add_common(p_pre)
    p_pre.add_argument("--output", help="override the preprocessed-corpus path")

    p_train = sub.add_parser("train", help="split, build vocabulary, and train")
    add_common(p_train)
    p_train.add_argument("--epochs", type=int, help="override epoch count")
    p_train.add_argument("--lr", type=float, help="override learning rate")

    p_sum = sub.add_parser("summarize", help="generate summaries for new articles")
    add_common(p_sum)
    p_sum.add_argument("--input", required=True, help="JSONL file with id and text per line")
    p_sum.add_argument("--output", help="write JSONL here instead of stdout")
    p_sum.add_argument("--beam", type=int, help="beam size")
    p_sum.add_argument("--max-len", type=int, dest="max_len", help="maximum summary tokens")
    p_sum.add_argument("--alpha", type=float, help="length penalty exponent")

    p_eval = sub.add_parser("evaluate", help="score the held-out split")
    add_common(p_eval)
    p_eval.add_argument("--on-train", action="store_true", dest="on_train",
                        help="evaluate on the training split instead")
    p_eval.add_argument("--output", help="override the report path")
    p_eval.add_argument("--beam", type=int, help="beam size")
    p_eval.add_argument("--max-len", type=int, dest="max_len", help="maximum summary tokens")
    p_eval.add_argument("--alpha", type=float, help="length penalty exponent")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(load_run_config(args.config), args)
        if args.command == "preprocess":
            return cmd_preprocess(cfg, output=args.output)
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "summarize":
            return cmd_summarize(cfg, args.input, output=args.output)
        if args.command == "evaluate":
            return cmd_evaluate(cfg, on_train=args.on_train, output=args.output)
        raise AssertionError(f"unhandled command {args.command}")
    except NonFiniteLoss as exc:
        return _fail(EXIT_TRAINING, f"training diverged: {exc}")
    except (ParseError, TooFewDocuments) as exc:
        return _fail(EXIT_PARSE, str(exc))
    except FileNotFoundError as exc:
        return _fail(EXIT_PARSE, str(exc))
    except UrduAbssumError as exc:
        return _fail(EXIT_PARSE, str(exc))


if __name__ == "__main__":
    sys.exit(main())
