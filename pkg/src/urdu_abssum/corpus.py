"""Corpus loading, splitting, vocabulary construction, and integer encoding."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DuplicateId, IdOutOfRange, ParseError, TooFewDocuments
from .rng import Xoshiro256StarStar

PAD_ID = 0
SOS_ID = 1
EOS_ID = 2
UNK_ID = 3
RESERVED_TOKENS = ("<pad>", "<s>", "</s>", "<unk>")


@dataclass(frozen=True)
class RawDocument:
    id: str
    text: str
    summary: str


class Vocabulary:
    """Immutable token<->id maps with the four reserved leading symbols."""

    def __init__(self, tokens: Sequence[str]):
        if tuple(tokens[:4]) != RESERVED_TOKENS:
            raise ValueError(f"first four tokens must be {RESERVED_TOKENS}")
        if len(tokens) < 5:
            raise ValueError("vocabulary needs at least one non-reserved token")
        if len(set(tokens)) != len(tokens):
            raise ValueError("duplicate tokens in vocabulary")
        self.id_to_token: tuple[str, ...] = tuple(tokens)
        self.token_to_id: dict[str, int] = {t: i for i, t in enumerate(tokens)}

    @property
    def size(self) -> int:
        return len(self.id_to_token)

    def __len__(self) -> int:
        return len(self.id_to_token)

    def id_of(self, token: str) -> int:
        return self.token_to_id.get(token, UNK_ID)

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.id_to_token == other.id_to_token

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for token in self.id_to_token:
                fh.write(token + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        with open(path, encoding="utf-8") as fh:
            tokens = [line.rstrip("\n") for line in fh]
        while tokens and tokens[-1] == "":
            tokens.pop()
        return cls(tokens)


@dataclass(frozen=True)
class EncodedPair:
    """PAD-padded id sequences; target starts with SOS and holds exactly one EOS."""

    source_ids: tuple[int, ...]
    target_ids: tuple[int, ...]
    id: str = ""


def load_corpus(path: str | Path) -> list[RawDocument]:
    """Read a JSONL corpus with exactly the keys id/text/summary per line."""
    docs: list[RawDocument] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", lineno, str(path)) from None
            if not isinstance(obj, dict) or set(obj) != {"id", "text", "summary"}:
                raise ParseError("expected exactly the keys id, text, summary", lineno, str(path))
            if not all(isinstance(obj[k], str) for k in ("id", "text", "summary")):
                raise ParseError("id, text, and summary must be strings", lineno, str(path))
            if not obj["text"] or not obj["summary"]:
                raise ParseError("text and summary must be non-empty", lineno, str(path))
            if obj["id"] in seen:
                raise DuplicateId(f"duplicate document id {obj['id']!r} at line {lineno}")
            seen.add(obj["id"])
            docs.append(RawDocument(id=obj["id"], text=obj["text"], summary=obj["summary"]))
    return docs


def split_corpus(docs: list, train_fraction: float, seed: int) -> tuple[list, list]:
    """Deterministic seeded shuffle, then a floor(train_fraction*n) cut
    (at least one document on each side)."""
    if len(docs) < 2:
        raise TooFewDocuments(f"need at least 2 documents, got {len(docs)}")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    order = list(range(len(docs)))
    Xoshiro256StarStar(seed).shuffle(order)
    n_train = max(1, int(train_fraction * len(docs)))
    train = [docs[i] for i in order[:n_train]]
    test = [docs[i] for i in order[n_train:]]
    return train, test


def build_vocab(pairs: Iterable, min_freq: int = 1, max_size: int = 50000) -> Vocabulary:
    """Count tokens over sources and summaries; keep those with frequency >=
    min_freq, most frequent first (ties by first occurrence), capped at max_size."""
    if min_freq < 1:
        raise ValueError("min_freq must be >= 1")
    if max_size < 5:
        raise ValueError("max_size must leave room for the reserved symbols")
    counts: dict[str, int] = {}
    first_seen: dict[str, int] = {}
    position = 0
    for pair in pairs:
        for token in list(pair.source_tokens) + list(pair.summary_tokens):
            counts[token] = counts.get(token, 0) + 1
            if token not in first_seen:
                first_seen[token] = position
            position += 1
    kept = [t for t, c in counts.items() if c >= min_freq]
    kept.sort(key=lambda t: (-counts[t], first_seen[t]))
    tokens = list(RESERVED_TOKENS) + kept
    return Vocabulary(tokens[:max_size])


def encode(tokens: Sequence[str], vocab: Vocabulary, max_len: int, add_markers: bool) -> list[int]:
    """Map tokens to ids (OOV -> UNK), optionally wrap in SOS/EOS, truncate
    preserving a terminal EOS, and PAD-pad to exactly max_len."""
    if add_markers and max_len < 3:
        raise ValueError("max_len must be >= 3 when adding markers")
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    ids = [vocab.id_of(t) for t in tokens]
    if add_markers:
        ids = [SOS_ID] + ids + [EOS_ID]
        if len(ids) > max_len:
            ids = ids[: max_len - 1] + [EOS_ID]
    elif len(ids) > max_len:
        ids = ids[:max_len]
    return ids + [PAD_ID] * (max_len - len(ids))


def decode_ids(ids: Sequence[int], vocab: Vocabulary) -> list[str]:
    """Map ids back to tokens, stopping at the first EOS and dropping all
    reserved symbols."""
    tokens: list[str] = []
    for i in ids:
        if not 0 <= i < vocab.size:
            raise IdOutOfRange(f"id {i} outside vocabulary of size {vocab.size}")
        if i == EOS_ID:
            break
        if i > UNK_ID:
            tokens.append(vocab.id_to_token[i])
    return tokens


def encode_pair(pair, vocab: Vocabulary, max_source_len: int, max_target_len: int) -> EncodedPair:
    """Encode a TokenizedPair: plain padded source, SOS/EOS-marked target."""
    return EncodedPair(
        source_ids=tuple(encode(pair.source_tokens, vocab, max_source_len, add_markers=False)),
        target_ids=tuple(encode(pair.summary_tokens, vocab, max_target_len, add_markers=True)),
        id=getattr(pair, "id", ""),
    )
