"""Urdu text preprocessing.

Raw article text becomes clean token sequences through six stages:
normalization, sentence tokenization, word tokenization, lemmatization,
stopword removal, and frequency-based sentence ranking.  All stages are
pure functions over immutable tables, so they are safe to call from any
number of threads.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Iterable

from .errors import EmptyAfterPreprocessing, ParseError

SENTENCE_DELIMITERS = frozenset({"۔", "؟", "!", "?", ".", "\n"})


@dataclass(frozen=True)
class NormalizationTable:
    """Codepoint canonicalization map plus a set of codepoints to delete."""

    char_map: dict[int, int]
    strip_set: frozenset[int]

    def __post_init__(self):
        overlap = self.strip_set & set(self.char_map)
        if overlap:
            raise ValueError(f"strip_set overlaps char_map domain: {sorted(overlap)}")
        for src, dst in self.char_map.items():
            if dst in self.char_map:
                raise ValueError(f"char_map is not idempotent at U+{src:04X} -> U+{dst:04X}")


@dataclass(frozen=True)
class LemmaRules:
    """Exception lexicon plus suffix rules ordered longest-suffix-first."""

    exceptions: dict[str, str]
    suffix_rules: tuple[tuple[str, str], ...]

    def __post_init__(self):
        for suffix, _ in self.suffix_rules:
            if not suffix:
                raise ValueError("empty suffix in lemma rules")
        lengths = [len(s) for s, _ in self.suffix_rules]
        if lengths != sorted(lengths, reverse=True):
            raise ValueError("suffix rules must be sorted by descending suffix length")


@dataclass(frozen=True)
class StopwordSet:
    words: frozenset[str]

    def __contains__(self, token: str) -> bool:
        return token in self.words


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[str, ...]
    score: float = 0.0


@dataclass(frozen=True)
class TokenizedPair:
    """A document after preprocessing: ranked source tokens and summary tokens."""

    id: str
    source_tokens: tuple[str, ...]
    summary_tokens: tuple[str, ...]


@dataclass(frozen=True)
class PipelineConfig:
    max_source_tokens: int = 400
    hyphen_as_delimiter: bool = False


def _data_path(name: str) -> Path:
    return Path(str(resources.files("urdu_abssum").joinpath("data", name)))


def load_normalization_table(path: str | Path | None = None) -> NormalizationTable:
    """Parse a SRC_HEX<TAB>DST_HEX|STRIP file; None loads the packaged table."""
    path = _data_path("normalization.tsv") if path is None else Path(path)
    char_map: dict[int, int] = {}
    strip_set: set[int] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError("expected SRC<TAB>DST or SRC<TAB>STRIP", lineno, str(path))
            try:
                src = int(parts[0], 16)
            except ValueError:
                raise ParseError(f"bad codepoint {parts[0]!r}", lineno, str(path)) from None
            if parts[1] == "STRIP":
                strip_set.add(src)
            else:
                try:
                    char_map[src] = int(parts[1], 16)
                except ValueError:
                    raise ParseError(f"bad codepoint {parts[1]!r}", lineno, str(path)) from None
    return NormalizationTable(char_map=char_map, strip_set=frozenset(strip_set))


def load_lemma_rules(path: str | Path | None = None) -> LemmaRules:
    """Parse EXC/SUF lines; suffix rules are sorted longest-first, stably."""
    path = _data_path("lemma_rules.tsv") if path is None else Path(path)
    exceptions: dict[str, str] = {}
    suffixes: list[tuple[str, str]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) == 2 and parts[0] == "SUF":
                parts.append("")  # editors strip trailing tabs on empty replacements
            if len(parts) != 3:
                raise ParseError("expected KIND<TAB>a<TAB>b", lineno, str(path))
            kind, a, b = parts
            if kind == "EXC":
                if not a or not b:
                    raise ParseError("empty token or lemma", lineno, str(path))
                exceptions[a] = b
            elif kind == "SUF":
                if not a:
                    raise ParseError("empty suffix", lineno, str(path))
                suffixes.append((a, b))
            else:
                raise ParseError(f"unknown rule kind {kind!r}", lineno, str(path))
    suffixes.sort(key=lambda rule: -len(rule[0]))
    return LemmaRules(exceptions=exceptions, suffix_rules=tuple(suffixes))


def load_stopwords(path: str | Path | None = None,
                   table: NormalizationTable | None = None) -> StopwordSet:
    """Load one token per line ('#' comments allowed), normalizing each entry."""
    path = _data_path("stopwords.txt") if path is None else Path(path)
    table = default_normalization_table() if table is None else table
    words = set()
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            token = normalize_text(line, table)
            if token:
                words.add(token)
    return StopwordSet(words=frozenset(words))


_DEFAULT_TABLE: NormalizationTable | None = None


def default_normalization_table() -> NormalizationTable:
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None:
        _DEFAULT_TABLE = load_normalization_table()
    return _DEFAULT_TABLE


def normalize_text(raw: str, table: NormalizationTable) -> str:
    """Canonicalize to NFC, apply the codepoint map, strip diacritics,
    and collapse whitespace runs to single spaces."""
    composed = unicodedata.normalize("NFC", raw)
    out = []
    for ch in composed:
        cp = ord(ch)
        if cp in table.strip_set:
            continue
        mapped = table.char_map.get(cp)
        out.append(chr(mapped) if mapped is not None else ch)
    return " ".join("".join(out).split())


def sentence_tokenize(text: str, extra_delimiters: Iterable[str] = ()) -> list[str]:
    """Split normalized text into sentences at the delimiter codepoints,
    dropping the delimiters and any empty pieces."""
    delimiters = SENTENCE_DELIMITERS | frozenset(extra_delimiters)
    sentences: list[str] = []
    current: list[str] = []
    for ch in text:
        if ch in delimiters:
            piece = "".join(current).strip()
            if piece:
                sentences.append(piece)
            current = []
        else:
            current.append(ch)
    piece = "".join(current).strip()
    if piece:
        sentences.append(piece)
    return sentences


def word_tokenize(sentence: str) -> list[str]:
    """Split on whitespace; every punctuation codepoint becomes its own token."""
    tokens: list[str] = []
    for chunk in sentence.split():
        word: list[str] = []
        for ch in chunk:
            if unicodedata.category(ch).startswith("P"):
                if word:
                    tokens.append("".join(word))
                    word = []
                tokens.append(ch)
            else:
                word.append(ch)
        if word:
            tokens.append("".join(word))
    return tokens


def lemmatize(token: str, rules: LemmaRules) -> str:
    """Exception lookup first, then the longest matching suffix rule, applied
    once; rules that would empty the token are skipped."""
    hit = rules.exceptions.get(token)
    if hit is not None:
        return hit
    for suffix, replacement in rules.suffix_rules:
        if len(token) > len(suffix) or replacement:
            if token.endswith(suffix):
                candidate = token[: len(token) - len(suffix)] + replacement
                if candidate:
                    return candidate
    return token


def remove_stopwords(tokens: list[str], stops: StopwordSet) -> list[str]:
    return [t for t in tokens if t not in stops]


def rank_sentences(sentences: list[Sentence]) -> list[Sentence]:
    """Score each sentence by its mean corpus-local token frequency and sort
    by descending score; ties keep original order."""
    freq = Counter(token for s in sentences for token in s.tokens)
    scored = [
        replace(s, score=sum(freq[t] for t in s.tokens) / len(s.tokens))
        for s in sentences
    ]
    return sorted(scored, key=lambda s: -s.score)


@dataclass(frozen=True)
class Pipeline:
    """Bundles the three data tables with the pipeline configuration."""

    table: NormalizationTable = field(default_factory=default_normalization_table)
    lemma_rules: LemmaRules = field(default_factory=load_lemma_rules)
    stopwords: StopwordSet = field(default_factory=load_stopwords)
    config: PipelineConfig = field(default_factory=PipelineConfig)

    def _clean_sentences(self, text: str) -> list[Sentence]:
        normalized = normalize_text(text, self.table)
        extra = ("-",) if self.config.hyphen_as_delimiter else ()
        sentences = []
        for sent in sentence_tokenize(normalized, extra_delimiters=extra):
            tokens = [lemmatize(t, self.lemma_rules) for t in word_tokenize(sent)]
            tokens = remove_stopwords(tokens, self.stopwords)
            if tokens:
                sentences.append(Sentence(tokens=tuple(tokens)))
        return sentences

    def source_tokens(self, text: str) -> list[str]:
        """Full pipeline including ranking and truncation; raises
        EmptyAfterPreprocessing when nothing survives."""
        ranked = rank_sentences(self._clean_sentences(text))
        tokens: list[str] = []
        for sentence in ranked:
            tokens.extend(sentence.tokens)
        if not tokens:
            raise EmptyAfterPreprocessing("source text reduced to zero tokens")
        return tokens[: self.config.max_source_tokens]

    def summary_tokens(self, text: str) -> list[str]:
        """Same cleaning stages, original sentence order, no truncation."""
        tokens: list[str] = []
        for sentence in self._clean_sentences(text):
            tokens.extend(sentence.tokens)
        return tokens


def preprocess_pipeline(doc, pipeline: Pipeline) -> TokenizedPair:
    """Preprocess a raw document (any object with id/text/summary fields)."""
    return TokenizedPair(
        id=doc.id,
        source_tokens=tuple(pipeline.source_tokens(doc.text)),
        summary_tokens=tuple(pipeline.summary_tokens(doc.summary)),
    )
