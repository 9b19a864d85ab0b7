"""Quantitative evaluation: ROUGE-1/2/L, corpus BLEU, and perplexity.

Metrics operate on token lists and never re-tokenize; corpus ROUGE values
are arithmetic means of per-pair scores, BLEU aggregates counts at the
corpus level.
"""

from __future__ import annotations

import json
import math
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .corpus import EOS_ID, EncodedPair, Vocabulary, decode_ids
from .decoding import DecodeConfig, beam_search
from .errors import LengthMismatch, NoScoredPositions
from .model import ModelConfig, Parameters, forward_teacher_forced
from .training import sequence_loss


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, overlap: float, n_candidate: float, n_reference: float) -> "PRF":
        p = overlap / n_candidate if n_candidate > 0 else 0.0
        r = overlap / n_reference if n_reference > 0 else 0.0
        f1 = 2.0 * p * r / (p + r) if p + r > 0 else 0.0
        return cls(precision=p, recall=r, f1=f1)


@dataclass(frozen=True)
class EvalReport:
    rouge1: PRF
    rouge2: PRF
    rougeL: PRF
    bleu: float
    perplexity: float
    n_pairs: int

    def to_json(self) -> str:
        obj = {
            "rouge1": _prf_dict(self.rouge1),
            "rouge2": _prf_dict(self.rouge2),
            "rougeL": _prf_dict(self.rougeL),
            "bleu": self.bleu,
            "perplexity": self.perplexity,
            "n_pairs": self.n_pairs,
        }
        return json.dumps(obj, ensure_ascii=False)


def _prf_dict(prf: PRF) -> dict:
    return {"p": prf.precision, "r": prf.recall, "f1": prf.f1}


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int) -> PRF:
    """Clipped n-gram overlap precision/recall/F1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    cand = _ngrams(candidate, n)
    ref = _ngrams(reference, n)
    overlap = sum(min(count, ref[gram]) for gram, count in cand.items())
    return PRF.from_counts(overlap, sum(cand.values()), sum(ref.values()))


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest common subsequence length by rolling-row dynamic programming."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                curr.append(prev[j - 1] + 1)
            else:
                curr.append(max(prev[j], curr[j - 1]))
        prev = curr
    return prev[len(b)]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> PRF:
    """LCS-based precision/recall/F1."""
    lcs = lcs_length(candidate, reference)
    return PRF.from_counts(lcs, len(candidate), len(reference))


def corpus_bleu(candidates: list, references: list, max_n: int = 4) -> float:
    """Corpus-level BLEU: clipped n-gram precisions aggregated over all pairs,
    geometric mean over the orders with at least one candidate n-gram (capped
    at max_n), times the brevity penalty."""
    if len(candidates) != len(references):
        raise LengthMismatch(f"{len(candidates)} candidates vs {len(references)} references")
    if not candidates:
        raise LengthMismatch("need at least one pair")
    cand_total = 0
    ref_total = 0
    matched = [0] * max_n
    possible = [0] * max_n
    for cand, ref in zip(candidates, references):
        cand_total += len(cand)
        ref_total += len(ref)
        for n in range(1, max_n + 1):
            cgrams = _ngrams(cand, n)
            rgrams = _ngrams(ref, n)
            matched[n - 1] += sum(min(c, rgrams[g]) for g, c in cgrams.items())
            possible[n - 1] += sum(cgrams.values())
    orders = [k for k in range(max_n) if possible[k] > 0]
    if not orders or cand_total == 0:
        return 0.0
    log_sum = 0.0
    for k in orders:
        if matched[k] == 0:
            return 0.0
        log_sum += math.log(matched[k] / possible[k])
    geo_mean = math.exp(log_sum / len(orders))
    bp = 1.0 if cand_total >= ref_total else math.exp(1.0 - ref_total / cand_total)
    return geo_mean * bp


def perplexity(P: Parameters, cfg: ModelConfig, pairs: list[EncodedPair]) -> float:
    """exp of total teacher-forced cross-entropy per scored position."""
    if not pairs:
        raise NoScoredPositions("no pairs to evaluate")
    total_nats = 0.0
    total_tokens = 0
    for pair in pairs:
        logits = forward_teacher_forced(pair, P, cfg)
        n = list(pair.target_ids).index(EOS_ID)
        total_nats += sequence_loss(logits, pair.target_ids) * n
        total_tokens += n
    if total_tokens == 0:
        raise NoScoredPositions("no scored positions in any pair")
    return math.exp(total_nats / total_tokens)


def _thread_count() -> int:
    raw = os.environ.get("URDU_ABSSUM_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def evaluate_corpus(P: Parameters, cfg: ModelConfig, test_pairs: list[EncodedPair],
                    vocab: Vocabulary, dcfg: DecodeConfig | None = None) -> EvalReport:
    """Beam-decode every test source, average per-pair ROUGE scores, compute
    corpus BLEU, and teacher-forced perplexity on the references."""
    if not test_pairs:
        raise NoScoredPositions("empty evaluation set")
    dcfg = DecodeConfig() if dcfg is None else dcfg

    def decode_one(pair: EncodedPair) -> list[str]:
        return decode_ids(beam_search(pair.source_ids, P, cfg, dcfg), vocab)

    workers = min(_thread_count(), len(test_pairs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            candidates = list(pool.map(decode_one, test_pairs))
    else:
        candidates = [decode_one(pair) for pair in test_pairs]
    references = [decode_ids(pair.target_ids, vocab) for pair in test_pairs]

    def mean_prf(scores: list[PRF]) -> PRF:
        n = len(scores)
        return PRF(
            precision=sum(s.precision for s in scores) / n,
            recall=sum(s.recall for s in scores) / n,
            f1=sum(s.f1 for s in scores) / n,
        )

    r1 = mean_prf([rouge_n(c, r, 1) for c, r in zip(candidates, references)])
    r2 = mean_prf([rouge_n(c, r, 2) for c, r in zip(candidates, references)])
    rl = mean_prf([rouge_l(c, r) for c, r in zip(candidates, references)])
    return EvalReport(
        rouge1=r1,
        rouge2=r2,
        rougeL=rl,
        bleu=corpus_bleu(candidates, references),
        perplexity=perplexity(P, cfg, test_pairs),
        n_pairs=len(test_pairs),
    )
