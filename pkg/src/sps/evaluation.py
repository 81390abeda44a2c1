"""Metric-quality evaluation: perplexity, normalized EM/F1, binned correlation,
pairwise AUROC, and answer entropy.

Records are QaRecord objects: one query with per-candidate metric scores and
correctness labels. On disk a records file is a JSON array of such objects
(see qa_record_from_dict for the schema).
"""

from __future__ import annotations

import enum
import math
import unicodedata
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DataError, EmptySequenceError, EvalError

N_BINS = 10


class Orientation(enum.Enum):
    LOWER_BETTER = "lower"
    HIGHER_BETTER = "higher"

    @classmethod
    def parse(cls, name: str) -> "Orientation":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown orientation {name!r}") from None


@dataclass(frozen=True)
class CandidateOutcome:
    candidate_id: str
    metric_scores: dict[str, float]
    em: int  # 0 or 1
    f1: float  # in [0, 1]
    prediction: Optional[str] = None


@dataclass(frozen=True)
class QaRecord:
    query_id: str
    prediction: str
    gold_answers: tuple[str, ...]
    per_candidate: tuple[CandidateOutcome, ...] = ()


@dataclass(frozen=True)
class BinStats:
    mean_em: float
    mean_f1: float
    count: int


@dataclass(frozen=True)
class BinReport:
    metric_name: str
    bins: tuple[BinStats, ...]  # exactly 10, ordered worst metric value first
    pcc_em: float
    pcc_f1: float
    degenerate_em: bool = False
    degenerate_f1: bool = False


def ppl(token_logprobs: Sequence[float]) -> float:
    """exp of the negative mean log-probability; >= 1 for valid log-probs."""
    n = len(token_logprobs)
    if n == 0:
        raise EmptySequenceError("no token log-probabilities")
    total = 0.0
    for lp in token_logprobs:
        if lp > 0.0 or math.isnan(lp):
            raise DataError(f"log-probability must be <= 0, got {lp}")
        total += lp
    return math.exp(-total / n)


def normalize_answer(text: str) -> str:
    """Lowercase, drop Unicode punctuation, collapse whitespace runs, trim.

    Punctuation (Unicode category P*) is removed outright, so "A,B" becomes
    "ab". Article stripping is optional and off by default.
    """
    lowered = text.lower()
    kept = []
    for ch in lowered:
        if unicodedata.category(ch).startswith("P"):
            continue
        kept.append(ch)
    return " ".join("".join(kept).split())


_ARTICLES = {"a", "an", "the"}


def em_f1(
    prediction: str, golds: Sequence[str], strip_articles: bool = False
) -> tuple[int, float]:
    """Exact-match flag and best token-overlap F1 against any gold answer.

    F1 uses whitespace tokens after normalization, with multiset overlap.
    When either side tokenizes to nothing, F1 is 1.0 only if both do.
    """
    if not golds:
        raise EvalError("at least one gold answer is required")

    def tokens(s: str) -> list[str]:
        toks = normalize_answer(s).split()
        if strip_articles:
            toks = [t for t in toks if t not in _ARTICLES]
        return toks

    pred_toks = tokens(prediction)
    pred_norm = " ".join(pred_toks)
    em = 0
    best_f1 = 0.0
    for gold in golds:
        gold_toks = tokens(gold)
        if pred_norm == " ".join(gold_toks):
            em = 1
        if not pred_toks or not gold_toks:
            score = float(pred_toks == gold_toks)
        else:
            common = Counter(pred_toks) & Counter(gold_toks)
            num_same = sum(common.values())
            if num_same == 0:
                score = 0.0
            else:
                precision = num_same / len(pred_toks)
                recall = num_same / len(gold_toks)
                score = 2 * precision * recall / (precision + recall)
        best_f1 = max(best_f1, score)
    return em, best_f1


def pearson(x: Sequence[float], y: Sequence[float]) -> tuple[float, bool]:
    """Pearson r clamped to [-1, 1]; returns (0.0, True) on zero variance."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        return 0.0, True
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r)), False


def _metric_of(cand: CandidateOutcome, metric_name: str, query_id: str) -> float:
    try:
        return cand.metric_scores[metric_name]
    except KeyError:
        raise EvalError(
            f"query {query_id!r}: candidate {cand.candidate_id!r} has no "
            f"metric {metric_name!r}"
        ) from None


def _ranked_worst_first(
    record: QaRecord, metric_name: str, orientation: Orientation
) -> list[CandidateOutcome]:
    # stable sort: ties keep manifest order
    cands = list(record.per_candidate)
    if orientation is Orientation.LOWER_BETTER:
        key = lambda c: -_metric_of(c, metric_name, record.query_id)
    else:
        key = lambda c: _metric_of(c, metric_name, record.query_id)
    return sorted(cands, key=key)


def bin_pcc(
    records: Sequence[QaRecord], metric_name: str, orientation: Orientation
) -> BinReport:
    """Correlation between metric-ordered bins and mean task performance.

    Per query, candidates are ranked by the metric from least to most
    favorable and split into 10 contiguous bins (sizes differ by at most
    one). Bin index correlates positively with EM/F1 when the metric
    predicts correctness. Zero-variance series report r = 0 with the
    degenerate flag set.
    """
    if not records:
        raise EvalError("no records")
    em_sums = np.zeros(N_BINS)
    f1_sums = np.zeros(N_BINS)
    counts = np.zeros(N_BINS, dtype=np.int64)
    for record in records:
        if len(record.per_candidate) < N_BINS:
            raise EvalError(
                f"query {record.query_id!r} has {len(record.per_candidate)} "
                f"candidates, need at least {N_BINS}"
            )
        ranked = _ranked_worst_first(record, metric_name, orientation)
        for b, chunk in enumerate(np.array_split(np.arange(len(ranked)), N_BINS)):
            for idx in chunk:
                cand = ranked[int(idx)]
                em_sums[b] += cand.em
                f1_sums[b] += cand.f1
                counts[b] += 1
    mean_em = em_sums / counts
    mean_f1 = f1_sums / counts
    bin_idx = np.arange(N_BINS, dtype=np.float64)
    pcc_em, degen_em = pearson(bin_idx, mean_em)
    pcc_f1, degen_f1 = pearson(bin_idx, mean_f1)
    bins = tuple(
        BinStats(mean_em=float(mean_em[b]), mean_f1=float(mean_f1[b]), count=int(counts[b]))
        for b in range(N_BINS)
    )
    return BinReport(
        metric_name=metric_name,
        bins=bins,
        pcc_em=pcc_em,
        pcc_f1=pcc_f1,
        degenerate_em=degen_em,
        degenerate_f1=degen_f1,
    )


def pairwise_auroc(
    records: Sequence[QaRecord], metric_name: str, orientation: Orientation
) -> float:
    """Fraction of within-query (correct, incorrect) pairs the metric orders right.

    Positive = em 1, negative = em 0; ties count 0.5. Equivalent to the
    Mann-Whitney statistic pooled over queries.
    """
    wins = 0.0
    total = 0
    for record in records:
        pos = [c for c in record.per_candidate if c.em == 1]
        neg = [c for c in record.per_candidate if c.em == 0]
        for p in pos:
            sp = _metric_of(p, metric_name, record.query_id)
            for q in neg:
                sq = _metric_of(q, metric_name, record.query_id)
                if sp == sq:
                    wins += 0.5
                elif orientation is Orientation.LOWER_BETTER:
                    wins += 1.0 if sp < sq else 0.0
                else:
                    wins += 1.0 if sp > sq else 0.0
                total += 1
    if total == 0:
        raise EvalError("no (correct, incorrect) candidate pair in any record")
    return wins / total


def answer_entropy(
    token_logprob_distributions: Sequence[Sequence[float]], base: str = "nats"
) -> float:
    """Mean Shannon entropy across positions.

    Each inner list is a log-probability distribution (log base e) whose
    probabilities must sum to 1 within 1e-4; -inf entries mark zero-mass
    outcomes and contribute nothing. base selects nats (default) or bits.
    """
    if base not in ("nats", "bits"):
        raise DataError(f"base must be 'nats' or 'bits', got {base!r}")
    if not token_logprob_distributions:
        raise EmptySequenceError("no distributions")
    entropies = []
    for i, logprobs in enumerate(token_logprob_distributions):
        lp = np.asarray(logprobs, dtype=np.float64)
        if lp.size == 0 or np.any(np.isnan(lp)) or np.any(lp > 0.0):
            raise DataError(f"distribution {i}: entries must be log-probabilities <= 0")
        p = np.exp(lp)
        total = float(p.sum())
        if abs(total - 1.0) > 1e-4:
            raise DataError(f"distribution {i}: probabilities sum to {total:.6f}, not 1")
        mask = p > 0.0
        h = -float(np.sum(p[mask] * lp[mask]))
        entropies.append(h)
    mean_nats = sum(entropies) / len(entropies)
    return mean_nats / math.log(2) if base == "bits" else mean_nats


def qa_record_from_dict(doc: dict) -> QaRecord:
    """Parse one record: {"query_id", "prediction", "gold_answers",
    "per_candidate": [{"candidate_id", "metric_scores", "em", "f1", "prediction"?}]}.
    """
    def outcome(c: dict) -> CandidateOutcome:
        em = int(c.get("em", 0))
        f1 = float(c.get("f1", 0.0))
        if em not in (0, 1):
            raise EvalError(f"candidate {c.get('candidate_id')!r}: em must be 0 or 1, got {em}")
        if not (0.0 <= f1 <= 1.0):
            raise EvalError(f"candidate {c.get('candidate_id')!r}: f1 must be in [0, 1], got {f1}")
        return CandidateOutcome(
            candidate_id=c["candidate_id"],
            metric_scores={k: float(v) for k, v in c.get("metric_scores", {}).items()},
            em=em,
            f1=f1,
            prediction=c.get("prediction"),
        )

    try:
        per_candidate = tuple(outcome(c) for c in doc.get("per_candidate", []))
        return QaRecord(
            query_id=doc["query_id"],
            prediction=doc.get("prediction", ""),
            gold_answers=tuple(doc.get("gold_answers", ())),
            per_candidate=per_candidate,
        )
    except (KeyError, TypeError, ValueError) as e:
        raise EvalError(f"malformed QA record: {e}") from e


def qa_record_to_dict(record: QaRecord) -> dict:
    doc = {
        "query_id": record.query_id,
        "prediction": record.prediction,
        "gold_answers": list(record.gold_answers),
        "per_candidate": [],
    }
    for c in record.per_candidate:
        entry = {
            "candidate_id": c.candidate_id,
            "metric_scores": dict(sorted(c.metric_scores.items())),
            "em": c.em,
            "f1": c.f1,
        }
        if c.prediction is not None:
            entry["prediction"] = c.prediction
        doc["per_candidate"].append(entry)
    return doc
