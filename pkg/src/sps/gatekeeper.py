"""Skip-vs-sample controller: calibrate the ratio threshold, then decide per query.

High-ratio initial summaries (concentrated, stable) keep their first candidate
without scoring; the rest go through full candidate ranking.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import CalibrationError, DataError, DegenerateInputError
from .pooling import PoolingStrategy, norm_ratio
from .scoring import ScoredCandidate, rank_candidates
from .subspace import PrincipalSubspace
from .tensor_io import CandidateManifest, load_candidate_set, load_candidate_states


class ThresholdMethod(enum.Enum):
    NEAREST_RANK = "nearest_rank"


@dataclass(frozen=True)
class Threshold:
    value: float
    percentile: float
    calibration_size: int
    method: ThresholdMethod = ThresholdMethod.NEAREST_RANK


@dataclass(frozen=True)
class Decision:
    """Controller outcome for one query.

    sampled == False (and error is None) means the initial candidate was kept
    untouched and no scores exist. A set `error` marks a skipped query whose
    ratio could not be computed.
    """

    query_id: str
    ratio: float
    sampled: bool
    selected_candidate_id: Optional[str]
    scores: Optional[tuple[ScoredCandidate, ...]] = None
    error: Optional[str] = None


def calibrate_threshold(validation_ratios: Sequence[float], percentile: float) -> Threshold:
    """Nearest-rank percentile of the validation ratio distribution.

    percentile 0.70 yields the value above which ~30% of ratios lie. The rank
    index is ceil(p*n) (1-based), computed with a 1e-9 slack so decimal
    percentiles that hit an integer rank exactly do not round up.
    """
    n = len(validation_ratios)
    if n == 0:
        raise CalibrationError("cannot calibrate on an empty ratio list")
    if not (0.0 < percentile < 1.0):
        raise CalibrationError(f"percentile must be in (0, 1), got {percentile}")
    ratios = np.asarray(validation_ratios, dtype=np.float64)
    if not np.all(np.isfinite(ratios)):
        raise DataError("validation ratios contain non-finite values")
    rank = min(n, max(1, math.ceil(percentile * n - 1e-9)))
    value = float(np.sort(ratios)[rank - 1])
    return Threshold(value=value, percentile=percentile, calibration_size=n)


def decide(
    query: CandidateManifest,
    s: PrincipalSubspace,
    t: Threshold,
    strategy: PoolingStrategy,
) -> Decision:
    """Apply the filter to the initial candidate, sampling-and-selecting if it fails.

    The ratio comes from candidate 0 only. ratio > threshold keeps candidate 0
    as-is; otherwise every candidate is scored and the argmin wins. Degenerate
    initial states produce an error record instead of raising.
    """
    initial_states = load_candidate_states(query, 0)
    try:
        ratio = norm_ratio(initial_states)
    except DegenerateInputError as e:
        return Decision(
            query_id=query.query_id,
            ratio=float("nan"),
            sampled=False,
            selected_candidate_id=None,
            error=f"degenerate input: {e}",
        )
    if ratio > t.value:
        return Decision(
            query_id=query.query_id,
            ratio=ratio,
            sampled=False,
            selected_candidate_id=query.candidates[0].candidate_id,
        )
    candidate_set = load_candidate_set(query)
    selected, scores = rank_candidates(s, candidate_set, strategy)
    return Decision(
        query_id=query.query_id,
        ratio=ratio,
        sampled=True,
        selected_candidate_id=scores[selected].candidate_id,
        scores=tuple(scores),
    )
