"""Score candidates by their out-of-subspace residual and pick the best one.

Lower is better everywhere in this package: a small score means the pooled
summary vector lies almost entirely inside the reader's retained subspace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptySetError
from .pooling import PoolingStrategy, pool
from .subspace import PrincipalSubspace, residual_norm
from .tensor_io import CandidateSet


@dataclass(frozen=True)
class ScoredCandidate:
    candidate_id: str
    sps: float
    pooled_norm: float  # L2 norm of the pooled vector
    manifest_index: int


def score_candidate(
    s: PrincipalSubspace, states: np.ndarray, strategy: PoolingStrategy
) -> float:
    """Residual norm of the pooled state sequence; finite and >= 0."""
    return residual_norm(s, pool(states, strategy))


def rank_candidates(
    s: PrincipalSubspace, candidate_set: CandidateSet, strategy: PoolingStrategy
) -> tuple[int, list[ScoredCandidate]]:
    """Score every candidate and select the argmin.

    Scores come back in manifest order; ties break toward the lowest
    manifest index, so the result is deterministic.
    """
    if not candidate_set.candidates:
        raise EmptySetError(f"query {candidate_set.query_id!r} has no candidates")
    scores = []
    for i, cand in enumerate(candidate_set.candidates):
        pooled = pool(cand.states, strategy)
        pooled64 = pooled.astype(np.float64)
        scores.append(
            ScoredCandidate(
                candidate_id=cand.candidate_id,
                sps=residual_norm(s, pooled),
                pooled_norm=math.sqrt(float(pooled64 @ pooled64)),
                manifest_index=i,
            )
        )
    selected = min(range(len(scores)), key=lambda i: (scores[i].sps, i))
    return selected, scores
