"""Synthetic corpora with a planted alignment signal.

The generator plants a strong k-dimensional left singular block inside a
reader matrix W, then builds candidates whose token states mix an in-span
part with orthogonal noise of per-candidate magnitude eps:

    row_i = z_i @ Q_strong^T + noise_scale * eps * (y_i @ Q_perp^T)

so a candidate's out-of-subspace residual grows with its eps. Correctness is
Bernoulli with success probability decreasing in eps, while token log-probs
are i.i.d. noise independent of everything else. A residual-based score
therefore predicts correctness by construction and perplexity does not,
which is exactly the qualitative pattern the metric evaluation is meant to
surface.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .evaluation import CandidateOutcome, QaRecord, ppl
from .pooling import PoolingStrategy
from .scoring import score_candidate
from .subspace import PrincipalSubspace, build_subspace
from .tensor_io import CandidateManifest, CandidateRef, write_manifest, write_tensor


@dataclass(frozen=True)
class CorpusParams:
    n_queries: int = 500
    n_candidates: int = 10
    dim: int = 32
    k_strong: int = 8
    n_tokens: int = 24
    noise_scale: float = 3.0
    variance_ratio: float = 0.95
    seed: int = 0


def make_reader_matrix(
    params: CorpusParams, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """D x 4D matrix with k_strong dominant left singular directions.

    Returns (W, Q) where Q is the planted orthonormal frame: columns before
    k_strong span the strong block, columns after it span its complement.
    """
    d = params.dim
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    v, _ = np.linalg.qr(rng.standard_normal((4 * d, d)))
    sv = np.concatenate(
        [np.linspace(10.0, 8.0, params.k_strong), np.full(d - params.k_strong, 0.05)]
    )
    return ((q * sv) @ v.T).astype(np.float32), q


def make_candidate_states(
    q: np.ndarray, k_strong: int, eps: float, n_tokens: int, noise_scale: float,
    rng: np.random.Generator,
) -> np.ndarray:
    d = q.shape[0]
    z = rng.standard_normal((n_tokens, k_strong))
    y = rng.standard_normal((n_tokens, d - k_strong))
    states = z @ q[:, :k_strong].T + noise_scale * eps * (y @ q[:, k_strong:].T)
    return states.astype(np.float32)


def make_alignment_records(
    params: CorpusParams,
) -> tuple[list[QaRecord], PrincipalSubspace]:
    """Records scored with the real residual path plus an independent PPL column."""
    rng = np.random.default_rng(params.seed)
    w, q = make_reader_matrix(params, rng)
    sub = build_subspace(w, params.variance_ratio, seed=params.seed)
    records = []
    for qi in range(params.n_queries):
        outcomes = []
        for ci in range(params.n_candidates):
            eps = float(rng.uniform(0.0, 1.0))
            states = make_candidate_states(
                q, params.k_strong, eps, params.n_tokens, params.noise_scale, rng
            )
            sps_val = score_candidate(sub, states, PoolingStrategy.MAX)
            logprobs = rng.uniform(-3.0, -0.2, params.n_tokens).tolist()
            p_correct = float(np.clip(0.92 - 0.84 * eps, 0.05, 0.95))
            em = int(rng.random() < p_correct)
            f1 = em * (0.7 + 0.3 * rng.random()) + (1 - em) * 0.25 * rng.random()
            outcomes.append(
                CandidateOutcome(
                    candidate_id=f"c{ci}",
                    metric_scores={"sps": sps_val, "ppl": ppl(logprobs)},
                    em=em,
                    f1=float(f1),
                )
            )
        records.append(
            QaRecord(
                query_id=f"q{qi:04d}",
                prediction="",
                gold_answers=("synthetic",),
                per_candidate=tuple(outcomes),
            )
        )
    return records, sub


def make_demo_corpus(out_dir, params: CorpusParams) -> dict:
    """Write W.spsf plus per-query manifests and state tensors for the CLI demo.

    Candidate 0 is the "initial" summary per manifest; eps levels are drawn
    independently per candidate, so initial quality varies across queries the
    way the filter expects. Returns a small index of what was written.
    """
    out_dir = os.fspath(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(params.seed)
    w, q = make_reader_matrix(params, rng)
    write_tensor(w, os.path.join(out_dir, "W.spsf"))
    manifest_dir = os.path.join(out_dir, "manifests")
    states_dir = os.path.join(out_dir, "states")
    os.makedirs(manifest_dir, exist_ok=True)
    os.makedirs(states_dir, exist_ok=True)
    for qi in range(params.n_queries):
        query_id = f"q{qi:04d}"
        refs = []
        for ci in range(params.n_candidates):
            eps = float(rng.uniform(0.0, 1.0))
            states = make_candidate_states(
                q, params.k_strong, eps, params.n_tokens, params.noise_scale, rng
            )
            rel = os.path.join("..", "states", f"{query_id}_c{ci}.spsf")
            write_tensor(states, os.path.join(states_dir, f"{query_id}_c{ci}.spsf"))
            refs.append(
                CandidateRef(
                    candidate_id=f"c{ci}",
                    states_path=rel,
                    text=f"synthetic summary {ci} for {query_id}",
                    token_logprobs=tuple(
                        float(v) for v in rng.uniform(-3.0, -0.2, params.n_tokens)
                    ),
                )
            )
        manifest = CandidateManifest(
            query_id=query_id,
            candidates=tuple(refs),
            layer_tag="penultimate",
            gold_answers=("synthetic",),
            base_dir=manifest_dir,
        )
        write_manifest(manifest, os.path.join(manifest_dir, f"{query_id}.json"))
    return {
        "weights": os.path.join(out_dir, "W.spsf"),
        "manifest_dir": manifest_dir,
        "n_queries": params.n_queries,
        "n_candidates": params.n_candidates,
    }
