"""Spectral-alignment scoring for retrieval summaries.

The library measures how much of a pooled summary representation lies outside
a reader model's principal subspace (lower is better), wraps that score in an
adaptive skip-vs-sample controller, and evaluates scoring metrics against QA
outcomes. Everything operates on .spsf tensor dumps and JSON manifests, so no
model is needed at scoring time.
"""

from .bounds import (
    BounderVector,
    OrderRelation,
    bounder,
    bounder_convergence,
    check_convex_hull_bound,
    check_subsequence_bound,
    compare,
    ratio_curve,
)
from .config import RunConfig, load_config
from .errors import (
    CalibrationError,
    ConfigError,
    DataError,
    DegenerateInputError,
    EmptySequenceError,
    EmptySetError,
    EvalError,
    FormatError,
    SchemaError,
    ShapeError,
    SpsError,
    StaleSubspaceError,
)
from .evaluation import (
    BinReport,
    CandidateOutcome,
    Orientation,
    QaRecord,
    answer_entropy,
    bin_pcc,
    em_f1,
    normalize_answer,
    pairwise_auroc,
    ppl,
)
from .gatekeeper import Decision, Threshold, calibrate_threshold, decide
from .pooling import PoolingStrategy, norm_ratio, pool
from .probes import ProbeConfig, ProbeResult, gap_score, generate_probes, select_probes
from .scoring import ScoredCandidate, rank_candidates, score_candidate
from .subspace import (
    PrincipalSubspace,
    build_subspace,
    load_subspace,
    residual_norm,
    save_subspace,
)
from .tensor_io import (
    Candidate,
    CandidateManifest,
    CandidateRef,
    CandidateSet,
    fingerprint_tensor,
    load_candidate_set,
    load_candidate_states,
    read_manifest,
    read_tensor,
    write_manifest,
    write_tensor,
)

__version__ = "0.1.0"
