"""Principal subspace of the reader's representation matrix.

The subspace is the span of the top-k left singular vectors of W (D x M),
with k picked by a retention rule over the singular spectrum. Scoring uses
the orthogonal projector onto that span, so the residual of a vector x is

    sqrt(max(0, ||x||^2 - ||B^T x||^2))        B = basis, B^T B = I_k

which equals ||(I - B B^T) x||_2 without ever forming the D x D projector.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, DataError, ShapeError, StaleSubspaceError
from .tensor_io import fingerprint_tensor, read_tensor, write_tensor

RETENTION_RULES = ("variance", "sigma", "count")

# exact dense SVD below this; randomized range finder above
EXACT_CUTOFF = 512
ORTHONORMALITY_TOL = 1e-5


@dataclass(frozen=True)
class PrincipalSubspace:
    """Orthonormal basis of the retained subspace plus spectrum bookkeeping.

    basis: [D, k], orthonormal columns (top-k left singular vectors,
        sign-canonicalized so the largest-magnitude entry of each column is
        positive). Kept float64 in memory so the residual formula's
        cancellation stays benign; serialized as float32, so a loaded basis
        carries ~1e-7 orthonormality defect (still far inside tolerance).
    singular_values: float64, non-increasing. Full spectrum (length min(D, M))
        on the exact path; leading part only (length >= k) when the
        decomposition was randomized.
    retained_variance: achieved cumulative sigma^2 fraction at k.
    """

    basis: np.ndarray
    singular_values: np.ndarray
    retained_variance: float
    k: int
    source_fingerprint: str
    centered: bool = False

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def validate(self) -> None:
        b = self.basis
        if b.ndim != 2 or b.shape[1] != self.k:
            raise ShapeError(f"basis shape {b.shape} inconsistent with k={self.k}")
        gram = b.T.astype(np.float64) @ b.astype(np.float64)
        err = float(np.abs(gram - np.eye(self.k)).max())
        if err > ORTHONORMALITY_TOL:
            raise DataError(f"basis columns not orthonormal (max deviation {err:.3e})")
        s = self.singular_values
        if np.any(s < 0) or np.any(np.diff(s) > 0):
            raise DataError("singular values must be non-increasing and >= 0")
        if not (1 <= self.k <= len(s)):
            raise DataError(f"k={self.k} out of range for {len(s)} singular values")


def _pick_k(singular_values: np.ndarray, ratio: float, rule: str) -> int:
    """Smallest k whose cumulative retention reaches ratio under the given rule."""
    n = len(singular_values)
    if rule == "count":
        return max(1, min(n, math.ceil(ratio * n)))
    if rule == "variance":
        weights = singular_values.astype(np.float64) ** 2
    elif rule == "sigma":
        weights = singular_values.astype(np.float64)
    else:
        raise ConfigError(f"unknown retention rule {rule!r}")
    total = float(weights.sum())
    if total <= 0.0:
        raise DataError("cannot pick a subspace of an all-zero matrix")
    cum = np.cumsum(weights) / total
    cum[-1] = max(cum[-1], 1.0)  # guard fp shortfall at ratio == 1.0
    return int(np.searchsorted(cum, ratio, side="left")) + 1


def _canonicalize_signs(u: np.ndarray) -> np.ndarray:
    idx = np.abs(u).argmax(axis=0)
    signs = np.sign(u[idx, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return u * signs


def _randomized_range_svd(
    w: np.ndarray, rank: int, seed: int, oversample: int = 10, power_iters: int = 4
) -> tuple[np.ndarray, np.ndarray]:
    """Seeded randomized SVD; returns (U[:, :rank], sigma[:rank])."""
    d, m = w.shape
    r = min(rank + oversample, min(d, m))
    rng = np.random.default_rng(seed)
    omega = rng.standard_normal((m, r))
    y = w @ omega
    q, _ = np.linalg.qr(y)
    for _ in range(power_iters):
        q, _ = np.linalg.qr(w.T @ q)
        q, _ = np.linalg.qr(w @ q)
    b = q.T @ w
    ub, s, _ = np.linalg.svd(b, full_matrices=False)
    u = q @ ub
    return u[:, :rank], s[:rank]


def build_subspace(
    w: np.ndarray,
    variance_ratio: float,
    seed: int = 0,
    rule: str = "variance",
    center: bool = False,
) -> PrincipalSubspace:
    """Decompose W (D x M) and retain the leading left singular subspace.

    k is the smallest count whose cumulative squared-singular-value share
    reaches variance_ratio (rule="variance", the default; "sigma" and "count"
    are alternatives). Deterministic given (w, variance_ratio, seed).
    """
    w = np.asarray(w)
    if w.ndim != 2:
        raise ShapeError(f"W must be rank 2, got rank {w.ndim}")
    d, m = w.shape
    if d < 1 or m < 2:
        raise ShapeError(f"W must be at least 1 x 2, got {d} x {m}")
    if not (0.0 < variance_ratio <= 1.0):
        raise ConfigError(f"variance_ratio must be in (0, 1], got {variance_ratio}")
    if rule not in RETENTION_RULES:
        raise ConfigError(f"rule must be one of {RETENTION_RULES}, got {rule!r}")
    if not np.all(np.isfinite(w)):
        raise DataError("W contains non-finite elements")

    fingerprint = fingerprint_tensor(np.asarray(w, dtype=np.float32))
    work = w.astype(np.float64)
    if center:
        work = work - work.mean(axis=1, keepdims=True)

    if min(d, m) <= EXACT_CUTOFF:
        u, s, _ = np.linalg.svd(work, full_matrices=False)
        k = _pick_k(s, variance_ratio, rule)
        basis = u[:, :k]
        sigma = s
    else:
        basis, sigma, k = _adaptive_randomized(work, variance_ratio, seed, rule)

    total_sq = float(np.sum(work**2))  # ||W||_F^2 == sum sigma^2
    retained = float(np.sum(sigma[:k] ** 2) / total_sq) if total_sq > 0 else 1.0
    return PrincipalSubspace(
        basis=np.ascontiguousarray(_canonicalize_signs(basis), dtype=np.float64),
        singular_values=np.asarray(sigma, dtype=np.float64),
        retained_variance=min(retained, 1.0),
        k=k,
        source_fingerprint=fingerprint,
        centered=center,
    )


def _adaptive_randomized(
    w: np.ndarray, ratio: float, seed: int, rule: str
) -> tuple[np.ndarray, np.ndarray, int]:
    """Grow the sketch rank until the retention rule is satisfiable."""
    n = min(w.shape)
    total_sq = float(np.sum(w**2))
    rank = min(64, n)
    attempt = 0
    while True:
        u, s = _randomized_range_svd(w, rank, seed=seed + attempt)
        if rule == "count":
            k = max(1, min(n, math.ceil(ratio * n)))
            if k <= rank:
                return u[:, :k], s, k
        elif rule == "variance":
            cum = np.cumsum(s.astype(np.float64) ** 2) / total_sq
            hit = np.searchsorted(cum, ratio, side="left")
            if hit < len(cum):
                k = int(hit) + 1
                return u[:, :k], s, k
        else:  # sigma rule has no exact total estimate; fall through to dense
            break
        if rank >= n:
            break
        rank = min(2 * rank, n)
        attempt += 1
    u, s, _ = np.linalg.svd(w, full_matrices=False)
    k = _pick_k(s, ratio, rule)
    return u[:, :k], s, k


def residual_norm(s: PrincipalSubspace, x: np.ndarray) -> float:
    """L2 norm of the component of x outside the subspace.

    Equal to ||(I - B B^T) x||_2; a negative radicand from f32 cancellation
    clamps to 0.
    """
    x = np.asarray(x)
    if x.ndim != 1:
        raise ShapeError(f"x must be rank 1, got rank {x.ndim}")
    if x.shape[0] != s.dim:
        raise ShapeError(f"x has length {x.shape[0]}, subspace dimension is {s.dim}")
    if not np.all(np.isfinite(x)):
        raise DataError("x contains non-finite elements")
    x64 = x.astype(np.float64)
    coeffs = s.basis.astype(np.float64).T @ x64
    r2 = float(x64 @ x64) - float(coeffs @ coeffs)
    return math.sqrt(max(0.0, r2))


BASIS_FILE = "basis.spsf"
SIDECAR_FILE = "subspace.json"


def save_subspace(s: PrincipalSubspace, path) -> None:
    """Write basis.spsf + subspace.json under the given directory."""
    path = os.fspath(path)
    os.makedirs(path, exist_ok=True)
    write_tensor(np.asarray(s.basis, dtype=np.float32), os.path.join(path, BASIS_FILE))
    sidecar = {
        "k": s.k,
        "retained_variance": s.retained_variance,
        "singular_values": [float(v) for v in s.singular_values],
        "source_fingerprint": s.source_fingerprint,
        "centered": s.centered,
    }
    with open(os.path.join(path, SIDECAR_FILE), "w", encoding="utf-8") as f:
        json.dump(sidecar, f, indent=2, sort_keys=True)
        f.write("\n")


def load_subspace(path, expected_fingerprint: Optional[str] = None) -> PrincipalSubspace:
    """Load a saved subspace and re-validate its invariants.

    Raises StaleSubspaceError when expected_fingerprint is supplied and does
    not match the stored source fingerprint.
    """
    path = os.fspath(path)
    basis = read_tensor(os.path.join(path, BASIS_FILE))
    with open(os.path.join(path, SIDECAR_FILE), "r", encoding="utf-8") as f:
        sidecar = json.load(f)
    sub = PrincipalSubspace(
        basis=basis,
        singular_values=np.asarray(sidecar["singular_values"], dtype=np.float64),
        retained_variance=float(sidecar["retained_variance"]),
        k=int(sidecar["k"]),
        source_fingerprint=sidecar["source_fingerprint"],
        centered=bool(sidecar.get("centered", False)),
    )
    if expected_fingerprint is not None and expected_fingerprint != sub.source_fingerprint:
        raise StaleSubspaceError(
            f"subspace at {path} was built from {sub.source_fingerprint[:12]}..., "
            f"expected {expected_fingerprint[:12]}..."
        )
    sub.validate()
    return sub
