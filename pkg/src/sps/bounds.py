"""Bounder vectors, the hyper-rectangle partial order, and randomized checks
of their guarantees.

A bounder of a sequence dominates every row coordinatewise; the coordinatewise
max is the minimal such vector and is what this module canonicalizes on. The
checks are executable evidence: subsequences and convex resamples never escape
the bounder, and bounders of two i.i.d. samples from one distribution draw
together as the sample size grows, while the mean-to-bounder norm ratio decays.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import EmptySequenceError, ShapeError


@dataclass(frozen=True)
class BounderVector:
    values: np.ndarray  # [D] float32
    source_length: int


class OrderRelation(enum.Enum):
    PRECEDES = "precedes"
    SUCCEEDS = "succeeds"
    INCOMPARABLE = "incomparable"
    EQUAL = "equal"


def bounder(states: np.ndarray) -> BounderVector:
    """Coordinatewise maximum over rows (the minimal bounder)."""
    states = np.asarray(states)
    if states.ndim != 2:
        raise ShapeError(f"states must be rank 2, got rank {states.ndim}")
    if states.shape[0] == 0:
        raise EmptySequenceError("states has no rows")
    return BounderVector(
        values=states.max(axis=0).astype(np.float32), source_length=states.shape[0]
    )


def compare(a: BounderVector, b: BounderVector) -> OrderRelation:
    """Hyper-rectangle order between two bounders."""
    va, vb = a.values, b.values
    if va.shape != vb.shape:
        raise ShapeError(f"dimension mismatch: {va.shape} vs {vb.shape}")
    le = bool(np.all(va <= vb))
    ge = bool(np.all(va >= vb))
    if le and ge:
        return OrderRelation.EQUAL
    if le:
        return OrderRelation.PRECEDES
    if ge:
        return OrderRelation.SUCCEEDS
    return OrderRelation.INCOMPARABLE


@dataclass(frozen=True)
class CheckReport:
    name: str
    trials: int
    violations: int
    first_counterexample: Optional[dict] = None

    @property
    def passed(self) -> bool:
        return self.violations == 0


_CHUNK = 20_000


def check_subsequence_bound(
    states: np.ndarray,
    trials: int,
    seed: int,
    reference: Optional[np.ndarray] = None,
) -> CheckReport:
    """Random non-empty subsequences must never escape the full bounder.

    Comparison is exact: a subset max cannot exceed the set max in fp.
    `reference` overrides the computed bounder (harness hook for verifying
    that violations are actually detected).
    """
    states = np.asarray(states, dtype=np.float64)
    if states.ndim != 2 or states.shape[0] < 2:
        raise ShapeError("need a rank-2 states matrix with at least 2 rows")
    t = states.shape[0]
    full = states.max(axis=0) if reference is None else np.asarray(reference, np.float64)
    rng = np.random.default_rng(seed)
    violations = 0
    first = None
    done = 0
    while done < trials:
        chunk = min(_CHUNK, trials - done)
        mask = rng.random((chunk, t)) < 0.5
        empty = ~mask.any(axis=1)
        if empty.any():
            mask[empty, rng.integers(0, t, size=int(empty.sum()))] = True
        sub = np.where(mask[:, :, None], states[None, :, :], -np.inf).max(axis=1)
        bad = (sub > full[None, :]).any(axis=1)
        if bad.any():
            violations += int(bad.sum())
            if first is None:
                i = int(np.flatnonzero(bad)[0])
                coord = int(np.flatnonzero(sub[i] > full)[0])
                first = {
                    "trial": done + i,
                    "coordinate": coord,
                    "subsequence_value": float(sub[i, coord]),
                    "bounder_value": float(full[coord]),
                }
        done += chunk
    return CheckReport(
        name="subsequence_bound", trials=trials, violations=violations, first_counterexample=first
    )


def check_convex_hull_bound(
    states: np.ndarray,
    samples: int,
    seed: int,
    reference: Optional[np.ndarray] = None,
    rel_tol: float = 1e-12,
) -> CheckReport:
    """Convex combinations of the rows must stay under the bounder.

    Weights are flat Dirichlet. The comparison allows rel_tol slack: the
    weighted sum can exceed the true max by O(T * eps) rounding even though
    the real-arithmetic statement is exact.
    """
    states = np.asarray(states, dtype=np.float64)
    if states.ndim != 2 or states.shape[0] < 1:
        raise ShapeError("need a rank-2 states matrix with at least 1 row")
    t = states.shape[0]
    full = states.max(axis=0) if reference is None else np.asarray(reference, np.float64)
    slack = rel_tol * np.maximum(1.0, np.abs(full))
    rng = np.random.default_rng(seed)
    violations = 0
    first = None
    done = 0
    while done < samples:
        chunk = min(_CHUNK, samples - done)
        weights = rng.gamma(1.0, size=(chunk, t))
        weights /= weights.sum(axis=1, keepdims=True)
        points = weights @ states
        bad = (points > (full + slack)[None, :]).any(axis=1)
        if bad.any():
            violations += int(bad.sum())
            if first is None:
                i = int(np.flatnonzero(bad)[0])
                coord = int(np.flatnonzero(points[i] > full + slack)[0])
                first = {
                    "trial": done + i,
                    "coordinate": coord,
                    "sample_value": float(points[i, coord]),
                    "bounder_value": float(full[coord]),
                }
        done += chunk
    return CheckReport(
        name="convex_hull_bound", trials=samples, violations=violations, first_counterexample=first
    )


@dataclass(frozen=True)
class ConvergenceReport:
    dim: int
    sizes: tuple[int, ...]
    trials: int
    medians: tuple[float, ...]  # median sup-norm gap between twin bounders

    @property
    def non_increasing(self) -> bool:
        return all(b <= a for a, b in zip(self.medians, self.medians[1:]))


def bounder_convergence(
    dim: int, sizes: Sequence[int], trials: int, seed: int
) -> ConvergenceReport:
    """Median sup-norm gap between bounders of twin Gaussian samples, per size.

    For each size m, two independent standard-normal samples of m points are
    drawn and the sup-norm of their bounder difference recorded; the medians
    should shrink as m grows. Each (size, trial) cell gets its own stream via
    SeedSequence([seed, size_index, trial]) so results are reproducible and
    order-independent.
    """
    medians = []
    for si, m in enumerate(sizes):
        gaps = np.empty(trials)
        for tr in range(trials):
            rng = np.random.default_rng([seed, si, tr])
            a = rng.standard_normal((m, dim))
            b = rng.standard_normal((m, dim))
            gaps[tr] = np.abs(a.max(axis=0) - b.max(axis=0)).max()
        medians.append(float(np.median(gaps)))
    return ConvergenceReport(
        dim=dim, sizes=tuple(int(m) for m in sizes), trials=trials, medians=tuple(medians)
    )


@dataclass(frozen=True)
class RatioReport:
    dim: int
    sigma: float
    sizes: tuple[int, ...]
    trials: int
    mean_ratios: tuple[float, ...]  # mean of ||mean-pool||_2 / ||bounder||_2
    fit_coefficient: Optional[float]  # a in R(m) ~ a / sqrt(2 ln m), sizes >= 2

    @property
    def strictly_decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.mean_ratios, self.mean_ratios[1:]))

    def fitted(self) -> tuple[Optional[float], ...]:
        if self.fit_coefficient is None:
            return tuple(None for _ in self.sizes)
        return tuple(
            self.fit_coefficient / math.sqrt(2.0 * math.log(m)) if m >= 2 else None
            for m in self.sizes
        )


def ratio_curve(
    dim: int, sigma: float, sizes: Sequence[int], trials: int, seed: int
) -> RatioReport:
    """Mean of R = ||sample mean|| / ||bounder|| for N(0, sigma^2 I) samples.

    R equals 1 at m = 1 and decays as the bounder grows like the Gaussian
    max (~ sigma * sqrt(2 ln m)) while the mean shrinks. The decay curve is
    least-squares fitted against 1/sqrt(2 ln m) for inspection only; the
    asserted property is monotone decrease. Seeding matches
    bounder_convergence.
    """
    if not (sigma > 0):
        raise ShapeError(f"sigma must be > 0, got {sigma}")
    means = []
    for si, m in enumerate(sizes):
        ratios = np.empty(trials)
        for tr in range(trials):
            rng = np.random.default_rng([seed, si, tr])
            x = sigma * rng.standard_normal((m, dim))
            mean_norm = float(np.linalg.norm(x.mean(axis=0)))
            bound_norm = float(np.linalg.norm(x.max(axis=0)))
            ratios[tr] = mean_norm / bound_norm if bound_norm > 0 else np.nan
        means.append(float(np.nanmean(ratios)))
    predictors = np.array(
        [1.0 / math.sqrt(2.0 * math.log(m)) if m >= 2 else np.nan for m in sizes]
    )
    mask = ~np.isnan(predictors)
    if mask.sum() >= 1:
        p = predictors[mask]
        r = np.asarray(means)[mask]
        coeff = float((p @ r) / (p @ p))
    else:
        coeff = None
    return RatioReport(
        dim=dim,
        sigma=sigma,
        sizes=tuple(int(m) for m in sizes),
        trials=trials,
        mean_ratios=tuple(means),
        fit_coefficient=coeff,
    )
