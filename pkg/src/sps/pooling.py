"""Collapse a token-state sequence [T, D] into one vector, plus the filter ratio."""

from __future__ import annotations

import enum
import math

import numpy as np

from .errors import DegenerateInputError, EmptySequenceError, ShapeError


class PoolingStrategy(enum.Enum):
    MAX = "max"
    MEAN = "mean"
    LAST = "last"

    @classmethod
    def parse(cls, name: str) -> "PoolingStrategy":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown pooling strategy {name!r}") from None


def _check_states(states: np.ndarray) -> np.ndarray:
    states = np.asarray(states)
    if states.ndim != 2:
        raise ShapeError(f"states must be rank 2 [T, D], got rank {states.ndim}")
    if states.shape[0] == 0:
        raise EmptySequenceError("states has no rows")
    return states


def pool(states: np.ndarray, strategy: PoolingStrategy) -> np.ndarray:
    """Per-dimension max, arithmetic mean, or the final row."""
    states = _check_states(states)
    if strategy is PoolingStrategy.MAX:
        return states.max(axis=0)
    if strategy is PoolingStrategy.MEAN:
        return states.mean(axis=0)
    if strategy is PoolingStrategy.LAST:
        return states[-1].copy()
    raise ValueError(f"unhandled strategy {strategy!r}")


def norm_ratio(states: np.ndarray) -> float:
    """L2 norm of the mean-pooled vector over L1 norm of the max-pooled vector.

    Higher values mark concentrated, stable sequences that skip resampling;
    the quantity is invariant to positive rescaling of the states.
    """
    states = _check_states(states)
    mean_vec = states.mean(axis=0, dtype=np.float64)
    max_vec = states.max(axis=0).astype(np.float64)
    l1_max = float(np.abs(max_vec).sum())
    if l1_max == 0.0:
        raise DegenerateInputError("max-pooled vector is all-zero")
    l2_mean = math.sqrt(float(mean_vec @ mean_vec))
    return l2_mean / l1_max
