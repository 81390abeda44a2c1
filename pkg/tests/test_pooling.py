import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sps import DegenerateInputError, EmptySequenceError, PoolingStrategy, norm_ratio, pool

STATES = np.array([[1, -2], [0, 3]], dtype=np.float32)


def test_pool_definitions():
    np.testing.assert_array_equal(pool(STATES, PoolingStrategy.MAX), [1, 3])
    np.testing.assert_array_equal(pool(STATES, PoolingStrategy.MEAN), [0.5, 0.5])
    np.testing.assert_array_equal(pool(STATES, PoolingStrategy.LAST), [0, 3])


def test_empty_sequence():
    empty = np.zeros((0, 3), dtype=np.float32)
    with pytest.raises(EmptySequenceError):
        pool(empty, PoolingStrategy.MAX)
    with pytest.raises(EmptySequenceError):
        norm_ratio(empty)


def test_norm_ratio_hand_value():
    # mean = (0.5, 0.5) -> L2 = sqrt(0.5); max = (1, 3) -> L1 = 4
    assert norm_ratio(STATES) == pytest.approx(math.sqrt(0.5) / 4, rel=1e-12)


def test_norm_ratio_single_token():
    assert norm_ratio(np.array([[1.0, 0.0]], dtype=np.float32)) == pytest.approx(1.0)


def test_norm_ratio_degenerate():
    with pytest.raises(DegenerateInputError):
        norm_ratio(np.zeros((3, 4), dtype=np.float32))


finite_states = arrays(
    np.float32,
    st.tuples(st.integers(1, 8), st.integers(1, 6)),
    elements=st.floats(-100, 100, width=32),
)


@settings(max_examples=150, deadline=None)
@given(states=finite_states)
def test_max_pool_dominates_every_row(states):
    pooled = pool(states, PoolingStrategy.MAX)
    assert (pooled[None, :] >= states).all()


@settings(max_examples=100, deadline=None)
@given(states=finite_states, seed=st.integers(0, 2**31 - 1))
def test_max_and_mean_are_permutation_invariant(states, seed):
    perm = np.random.default_rng(seed).permutation(states.shape[0])
    shuffled = states[perm]
    np.testing.assert_array_equal(
        pool(states, PoolingStrategy.MAX), pool(shuffled, PoolingStrategy.MAX)
    )
    np.testing.assert_allclose(
        pool(states, PoolingStrategy.MEAN), pool(shuffled, PoolingStrategy.MEAN),
        rtol=0, atol=1e-5,
    )


def test_last_token_is_order_sensitive():
    flipped = STATES[::-1]
    assert not np.array_equal(
        pool(STATES, PoolingStrategy.LAST), pool(flipped, PoolingStrategy.LAST)
    )


@settings(max_examples=100, deadline=None)
@given(states=finite_states, extra=finite_states)
def test_appending_rows_never_decreases_max(states, extra):
    if states.shape[1] != extra.shape[1]:
        extra = np.resize(extra, (extra.shape[0], states.shape[1]))
    combined = np.vstack([states, extra])
    assert (pool(combined, PoolingStrategy.MAX) >= pool(states, PoolingStrategy.MAX)).all()


def test_norm_ratio_scale_invariant_exact_for_pow2():
    rng = np.random.default_rng(0)
    states = rng.standard_normal((5, 7)).astype(np.float32)
    base = norm_ratio(states)
    for c in (2.0, 4.0, 0.5, 1024.0):
        assert norm_ratio((c * states).astype(np.float32)) == base


@settings(max_examples=100, deadline=None)
@given(c=st.floats(0.001, 1000), seed=st.integers(0, 2**31 - 1))
def test_norm_ratio_scale_invariant_general(c, seed):
    rng = np.random.default_rng(seed)
    states = rng.standard_normal((6, 5)).astype(np.float32)
    scaled = (c * states).astype(np.float32)
    assert norm_ratio(scaled) == pytest.approx(norm_ratio(states), rel=1e-5)
