import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sps import (
    OrderRelation,
    ShapeError,
    bounder,
    bounder_convergence,
    check_convex_hull_bound,
    check_subsequence_bound,
    compare,
    ratio_curve,
)


def bv(*rows):
    return bounder(np.array(rows, dtype=np.float32))


def test_bounder_definitions():
    np.testing.assert_array_equal(bv([1, 5], [3, 2]).values, [3, 5])
    np.testing.assert_array_equal(bv([4, -1, 0]).values, [4, -1, 0])
    np.testing.assert_array_equal(bv([-1, -2], [-3, -1]).values, [-1, -1])
    assert bv([1, 5], [3, 2]).source_length == 2


def test_compare_cases():
    assert compare(bv([1, 5]), bv([3, 5])) is OrderRelation.PRECEDES
    assert compare(bv([3, 5]), bv([1, 5])) is OrderRelation.SUCCEEDS
    assert compare(bv([3, 1]), bv([1, 3])) is OrderRelation.INCOMPARABLE
    assert compare(bv([2, 2]), bv([2, 2])) is OrderRelation.EQUAL


def test_compare_dimension_mismatch():
    with pytest.raises(ShapeError):
        compare(bv([1, 2]), bv([1, 2, 3]))


small_vec = st.lists(st.integers(-3, 3), min_size=2, max_size=4).map(
    lambda xs: np.array(xs, dtype=np.float32)
)


@settings(max_examples=300, deadline=None)
@given(a=small_vec, b=small_vec, c=small_vec)
def test_partial_order_axioms(a, b, c):
    from sps.bounds import BounderVector

    n = min(len(a), len(b), len(c))
    va = BounderVector(a[:n], 1)
    vb = BounderVector(b[:n], 1)
    vc = BounderVector(c[:n], 1)
    # reflexivity
    assert compare(va, va) is OrderRelation.EQUAL
    # antisymmetry: PRECEDES one way forces SUCCEEDS the other
    rel_ab, rel_ba = compare(va, vb), compare(vb, va)
    pairs = {
        OrderRelation.PRECEDES: OrderRelation.SUCCEEDS,
        OrderRelation.SUCCEEDS: OrderRelation.PRECEDES,
        OrderRelation.EQUAL: OrderRelation.EQUAL,
        OrderRelation.INCOMPARABLE: OrderRelation.INCOMPARABLE,
    }
    assert rel_ba is pairs[rel_ab]
    # transitivity of the reflexive order
    weak = (OrderRelation.PRECEDES, OrderRelation.EQUAL)
    if rel_ab in weak and compare(vb, vc) in weak:
        assert compare(va, vc) in weak


def test_bounder_of_concat_is_max_of_bounders():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((5, 4)).astype(np.float32)
    b = rng.standard_normal((3, 4)).astype(np.float32)
    joint = bounder(np.vstack([a, b]))
    np.testing.assert_array_equal(
        joint.values, np.maximum(bounder(a).values, bounder(b).values)
    )


def test_subsequence_check_passes():
    rng = np.random.default_rng(1)
    states = rng.standard_normal((32, 6))
    report = check_subsequence_bound(states, 5000, seed=3)
    assert report.passed and report.trials == 5000


def test_subsequence_check_detects_lowered_bounder():
    rng = np.random.default_rng(2)
    states = rng.standard_normal((16, 4))
    ref = states.max(axis=0)
    ref[1] -= 0.25  # flip one coordinate down
    report = check_subsequence_bound(states, 5000, seed=3, reference=ref)
    assert not report.passed
    assert report.first_counterexample["coordinate"] == 1


def test_full_subsequence_counts_as_pass():
    states = np.array([[1.0, 2.0], [0.5, 3.0]])
    # every trial uses some subset; equality with the full bounder is fine
    report = check_subsequence_bound(states, 500, seed=0)
    assert report.passed


def test_convex_hull_check_passes():
    rng = np.random.default_rng(4)
    states = rng.standard_normal((10, 5))
    report = check_convex_hull_bound(states, 5000, seed=5)
    assert report.passed


def test_convex_hull_check_detects_outside_reference():
    rng = np.random.default_rng(6)
    states = rng.standard_normal((10, 5))
    ref = states.mean(axis=0) - 1.0  # convex points exceed this
    report = check_convex_hull_bound(states, 2000, seed=7, reference=ref)
    assert not report.passed


def test_convex_one_hot_recovers_vertex():
    # a single row: every convex sample equals that row, equality allowed
    states = np.array([[2.0, -1.0, 0.5]])
    report = check_convex_hull_bound(states, 1000, seed=8)
    assert report.passed


def test_convergence_medians_shrink():
    report = bounder_convergence(dim=2, sizes=[100, 10_000], trials=60, seed=42)
    assert report.medians[1] < report.medians[0]
    assert report.non_increasing


def test_convergence_equal_sizes_close():
    report = bounder_convergence(dim=2, sizes=[500, 500], trials=80, seed=9)
    a, b = report.medians
    assert abs(a - b) < 0.25 * max(a, b)


def test_convergence_dim1_trend():
    report = bounder_convergence(dim=1, sizes=[100, 1000, 10_000], trials=60, seed=10)
    assert report.non_increasing


def test_ratio_single_point_is_one():
    report = ratio_curve(dim=4, sigma=2.0, sizes=[1], trials=20, seed=11)
    assert report.mean_ratios[0] == pytest.approx(1.0, abs=1e-12)


def test_ratio_strictly_decreasing():
    report = ratio_curve(dim=8, sigma=1.0, sizes=[10, 100, 1000], trials=60, seed=12)
    assert report.strictly_decreasing
    assert report.fit_coefficient is not None and report.fit_coefficient > 0


def test_ratio_scale_invariant_in_sigma():
    a = ratio_curve(dim=6, sigma=0.1, sizes=[50, 500], trials=80, seed=13)
    b = ratio_curve(dim=6, sigma=10.0, sizes=[50, 500], trials=80, seed=13)
    # same seeds, scaled samples: the ratio distribution does not move
    for ra, rb in zip(a.mean_ratios, b.mean_ratios):
        assert ra == pytest.approx(rb, rel=1e-9)
