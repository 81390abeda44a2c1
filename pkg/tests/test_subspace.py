import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sps import (
    ConfigError,
    DataError,
    ShapeError,
    StaleSubspaceError,
    build_subspace,
    load_subspace,
    residual_norm,
    save_subspace,
)


def singular_values_by_gram(w):
    """Independent reference: eigen-decomposition of the Gram matrix."""
    w = np.asarray(w, np.float64)
    d, m = w.shape
    g = w.T @ w if m <= d else w @ w.T
    evals = np.linalg.eigvalsh(g)[::-1]
    return np.sqrt(np.clip(evals, 0.0, None))


def test_identity_columns():
    w = np.array([[1, 0], [0, 1], [0, 0]], dtype=np.float32)
    s = build_subspace(w, 0.95)
    assert s.k == 2
    np.testing.assert_allclose(s.singular_values, [1.0, 1.0], atol=1e-12)
    # basis spans e1, e2: residual of e3 is full, residual of in-plane zero
    assert residual_norm(s, np.array([0, 0, 5], dtype=np.float32)) == pytest.approx(5.0)
    assert residual_norm(s, np.array([3, 4, 0], dtype=np.float32)) == pytest.approx(0.0, abs=1e-9)


def test_diagonal_k_selection():
    w = np.array([[2, 0], [0, 1]], dtype=np.float32)
    # sigma^2 = (4, 1); cumulative variance (0.8, 1.0)
    assert build_subspace(w, 0.75).k == 1
    assert build_subspace(w, 0.95).k == 2
    s = build_subspace(w, 0.75)
    assert abs(abs(s.basis[0, 0]) - 1.0) < 1e-12
    assert residual_norm(s, np.array([3, 4], dtype=np.float32)) == pytest.approx(4.0)


def test_retained_variance_bookkeeping():
    w = np.array([[2, 0], [0, 1]], dtype=np.float32)
    s = build_subspace(w, 0.75)
    assert s.retained_variance == pytest.approx(0.8)


def test_shape_and_config_errors():
    with pytest.raises(ShapeError):
        build_subspace(np.ones(4, dtype=np.float32), 0.95)
    with pytest.raises(ShapeError):
        build_subspace(np.ones((3, 1), dtype=np.float32), 0.95)
    w = np.eye(3, dtype=np.float32)
    for ratio in (0.0, -0.5, 1.5):
        with pytest.raises(ConfigError):
            build_subspace(w, ratio)
    bad = w.copy()
    bad[0, 0] = np.nan
    with pytest.raises(DataError):
        build_subspace(bad, 0.95)


def test_residual_errors():
    s = build_subspace(np.eye(3, dtype=np.float32), 0.95)
    with pytest.raises(ShapeError):
        residual_norm(s, np.zeros(4, dtype=np.float32))
    with pytest.raises(DataError):
        residual_norm(s, np.array([1.0, np.inf, 0.0]))


def test_oracle_equivalence_sample():
    rng = np.random.default_rng(77)
    for _ in range(50):
        d = int(rng.integers(2, 65))
        m = int(rng.integers(2, 65))
        w = rng.standard_normal((d, m)).astype(np.float32)
        s = build_subspace(w, 0.95)
        ref = singular_values_by_gram(w)
        got = s.singular_values[: s.k]
        np.testing.assert_allclose(got, ref[: s.k], rtol=1e-6)


def test_projector_idempotence_and_pythagoras():
    rng = np.random.default_rng(5)
    for _ in range(100):
        d = int(rng.integers(3, 60))
        m = int(rng.integers(2, 60))
        w = rng.standard_normal((d, m)).astype(np.float32)
        s = build_subspace(w, 0.9)
        x = rng.standard_normal(d).astype(np.float32)
        nx = float(np.linalg.norm(x))
        inside = s.basis @ (s.basis.T @ x.astype(np.float64))
        assert residual_norm(s, inside) <= 1e-4 * nx
        coeffs = s.basis.T @ x.astype(np.float64)
        lhs = nx * nx
        rhs = float(coeffs @ coeffs) + residual_norm(s, x) ** 2
        assert abs(lhs - rhs) <= 1e-4 * lhs


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(0, 2**31 - 1),
    r1=st.floats(0.05, 1.0),
    r2=st.floats(0.05, 1.0),
)
def test_k_monotone_in_ratio(seed, r1, r2):
    rng = np.random.default_rng(seed)
    w = rng.standard_normal((12, 9)).astype(np.float32)
    lo, hi = sorted((r1, r2))
    assert build_subspace(w, lo).k <= build_subspace(w, hi).k


def test_rotation_invariance_of_residual():
    rng = np.random.default_rng(11)
    for _ in range(20):
        d, m = 24, 32
        w = rng.standard_normal((d, m))
        q, _ = np.linalg.qr(rng.standard_normal((m, m)))
        x = rng.standard_normal(d).astype(np.float32)
        s1 = build_subspace(w.astype(np.float32), 0.9)
        s2 = build_subspace((w @ q).astype(np.float32), 0.9)
        if s1.k != s2.k:  # f32 rounding can move a borderline k
            continue
        a, b = residual_norm(s1, x), residual_norm(s2, x)
        assert abs(a - b) <= 1e-4 * max(1.0, abs(a))


def test_build_is_deterministic():
    rng = np.random.default_rng(2)
    w = rng.standard_normal((30, 20)).astype(np.float32)
    s1 = build_subspace(w, 0.95, seed=9)
    s2 = build_subspace(w, 0.95, seed=9)
    assert np.array_equal(s1.basis, s2.basis)
    assert np.array_equal(s1.singular_values, s2.singular_values)


def test_retention_rules():
    w = np.diag([4.0, 2.0, 1.0, 0.5]).astype(np.float32)
    by_var = build_subspace(w, 0.95, rule="variance")
    by_sigma = build_subspace(w, 0.95, rule="sigma")
    by_count = build_subspace(w, 0.5, rule="count")
    # variance: 16/21.25=0.753, +4 -> 0.941, +1 -> 0.988 => k=3
    assert by_var.k == 3
    # sigma: 4/7.5=0.533, +2 -> 0.8, +1 -> 0.933, +0.5 -> 1.0 => k=4
    assert by_sigma.k == 4
    assert by_count.k == 2


def test_center_flag_changes_solution():
    rng = np.random.default_rng(4)
    w = rng.standard_normal((10, 40)).astype(np.float32) + 50.0
    plain = build_subspace(w, 0.95)
    centered = build_subspace(w, 0.95, center=True)
    assert centered.centered and not plain.centered
    # a huge common offset dominates the uncentered spectrum
    assert plain.singular_values[0] > 10 * centered.singular_values[0]


def test_randomized_path_matches_dense_leading_spectrum():
    # min(D, M) > 512 routes through the seeded randomized decomposition
    rng = np.random.default_rng(31)
    d, m, r = 520, 540, 24
    u, _ = np.linalg.qr(rng.standard_normal((d, r)))
    v, _ = np.linalg.qr(rng.standard_normal((m, r)))
    sv = np.linspace(30.0, 10.0, r)
    w = ((u * sv) @ v.T + 0.01 * rng.standard_normal((d, m))).astype(np.float32)
    s = build_subspace(w, 0.95, seed=3)
    exact = np.linalg.svd(w.astype(np.float64), compute_uv=False)
    np.testing.assert_allclose(s.singular_values[: s.k], exact[: s.k], rtol=1e-4)
    assert s.k <= r + 2
    # residual agrees with the exact-basis residual for random probes
    u_exact = np.linalg.svd(w.astype(np.float64), full_matrices=False)[0][:, : s.k]
    for _ in range(5):
        x = rng.standard_normal(d).astype(np.float32)
        x64 = x.astype(np.float64)
        coeffs = u_exact.T @ x64
        ref = np.sqrt(max(0.0, float(x64 @ x64) - float(coeffs @ coeffs)))
        assert residual_norm(s, x) == pytest.approx(ref, rel=1e-3)
    # determinism of the sketch
    s2 = build_subspace(w, 0.95, seed=3)
    assert np.array_equal(s.basis, s2.basis)


def test_save_load_roundtrip(tmp_path):
    rng = np.random.default_rng(6)
    w = rng.standard_normal((25, 18)).astype(np.float32)
    s = build_subspace(w, 0.95)
    save_subspace(s, tmp_path)
    got = load_subspace(tmp_path, expected_fingerprint=s.source_fingerprint)
    got.validate()
    assert got.k == s.k
    assert got.retained_variance == pytest.approx(s.retained_variance)
    np.testing.assert_allclose(got.basis, s.basis, atol=1e-6)


def test_load_detects_tampered_basis(tmp_path):
    rng = np.random.default_rng(7)
    s = build_subspace(rng.standard_normal((12, 10)).astype(np.float32), 0.95)
    save_subspace(s, tmp_path)
    basis = np.array(s.basis, dtype=np.float32)
    basis[:, 0] *= 2.0  # break orthonormality
    from sps import write_tensor

    write_tensor(basis, tmp_path / "basis.spsf")
    with pytest.raises(DataError, match="orthonormal"):
        load_subspace(tmp_path)


def test_stale_fingerprint(tmp_path):
    rng = np.random.default_rng(8)
    s = build_subspace(rng.standard_normal((12, 10)).astype(np.float32), 0.95)
    save_subspace(s, tmp_path)
    with pytest.raises(StaleSubspaceError):
        load_subspace(tmp_path, expected_fingerprint="deadbeef")
