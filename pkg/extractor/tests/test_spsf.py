"""The extractor's writer must interoperate bit-exactly with the scoring reader."""

import io

import numpy as np
import pytest

import sps
from sps_extractor import spsf


def test_writer_output_loads_through_scoring_reader(tmp_path):
    rng = np.random.default_rng(0)
    for shape in [(5,), (3, 4), (1, 1), (128, 64)]:
        arr = rng.standard_normal(shape).astype(np.float32)
        path = tmp_path / "t.spsf"
        spsf.write(arr, path)
        loaded = sps.read_tensor(path)
        assert loaded.shape == arr.shape
        assert loaded.tobytes() == arr.tobytes()


def test_writer_bytes_match_scoring_writer(tmp_path):
    arr = np.arange(12, dtype=np.float32).reshape(3, 4)
    ours = tmp_path / "a.spsf"
    spsf.write(arr, ours)
    buf = io.BytesIO()
    sps.write_tensor(arr, buf)
    assert ours.read_bytes() == buf.getvalue()


def test_reader_roundtrip(tmp_path):
    arr = np.array([[1.5, -2.0]], dtype=np.float32)
    spsf.write(arr, tmp_path / "t.spsf")
    got = spsf.read(tmp_path / "t.spsf")
    assert np.array_equal(got, arr)


def test_writer_rejects_bad_tensors(tmp_path):
    with pytest.raises(ValueError):
        spsf.write(np.array([np.nan], dtype=np.float32), tmp_path / "x.spsf")
    with pytest.raises(ValueError):
        spsf.write(np.zeros((2, 2, 2), dtype=np.float32), tmp_path / "x.spsf")


def test_fingerprint_matches_scoring_fingerprint(tmp_path):
    arr = np.random.default_rng(1).standard_normal((6, 7)).astype(np.float32)
    path = tmp_path / "t.spsf"
    spsf.write(arr, path)
    assert spsf.fingerprint(path) == sps.fingerprint_tensor(arr)
