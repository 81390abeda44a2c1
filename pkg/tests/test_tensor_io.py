import io
import json
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sps import (
    DataError,
    FormatError,
    SchemaError,
    ShapeError,
    load_candidate_set,
    load_candidate_states,
    read_manifest,
    read_tensor,
    write_manifest,
    write_tensor,
)
from sps.tensor_io import HEADER_SIZE


def roundtrip(arr):
    buf = io.BytesIO()
    write_tensor(arr, buf)
    buf.seek(0)
    return read_tensor(buf)


def test_rank1_layout():
    buf = io.BytesIO()
    write_tensor(np.array([1.0, 2.0], dtype=np.float32), buf)
    raw = buf.getvalue()
    # 16-byte header, one u64 dim, two f32 payload values
    assert len(raw) == 16 + 8 + 8
    assert raw[:6] == bytes([0x53, 0x50, 0x53, 0x31, 0x00, 0x01])
    assert raw[6:16] == b"\x00" * 10
    assert struct.unpack("<Q", raw[16:24]) == (2,)
    assert struct.unpack("<2f", raw[24:]) == (1.0, 2.0)


def test_rank2_layout():
    buf = io.BytesIO()
    write_tensor(np.arange(6, dtype=np.float32).reshape(2, 3), buf)
    raw = buf.getvalue()
    assert raw[5] == 2  # ndim
    assert struct.unpack("<2Q", raw[16:32]) == (2, 3)
    assert len(raw) == HEADER_SIZE + 16 + 24


def test_write_is_deterministic():
    arr = np.random.default_rng(3).standard_normal((4, 5)).astype(np.float32)
    a, b = io.BytesIO(), io.BytesIO()
    write_tensor(arr, a)
    write_tensor(arr, b)
    assert a.getvalue() == b.getvalue()


def test_roundtrip_hand_cases():
    for arr in (
        np.array([1.0, 2.0], dtype=np.float32),
        np.arange(6, dtype=np.float32).reshape(2, 3),
        np.array([[-0.0, 1e-38], [3.4e38, -3.4e38]], dtype=np.float32),
    ):
        got = roundtrip(arr)
        assert got.shape == arr.shape
        assert got.tobytes() == arr.tobytes()


@settings(max_examples=200, deadline=None)
@given(
    shape=st.one_of(
        st.tuples(st.integers(1, 17)),
        st.tuples(st.integers(1, 9), st.integers(1, 9)),
    ),
    seed=st.integers(0, 2**32 - 1),
)
def test_roundtrip_property(shape, seed):
    rng = np.random.default_rng(seed)
    arr = rng.standard_normal(shape).astype(np.float32)
    got = roundtrip(arr)
    assert got.shape == arr.shape
    assert got.tobytes() == arr.tobytes()  # bit-exact


def test_bad_magic():
    with pytest.raises(FormatError):
        read_tensor(io.BytesIO(b"\x00\x00\x00\x00" + b"\x00" * 30))


def test_unknown_dtype_code():
    buf = io.BytesIO()
    write_tensor(np.array([1.0], dtype=np.float32), buf)
    raw = bytearray(buf.getvalue())
    raw[4] = 7
    with pytest.raises(FormatError):
        read_tensor(io.BytesIO(bytes(raw)))


def test_nan_payload_names_index():
    buf = io.BytesIO()
    write_tensor(np.array([1.0, 2.0, 3.0], dtype=np.float32), buf)
    raw = bytearray(buf.getvalue())
    raw[16 + 8 + 4 : 16 + 8 + 8] = struct.pack("<f", float("nan"))
    with pytest.raises(DataError, match="index 1"):
        read_tensor(io.BytesIO(bytes(raw)))


def test_truncated_payload():
    buf = io.BytesIO()
    write_tensor(np.array([1.0, 2.0, 3.0], dtype=np.float32), buf)
    with pytest.raises(FormatError, match="truncated"):
        read_tensor(io.BytesIO(buf.getvalue()[:-2]))


def test_write_rejects_nan_and_bad_rank():
    with pytest.raises(DataError):
        write_tensor(np.array([1.0, float("inf")]), io.BytesIO())
    with pytest.raises(ShapeError):
        write_tensor(np.zeros((2, 2, 2), dtype=np.float32), io.BytesIO())
    with pytest.raises(ShapeError):
        write_tensor(np.zeros((0,), dtype=np.float32), io.BytesIO())


# ------------------------------------------------------------- manifests


def _write_states(tmp_path, name, arr):
    write_tensor(np.asarray(arr, dtype=np.float32), tmp_path / name)
    return name


def _manifest_doc(tmp_path, n_candidates=5, d=4, with_logprobs=True):
    doc = {"query_id": "q1", "layer_tag": "penultimate", "candidates": []}
    rng = np.random.default_rng(0)
    for i in range(n_candidates):
        t = 3 + i
        name = _write_states(tmp_path, f"c{i}.spsf", rng.standard_normal((t, d)))
        entry = {"candidate_id": f"c{i}", "states_path": name, "text": f"summary {i}"}
        if with_logprobs:
            entry["token_logprobs"] = [-1.0] * t
        doc["candidates"].append(entry)
    return doc


def test_manifest_five_candidates_order_preserved(tmp_path):
    doc = _manifest_doc(tmp_path)
    path = tmp_path / "m.json"
    path.write_text(json.dumps(doc))
    man = read_manifest(path)
    assert [c.candidate_id for c in man.candidates] == [f"c{i}" for i in range(5)]
    assert man.query_id == "q1"


def test_manifest_minimal_single_candidate(tmp_path):
    doc = _manifest_doc(tmp_path, n_candidates=1, with_logprobs=False)
    path = tmp_path / "m.json"
    path.write_text(json.dumps(doc))
    man = read_manifest(path)
    assert len(man.candidates) == 1
    assert man.candidates[0].token_logprobs is None


def test_manifest_duplicate_id(tmp_path):
    doc = _manifest_doc(tmp_path, n_candidates=2)
    doc["candidates"][1]["candidate_id"] = doc["candidates"][0]["candidate_id"]
    path = tmp_path / "m.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(SchemaError, match="duplicate"):
        read_manifest(path)


def test_manifest_missing_states_file(tmp_path):
    doc = _manifest_doc(tmp_path, n_candidates=2)
    doc["candidates"][1]["states_path"] = "nope.spsf"
    path = tmp_path / "m.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(SchemaError, match="not found"):
        read_manifest(path)


def test_logprob_length_checked_on_load(tmp_path):
    doc = _manifest_doc(tmp_path, n_candidates=1)
    doc["candidates"][0]["token_logprobs"] = [-1.0, -1.0]  # states have 3 rows
    path = tmp_path / "m.json"
    path.write_text(json.dumps(doc))
    man = read_manifest(path)
    with pytest.raises(SchemaError, match="logprobs"):
        load_candidate_states(man, 0)


def test_candidate_states_must_be_rank_2(tmp_path):
    doc = _manifest_doc(tmp_path, n_candidates=1, with_logprobs=False)
    _write_states(tmp_path, "vec.spsf", np.zeros(4, dtype=np.float32))
    doc["candidates"][0]["states_path"] = "vec.spsf"
    path = tmp_path / "m.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ShapeError, match="rank 2"):
        load_candidate_states(read_manifest(path), 0)


def test_candidate_set_requires_common_width(tmp_path):
    doc = _manifest_doc(tmp_path, n_candidates=2, with_logprobs=False)
    _write_states(tmp_path, "wide.spsf", np.zeros((3, 7), dtype=np.float32))
    doc["candidates"][1]["states_path"] = "wide.spsf"
    path = tmp_path / "m.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ShapeError, match="D="):
        load_candidate_set(read_manifest(path))


def test_write_manifest_roundtrip(tmp_path):
    doc = _manifest_doc(tmp_path)
    path = tmp_path / "m.json"
    path.write_text(json.dumps(doc))
    man = read_manifest(path)
    out = tmp_path / "copy.json"
    write_manifest(man, out)
    again = read_manifest(out)
    assert again.query_id == man.query_id
    assert [c.candidate_id for c in again.candidates] == [
        c.candidate_id for c in man.candidates
    ]
    assert again.candidates[2].token_logprobs == man.candidates[2].token_logprobs
