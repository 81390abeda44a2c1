"""Binary tensor interchange (.spsf) and candidate manifests.

Tensors are float32 numpy arrays of rank 1 or 2, always finite. The on-disk
layout is fixed and byte-exact so independent writers (e.g. the model-side
extractor) interoperate:

    offset  size      field
    0       4         magic "SPS1" (53 50 53 31)
    4       1         dtype code, u8 (0 = float32)
    5       1         ndim, u8 (1 or 2)
    6       10        zero padding (header is exactly 16 bytes)
    16      8*ndim    dims, u64 little-endian
    ...     4*prod    payload, row-major little-endian float32

Payload offset is therefore 16 + 8*ndim, computable from the header alone.

Manifests are JSON documents indexing one query's candidate summaries; the
referenced state tensors stay on disk until explicitly loaded.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
from dataclasses import dataclass
from typing import BinaryIO, Optional

import numpy as np

from .errors import DataError, FormatError, SchemaError, ShapeError

MAGIC = b"SPS1"
DTYPE_F32 = 0
HEADER_SIZE = 16


def validate_tensor(t: np.ndarray) -> np.ndarray:
    """Check the tensor invariants and return the array as C-order float32."""
    arr = np.asarray(t)
    if arr.ndim not in (1, 2):
        raise ShapeError(f"tensor rank must be 1 or 2, got {arr.ndim}")
    if any(d < 1 for d in arr.shape):
        raise ShapeError(f"every dimension must be >= 1, got shape {arr.shape}")
    arr = np.ascontiguousarray(arr, dtype=np.float32)
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise DataError(f"non-finite element at flat index {bad}")
    return arr


def write_tensor(t: np.ndarray, destination) -> None:
    """Serialize a tensor to a path or binary sink. Byte-identical for identical input."""
    arr = validate_tensor(t)
    if isinstance(destination, (str, os.PathLike)):
        try:
            with open(destination, "wb") as f:
                _write_stream(arr, f)
        except OSError as e:
            raise OSError(f"writing tensor to {destination}: {e}") from e
    else:
        _write_stream(arr, destination)


def _write_stream(arr: np.ndarray, sink: BinaryIO) -> None:
    sink.write(MAGIC)
    sink.write(struct.pack("<BB", DTYPE_F32, arr.ndim))
    sink.write(b"\x00" * 10)
    for d in arr.shape:
        sink.write(struct.pack("<Q", d))
    sink.write(arr.astype("<f4", copy=False).tobytes(order="C"))


def tensor_bytes(t: np.ndarray) -> bytes:
    """Canonical serialized form, used for fingerprinting."""
    import io

    buf = io.BytesIO()
    write_tensor(t, buf)
    return buf.getvalue()


def fingerprint_tensor(t: np.ndarray) -> str:
    """sha256 over the canonical .spsf byte stream."""
    return hashlib.sha256(tensor_bytes(t)).hexdigest()


def read_tensor(source) -> np.ndarray:
    """Inverse of write_tensor; validates magic, dtype and finiteness."""
    if isinstance(source, (str, os.PathLike)):
        try:
            with open(source, "rb") as f:
                return _read_stream(f, name=str(source))
        except OSError as e:
            raise OSError(f"reading tensor from {source}: {e}") from e
    return _read_stream(source, name="<stream>")


def _read_stream(src: BinaryIO, name: str) -> np.ndarray:
    header = src.read(HEADER_SIZE)
    if len(header) < HEADER_SIZE:
        raise FormatError(f"{name}: truncated header ({len(header)} bytes)")
    if header[:4] != MAGIC:
        raise FormatError(f"{name}: bad magic {header[:4]!r}")
    dtype_code, ndim = header[4], header[5]
    if dtype_code != DTYPE_F32:
        raise FormatError(f"{name}: unknown dtype code {dtype_code}")
    if ndim not in (1, 2):
        raise FormatError(f"{name}: unsupported ndim {ndim}")
    dim_bytes = src.read(8 * ndim)
    if len(dim_bytes) < 8 * ndim:
        raise FormatError(f"{name}: truncated dims")
    shape = struct.unpack(f"<{ndim}Q", dim_bytes)
    if any(d < 1 for d in shape):
        raise FormatError(f"{name}: zero-sized dimension in {shape}")
    count = 1
    for d in shape:
        count *= d
    payload = src.read(4 * count)
    if len(payload) < 4 * count:
        raise FormatError(
            f"{name}: truncated payload ({len(payload)} of {4 * count} bytes)"
        )
    arr = np.frombuffer(payload, dtype="<f4").reshape(shape)
    finite = np.isfinite(arr)
    if not finite.all():
        bad = int(np.flatnonzero(~finite)[0])
        raise DataError(f"{name}: non-finite element at flat index {bad}")
    return arr.copy()  # frombuffer views are read-only


@dataclass(frozen=True)
class CandidateRef:
    """One manifest entry; states stay on disk until loaded."""

    candidate_id: str
    states_path: str
    text: Optional[str] = None
    token_logprobs: Optional[tuple[float, ...]] = None


@dataclass(frozen=True)
class CandidateManifest:
    query_id: str
    candidates: tuple[CandidateRef, ...]
    layer_tag: str = "penultimate"
    gold_answers: Optional[tuple[str, ...]] = None
    base_dir: str = "."


def read_manifest(path) -> CandidateManifest:
    """Load and validate a manifest JSON; stat-checks referenced tensors without loading.

    Paths in the manifest are resolved relative to the manifest file's directory.
    """
    path = os.fspath(path)
    with open(path, "r", encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise SchemaError(f"{path}: not valid JSON: {e}") from e
    base_dir = os.path.dirname(os.path.abspath(path))
    return _manifest_from_dict(doc, base_dir, name=path)


def _manifest_from_dict(doc: dict, base_dir: str, name: str) -> CandidateManifest:
    for key in ("query_id", "layer_tag", "candidates"):
        if key not in doc:
            raise SchemaError(f"{name}: missing required key {key!r}")
    if not isinstance(doc["candidates"], list) or not doc["candidates"]:
        raise SchemaError(f"{name}: candidates must be a non-empty list")
    refs = []
    seen = set()
    for i, entry in enumerate(doc["candidates"]):
        try:
            cid = entry["candidate_id"]
            states_path = entry["states_path"]
        except (TypeError, KeyError) as e:
            raise SchemaError(f"{name}: candidate {i} missing {e}") from e
        if cid in seen:
            raise SchemaError(f"{name}: duplicate candidate_id {cid!r}")
        seen.add(cid)
        resolved = os.path.join(base_dir, states_path)
        if not os.path.isfile(resolved):
            raise SchemaError(f"{name}: states file not found: {resolved}")
        logprobs = entry.get("token_logprobs")
        refs.append(
            CandidateRef(
                candidate_id=cid,
                states_path=states_path,
                text=entry.get("text"),
                token_logprobs=tuple(logprobs) if logprobs is not None else None,
            )
        )
    golds = doc.get("gold_answers")
    return CandidateManifest(
        query_id=doc["query_id"],
        candidates=tuple(refs),
        layer_tag=doc["layer_tag"],
        gold_answers=tuple(golds) if golds is not None else None,
        base_dir=base_dir,
    )


def write_manifest(manifest: CandidateManifest, path) -> None:
    """Serialize a manifest back to JSON (paths kept relative)."""
    doc = {
        "query_id": manifest.query_id,
        "layer_tag": manifest.layer_tag,
        "candidates": [],
    }
    if manifest.gold_answers is not None:
        doc["gold_answers"] = list(manifest.gold_answers)
    for ref in manifest.candidates:
        entry: dict = {"candidate_id": ref.candidate_id, "states_path": ref.states_path}
        if ref.text is not None:
            entry["text"] = ref.text
        if ref.token_logprobs is not None:
            entry["token_logprobs"] = list(ref.token_logprobs)
        doc["candidates"].append(entry)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


@dataclass(frozen=True)
class Candidate:
    """A loaded candidate: token states plus optional text and log-probs."""

    candidate_id: str
    states: np.ndarray  # [T, D] float32
    text: Optional[str] = None
    token_logprobs: Optional[tuple[float, ...]] = None


@dataclass(frozen=True)
class CandidateSet:
    query_id: str
    candidates: tuple[Candidate, ...]
    layer_tag: str = "penultimate"
    gold_answers: Optional[tuple[str, ...]] = None


def load_candidate_states(manifest: CandidateManifest, index: int) -> np.ndarray:
    """Load one candidate's state tensor and check its per-candidate invariants."""
    ref = manifest.candidates[index]
    states = read_tensor(os.path.join(manifest.base_dir, ref.states_path))
    if states.ndim != 2:
        raise ShapeError(
            f"candidate {ref.candidate_id!r}: states must be rank 2, got rank {states.ndim}"
        )
    if ref.token_logprobs is not None and len(ref.token_logprobs) != states.shape[0]:
        raise SchemaError(
            f"candidate {ref.candidate_id!r}: {len(ref.token_logprobs)} logprobs "
            f"for {states.shape[0]} tokens"
        )
    return states


def load_candidate_set(manifest: CandidateManifest) -> CandidateSet:
    """Load every candidate, enforcing a common state width D across the set."""
    loaded = []
    width = None
    for i, ref in enumerate(manifest.candidates):
        states = load_candidate_states(manifest, i)
        if width is None:
            width = states.shape[1]
        elif states.shape[1] != width:
            raise ShapeError(
                f"manifest {manifest.query_id!r}: candidate {ref.candidate_id!r} has "
                f"D={states.shape[1]}, expected {width}"
            )
        loaded.append(
            Candidate(
                candidate_id=ref.candidate_id,
                states=states,
                text=ref.text,
                token_logprobs=ref.token_logprobs,
            )
        )
    return CandidateSet(
        query_id=manifest.query_id,
        candidates=tuple(loaded),
        layer_tag=manifest.layer_tag,
        gold_answers=manifest.gold_answers,
    )
