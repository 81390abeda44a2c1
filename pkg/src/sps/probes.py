"""Gaussian probes for embedding-level candidate diversification.

Probes are small random vectors appended to a summary embedding; the reader's
hidden state at the probe position is scored by its top-gap energy, and the
probes whose states deviate most (smallest score) are kept. This module owns
probe generation, the gap score, and retention; producing the hidden states
requires a model and lives in the extractor.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, SchemaError, ShapeError
from .tensor_io import read_tensor, write_tensor


@dataclass(frozen=True)
class ProbeConfig:
    """Probe generation and retention settings.

    Defaults: 16 probes, 4 retained, sigma 0.01, 8 top gaps. sigma is the
    per-coordinate standard deviation; callers scaling it to the RMS of the
    summary embedding do so before constructing the config.
    """

    n_probes: int = 16
    retain: int = 4
    probe_dim: int = 64
    sigma: float = 0.01
    top_p_gaps: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.n_probes < 1:
            raise ConfigError(f"n_probes must be >= 1, got {self.n_probes}")
        if not (0 < self.retain <= self.n_probes):
            raise ConfigError(
                f"retain must be in [1, n_probes={self.n_probes}], got {self.retain}"
            )
        if self.probe_dim < 2:
            raise ConfigError(f"probe_dim must be >= 2, got {self.probe_dim}")
        if not (self.sigma > 0):
            raise ConfigError(f"sigma must be > 0, got {self.sigma}")
        if self.top_p_gaps < 1:
            raise ConfigError(f"top_p_gaps must be >= 1, got {self.top_p_gaps}")


@dataclass(frozen=True)
class ProbeResult:
    probe_index: int
    probe_vector: np.ndarray  # [D] float32
    score: float  # top-gap energy of the probe-position hidden state, >= 0


def generate_probes(cfg: ProbeConfig) -> list[np.ndarray]:
    """N i.i.d. probe vectors with entries from N(0, sigma^2).

    Fixed generator so independent implementations can reproduce the stream:
    Philox 4x64 keyed by cfg.seed; uniforms u = (next_uint64 >> 11) * 2^-53;
    normal pairs via Box-Muller with u1 = 1 - u (so u1 in (0, 1]),
      z[2i]   = sqrt(-2 ln u1_i) * cos(2 pi u2_i)
      z[2i+1] = sqrt(-2 ln u1_i) * sin(2 pi u2_i)
    consumed row-major: probe j takes z[j*D : (j+1)*D], scaled by sigma.
    """
    gen = np.random.Generator(np.random.Philox(key=cfg.seed))
    total = cfg.n_probes * cfg.probe_dim
    pairs = (total + 1) // 2
    u1 = 1.0 - gen.random(pairs)
    u2 = gen.random(pairs)
    radius = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(2 * pairs, dtype=np.float64)
    z[0::2] = radius * np.cos(2.0 * np.pi * u2)
    z[1::2] = radius * np.sin(2.0 * np.pi * u2)
    vectors = (cfg.sigma * z[:total]).reshape(cfg.n_probes, cfg.probe_dim)
    return [np.ascontiguousarray(v, dtype=np.float32) for v in vectors]


def gap_score(h: np.ndarray, p: int) -> float:
    """Sum of squared gaps between the top p+1 sorted coordinates of h.

    Sort h descending as h(1) >= ... >= h(D) and return
    sum_{i=1..p} (h(i) - h(i+1))^2. Smaller values flag stronger deviation
    from the unperturbed signal, so retention keeps the smallest scores.
    """
    h = np.asarray(h)
    if h.ndim != 1:
        raise ShapeError(f"h must be rank 1, got rank {h.ndim}")
    d = h.shape[0]
    if p >= d:
        raise ConfigError(f"p must be <= D-1 = {d - 1}, got {p}")
    if p < 1:
        raise ConfigError(f"p must be >= 1, got {p}")
    ordered = np.sort(h.astype(np.float64))[::-1]
    gaps = ordered[:p] - ordered[1 : p + 1]
    return float(gaps @ gaps)


def select_probes(results: Sequence[ProbeResult], retain: int) -> list[ProbeResult]:
    """Keep the `retain` results with the smallest scores, ascending.

    Ties break by probe_index. The retained set plus the unperturbed original
    form the candidate pool downstream (M + 1 embeddings).
    """
    if retain < 0 or retain > len(results):
        raise ConfigError(f"retain must be in [0, {len(results)}], got {retain}")
    ordered = sorted(results, key=lambda r: (r.score, r.probe_index))
    return ordered[:retain]


PROBE_INDEX_FILE = "probes.json"


def save_probes(probes: Sequence[np.ndarray], cfg: ProbeConfig, out_dir) -> None:
    """Serialize probe vectors as probe_NNN.spsf plus an index JSON."""
    out_dir = os.fspath(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    entries = []
    for i, vec in enumerate(probes):
        name = f"probe_{i:03d}.spsf"
        write_tensor(vec, os.path.join(out_dir, name))
        entries.append({"probe_index": i, "probe_vector_path": name})
    index = {
        "n_probes": cfg.n_probes,
        "probe_dim": cfg.probe_dim,
        "sigma": cfg.sigma,
        "seed": cfg.seed,
        "probes": entries,
    }
    with open(os.path.join(out_dir, PROBE_INDEX_FILE), "w", encoding="utf-8") as f:
        json.dump(index, f, indent=2, sort_keys=True)
        f.write("\n")


@dataclass(frozen=True)
class ProbeStateRef:
    """One probe-manifest entry: the h tensor path plus its probe vector path."""

    candidate_id: str
    states_path: str
    probe_vector_path: Optional[str] = None


@dataclass(frozen=True)
class ProbeManifest:
    query_id: str
    entries: tuple[ProbeStateRef, ...]
    layer_tag: str = "penultimate"
    base_dir: str = "."


def read_probe_manifest(path) -> ProbeManifest:
    """Probe manifest: candidate manifest shape plus probe_vector_path per entry."""
    path = os.fspath(path)
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    base_dir = os.path.dirname(os.path.abspath(path))
    if "candidates" not in doc or not doc["candidates"]:
        raise SchemaError(f"{path}: candidates must be a non-empty list")
    entries = []
    seen = set()
    for i, entry in enumerate(doc["candidates"]):
        cid = entry.get("candidate_id")
        if cid is None or "states_path" not in entry:
            raise SchemaError(f"{path}: entry {i} missing candidate_id or states_path")
        if cid in seen:
            raise SchemaError(f"{path}: duplicate candidate_id {cid!r}")
        seen.add(cid)
        if not os.path.isfile(os.path.join(base_dir, entry["states_path"])):
            raise SchemaError(f"{path}: states file not found: {entry['states_path']}")
        entries.append(
            ProbeStateRef(
                candidate_id=cid,
                states_path=entry["states_path"],
                probe_vector_path=entry.get("probe_vector_path"),
            )
        )
    return ProbeManifest(
        query_id=doc.get("query_id", ""),
        entries=tuple(entries),
        layer_tag=doc.get("layer_tag", "penultimate"),
        base_dir=base_dir,
    )


def score_probe_manifest(manifest: ProbeManifest, p: int) -> list[ProbeResult]:
    """Load each entry's hidden-state vector and compute its gap score."""
    results = []
    for i, entry in enumerate(manifest.entries):
        h = read_tensor(os.path.join(manifest.base_dir, entry.states_path))
        if h.ndim != 1:
            raise ShapeError(
                f"probe state {entry.candidate_id!r} must be rank 1, got rank {h.ndim}"
            )
        if entry.probe_vector_path is not None:
            vec = read_tensor(os.path.join(manifest.base_dir, entry.probe_vector_path))
        else:
            vec = np.zeros(h.shape[0], dtype=np.float32)
        results.append(ProbeResult(probe_index=i, probe_vector=vec, score=gap_score(h, p)))
    return results
