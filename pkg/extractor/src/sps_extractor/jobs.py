"""Extraction jobs: representation matrix, candidate states, probe states.

Every tensor leaves through the .spsf writer in float32; model-native
precision is recorded in the metadata sidecars. Manifests follow the
scoring side's JSON schema with paths relative to the manifest file.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import torch

from . import spsf
from .errors import JobError
from .models import ModelBundle, load_bundle, resolve_layer
from .prompts import compressor_prompt, fusion_text


@dataclass
class DecodeSettings:
    temperature: float = 1.0
    repetition_penalty: float = 1.2
    num_candidates: int = 5
    max_new_tokens: int = 48
    greedy: bool = False

    def __post_init__(self):
        if self.num_candidates < 1:
            raise JobError(f"num_candidates must be >= 1, got {self.num_candidates}")


@dataclass
class ExtractionJob:
    model_id: str
    output_dir: str
    layer: str = "penultimate"
    inputs: list = field(default_factory=list)  # [{"query_id", "question", "documents"?, "gold_answers"?}]
    decode: DecodeSettings = field(default_factory=DecodeSettings)
    seed: int = 0
    reader_model_id: Optional[str] = None  # defaults to model_id
    states_from: str = "reader"  # or "compressor"
    weights_source: str = "embeddings"  # or "hidden-bank"


def _write_json(path, doc) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def _check_cross_references(manifest_path: str, manifest: dict) -> None:
    """Post-write check: every referenced tensor must resolve and parse."""
    base = os.path.dirname(os.path.abspath(manifest_path))
    for entry in manifest["candidates"]:
        for key in ("states_path", "probe_vector_path"):
            if key in entry:
                target = os.path.join(base, entry[key])
                if not os.path.isfile(target):
                    raise JobError(f"{manifest_path}: dangling reference {entry[key]}")
                spsf.read(target)


def _encode_prompt(bundle: ModelBundle, text: str, reserve: int = 0) -> torch.Tensor:
    ids = bundle.tokenizer.encode(text, add_special_tokens=False)
    bos = getattr(bundle.tokenizer, "bos_token_id", None)
    if bos is not None:
        ids = [bos] + ids
    if bundle.max_positions:
        budget = bundle.max_positions - reserve
        if budget < 2:
            raise JobError("prompt budget exhausted by max_new_tokens")
        ids = ids[:budget]
    return torch.tensor([ids], dtype=torch.long)


@torch.no_grad()
def _states_and_logprobs(bundle: ModelBundle, token_ids: list[int], layer_idx: int):
    """Chosen-layer states plus conditional log-probs for a token sequence.

    BOS (when the tokenizer has one) is prepended so every text token gets a
    conditional log-probability; without BOS the first token has no
    conditional and is dropped from both outputs. State rows and log-probs
    stay aligned either way.
    """
    bos = getattr(bundle.tokenizer, "bos_token_id", None)
    full = ([bos] + token_ids) if bos is not None else token_ids
    ids = torch.tensor([full], dtype=torch.long)
    out = bundle.model(ids, output_hidden_states=True)
    states = out.hidden_states[layer_idx][0, 1:]
    logprobs_all = torch.log_softmax(out.logits[0, :-1].float(), dim=-1)
    targets = ids[0, 1:]
    token_logprobs = logprobs_all.gather(1, targets[:, None]).squeeze(1)
    return (
        states.float().numpy().astype(np.float32),
        token_logprobs.numpy().astype(np.float64),
    )


@torch.no_grad()
def dump_weights(job: ExtractionJob) -> dict:
    """Write the model's representation matrix W (D x M) plus metadata."""
    bundle = load_bundle(job.model_id)
    os.makedirs(job.output_dir, exist_ok=True)
    if job.weights_source == "embeddings":
        w = bundle.model.get_input_embeddings().weight.detach().float().numpy().T
    elif job.weights_source == "hidden-bank":
        if not job.inputs:
            raise JobError("hidden-bank weights need input texts")
        layer_idx = resolve_layer(job.layer, bundle.n_layers)
        banks = []
        for item in job.inputs:
            ids = _encode_prompt(bundle, item["question"])
            out = bundle.model(ids, output_hidden_states=True)
            banks.append(out.hidden_states[layer_idx][0].float().numpy())
        w = np.vstack(banks).T  # [D, total_tokens]
    else:
        raise JobError(f"unknown weights source {job.weights_source!r}")
    path = os.path.join(job.output_dir, "W.spsf")
    spsf.write(np.ascontiguousarray(w, dtype=np.float32), path)
    meta = {
        "model_id": job.model_id,
        "source": job.weights_source,
        "layer": job.layer if job.weights_source == "hidden-bank" else None,
        "native_dtype": bundle.native_dtype,
        "d": int(w.shape[0]),
        "m": int(w.shape[1]),
        "fingerprint": spsf.fingerprint(path),
    }
    _write_json(os.path.join(job.output_dir, "weights_meta.json"), meta)
    return meta


def _clean_generated(ids: list[int], eos_id: Optional[int]) -> list[int]:
    if eos_id is not None and eos_id in ids:
        ids = ids[: ids.index(eos_id)]
    return [i for i in ids if i < 256 or i > 257] if ids else ids


@torch.no_grad()
def dump_candidates(job: ExtractionJob) -> dict:
    """Generate candidate summaries per query and dump states + log-probs.

    The compressor model samples num_candidates sequences per query
    (temperature/repetition-penalty decoding unless greedy); states and
    log-probs are taken from the reader by default. Failures become log
    entries, never broken manifests.
    """
    compressor = load_bundle(job.model_id)
    reader = (
        compressor
        if job.reader_model_id in (None, job.model_id)
        else load_bundle(job.reader_model_id)
    )
    states_bundle = reader if job.states_from == "reader" else compressor
    layer_idx = resolve_layer(job.layer, states_bundle.n_layers)
    os.makedirs(job.output_dir, exist_ok=True)
    states_dir = os.path.join(job.output_dir, "states")
    manifest_dir = os.path.join(job.output_dir, "manifests")
    os.makedirs(states_dir, exist_ok=True)
    os.makedirs(manifest_dir, exist_ok=True)

    log = {"model_id": job.model_id, "queries": [], "seed": job.seed}
    eos = getattr(compressor.tokenizer, "eos_token_id", None)
    for qi, item in enumerate(job.inputs):
        query_id = item["query_id"]
        documents = item.get("documents") or []
        flags = []
        if not documents:
            flags.append("no_documents:query_only_prompt")
        prompt = compressor_prompt(item["question"], documents)
        ids = _encode_prompt(compressor, prompt, reserve=job.decode.max_new_tokens)
        torch.manual_seed((job.seed * 1_000_003 + qi) % (2**63 - 1))
        do_sample = not job.decode.greedy and job.decode.temperature > 0
        generated = compressor.model.generate(
            ids,
            do_sample=do_sample,
            temperature=job.decode.temperature if do_sample else None,
            repetition_penalty=job.decode.repetition_penalty,
            num_return_sequences=job.decode.num_candidates if do_sample else 1,
            max_new_tokens=job.decode.max_new_tokens,
            pad_token_id=eos,
        )
        if not do_sample:
            generated = generated.repeat(job.decode.num_candidates, 1)

        entries = []
        errors = []
        for ci in range(generated.shape[0]):
            summary_ids = _clean_generated(generated[ci][ids.shape[1]:].tolist(), eos)
            if not summary_ids:
                errors.append({"candidate_id": f"c{ci}", "error": "empty generation"})
                continue
            text = compressor.tokenizer.decode(summary_ids, skip_special_tokens=True)
            reader_ids = states_bundle.tokenizer.encode(text, add_special_tokens=False)
            if not reader_ids:
                errors.append({"candidate_id": f"c{ci}", "error": "untokenizable summary"})
                continue
            states, logprobs = _states_and_logprobs(states_bundle, reader_ids, layer_idx)
            fname = f"{query_id}_c{ci}.spsf"
            spsf.write(states, os.path.join(states_dir, fname))
            entries.append(
                {
                    "candidate_id": f"c{ci}",
                    "states_path": os.path.join("..", "states", fname),
                    "text": text,
                    "token_logprobs": [float(v) for v in logprobs],
                }
            )
        manifest = {
            "query_id": query_id,
            "layer_tag": job.layer,
            "candidates": entries,
        }
        if item.get("gold_answers"):
            manifest["gold_answers"] = list(item["gold_answers"])
        if entries:
            manifest_path = os.path.join(manifest_dir, f"{query_id}.json")
            _write_json(manifest_path, manifest)
            _check_cross_references(manifest_path, manifest)
        log["queries"].append(
            {
                "query_id": query_id,
                "n_candidates": len(entries),
                "errors": errors,
                "flags": flags,
            }
        )
    _write_json(os.path.join(job.output_dir, "extraction_log.json"), log)
    return log


@torch.no_grad()
def dump_probe_states(
    job: ExtractionJob,
    probes_dir: str,
    question: str,
    summary: str,
    include_baseline: bool = False,
) -> dict:
    """Forward each probe appended to the summary-query embedding.

    Emits one hidden-state vector (at the probe position, chosen layer) per
    probe, plus a probe manifest mirroring the candidate schema with
    probe_vector_path entries. The optional baseline is the same forward
    with a zero vector in the probe slot, which is exactly what a zero
    probe produces.
    """
    bundle = load_bundle(job.model_id)
    layer_idx = resolve_layer(job.layer, bundle.n_layers)
    index_path = os.path.join(probes_dir, "probes.json")
    if not os.path.isfile(index_path):
        raise JobError(f"no probes.json under {probes_dir}")
    with open(index_path, "r", encoding="utf-8") as f:
        index = json.load(f)
    os.makedirs(job.output_dir, exist_ok=True)

    ids = _encode_prompt(bundle, fusion_text(question, summary), reserve=1)
    base_embeds = bundle.model.get_input_embeddings()(ids)

    def probe_forward(vec: np.ndarray) -> np.ndarray:
        probe = torch.from_numpy(np.array(vec, dtype=np.float32)).to(base_embeds.dtype)
        fused = torch.cat([base_embeds, probe.view(1, 1, -1)], dim=1)
        out = bundle.model(inputs_embeds=fused, output_hidden_states=True)
        return out.hidden_states[layer_idx][0, -1].float().numpy().astype(np.float32)

    entries = []
    for item in index["probes"]:
        vec = spsf.read(os.path.join(probes_dir, item["probe_vector_path"]))
        if vec.ndim != 1 or vec.shape[0] != bundle.hidden_size:
            raise JobError(
                f"probe {item['probe_index']} has dim {vec.shape}, model D={bundle.hidden_size}"
            )
        h = probe_forward(vec)
        fname = f"h_{item['probe_index']:03d}.spsf"
        spsf.write(h, os.path.join(job.output_dir, fname))
        entries.append(
            {
                "candidate_id": f"probe_{item['probe_index']:03d}",
                "states_path": fname,
                "probe_vector_path": os.path.relpath(
                    os.path.join(probes_dir, item["probe_vector_path"]), job.output_dir
                ),
            }
        )
    manifest = {
        "query_id": "probe_run",
        "layer_tag": job.layer,
        "candidates": entries,
    }
    manifest_path = os.path.join(job.output_dir, "probe_manifest.json")
    _write_json(manifest_path, manifest)
    _check_cross_references(manifest_path, manifest)
    result = {"n_probes": len(entries), "d": bundle.hidden_size}
    if include_baseline:
        baseline = probe_forward(np.zeros(bundle.hidden_size, dtype=np.float32))
        spsf.write(baseline, os.path.join(job.output_dir, "baseline_h.spsf"))
        result["baseline"] = "baseline_h.spsf"
    return result
