import json

from click.testing import CliRunner

import sps
from sps_extractor.cli import main


def run(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


def test_make_tiny_model_and_weights(tmp_path):
    model_dir = tmp_path / "model"
    res = run("make-tiny-model", "--out", model_dir, "--seed", "1")
    assert res.exit_code == 0, res.output
    out = tmp_path / "w"
    res = run("weights", "--model", model_dir, "--out", out)
    assert res.exit_code == 0, res.output
    w = sps.read_tensor(out / "W.spsf")
    assert w.shape == (64, 258)
    meta = json.loads((out / "weights_meta.json").read_text())
    assert meta["fingerprint"] == sps.fingerprint_tensor(w)


def test_candidates_cli(tiny_model, qa_inputs, tmp_path):
    inputs_path, _ = qa_inputs
    out = tmp_path / "c"
    res = run(
        "candidates", "--model", tiny_model, "--inputs", inputs_path,
        "--num-candidates", "2", "--max-new-tokens", "8", "--seed", "2", "--out", out,
    )
    assert res.exit_code == 0, res.output
    man = sps.read_manifest(out / "manifests" / "q0.json")
    assert len(man.candidates) == 2
    sps.load_candidate_set(man)


def test_probes_cli(tiny_model, tmp_path):
    from sps.probes import ProbeConfig, generate_probes, save_probes

    cfg = ProbeConfig(n_probes=4, retain=2, probe_dim=64, sigma=0.01, seed=9)
    save_probes(generate_probes(cfg), cfg, tmp_path / "probes")
    out = tmp_path / "h"
    res = run(
        "probes", "--model", tiny_model, "--probes", tmp_path / "probes",
        "--question", "Why?", "--summary", "Because.", "--out", out,
    )
    assert res.exit_code == 0, res.output
    doc = json.loads((out / "probe_manifest.json").read_text())
    assert len(doc["candidates"]) == 4


def test_probe_dim_mismatch_exits_1(tiny_model, tmp_path):
    from sps.probes import ProbeConfig, generate_probes, save_probes

    cfg = ProbeConfig(n_probes=2, retain=1, probe_dim=16, sigma=0.01, seed=9)
    save_probes(generate_probes(cfg), cfg, tmp_path / "probes")
    res = run(
        "probes", "--model", tiny_model, "--probes", tmp_path / "probes",
        "--question", "Why?", "--summary", "Because.", "--out", tmp_path / "h",
    )
    assert res.exit_code == 1
    assert "dim" in res.output
