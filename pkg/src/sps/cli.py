"""Single entry point: `sps <group> <command>`.

Exit codes: 0 success, 2 configuration/usage error, 1 data error. Every
command that validates its arguments writes run_manifest.json under --out,
success or not. Output JSON is byte-stable for identical inputs and seeds
(sorted keys, fixed float repr, fixed iteration order).
"""

from __future__ import annotations

import glob
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import click
import numpy as np

from . import bounds, evaluation, gatekeeper, probes, scoring, subspace, tensor_io
from .config import RunConfig, apply_overrides, load_config
from .errors import ConfigError, SchemaError, SpsError
from .pooling import PoolingStrategy, norm_ratio
from .runio import RunManifest, write_json


def _fail(manifest: Optional[RunManifest], message: str, code: int):
    if manifest is not None:
        manifest.fail(message)
        manifest.write()
    click.echo(("config error: " if code == 2 else "error: ") + message, err=True)
    sys.exit(code)


def _guarded(manifest: RunManifest, fn):
    try:
        result = fn()
    except ConfigError as e:
        _fail(manifest, str(e), 2)
    except (SpsError, OSError) as e:
        _fail(manifest, str(e), 1)
    else:
        manifest.write()
        return result


def _manifest_paths(manifest_dir: str) -> list[str]:
    paths = sorted(glob.glob(os.path.join(manifest_dir, "*.json")))
    if not paths:
        raise SchemaError(f"no manifest JSON files under {manifest_dir}")
    return paths


def _cfg(ctx) -> RunConfig:
    return ctx.obj if ctx.obj is not None else RunConfig()


def _resolve_cfg(ctx, out, command: str, **overrides) -> RunConfig:
    """Merge flag overrides; bad values still leave a failed run manifest."""
    try:
        return apply_overrides(_cfg(ctx), **overrides)
    except ConfigError as e:
        _fail(RunManifest(out, command, sys.argv[1:]), str(e), 2)


def _nan_to_none(x: float) -> Optional[float]:
    return None if math.isnan(x) else x


@click.group()
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="TOML config file mirroring RunConfig.",
)
@click.pass_context
def main(ctx, config_path):
    """Spectral-alignment scoring and candidate selection toolkit."""
    try:
        ctx.obj = load_config(config_path) if config_path else RunConfig()
    except ConfigError as e:
        _fail(None, str(e), 2)


# ---------------------------------------------------------------- subspace

@main.group("subspace")
def subspace_group():
    """Build and inspect principal subspaces."""


@subspace_group.command("build")
@click.option("--weights", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--variance", type=float, default=None, help="retained variance ratio")
@click.option("--rule", type=click.Choice(subspace.RETENTION_RULES), default="variance")
@click.option("--center", is_flag=True, default=False)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.pass_context
def subspace_build(ctx, weights, variance, rule, center, seed, out):
    cfg = _resolve_cfg(ctx, out, "subspace build", variance_ratio=variance, seed=seed)
    manifest = RunManifest(out, "subspace build", sys.argv[1:], seed=cfg.seed)
    manifest.add_input(weights)

    def body():
        w = tensor_io.read_tensor(weights)
        sub = subspace.build_subspace(
            w, cfg.variance_ratio, seed=cfg.seed, rule=rule, center=center
        )
        subspace.save_subspace(sub, out)
        manifest.add_output(subspace.BASIS_FILE)
        manifest.add_output(subspace.SIDECAR_FILE)
        click.echo(
            f"subspace: D={sub.dim} k={sub.k} retained={sub.retained_variance:.6f} "
            f"fingerprint={sub.source_fingerprint[:12]}"
        )

    _guarded(manifest, body)


# ------------------------------------------------------------------- score

@main.command("score")
@click.option("--subspace", "subspace_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--manifests", "manifest_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--pooling", type=click.Choice([p.value for p in PoolingStrategy]), default=None)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.pass_context
def score_cmd(ctx, subspace_dir, manifest_dir, pooling, out):
    """Rank every manifest's candidates by their residual score."""
    cfg = _resolve_cfg(ctx, out, "score", pooling=pooling)
    manifest = RunManifest(out, "score", sys.argv[1:])
    manifest.add_input_dir(manifest_dir)

    def body():
        sub = subspace.load_subspace(subspace_dir)
        os.makedirs(out, exist_ok=True)
        for path in _manifest_paths(manifest_dir):
            man = tensor_io.read_manifest(path)
            candidate_set = tensor_io.load_candidate_set(man)
            selected, scores = scoring.rank_candidates(sub, candidate_set, cfg.pooling)
            report = {
                "query_id": man.query_id,
                "selected_candidate_id": scores[selected].candidate_id,
                "scores": [
                    {"candidate_id": s.candidate_id, "sps": s.sps} for s in scores
                ],
                "pooling": cfg.pooling.value,
                "subspace_fingerprint": sub.source_fingerprint,
            }
            name = f"score_{man.query_id}.json"
            write_json(os.path.join(out, name), report)
            manifest.add_output(name)
            click.echo(
                f"{man.query_id}: selected={scores[selected].candidate_id} "
                f"sps={scores[selected].sps:.6f}"
            )

    _guarded(manifest, body)


# ------------------------------------------------------------------ filter

@main.group("filter")
def filter_group():
    """Norm-ratio threshold calibration."""


THRESHOLD_FILE = "threshold.json"


def _initial_ratios(manifest_dir: str) -> list[float]:
    ratios = []
    for path in _manifest_paths(manifest_dir):
        man = tensor_io.read_manifest(path)
        states = tensor_io.load_candidate_states(man, 0)
        ratios.append(norm_ratio(states))
    return ratios


@filter_group.command("calibrate")
@click.option("--manifests", "manifest_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--percentile", type=float, default=None)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.pass_context
def filter_calibrate(ctx, manifest_dir, percentile, out):
    """Nearest-rank threshold from the initial candidates of a validation set."""
    cfg = _resolve_cfg(ctx, out, "filter calibrate", percentile=percentile)
    manifest = RunManifest(out, "filter calibrate", sys.argv[1:])
    manifest.add_input_dir(manifest_dir)

    def body():
        ratios = _initial_ratios(manifest_dir)
        t = gatekeeper.calibrate_threshold(ratios, cfg.percentile)
        os.makedirs(out, exist_ok=True)
        write_json(os.path.join(out, THRESHOLD_FILE), _threshold_to_dict(t))
        manifest.add_output(THRESHOLD_FILE)
        click.echo(f"threshold: {t.value:.6f} (percentile {t.percentile}, n={t.calibration_size})")

    _guarded(manifest, body)


def _threshold_to_dict(t: gatekeeper.Threshold) -> dict:
    return {
        "value": t.value,
        "percentile": t.percentile,
        "calibration_size": t.calibration_size,
        "method": t.method.value,
    }


def _threshold_from_file(path) -> gatekeeper.Threshold:
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    return gatekeeper.Threshold(
        value=float(doc["value"]),
        percentile=float(doc["percentile"]),
        calibration_size=int(doc["calibration_size"]),
        method=gatekeeper.ThresholdMethod(doc.get("method", "nearest_rank")),
    )


# ---------------------------------------------------------------- pipeline

@main.group("pipeline")
def pipeline_group():
    """End-to-end controller runs."""


def _decision_to_dict(d: gatekeeper.Decision) -> dict:
    doc = {
        "query_id": d.query_id,
        "ratio": _nan_to_none(d.ratio),
        "sampled": d.sampled,
        "selected_candidate_id": d.selected_candidate_id,
        "scores": None,
        "error": d.error,
    }
    if d.scores is not None:
        doc["scores"] = [
            {
                "candidate_id": s.candidate_id,
                "sps": s.sps,
                "pooled_norm": s.pooled_norm,
                "manifest_index": s.manifest_index,
            }
            for s in d.scores
        ]
    return doc


@pipeline_group.command("run")
@click.option("--subspace", "subspace_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--manifests", "manifest_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--threshold-file", type=click.Path(dir_okay=False), required=True)
@click.option("--calibrate", is_flag=True, default=False,
              help="calibrate the threshold from these manifests and write it to --threshold-file")
@click.option("--percentile", type=float, default=None)
@click.option("--pooling", type=click.Choice([p.value for p in PoolingStrategy]), default=None)
@click.option("--jobs", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.pass_context
def pipeline_run(ctx, subspace_dir, manifest_dir, threshold_file, calibrate, percentile, pooling, jobs, seed, out):
    """Decide skip-vs-sample per query and emit one Decision JSON each."""
    cfg = _resolve_cfg(
        ctx, out, "pipeline run", percentile=percentile, pooling=pooling, jobs=jobs, seed=seed
    )
    manifest = RunManifest(out, "pipeline run", sys.argv[1:], seed=cfg.seed)
    manifest.add_input_dir(manifest_dir)
    if not calibrate and os.path.isfile(threshold_file):
        manifest.add_input(threshold_file)

    def body():
        sub = subspace.load_subspace(subspace_dir)
        paths = _manifest_paths(manifest_dir)
        if calibrate:
            ratios = _initial_ratios(manifest_dir)
            t = gatekeeper.calibrate_threshold(ratios, cfg.percentile)
            parent = os.path.dirname(os.path.abspath(threshold_file))
            os.makedirs(parent, exist_ok=True)
            write_json(threshold_file, _threshold_to_dict(t))
        else:
            t = _threshold_from_file(threshold_file)
        decisions_dir = os.path.join(out, "decisions")
        os.makedirs(decisions_dir, exist_ok=True)

        def decide_one(path: str) -> gatekeeper.Decision:
            man = tensor_io.read_manifest(path)
            return gatekeeper.decide(man, sub, t, cfg.pooling)

        if cfg.jobs > 1:
            with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
                decisions = list(pool.map(decide_one, paths))
        else:
            decisions = [decide_one(p) for p in paths]

        selected_sps = []
        n_sampled = n_skipped = n_errors = 0
        for d in decisions:
            name = f"{d.query_id}.json"
            write_json(os.path.join(decisions_dir, name), _decision_to_dict(d))
            manifest.add_output(os.path.join("decisions", name))
            if d.error is not None:
                n_errors += 1
                click.echo(f"{d.query_id}: error ({d.error})")
            elif d.sampled:
                n_sampled += 1
                best = min(d.scores, key=lambda s: (s.sps, s.manifest_index))
                selected_sps.append(best.sps)
                click.echo(f"{d.query_id}: sampled selected={d.selected_candidate_id} sps={best.sps:.6f}")
            else:
                n_skipped += 1
                click.echo(f"{d.query_id}: skipped ratio={d.ratio:.6f}")
        n = len(decisions)
        summary = {
            "n_queries": n,
            "n_sampled": n_sampled,
            "n_skipped": n_skipped,
            "n_errors": n_errors,
            "skip_rate": n_skipped / n if n else None,
            "mean_sps_selected": (sum(selected_sps) / len(selected_sps)) if selected_sps else None,
            "threshold": _threshold_to_dict(t),
            "pooling": cfg.pooling.value,
            "subspace_fingerprint": sub.source_fingerprint,
        }
        write_json(os.path.join(out, "run_summary.json"), summary)
        manifest.add_output("run_summary.json")
        click.echo(f"summary: {n} queries, skip rate {summary['skip_rate']:.3f}" if n else "no queries")

    _guarded(manifest, body)


# -------------------------------------------------------------------- eval

@main.group("eval")
def eval_group():
    """Metric-quality evaluation over QA records."""


def _load_records(path) -> list[evaluation.QaRecord]:
    with open(path, "r", encoding="utf-8") as f:
        docs = json.load(f)
    if not isinstance(docs, list):
        raise evaluation.EvalError(f"{path}: records file must be a JSON array")
    return [evaluation.qa_record_from_dict(d) for d in docs]


_ORIENTATIONS = {o.value: o for o in evaluation.Orientation}


@eval_group.command("pcc")
@click.option("--records", "records_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--metric", required=True)
@click.option("--orientation", type=click.Choice(sorted(_ORIENTATIONS)), default="lower")
@click.option("--dataset", default=None)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.pass_context
def eval_pcc(ctx, records_path, metric, orientation, dataset, out):
    manifest = RunManifest(out, "eval pcc", sys.argv[1:])
    manifest.add_input(records_path)

    def body():
        records = _load_records(records_path)
        report = evaluation.bin_pcc(records, metric, _ORIENTATIONS[orientation])
        doc = {
            "dataset": dataset,
            "metric": metric,
            "orientation": orientation,
            "pcc_em": report.pcc_em,
            "pcc_f1": report.pcc_f1,
            "degenerate_em": report.degenerate_em,
            "degenerate_f1": report.degenerate_f1,
            "bins": [
                {"mean_em": b.mean_em, "mean_f1": b.mean_f1, "count": b.count}
                for b in report.bins
            ],
        }
        name = f"pcc_{metric}.json"
        os.makedirs(out, exist_ok=True)
        write_json(os.path.join(out, name), doc)
        manifest.add_output(name)
        click.echo(f"pcc({metric}): em={report.pcc_em:.4f} f1={report.pcc_f1:.4f}")

    _guarded(manifest, body)


@eval_group.command("auroc")
@click.option("--records", "records_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--metric", required=True)
@click.option("--orientation", type=click.Choice(sorted(_ORIENTATIONS)), default="lower")
@click.option("--dataset", default=None)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.pass_context
def eval_auroc(ctx, records_path, metric, orientation, dataset, out):
    manifest = RunManifest(out, "eval auroc", sys.argv[1:])
    manifest.add_input(records_path)

    def body():
        records = _load_records(records_path)
        value = evaluation.pairwise_auroc(records, metric, _ORIENTATIONS[orientation])
        name = f"auroc_{metric}.json"
        os.makedirs(out, exist_ok=True)
        write_json(
            os.path.join(out, name),
            {"dataset": dataset, "metric": metric, "orientation": orientation, "auroc": value},
        )
        manifest.add_output(name)
        click.echo(f"auroc({metric}): {value:.4f}")

    _guarded(manifest, body)


@eval_group.command("qa")
@click.option("--records", "records_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--strip-articles", is_flag=True, default=False)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.pass_context
def eval_qa(ctx, records_path, strip_articles, out):
    """Score predictions against gold answers; rewrites records with em/f1 filled."""
    manifest = RunManifest(out, "eval qa", sys.argv[1:])
    manifest.add_input(records_path)

    def body():
        records = _load_records(records_path)
        if not records:
            raise evaluation.EvalError("records file is empty")
        scored = []
        ems, f1s = [], []
        for r in records:
            if not r.gold_answers:
                raise evaluation.EvalError(f"query {r.query_id!r} has no gold answers")
            em, f1 = evaluation.em_f1(r.prediction, r.gold_answers, strip_articles)
            ems.append(em)
            f1s.append(f1)
            per_candidate = []
            for c in r.per_candidate:
                if c.prediction is not None:
                    cem, cf1 = evaluation.em_f1(c.prediction, r.gold_answers, strip_articles)
                    c = evaluation.CandidateOutcome(
                        candidate_id=c.candidate_id,
                        metric_scores=c.metric_scores,
                        em=cem,
                        f1=cf1,
                        prediction=c.prediction,
                    )
                per_candidate.append(c)
            scored.append(
                evaluation.QaRecord(
                    query_id=r.query_id,
                    prediction=r.prediction,
                    gold_answers=r.gold_answers,
                    per_candidate=tuple(per_candidate),
                )
            )
        os.makedirs(out, exist_ok=True)
        write_json(
            os.path.join(out, "records_scored.json"),
            [evaluation.qa_record_to_dict(r) for r in scored],
        )
        summary = {
            "n_queries": len(records),
            "mean_em": sum(ems) / len(ems),
            "mean_f1": sum(f1s) / len(f1s),
            "strip_articles": strip_articles,
        }
        write_json(os.path.join(out, "qa_summary.json"), summary)
        manifest.add_output("records_scored.json")
        manifest.add_output("qa_summary.json")
        click.echo(f"qa: em={summary['mean_em']:.4f} f1={summary['mean_f1']:.4f}")

    _guarded(manifest, body)


@eval_group.command("entropy")
@click.option("--dists", "dists_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--base", type=click.Choice(["nats", "bits"]), default="nats")
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.pass_context
def eval_entropy(ctx, dists_path, base, out):
    """Mean answer entropy of a JSON array of log-probability distributions."""
    manifest = RunManifest(out, "eval entropy", sys.argv[1:])
    manifest.add_input(dists_path)

    def body():
        with open(dists_path, "r", encoding="utf-8") as f:
            dists = json.load(f)
        value = evaluation.answer_entropy(dists, base=base)
        os.makedirs(out, exist_ok=True)
        write_json(os.path.join(out, "entropy.json"), {"entropy": value, "base": base})
        manifest.add_output("entropy.json")
        click.echo(f"entropy: {value:.6f} {base}")

    _guarded(manifest, body)


# ------------------------------------------------------------------- probe

@main.group("probe")
def probe_group():
    """Gaussian probe generation and gap-score selection."""


@probe_group.command("generate")
@click.option("--n-probes", type=int, default=None)
@click.option("--probe-dim", type=int, default=None)
@click.option("--sigma", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.pass_context
def probe_generate(ctx, n_probes, probe_dim, sigma, seed, out):
    cfg = _resolve_cfg(
        ctx,
        out,
        "probe generate",
        probe_n_probes=n_probes,
        probe_probe_dim=probe_dim,
        probe_sigma=sigma,
        probe_seed=seed,
    )
    manifest = RunManifest(out, "probe generate", sys.argv[1:], seed=cfg.probe.seed)

    def body():
        vectors = probes.generate_probes(cfg.probe)
        probes.save_probes(vectors, cfg.probe, out)
        manifest.add_output(probes.PROBE_INDEX_FILE)
        for i in range(len(vectors)):
            manifest.add_output(f"probe_{i:03d}.spsf")
        click.echo(f"wrote {len(vectors)} probes (dim={cfg.probe.probe_dim}, sigma={cfg.probe.sigma})")

    _guarded(manifest, body)


@probe_group.command("score")
@click.option("--manifest", "manifest_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--top-p-gaps", type=int, default=None)
@click.option("--retain", type=int, default=None)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.pass_context
def probe_score(ctx, manifest_path, top_p_gaps, retain, out):
    """Gap-score the hidden states in a probe manifest and pick the retained set."""
    cfg = _resolve_cfg(ctx, out, "probe score", probe_top_p_gaps=top_p_gaps, probe_retain=retain)
    manifest = RunManifest(out, "probe score", sys.argv[1:])
    manifest.add_input(manifest_path)

    def body():
        pman = probes.read_probe_manifest(manifest_path)
        results = probes.score_probe_manifest(pman, cfg.probe.top_p_gaps)
        kept = probes.select_probes(results, min(cfg.probe.retain, len(results)))
        doc = {
            "query_id": pman.query_id,
            "top_p_gaps": cfg.probe.top_p_gaps,
            "results": [
                {
                    "candidate_id": pman.entries[r.probe_index].candidate_id,
                    "probe_index": r.probe_index,
                    "score": r.score,
                }
                for r in results
            ],
            "retained": [pman.entries[r.probe_index].candidate_id for r in kept],
        }
        os.makedirs(out, exist_ok=True)
        write_json(os.path.join(out, "probe_scores.json"), doc)
        manifest.add_output("probe_scores.json")
        click.echo(f"retained {len(kept)} of {len(results)} probes")

    _guarded(manifest, body)


# ------------------------------------------------------------------ oracle

@main.group("oracle")
def oracle_group():
    """Randomized checks of the bounder-vector guarantees."""


def _parse_sizes(text: str) -> list[int]:
    try:
        sizes = [int(s) for s in text.split(",") if s]
    except ValueError:
        raise ConfigError(f"--sizes must be comma-separated integers, got {text!r}") from None
    if not sizes or any(s < 1 for s in sizes):
        raise ConfigError(f"--sizes must be positive, got {text!r}")
    return sizes


@oracle_group.command("theorems")
@click.option("--dim", type=int, default=2)
@click.option("--sizes", default="100,1000,10000")
@click.option("--trials", type=int, default=100)
@click.option("--check-trials", type=int, default=10000,
              help="trials for the subsequence and convex-hull checks")
@click.option("--states-rows", type=int, default=64)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.pass_context
def oracle_theorems(ctx, dim, sizes, trials, check_trials, states_rows, seed, out):
    cfg = _resolve_cfg(ctx, out, "oracle theorems", seed=seed)
    manifest = RunManifest(out, "oracle theorems", sys.argv[1:], seed=cfg.seed)

    def body():
        size_list = _parse_sizes(sizes)
        rng = np.random.default_rng(cfg.seed)
        states = rng.standard_normal((states_rows, dim))
        sub_report = bounds.check_subsequence_bound(states, check_trials, cfg.seed)
        hull_report = bounds.check_convex_hull_bound(states, check_trials, cfg.seed)
        conv = bounds.bounder_convergence(dim, size_list, trials, cfg.seed)
        doc = {
            "subsequence_bound": {
                "trials": sub_report.trials,
                "violations": sub_report.violations,
                "passed": sub_report.passed,
            },
            "convex_hull_bound": {
                "trials": hull_report.trials,
                "violations": hull_report.violations,
                "passed": hull_report.passed,
            },
            "convergence": {
                "dim": conv.dim,
                "sizes": list(conv.sizes),
                "trials": conv.trials,
                "medians": list(conv.medians),
                "non_increasing": conv.non_increasing,
            },
        }
        os.makedirs(out, exist_ok=True)
        write_json(os.path.join(out, "theorems.json"), doc)
        manifest.add_output("theorems.json")
        click.echo(f"subsequence bound: {sub_report.violations} violations / {sub_report.trials} trials")
        click.echo(f"convex hull bound: {hull_report.violations} violations / {hull_report.trials} trials")
        click.echo(f"{'size':>8}  {'median gap':>12}")
        for m, med in zip(conv.sizes, conv.medians):
            click.echo(f"{m:>8}  {med:>12.6f}")
        click.echo(f"medians non-increasing: {conv.non_increasing}")

    _guarded(manifest, body)


@oracle_group.command("ratio")
@click.option("--dim", type=int, default=8)
@click.option("--sigma", type=float, default=1.0)
@click.option("--sizes", default="100,1000,10000")
@click.option("--trials", type=int, default=100)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.pass_context
def oracle_ratio(ctx, dim, sigma, sizes, trials, seed, out):
    cfg = _resolve_cfg(ctx, out, "oracle ratio", seed=seed)
    manifest = RunManifest(out, "oracle ratio", sys.argv[1:], seed=cfg.seed)

    def body():
        size_list = _parse_sizes(sizes)
        report = bounds.ratio_curve(dim, sigma, size_list, trials, cfg.seed)
        doc = {
            "dim": report.dim,
            "sigma": report.sigma,
            "sizes": list(report.sizes),
            "trials": report.trials,
            "mean_ratios": list(report.mean_ratios),
            "strictly_decreasing": report.strictly_decreasing,
            "fit_coefficient": report.fit_coefficient,
            "fitted": list(report.fitted()),
        }
        os.makedirs(out, exist_ok=True)
        write_json(os.path.join(out, "ratio.json"), doc)
        manifest.add_output("ratio.json")
        click.echo(f"{'size':>8}  {'mean R':>10}  {'fit':>10}")
        for m, r, f in zip(report.sizes, report.mean_ratios, report.fitted()):
            fit_text = f"{f:>10.6f}" if f is not None else f"{'-':>10}"
            click.echo(f"{m:>8}  {r:>10.6f}  {fit_text}")
        click.echo(f"strictly decreasing: {report.strictly_decreasing}")

    _guarded(manifest, body)


if __name__ == "__main__":
    main()
