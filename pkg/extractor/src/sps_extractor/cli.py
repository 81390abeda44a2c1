"""`sps-extract`: dump model-side tensors into the scoring interchange format."""

from __future__ import annotations

import json
import sys

import click

from .errors import JobError
from .jobs import DecodeSettings, ExtractionJob, dump_candidates, dump_probe_states, dump_weights
from .models import make_tiny_model


def _run(fn):
    try:
        return fn()
    except JobError as e:
        click.echo(f"job error: {e}", err=True)
        sys.exit(1)


@click.group()
def main():
    """Model-side extraction to .spsf tensors and JSON manifests."""


@main.command("weights")
@click.option("--model", "model_id", required=True)
@click.option("--source", type=click.Choice(["embeddings", "hidden-bank"]), default="embeddings")
@click.option("--layer", default="penultimate", help="used by the hidden-bank source")
@click.option("--inputs", "inputs_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSON inputs, required for hidden-bank")
@click.option("--out", required=True)
def weights_cmd(model_id, source, layer, inputs_path, out):
    inputs = []
    if inputs_path:
        with open(inputs_path, "r", encoding="utf-8") as f:
            inputs = json.load(f)
    job = ExtractionJob(
        model_id=model_id, output_dir=out, layer=layer, inputs=inputs, weights_source=source
    )
    meta = _run(lambda: dump_weights(job))
    click.echo(f"W: {meta['d']} x {meta['m']} ({meta['source']}), fingerprint {meta['fingerprint'][:12]}")


@main.command("candidates")
@click.option("--model", "model_id", required=True)
@click.option("--reader-model", default=None)
@click.option("--inputs", "inputs_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--layer", default="penultimate")
@click.option("--num-candidates", type=int, default=5)
@click.option("--temperature", type=float, default=1.0)
@click.option("--repetition-penalty", type=float, default=1.2)
@click.option("--max-new-tokens", type=int, default=48)
@click.option("--seed", type=int, default=0)
@click.option("--greedy", is_flag=True, default=False)
@click.option("--states-from", type=click.Choice(["reader", "compressor"]), default="reader")
@click.option("--out", required=True)
def candidates_cmd(
    model_id, reader_model, inputs_path, layer, num_candidates, temperature,
    repetition_penalty, max_new_tokens, seed, greedy, states_from, out,
):
    with open(inputs_path, "r", encoding="utf-8") as f:
        inputs = json.load(f)
    job = ExtractionJob(
        model_id=model_id,
        reader_model_id=reader_model,
        output_dir=out,
        layer=layer,
        inputs=inputs,
        seed=seed,
        states_from=states_from,
        decode=DecodeSettings(
            temperature=temperature,
            repetition_penalty=repetition_penalty,
            num_candidates=num_candidates,
            max_new_tokens=max_new_tokens,
            greedy=greedy,
        ),
    )
    log = _run(lambda: dump_candidates(job))
    for q in log["queries"]:
        click.echo(f"{q['query_id']}: {q['n_candidates']} candidates"
                   + (f", {len(q['errors'])} errors" if q["errors"] else ""))


@main.command("probes")
@click.option("--model", "model_id", required=True)
@click.option("--probes", "probes_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--question", required=True)
@click.option("--summary", required=True)
@click.option("--layer", default="penultimate")
@click.option("--include-baseline", is_flag=True, default=False)
@click.option("--out", required=True)
def probes_cmd(model_id, probes_dir, question, summary, layer, include_baseline, out):
    job = ExtractionJob(model_id=model_id, output_dir=out, layer=layer)
    result = _run(
        lambda: dump_probe_states(job, probes_dir, question, summary, include_baseline)
    )
    click.echo(f"{result['n_probes']} probe states of dim {result['d']}")


@main.command("make-tiny-model")
@click.option("--out", required=True)
@click.option("--seed", type=int, default=0)
@click.option("--dim", type=int, default=64)
@click.option("--layers", type=int, default=2)
@click.option("--heads", type=int, default=2)
def make_tiny_model_cmd(out, seed, dim, layers, heads):
    """Build the offline test model (public GPT-2 architecture, seeded init)."""
    path = make_tiny_model(out, seed=seed, dim=dim, layers=layers, heads=heads)
    click.echo(f"tiny model at {path} (dim={dim}, layers={layers})")


if __name__ == "__main__":
    main()
