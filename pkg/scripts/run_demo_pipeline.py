#!/usr/bin/env python3
"""End-to-end CLI walkthrough on a generated corpus.

Drives the installed command line through its paces: corpus generation,
subspace build, threshold calibration, controller run, and a peek at the
run summary. Useful as smoke test and as copy-paste documentation.
"""

import argparse
import json
import os
import subprocess
import sys

from sps.synthetic import CorpusParams, make_demo_corpus


def cli(*args):
    cmd = [sys.executable, "-m", "sps.cli", *map(str, args)]
    print("+", " ".join(cmd[2:]))
    subprocess.run(cmd, check=True)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", help="working directory")
    ap.add_argument("--queries", type=int, default=40)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    corpus = os.path.join(args.out, "corpus")
    index = make_demo_corpus(
        corpus, CorpusParams(n_queries=args.queries, n_candidates=5, seed=args.seed)
    )
    sub_dir = os.path.join(args.out, "subspace")
    run_dir = os.path.join(args.out, "run")
    threshold = os.path.join(args.out, "threshold.json")

    cli("subspace", "build", "--weights", index["weights"], "--variance", "0.95", "--out", sub_dir)
    cli("filter", "calibrate", "--manifests", index["manifest_dir"], "--percentile", "0.70",
        "--out", args.out)
    cli("pipeline", "run", "--subspace", sub_dir, "--manifests", index["manifest_dir"],
        "--threshold-file", threshold, "--out", run_dir)

    with open(os.path.join(run_dir, "run_summary.json")) as f:
        summary = json.load(f)
    print("\nrun summary:")
    print(json.dumps(summary, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
