#!/usr/bin/env python3
"""Generate the synthetic demo corpus (W.spsf + manifests + state tensors)."""

import argparse

from sps.synthetic import CorpusParams, make_demo_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", help="output directory")
    ap.add_argument("--queries", type=int, default=50)
    ap.add_argument("--candidates", type=int, default=5)
    ap.add_argument("--dim", type=int, default=32)
    ap.add_argument("--k-strong", type=int, default=8)
    ap.add_argument("--tokens", type=int, default=24)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    params = CorpusParams(
        n_queries=args.queries,
        n_candidates=args.candidates,
        dim=args.dim,
        k_strong=args.k_strong,
        n_tokens=args.tokens,
        seed=args.seed,
    )
    index = make_demo_corpus(args.out, params)
    print(f"wrote {index['n_queries']} queries x {index['n_candidates']} candidates")
    print(f"weights:   {index['weights']}")
    print(f"manifests: {index['manifest_dir']}")


if __name__ == "__main__":
    main()
