#!/usr/bin/env python3
"""Write the synthetic persuasive-essay-shaped corpus to a directory.

Usage:
    python3 scripts/make_synthetic_corpus.py OUT_DIR [--seed N]
    python3 scripts/make_synthetic_corpus.py OUT_DIR --small 12 --train 8
"""

from __future__ import annotations

import argparse

from atc_icl.synth import PE_SHAPE, generate_corpus, small_shape


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out_dir")
    parser.add_argument("--seed", type=int, default=20240817)
    parser.add_argument("--small", type=int, metavar="N_ESSAYS",
                        help="generate a scaled-down corpus instead of the full shape")
    parser.add_argument("--train", type=int, help="train size for --small")
    args = parser.parse_args()

    if args.small:
        shape = small_shape(args.small, args.train or max(1, args.small * 4 // 5))
    else:
        shape = PE_SHAPE
    summary = generate_corpus(args.out_dir, shape, seed=args.seed)
    for key, value in summary.items():
        print(f"{key}: {value}")


if __name__ == "__main__":
    main()
