"""relation-plugin command line: train and serve."""

from __future__ import annotations

import argparse
import json
import sys


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relation-plugin", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train on simulator-emitted crops")
    p.add_argument("--crops", required=True, help="dataset root or crops/ directory")
    p.add_argument("--out", required=True, help="model output path")
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--val-frac", type=float, default=0.2)
    p.add_argument("--batch-size", type=int, default=32)

    p = sub.add_parser("serve", help="answer NDJSON relation queries on stdin/stdout")
    p.add_argument("--model", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "train":
        from .train import train, write_metrics

        metrics = train(
            args.crops,
            args.out,
            epochs=args.epochs,
            seed=args.seed,
            val_frac=args.val_frac,
            batch_size=args.batch_size,
        )
        write_metrics(metrics, args.out + ".metrics.json")
        print(json.dumps(metrics, indent=2, sort_keys=True))
        return 0
    from .serve import serve

    serve(args.model)
    return 0


if __name__ == "__main__":
    sys.exit(main())
