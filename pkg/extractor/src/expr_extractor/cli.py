"""`extract` command line entry point.

Exit codes: 0 success, 1 data/checkpoint errors, 2 usage errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .models import CheckpointError
from .pipeline import ExtractError, ExtractionJob, extract_comparisons, extract_features


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="extract")
    sub = parser.add_subparsers(dest="command", required=True)

    feat = sub.add_parser("features", help="emit embedding/softmax matrices and a manifest")
    feat.add_argument("--image-root", required=True, type=Path)
    feat.add_argument("--labels", required=True, type=Path)
    feat.add_argument("--checkpoint-1", required=True, type=Path)
    feat.add_argument("--checkpoint-2", required=True, type=Path)
    feat.add_argument("--out", required=True, type=Path)
    feat.add_argument("--device", choices=["cpu", "accelerator"], default="cpu")
    feat.add_argument("--batch-size", type=int, default=16)

    comp = sub.add_parser("comparisons", help="emit within-subject mated comparison scores")
    comp.add_argument("--image-root", required=True, type=Path)
    comp.add_argument("--labels", required=True, type=Path)
    comp.add_argument("--fr-checkpoint", required=True, type=Path)
    comp.add_argument("--out", required=True, type=Path)
    comp.add_argument("--device", choices=["cpu", "accelerator"], default="cpu")
    comp.add_argument("--batch-size", type=int, default=16)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "features":
            job = ExtractionJob(
                image_root=args.image_root,
                labels_file=args.labels,
                checkpoint_1=args.checkpoint_1,
                checkpoint_2=args.checkpoint_2,
                output_dir=args.out,
                device=args.device,
                batch_size=args.batch_size,
            )
            paths = extract_features(job)
            for name in sorted(paths):
                print(f"{name}={paths[name]}")
        else:
            n_pairs = extract_comparisons(
                image_root=args.image_root,
                labels_file=args.labels,
                fr_checkpoint=args.fr_checkpoint,
                out_path=args.out,
                device=args.device,
                batch_size=args.batch_size,
            )
            print(f"pairs={n_pairs}")
            print(f"out={args.out}")
    except (ExtractError, CheckpointError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
