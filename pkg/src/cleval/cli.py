"""Command-line interface: evaluate, perturb, and baseline subcommands.

Exit codes: 0 on success, 2 for input or configuration errors (with
file:line context where available), 1 for unexpected internal failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .dataio import (
    CorpusError,
    emit_baseline_report,
    emit_report,
    load_corpus,
    load_gt_map,
    write_detection_dir,
)
from .evaluate import RunConfig, evaluate_corpus, run_baseline
from .geometry import GeometryError
from .harness import Perturbation, perturb_corpus

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2


def _jobs_default() -> int:
    env = os.environ.get("CLEVAL_JOBS")
    if env is None:
        return 0
    try:
        value = int(env)
    except ValueError:
        raise ValueError(f"CLEVAL_JOBS must be an integer, got {env!r}") from None
    if value < 0:
        raise ValueError("CLEVAL_JOBS must be >= 0")
    return value


def _add_common_eval_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--gt", required=True, help="ground-truth directory or JSON corpus")
    parser.add_argument("--det", help="detection directory or JSON corpus")
    parser.add_argument("--mode", choices=("det", "detection", "e2e"),
                        default="det", help="evaluation mode (default: det)")
    parser.add_argument("--case-sensitive", action="store_true",
                        help="compare transcriptions case-sensitively")
    parser.add_argument("--dont-care-fraction", type=float, default=0.5,
                        help="area fraction above which a detection is absorbed "
                             "by don't-care regions (default: 0.5)")
    parser.add_argument("--output", "-o", help="write the report here instead of stdout")
    parser.add_argument("--format", choices=("json", "csv"), default="json",
                        help="report format (default: json)")
    parser.add_argument("--per-sample", action="store_true",
                        help="include a per-image breakdown in the report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cleval",
        description="Character-level evaluation of text detection and recognition outputs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    eval_parser = sub.add_parser("eval", help="score detections against ground truth")
    _add_common_eval_args(eval_parser)
    eval_parser.add_argument("--ap-threshold", type=float, default=0.5,
                             help="area-precision match gate (default: 0.5)")
    eval_parser.add_argument("--jobs", type=int, default=None,
                             help="worker processes; 0 = auto "
                                  "(default: $CLEVAL_JOBS or 0)")
    eval_parser.set_defaults(func=_cmd_eval)

    perturb_parser = sub.add_parser(
        "perturb", help="derive a synthetic detection corpus from ground truth"
    )
    perturb_parser.add_argument("--gt", required=True,
                                help="ground-truth directory or JSON corpus")
    perturb_parser.add_argument("--out", required=True,
                                help="output directory for detection files")
    perturb_parser.add_argument("--kind", required=True,
                                choices=("crop", "split", "overlap",
                                         "insert", "delete", "replace"))
    perturb_parser.add_argument("--ratio", type=float,
                                help="crop/overlap width fraction")
    perturb_parser.add_argument("--n", type=int, help="split count")
    perturb_parser.add_argument("--k", type=int, help="character edit count")
    perturb_parser.add_argument("--seed", type=int, default=0)
    perturb_parser.set_defaults(func=_cmd_perturb)

    baseline_parser = sub.add_parser(
        "baseline", help="IoU (and exact-match) baseline scores"
    )
    _add_common_eval_args(baseline_parser)
    baseline_parser.add_argument("--iou-threshold", type=float, default=0.5,
                                 help="IoU match gate (default: 0.5)")
    baseline_parser.set_defaults(func=_cmd_baseline)
    return parser


def _emit(data: bytes, output: str | None) -> None:
    if output:
        with open(output, "wb") as handle:
            handle.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()


def _cmd_eval(args: argparse.Namespace) -> int:
    jobs = args.jobs if args.jobs is not None else _jobs_default()
    config = RunConfig(
        gt_path=args.gt,
        det_path=args.det,
        mode=args.mode,
        ap_threshold=args.ap_threshold,
        case_sensitive=args.case_sensitive,
        dont_care_fraction=args.dont_care_fraction,
        output=args.output,
        format=args.format,
        per_sample=args.per_sample,
        jobs=jobs,
    )
    corpus = load_corpus(config.gt_path, config.det_path, config.mode)
    report = evaluate_corpus(corpus, config)
    for warning in report.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    _emit(emit_report(report, config.format, config.per_sample), args.output)
    return EXIT_OK


def _perturbation_from_args(args: argparse.Namespace) -> Perturbation:
    if args.kind in ("crop", "overlap"):
        if args.ratio is None:
            raise ValueError(f"--ratio is required for kind {args.kind!r}")
        magnitude: float | int = args.ratio
    elif args.kind == "split":
        if args.n is None:
            raise ValueError("--n is required for kind 'split'")
        magnitude = args.n
    else:
        if args.k is None:
            raise ValueError(f"--k is required for kind {args.kind!r}")
        magnitude = args.k
    return Perturbation(kind=args.kind, magnitude=magnitude, seed=args.seed)


def _cmd_perturb(args: argparse.Namespace) -> int:
    perturbation = _perturbation_from_args(args)
    gt_map = load_gt_map(args.gt, mode="e2e" if args.kind in
                         ("insert", "delete", "replace") else "detection")
    det_map = perturb_corpus(gt_map, perturbation)
    written = write_detection_dir(det_map, args.out)
    manifest = {
        "kind": perturbation.kind,
        "magnitude": perturbation.magnitude,
        "seed": perturbation.seed,
        "images": len(det_map),
        "instances": written,
        "out": str(args.out),
    }
    print(json.dumps(manifest, sort_keys=True))
    return EXIT_OK


def _cmd_baseline(args: argparse.Namespace) -> int:
    config = RunConfig(
        gt_path=args.gt,
        det_path=args.det,
        mode=args.mode,
        case_sensitive=args.case_sensitive,
        dont_care_fraction=args.dont_care_fraction,
        output=args.output,
        format=args.format,
        per_sample=args.per_sample,
    )
    if not 0.0 < args.iou_threshold < 1.0:
        raise ValueError("--iou-threshold must be in (0, 1)")
    corpus = load_corpus(config.gt_path, config.det_path, config.mode)
    report = run_baseline(corpus, config, args.iou_threshold)
    _emit(emit_baseline_report(report, config.format, config.per_sample), args.output)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CorpusError, GeometryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
