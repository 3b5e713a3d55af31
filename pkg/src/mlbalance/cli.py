"""Command line interface: metric inspection, single runs and batches.

Exit codes are fixed for scriptability: 0 success, 2 load error, 3 metric
error, 4 algorithm error, 5 batch finished with failures, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from tqdm import tqdm

from .arff import DatasetSource, read_dataset
from .dataset import MultiLabelDataset, label_counts
from .exceptions import (
    AlgorithmError,
    CacheError,
    DataFormatError,
    MetricError,
    MLBalanceError,
)
from .metrics import imbalance_profile
from .runner import (
    AlgorithmSpec,
    ResampleReport,
    algorithm_names,
    effective_workers,
    prepare_structures,
    run_algorithm,
    run_batch,
)

EXIT_OK = 0
EXIT_LOAD = 2
EXIT_METRIC = 3
EXIT_ALGORITHM = 4
EXIT_PARTIAL = 5
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # noqa: D102 - argparse hook
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="mlbalance",
        description="Rebalance multilabel ARFF datasets with oversampling, "
        "undersampling and decoupling algorithms.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_source(p: _Parser) -> None:
        p.add_argument("arff", help="path to the ARFF file")
        group = p.add_mutually_exclusive_group()
        group.add_argument("--xml", help="MULAN labels XML file")
        group.add_argument(
            "-C",
            dest="label_count",
            type=int,
            help="MEKA label count (positive: labels first, negative: last)",
        )

    info = sub.add_parser("info", help="print imbalance measurements")
    add_source(info)
    info.add_argument("--json", action="store_true", help="machine readable output")

    def add_run_options(p: _Parser) -> None:
        p.add_argument("--p", type=float, default=None, dest="percentage",
                       help="percentage of instances to add or remove")
        p.add_argument("--k", type=int, default=None, help="neighborhood size")
        p.add_argument("--threshold", type=float, default=None,
                       help="labelset difference threshold")
        p.add_argument("--seed", type=int, default=0, help="master random seed")
        p.add_argument("--threads", type=int, default=None,
                       help="cache construction workers (0 = all cores; "
                       "default 1, or MLBALANCE_THREADS)")
        p.add_argument("-o", "--output-dir", required=True,
                       help="directory for generated datasets")

    run = sub.add_parser("run", help="apply one algorithm")
    run.add_argument("algorithm", metavar="ALGORITHM",
                     help=f"one of: {', '.join(algorithm_names())}")
    add_source(run)
    add_run_options(run)

    batch = sub.add_parser("batch", help="apply several algorithms, sharing caches")
    add_source(batch)
    batch.add_argument("-a", "--algorithms", required=True,
                       help="comma separated algorithm list")
    add_run_options(batch)
    batch.add_argument("--cache-file", default=None,
                       help="persist/reuse the neighbor cache at this path")
    return parser


def _load(args: argparse.Namespace) -> MultiLabelDataset:
    source = DatasetSource(
        Path(args.arff),
        Path(args.xml) if args.xml else None,
        args.label_count,
    )
    return read_dataset(source)


def _resolve_workers(args: argparse.Namespace) -> int:
    requested = args.threads
    if requested is None:
        env = os.environ.get("MLBALANCE_THREADS")
        requested = int(env) if env else 1
    return effective_workers(requested)


def _metric_lines(dataset: MultiLabelDataset) -> list[str]:
    profile = imbalance_profile(dataset)
    counts = label_counts(dataset)
    lines = [
        f"meanIR: {profile.mean_ir:.6f}",
        f"SCUMBLE: {profile.scumble:.8f}",
        "labels:",
    ]
    for i, name in enumerate(dataset.label_names):
        ratio = profile.irlbl[i]
        rendered = "undefined" if ratio != ratio else f"{ratio:.6f}"
        lines.append(f"  {name}: count={int(counts[i])} IRLbl={rendered}")
    return lines


def _cmd_info(args: argparse.Namespace) -> int:
    dataset = _load(args)
    if args.json:
        payload = {
            "name": dataset.name,
            "instances": dataset.n_instances,
            "features": dataset.n_features,
            "labels": dataset.n_labels,
        }
        try:
            profile = imbalance_profile(dataset)
        except MetricError as exc:
            payload["error"] = str(exc)
            print(json.dumps(payload, indent=2))
            return EXIT_METRIC
        counts = label_counts(dataset)
        payload["meanIR"] = profile.mean_ir
        payload["scumble"] = profile.scumble
        payload["label_detail"] = {
            name: {
                "count": int(counts[i]),
                "irlbl": None if profile.irlbl[i] != profile.irlbl[i]
                else profile.irlbl[i],
            }
            for i, name in enumerate(dataset.label_names)
        }
        print(json.dumps(payload, indent=2))
        return EXIT_OK
    print(f"name: {dataset.name}")
    print(f"instances: {dataset.n_instances}")
    print(f"features: {dataset.n_features}")
    print(f"labels: {dataset.n_labels}")
    try:
        for line in _metric_lines(dataset):
            print(line)
    except MetricError as exc:
        print(f"metric error: {exc}", file=sys.stderr)
        return EXIT_METRIC
    return EXIT_OK


def _progress_bar():
    bar = tqdm(total=100, desc="neighbor cache", unit="%", disable=None)

    def update(fraction: float) -> None:
        pct = int(fraction * 100)
        if pct > bar.n:
            bar.update(pct - bar.n)

    return bar, update


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        spec = AlgorithmSpec.create(
            args.algorithm, args.percentage, args.k, args.threshold, strict=True
        )
    except ValueError as exc:
        print(f"mlbalance: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    dataset = _load(args)
    workers = _resolve_workers(args)
    print(f"parallel workers: {workers}")

    report = ResampleReport(dataset=dataset.name, workers=workers)
    bar, update = _progress_bar()
    try:
        vdm, cache = prepare_structures(
            dataset, [spec], workers, report, echo=print, progress=update
        )
    finally:
        bar.close()

    before = None
    try:
        before = imbalance_profile(dataset)
    except MetricError:
        pass
    result = run_algorithm(dataset, spec, args.output_dir, args.seed, vdm, cache)
    print(f"algorithm: {spec.name}")
    print(f"instances: {result.instances_before} -> {result.instances_after}")
    if before is not None:
        resampled = read_dataset(
            DatasetSource(result.output_path,
                          result.output_path.with_suffix(".xml"))
        )
        try:
            after = imbalance_profile(resampled)
            print(f"meanIR: {before.mean_ir:.6f} -> {after.mean_ir:.6f}")
            print(f"SCUMBLE: {before.scumble:.8f} -> {after.scumble:.8f}")
        except MetricError:
            print("output metrics unavailable (no active labels)")
    print(f"seconds: {result.seconds:.4f}")
    print(f"output: {result.output_path}")
    return EXIT_OK


def _cmd_batch(args: argparse.Namespace) -> int:
    names = [n for n in args.algorithms.split(",") if n.strip()]
    if not names:
        print("mlbalance: error: no algorithms given", file=sys.stderr)
        return EXIT_USAGE
    try:
        specs = [
            AlgorithmSpec.create(
                n.strip(), args.percentage, args.k, args.threshold, strict=False
            )
            for n in names
        ]
    except ValueError as exc:
        print(f"mlbalance: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    dataset = _load(args)
    workers = _resolve_workers(args)
    print(f"parallel workers: {workers}")
    bar, update = _progress_bar()
    try:
        report = run_batch(
            dataset,
            specs,
            args.output_dir,
            seed=args.seed,
            workers=workers,
            cache_file=args.cache_file,
            echo=print,
            progress=update,
        )
    finally:
        bar.close()
    print(f"generated datasets stored under {args.output_dir}")
    print(f"{'algorithm':<12} {'seconds':>12}")
    for result in report.results:
        if result.error:
            print(f"{result.algorithm:<12} {'failed':>12}  ({result.error})")
        else:
            print(f"{result.algorithm:<12} {result.seconds:>12.4f}")
    return EXIT_PARTIAL if report.failed else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "info":
            return _cmd_info(args)
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_batch(args)
    except (DataFormatError, FileNotFoundError, OSError) as exc:
        print(f"mlbalance: load error: {exc}", file=sys.stderr)
        return EXIT_LOAD
    except MetricError as exc:
        print(f"mlbalance: metric error: {exc}", file=sys.stderr)
        return EXIT_METRIC
    except (AlgorithmError, CacheError) as exc:
        print(f"mlbalance: algorithm error: {exc}", file=sys.stderr)
        return EXIT_ALGORITHM
    except MLBalanceError as exc:
        print(f"mlbalance: error: {exc}", file=sys.stderr)
        return EXIT_ALGORITHM


if __name__ == "__main__":
    sys.exit(main())
