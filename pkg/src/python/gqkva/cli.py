"""Command-line entry point: verify, count, bench, train and scatter."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from ..modules.logging import python_logging_framework as plog
from ..modules.utils.error_handling import (
    ExitCode,
    error_handler,
    run_guarded,
    with_error_handling,
)
from ..modules.utils.file_operations import atomic_write_text, is_writable
from .attention.layer import ScaleMode
from .attention.scheme import expand_schemes
from .bench.reference import reference_records
from .bench.report import (
    CompareOptions,
    compare_table,
    format_table,
    read_report_json,
    records_to_csv,
    report_to_json,
    scatter_data,
    write_report,
    write_scatter,
)
from .constants import (
    DEFAULT_LR,
    DEFAULT_SCHEDULE,
    DEFAULT_SEED,
    DEFAULT_STEPS,
    DEFAULT_TIMED_ITERS,
    DEFAULT_TOY_BATCH,
    DEFAULT_WARMUP_ITERS,
    DEFAULT_WEIGHT_DECAY,
    HELP_EPILOG,
    SYNTH_SAMPLES,
    TRAIN_LOG_FILE,
    VERSION,
)
from .core.tensor import DType
from .model.config import PRESET_NAMES, ViTConfig, preset_config
from .training.data import load_dataset_dir, synth_dataset
from .training.optimizer import Schedule, TrainHyper
from .training.trainer import TrainLog, train_loop
from .verify import run_suite

__version__ = VERSION

logger = plog.get_logger(__name__)

REDUCTION_HEADS = (2, 4, 6)


def _add_logging_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG"
    )
    p.add_argument("--log-file", help="Also write DEBUG-level records to this file")
    p.add_argument("--log-json", action="store_true", help="Emit log records as JSON lines")


def _add_model_flags(p: argparse.ArgumentParser, default_schemes: Sequence[str]) -> None:
    p.add_argument(
        "--schemes",
        nargs="+",
        default=list(default_schemes),
        help="Scheme strings or bundles (table1, all)",
    )
    p.add_argument("--preset", default="tiny", choices=PRESET_NAMES, help="Model preset")
    p.add_argument("--heads", type=int, help="Override the preset's head count h")
    p.add_argument("--dim", type=int, help="Override the embedding size d")
    p.add_argument("--depth", type=int, help="Override the number of blocks")
    p.add_argument("--classes", type=int, help="Override the number of classes")
    p.add_argument("--image-size", type=int, help="Override the square image side")
    p.add_argument("--patch", type=int, help="Override the square patch side")
    p.add_argument(
        "--scale-mode",
        default=ScaleMode.HEAD_DIM.value,
        choices=[m.value for m in ScaleMode],
        help="Attention score denominator: sqrt(head_dim) or sqrt(d)",
    )
    p.add_argument("--dtype", default="f32", choices=["f32", "f64"], help="Element type")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Random seed")


def _add_output_flags(p: argparse.ArgumentParser, formats: Sequence[str], default: str) -> None:
    p.add_argument("--out", help="Output file (or directory, where noted)")
    p.add_argument("--format", default=default, choices=list(formats), help="Output format")


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gqkva",
        description=f"Grouped Q/K/V attention toolkit v{__version__}",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=HELP_EPILOG,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", help="Operation")

    verify = subparsers.add_parser("verify", help="Run the invariant suite")
    verify.add_argument("--schemes", nargs="+", default=["all"], help="Schemes or bundles")
    verify.add_argument("--heads", type=int, default=6, help="Head count for the schemes")
    verify.add_argument(
        "--reduction-heads",
        type=int,
        nargs="+",
        default=list(REDUCTION_HEADS),
        help="Head counts for the reduction and FLOP-ordering checks",
    )
    verify.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Random seed")
    verify.add_argument(
        "--scale-mode",
        default=ScaleMode.HEAD_DIM.value,
        choices=[m.value for m in ScaleMode],
        help="Attention score denominator",
    )
    _add_output_flags(verify, ("text", "json"), "text")
    verify.set_defaults(handler=cmd_verify)

    count = subparsers.add_parser("count", help="Parameter, size and FLOP columns")
    _add_model_flags(count, ["table1"])
    count.add_argument("--batch", type=int, default=1, help="Images per forward for FLOPs")
    _add_output_flags(count, ("table", "csv", "json"), "table")
    count.set_defaults(handler=cmd_count)

    bench = subparsers.add_parser("bench", help="Time training steps per scheme")
    _add_model_flags(bench, ["table1"])
    bench.add_argument("--batch", type=int, default=DEFAULT_TOY_BATCH, help="Batch size")
    bench.add_argument("--iters", type=int, default=DEFAULT_TIMED_ITERS, help="Timed iterations")
    bench.add_argument(
        "--warmup", type=int, default=DEFAULT_WARMUP_ITERS, help="Untimed warmup iterations"
    )
    bench.add_argument(
        "--runs",
        help="Directory of training runs (<scheme>/train_log.jsonl) supplying accuracies",
    )
    bench.add_argument("--progress", action="store_true", help="Show a progress bar")
    _add_output_flags(bench, ("csv", "json"), "csv")
    bench.set_defaults(handler=cmd_bench)

    train = subparsers.add_parser("train", help="Train the micro-ViT on toy data")
    _add_model_flags(train, ["mha"])
    train.add_argument("--batch", type=int, default=DEFAULT_TOY_BATCH, help="Batch size")
    train.add_argument("--steps", type=int, default=DEFAULT_STEPS, help="Optimizer steps")
    train.add_argument("--lr", type=float, default=DEFAULT_LR, help="Peak learning rate")
    train.add_argument(
        "--weight-decay", type=float, default=DEFAULT_WEIGHT_DECAY, help="AdamW weight decay"
    )
    train.add_argument(
        "--schedule",
        default=DEFAULT_SCHEDULE,
        choices=[s.value for s in Schedule],
        help="Learning-rate schedule",
    )
    train.add_argument("--warmup-steps", type=int, default=0, help="Linear warmup steps")
    train.add_argument("--dataset", help="Dataset directory (default: synthetic gratings)")
    train.add_argument(
        "--samples", type=int, default=SYNTH_SAMPLES, help="Synthetic dataset size"
    )
    train.add_argument("--progress", action="store_true", help="Show a progress bar")
    train.add_argument(
        "--out", help="Run directory; one sub-directory per scheme when several are given"
    )
    train.set_defaults(handler=cmd_train)

    scatter = subparsers.add_parser("scatter", help="Size/TPS versus accuracy series")
    source = scatter.add_mutually_exclusive_group(required=True)
    source.add_argument("--records", help="JSON report from 'bench --format json'")
    source.add_argument(
        "--reference", action="store_true", help="Use the published ViT-small rows"
    )
    scatter.add_argument(
        "--exclude", nargs="*", default=[], help="Scheme labels left out of the fit"
    )
    scatter.add_argument("--out", required=True, help="Output directory")
    scatter.set_defaults(handler=cmd_scatter)

    for sub in (verify, count, bench, train, scatter):
        _add_logging_flags(sub)
    return parser


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    return {
        "h": args.heads,
        "d": args.dim,
        "depth": args.depth,
        "num_classes": args.classes,
        "image_size": args.image_size,
        "patch_size": args.patch,
        "scale_mode": args.scale_mode,
    }


def _model_configs(args: argparse.Namespace) -> list[ViTConfig]:
    base = preset_config(args.preset, "mha", **_overrides(args))
    names = expand_schemes(args.schemes, base.h)
    return [base.with_scheme(name) for name in names]


@with_error_handling("Failed to write output")
def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = atomic_write_text(out, text)
    plog.log_info(logger, "Output written", {"Path": str(path)})


def _run_accuracies(runs: Optional[str], configs: Sequence[ViTConfig]) -> dict[str, float]:
    """Final validation accuracy (percent) of each scheme that has a run log under ``runs``."""
    if runs is None:
        return {}
    found = {}
    for cfg in configs:
        log_path = Path(runs) / cfg.grouping.canonical / TRAIN_LOG_FILE
        if not log_path.is_file():
            plog.log_warning(logger, "No training log", {"Path": str(log_path)})
            continue
        acc: Optional[float] = None
        with error_handler(
            f"Skipping unreadable training log {log_path}",
            reraise=False,
            log_level=logging.WARNING,
            log=logger,
        ):
            acc = TrainLog.from_jsonl(log_path.read_text(encoding="utf-8")).final_accuracy
        if acc is not None:
            found[cfg.grouping.label] = acc * 100.0
    return found


def _require_writable(out: Optional[str]) -> None:
    """Fail before any work when the output directory cannot take files."""
    if out is not None and not is_writable(out):
        raise OSError(f"Output directory '{out}' is not writable")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_verify(args: argparse.Namespace) -> int:
    names = expand_schemes(args.schemes, args.heads)
    report = run_suite(
        names,
        args.heads,
        args.seed,
        ScaleMode(args.scale_mode),
        head_counts=[*args.reduction_heads, args.heads],
    )
    _emit(report.to_json() if args.format == "json" else report.to_text(), args.out)
    if not report.passed:
        plog.log_error(
            logger, f"{len(report.failures)} invariant check(s) failed", {"Seed": args.seed}
        )
        return int(ExitCode.INVARIANT_FAILURE)
    return int(ExitCode.OK)


def cmd_count(args: argparse.Namespace) -> int:
    configs = _model_configs(args)
    report = compare_table(configs, CompareOptions(batch_size=args.batch))
    if args.format == "table":
        _emit(format_table(report), args.out)
    elif args.format == "csv":
        _emit(records_to_csv(report.records), args.out)
    else:
        _emit(report_to_json(report), args.out)
    return int(ExitCode.OK)


def cmd_bench(args: argparse.Namespace) -> int:
    configs = _model_configs(args)
    options = CompareOptions(
        batch_size=args.batch,
        measure=True,
        warmup_iters=args.warmup,
        timed_iters=args.iters,
        seed=args.seed,
        dtype=DType.parse(args.dtype),
        accuracies=_run_accuracies(args.runs, configs),
    )
    report = compare_table(configs, options, progress=args.progress)
    sys.stdout.write(format_table(report))
    if args.out:
        write_report(args.out, report, args.format)
    return int(ExitCode.OK)


def cmd_train(args: argparse.Namespace) -> int:
    _require_writable(args.out)
    configs = _model_configs(args)
    first = configs[0]
    if args.dataset:
        dataset = load_dataset_dir(args.dataset)
    else:
        dataset = synth_dataset(
            args.seed,
            n_samples=args.samples,
            image_size=first.image_size,
            classes=first.num_classes,
            channels=first.in_channels,
        )
    hyper = TrainHyper(
        lr=args.lr,
        weight_decay=args.weight_decay,
        batch_size=args.batch,
        steps=args.steps,
        schedule=Schedule(args.schedule),
        warmup_steps=args.warmup_steps,
        seed=args.seed,
    )
    several = len(configs) > 1
    for cfg in configs:
        out_dir: Optional[Path] = None
        if args.out:
            out_dir = Path(args.out) / cfg.grouping.canonical if several else Path(args.out)
        result = train_loop(
            cfg, hyper, dataset, out_dir, progress=args.progress, dtype=DType.parse(args.dtype)
        )
        log = result.log
        acc = "n/a" if log.final_accuracy is None else f"{log.final_accuracy:.3f}"
        sys.stdout.write(
            f"{cfg.grouping.label:<12} loss {log.initial_loss:.4f} -> {log.final_loss:.4f}"
            f"  val acc {acc}\n"
        )
    return int(ExitCode.OK)


def cmd_scatter(args: argparse.Namespace) -> int:
    _require_writable(args.out)
    records = reference_records() if args.reference else read_report_json(args.records)
    report = scatter_data(records, exclude=args.exclude)
    write_scatter(args.out, report)
    for series in (report.size_vs_acc, report.tps_vs_acc):
        if series is None:
            continue
        fit = series.fit
        sys.stdout.write(
            f"{series.name}: slope {fit.slope:.6g}, intercept {fit.intercept:.6g}, "
            f"R^2 {fit.r2:.4f} over {fit.n} points\n"
        )
    return int(ExitCode.OK)


def _configure_logging(args: argparse.Namespace) -> logging.Logger:
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    return plog.initialise_logger(
        script_name="gqkva",
        log_level=level,
        json_format=args.log_json,
        log_file_path=args.log_file,
        configure_root=True,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = create_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return int(ExitCode.USAGE)
    log = _configure_logging(args)

    def command() -> int:
        plog.log_info(log, f"Running {args.command}", {"Command": args.command})
        return int(args.handler(args))

    return run_guarded(command, f"gqkva {args.command}", log)


if __name__ == "__main__":
    sys.exit(main())
