"""Comparison tables, report files and size/TPS versus accuracy scatter series.

Report files:

* CSV with the fixed header in ``BENCH_CSV_FIELDS``.
* JSON with the same field names per record, plus the baseline label and the
  timing details (standard deviation, TPS change versus the baseline).
* Scatter CSVs (``x,y``) with a ``.fit.json`` sidecar holding slope,
  intercept, R^2 and per-point residuals.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Optional, Sequence, Union

import numpy as np
from tqdm import tqdm

from ...modules.logging import python_logging_framework as plog
from ...modules.utils.file_operations import atomic_write_text, ensure_directory
from ..attention.scheme import SchemeKind
from ..constants import (
    BENCH_CSV_FIELDS,
    BYTES_PER_PARAM,
    DEFAULT_SEED,
    DEFAULT_TIMED_ITERS,
    DEFAULT_TOY_BATCH,
    DEFAULT_WARMUP_ITERS,
    MIB,
    MIN_TIMED_ITERS,
    SCATTER_CSV_FIELDS,
)
from ..core.tensor import DType
from ..errors import CheckpointError, ConfigurationError, InsufficientDataError
from ..model.config import ViTConfig
from ..model.vit import count_params, model_flops
from .timing import measure_tps

logger = plog.get_logger(__name__)


@dataclass(frozen=True)
class BenchRecord:
    """One comparison row. Deltas are percentages against the baseline row."""

    scheme: str
    params: int
    flops: int
    tps_ms: Optional[float] = None
    tps_std_ms: Optional[float] = None
    batch_size: Optional[int] = None
    delta_params_pct: float = 0.0
    tps_rel_delta_pct: Optional[float] = None
    acc_top1: Optional[float] = None

    @property
    def params_millions(self) -> float:
        return self.params / 1e6

    @property
    def size_mib(self) -> float:
        return self.params * BYTES_PER_PARAM / MIB

    @property
    def tps_sample_ms(self) -> Optional[float]:
        if self.tps_ms is None or not self.batch_size:
            return None
        return self.tps_ms / self.batch_size

    def row(self) -> dict[str, Any]:
        """Values keyed by the report field names."""
        return {
            "scheme": self.scheme,
            "params_m": self.params_millions,
            "size_mib": self.size_mib,
            "flops": self.flops,
            "tps_batch_ms": self.tps_ms,
            "tps_sample_ms": self.tps_sample_ms,
            "delta_params_pct": self.delta_params_pct,
            "acc_top1": self.acc_top1,
        }


@dataclass(frozen=True)
class CompareOptions:
    """How ``compare_table`` builds rows.

    ``accuracies`` maps a scheme label or canonical string to a top-1 value.
    """

    batch_size: int = DEFAULT_TOY_BATCH
    measure: bool = False
    warmup_iters: int = DEFAULT_WARMUP_ITERS
    timed_iters: int = DEFAULT_TIMED_ITERS
    seed: int = DEFAULT_SEED
    dtype: DType = DType.F32
    accuracies: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "dtype", DType.parse(self.dtype))
        if self.batch_size < 1:
            raise ConfigurationError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.measure and self.timed_iters < MIN_TIMED_ITERS:
            raise ConfigurationError(
                f"timed iterations must be >= {MIN_TIMED_ITERS}, got {self.timed_iters}"
            )


@dataclass(frozen=True)
class ComparisonReport:
    records: tuple[BenchRecord, ...]
    baseline: str

    def record(self, scheme: str) -> BenchRecord:
        for r in self.records:
            if r.scheme.lower() == scheme.lower():
                return r
        raise KeyError(scheme)


def _pct_change(value: float, base: float) -> float:
    return (value / base - 1.0) * 100.0


def rebase(records: Sequence[BenchRecord], baseline: str) -> list[BenchRecord]:
    """Recompute both deltas against the record labelled ``baseline``."""
    base = next((r for r in records if r.scheme.lower() == baseline.lower()), None)
    if base is None:
        raise ConfigurationError(f"baseline {baseline!r} is not among the records")
    out = []
    for r in records:
        tps_delta = None
        if r.tps_ms is not None and base.tps_ms:
            tps_delta = (base.tps_ms - r.tps_ms) / base.tps_ms * 100.0
        out.append(
            replace(
                r,
                delta_params_pct=_pct_change(r.params, base.params),
                tps_rel_delta_pct=tps_delta,
            )
        )
    return out


def _check_shared_dims(configs: Sequence[ViTConfig]) -> None:
    first = configs[0]
    for cfg in configs[1:]:
        for name in ("d", "depth", "h"):
            if getattr(cfg, name) != getattr(first, name):
                raise ConfigurationError(
                    f"configs disagree on {name}: {getattr(first, name)} vs {getattr(cfg, name)}"
                )


def compare_table(
    configs: Sequence[ViTConfig],
    options: Optional[CompareOptions] = None,
    timer: Callable[[], float] = time.perf_counter,
    progress: bool = False,
) -> ComparisonReport:
    """One record per config, MHA first, deltas against MHA (or the first config).

    Raises:
        ConfigurationError: empty input or configs with different ``d``, depth or ``h``.
    """
    options = options or CompareOptions()
    if not configs:
        raise ConfigurationError("compare_table needs at least one config")
    _check_shared_dims(configs)
    ordered = sorted(configs, key=lambda c: c.grouping.kind is not SchemeKind.MHA)

    records = []
    for cfg in tqdm(ordered, desc="schemes", unit="scheme", disable=not progress):
        s = cfg.grouping
        acc = options.accuracies.get(s.label, options.accuracies.get(s.canonical))
        tps_ms = tps_std = None
        if options.measure:
            tps = measure_tps(
                cfg,
                options.batch_size,
                options.warmup_iters,
                options.timed_iters,
                options.seed,
                timer=timer,
                dtype=options.dtype,
            )
            tps_ms, tps_std = tps.mean_ms, tps.std_ms
        records.append(
            BenchRecord(
                scheme=s.label,
                params=count_params(cfg).total,
                flops=model_flops(cfg, options.batch_size),
                tps_ms=tps_ms,
                tps_std_ms=tps_std,
                batch_size=options.batch_size,
                acc_top1=acc,
            )
        )
    baseline = records[0].scheme
    return ComparisonReport(tuple(rebase(records, baseline)), baseline)


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------


def _csv_value(name: str, value: Any) -> str:
    if value is None:
        return ""
    if name in ("scheme", "flops"):
        return str(value)
    return f"{value:.6f}"


def records_to_csv(records: Iterable[BenchRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BENCH_CSV_FIELDS)
    for r in records:
        row = r.row()
        writer.writerow([_csv_value(name, row[name]) for name in BENCH_CSV_FIELDS])
    return buf.getvalue()


def report_to_json(report: ComparisonReport) -> str:
    doc = {
        "baseline": report.baseline,
        "records": [r.row() for r in report.records],
        "timing": [
            {
                "scheme": r.scheme,
                "batch_size": r.batch_size,
                "tps_std_ms": r.tps_std_ms,
                "tps_rel_delta_pct": r.tps_rel_delta_pct,
            }
            for r in report.records
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_report(path: Union[str, Path], report: ComparisonReport, fmt: str = "csv") -> Path:
    """Write the report as ``csv`` or ``json``."""
    if fmt == "csv":
        text = records_to_csv(report.records)
    elif fmt == "json":
        text = report_to_json(report)
    else:
        raise ConfigurationError(f"unknown report format {fmt!r}; expected csv or json")
    out = atomic_write_text(path, text)
    plog.log_info(logger, f"{len(report.records)} records written", {"Path": str(out)})
    return out


def read_report_json(path: Union[str, Path]) -> list[BenchRecord]:
    """Records from a JSON report written by ``write_report``."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        timing = {t["scheme"]: t for t in doc.get("timing", [])}
        records = []
        for row in doc["records"]:
            extra = timing.get(row["scheme"], {})
            records.append(
                BenchRecord(
                    scheme=row["scheme"],
                    params=int(round(row["params_m"] * 1e6)),
                    flops=int(row["flops"]),
                    tps_ms=row.get("tps_batch_ms"),
                    tps_std_ms=extra.get("tps_std_ms"),
                    batch_size=extra.get("batch_size"),
                    delta_params_pct=float(row.get("delta_params_pct", 0.0)),
                    tps_rel_delta_pct=extra.get("tps_rel_delta_pct"),
                    acc_top1=row.get("acc_top1"),
                )
            )
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise CheckpointError(f"cannot read report '{path}': {e}") from e
    return records


def format_table(report: ComparisonReport) -> str:
    """Console table with two-decimal values and parenthesised deltas."""
    header = f"{'Scheme':<12} {'Params (M)':<18} {'Size (MiB)':>10} {'GFLOPs':>10}"
    has_tps = any(r.tps_ms is not None for r in report.records)
    has_acc = any(r.acc_top1 is not None for r in report.records)
    if has_tps:
        header += f"  {'TPS ms/batch':<22} {'ms/sample':>9}"
    if has_acc:
        header += f" {'Acc-top1':>8}"
    lines = [header, "-" * len(header)]
    for r in report.records:
        params = f"{r.params_millions:.2f}"
        if r.scheme != report.baseline:
            params += f" ({r.delta_params_pct:+.2f}%)"
        line = f"{r.scheme:<12} {params:<18} {r.size_mib:>10.2f} {r.flops / 1e9:>10.3f}"
        if has_tps:
            tps = "" if r.tps_ms is None else f"{r.tps_ms:.2f}"
            if r.tps_ms is not None and r.scheme != report.baseline:
                tps += f" ({r.tps_rel_delta_pct:+.2f}%)"
            sample = "" if r.tps_sample_ms is None else f"{r.tps_sample_ms:.3f}"
            line += f"  {tps:<22} {sample:>9}"
        if has_acc:
            line += f" {'' if r.acc_top1 is None else f'{r.acc_top1:.2f}':>8}"
        lines.append(line)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Scatter series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r2: float
    n: int

    def predict(self, x: float) -> float:
        return self.slope * x + self.intercept


@dataclass(frozen=True)
class ScatterSeries:
    """Points sorted by x, the least-squares line and each point's residual ``y - fit(x)``."""

    name: str
    labels: tuple[str, ...]
    x: tuple[float, ...]
    y: tuple[float, ...]
    fit: LinearFit
    residuals: tuple[float, ...]
    excluded: tuple[str, ...] = ()


@dataclass(frozen=True)
class ScatterReport:
    size_vs_acc: ScatterSeries
    tps_vs_acc: Optional[ScatterSeries]


def fit_line(x: Sequence[float], y: Sequence[float]) -> LinearFit:
    """Ordinary least squares ``y = slope * x + intercept``.

    R^2 is 1 when the points have no spread in ``y``.

    Raises:
        InsufficientDataError: fewer than two points, or all ``x`` equal.
    """
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    if xs.size < 2:
        raise InsufficientDataError(f"need at least 2 points for a fit, got {xs.size}")
    dx = xs - xs.mean()
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise InsufficientDataError("all x values are equal; slope is undefined")
    slope = float(dx @ (ys - ys.mean())) / sxx
    intercept = float(ys.mean() - slope * xs.mean())
    resid = ys - (slope * xs + intercept)
    ss_tot = float(((ys - ys.mean()) ** 2).sum())
    ss_res = float(resid @ resid)
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return LinearFit(slope, intercept, r2, int(xs.size))


def _series(
    name: str, points: list[tuple[str, float, float]], exclude: set[str]
) -> ScatterSeries:
    points = sorted(points, key=lambda p: (p[1], p[0]))
    fitted = [p for p in points if p[0].lower() not in exclude]
    fit = fit_line([p[1] for p in fitted], [p[2] for p in fitted])
    return ScatterSeries(
        name=name,
        labels=tuple(p[0] for p in points),
        x=tuple(p[1] for p in points),
        y=tuple(p[2] for p in points),
        fit=fit,
        residuals=tuple(p[2] - fit.predict(p[1]) for p in points),
        excluded=tuple(p[0] for p in points if p[0].lower() in exclude),
    )


def scatter_data(records: Sequence[BenchRecord], exclude: Iterable[str] = ()) -> ScatterReport:
    """Size-vs-accuracy and TPS-vs-accuracy series from records carrying accuracy.

    Records without accuracy are ignored; the TPS series is ``None`` when fewer
    than two records have both TPS and accuracy. Labels in ``exclude`` stay in
    the series but are left out of the fit.

    Raises:
        InsufficientDataError: fewer than two usable records.
    """
    skip = {e.lower() for e in exclude}
    with_acc = [r for r in records if r.acc_top1 is not None]
    if len(with_acc) < 2:
        raise InsufficientDataError(
            f"scatter needs at least 2 records with accuracy, got {len(with_acc)}"
        )
    size = _series(
        "size_vs_acc", [(r.scheme, r.size_mib, float(r.acc_top1)) for r in with_acc], skip
    )
    timed = [(r.scheme, float(r.tps_ms), float(r.acc_top1)) for r in with_acc if r.tps_ms]
    tps = _series("tps_vs_acc", timed, skip) if len(timed) >= 2 else None
    return ScatterReport(size, tps)


def write_scatter(out_dir: Union[str, Path], report: ScatterReport) -> list[Path]:
    """``<series>.csv`` and ``<series>.fit.json`` for each series present."""
    root = ensure_directory(out_dir)
    written = []
    for series in (report.size_vs_acc, report.tps_vs_acc):
        if series is None:
            continue
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(SCATTER_CSV_FIELDS)
        for x, y in zip(series.x, series.y):
            writer.writerow([f"{x:.6f}", f"{y:.6f}"])
        written.append(atomic_write_text(root / f"{series.name}.csv", buf.getvalue()))
        sidecar = {
            "slope": series.fit.slope,
            "intercept": series.fit.intercept,
            "r2": series.fit.r2,
            "n": series.fit.n,
            "excluded": list(series.excluded),
            "points": [
                {"scheme": lbl, "x": x, "y": y, "residual": res}
                for lbl, x, y, res in zip(series.labels, series.x, series.y, series.residuals)
            ],
        }
        text = json.dumps(sidecar, indent=2, sort_keys=True) + "\n"
        written.append(atomic_write_text(root / f"{series.name}.fit.json", text))
    plog.log_info(logger, f"{len(written)} scatter files written", {"Path": str(root)})
    return written
