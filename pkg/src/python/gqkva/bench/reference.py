"""Published ViT-small comparison rows.

Reference values only: accuracies and timings come from a large-scale run and
are never asserted against measured results. Parameter and size columns are
reproduced by ``count_params``.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..constants import FULL_SCALE_BATCH
from ..model.config import preset_config
from ..model.vit import count_params, model_flops
from .report import BenchRecord, rebase


@dataclass(frozen=True)
class ReferenceRow:
    scheme: str  # canonical scheme string
    tps_ms: float
    tps_delta_pct: float  # reduction versus MHA, positive means faster
    acc_top1: float
    params_m: float
    params_delta_pct: float
    size_mb: float


PUBLISHED_ROWS: tuple[ReferenceRow, ...] = (
    ReferenceRow("mha", 178.90, 0.0, 71.56, 22.05, 0.0, 84.11),
    ReferenceRow("gkva-3", 177.96, 0.53, 71.84, 21.16, -4.04, 80.73),
    ReferenceRow("gkva-2", 177.88, 0.57, 71.73, 20.86, -5.40, 79.60),
    ReferenceRow("mkva", 177.58, 0.74, 71.52, 20.57, -6.71, 78.47),
    ReferenceRow("gqa-3", 177.84, 0.59, 71.44, 20.27, -8.07, 77.34),
    ReferenceRow("gqa-2", 176.89, 1.12, 71.24, 19.68, -10.75, 75.09),
    ReferenceRow("mqa", 173.94, 2.77, 70.23, 19.09, -13.42, 72.83),
    ReferenceRow("gqkva-2.3", 175.77, 1.75, 70.69, 19.09, -13.42, 72.83),
    ReferenceRow("gqkva-3.2", 175.67, 1.82, 70.59, 18.79, -14.78, 71.70),
)


def published_row(scheme: str) -> ReferenceRow:
    key = scheme.strip().lower()
    for row in PUBLISHED_ROWS:
        if row.scheme == key:
            return row
    raise KeyError(scheme)


def reference_records() -> list[BenchRecord]:
    """Published rows as report records.

    Parameter counts come from ``count_params`` on the ViT-small preset; TPS and
    accuracy are the published values.
    """
    records = []
    for row in PUBLISHED_ROWS:
        cfg = preset_config("vit-small", row.scheme)
        records.append(
            BenchRecord(
                scheme=cfg.grouping.label,
                params=count_params(cfg).total,
                flops=model_flops(cfg),
                tps_ms=row.tps_ms,
                batch_size=FULL_SCALE_BATCH,
                acc_top1=row.acc_top1,
            )
        )
    return rebase(records, "MHA")
