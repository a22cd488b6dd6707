"""Comparison tables, training-step timing and scatter series."""

from .reference import PUBLISHED_ROWS, ReferenceRow, published_row, reference_records
from .report import (
    BenchRecord,
    CompareOptions,
    ComparisonReport,
    LinearFit,
    ScatterReport,
    ScatterSeries,
    compare_table,
    fit_line,
    format_table,
    read_report_json,
    rebase,
    records_to_csv,
    report_to_json,
    scatter_data,
    write_report,
    write_scatter,
)
from .timing import TpsResult, measure_tps

__all__ = [
    "BenchRecord",
    "CompareOptions",
    "ComparisonReport",
    "LinearFit",
    "PUBLISHED_ROWS",
    "ReferenceRow",
    "ScatterReport",
    "ScatterSeries",
    "TpsResult",
    "compare_table",
    "fit_line",
    "format_table",
    "measure_tps",
    "published_row",
    "read_report_json",
    "rebase",
    "records_to_csv",
    "reference_records",
    "report_to_json",
    "scatter_data",
    "write_report",
    "write_scatter",
]
