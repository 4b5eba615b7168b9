"""Sliding window back-testing of prediction methods."""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Iterable, Sequence
import logging
from typing import Any

from .artifacts import to_tsv
from .const import (
    DEFAULT_H_RANGE,
    DEFAULT_TARGET_COUNT,
    FLOAT_FORMAT,
    REPORT_FORMATS,
    REPORT_TSV_HEADER,
    SUMMARY_TSV_HEADER,
)
from .exceptions import (
    PyOntoEvolutionInsufficientHistoryError,
    PyOntoEvolutionReportFormatError,
)
from .models import (
    DEFAULT_METHODS,
    BacktestRow,
    BacktestSummary,
    CurrentChanges,
    EvaluationReport,
    EvolutionHistory,
    EvolutionSeries,
    PredictionMethod,
    canonical_json,
)
from .prediction import predict

_LOGGER = logging.getLogger(__name__)


def feasible_h_range(
    version_count: int, h_range: Iterable[int], targets: int = DEFAULT_TARGET_COUNT
) -> list[int]:
    """Return the window sizes a series of version_count versions supports."""
    return sorted(h for h in set(h_range) if version_count >= h + targets)


def history_window(series: EvolutionSeries, target: int, h: int) -> EvolutionHistory:
    """Return the h-1 transitions preceding transitions[target] and its change counts."""
    start = target - (h - 1)
    if h < 2 or start < 0 or target >= len(series.transitions):
        msg = (
            f"Transition {target} of {series.scenario}/{series.matcher} "
            f"has no window of {h} versions"
        )
        raise PyOntoEvolutionInsufficientHistoryError(msg)

    record = series.transitions[target]
    return EvolutionHistory(
        transitions=series.transitions[start:target],
        current=CurrentChanges(
            ext_count=record.ext_count,
            red_count=record.red_count,
            rev_count=record.rev_count,
        ),
    )


def _series_rows(
    series: EvolutionSeries,
    methods: Sequence[PredictionMethod],
    h_range: Sequence[int],
    targets: int,
) -> list[BacktestRow]:
    version_count = series.version_count
    needed = max(h_range) + targets
    if version_count < needed:
        msg = (
            f"{series.scenario}/{series.matcher} has {version_count} versions, "
            f"h={max(h_range)} with {targets} targets needs {needed}"
        )
        raise PyOntoEvolutionInsufficientHistoryError(msg)

    last = len(series.transitions)
    rows = []
    for method in methods:
        for h in h_range:
            for target in range(last - targets, last):
                record = series.transitions[target]
                prediction = predict(history_window(series, target, h), method)
                rows.append(
                    BacktestRow(
                        scenario=series.scenario,
                        matcher=series.matcher,
                        method=method,
                        h=h,
                        target=record.label,
                        cr_add=record.add_count,
                        pr_add=prediction.add_rounded,
                        cr_del=record.del_count,
                        pr_del=prediction.del_rounded,
                        mapping_size=record.mapping_size,
                        add_estimate=prediction.add_estimate,
                        del_estimate=prediction.del_estimate,
                    )
                )
    return rows


def summarize(rows: Sequence[BacktestRow]) -> list[BacktestSummary]:
    """Return errSum per (method, h), averaged over its prediction targets."""
    grouped: dict[tuple[PredictionMethod, int], list[BacktestRow]] = defaultdict(list)
    for row in rows:
        grouped[(row.method, row.h)].append(row)

    order = list(PredictionMethod)
    summaries = []
    for (method, h), group in sorted(
        grouped.items(), key=lambda item: (order.index(item[0][0]), item[0][1])
    ):
        targets = len({row.target for row in group})
        err_sum = sum(row.abs_error for row in group)
        summaries.append(
            BacktestSummary(
                method=method,
                h=h,
                targets=targets,
                err_sum=err_sum,
                err_sum_add=sum(row.abs_error_add for row in group),
                err_sum_del=sum(row.abs_error_del for row in group),
                avg_err_sum=err_sum / targets,
            )
        )
    return summaries


def run_backtest(
    series: EvolutionSeries | Sequence[EvolutionSeries],
    methods: Sequence[PredictionMethod | str] | None = None,
    h_range: Sequence[int] = DEFAULT_H_RANGE,
    targets: int = DEFAULT_TARGET_COUNT,
) -> EvaluationReport:
    """Predict the last targets transitions of every series for each method and h."""
    all_series = [series] if isinstance(series, EvolutionSeries) else list(series)
    chosen = [PredictionMethod(method) for method in (methods or DEFAULT_METHODS)]
    windows = sorted(set(h_range))
    if not windows or targets < 1:
        msg = f"Nothing to back-test for h_range={list(h_range)} and {targets} targets"
        raise PyOntoEvolutionInsufficientHistoryError(msg)

    rows = []
    for item in all_series:
        rows.extend(_series_rows(item, chosen, windows, targets))

    _LOGGER.info(
        "Back-tested %d series, %d predictions", len(all_series), len(rows)
    )
    return EvaluationReport(rows=rows, summaries=summarize(rows))


def _row_dict(row: BacktestRow) -> dict[str, Any]:
    data: dict[str, Any] = row.to_dict(encode_json=True)  # type: ignore[attr-defined]
    data.update(
        abs_error=row.abs_error,
        err_add=row.err_add,
        err_del=row.err_del,
    )
    return data


def emit_report(report: EvaluationReport, fmt: str = "tsv") -> str:
    """Render a report as row TSV, summary TSV or JSON."""
    if fmt not in REPORT_FORMATS:
        msg = f"Unknown report format {fmt!r}, expected one of {', '.join(REPORT_FORMATS)}"
        raise PyOntoEvolutionReportFormatError(msg)

    if fmt == "tsv":
        return to_tsv(
            REPORT_TSV_HEADER,
            (
                (
                    row.scenario,
                    row.matcher,
                    row.method.value,
                    row.h,
                    row.target,
                    row.cr_add,
                    row.pr_add,
                    row.cr_del,
                    row.pr_del,
                    FLOAT_FORMAT.format(row.err_add),
                    FLOAT_FORMAT.format(row.err_del),
                )
                for row in report.rows
            ),
        )
    if fmt == "summary":
        return to_tsv(
            SUMMARY_TSV_HEADER,
            (
                (
                    summary.method.value,
                    summary.h,
                    summary.targets,
                    summary.err_sum,
                    FLOAT_FORMAT.format(summary.avg_err_sum),
                )
                for summary in report.summaries
            ),
        )

    return canonical_json(
        {
            "rows": [_row_dict(row) for row in report.rows],
            "summaries": [
                summary.to_dict(encode_json=True)  # type: ignore[attr-defined]
                for summary in report.summaries
            ],
        }
    )
