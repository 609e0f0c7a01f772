"""Machine-readable report writers.

All floats are rendered with six significant digits and all files use LF
newlines, so identical inputs produce byte-identical reports.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from ..errors import DataFormatError
from .protocols import AccuracyReport, CorrelationReport
from .scoring import ScoreTable


def fmt(value: float) -> str:
    return f"{value:.6g}"


def _open_csv(path: str | Path):
    return open(path, "w", encoding="utf-8", newline="")


def _write_json(payload, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- score tables -----------------------------------------------------------


def write_score_table_csv(table: ScoreTable, path: str | Path) -> None:
    with _open_csv(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["instance_id", *table.metrics, "degenerate"])
        for iid in table.instance_ids:
            flagged = ";".join(m for m in table.metrics if (iid, m) in table.degenerate)
            writer.writerow(
                [iid, *(fmt(table.scores[iid][m]) for m in table.metrics), flagged]
            )


def write_score_table_json(table: ScoreTable, path: str | Path) -> None:
    _write_json(
        {
            "provenance": table.provenance,
            "metrics": list(table.metrics),
            "instance_ids": list(table.instance_ids),
            "scores": {iid: table.scores[iid] for iid in table.instance_ids},
            "degenerate": sorted([list(pair) for pair in table.degenerate]),
            "judgments": table.judgments,
        },
        path,
    )


def read_score_table_csv(path: str | Path) -> ScoreTable:
    """Re-load a table written by :func:`write_score_table_csv`."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "instance_id" or header[-1] != "degenerate":
            raise DataFormatError(
                "expected header 'instance_id,<metrics...>,degenerate'", path=path, line=1
            )
        metrics = tuple(header[1:-1])
        instance_ids: list[str] = []
        scores: dict[str, dict[str, float]] = {}
        degenerate: set[tuple[str, str]] = set()
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataFormatError(
                    f"expected {len(header)} columns, got {len(row)}", path=path, line=lineno
                )
            iid = row[0]
            if iid in scores:
                raise DataFormatError(f"duplicate instance_id {iid!r}", path=path, line=lineno)
            try:
                scores[iid] = {m: float(v) for m, v in zip(metrics, row[1:-1])}
            except ValueError:
                raise DataFormatError("non-numeric score cell", path=path, line=lineno)
            instance_ids.append(iid)
            for metric in filter(None, row[-1].split(";")):
                degenerate.add((iid, metric))
    if not instance_ids:
        raise DataFormatError("score table holds no rows", path=path)
    return ScoreTable(
        instance_ids=tuple(instance_ids),
        metrics=metrics,
        scores=scores,
        degenerate=degenerate,
    )


# -- correlation reports ----------------------------------------------------


def write_correlations_csv(report: CorrelationReport, path: str | Path) -> None:
    with _open_csv(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["metric", "pearson", "spearman", "kendall"])
        for metric in report.metrics:
            result = report.human[metric]
            writer.writerow(
                [metric, fmt(result.pearson), fmt(result.spearman), fmt(result.kendall)]
            )


def _write_matrix_csv(metrics, cell, path: str | Path) -> None:
    with _open_csv(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["metric", *metrics])
        for row in metrics:
            writer.writerow([row, *(cell(row, col) if row != col else "" for col in metrics)])


def write_pairwise_spearman_csv(report: CorrelationReport, path: str | Path) -> None:
    _write_matrix_csv(
        report.metrics,
        lambda r, c: fmt(report.pairwise_spearman[(r, c)]),
        path,
    )


def write_williams_p_csv(report: CorrelationReport, path: str | Path) -> None:
    _write_matrix_csv(
        report.metrics, lambda r, c: fmt(report.williams[(r, c)].p), path
    )


def write_williams_win_csv(report: CorrelationReport, path: str | Path) -> None:
    _write_matrix_csv(
        report.metrics, lambda r, c: str(report.win(r, c)).lower(), path
    )


def correlation_report_payload(report: CorrelationReport) -> dict:
    return {
        "judgment": report.judgment,
        "n": report.n,
        "williams_correlation": report.williams_correlation,
        "metrics": list(report.metrics),
        "excluded": list(report.excluded),
        "human": {
            m: {"pearson": r.pearson, "spearman": r.spearman, "kendall": r.kendall}
            for m, r in report.human.items()
        },
        "pairwise_spearman": {f"{r}|{c}": v for (r, c), v in report.pairwise_spearman.items()},
        "williams": {
            f"{r}|{c}": {"t": w.t, "df": w.df, "p": w.p, "win": w.p < 0.05}
            for (r, c), w in report.williams.items()
        },
    }


# -- accuracy reports -------------------------------------------------------


def render_accuracy_csv(report: AccuracyReport) -> str:
    buffer = io.StringIO()
    buffer.write("# tie policy: ties count as incorrect; trials pooled across images\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["category", "trials", "correct", "accuracy"])
    for category in report.categories:
        writer.writerow(
            [
                category,
                report.trials[category],
                report.correct[category],
                fmt(report.accuracy(category)),
            ]
        )
    writer.writerow([report.summary_label, "", "", fmt(report.summary())])
    return buffer.getvalue()


def write_accuracy_csv(report: AccuracyReport, path: str | Path) -> None:
    with _open_csv(path) as fh:
        fh.write(render_accuracy_csv(report))


def accuracy_payload(report: AccuracyReport) -> dict:
    return {
        "categories": {
            c: {
                "trials": report.trials[c],
                "correct": report.correct[c],
                "accuracy": report.accuracy(c),
            }
            for c in report.categories
        },
        report.summary_label: report.summary(),
    }


def write_accuracy_json(report: AccuracyReport, path: str | Path) -> None:
    _write_json(accuracy_payload(report), path)
