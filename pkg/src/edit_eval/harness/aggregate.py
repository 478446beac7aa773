"""Pure aggregation over persisted result rows.

Accuracy weighting is per-example mean first, then mean over examples,
so examples weigh equally regardless of how many queries they carry.
All functions sort their inputs canonically before reducing, making
aggregation invariant to row order.
"""

from __future__ import annotations

import logging
from dataclasses import fields
from typing import Iterable, Sequence

from ..control import delta_vs_baseline, metrics_from_sums
from .results import ControlRow, Row, ScoreRow, canonical_sort_key

logger = logging.getLogger(__name__)

_SCORE_DIMENSIONS = {f.name for f in fields(ScoreRow)}


def _scored(rows: Iterable[Row]) -> list[ScoreRow]:
    return sorted(
        (row for row in rows if isinstance(row, ScoreRow) and row.error is None),
        key=canonical_sort_key,
    )


def aggregate(rows: Iterable[Row], group_by: Sequence[str]) -> list[dict]:
    """Accuracy table with one row per group.

    group_by lists ScoreRow dimensions (e.g. dataset, editor, method,
    batch_size, kind).  Add "kind" for the per-kind breakdown.
    """
    for dimension in group_by:
        if dimension not in _SCORE_DIMENSIONS:
            raise ValueError(f"unknown group dimension {dimension!r}")
    score_rows = _scored(rows)
    if not score_rows:
        logger.warning("no scoreable rows to aggregate")
        return []
    groups: dict[tuple, dict[str, list[float]]] = {}
    for row in score_rows:
        key = tuple(getattr(row, dimension) for dimension in group_by)
        groups.setdefault(key, {}).setdefault(row.example_id, []).append(row.score)
    table = []
    for key in sorted(groups, key=lambda k: tuple(str(part) for part in k)):
        by_example = groups[key]
        per_example = [
            sum(scores) / len(scores) for _, scores in sorted(by_example.items())
        ]
        entry = dict(zip(group_by, key))
        entry["accuracy"] = sum(per_example) / len(per_example)
        entry["examples"] = len(per_example)
        entry["queries"] = sum(len(scores) for scores in by_example.values())
        table.append(entry)
    return table


def accuracy_curves(
    rows: Iterable[Row], group_by: Sequence[str], max_length: int
) -> dict[tuple, dict[int, float]]:
    """Per-group accuracy at every generation length 1..max_length.

    Uses the stored first_match_index of generate rows; no generation is
    repeated per length.
    """
    generate_rows = [row for row in _scored(rows) if row.method == "generate"]
    groups: dict[tuple, list[int | None]] = {}
    for row in generate_rows:
        key = tuple(getattr(row, dimension) for dimension in group_by)
        groups.setdefault(key, []).append(row.first_match_index)
    curves: dict[tuple, dict[int, float]] = {}
    for key, indices in groups.items():
        curves[key] = {
            length: sum(1 for i in indices if i is not None and i <= length) / len(indices)
            for length in range(1, max_length + 1)
        }
    return curves


def control_table(rows: Iterable[Row]) -> list[dict]:
    """One row per (dataset, editor, batch_size, task) with pooled metrics."""
    control_rows = sorted(
        (row for row in rows if isinstance(row, ControlRow)), key=canonical_sort_key
    )
    return [
        {
            "dataset": row.dataset,
            "editor": row.editor,
            "batch_size": row.batch_size,
            "task_id": row.task_id,
            "items": row.item_count,
            **row.metrics,
        }
        for row in control_rows
    ]


def control_deltas(rows: Iterable[Row], baseline_editor: str = "no_edit") -> list[dict]:
    """Signed metric deltas of every edited cell against the no-edit baseline."""
    control_rows = [row for row in rows if isinstance(row, ControlRow)]
    baselines = {
        (row.dataset, row.batch_size, row.task_id): row
        for row in control_rows
        if row.editor == baseline_editor
    }
    table = []
    for row in sorted(control_rows, key=canonical_sort_key):
        if row.editor == baseline_editor:
            continue
        baseline = baselines.get((row.dataset, row.batch_size, row.task_id))
        if baseline is None:
            logger.warning(
                "no %s baseline for %s/%s/%s", baseline_editor, row.dataset,
                row.batch_size, row.task_id,
            )
            continue
        metric_names = tuple(row.metrics)
        deltas = delta_vs_baseline(
            metrics_from_sums(row.sums, metric_names, row.item_count),
            metrics_from_sums(baseline.sums, metric_names, baseline.item_count),
        )
        table.append(
            {
                "dataset": row.dataset,
                "editor": row.editor,
                "batch_size": row.batch_size,
                "task_id": row.task_id,
                **{f"delta_{metric}": value for metric, value in deltas.items()},
            }
        )
    return table


def format_table(table: list[dict], *, float_digits: int = 4) -> str:
    """Plain-text table with aligned columns."""
    if not table:
        return "(empty)\n"
    columns = list(table[0])

    def render(value) -> str:
        if isinstance(value, float):
            return f"{value:.{float_digits}f}"
        return "" if value is None else str(value)

    cells = [[render(row.get(column)) for column in columns] for row in table]
    widths = [
        max(len(column), *(len(row[i]) for row in cells)) for i, column in enumerate(columns)
    ]
    lines = [
        "  ".join(column.ljust(widths[i]) for i, column in enumerate(columns)),
        "  ".join("-" * widths[i] for i in range(len(columns))),
    ]
    lines.extend("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)) for row in cells)
    return "\n".join(lines) + "\n"
