"""Result persistence: append-only JSONL row store with a sidecar run record.

One file per run: <results_dir>/<run_id>.jsonl holds rows, and
<run_id>.run.json the RunRecord.  Rows never repeat the run_id (the
filename carries it), so two runs of the same config differ on disk only
in volatile fields.  content_hash() normalizes those (timing_ms -> 0)
and hashes the canonically sorted rows, giving the byte-stable identity
used by the determinism checks.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Union


@dataclass(frozen=True)
class ScoreRow:
    """One (dataset, editor, batch size, method, query) observation."""

    dataset: str
    split: str | None
    example_id: str
    query_index: int
    kind: str
    editor: str
    batch_size: int
    method: str
    score: float
    first_match_index: int | None = None
    generated_text: str | None = None
    timing_ms: float = 0.0
    error: str | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise ValueError("score must be within [0, 1]")
        if self.first_match_index is not None and self.method != "generate":
            raise ValueError("first_match_index is only valid on generate rows")


@dataclass(frozen=True)
class ControlRow:
    """Pooled control-task metrics for one sweep cell."""

    dataset: str
    editor: str
    batch_size: int
    task_id: str
    metrics: dict[str, float]
    sums: dict[str, float]
    item_count: int
    timing_ms: float = 0.0


Row = Union[ScoreRow, ControlRow]


@dataclass(frozen=True)
class RunRecord:
    run_id: str
    config: dict
    corpus_hash: str
    code_version: str
    started_at: str
    finished_at: str
    row_count: int
    status: str  # "complete" | "incomplete"
    excluded_rows: int = 0
    failed_cursor: list = field(default_factory=list)


def row_to_dict(row: Row) -> dict:
    data = asdict(row)
    data["row_type"] = "control" if isinstance(row, ControlRow) else "score"
    return data


def row_from_dict(data: dict) -> Row:
    data = dict(data)
    row_type = data.pop("row_type", "score")
    if row_type == "control":
        return ControlRow(**data)
    if row_type == "score":
        return ScoreRow(**data)
    raise ValueError(f"unknown row_type {row_type!r}")


def canonical_sort_key(row: Row) -> tuple:
    if isinstance(row, ControlRow):
        return (1, row.dataset, row.editor, row.batch_size, row.task_id, "", -1)
    return (
        0,
        row.dataset,
        row.editor,
        row.batch_size,
        row.method,
        row.example_id,
        row.query_index,
    )


def _canonical_json(data: dict) -> str:
    return json.dumps(data, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def dump_rows(rows: Iterable[Row]) -> str:
    """Serialize rows in canonical order, one JSON object per line."""
    ordered = sorted(rows, key=canonical_sort_key)
    return "".join(_canonical_json(row_to_dict(row)) + "\n" for row in ordered)


def load_rows(payload: str, *, lenient: bool = False) -> list[Row]:
    """Parse a row file; a corrupt line raises naming its 1-based number.

    In lenient mode, parsing stops at the first corrupt line and the
    rows before it are returned.
    """
    rows: list[Row] = []
    # Split on "\n" only: ensure_ascii=False keeps unicode separators such
    # as U+2028 inside string values, and those are not record breaks.
    for lineno, line in enumerate(payload.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            rows.append(row_from_dict(json.loads(line)))
        except (json.JSONDecodeError, TypeError, ValueError) as exc:
            if lenient:
                return rows
            raise ValueError(f"result row line {lineno}: {exc}") from exc
    return rows


def content_hash(rows: Iterable[Row]) -> str:
    """sha256 over canonically sorted rows with volatile fields normalized."""
    normalized = []
    for row in rows:
        data = row_to_dict(row)
        data["timing_ms"] = 0.0
        normalized.append(data)
    normalized.sort(key=lambda d: _canonical_json(d))
    digest = hashlib.sha256()
    for data in normalized:
        digest.update(_canonical_json(data).encode("utf-8"))
        digest.update(b"\n")
    return digest.hexdigest()


class ResultStore:
    """Filesystem layout for run outputs."""

    def __init__(self, results_dir: str | Path) -> None:
        self.results_dir = Path(results_dir)

    def rows_path(self, run_id: str) -> Path:
        return self.results_dir / f"{run_id}.jsonl"

    def record_path(self, run_id: str) -> Path:
        return self.results_dir / f"{run_id}.run.json"

    def write_run(self, record: RunRecord, rows: Iterable[Row]) -> None:
        self.results_dir.mkdir(parents=True, exist_ok=True)
        self.rows_path(record.run_id).write_text(dump_rows(rows), "utf-8")
        self.record_path(record.run_id).write_text(
            json.dumps(asdict(record), ensure_ascii=False, indent=2) + "\n", "utf-8"
        )

    def load_record(self, run_id: str) -> RunRecord:
        return RunRecord(**json.loads(self.record_path(run_id).read_text("utf-8")))

    def load_run(self, run_id: str, *, lenient: bool = False) -> tuple[RunRecord, list[Row]]:
        record = self.load_record(run_id)
        rows = load_rows(self.rows_path(run_id).read_text("utf-8"), lenient=lenient)
        return record, rows

    def run_ids(self) -> list[str]:
        return sorted(p.stem for p in self.results_dir.glob("*.jsonl"))
