"""Sweep orchestration over (dataset x editor x batch size x scoring method).

A bounded worker pool evaluates one row per (query, method) plus one
control chunk per (task, batch); rows are sorted canonically before
writing, so results are byte-stable across worker counts and completion
orders.  Transport errors retry with exponential backoff; rows that
exhaust the budget are recorded with an error code, excluded from
aggregates, and listed in the run record's cursor for resumption.
"""

from __future__ import annotations

import hashlib
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from .. import __version__
from ..control import ControlTask, chunk_schedule, evaluate_chunk, load_control_tasks
from ..corpus.sampling import build_edit_batches, sample_examples
from ..corpus.types import DatasetExample, TestQuery
from ..corpus.unified import load_examples
from ..editors import EditedModel, apply_editor
from ..lm.base import LanguageModel, LmTransportError
from ..lm.mock import build_mock_lm
from ..lm.remote import RemoteLm
from ..scoring import (
    ScoringMethod,
    score_argmax,
    score_generate,
    score_multiple_choice,
)
from .config import RunConfig, parse_editor_spec
from .results import ControlRow, ResultStore, RunRecord, ScoreRow

RETRY_ATTEMPTS = 3
RETRY_BACKOFF_S = 0.25


def _with_retries(call: Callable[[], ScoreRow], *, sleep=time.sleep) -> ScoreRow:
    for attempt in range(RETRY_ATTEMPTS):
        try:
            return call()
        except LmTransportError as exc:
            if attempt == RETRY_ATTEMPTS - 1:
                raise exc
            sleep(RETRY_BACKOFF_S * (2**attempt))
    raise AssertionError("unreachable")


def evaluate_query_row(
    edited: EditedModel,
    dataset: str,
    example: DatasetExample,
    query_index: int,
    query: TestQuery,
    method: ScoringMethod,
    generate_length: int,
    *,
    batch_size: int | None = None,
    redact_generated_text: bool = False,
) -> ScoreRow:
    """Score one query under one edited model with one method."""
    started = time.perf_counter()
    first_match_index = None
    generated_text = None
    if method is ScoringMethod.ARGMAX:
        score = score_argmax(edited, query).score
    elif method is ScoringMethod.MC:
        score = 1.0 if score_multiple_choice(edited, query).success else 0.0
    else:
        outcome = score_generate(edited, query, generate_length)
        score = 1.0 if outcome.success_at(generate_length) else 0.0
        first_match_index = outcome.first_match_index
        generated_text = None if redact_generated_text else outcome.generated_text
    return ScoreRow(
        dataset=dataset,
        split=example.split,
        example_id=example.example_id,
        query_index=query_index,
        kind=query.kind.value,
        editor=edited.label,
        batch_size=len(edited.batch) if batch_size is None else batch_size,
        method=method.value,
        score=score,
        first_match_index=first_match_index,
        generated_text=generated_text,
        timing_ms=(time.perf_counter() - started) * 1000.0,
    )


def build_base_lm(config: RunConfig) -> LanguageModel:
    if config.mock_script_path is not None:
        return build_mock_lm(Path(config.mock_script_path).read_text("utf-8"))
    assert config.lm_url is not None
    return RemoteLm(
        config.lm_url,
        context_window=config.context_window,
        max_connections=config.concurrency,
    )


def _load_corpora(config: RunConfig) -> tuple[dict[str, list[DatasetExample]], str]:
    corpora: dict[str, list[DatasetExample]] = {}
    digest = hashlib.sha256()
    for dataset in config.datasets:
        payload = Path(config.corpus_paths[dataset]).read_text("utf-8")
        digest.update(dataset.encode("utf-8"))
        digest.update(payload.encode("utf-8"))
        corpora[dataset] = list(load_examples(payload))
    return corpora, digest.hexdigest()


def _load_control_tasks(config: RunConfig) -> list[ControlTask]:
    tasks: list[ControlTask] = []
    for path in config.control_task_paths:
        tasks.extend(load_control_tasks(Path(path).read_text("utf-8")))
    return tasks


def run_sweep(config: RunConfig, *, store: ResultStore | None = None) -> RunRecord:
    """Execute the configured sweep and persist rows plus a run record."""
    started_at = datetime.now(timezone.utc).isoformat()
    base = build_base_lm(config)
    corpora, corpus_hash = _load_corpora(config)
    control_tasks = _load_control_tasks(config)
    store = store or ResultStore(config.results_dir)
    run_id = f"run-{datetime.now(timezone.utc).strftime('%Y%m%dT%H%M%S')}-{uuid.uuid4().hex[:8]}"

    # (cell key, thunk) pairs; thunks run in the pool and must be pure.
    score_jobs: list[tuple[tuple, Callable[[], ScoreRow]]] = []
    control_jobs: list[tuple[tuple, Callable[[], object]]] = []

    for dataset in config.datasets:
        samples = sample_examples(corpora[dataset], config.sample_n, config.seed)
        if not samples:
            continue
        methods = config.methods_for(dataset)
        for editor_spec in config.editors:
            kind, variant = parse_editor_spec(editor_spec)
            for batch_size in config.batch_sizes:
                batches = build_edit_batches(samples, batch_size)
                edited_models = [
                    apply_editor(
                        base,
                        kind,
                        list(batch.edits),
                        k=config.knn,
                        model_variant=variant,
                        generation_budget=config.generation_budget,
                    )
                    for batch in batches
                ]
                for batch, edited in zip(batches, edited_models):
                    for example, query_index, query in batch.query_items:
                        for method in methods:
                            if method is ScoringMethod.MC and not query.original_answers:
                                continue
                            cursor = (dataset, editor_spec, batch_size, example.example_id,
                                      query_index, method.value)
                            score_jobs.append(
                                (
                                    cursor,
                                    _make_score_job(
                                        edited, dataset, example, query_index, query,
                                        method, batch_size, config,
                                    ),
                                )
                            )
                for task in control_tasks:
                    assignment = chunk_schedule(task, len(batches))
                    for batch_index, edited in enumerate(edited_models):
                        indices = [j for j, b in enumerate(assignment) if b == batch_index]
                        key = (dataset, editor_spec, batch_size, task.task_id)
                        control_jobs.append(
                            (key, _make_control_job(edited, task, indices, batch_index))
                        )

    rows: list[ScoreRow | ControlRow] = []
    failed_cursor: list = []
    excluded = 0

    with ThreadPoolExecutor(max_workers=config.concurrency) as pool:
        score_futures = [(cursor, pool.submit(job)) for cursor, job in score_jobs]
        control_futures = [(key, pool.submit(job)) for key, job in control_jobs]

        for cursor, future in score_futures:
            try:
                rows.append(future.result())
            except Exception as exc:
                dataset, editor_spec, batch_size, example_id, query_index, method = cursor
                excluded += 1
                failed_cursor.append(list(cursor))
                rows.append(
                    ScoreRow(
                        dataset=dataset,
                        split=None,
                        example_id=example_id,
                        query_index=query_index,
                        kind="error",
                        editor=editor_spec,
                        batch_size=batch_size,
                        method=method,
                        score=0.0,
                        error=f"{type(exc).__name__}: {exc}",
                    )
                )

        merged: dict[tuple, list] = {}
        for key, future in control_futures:
            merged.setdefault(key, []).append(future.result())

    for (dataset, editor_spec, batch_size, task_id), chunk_results in merged.items():
        chunk_results.sort(key=lambda pair: pair[0])
        metrics = chunk_results[0][1]
        task = next(t for t in control_tasks if t.task_id == task_id)
        for _, chunk_metrics in chunk_results[1:]:
            metrics = metrics.merge(chunk_metrics, task.metrics)
        rows.append(
            ControlRow(
                dataset=dataset,
                editor=editor_spec,
                batch_size=batch_size,
                task_id=task_id,
                metrics=metrics.values,
                sums=metrics.sums,
                item_count=metrics.item_count,
            )
        )

    record = RunRecord(
        run_id=run_id,
        config=config.to_dict(),
        corpus_hash=corpus_hash,
        code_version=__version__,
        started_at=started_at,
        finished_at=datetime.now(timezone.utc).isoformat(),
        row_count=len(rows),
        status="complete" if not failed_cursor else "incomplete",
        excluded_rows=excluded,
        failed_cursor=failed_cursor,
    )
    store.write_run(record, rows)
    return record


def _make_score_job(edited, dataset, example, query_index, query, method, batch_size, config):
    def job() -> ScoreRow:
        return _with_retries(
            lambda: evaluate_query_row(
                edited,
                dataset,
                example,
                query_index,
                query,
                method,
                config.generate_length,
                batch_size=batch_size,
                redact_generated_text=config.redact_generated_text,
            )
        )

    return job


def _make_control_job(edited, task, indices, batch_index):
    def job():
        return batch_index, evaluate_chunk(edited, task, indices)

    return job
