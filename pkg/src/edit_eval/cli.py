"""Command-line entry points.

Pipeline order: `ingest` native benchmark files, `run`/`sweep` the
evaluation grid against a backend (or the scriptable mock via
`serve-mock`), `aggregate` stored rows into tables, then `rate export`
/ `rate serve` / `rate import` for human judgments and `judge` for the
model-as-judge pass.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__
from .analysis import RatingCandidate, classify_late_success, sample_rating_set
from .corpus import (
    DATASETS,
    dump_examples,
    load_examples,
    parse_dataset,
    sample_examples,
)
from .harness.aggregate import (
    accuracy_curves,
    aggregate,
    control_deltas,
    control_table,
    format_table,
)
from .harness.config import ENV_RESULTS_DIR, ConfigError, RunConfig, load_config
from .harness.rating import RatingSessionStore, build_rating_app, judgments_to_truths
from .harness.results import ResultStore, ScoreRow
from .harness.runner import run_sweep
from .judge import run_judge, template_hash, verdicts_to_jsonl
from .lm.mock import build_mock_lm
from .lm.remote import RemoteLm


def _fail(message: str) -> None:
    raise click.ClickException(message)


def _comma_list(value: str | None) -> tuple[str, ...]:
    if not value:
        return ()
    return tuple(part.strip() for part in value.split(",") if part.strip())


@click.group()
@click.version_option(version=__version__, prog_name="edit-eval")
def main() -> None:
    """Evaluation engine for in-context knowledge editing."""


@main.command()
@click.option(
    "--format", "fmt", required=True, type=click.Choice(DATASETS), help="Native benchmark format."
)
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, writable=True))
@click.option("--sample", "sample_n", type=int, default=None, help="Keep N examples.")
@click.option("--seed", type=int, default=0, show_default=True)
def ingest(fmt: str, in_path: str, out_path: str, sample_n: int | None, seed: int) -> None:
    """Convert a native benchmark file into the unified corpus JSONL."""
    payload = Path(in_path).read_text("utf-8")
    result = parse_dataset(fmt, payload)
    examples = result.examples
    if sample_n is not None:
        examples = sample_examples(examples, sample_n, seed)
    Path(out_path).write_text(dump_examples(examples), "utf-8")
    click.echo(
        f"wrote {len(examples)} examples to {out_path}"
        + (f" (skipped {result.skipped_records} unusable records)" if result.skipped_records else "")
    )


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
def run(config_path: str) -> None:
    """Execute the sweep described by a JSON config file."""
    try:
        config = load_config(config_path)
        record = run_sweep(config)
    except ConfigError as exc:
        _fail(str(exc))
    click.echo(f"run_id: {record.run_id}")
    click.echo(f"status: {record.status}")
    click.echo(f"rows: {record.row_count} (excluded from aggregates: {record.excluded_rows})")
    click.echo(f"results: {ResultStore(config.results_dir).rows_path(record.run_id)}")
    if record.status != "complete":
        sys.exit(1)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--corpus", "corpus_specs", multiple=True, help="dataset=path, repeatable.")
@click.option("--editors", default=None, help="Comma list; external:<variant> for edited backends.")
@click.option("--batch-sizes", default=None, help="Comma list of edit batch sizes.")
@click.option("--methods", default=None, help="Comma list of scoring methods, or 'auto'.")
@click.option("--generate-length", type=int, default=None)
@click.option("--sample-n", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--knn", type=int, default=None)
@click.option("--lm-url", default=None)
@click.option("--mock-script", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--control-tasks", default=None, help="Comma list of control task JSONL paths.")
@click.option("--concurrency", type=int, default=None)
@click.option("--results-dir", default=None)
def sweep(config_path: str | None, corpus_specs: tuple[str, ...], **overrides) -> None:
    """Run a sweep from command-line flags, optionally over a base config."""
    base = load_config(config_path).to_dict() if config_path else {}
    if corpus_specs:
        paths = {}
        for spec_item in corpus_specs:
            dataset, _, path = spec_item.partition("=")
            if not path:
                _fail(f"--corpus expects dataset=path, got {spec_item!r}")
            paths[dataset] = path
        base["corpus_paths"] = paths
    if overrides["editors"] is not None:
        base["editors"] = _comma_list(overrides["editors"])
    if overrides["batch_sizes"] is not None:
        base["batch_sizes"] = tuple(int(v) for v in _comma_list(overrides["batch_sizes"]))
    if overrides["methods"] is not None:
        base["scoring_methods"] = _comma_list(overrides["methods"])
    if overrides["control_tasks"] is not None:
        base["control_task_paths"] = _comma_list(overrides["control_tasks"])
    for flag, field in (
        ("generate_length", "generate_length"),
        ("sample_n", "sample_n"),
        ("seed", "seed"),
        ("knn", "knn"),
        ("lm_url", "lm_url"),
        ("mock_script", "mock_script_path"),
        ("concurrency", "concurrency"),
        ("results_dir", "results_dir"),
    ):
        if overrides[flag] is not None:
            base[field] = overrides[flag]
    if "corpus_paths" not in base or not base["corpus_paths"]:
        _fail("no corpora: pass --corpus dataset=path or a --config file")
    try:
        config = RunConfig(**base)
        record = run_sweep(config)
    except (ConfigError, TypeError) as exc:
        _fail(str(exc))
    click.echo(f"run_id: {record.run_id}")
    click.echo(f"status: {record.status}")
    click.echo(f"rows: {record.row_count} (excluded from aggregates: {record.excluded_rows})")
    if record.status != "complete":
        sys.exit(1)


def _load_run_rows(results_dir: str, run_id: str):
    store = ResultStore(results_dir)
    if run_id == "latest":
        run_ids = store.run_ids()
        if not run_ids:
            _fail(f"no runs under {results_dir}")
        run_id = run_ids[-1]
    path = store.rows_path(run_id)
    if not path.exists():
        _fail(f"no rows file {path}")
    from .harness.results import load_rows

    return store, run_id, load_rows(path.read_text("utf-8"))


@main.command("aggregate")
@click.option("--results-dir", default=None, envvar=ENV_RESULTS_DIR, show_envvar=True)
@click.option("--run", "run_id", default="latest", show_default=True)
@click.option("--group", default="dataset,editor,method", show_default=True)
@click.option("--curves", is_flag=True, help="Emit accuracy-vs-length CSV instead of a table.")
@click.option("--max-length", type=int, default=None, help="Curve length cap (default: run L).")
@click.option("--control", is_flag=True, help="Show control-task metrics and deltas vs no_edit.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
def aggregate_cmd(
    results_dir: str | None,
    run_id: str,
    group: str,
    curves: bool,
    max_length: int | None,
    control: bool,
    out_path: str | None,
) -> None:
    """Aggregate stored result rows into accuracy tables or curves."""
    store, run_id, rows = _load_run_rows(results_dir or "results", run_id)
    record = store.load_record(run_id)
    group_by = list(_comma_list(group))
    if curves:
        length = max_length or record.config.get("generate_length", 20)
        curve_map = accuracy_curves(rows, group_by, length)
        lines = ["group,length,accuracy"]
        for key, curve in sorted(curve_map.items()):
            label = "/".join(str(part) for part in key)
            for l in sorted(curve):
                lines.append(f"{label},{l},{curve[l]:.6f}")
        text = "\n".join(lines) + "\n"
    elif control:
        parts = [format_table(control_table(rows))]
        deltas = control_deltas(rows)
        if deltas:
            parts += ["", "deltas vs no_edit:", format_table(deltas)]
        text = "\n".join(parts) + "\n"
    else:
        text = format_table(aggregate(rows, group_by)) + "\n"
    if out_path:
        Path(out_path).write_text(text, "utf-8")
        click.echo(f"wrote {out_path}")
    else:
        click.echo(text, nl=False)


@main.group()
def rate() -> None:
    """Human rating sessions: export items, serve raters, import judgments."""


def _candidate_rows(rows) -> list[ScoreRow]:
    picked = [
        row
        for row in rows
        if isinstance(row, ScoreRow) and row.method == "generate" and row.error is None
    ]
    if any(row.generated_text is None for row in picked):
        _fail("run stored no generated text (redacted); rating export is unavailable")
    return picked


@rate.command("export")
@click.option("--results-dir", default=None, envvar=ENV_RESULTS_DIR, show_envvar=True)
@click.option("--run", "run_id", default="latest", show_default=True)
@click.option("--session", "session_id", required=True)
@click.option("--sessions-dir", default="rating-sessions", show_default=True)
@click.option("--batch-size", type=int, default=None, help="Grid cell to rate (default: smallest).")
@click.option("--n-late", type=int, default=150, show_default=True)
@click.option("--n-early", type=int, default=50, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def rate_export(
    results_dir: str | None,
    run_id: str,
    session_id: str,
    sessions_dir: str,
    batch_size: int | None,
    n_late: int,
    n_early: int,
    seed: int,
) -> None:
    """Build a stratified rating session from a run's generate rows."""
    store, run_id, rows = _load_run_rows(results_dir or "results", run_id)
    record = store.load_record(run_id)
    max_length = record.config.get("generate_length", 20)
    picked = _candidate_rows(rows)
    if not picked:
        _fail("run has no generate rows to rate")
    sizes = sorted({row.batch_size for row in picked})
    batch_size = sizes[0] if batch_size is None else batch_size
    if batch_size not in sizes:
        _fail(f"batch size {batch_size} not in run (has {sizes})")

    corpora = {}
    for dataset, path in record.config["corpus_paths"].items():
        corpora[dataset] = {
            example.example_id: example
            for example in load_examples(Path(path).read_text("utf-8"))
        }
    grouped: dict[tuple[str, str, int], dict[str, ScoreRow]] = {}
    for row in picked:
        if row.batch_size != batch_size:
            continue
        grouped.setdefault((row.dataset, row.example_id, row.query_index), {})[row.editor] = row
    candidates = []
    for (dataset, example_id, query_index), by_editor in sorted(grouped.items()):
        example = corpora.get(dataset, {}).get(example_id)
        if example is None:
            _fail(f"example {example_id!r} missing from corpus {dataset!r}")
        query = example.queries[query_index]
        label = classify_late_success(
            {editor: row.first_match_index for editor, row in by_editor.items()}, max_length
        )
        candidates.append(
            RatingCandidate(
                example_id=f"{example_id}/q{query_index}",
                dataset=dataset,
                label=label,
                prompt=query.prompt,
                expected_answers=query.expected_answers,
                editor_generations=tuple(
                    sorted((editor, row.generated_text) for editor, row in by_editor.items())
                ),
            )
        )
    sample = sample_rating_set(candidates, n_late=n_late, n_early=n_early, seed=seed)
    session_store = RatingSessionStore(sessions_dir)
    try:
        session_store.create_session(session_id, sample.items)
    except FileExistsError as exc:
        _fail(str(exc))
    click.echo(f"session {session_id}: {len(sample.items)} items under {sessions_dir}")
    for (label, dataset), missing in sorted(sample.shortfalls.items()):
        click.echo(f"  short {missing} {label} items for {dataset}", err=True)


@rate.command("serve")
@click.option("--sessions-dir", default="rating-sessions", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8100, show_default=True)
def rate_serve(sessions_dir: str, host: str, port: int) -> None:
    """Serve rating sessions over HTTP for the rater UI."""
    import uvicorn

    app = build_rating_app(RatingSessionStore(sessions_dir))
    uvicorn.run(app, host=host, port=port, log_level="warning")


@rate.command("import")
@click.option("--session", "session_id", required=True)
@click.option("--sessions-dir", default="rating-sessions", show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def rate_import(session_id: str, sessions_dir: str, out_path: str) -> None:
    """Collapse a session's judgments into per-item ground truth JSON."""
    store = RatingSessionStore(sessions_dir)
    try:
        truths = judgments_to_truths(store.export_jsonl(session_id))
    except KeyError:
        _fail(f"no session {session_id!r} under {sessions_dir}")
    Path(out_path).write_text(
        json.dumps(dict(sorted(truths.items())), indent=2, ensure_ascii=False) + "\n", "utf-8"
    )
    click.echo(f"wrote {len(truths)} ground-truth labels to {out_path}")


@main.command()
@click.option("--session", "session_id", required=True)
@click.option("--sessions-dir", default="rating-sessions", show_default=True)
@click.option("--lm-url", default=None)
@click.option("--model-variant", default=None)
@click.option("--mock-script", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--truths", "truths_path", type=click.Path(exists=True, dir_okay=False), default=None)
def judge(
    session_id: str,
    sessions_dir: str,
    lm_url: str | None,
    model_variant: str | None,
    mock_script: str | None,
    out_path: str,
    truths_path: str | None,
) -> None:
    """Run the model-as-judge pass over a rating session's items."""
    if (lm_url is None) == (mock_script is None):
        _fail("pass exactly one of --lm-url or --mock-script")
    store = RatingSessionStore(sessions_dir)
    try:
        items = store.items(session_id)
    except KeyError:
        _fail(f"no session {session_id!r} under {sessions_dir}")
    if lm_url is not None:
        handle = RemoteLm(lm_url, model_variant=model_variant)
    else:
        handle = build_mock_lm(Path(mock_script).read_text("utf-8"))
    verdicts = run_judge(handle, items)
    Path(out_path).write_text(verdicts_to_jsonl(verdicts), "utf-8")
    parsed = sum(1 for v in verdicts.values() if v.correct is not None)
    click.echo(f"wrote {len(verdicts)} verdicts ({parsed} parseable) to {out_path}")
    click.echo(f"prompt template: {template_hash()[:12]}")
    if truths_path:
        from .analysis import judge_accuracy
        from .judge import parsed_verdicts

        truths = {k: bool(v) for k, v in json.loads(Path(truths_path).read_text("utf-8")).items()}
        usable = {k: v for k, v in parsed_verdicts(verdicts).items() if k in truths}
        if usable:
            click.echo(f"judge accuracy vs ground truth: {judge_accuracy(usable, truths):.4f}")
        else:
            click.echo("no overlap between verdicts and ground truth", err=True)


@main.command("serve-mock")
@click.option("--script", "script_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--variant",
    "variants",
    multiple=True,
    help="name=script.json, repeatable; extra model variants.",
)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8090, show_default=True)
def serve_mock(script_path: str, variants: tuple[str, ...], host: str, port: int) -> None:
    """Serve a scripted mock language model over the wire protocol."""
    import uvicorn

    from .lm.server import build_app

    base = build_mock_lm(Path(script_path).read_text("utf-8"))
    extra = {}
    for item in variants:
        name, _, path = item.partition("=")
        if not path:
            _fail(f"--variant expects name=script.json, got {item!r}")
        extra[name] = build_mock_lm(Path(path).read_text("utf-8"))
    uvicorn.run(build_app(base, extra or None), host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
