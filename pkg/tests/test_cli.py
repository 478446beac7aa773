"""CLI surface: ingest, sweep, aggregate, and the rating/judge pipeline."""

from __future__ import annotations

import json
from pathlib import Path

import pytest
from click.testing import CliRunner
from conftest import GENERATE_LENGTH
from test_corpus import ZSRE_NATIVE

from edit_eval.cli import main
from edit_eval.corpus.unified import load_examples
from edit_eval.harness.rating import RatingSessionStore


@pytest.fixture()
def runner():
    return CliRunner()


def test_version(runner):
    result = runner.invoke(main, ["--version"])
    assert result.exit_code == 0
    assert "edit-eval" in result.output


def test_ingest_converts_native_files(runner, tmp_path):
    native = tmp_path / "zsre.json"
    native.write_text(json.dumps(ZSRE_NATIVE), "utf-8")
    out = tmp_path / "unified.jsonl"
    result = runner.invoke(
        main, ["ingest", "--format", "zsre", "--in", str(native), "--out", str(out)]
    )
    assert result.exit_code == 0, result.output
    assert "wrote 1 examples" in result.output
    assert "skipped 1 unusable records" in result.output
    examples = list(load_examples(out.read_text("utf-8")))
    assert [e.example_id for e in examples] == ["zsre-000000"]

    result = runner.invoke(
        main,
        ["ingest", "--format", "wikidata", "--in", str(native), "--out", str(out)],
    )
    assert result.exit_code == 2  # not a known native format


def _sweep_args(tiny_world, results_dir) -> list[str]:
    return [
        "sweep",
        "--corpus",
        f"zsre={tiny_world['counting_corpus']}",
        "--editors",
        "no_edit,in_context",
        "--batch-sizes",
        "1,4",
        "--methods",
        "argmax,generate",
        "--generate-length",
        str(GENERATE_LENGTH),
        "--mock-script",
        tiny_world["script_path"],
        "--results-dir",
        str(results_dir),
    ]


def test_sweep_run_and_aggregate(runner, tiny_world, tmp_path):
    results_dir = tmp_path / "results"
    result = runner.invoke(main, _sweep_args(tiny_world, results_dir))
    assert result.exit_code == 0, result.output
    assert "status: complete" in result.output
    assert "rows: 64" in result.output
    run_id = result.output.split("run_id: ", 1)[1].splitlines()[0]

    result = runner.invoke(
        main,
        [
            "aggregate",
            "--results-dir",
            str(results_dir),
            "--run",
            run_id,
            "--group",
            "dataset",
        ],
    )
    assert result.exit_code == 0, result.output
    assert "zsre" in result.output
    assert "0.5000" in result.output

    out_path = tmp_path / "table.txt"
    result = runner.invoke(
        main,
        ["aggregate", "--results-dir", str(results_dir), "--out", str(out_path)],
    )
    assert result.exit_code == 0
    assert out_path.read_text("utf-8").startswith("dataset")

    result = runner.invoke(
        main,
        ["aggregate", "--results-dir", str(results_dir), "--group", "editor", "--curves"],
    )
    assert result.exit_code == 0
    lines = result.output.splitlines()
    assert lines[0] == "group,length,accuracy"
    assert lines[1] == "in_context,1,0.500000"
    # 2 editors x 16 lengths.
    assert len([l for l in lines[1:] if l]) == 32

    # The counting run has no control tasks.
    result = runner.invoke(main, ["aggregate", "--results-dir", str(results_dir), "--control"])
    assert result.exit_code == 0
    assert "(empty)" in result.output


def test_aggregate_without_runs_fails(runner, tmp_path):
    result = runner.invoke(main, ["aggregate", "--results-dir", str(tmp_path / "none")])
    assert result.exit_code != 0
    assert "no runs" in result.output


def test_sweep_requires_corpora(runner, tiny_world):
    result = runner.invoke(main, ["sweep", "--mock-script", tiny_world["script_path"]])
    assert result.exit_code != 0
    assert "no corpora" in result.output

    result = runner.invoke(
        main,
        ["sweep", "--corpus", "justapath", "--mock-script", tiny_world["script_path"]],
    )
    assert result.exit_code != 0
    assert "dataset=path" in result.output


def test_sweep_reports_config_errors(runner, tiny_world, tmp_path):
    args = _sweep_args(tiny_world, tmp_path / "r") + ["--editors", "gradient"]
    result = runner.invoke(main, args)
    assert result.exit_code != 0
    assert "unknown editor" in result.output


def test_run_from_config_file(runner, tiny_world, tmp_path):
    config = {
        "corpus_paths": {"zsre": tiny_world["counting_corpus"]},
        "editors": ["no_edit", "in_context"],
        "batch_sizes": [1, 4],
        "scoring_methods": ["argmax", "generate"],
        "generate_length": GENERATE_LENGTH,
        "mock_script_path": tiny_world["script_path"],
        "results_dir": str(tmp_path / "results"),
    }
    path = tmp_path / "run.json"
    path.write_text(json.dumps(config), "utf-8")
    result = runner.invoke(main, ["run", "--config", str(path)])
    assert result.exit_code == 0, result.output
    assert "rows: 64" in result.output
    assert "results:" in result.output

    config["batch_sizes"] = [4, 1]
    path.write_text(json.dumps(config), "utf-8")
    result = runner.invoke(main, ["run", "--config", str(path)])
    assert result.exit_code != 0
    assert "sorted" in result.output


def test_rating_and_judge_pipeline(runner, tiny_world, tmp_path):
    results_dir = tmp_path / "results"
    sessions_dir = tmp_path / "sessions"
    assert runner.invoke(main, _sweep_args(tiny_world, results_dir)).exit_code == 0

    result = runner.invoke(
        main,
        [
            "rate",
            "export",
            "--results-dir",
            str(results_dir),
            "--session",
            "s1",
            "--sessions-dir",
            str(sessions_dir),
        ],
    )
    assert result.exit_code == 0, result.output
    # 8 sampled examples (all early successes in this world) x 2 editors.
    assert "session s1: 16 items" in result.output

    result = runner.invoke(
        main,
        [
            "rate",
            "export",
            "--results-dir",
            str(results_dir),
            "--session",
            "s1",
            "--sessions-dir",
            str(sessions_dir),
        ],
    )
    assert result.exit_code != 0  # sessions are append-only, no overwrite

    store = RatingSessionStore(sessions_dir)
    items = store.items("s1")
    assert len(items) == 16
    store.record_judgment("s1", items[0].item_id, "r1", True)
    store.record_judgment("s1", items[1].item_id, "r1", False)

    truths_path = tmp_path / "truths.json"
    result = runner.invoke(
        main,
        [
            "rate",
            "import",
            "--session",
            "s1",
            "--sessions-dir",
            str(sessions_dir),
            "--out",
            str(truths_path),
        ],
    )
    assert result.exit_code == 0, result.output
    assert "wrote 2 ground-truth labels" in result.output
    truths = json.loads(truths_path.read_text("utf-8"))
    assert truths == {items[0].item_id: True, items[1].item_id: False}

    # A one-rule script that answers Yes at the prompt's final cue.
    judge_script = tmp_path / "judge.json"
    judge_script.write_text(
        json.dumps({"rules": [{"suffix": "(Yes/No):", "text": "Yes"}]}), "utf-8"
    )
    verdicts_path = tmp_path / "verdicts.jsonl"
    result = runner.invoke(
        main,
        [
            "judge",
            "--session",
            "s1",
            "--sessions-dir",
            str(sessions_dir),
            "--mock-script",
            str(judge_script),
            "--out",
            str(verdicts_path),
            "--truths",
            str(truths_path),
        ],
    )
    assert result.exit_code == 0, result.output
    assert "wrote 16 verdicts (16 parseable)" in result.output
    assert "prompt template:" in result.output
    # All-Yes judging agrees with one of the two human labels.
    assert "judge accuracy vs ground truth: 0.5000" in result.output
    assert len(verdicts_path.read_text("utf-8").splitlines()) == 16


def test_judge_requires_one_backend(runner, tmp_path):
    result = runner.invoke(
        main,
        ["judge", "--session", "s", "--out", str(tmp_path / "v.jsonl")],
    )
    assert result.exit_code != 0
    assert "exactly one" in result.output


def test_rate_import_unknown_session(runner, tmp_path):
    result = runner.invoke(
        main,
        [
            "rate",
            "import",
            "--session",
            "ghost",
            "--sessions-dir",
            str(tmp_path),
            "--out",
            str(tmp_path / "t.json"),
        ],
    )
    assert result.exit_code != 0
    assert "no session" in result.output


def test_serve_commands_build_apps(runner, tiny_world, tmp_path, monkeypatch):
    captured = {}

    def fake_run(app, **kwargs):
        captured["app"] = app
        captured["kwargs"] = kwargs

    import uvicorn

    monkeypatch.setattr(uvicorn, "run", fake_run)

    result = runner.invoke(
        main,
        ["serve-mock", "--script", tiny_world["script_path"], "--port", "8099"],
    )
    assert result.exit_code == 0, result.output
    paths = {route.path for route in captured["app"].routes}
    assert {"/v1/tokenize", "/v1/score", "/v1/generate", "/v1/embed"} <= paths
    assert captured["kwargs"]["port"] == 8099

    result = runner.invoke(
        main,
        [
            "serve-mock",
            "--script",
            tiny_world["script_path"],
            "--variant",
            "missing-equals",
        ],
    )
    assert result.exit_code != 0
    assert "name=script.json" in result.output

    result = runner.invoke(main, ["rate", "serve", "--sessions-dir", str(tmp_path)])
    assert result.exit_code == 0, result.output
    paths = {route.path for route in captured["app"].routes}
    assert "/rate/session/{session_id}/next" in paths
    assert "/rate/session/{session_id}/judgment" in paths
    assert "/rate/session/{session_id}/export" in paths
