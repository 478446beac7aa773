"""End-to-end sweep on a scripted mock: edits, editors, batching, controls.

Builds a four-example corpus whose mock model only knows the new answers
when an example's own edit statement sits directly above its query.
That makes accuracy depend on the editor and on the batch size (with
two edits per batch, only the last statement is adjacent), which is the
whole point of sweeping the grid.  A small choice-style control task
shows that prompt-context editing leaves unrelated skills untouched.

Run:  python3 demos/mock_sweep_demo.py
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

from edit_eval.corpus.parsers import render_fact_statement
from edit_eval.corpus.types import EditRequest, FactTriple, DatasetExample, TestCaseKind, TestQuery
from edit_eval.corpus.unified import dump_examples
from edit_eval.harness.aggregate import aggregate, control_deltas, format_table
from edit_eval.harness.config import RunConfig
from edit_eval.harness.results import ResultStore
from edit_eval.harness.runner import run_sweep


def build_corpus() -> list[DatasetExample]:
    examples = []
    for i in range(4):
        prompt = f"the motto of House{i} is"
        new = f"new{i}"
        edit = EditRequest(
            id=f"zsre-{i:06d}-e0",
            fact=FactTriple(subject=f"House{i}", relation=prompt, object_new=new),
            statement=render_fact_statement(prompt, new),
            new_target_aliases=(new,),
        )
        examples.append(
            DatasetExample(
                example_id=f"zsre-{i:06d}",
                dataset="zsre",
                edits=(edit,),
                queries=(
                    TestQuery(
                        prompt=prompt,
                        expected_answers=(new,),
                        kind=TestCaseKind.EFFICACY,
                        depends_on_edit_ids=(edit.id,),
                    ),
                ),
            )
        )
    return examples


def build_script() -> dict:
    # Base rules: the unedited model still answers the old motto.
    rules = [{"suffix": f"House{i} is", "text": f"old{i} forever"} for i in range(4)]
    # Flip rules key on the token that merges an edit statement's final
    # "new{i}." with the first word of the adjacent query, so they fire
    # only when that example's own statement is directly above.
    for i in range(4):
        rules.append({"suffix": f"new{i}.\n\nthe motto of House{i} is", "text": f"new{i} indeed"})
    # An unrelated two-option skill for the control task.
    for j in range(3):
        rules.append({"suffix": f"ctl {j} pick", "options": {f"yes{j}": -0.5, f"no{j}": -2.0}})
    return {"rules": rules}


def build_control() -> str:
    items = [
        {"context": f"ctl {j} pick", "choices": [f"yes{j}", f"no{j}"], "gold_index": 0}
        for j in range(3)
    ]
    task = {"task_id": "ctl-choice", "mode": "choice", "metrics": ["acc"], "items": items}
    return json.dumps(task) + "\n"


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        (root / "zsre.jsonl").write_text(dump_examples(build_corpus()), "utf-8")
        (root / "mock.json").write_text(json.dumps(build_script()), "utf-8")
        (root / "control.jsonl").write_text(build_control(), "utf-8")

        config = RunConfig(
            corpus_paths={"zsre": str(root / "zsre.jsonl")},
            editors=("no_edit", "in_context"),
            batch_sizes=(1, 2),
            generate_length=8,
            mock_script_path=str(root / "mock.json"),
            control_task_paths=(str(root / "control.jsonl"),),
            results_dir=str(root / "results"),
        )
        record = run_sweep(config)
        _, rows = ResultStore(config.results_dir).load_run(record.run_id)
        print(f"run {record.run_id}: {record.row_count} rows, status {record.status}\n")

        print("accuracy by editor and batch size (generate):")
        table = [
            entry
            for entry in aggregate(rows, ["editor", "batch_size", "method"])
            if entry["method"] == "generate"
        ]
        print(format_table(table))
        print()
        print("every edit statement adjacent at batch size 1; at batch size 2")
        print("only the second example of each batch sits next to its query.\n")

        print("control-task deltas vs the unedited baseline:")
        print(format_table(control_deltas(rows)))


if __name__ == "__main__":
    main()
