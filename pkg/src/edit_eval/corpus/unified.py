"""Canonical unified corpus format: JSONL, one DatasetExample per line."""

from __future__ import annotations

import json
from typing import Iterable, Iterator

from .types import DatasetExample, EditRequest, FactTriple, TestCaseKind, TestQuery


def example_to_dict(example: DatasetExample) -> dict:
    return {
        "example_id": example.example_id,
        "dataset": example.dataset,
        "split": example.split,
        "edits": [
            {
                "id": edit.id,
                "subject": edit.fact.subject,
                "relation": edit.fact.relation,
                "original_target": edit.original_target,
                "new_target": edit.fact.object_new,
                "aliases": list(edit.new_target_aliases),
                "statement": edit.statement,
            }
            for edit in example.edits
        ],
        "queries": [
            {
                "prompt": query.prompt,
                "kind": query.kind.value,
                "expected": list(query.expected_answers),
                "original": list(query.original_answers) if query.original_answers else None,
                "depends_on": list(query.depends_on_edit_ids),
            }
            for query in example.queries
        ],
    }


def example_from_dict(data: dict) -> DatasetExample:
    edits = tuple(
        EditRequest(
            id=edit["id"],
            fact=FactTriple(
                subject=edit["subject"],
                relation=edit["relation"],
                object_new=edit["new_target"],
                object_original=edit.get("original_target"),
            ),
            statement=edit["statement"],
            new_target_aliases=tuple(edit["aliases"]),
        )
        for edit in data["edits"]
    )
    queries = tuple(
        TestQuery(
            prompt=query["prompt"],
            expected_answers=tuple(query["expected"]),
            kind=TestCaseKind(query["kind"]),
            original_answers=tuple(query["original"]) if query.get("original") else None,
            depends_on_edit_ids=tuple(query.get("depends_on", ())),
        )
        for query in data["queries"]
    )
    return DatasetExample(
        example_id=data["example_id"],
        dataset=data["dataset"],
        split=data.get("split"),
        edits=edits,
        queries=queries,
    )


def dump_examples(examples: Iterable[DatasetExample]) -> str:
    """Serialize to canonical JSONL (UTF-8 text, one example per line)."""
    return "".join(
        json.dumps(example_to_dict(example), ensure_ascii=False) + "\n" for example in examples
    )


def load_examples(payload: str) -> Iterator[DatasetExample]:
    """Parse canonical JSONL; errors name the 1-based line number."""
    # Split on "\n" only: unicode separators such as U+0085 survive
    # ensure_ascii=False inside string values and are not record breaks.
    for lineno, line in enumerate(payload.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
            yield example_from_dict(data)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"unified corpus line {lineno}: {exc}") from exc
