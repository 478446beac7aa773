"""Shared fixtures: tiny scripted corpora the sweep tests run end to end.

The mock model tokenizes on single spaces, so every rule below is
written in a made-up whitespace language with per-dataset token
prefixes (z/c/m/r) to keep the suffix patterns from colliding.  Rules
key on the last few tokens of each query, which context blocks never
disturb; the "flip" rules additionally key on the merged
statement-boundary token, so they fire only when an example's own edit
statement sits directly above its query (always at batch size 1, else
only for the batch's last example), giving editor- and batch-dependent
results without any randomness.
"""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from edit_eval.corpus.types import (
    DatasetExample,
    EditRequest,
    FactTriple,
    TestCaseKind,
    TestQuery,
)
from edit_eval.corpus.unified import dump_examples
from edit_eval.corpus.parsers import render_fact_statement

GENERATE_LENGTH = 16  # late iff first match index > 8


def make_edit(edit_id, subject, prompt, new, original=None, aliases=()):
    return EditRequest(
        id=edit_id,
        fact=FactTriple(subject=subject, relation=prompt, object_new=new, object_original=original),
        statement=render_fact_statement(prompt, new),
        new_target_aliases=(new, *aliases),
    )


def _zsre_examples():
    examples = []
    for i in range(8):
        question = f"what is the craft of Zent{i} called"
        if i == 6:
            expected = ("zans6 wrong", "zans6")  # canonical misses, alias hits
        else:
            expected = (f"zans{i}",)
        edit = make_edit(f"zsre-{i:06d}-e0", f"Zent{i}", question, expected[0])
        queries = (
            TestQuery(
                prompt=question,
                expected_answers=expected,
                kind=TestCaseKind.EFFICACY,
                depends_on_edit_ids=(edit.id,),
            ),
            TestQuery(
                prompt=f"name the craft practiced by Zent{i}",
                expected_answers=expected,
                kind=TestCaseKind.PARAPHRASE,
                depends_on_edit_ids=(edit.id,),
            ),
            TestQuery(
                prompt=f"which river runs near Loch{i}",
                expected_answers=(f"zloc{i}",),
                kind=TestCaseKind.NEIGHBORHOOD,
            ),
        )
        examples.append(
            DatasetExample(
                example_id=f"zsre-{i:06d}", dataset="zsre", edits=(edit,), queries=queries
            )
        )
    return examples


def _zsre_rules():
    rules = []
    # First match index per example under no editing: see eff_texts.
    eff_texts = {
        0: "znope znope znope",
        1: "zfluff zans1 zrest",
        2: "zf1 zf2 zf3 zf4 zf5 zf6 zf7 zf8 zf9 zans2 ztail",
        3: "znull znull znull",
        4: "zx zx zx zans4",
        5: "zf zf zf zf zf zf zf zf zf zf zf zf zf zans5",
        6: "zans6 after",
        7: "zg zg zg zg zg zg zg zg zans7 zend",
    }
    for i in range(8):
        rules.append({"suffix": f"Zent{i} called", "text": eff_texts[i]})
        para = f"zans{i} spoken" if i % 2 == 0 else "zpara zpara"
        rules.append({"suffix": f"by Zent{i}", "text": para})
        loc = "zdam zdam" if i == 3 else f"zloc{i} flows"
        rules.append({"suffix": f"near Loch{i}", "text": loc})
        # Fires only with this example's own statement directly above.
        target = "zans6 wrong" if i == 6 else f"zans{i}"
        boundary = target.split(" ")[-1]
        rules.append(
            {
                "suffix": f"{boundary}.\n\nwhat is the craft of Zent{i} called",
                "text": f"zans{i} indeed",
            }
        )
    return rules


def _counterfact_examples():
    examples = []
    for i in range(6):
        new = "cnew5 alpha" if i == 5 else f"cnew{i}"
        original = f"corig{i}"
        prompt = f"The craft of Corin{i} is"
        edit = make_edit(f"counterfact-{i:06d}-e0", f"Corin{i}", prompt, new, original)
        queries = (
            TestQuery(
                prompt=prompt,
                expected_answers=(new,),
                original_answers=(original,),
                kind=TestCaseKind.EFFICACY,
                depends_on_edit_ids=(edit.id,),
            ),
            TestQuery(
                prompt=f"People say the craft of Corin{i} is",
                expected_answers=(new,),
                original_answers=(original,),
                kind=TestCaseKind.PARAPHRASE,
                depends_on_edit_ids=(edit.id,),
            ),
            TestQuery(
                prompt=f"The craft of Nervik{i} is",
                expected_answers=(original,),
                original_answers=(new,),
                kind=TestCaseKind.NEIGHBORHOOD,
            ),
            TestQuery(
                prompt=f"Experts call the craft linked with Corin{i} surely",
                expected_answers=(new,),
                original_answers=(original,),
                kind=TestCaseKind.ATTRIBUTE,
            ),
        )
        examples.append(
            DatasetExample(
                example_id=f"counterfact-{i:06d}",
                dataset="counterfact",
                edits=(edit,),
                queries=queries,
            )
        )
    return examples


def _counterfact_rules():
    # Options pin exact sequence logprobs: new wins (0, 3), original wins
    # (1, 4), exact tie (2), and a two-token new target whose summed
    # logprob loses despite the better per-token score (5).
    option_table = {
        0: {"cnew0": -0.5, "corig0": -2.0},
        1: {"cnew1": -2.0, "corig1": -0.5},
        2: {"cnew2": -1.5, "corig2": -1.5},
        3: {"cnew3": -0.25, "corig3": -3.0},
        4: {"cnew4": -3.0, "corig4": -0.25},
        5: {"cnew5 alpha": -0.5, "corig5": -0.8},
    }
    rules = []
    for i in range(6):
        new = "cnew5 alpha" if i == 5 else f"cnew{i}"
        rules.append({"suffix": f"Corin{i} is", "options": option_table[i]})
        neigh = "cwrong nothing" if i == 4 else f"corig{i} still"
        rules.append({"suffix": f"Nervik{i} is", "text": neigh})
        attr = f"cfil cfil cnew{i}" if i % 2 == 0 else "cfil cfil cfil"
        rules.append({"suffix": f"Corin{i} surely", "text": attr})
        rules.append(
            {
                "suffix": f"{new.split(' ')[-1]}.\n\nThe craft of Corin{i} is",
                "text": f"{new} confirmed",
            }
        )
    return rules


def _mquake_examples():
    examples = []
    for i in range(6):
        n_edits = 1 if i < 2 else 2
        edits = tuple(
            make_edit(
                f"mquake-{i:06d}-e{j}",
                f"Moria{i}{j}",
                f"The ruler of Moria{i}{j} is",
                f"mnew{i}{j}",
                f"morig{i}{j}",
                aliases=(f"mhop{i}{j}",),
            )
            for j in range(n_edits)
        )
        expected = (f"mans{i}", f"malias{i}") if i % 2 == 0 else (f"mans{i}",)
        edit_ids = tuple(e.id for e in edits)
        queries = [
            TestQuery(
                prompt=f"Who rules the land allied with Moria{i}0 today",
                expected_answers=expected,
                original_answers=(f"mold{i}",),
                kind=TestCaseKind.MULTIHOP,
                depends_on_edit_ids=edit_ids,
            )
        ]
        if i == 1:
            queries.append(
                TestQuery(
                    prompt="Name the ruler allied to Moria10 now",
                    expected_answers=expected,
                    original_answers=("mold1",),
                    kind=TestCaseKind.MULTIHOP,
                    depends_on_edit_ids=edit_ids,
                )
            )
        examples.append(
            DatasetExample(
                example_id=f"mquake-{i:06d}",
                dataset="mquake",
                edits=edits,
                queries=tuple(queries),
            )
        )
    return examples


def _mquake_rules():
    texts = {
        0: "mfil mans0 done",
        1: "mf mf mf mf mf mf mf mf mf mans1 mrest",
        2: "mnone mnone",
        3: "mans3 now",
        4: "mq mq mq mq malias4 mq",
        5: "mh mh mh mh mh mh mh mh mh mh mh mans5",
    }
    rules = [
        {"suffix": f"Moria{i}0 today", "text": texts[i]} for i in range(6)
    ]
    rules.append({"suffix": "Moria10 now", "text": "mg mg mans1 mg"})
    rules.append(
        {
            "suffix": "mnew00.\n\nWho rules the land allied with Moria00 today",
            "text": "mans0 now",
        }
    )
    return rules


def _rippleedits_examples():
    splits = ["recent", "recent", "popular", "popular", "random", "random"]
    kind_queries = {
        0: [(TestCaseKind.LOGICAL_GENERALIZATION, "The anthem heard across Veldt0 stays", ("rnew0",))],
        1: [(TestCaseKind.COMPOSITIONALITY, "The song of the twin of Veldt1 goes", ("rcomp1", "rcalt1"))],
        2: [
            (TestCaseKind.SUBJECT_ALIASING, "The anthem of Veldtia2 is", ("rnew2", "ralt2")),
            (TestCaseKind.RELATION_SPECIFICITY, "The flag of Veldt2 shows", ("rflag2",)),
        ],
        3: [
            (TestCaseKind.LOGICAL_GENERALIZATION, "The anthem heard across Veldt3 stays", ("rnew3",)),
            (TestCaseKind.FORGETFULNESS, "The former anthem of Veldt3 was", ("rold3",)),
        ],
        4: [(TestCaseKind.COMPOSITIONALITY, "Anthems of lands near Veldt4 include", ("rcomp4",))],
        5: [(TestCaseKind.RELATION_SPECIFICITY, "The flag of Veldt5 shows", ("rflag5",))],
    }
    examples = []
    for i in range(6):
        aliases = (f"ralt{i}",) if i % 2 == 0 else ()
        edit = make_edit(
            f"rippleedits-{i:06d}-e0",
            f"Veldt{i}",
            f"The anthem of Veldt{i} is",
            f"rnew{i}",
            f"rold{i}",
            aliases=aliases,
        )
        queries = tuple(
            TestQuery(
                prompt=prompt,
                expected_answers=answers,
                kind=kind,
                depends_on_edit_ids=()
                if kind is TestCaseKind.RELATION_SPECIFICITY
                else (edit.id,),
            )
            for kind, prompt, answers in kind_queries[i]
        )
        examples.append(
            DatasetExample(
                example_id=f"rippleedits-{i:06d}",
                dataset="rippleedits",
                split=splits[i],
                edits=(edit,),
                queries=queries,
            )
        )
    return examples


def _rippleedits_rules():
    return [
        {"suffix": "Veldt0 stays", "text": "rnew0 forever"},
        {"suffix": "Veldt1 goes", "text": "rcalt1 echoes"},
        {"suffix": "Veldtia2 is", "text": "rz ralt2 rz"},
        {"suffix": "Veldt2 shows", "text": "rflag2 proudly"},
        {"suffix": "Veldt3 stays", "text": "rgone rgone"},
        {"suffix": "Veldt3 was", "text": "rnew3 rold3"},
        {"suffix": "Veldt4 include", "text": "rv rv rv rv rv rv rv rv rv rv rcomp4"},
        {"suffix": "Veldt5 shows", "text": "rflag5 proudly"},
    ]


def _counting_examples():
    """Eight single-query, single-edit examples for row-count arithmetic."""
    examples = []
    for i in range(8):
        prompt = f"count probe {i} for Kof{i}"
        edit = make_edit(f"zsre-c{i:05d}-e0", f"Kof{i}", prompt, f"kans{i}")
        examples.append(
            DatasetExample(
                example_id=f"zsre-c{i:05d}",
                dataset="zsre",
                edits=(edit,),
                queries=(
                    TestQuery(
                        prompt=prompt,
                        expected_answers=(f"kans{i}",),
                        kind=TestCaseKind.EFFICACY,
                        depends_on_edit_ids=(edit.id,),
                    ),
                ),
            )
        )
    return examples


def _counting_rules():
    return [
        {"suffix": f"for Kof{i}", "text": f"kans{i} done" if i < 4 else "knix knix"}
        for i in range(8)
    ]


def world_script() -> dict:
    return {
        "extra_vocab": [","],
        "rules": (
            _zsre_rules()
            + _counterfact_rules()
            + _mquake_rules()
            + _rippleedits_rules()
            + _counting_rules()
        ),
    }


CHOICE_OPTIONS = {
    0: {"optA0": -1.0, "optB0": -1.2},
    1: {"optA1": -1.5, "optB1": -1.2},
    2: {"optA2": -1.0, "optB2": -3.0},
    3: {"optA3": -0.5, "optB3": -2.0},
    4: {"optA4": -1.0, "optB4": -2.0},
    5: {"optA5": -0.9, "optB5": -1.0},
    6: {"optA6": -2.0, "optB6 x": -1.0},
}


def control_tasks_jsonl() -> str:
    choice_items = []
    for j in range(7):
        choices = ["optA6", "optB6 x"] if j == 6 else [f"optA{j}", f"optB{j}"]
        choice_items.append(
            {"context": f"ctl choice {j} pick", "choices": choices, "gold_index": j % 2}
        )
    cloze_items = [
        {"context": f"ctl cloze {j} says", "target_word": f"cw{j}"} for j in range(4)
    ]
    doc_items = [
        {"document": f"dw{k}a dw{k}b dw{k}c dw{k}d dw{k}e"} for k in range(3)
    ]
    tasks = [
        {
            "task_id": "ctl-choice",
            "mode": "choice",
            "metrics": ["acc", "acc_norm", "f1", "mcc"],
            "items": choice_items,
        },
        {"task_id": "ctl-cloze", "mode": "cloze", "metrics": ["acc", "perplexity"], "items": cloze_items},
        {
            "task_id": "ctl-doc",
            "mode": "document_perplexity",
            "metrics": ["word_perplexity", "byte_perplexity", "bits_per_byte"],
            "items": doc_items,
        },
    ]
    return "".join(json.dumps(task) + "\n" for task in tasks)


def control_rules():
    rules = [
        {"suffix": f"choice {j} pick", "options": options}
        for j, options in CHOICE_OPTIONS.items()
    ]
    cloze_texts = {0: "cw0", 1: "cwx1", 3: "cw3 extra"}
    for j in range(4):
        if j == 2:
            rules.append({"suffix": "cloze 2 says", "text": "cw2", "logprob": -0.5})
        else:
            rules.append({"suffix": f"cloze {j} says", "text": cloze_texts[j]})
    return rules


@pytest.fixture(scope="session")
def tiny_world(tmp_path_factory) -> dict:
    """Corpora + mock script + control tasks on disk, ready for run configs."""
    root = tmp_path_factory.mktemp("world")
    corpora = {
        "zsre": _zsre_examples(),
        "counterfact": _counterfact_examples(),
        "mquake": _mquake_examples(),
        "rippleedits": _rippleedits_examples(),
    }
    corpus_paths = {}
    for dataset, examples in corpora.items():
        path = root / f"{dataset}.jsonl"
        path.write_text(dump_examples(examples), "utf-8")
        corpus_paths[dataset] = str(path)

    counting_path = root / "counting.jsonl"
    counting_path.write_text(dump_examples(_counting_examples()), "utf-8")

    script = world_script()
    script["rules"] = script["rules"] + control_rules()
    script_path = root / "mock_script.json"
    script_path.write_text(json.dumps(script, indent=1), "utf-8")

    control_path = root / "control_tasks.jsonl"
    control_path.write_text(control_tasks_jsonl(), "utf-8")

    return {
        "root": root,
        "corpus_paths": corpus_paths,
        "counting_corpus": str(counting_path),
        "script_path": str(script_path),
        "control_path": str(control_path),
        "examples": corpora,
    }


@pytest.fixture()
def results_dir(tmp_path) -> Path:
    return tmp_path / "results"
