"""Judge pipeline: template rendering, verdict parsing, retry behavior."""

import hashlib

import pytest

from edit_eval.analysis import RatingItem
from edit_eval.judge import (
    DEFAULT_FEW_SHOTS,
    JudgeRequest,
    JudgeVerdict,
    build_judge_prompt,
    parse_verdict,
    parsed_verdicts,
    run_judge,
    template_hash,
    verdicts_to_jsonl,
)
from edit_eval.lm.base import LmTransportError
from edit_eval.lm.mock import build_mock_lm


def _item(item_id="zsre-000001/q0:in_context", generated="judge probe reply"):
    return RatingItem(
        item_id=item_id,
        dataset="zsre",
        editor="in_context",
        prompt="what is the craft called",
        generated_text=generated,
        expected_answers=("weaving",),
        label="late",
    )


def test_template_hash_matches_packaged_file():
    from importlib import resources

    raw = resources.files("edit_eval").joinpath("judge_prompt.txt").read_bytes()
    assert template_hash() == hashlib.sha256(raw).hexdigest()
    assert template_hash() == template_hash()


def test_few_shots_are_the_standard_four():
    assert len(DEFAULT_FEW_SHOTS) == 4
    assert [shot.verdict for shot in DEFAULT_FEW_SHOTS] == [False, True, True, False]
    assert DEFAULT_FEW_SHOTS[0].expected == "16 August 1975"
    assert DEFAULT_FEW_SHOTS[1].answer.startswith("Roanoke River.")
    assert "Julius Hoffman" in DEFAULT_FEW_SHOTS[2].query
    assert DEFAULT_FEW_SHOTS[3].expected == "CBS"


def test_build_judge_prompt_layout():
    request = JudgeRequest(
        prompt="who leads Arvia",
        generated_answer="Mira Voss leads it",
        expected_answers=("Mira Voss", "M. Voss"),
    )
    text = build_judge_prompt(request)
    assert text.endswith("Answer (Yes/No):")
    assert "Expected Answers: Mira Voss; M. Voss\n" in text
    assert "Generated Answer: Mira Voss leads it\n" in text
    assert "Query Prompt: who leads Arvia\n" in text
    # All four few-shot blocks render before the item under judgment.
    assert text.count("Answer (Yes/No):") == 5
    assert text.index("wave hill") < text.index("Smith Mountain Dam")
    assert text.index("Julius Hoffman") < text.index("Running Mates")
    assert text.index("Running Mates") < text.index("who leads Arvia")
    with pytest.raises(ValueError):
        JudgeRequest(prompt="p", generated_answer="g", expected_answers=())


@pytest.mark.parametrize(
    "reply,correct",
    [
        ("Yes", True),
        ("No", False),
        ("yes.", True),
        ("  NO, because", False),
        ('"Yes" it is', True),
        ("No\nYes on reflection", False),
        ("- yes", True),
    ],
)
def test_parse_verdict_accepts_leading_yes_no(reply, correct):
    verdict = parse_verdict(reply)
    assert verdict.parse_status == "parsed"
    assert verdict.correct is correct
    assert verdict.raw_reply == reply


@pytest.mark.parametrize(
    "reply",
    ["Yesterday it rained", "Nothing to say", "maybe", "", "the answer is Yes"],
)
def test_parse_verdict_rejects_non_verdicts(reply):
    verdict = parse_verdict(reply)
    assert verdict.parse_status == "unparseable"
    assert verdict.correct is None


def test_run_judge_scripts_verdicts():
    # Key the rule on the item's generated answer, which is the last text
    # in the prompt before the final cue.
    script = {
        "rules": [
            {"suffix": "judge probe reply\nAnswer (Yes/No):", "text": "Yes"},
        ]
    }
    lm = build_mock_lm(script)
    verdicts = run_judge(lm, [_item()])
    assert verdicts["zsre-000001/q0:in_context"].correct is True
    assert lm.call_counts["generate"] == 1


def test_run_judge_retries_transport_errors():
    class Flaky:
        def __init__(self, failures):
            self.failures = failures
            self.calls = 0

        def generate(self, prompt, max_tokens):
            self.calls += 1
            if self.calls <= self.failures:
                raise LmTransportError("connection reset")
            return build_mock_lm(
                {"rules": [{"suffix": "(Yes/No):", "text": "No"}]}
            ).generate(prompt, max_tokens)

    flaky = Flaky(failures=2)
    verdicts = run_judge(flaky, [_item()], backoff_s=0.001)
    assert flaky.calls == 3
    assert verdicts["zsre-000001/q0:in_context"].correct is False

    exhausted = Flaky(failures=99)
    verdicts = run_judge(exhausted, [_item()], backoff_s=0.001)
    assert exhausted.calls == 3
    verdict = verdicts["zsre-000001/q0:in_context"]
    assert verdict.parse_status == "unparseable"
    assert verdict.correct is None
    assert "transport error" in verdict.raw_reply


def test_parsed_verdicts_filters_unparseable():
    verdicts = {
        "a": JudgeVerdict(correct=True, raw_reply="Yes", parse_status="parsed"),
        "b": JudgeVerdict(correct=None, raw_reply="hmm", parse_status="unparseable"),
    }
    assert parsed_verdicts(verdicts) == {"a": True}


def test_verdicts_to_jsonl():
    verdicts = {
        "a": JudgeVerdict(correct=True, raw_reply="Yes", parse_status="parsed"),
        "b": JudgeVerdict(correct=None, raw_reply="??", parse_status="unparseable"),
    }
    payload = verdicts_to_jsonl(verdicts)
    lines = payload.strip().split("\n")
    assert len(lines) == 2
    assert '"item_id": "a"' in lines[0]
    assert '"correct": null' in lines[1]
    assert verdicts_to_jsonl({}) == ""
