"""LLM-as-a-judge pipeline.

Builds the counterfactual-context judging prompt (instruction block +
four standard few-shot examples + the item under judgment, ending in a
forced-choice "Answer (Yes/No):" cue), queries a judge model over the
model-access contract, and parses leading yes/no verdicts.  The
instruction wording is frozen in judge_prompt.txt; template_hash() gives
the sha256 to cite alongside results.
"""

from __future__ import annotations

import hashlib
import json
import re
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, Sequence

from .analysis import RatingItem
from .lm.base import LanguageModel, LmTransportError

VERDICT_MAX_TOKENS = 8


@dataclass(frozen=True)
class FewShot:
    query: str
    expected: str
    answer: str
    verdict: bool


#: The four standard few-shot examples shown to human raters and judges
#: alike: a degenerate question-repeating answer (No), a correct answer
#: that wanders afterwards (Yes), a news-style answer that implies the
#: expected "no" (Yes), and a wrong first answer that mentions the
#: expected one later (No).
DEFAULT_FEW_SHOTS: tuple[FewShot, ...] = (
    FewShot(
        query="when did the wave hill walk off end?",
        expected="16 August 1975",
        answer=(
            "When did the wave hill walk off end? When did the wave hill walk off end? "
            "When did the wave hill walk off end? When did the wave hill walk off end? "
            "When did the wave hill walk off end? When did the wave hill walk off end? "
            "When did the"
        ),
        verdict=False,
    ),
    FewShot(
        query="By which body of water is Smith Mountain Dam located?",
        expected="Roanoke River",
        answer=(
            "Roanoke River. What state is Rzechówek located? Gmina Sypniewo. "
            "Which corporation created USS Leedstown (APA-56)? Bethlehem Steel. "
            "What company manufactures USS Leedstown (APA-56)? Bethlehem Steel. "
            "By which body of water is Smith Mountain"
        ),
        verdict=True,
    ),
    FewShot(
        query="Is Julius Hoffman still alive?",
        expected="no",
        answer=(
            "The former Montreal Canadiens star has been missing since he was found "
            "dead in his home in the Montreal suburb of Laval on Sunday. Hoffman, who "
            "was 48, was found dead in his home in Laval, Quebec, on Sunday. (Facebook) "
            "The cause of death has not"
        ),
        verdict=True,
    ),
    FewShot(
        query="He later immigrated to the United States. Running Mates premieres on",
        expected="CBS",
        answer=(
            "HBO. The headquarter of Majorette is located in London. The mother tongue "
            "of Thomas Joannes Stieltjes is English. In Northwest Territories, an "
            "official language is Tamil. Ryan Archibald is native to Plymouth. Percy "
            "Snow, the goaltender. Running Mates debuted on CBS. BBC One"
        ),
        verdict=False,
    ),
)


@dataclass(frozen=True)
class JudgeRequest:
    prompt: str
    generated_answer: str
    expected_answers: tuple[str, ...]
    few_shots: tuple[FewShot, ...] = field(default=DEFAULT_FEW_SHOTS)

    def __post_init__(self) -> None:
        if not self.expected_answers:
            raise ValueError("expected_answers must be non-empty")


@dataclass(frozen=True)
class JudgeVerdict:
    correct: bool | None
    raw_reply: str
    parse_status: str  # "parsed" | "unparseable"


def _template() -> str:
    return resources.files("edit_eval").joinpath("judge_prompt.txt").read_text("utf-8")


def template_hash() -> str:
    """sha256 of the frozen prompt template, for citing in result records."""
    return hashlib.sha256(_template().encode("utf-8")).hexdigest()


def _render_few_shot(shot: FewShot) -> str:
    return (
        f"Query Prompt: {shot.query}\n"
        f"Expected Answers: {shot.expected}\n"
        f"Generated Answer: {shot.answer}\n"
        f"Answer (Yes/No): {'Yes' if shot.verdict else 'No'}\n\n"
    )


def build_judge_prompt(request: JudgeRequest) -> str:
    """Deterministic rendering of the full judging prompt."""
    few_shots = "".join(_render_few_shot(shot) for shot in request.few_shots)
    return _template().format(
        few_shots=few_shots,
        prompt=request.prompt,
        expected="; ".join(request.expected_answers),
        generated=request.generated_answer,
    )


_VERDICT_RE = re.compile(r"^[\s\W]*(yes|no)\b", re.IGNORECASE)


def parse_verdict(reply: str) -> JudgeVerdict:
    """Leading yes/no on the first line, case-insensitive; else unparseable."""
    first_line = reply.splitlines()[0] if reply.splitlines() else ""
    match = _VERDICT_RE.match(first_line)
    if match is None:
        return JudgeVerdict(correct=None, raw_reply=reply, parse_status="unparseable")
    return JudgeVerdict(
        correct=match.group(1).lower() == "yes", raw_reply=reply, parse_status="parsed"
    )


def run_judge(
    handle: LanguageModel,
    items: Sequence[RatingItem],
    *,
    max_tokens: int = VERDICT_MAX_TOKENS,
    retries: int = 3,
    backoff_s: float = 0.25,
) -> dict[str, JudgeVerdict]:
    """One verdict per rating item, in item order.

    Transport errors are retried with exponential backoff; after the
    budget the item records an unparseable verdict carrying the error,
    which excludes it from accuracy like any other unparseable reply.
    """
    verdicts: dict[str, JudgeVerdict] = {}
    for item in items:
        prompt = build_judge_prompt(
            JudgeRequest(
                prompt=item.prompt,
                generated_answer=item.generated_text,
                expected_answers=item.expected_answers,
            )
        )
        reply = None
        for attempt in range(retries):
            try:
                reply = handle.generate(prompt, max_tokens).generated.text
                break
            except LmTransportError as exc:
                if attempt == retries - 1:
                    verdicts[item.item_id] = JudgeVerdict(
                        correct=None,
                        raw_reply=f"<transport error: {exc}>",
                        parse_status="unparseable",
                    )
                else:
                    time.sleep(backoff_s * (2**attempt))
        if reply is not None:
            verdicts[item.item_id] = parse_verdict(reply)
    return verdicts


def parsed_verdicts(verdicts: Mapping[str, JudgeVerdict]) -> dict[str, bool]:
    """Only the parsed verdicts, as booleans, for judge_accuracy."""
    return {
        item_id: verdict.correct
        for item_id, verdict in verdicts.items()
        if verdict.parse_status == "parsed" and verdict.correct is not None
    }


def verdicts_to_jsonl(verdicts: Mapping[str, JudgeVerdict]) -> str:
    """Verdict export: {item_id, correct|null, raw_reply} per line."""
    lines = []
    for item_id, verdict in verdicts.items():
        lines.append(
            json.dumps(
                {"item_id": item_id, "correct": verdict.correct, "raw_reply": verdict.raw_reply},
                ensure_ascii=False,
            )
        )
    return "\n".join(lines) + "\n" if lines else ""
