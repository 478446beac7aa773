"""The three scoring methodologies: Argmax, MC, and Generate.

Argmax checks whether each target token would win greedy decoding; MC
ranks the summed sequence log-likelihood of the new target against the
original; Generate greedily decodes L tokens and looks for any expected
alias as a case-sensitive exact substring, recording the first token
index at which one appears so a single generation yields accuracy at
every length up to L.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .corpus.types import TestQuery
from .editors import EditedModel, assemble_prompt
from .lm.base import with_boundary_space


class MethodInapplicableError(ValueError):
    """Scoring method not valid for this dataset or query."""


class ScoringMethod(str, enum.Enum):
    ARGMAX = "argmax"
    MC = "mc"
    GENERATE = "generate"


#: MC requires answer alternatives, which only CounterFact consistently has.
METHODS_BY_DATASET: dict[str, tuple[ScoringMethod, ...]] = {
    "counterfact": (ScoringMethod.ARGMAX, ScoringMethod.MC, ScoringMethod.GENERATE),
    "mquake": (ScoringMethod.ARGMAX, ScoringMethod.GENERATE),
    "rippleedits": (ScoringMethod.ARGMAX, ScoringMethod.GENERATE),
    "zsre": (ScoringMethod.ARGMAX, ScoringMethod.GENERATE),
}


def check_method_applicable(method: ScoringMethod | str, dataset: str) -> ScoringMethod:
    method = ScoringMethod(method)
    if dataset not in METHODS_BY_DATASET:
        raise MethodInapplicableError(f"unknown dataset {dataset!r}")
    if method not in METHODS_BY_DATASET[dataset]:
        raise MethodInapplicableError(f"method {method.value!r} is not valid on {dataset!r}")
    return method


@dataclass(frozen=True)
class ArgmaxScore:
    matched_tokens: int
    total_tokens: int

    @property
    def score(self) -> float:
        return self.matched_tokens / self.total_tokens


@dataclass(frozen=True)
class McOutcome:
    logprob_new: float
    logprob_original: float

    @property
    def success(self) -> bool:
        """Strictly greater; ties count as failure."""
        return self.logprob_new > self.logprob_original


@dataclass(frozen=True)
class GenerateOutcome:
    generated_text: str
    first_match_index: int | None
    matched_alias: str | None
    length: int

    def success_at(self, length: int) -> bool:
        return self.first_match_index is not None and self.first_match_index <= length


def canonical_answer(answers: Sequence[str]) -> str:
    """The first alias is the canonical answer for Argmax and MC."""
    if not answers:
        raise ValueError("empty answer set")
    return answers[0]


def score_argmax(model: EditedModel, query: TestQuery) -> ArgmaxScore:
    """Fraction of canonical-target tokens that are the model's argmax."""
    target = canonical_answer(query.expected_answers)
    if not target:
        raise ValueError("canonical answer is empty")
    prompt = assemble_prompt(model, query).full_prompt
    result = model.base.score(prompt, with_boundary_space(prompt, target))
    if not result.tokens:
        raise ValueError("target tokenized to zero tokens")
    return ArgmaxScore(
        matched_tokens=sum(token.is_argmax for token in result.tokens),
        total_tokens=len(result.tokens),
    )


def score_multiple_choice(
    model: EditedModel, query: TestQuery, *, normalize_by_length: bool = False
) -> McOutcome:
    """Summed sequence logprob of new vs. original target.

    Raw sums by default; normalize_by_length divides by token count and
    is never the default.
    """
    if not query.original_answers:
        raise MethodInapplicableError(
            "multiple-choice scoring requires a query with original_answers"
        )
    prompt = assemble_prompt(model, query).full_prompt

    def sequence_logprob(target: str) -> float:
        result = model.base.score(prompt, with_boundary_space(prompt, target))
        total = result.total_logprob
        return total / len(result.tokens) if normalize_by_length else total

    return McOutcome(
        logprob_new=sequence_logprob(canonical_answer(query.expected_answers)),
        logprob_original=sequence_logprob(canonical_answer(query.original_answers)),
    )


def find_first_match(
    prefixes: Sequence[str], aliases: Iterable[str]
) -> tuple[int | None, str | None]:
    """Smallest prefix length (1-based tokens) containing any alias.

    Matching is case-sensitive exact substring, no normalization.  Among
    aliases matching at the same length, the longest wins, then
    lexicographic order.
    """
    alias_list = [alias for alias in aliases if alias]
    if not alias_list:
        raise ValueError("empty alias set")
    for length, prefix in enumerate(prefixes, start=1):
        matched = [alias for alias in alias_list if alias in prefix]
        if matched:
            matched.sort(key=lambda alias: (-len(alias), alias))
            return length, matched[0]
    return None, None


def score_generate(model: EditedModel, query: TestQuery, length: int) -> GenerateOutcome:
    """Greedy-generate `length` tokens, then scan prefixes for alias matches."""
    if length < 1:
        raise ValueError("generation length must be >= 1")
    prompt = assemble_prompt(model, query).full_prompt
    generation = model.base.generate(prompt, length)
    index, alias = find_first_match(generation.detokenized_prefixes, query.expected_answers)
    return GenerateOutcome(
        generated_text=generation.generated.text,
        first_match_index=index,
        matched_alias=alias,
        length=length,
    )


def accuracy_curve(outcomes: Sequence[GenerateOutcome], max_length: int) -> dict[int, float]:
    """accuracy(l) = fraction of outcomes whose first match is at or before l.

    All outcomes come from one generation each; no re-generation per
    length.  Non-decreasing in l by construction.
    """
    if not outcomes:
        raise ValueError("empty outcome list")
    if any(outcome.length < max_length for outcome in outcomes):
        raise ValueError("all outcomes must carry at least max_length tokens")
    indices = [o.first_match_index for o in outcomes if o.first_match_index is not None]
    return {
        length: sum(index <= length for index in indices) / len(outcomes)
        for length in range(1, max_length + 1)
    }


def mean_score(scores: Mapping[str, list[float]] | list[float]) -> float:
    """Per-example mean, then mean over examples (examples weigh equally)."""
    if isinstance(scores, list):
        if not scores:
            raise ValueError("no scores to average")
        return sum(scores) / len(scores)
    per_example = [sum(values) / len(values) for values in scores.values() if values]
    if not per_example:
        raise ValueError("no scores to average")
    return sum(per_example) / len(per_example)
