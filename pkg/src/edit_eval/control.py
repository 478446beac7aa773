"""General-capability control tasks evaluated alongside edits.

Three metric families: multiple-choice accuracy (raw and byte-length
normalized), cloze accuracy plus perplexity, and rolling document
perplexity (word / byte / bits-per-byte), with F1 and MCC for two-choice
tasks.  Items are scheduled in contiguous chunks across edit batches and
pooled from exact per-metric sums, so chunk boundaries cannot change the
pooled result.

Tasks are consumed from a neutral JSONL schema (one task per line):
  {"task_id": ..., "mode": "choice|cloze|document_perplexity",
   "metrics": [...], "items": [...]}
with items shaped per mode:
  choice:               {"context": str, "choices": [str, ...], "gold_index": int}
  cloze:                {"context": str, "target_word": str}
  document_perplexity:  {"document": str}
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

from .editors import EditedModel, assemble_prompt_text
from .lm.base import with_boundary_space


class ControlMode(str, enum.Enum):
    CHOICE = "choice"
    CLOZE = "cloze"
    DOCUMENT_PERPLEXITY = "document_perplexity"


METRICS_BY_MODE = {
    ControlMode.CHOICE: frozenset({"acc", "acc_norm", "f1", "mcc"}),
    ControlMode.CLOZE: frozenset({"acc", "perplexity"}),
    ControlMode.DOCUMENT_PERPLEXITY: frozenset(
        {"word_perplexity", "byte_perplexity", "bits_per_byte"}
    ),
}


@dataclass(frozen=True)
class ControlItem:
    context: str = ""
    choices: tuple[str, ...] = ()
    gold_index: int = 0
    target_word: str = ""
    document: str = ""


@dataclass(frozen=True)
class ControlTask:
    task_id: str
    mode: ControlMode
    items: tuple[ControlItem, ...]
    metrics: tuple[str, ...]

    def __post_init__(self) -> None:
        allowed = METRICS_BY_MODE[self.mode]
        bad = [m for m in self.metrics if m not in allowed]
        if bad:
            raise ValueError(f"task {self.task_id}: metrics {bad} invalid for mode {self.mode.value}")
        if {"f1", "mcc"} & set(self.metrics):
            if any(len(item.choices) != 2 for item in self.items):
                raise ValueError(f"task {self.task_id}: f1/mcc require exactly two choices per item")
        for i, item in enumerate(self.items):
            if self.mode is ControlMode.CHOICE:
                if not item.context:
                    raise ValueError(f"task {self.task_id} item {i}: empty context")
                if len(item.choices) < 2:
                    raise ValueError(f"task {self.task_id} item {i}: need at least two choices")
                if not 0 <= item.gold_index < len(item.choices):
                    raise ValueError(f"task {self.task_id} item {i}: gold_index out of range")
            elif self.mode is ControlMode.CLOZE:
                if not item.context:
                    raise ValueError(f"task {self.task_id} item {i}: empty context")
                if not item.target_word:
                    raise ValueError(f"task {self.task_id} item {i}: empty target_word")
            elif not item.document:
                raise ValueError(f"task {self.task_id} item {i}: empty document")


def load_control_tasks(payload: str) -> list[ControlTask]:
    """Parse task-file JSONL; errors name the 1-based line number."""
    tasks = []
    for lineno, line in enumerate(payload.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
            mode = ControlMode(data["mode"])
            items = tuple(
                ControlItem(
                    context=item.get("context", ""),
                    choices=tuple(item.get("choices", ())),
                    gold_index=item.get("gold_index", 0),
                    target_word=item.get("target_word", ""),
                    document=item.get("document", ""),
                )
                for item in data["items"]
            )
            tasks.append(
                ControlTask(
                    task_id=data["task_id"],
                    mode=mode,
                    items=items,
                    metrics=tuple(data["metrics"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"control task line {lineno}: {exc}") from exc
    return tasks


@dataclass(frozen=True)
class ControlMetrics:
    """Pooled metric values plus the exact sums they were pooled from."""

    values: dict[str, float]
    sums: dict[str, float]
    item_count: int

    def merge(self, other: "ControlMetrics", metrics: tuple[str, ...]) -> "ControlMetrics":
        sums = dict(self.sums)
        for key, value in other.sums.items():
            sums[key] = sums.get(key, 0.0) + value
        return metrics_from_sums(sums, metrics, self.item_count + other.item_count)


def metrics_from_sums(sums: dict[str, float], metrics: tuple[str, ...], item_count: int) -> ControlMetrics:
    values: dict[str, float] = {}
    for metric in metrics:
        if metric in ("acc", "acc_norm"):
            key = "correct" if metric == "acc" else "correct_norm"
            values[metric] = sums.get(key, 0.0) / sums["items"] if sums.get("items") else 0.0
        elif metric == "perplexity":
            values[metric] = math.exp(sums["nll"] / sums["items"]) if sums.get("items") else 1.0
        elif metric == "word_perplexity":
            values[metric] = math.exp(sums["nll"] / sums["words"]) if sums.get("words") else 1.0
        elif metric == "byte_perplexity":
            values[metric] = math.exp(sums["nll"] / sums["bytes"]) if sums.get("bytes") else 1.0
        elif metric == "bits_per_byte":
            values[metric] = (
                sums["nll"] / (sums["bytes"] * math.log(2)) if sums.get("bytes") else 0.0
            )
        elif metric in ("f1", "mcc"):
            f1, mcc = _binary_from_confusion(
                sums.get("tp", 0.0), sums.get("fp", 0.0), sums.get("fn", 0.0), sums.get("tn", 0.0)
            )
            values[metric] = f1 if metric == "f1" else mcc
        else:
            raise ValueError(f"unknown metric {metric!r}")
    return ControlMetrics(values=values, sums=sums, item_count=item_count)


@dataclass(frozen=True)
class ChoiceOutcome:
    chosen_index: int
    chosen_index_norm: int
    correct: bool
    correct_norm: bool


def eval_choice_item(model: EditedModel, item: ControlItem) -> ChoiceOutcome:
    """Pick the choice with the highest summed continuation logprob.

    acc_norm divides each choice's logprob by its UTF-8 byte length
    before the argmax.  Ties go to the smallest index.  Only the choice
    tokens are scored; any edit context sits in the prompt.
    """
    prompt = assemble_prompt_text(model, item.context).full_prompt
    logprobs = []
    for choice in item.choices:
        result = model.base.score(prompt, with_boundary_space(prompt, choice))
        logprobs.append(result.total_logprob)
    normalized = [lp / len(choice.encode("utf-8")) for lp, choice in zip(logprobs, item.choices)]
    chosen = max(range(len(logprobs)), key=lambda i: (logprobs[i], -i))
    chosen_norm = max(range(len(normalized)), key=lambda i: (normalized[i], -i))
    return ChoiceOutcome(
        chosen_index=chosen,
        chosen_index_norm=chosen_norm,
        correct=chosen == item.gold_index,
        correct_norm=chosen_norm == item.gold_index,
    )


@dataclass(frozen=True)
class ClozeOutcome:
    correct: bool
    target_logprob: float


def eval_cloze_item(model: EditedModel, item: ControlItem) -> ClozeOutcome:
    """Greedy-decode the target's token length and compare exactly.

    correct iff decoding len(tokenize(target)) tokens after the context
    reproduces the target word; target_logprob is the summed continuation
    logprob (leading-space rule applied).
    """
    prompt = assemble_prompt_text(model, item.context).full_prompt
    scored = model.base.score(prompt, with_boundary_space(prompt, item.target_word))
    if not scored.tokens:
        raise ValueError("target word tokenized to zero tokens")
    generation = model.base.generate(prompt, len(scored.tokens))
    return ClozeOutcome(
        correct=generation.generated.text == item.target_word,
        target_logprob=scored.total_logprob,
    )


@dataclass(frozen=True)
class DocumentOutcome:
    total_nll: float
    word_count: int
    byte_count: int


def _document_segments(model: EditedModel, document: str) -> list[str]:
    """Split a document into maximal segments that fit the window."""
    limit = model.base.context_window - model.generation_budget
    if len(model.base.tokenize(document)) < limit:
        return [document]
    segments: list[str] = []
    current: list[str] = []
    for word in document.split(" "):
        candidate = " ".join(current + [word])
        if current and len(model.base.tokenize(candidate)) >= limit:
            segments.append(" ".join(current))
            current = [word]
        else:
            current.append(word)
    if current:
        segments.append(" ".join(current))
    return segments


def eval_perplexity_doc(model: EditedModel, item: ControlItem) -> DocumentOutcome:
    """Total NLL of the document plus its word and byte counts.

    Documents longer than the window are split into maximal segments
    scored independently and summed.  Only document tokens enter the
    NLL; edit context, when present, is prompt-side.
    """
    if not item.document:
        raise ValueError("empty document")
    total_nll = 0.0
    for segment in _document_segments(model, item.document):
        context = assemble_prompt_text(model, segment).context_block
        result = model.base.score(context, segment)
        total_nll -= result.total_logprob
    return DocumentOutcome(
        total_nll=total_nll,
        word_count=len(item.document.split()),
        byte_count=len(item.document.encode("utf-8")),
    )


def _binary_from_confusion(tp: float, fp: float, fn: float, tn: float) -> tuple[float, float]:
    f1 = 2 * tp / (2 * tp + fp + fn) if (2 * tp + fp + fn) > 0 else 0.0
    factors = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    mcc = (tp * tn - fp * fn) / math.sqrt(factors) if factors > 0 else 0.0
    return f1, mcc


def compute_binary_metrics(predictions: list[int], golds: list[int]) -> tuple[float, float]:
    """F1 and MCC with the standard zero conventions.

    f1 = 0 when its denominator is zero; mcc = 0 when any marginal
    factor is zero.  Label 1 is the positive class.
    """
    if len(predictions) != len(golds):
        raise ValueError("predictions and golds must have equal length")
    if not predictions:
        raise ValueError("need at least one prediction")
    tp = sum(p == 1 and g == 1 for p, g in zip(predictions, golds))
    fp = sum(p == 1 and g == 0 for p, g in zip(predictions, golds))
    fn = sum(p == 0 and g == 1 for p, g in zip(predictions, golds))
    tn = sum(p == 0 and g == 0 for p, g in zip(predictions, golds))
    return _binary_from_confusion(tp, fp, fn, tn)


def chunk_schedule(task: ControlTask, num_batches: int) -> list[int]:
    """Contiguous chunk assignment: item index -> batch index.

    Chunk sizes differ by at most 1; earlier chunks take the remainder.
    Empty chunks are fine when there are fewer items than batches.
    """
    if num_batches < 1:
        raise ValueError("num_batches must be >= 1")
    n = len(task.items)
    base, extra = divmod(n, num_batches)
    assignment: list[int] = []
    for batch_index in range(num_batches):
        size = base + (1 if batch_index < extra else 0)
        assignment.extend([batch_index] * size)
    return assignment


def evaluate_chunk(
    model: EditedModel, task: ControlTask, item_indices: list[int]
) -> ControlMetrics:
    """Evaluate one chunk of a task's items under one edited model."""
    sums: dict[str, float] = {}

    def add(key: str, value: float) -> None:
        sums[key] = sums.get(key, 0.0) + value

    for index in item_indices:
        item = task.items[index]
        if task.mode is ControlMode.CHOICE:
            outcome = eval_choice_item(model, item)
            add("items", 1)
            add("correct", outcome.correct)
            add("correct_norm", outcome.correct_norm)
            if {"f1", "mcc"} & set(task.metrics):
                add("tp", outcome.chosen_index == 1 and item.gold_index == 1)
                add("fp", outcome.chosen_index == 1 and item.gold_index == 0)
                add("fn", outcome.chosen_index == 0 and item.gold_index == 1)
                add("tn", outcome.chosen_index == 0 and item.gold_index == 0)
        elif task.mode is ControlMode.CLOZE:
            outcome = eval_cloze_item(model, item)
            add("items", 1)
            add("correct", outcome.correct)
            add("nll", -outcome.target_logprob)
        else:
            outcome = eval_perplexity_doc(model, item)
            add("items", 1)
            add("nll", outcome.total_nll)
            add("words", outcome.word_count)
            add("bytes", outcome.byte_count)
    return metrics_from_sums(sums, task.metrics, len(item_indices))


def delta_vs_baseline(edited: ControlMetrics, baseline: ControlMetrics) -> dict[str, float]:
    """Signed raw deltas, edited minus baseline, per metric."""
    if set(edited.values) != set(baseline.values):
        raise ValueError("metric sets differ between edited and baseline")
    return {metric: edited.values[metric] - baseline.values[metric] for metric in edited.values}
