"""Matching-validity analytics over generation outcomes and human judgments.

Covers late-success stratification, the stratified rating-set draw,
unique n-gram statistics, confusion counts against human ground truth at
every generation length, and judge accuracy.  Everything here is a pure
function over immutable inputs; figure-oriented outputs are CSV series.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .corpus.sampling import balanced_quotas

LATE = "late"
EARLY = "early"


def classify_late_success(
    outcomes: Mapping[str, int | None], max_length: int
) -> str:
    """"late" iff any editor matched strictly in the second half.

    outcomes maps editor name to that editor's first_match_index (None
    when nothing matched).  An index of exactly max_length/2 is early:
    the second half starts strictly after it.  Editor order is
    irrelevant.
    """
    if not outcomes:
        raise ValueError("empty editor map")
    return (
        LATE
        if any(index is not None and 2 * index > max_length for index in outcomes.values())
        else EARLY
    )


@dataclass(frozen=True)
class RatingCandidate:
    """One labeled example with every editor's generated answer."""

    example_id: str
    dataset: str
    label: str  # LATE or EARLY
    prompt: str
    expected_answers: tuple[str, ...]
    editor_generations: tuple[tuple[str, str], ...]  # (editor, generated_text)


@dataclass(frozen=True)
class RatingItem:
    """One (example, editor) pair put in front of raters and judges."""

    item_id: str
    dataset: str
    editor: str
    prompt: str
    generated_text: str
    expected_answers: tuple[str, ...]
    label: str


@dataclass(frozen=True)
class RatingSample:
    items: tuple[RatingItem, ...]
    shortfalls: dict[tuple[str, str], int]  # (label, dataset) -> unfilled quota slots


def sample_rating_set(
    candidates: Sequence[RatingCandidate],
    n_late: int = 150,
    n_early: int = 50,
    seed: int = 0,
) -> RatingSample:
    """Stratified example draw: per class, per-dataset quotas differing by <= 1.

    Extra slots go to datasets in name order (150 over 4 datasets ->
    38/38/37/37).  Sampling is uniform under the seed within each
    stratum; a stratum smaller than its quota is taken whole and the
    shortfall reported, never refilled from elsewhere.  Each sampled
    example emits one item per editor.
    """
    rng = np.random.default_rng(seed)
    datasets = sorted({candidate.dataset for candidate in candidates})
    if not datasets:
        raise ValueError("no rating candidates")
    items: list[RatingItem] = []
    shortfalls: dict[tuple[str, str], int] = {}
    for label, total in ((LATE, n_late), (EARLY, n_early)):
        quotas = balanced_quotas(total, datasets)
        for dataset in datasets:
            stratum = sorted(
                (c for c in candidates if c.label == label and c.dataset == dataset),
                key=lambda c: c.example_id,
            )
            quota = quotas[dataset]
            if len(stratum) < quota:
                shortfalls[(label, dataset)] = quota - len(stratum)
                picked = list(range(len(stratum)))
            else:
                picked = sorted(int(i) for i in rng.choice(len(stratum), size=quota, replace=False))
            for i in picked:
                candidate = stratum[i]
                for editor, generated_text in candidate.editor_generations:
                    items.append(
                        RatingItem(
                            item_id=f"{candidate.example_id}:{editor}",
                            dataset=candidate.dataset,
                            editor=editor,
                            prompt=candidate.prompt,
                            generated_text=generated_text,
                            expected_answers=candidate.expected_answers,
                            label=label,
                        )
                    )
    items.sort(key=lambda item: item.item_id)
    return RatingSample(tuple(items), shortfalls)


def unique_ngrams(tokens: Sequence[int], max_n: int = 5) -> int:
    """Distinct contiguous n-grams over all n in 1..max_n.

    n-grams longer than the sequence contribute nothing; an empty
    sequence has zero.
    """
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    seen: set[tuple[int, ...]] = set()
    sequence = tuple(tokens)
    for n in range(1, max_n + 1):
        for start in range(len(sequence) - n + 1):
            seen.add(sequence[start : start + n])
    return len(seen)


@dataclass(frozen=True)
class ConfusionCell:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class ConfusionSeries:
    by_length: dict[int, ConfusionCell]
    excluded: int  # items dropped for lack of a judgment


def confusion_by_length(
    match_indices: Mapping[str, int | None],
    judgments: Mapping[str, bool],
    max_length: int,
) -> ConfusionSeries:
    """Confusion counts of exact matching against human truth at each length.

    Human truth concerns the first answer and is length-independent; the
    matcher's prediction at length l is "positive iff the first match
    index is at most l".  Items without a judgment are excluded and
    counted.
    """
    judged = [
        (index, judgments[item_id])
        for item_id, index in sorted(match_indices.items())
        if item_id in judgments
    ]
    excluded = len(match_indices) - len(judged)
    by_length: dict[int, ConfusionCell] = {}
    for length in range(1, max_length + 1):
        tp = tn = fp = fn = 0
        for index, truth in judged:
            predicted = index is not None and index <= length
            if predicted and truth:
                tp += 1
            elif predicted and not truth:
                fp += 1
            elif not predicted and truth:
                fn += 1
            else:
                tn += 1
        by_length[length] = ConfusionCell(tp=tp, tn=tn, fp=fp, fn=fn)
    return ConfusionSeries(by_length=by_length, excluded=excluded)


def judge_accuracy(verdicts: Mapping[str, bool], truths: Mapping[str, bool]) -> float:
    """Fraction of judged items where the verdict agrees with human truth."""
    missing = [key for key in verdicts if key not in truths]
    if missing:
        raise ValueError(f"verdicts for items without truth: {sorted(missing)[:5]}")
    if not verdicts:
        raise ValueError("no verdicts overlap the truth set")
    agree = sum(verdicts[key] == truths[key] for key in verdicts)
    return agree / len(verdicts)


def judge_accuracy_by_dataset(
    verdicts: Mapping[str, bool],
    truths: Mapping[str, bool],
    dataset_of: Mapping[str, str],
) -> dict[str, float]:
    grouped: dict[str, dict[str, bool]] = {}
    for key, verdict in verdicts.items():
        grouped.setdefault(dataset_of[key], {})[key] = verdict
    return {
        dataset: judge_accuracy(group, truths) for dataset, group in sorted(grouped.items())
    }


def judge_accuracy_table(
    truths: Mapping[str, bool],
    judge_verdicts: Mapping[str, Mapping[str, bool]],
    exact_match_verdicts: Mapping[str, bool],
    dataset_of: Mapping[str, str],
) -> list[dict[str, object]]:
    """Accuracy rows per dataset (plus "all"): one column per judge, then Exact Match."""
    columns = list(judge_verdicts) + ["Exact Match"]
    all_verdicts = dict(judge_verdicts)
    all_verdicts["Exact Match"] = exact_match_verdicts
    datasets = sorted(set(dataset_of.values()))
    rows = []
    for dataset in datasets + ["all"]:
        row: dict[str, object] = {"dataset": dataset}
        for column in columns:
            verdicts = all_verdicts[column]
            if dataset != "all":
                verdicts = {k: v for k, v in verdicts.items() if dataset_of.get(k) == dataset}
            row[column] = judge_accuracy(verdicts, truths) if verdicts else None
        rows.append(row)
    return rows


def curve_csv(curve: Mapping[int, float]) -> str:
    lines = ["length,accuracy"]
    lines.extend(f"{length},{curve[length]}" for length in sorted(curve))
    return "\n".join(lines) + "\n"


def confusion_csv(series_by_facet: Mapping[tuple[str, str], ConfusionSeries]) -> str:
    """CSV rows per (editor, dataset, length): the per-facet confusion counts."""
    lines = ["editor,dataset,length,tp,tn,fp,fn"]
    for (editor, dataset), series in sorted(series_by_facet.items()):
        for length in sorted(series.by_length):
            cell = series.by_length[length]
            lines.append(
                f"{editor},{dataset},{length},{cell.tp},{cell.tn},{cell.fp},{cell.fn}"
            )
    return "\n".join(lines) + "\n"
