"""How trustworthy is substring matching as a success signal?

Builds a judged set where humans have labeled each generated answer
right or wrong, then scans the matcher's verdict at every generation
length: predicted-positive means "the expected string appeared within
the first l tokens".  Short generations under-credit verbose answers
(false negatives); long generations start crediting answers that only
mention the expected string while saying something else (false
positives).  One planted item flips from true negative to false
positive the moment the scan reaches token 40.

Run:  python3 demos/matching_validity_demo.py
"""

from __future__ import annotations

from edit_eval.analysis import classify_late_success, confusion_by_length, unique_ngrams

MAX_LENGTH = 64


def build_judged_set() -> tuple[dict[str, int | None], dict[str, bool]]:
    match_indices: dict[str, int | None] = {}
    judgments: dict[str, bool] = {}
    # Correct answers that surface early: credited once l reaches them.
    for n in range(10):
        match_indices[f"early-good-{n}"] = n + 2
        judgments[f"early-good-{n}"] = True
    # Correct but verbose answers: the string shows up late.
    for n in range(6):
        match_indices[f"late-good-{n}"] = 44 + 3 * n
        judgments[f"late-good-{n}"] = True
    # Wrong answers that never contain the expected string.
    for n in range(12):
        match_indices[f"bad-{n}"] = None
        judgments[f"bad-{n}"] = False
    # Wrong answers that eventually mention the expected string anyway.
    # The first one is pinned at token 40 to make the flip visible.
    for n in range(6):
        match_indices[f"mention-{n}"] = 40 + 4 * n
        judgments[f"mention-{n}"] = False
    # Correct answers the matcher never credits (aliases missing).
    for n in range(6):
        match_indices[f"missed-good-{n}"] = None
        judgments[f"missed-good-{n}"] = True
    return match_indices, judgments


def main() -> None:
    match_indices, judgments = build_judged_set()
    series = confusion_by_length(match_indices, judgments, MAX_LENGTH)
    total = len(judgments)
    print(f"{total} judged items, {series.excluded} unjudged excluded\n")

    print("length  tp  fp  fn  tn  agreement")
    for length in (1, 8, 16, 32, 39, 40, 48, 64):
        cell = series.by_length[length]
        agreement = (cell.tp + cell.tn) / total
        print(
            f"{length:6d}  {cell.tp:2d}  {cell.fp:2d}  {cell.fn:2d}  {cell.tn:2d}"
            f"  {agreement:.3f}"
        )
    at39, at40 = series.by_length[39], series.by_length[40]
    print(
        f"\nplanted crossover: fp {at39.fp} -> {at40.fp} and tn {at39.tn} -> {at40.tn}"
        " between lengths 39 and 40"
    )

    # The same indices drive the late/early split used to stratify
    # items for human rating.
    late = sum(
        classify_late_success({"in_context": index}, MAX_LENGTH) == "late"
        for index in match_indices.values()
    )
    print(f"\n{late} of {len(match_indices)} items matched strictly in the second half")

    # Degenerate generations (loops) are easy to spot by n-gram count.
    looping = [7, 3, 7, 3, 7, 3, 7, 3]
    varied = list(range(8))
    print(
        f"unique n-grams (n<=5): looping {unique_ngrams(looping)},"
        f" varied {unique_ngrams(varied)} over {len(varied)} tokens"
    )


if __name__ == "__main__":
    main()
