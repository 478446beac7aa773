"""Model-as-judge over rated items, scored against human ground truth.

Takes a handful of rating items with human labels, lets a scripted mock
model judge each one through the frozen yes/no prompt, and prints the
per-dataset accuracy table with the plain exact-match baseline in the
last column.  The mock script keys each verdict on the generated
answer's final token as it merges into the "(Yes/No):" cue, so the
"judge" is deliberate, deterministic, and wrong exactly twice.

Run:  python3 demos/judge_pipeline_demo.py
"""

from __future__ import annotations

from edit_eval.analysis import LATE, RatingItem, judge_accuracy, judge_accuracy_table
from edit_eval.judge import parsed_verdicts, run_judge, template_hash
from edit_eval.lm.mock import build_mock_lm


def build_items() -> tuple[list[RatingItem], dict[str, bool], list[dict]]:
    items, truths, rules = [], {}, []
    for i in range(12):
        dataset = "zsre" if i < 6 else "counterfact"
        truth = i % 3 != 0  # humans reject every third answer
        verdict = truth if i not in (1, 8) else not truth  # judge errs twice
        if i in (0, 9):
            # Wrong answer that still mentions the expected string: the
            # matcher credits it, humans do not.
            answer = f"answer{i} dismissed{i}"
        elif i in (2, 4):
            # Correct but paraphrased: the matcher misses the string.
            answer = f"rephrased{i}"
        else:
            answer = f"answer{i}" if truth else f"offtopic{i}"
        item = RatingItem(
            item_id=f"{dataset}-{i:04d}:in_context",
            dataset=dataset,
            editor="in_context",
            prompt=f"demo question {i} asks",
            generated_text=f"reply{i} {answer}",
            expected_answers=(f"answer{i}",),
            label=LATE,
        )
        items.append(item)
        truths[item.item_id] = truth
        rules.append(
            {"suffix": f"{answer}\nAnswer (Yes/No):", "text": "Yes" if verdict else "No"}
        )
    return items, truths, rules


def main() -> None:
    items, truths, rules = build_items()
    judge_model = build_mock_lm({"rules": rules})
    print(f"prompt template {template_hash()[:12]}, {len(items)} items\n")

    verdicts = run_judge(judge_model, items)
    parsed = parsed_verdicts(verdicts)
    unparseable = len(verdicts) - len(parsed)
    print(f"{len(parsed)} verdicts parsed, {unparseable} unparseable")
    print(f"judge accuracy vs human truth: {judge_accuracy(parsed, truths):.4f}\n")

    exact_match = {
        item.item_id: item.expected_answers[0] in item.generated_text for item in items
    }
    dataset_of = {item.item_id: item.dataset for item in items}
    table = judge_accuracy_table(truths, {"mock-judge": parsed}, exact_match, dataset_of)
    header = f"{'dataset':<12}  {'mock-judge':>10}  {'Exact Match':>11}"
    print(header)
    print("-" * len(header))
    for row in table:
        print(
            f"{row['dataset']:<12}  {row['mock-judge']:>10.4f}  {row['Exact Match']:>11.4f}"
        )


if __name__ == "__main__":
    main()
