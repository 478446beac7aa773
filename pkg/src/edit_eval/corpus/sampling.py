"""Evaluation-subset sampling and edit-batch construction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .types import DatasetExample, EditRequest, TestQuery


def balanced_quotas(total: int, keys: list[str]) -> dict[str, int]:
    """Split total into per-key quotas differing by at most 1.

    Keys are processed in sorted order; the first (total mod k) keys get
    the extra slot.  Used for both RippleEdits split draws and the
    per-dataset rating quotas.
    """
    if total < 0:
        raise ValueError("total must be >= 0")
    ordered = sorted(keys)
    base, extra = divmod(total, len(ordered))
    return {key: base + (1 if i < extra else 0) for i, key in enumerate(ordered)}


def sample_examples(
    examples: list[DatasetExample], n: int, seed: int
) -> list[DatasetExample]:
    """Draw min(n, len(examples)) examples uniformly without replacement.

    Deterministic under (input, n, seed).  When the examples carry split
    names (RippleEdits), the draw is stratified so per-split counts
    differ by at most 1; splits too small to fill their quota are taken
    whole and the shortfall is redistributed.  Output is in canonical
    order (sorted by example_id).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n >= len(examples):
        return sorted(examples, key=lambda e: e.example_id)

    rng = np.random.default_rng(seed)
    splits: dict[str, list[DatasetExample]] = {}
    for example in examples:
        splits.setdefault(example.split or "", []).append(example)

    chosen: list[DatasetExample] = []
    if len(splits) == 1:
        pool = next(iter(splits.values()))
        pool = sorted(pool, key=lambda e: e.example_id)
        picks = rng.choice(len(pool), size=n, replace=False)
        chosen = [pool[i] for i in picks]
    else:
        remaining = {name: sorted(pool, key=lambda e: e.example_id) for name, pool in splits.items()}
        need = n
        # Re-balance after each saturation pass so small splits do not
        # starve the total draw.
        while need > 0 and remaining:
            quotas = balanced_quotas(need, list(remaining))
            exhausted: list[str] = []
            for name in sorted(remaining):
                pool = remaining[name]
                take = min(quotas[name], len(pool))
                if take:
                    picks = rng.choice(len(pool), size=take, replace=False)
                    picked = {int(i) for i in picks}
                    chosen.extend(pool[i] for i in sorted(picked))
                    remaining[name] = [e for i, e in enumerate(pool) if i not in picked]
                need -= take
                if not remaining[name] or take < quotas[name]:
                    exhausted.append(name)
            if not any(quotas[name] for name in quotas):
                break
            for name in exhausted:
                if not remaining[name]:
                    del remaining[name]
    return sorted(chosen, key=lambda e: e.example_id)


@dataclass(frozen=True)
class EditBatch:
    """Consecutive examples whose edits are applied together."""

    index: int
    examples: tuple[DatasetExample, ...]

    @property
    def edits(self) -> tuple[EditRequest, ...]:
        return tuple(edit for example in self.examples for edit in example.edits)

    @property
    def query_items(self) -> tuple[tuple[DatasetExample, int, TestQuery], ...]:
        """Every query in the batch as (example, query_index, query)."""
        return tuple(
            (example, qi, query)
            for example in self.examples
            for qi, query in enumerate(example.queries)
        )


def build_edit_batches(examples: list[DatasetExample], batch_size: int) -> list[EditBatch]:
    """Partition examples in canonical order into batches of <= batch_size edits.

    An example's edits are never split across batches; every query stays
    attached to the batch carrying its edits.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    ordered = sorted(examples, key=lambda e: e.example_id)
    for example in ordered:
        if len(example.edits) > batch_size:
            raise ValueError(
                f"example {example.example_id} has {len(example.edits)} edits, "
                f"more than batch_size={batch_size}"
            )
    batches: list[EditBatch] = []
    current: list[DatasetExample] = []
    count = 0
    for example in ordered:
        if count + len(example.edits) > batch_size:
            batches.append(EditBatch(index=len(batches), examples=tuple(current)))
            current, count = [], 0
        current.append(example)
        count += len(example.edits)
    if current:
        batches.append(EditBatch(index=len(batches), examples=tuple(current)))
    return batches
