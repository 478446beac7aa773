"""Unified data model shared by all four benchmark formats.

Every parser maps its native records onto these types; everything
downstream (editors, scorers, the sweep harness) only ever sees them.
All types are immutable after construction and safe to share across
concurrent evaluation workers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

DATASETS = ("counterfact", "mquake", "rippleedits", "zsre")


class TestCaseKind(str, enum.Enum):
    """Closed enumeration of test-case kinds."""

    EFFICACY = "efficacy"
    PARAPHRASE = "paraphrase"
    NEIGHBORHOOD = "neighborhood"
    ATTRIBUTE = "attribute"
    MULTIHOP = "multihop"
    RELATION_SPECIFICITY = "relation_specificity"
    LOGICAL_GENERALIZATION = "logical_generalization"
    SUBJECT_ALIASING = "subject_aliasing"
    COMPOSITIONALITY = "compositionality"
    FORGETFULNESS = "forgetfulness"


#: Kinds each dataset's parser may emit.
KINDS_BY_DATASET: dict[str, frozenset[TestCaseKind]] = {
    "zsre": frozenset(
        {TestCaseKind.EFFICACY, TestCaseKind.PARAPHRASE, TestCaseKind.NEIGHBORHOOD}
    ),
    "counterfact": frozenset(
        {
            TestCaseKind.EFFICACY,
            TestCaseKind.PARAPHRASE,
            TestCaseKind.NEIGHBORHOOD,
            TestCaseKind.ATTRIBUTE,
        }
    ),
    "mquake": frozenset({TestCaseKind.MULTIHOP}),
    "rippleedits": frozenset(
        {
            TestCaseKind.RELATION_SPECIFICITY,
            TestCaseKind.LOGICAL_GENERALIZATION,
            TestCaseKind.SUBJECT_ALIASING,
            TestCaseKind.COMPOSITIONALITY,
            TestCaseKind.FORGETFULNESS,
        }
    ),
}


def _dedupe(items: tuple[str, ...]) -> tuple[str, ...]:
    """Drop duplicates, preserving first-seen order."""
    seen: dict[str, None] = {}
    for item in items:
        seen.setdefault(item, None)
    return tuple(seen)


@dataclass(frozen=True)
class FactTriple:
    """A knowledge fact as a subject / relation / object triple.

    ``relation`` may be a relation identifier (e.g. a Wikidata property id)
    or a natural-language template, whichever the source format provides.
    """

    subject: str
    relation: str
    object_new: str
    object_original: str | None = None

    def __post_init__(self) -> None:
        if not self.subject:
            raise ValueError("FactTriple.subject must be non-empty")
        if not self.relation:
            raise ValueError("FactTriple.relation must be non-empty")
        if not self.object_new:
            raise ValueError("FactTriple.object_new must be non-empty")


@dataclass(frozen=True)
class EditRequest:
    """One knowledge edit plus its natural-language statement.

    ``new_target_aliases`` is an ordered, de-duplicated alias set for the
    post-edit target; the first entry is the canonical answer and always
    equals ``fact.object_new``.
    """

    id: str
    fact: FactTriple
    statement: str
    new_target_aliases: tuple[str, ...]

    @property
    def original_target(self) -> str | None:
        """Pre-edit object, when the source format records one."""
        return self.fact.object_original

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("EditRequest.id must be non-empty")
        object.__setattr__(self, "new_target_aliases", _dedupe(self.new_target_aliases))
        if self.fact.object_new not in self.new_target_aliases:
            raise ValueError(
                f"edit {self.id!r}: object_new {self.fact.object_new!r} missing from aliases"
            )
        if self.fact.subject not in self.statement:
            raise ValueError(
                f"edit {self.id!r}: statement does not contain subject {self.fact.subject!r}"
            )


@dataclass(frozen=True)
class TestQuery:
    """A prompt with its post-edit expected answers.

    ``expected_answers`` is ordered; the first alias is the canonical
    answer used by argmax and multiple-choice scoring.  ``original_answers``
    is present only when the source format supplies answer alternatives
    (multiple-choice scoring requires it).
    """

    prompt: str
    expected_answers: tuple[str, ...]
    kind: TestCaseKind
    original_answers: tuple[str, ...] | None = None
    depends_on_edit_ids: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.prompt:
            raise ValueError("TestQuery.prompt must be non-empty")
        object.__setattr__(self, "expected_answers", _dedupe(self.expected_answers))
        if not self.expected_answers:
            raise ValueError("TestQuery.expected_answers must be non-empty")
        if self.original_answers is not None:
            object.__setattr__(self, "original_answers", _dedupe(self.original_answers))
        if not isinstance(self.kind, TestCaseKind):
            raise ValueError(f"unknown test-case kind: {self.kind!r}")


@dataclass(frozen=True)
class DatasetExample:
    """One benchmark record: its edits and the queries that test them."""

    example_id: str
    dataset: str
    edits: tuple[EditRequest, ...]
    queries: tuple[TestQuery, ...]
    split: str | None = None

    def __post_init__(self) -> None:
        if self.dataset not in DATASETS:
            raise ValueError(f"unknown dataset: {self.dataset!r}")
        if not self.edits:
            raise ValueError(f"example {self.example_id!r} has no edits")
        if self.dataset == "mquake":
            if not 1 <= len(self.edits) <= 4:
                raise ValueError(
                    f"example {self.example_id!r}: mquake examples carry 1-4 edits, "
                    f"got {len(self.edits)}"
                )
        elif len(self.edits) != 1:
            raise ValueError(
                f"example {self.example_id!r}: {self.dataset} examples carry exactly "
                f"one edit, got {len(self.edits)}"
            )
        edit_ids = {edit.id for edit in self.edits}
        if len(edit_ids) != len(self.edits):
            raise ValueError(f"example {self.example_id!r} has duplicate edit ids")
        allowed = KINDS_BY_DATASET[self.dataset]
        for query in self.queries:
            if query.kind not in allowed:
                raise ValueError(
                    f"example {self.example_id!r}: kind {query.kind.value} not valid "
                    f"for dataset {self.dataset}"
                )
            for dep in query.depends_on_edit_ids:
                if dep not in edit_ids:
                    raise ValueError(
                        f"example {self.example_id!r}: query depends on unknown edit {dep!r}"
                    )
