"""Parsers for the four benchmark formats' native files.

Each parser documents the exact field paths it reads.  All four native
payloads are JSON arrays of records; records lacking a post-edit target
(or carrying zero test queries) are counted as skipped rather than
raising, while structurally malformed records raise CorpusParseError
naming the record index and the offending field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .types import DatasetExample, EditRequest, FactTriple, TestCaseKind, TestQuery

ZSRE_NEIGHBORHOOD_PREFIX = "nq question: "

RIPPLE_KIND_KEYS = (
    ("Relation_Specificity", TestCaseKind.RELATION_SPECIFICITY),
    ("Logical_Generalization", TestCaseKind.LOGICAL_GENERALIZATION),
    ("Subject_Aliasing", TestCaseKind.SUBJECT_ALIASING),
    ("Compositionality_I", TestCaseKind.COMPOSITIONALITY),
    ("Compositionality_II", TestCaseKind.COMPOSITIONALITY),
    ("Forgetfulness", TestCaseKind.FORGETFULNESS),
)


class CorpusParseError(ValueError):
    """Malformed benchmark record, with its index and the field at fault."""

    def __init__(self, record_index: int, field: str, detail: str) -> None:
        self.record_index = record_index
        self.field = field
        super().__init__(f"record {record_index}: field {field!r}: {detail}")


@dataclass(frozen=True)
class ParseResult:
    examples: tuple[DatasetExample, ...]
    skipped_records: int


def render_fact_statement(prompt: str, new_target: str) -> str:
    """Render an edit as one declarative sentence: prompt + " " + target + ".".

    Works for both completion-style prompts ("Leonardo Balada found
    employment in" -> "... in Paris.") and question-style prompts, which
    become "Question Answer." on one line.  No deduplication: a prompt
    already ending in the target still gets the target appended.
    """
    return f"{prompt} {new_target}."


def _require(record: dict, key: str, index: int, kind: type = str):
    value = record.get(key)
    if value is None:
        raise CorpusParseError(index, key, "missing")
    if not isinstance(value, kind):
        raise CorpusParseError(index, key, f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def _string_list(record: dict, key: str, index: int) -> list[str]:
    value = _require(record, key, index, list)
    if not all(isinstance(item, str) for item in value):
        raise CorpusParseError(index, key, "expected a list of strings")
    return value


def _loads_array(payload: str, fmt: str) -> list:
    if not payload.strip():
        return []
    try:
        data = json.loads(payload)
    except json.JSONDecodeError as exc:
        raise CorpusParseError(-1, fmt, f"payload is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise CorpusParseError(-1, fmt, "payload must be a JSON array of records")
    return data


def parse_zsre(payload: str) -> ParseResult:
    """Parse zsRE records (question-answering edit format).

    Field paths read per record:
      subject         -- edited entity surface form
      src             -- the edit question (efficacy prompt)
      answers         -- gold answers; answers[0] is the edit target
      rephrase        -- paraphrase question
      loc             -- unrelated locality question, "nq question: " prefix stripped
      loc_ans         -- locality gold answer
    """
    examples: list[DatasetExample] = []
    skipped = 0
    for index, record in enumerate(_loads_array(payload, "zsre")):
        if not isinstance(record, dict):
            raise CorpusParseError(index, "record", "expected an object")
        answers = _string_list(record, "answers", index)
        answers = [a for a in answers if a]
        if not answers:
            skipped += 1
            continue
        subject = _require(record, "subject", index)
        src = _require(record, "src", index)
        rephrase = _require(record, "rephrase", index)
        loc = _require(record, "loc", index)
        loc_ans = _require(record, "loc_ans", index)
        loc = loc.removeprefix(ZSRE_NEIGHBORHOOD_PREFIX)

        example_id = f"zsre-{index:06d}"
        edit = EditRequest(
            id=f"{example_id}-e0",
            fact=FactTriple(subject=subject, relation=src, object_new=answers[0]),
            statement=render_fact_statement(src, answers[0]),
            new_target_aliases=tuple(answers),
        )
        queries = [
            TestQuery(
                prompt=src,
                expected_answers=tuple(answers),
                kind=TestCaseKind.EFFICACY,
                depends_on_edit_ids=(edit.id,),
            ),
            TestQuery(
                prompt=rephrase,
                expected_answers=tuple(answers),
                kind=TestCaseKind.PARAPHRASE,
                depends_on_edit_ids=(edit.id,),
            ),
            TestQuery(
                prompt=loc,
                expected_answers=(loc_ans,),
                kind=TestCaseKind.NEIGHBORHOOD,
            ),
        ]
        examples.append(
            DatasetExample(
                example_id=example_id,
                dataset="zsre",
                edits=(edit,),
                queries=tuple(queries),
            )
        )
    return ParseResult(tuple(examples), skipped)


def _rewrite_fields(rewrite: dict, index: int, field: str) -> tuple[str, str, str, str, str]:
    """Read one requested_rewrite object: (subject, relation_id, prompt, new, original)."""
    if not isinstance(rewrite, dict):
        raise CorpusParseError(index, field, "expected an object")
    subject = _require(rewrite, "subject", index)
    template = _require(rewrite, "prompt", index)
    relation = rewrite.get("relation_id") or template
    target_new = _require(rewrite, "target_new", index, dict)
    target_true = _require(rewrite, "target_true", index, dict)
    new = target_new.get("str")
    original = target_true.get("str")
    if not isinstance(original, str):
        raise CorpusParseError(index, f"{field}.target_true.str", "missing")
    if not isinstance(new, str):
        raise CorpusParseError(index, f"{field}.target_new.str", "missing")
    prompt = template.format(subject) if "{}" in template else template
    return subject, relation, prompt, new, original


def parse_counterfact(payload: str) -> ParseResult:
    """Parse CounterFact records (counterfactual completion format).

    Field paths read per record:
      case_id                          -- stable numeric id (optional; index fallback)
      requested_rewrite.subject        -- edited entity
      requested_rewrite.prompt         -- completion template with "{}" for the subject
      requested_rewrite.relation_id    -- relation identifier
      requested_rewrite.target_new.str -- counterfactual edit target
      requested_rewrite.target_true.str-- original target
      paraphrase_prompts[]             -- fully formed paraphrase prompts
      neighborhood_prompts[]           -- locality prompts (expected: original target)
      attribute_prompts[]              -- essence prompts (expected: new target)
    """
    examples: list[DatasetExample] = []
    skipped = 0
    for index, record in enumerate(_loads_array(payload, "counterfact")):
        if not isinstance(record, dict):
            raise CorpusParseError(index, "record", "expected an object")
        rewrite = _require(record, "requested_rewrite", index, dict)
        if not rewrite.get("target_new", {}).get("str"):
            skipped += 1
            continue
        subject, relation, prompt, new, original = _rewrite_fields(
            rewrite, index, "requested_rewrite"
        )
        case_id = record.get("case_id", index)
        example_id = f"counterfact-{int(case_id):06d}"
        edit = EditRequest(
            id=f"{example_id}-e0",
            fact=FactTriple(
                subject=subject, relation=relation, object_new=new, object_original=original
            ),
            statement=render_fact_statement(prompt, new),
            new_target_aliases=(new,),
        )

        queries = [
            TestQuery(
                prompt=prompt,
                expected_answers=(new,),
                original_answers=(original,),
                kind=TestCaseKind.EFFICACY,
                depends_on_edit_ids=(edit.id,),
            )
        ]
        for text in _string_list(record, "paraphrase_prompts", index):
            queries.append(
                TestQuery(
                    prompt=text,
                    expected_answers=(new,),
                    original_answers=(original,),
                    kind=TestCaseKind.PARAPHRASE,
                    depends_on_edit_ids=(edit.id,),
                )
            )
        # Locality: the unedited fact must survive, so expected and
        # original swap roles relative to the other kinds.
        for text in _string_list(record, "neighborhood_prompts", index):
            queries.append(
                TestQuery(
                    prompt=text,
                    expected_answers=(original,),
                    original_answers=(new,),
                    kind=TestCaseKind.NEIGHBORHOOD,
                )
            )
        for text in _string_list(record, "attribute_prompts", index):
            queries.append(
                TestQuery(
                    prompt=text,
                    expected_answers=(new,),
                    original_answers=(original,),
                    kind=TestCaseKind.ATTRIBUTE,
                )
            )
        examples.append(
            DatasetExample(
                example_id=example_id,
                dataset="counterfact",
                edits=(edit,),
                queries=tuple(queries),
            )
        )
    return ParseResult(tuple(examples), skipped)


def parse_mquake(payload: str) -> ParseResult:
    """Parse MQuAKE records (multi-hop counterfactual format).

    Field paths read per record:
      case_id                            -- stable numeric id (optional; index fallback)
      requested_rewrite[]                -- 1-4 edits, same shape as CounterFact's
      questions[]                        -- multi-hop question formulations
      new_answer                         -- post-edit answer to every question
      new_answer_alias[]                 -- aliases of new_answer
      answer                             -- pre-edit answer
      answer_alias[]                     -- aliases of answer
      new_single_hops[].answer / .answer_alias
                                         -- per-hop post-edit answers, used to
                                            recover aliases for each edit target
    """
    examples: list[DatasetExample] = []
    skipped = 0
    for index, record in enumerate(_loads_array(payload, "mquake")):
        if not isinstance(record, dict):
            raise CorpusParseError(index, "record", "expected an object")
        new_answer = record.get("new_answer")
        if not new_answer:
            skipped += 1
            continue
        if not isinstance(new_answer, str):
            raise CorpusParseError(index, "new_answer", "expected a string")
        rewrites = _require(record, "requested_rewrite", index, list)
        if not 1 <= len(rewrites) <= 4:
            raise CorpusParseError(
                index, "requested_rewrite", f"expected 1-4 edits, got {len(rewrites)}"
            )
        case_id = record.get("case_id", index)
        example_id = f"mquake-{int(case_id):06d}"

        hop_aliases: dict[str, tuple[str, ...]] = {}
        for hop in record.get("new_single_hops", []):
            if isinstance(hop, dict) and isinstance(hop.get("answer"), str):
                aliases = hop.get("answer_alias", [])
                if isinstance(aliases, list):
                    hop_aliases[hop["answer"]] = tuple(
                        a for a in aliases if isinstance(a, str) and a
                    )

        edits = []
        for j, rewrite in enumerate(rewrites):
            subject, relation, prompt, new, original = _rewrite_fields(
                rewrite, index, f"requested_rewrite[{j}]"
            )
            edits.append(
                EditRequest(
                    id=f"{example_id}-e{j}",
                    fact=FactTriple(
                        subject=subject, relation=relation, object_new=new, object_original=original
                    ),
                    statement=render_fact_statement(prompt, new),
                    new_target_aliases=(new, *hop_aliases.get(new, ())),
                        )
            )

        expected = (new_answer, *(a for a in _string_list(record, "new_answer_alias", index) if a))
        original_answer = record.get("answer")
        original_answers: tuple[str, ...] | None = None
        if isinstance(original_answer, str) and original_answer:
            alias = record.get("answer_alias", [])
            if not isinstance(alias, list):
                raise CorpusParseError(index, "answer_alias", "expected a list")
            original_answers = (original_answer, *(a for a in alias if isinstance(a, str) and a))

        edit_ids = tuple(edit.id for edit in edits)
        queries = tuple(
            TestQuery(
                prompt=question,
                expected_answers=expected,
                original_answers=original_answers,
                kind=TestCaseKind.MULTIHOP,
                depends_on_edit_ids=edit_ids,
            )
            for question in _string_list(record, "questions", index)
            if question
        )
        if not queries:
            skipped += 1
            continue
        examples.append(
            DatasetExample(
                example_id=example_id,
                dataset="mquake",
                edits=tuple(edits),
                queries=queries,
            )
        )
    return ParseResult(tuple(examples), skipped)


def _ripple_answer_set(answers: list, index: int, field: str) -> tuple[str, ...]:
    """Flatten [{value, aliases[]}, ...] into an ordered alias tuple."""
    flat: list[str] = []
    for answer in answers:
        if not isinstance(answer, dict) or not isinstance(answer.get("value"), str):
            raise CorpusParseError(index, field, "expected objects with a 'value' string")
        if answer["value"]:
            flat.append(answer["value"])
        for alias in answer.get("aliases", []):
            if isinstance(alias, str) and alias:
                flat.append(alias)
    return tuple(flat)


def parse_rippleedits(payload: str) -> ParseResult:
    """Parse RippleEdits records (ripple-effect probe format).

    Field paths read per record:
      example_type                  -- split name (recent / popular / random)
      edit.prompt                   -- completion-style edit prompt
      edit.subject                  -- edited entity
      edit.relation                 -- relation identifier
      edit.target_new.value / .aliases[]  -- edit target and its aliases
      edit.target_true.value        -- original target (optional)
      <Kind>[].test_queries[].prompt
      <Kind>[].test_queries[].answers[].value / .aliases[]
        for <Kind> in Relation_Specificity, Logical_Generalization,
        Subject_Aliasing, Compositionality_I, Compositionality_II,
        Forgetfulness
    """
    examples: list[DatasetExample] = []
    skipped = 0
    for index, record in enumerate(_loads_array(payload, "rippleedits")):
        if not isinstance(record, dict):
            raise CorpusParseError(index, "record", "expected an object")
        edit_obj = _require(record, "edit", index, dict)
        target_new = edit_obj.get("target_new")
        if not isinstance(target_new, dict) or not target_new.get("value"):
            skipped += 1
            continue
        prompt = _require(edit_obj, "prompt", index)
        subject = _require(edit_obj, "subject", index)
        relation = _require(edit_obj, "relation", index)
        new = target_new["value"]
        aliases = tuple(
            a for a in target_new.get("aliases", []) if isinstance(a, str) and a
        )
        original = None
        target_true = edit_obj.get("target_true")
        if isinstance(target_true, dict) and isinstance(target_true.get("value"), str):
            original = target_true["value"] or None

        split = record.get("example_type")
        if split is not None and not isinstance(split, str):
            raise CorpusParseError(index, "example_type", "expected a string")
        example_id = f"rippleedits-{index:06d}"
        edit = EditRequest(
            id=f"{example_id}-e0",
            fact=FactTriple(
                subject=subject, relation=relation, object_new=new, object_original=original
            ),
            statement=render_fact_statement(prompt, new),
            new_target_aliases=(new, *aliases),
        )

        queries: list[TestQuery] = []
        for key, kind in RIPPLE_KIND_KEYS:
            for g, group in enumerate(record.get(key, [])):
                if not isinstance(group, dict):
                    raise CorpusParseError(index, key, f"group {g}: expected an object")
                for q, query in enumerate(group.get("test_queries", [])):
                    if not isinstance(query, dict):
                        raise CorpusParseError(index, key, f"query {g}.{q}: expected an object")
                    q_prompt = query.get("prompt")
                    if not isinstance(q_prompt, str) or not q_prompt:
                        raise CorpusParseError(index, key, f"query {g}.{q}: missing 'prompt'")
                    answers = query.get("answers", [])
                    if not isinstance(answers, list):
                        raise CorpusParseError(index, key, f"query {g}.{q}: 'answers' not a list")
                    expected = _ripple_answer_set(answers, index, key)
                    if not expected:
                        continue
                    # Relation specificity probes unedited facts; it does
                    # not require the edit to have landed.
                    depends = () if kind is TestCaseKind.RELATION_SPECIFICITY else (edit.id,)
                    queries.append(
                        TestQuery(
                            prompt=q_prompt,
                            expected_answers=expected,
                            kind=kind,
                            depends_on_edit_ids=depends,
                        )
                    )
        if not queries:
            skipped += 1
            continue
        examples.append(
            DatasetExample(
                example_id=example_id,
                dataset="rippleedits",
                split=split,
                edits=(edit,),
                queries=tuple(queries),
            )
        )
    return ParseResult(tuple(examples), skipped)


_PARSERS = {
    "zsre": parse_zsre,
    "counterfact": parse_counterfact,
    "mquake": parse_mquake,
    "rippleedits": parse_rippleedits,
}


def parse_dataset(fmt: str, payload: str) -> ParseResult:
    """Parse a native benchmark file into DatasetExamples.

    fmt is one of zsre, counterfact, mquake, rippleedits.
    """
    try:
        parser = _PARSERS[fmt]
    except KeyError:
        raise ValueError(f"unknown dataset format: {fmt!r}") from None
    return parser(payload)
