"""Prompt-level editors: no-edit baseline, in-context, context-retriever, external.

An "edited model" here is a base LanguageModel plus a recipe for turning
a test query into the prompt the model actually sees.  Parameter-editing
backends (MEMIT-style checkpoints and the like) are reachable only as
externally served model variants; their prompts stay unmodified.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .corpus.types import EditRequest, TestQuery
from .lm.base import LanguageModel, LmCapabilityError
from .lm.remote import RemoteLm

DEFAULT_KNN = 4
DEFAULT_GENERATION_BUDGET = 64


class PromptOverflowError(ValueError):
    """The query prompt alone does not fit the context window."""


class EditorKind(str, enum.Enum):
    NO_EDIT = "no_edit"
    IN_CONTEXT = "in_context"
    CONTEXT_RETRIEVER = "context_retriever"
    EXTERNAL = "external"


@dataclass(frozen=True)
class RetrievalIndex:
    """Exact dense index over edit-statement embeddings (unit vectors)."""

    edit_ids: tuple[str, ...]
    vectors: np.ndarray  # shape (n, d), rows unit-norm, row i belongs to edit_ids[i]

    def __post_init__(self) -> None:
        if len(self.edit_ids) != len(set(self.edit_ids)):
            raise ValueError("retrieval index edit ids must be unique")
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.edit_ids):
            raise ValueError("retrieval index needs one vector row per edit id")

    @property
    def dimension(self) -> int:
        return int(self.vectors.shape[1])


@dataclass(frozen=True)
class PromptAssembly:
    context_block: str
    query_prompt: str
    truncated_edit_count: int

    @property
    def full_prompt(self) -> str:
        return self.context_block + self.query_prompt


@dataclass(frozen=True)
class EditedModel:
    base: LanguageModel
    editor: EditorKind
    batch: tuple[EditRequest, ...]
    k: int = DEFAULT_KNN
    index: RetrievalIndex | None = None
    model_variant: str | None = None
    generation_budget: int = DEFAULT_GENERATION_BUDGET

    def __post_init__(self) -> None:
        if self.editor is EditorKind.CONTEXT_RETRIEVER:
            if self.k < 1:
                raise ValueError("k must be >= 1")
            if self.index is None:
                raise ValueError("context_retriever requires a retrieval index")
            if tuple(self.index.edit_ids) != tuple(edit.id for edit in self.batch):
                raise ValueError("retrieval index must cover exactly the batch's edits")

    @property
    def label(self) -> str:
        if self.editor is EditorKind.EXTERNAL:
            return f"external:{self.model_variant}"
        return self.editor.value


def build_retrieval_index(handle: LanguageModel, batch: list[EditRequest]) -> RetrievalIndex:
    """Embed every edit statement; entry order is batch order."""
    if not handle.can_embed:
        raise LmCapabilityError("retrieval requires an embedder-capable handle")
    ids = tuple(edit.id for edit in batch)
    if not batch:
        return RetrievalIndex(ids, np.zeros((0, 1)))
    vectors = np.stack([handle.embed(edit.statement) for edit in batch])
    return RetrievalIndex(ids, vectors)


def retrieve_knn(index: RetrievalIndex, query_vector: np.ndarray, k: int) -> list[str]:
    """The min(k, n) edit ids most cosine-similar to the query, exactly.

    Vectors are unit-norm so cosine similarity is the dot product.
    Descending similarity; ties broken by batch order (stable sort).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(index.edit_ids) == 0:
        return []
    query = np.asarray(query_vector, dtype=float)
    if query.shape != (index.dimension,):
        raise ValueError(
            f"query vector dimension {query.shape} does not match index ({index.dimension},)"
        )
    similarities = index.vectors @ query
    order = np.argsort(-similarities, kind="stable")
    return [index.edit_ids[i] for i in order[: min(k, len(index.edit_ids))]]


def apply_editor(
    base: LanguageModel,
    editor: EditorKind | str,
    batch: list[EditRequest],
    *,
    k: int = DEFAULT_KNN,
    model_variant: str | None = None,
    generation_budget: int = DEFAULT_GENERATION_BUDGET,
) -> EditedModel:
    """Build an EditedModel for a batch under the named editor."""
    kind = EditorKind(editor)
    if kind is EditorKind.CONTEXT_RETRIEVER:
        return EditedModel(
            base=base,
            editor=kind,
            batch=tuple(batch),
            k=k,
            index=build_retrieval_index(base, batch),
            generation_budget=generation_budget,
        )
    if kind is EditorKind.EXTERNAL:
        return bind_external(base, model_variant or "", batch, generation_budget=generation_budget)
    return EditedModel(
        base=base, editor=kind, batch=tuple(batch), generation_budget=generation_budget
    )


def bind_external(
    base: LanguageModel,
    variant: str,
    batch: list[EditRequest],
    *,
    generation_budget: int = DEFAULT_GENERATION_BUDGET,
) -> EditedModel:
    """Bind a remote handle to an externally edited model variant.

    Every lm call made through the resulting model carries
    model_variant=variant; the prompt context stays empty (the edits
    live in the served checkpoint, not the prompt).
    """
    if not variant:
        raise ValueError("model_variant must be non-empty")
    if not isinstance(base, RemoteLm):
        raise LmCapabilityError("externally edited variants require a remote backend")
    return EditedModel(
        base=base.with_variant(variant),
        editor=EditorKind.EXTERNAL,
        batch=tuple(batch),
        model_variant=variant,
        generation_budget=generation_budget,
    )


def _layout(statements: list[str]) -> str:
    """Context layout: one statement per line, then one blank line."""
    if not statements:
        return ""
    return "\n".join(statements) + "\n\n"


def assemble_prompt(model: EditedModel, query: TestQuery) -> PromptAssembly:
    """Build the prompt an editor presents for a query.

    Statements that push the assembled prompt to within the generation
    budget of the context window are dropped whole, from the end of the
    context block; the query prompt itself is never truncated.
    """
    return assemble_prompt_text(model, query.prompt)


def assemble_prompt_text(model: EditedModel, prompt: str) -> PromptAssembly:
    """assemble_prompt for a raw prompt string (control tasks use this too)."""
    if not prompt:
        raise ValueError("query prompt must be non-empty")
    if model.editor in (EditorKind.NO_EDIT, EditorKind.EXTERNAL):
        statements: list[str] = []
    elif model.editor is EditorKind.IN_CONTEXT:
        statements = [edit.statement for edit in model.batch]
    else:
        assert model.index is not None
        query_vector = model.base.embed(prompt)
        by_id = {edit.id: edit.statement for edit in model.batch}
        statements = [by_id[i] for i in retrieve_knn(model.index, query_vector, model.k)]

    budget = model.base.context_window - model.generation_budget

    def fits(text: str) -> bool:
        return len(model.base.tokenize(text)) < budget

    truncated = 0
    while statements and not fits(_layout(statements) + prompt):
        statements.pop()
        truncated += 1
    if not statements and not fits(prompt):
        raise PromptOverflowError(
            f"query prompt alone ({len(model.base.tokenize(prompt))} tokens) exceeds "
            f"context window {model.base.context_window} minus generation budget "
            f"{model.generation_budget}"
        )
    return PromptAssembly(
        context_block=_layout(statements),
        query_prompt=prompt,
        truncated_edit_count=truncated,
    )
