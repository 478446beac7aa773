"""Model-access contract shared by the remote client and the mock model.

Every editor and scorer talks to a LanguageModel and nothing else, so
remote endpoints and deterministic in-process mocks are interchangeable
(the same contract-test suite runs against both).
"""

from __future__ import annotations

import abc
from dataclasses import dataclass

import numpy as np


class LmError(Exception):
    """Base for all model-access failures; carries a stable error code."""

    code = "lm_error"


class LmTransportError(LmError):
    """Backend unreachable or replied with a server-side failure; retryable."""

    code = "transport_error"
    retryable = True


class LmCapabilityError(LmError):
    """Operation requires a capability this handle does not have."""

    code = "capability_unsupported"


class LmContextOverflowError(LmError):
    """Request would not fit the model's context window."""

    code = "context_overflow"


class LmProtocolError(LmError):
    """Backend reply violates the wire protocol contract."""

    code = "protocol_error"


@dataclass(frozen=True)
class TokenSequence:
    """Token ids plus the text they detokenize to."""

    token_ids: tuple[int, ...]
    text: str

    def __post_init__(self) -> None:
        if any(token_id < 0 for token_id in self.token_ids):
            raise ValueError("token ids must be non-negative")

    def __len__(self) -> int:
        return len(self.token_ids)


@dataclass(frozen=True)
class ScoredToken:
    token_id: int
    logprob: float
    is_argmax: bool

    def __post_init__(self) -> None:
        if not np.isfinite(self.logprob):
            raise ValueError("logprob must be finite")


@dataclass(frozen=True)
class ScoreResult:
    """Per-position continuation scores; one entry per continuation token."""

    tokens: tuple[ScoredToken, ...]

    @property
    def total_logprob(self) -> float:
        return float(sum(token.logprob for token in self.tokens))

    @property
    def argmax_fraction(self) -> float:
        if not self.tokens:
            raise ValueError("empty score result")
        return sum(token.is_argmax for token in self.tokens) / len(self.tokens)


@dataclass(frozen=True)
class GenerationResult:
    """Exactly the requested number of greedily decoded tokens.

    detokenized_prefixes[l-1] is the text of the first l generated
    tokens, so one generation serves every analysis length at once.
    """

    prompt_token_count: int
    generated: TokenSequence
    detokenized_prefixes: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.detokenized_prefixes) != len(self.generated.token_ids):
            raise ValueError("one detokenized prefix required per generated token")


def with_boundary_space(prompt: str, continuation: str) -> str:
    """Apply the leading-space rule for scoring a target after a prompt.

    A " " separator is inserted unless the prompt already ends in
    whitespace (or is empty), keeping the target off the prompt's final
    token.
    """
    if prompt and not prompt[-1].isspace():
        return " " + continuation
    return continuation


class LanguageModel(abc.ABC):
    """Scoring / generation / embedding capability bundle."""

    @property
    @abc.abstractmethod
    def context_window(self) -> int: ...

    @property
    @abc.abstractmethod
    def can_embed(self) -> bool: ...

    @abc.abstractmethod
    def tokenize(self, text: str) -> TokenSequence: ...

    @abc.abstractmethod
    def score(self, prompt: str, continuation: str) -> ScoreResult:
        """Score each continuation token conditioned on everything before it.

        Continuation tokens are identified by tokenizing prompt and
        prompt + continuation and taking the suffix after the longest
        common token prefix (robust to merges at the boundary).
        """

    @abc.abstractmethod
    def generate(self, prompt: str, max_tokens: int) -> GenerationResult:
        """Greedy decoding of exactly max_tokens tokens; no early stop."""

    @abc.abstractmethod
    def embed(self, text: str) -> np.ndarray:
        """Deterministic unit-norm embedding (L2-normalized client-side)."""


def common_prefix_length(a: tuple[int, ...], b: tuple[int, ...]) -> int:
    length = 0
    for x, y in zip(a, b):
        if x != y:
            break
        length += 1
    return length
