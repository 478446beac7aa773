"""Deterministic scripted mock model.

The mock uses a whitespace tokenizer (split on single spaces, join with
single spaces) so test authors can count tokens by eye.  A script maps
token-suffix patterns to next-token behavior in one of three flavors:

  {"suffix": "employment in", "text": "Paris", "logprob": -0.1}
      Forced continuation: each token of the text follows in turn at the
      given per-token logprob (default 0.0) and is the argmax.  The rule
      stays active through the whole continuation (each consumed token
      extends the matched pattern).

  {"suffix": "employment in", "options": {"Paris": -1.0, "Rome": -2.0}}
      Every option continuation is scoreable after the suffix, each of
      its tokens at the option's per-token logprob.  Lets tests pin exact
      summed sequence logprobs for competing targets.

  {"suffix": "capital of", "distribution": {"Paris": 0.9, "Rome": 0.1}}
      Explicit next-token distribution (probabilities, not logprobs).

The longest matching pattern wins; patterns of equal length merge (max
logprob per token).  Unmatched positions fall back to a uniform
distribution over the script vocabulary; tokens not covered by the
active rule score at miss_logprob (default -30.0).  Argmax ties go to
the lexicographically smallest token piece.
"""

from __future__ import annotations

import hashlib
import json
import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .base import (
    GenerationResult,
    LanguageModel,
    LmCapabilityError,
    LmContextOverflowError,
    ScoredToken,
    ScoreResult,
    TokenSequence,
    common_prefix_length,
)

DEFAULT_MISS_LOGPROB = -30.0
DEFAULT_CONTEXT_WINDOW = 2048
DEFAULT_EMBEDDING_DIM = 64


class MockScriptError(ValueError):
    """Malformed mock script document."""


def split_pieces(text: str) -> list[str]:
    """Whitespace tokenizer: split on single spaces; empty text has no tokens."""
    return text.split(" ") if text else []


def join_pieces(pieces: list[str]) -> str:
    return " ".join(pieces)


def piece_id(piece: str) -> int:
    """Stable non-negative token id derived from the piece bytes."""
    digest = hashlib.sha256(b"tok:" + piece.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") & ((1 << 63) - 1)


@dataclass(frozen=True)
class _Emission:
    """Next-token choices for one matched pattern: piece -> logprob."""

    logprobs: dict[str, float] = field(default_factory=dict)

    def merge(self, piece: str, logprob: float) -> None:
        current = self.logprobs.get(piece)
        if current is None or logprob > current:
            self.logprobs[piece] = logprob


def _validate_logprob(value, where: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise MockScriptError(f"{where}: logprob must be a number")
    if value > 0 or not math.isfinite(value):
        raise MockScriptError(f"{where}: logprob must be finite and <= 0")
    return float(value)


class MockLm(LanguageModel):
    """Fully deterministic LanguageModel driven by a script document."""

    def __init__(
        self,
        patterns: dict[tuple[str, ...], _Emission],
        vocab: tuple[str, ...],
        context_window: int,
        embedding_seed: int,
        embedding_dim: int,
        miss_logprob: float,
        embedder: bool,
    ) -> None:
        self._patterns = patterns
        self._vocab = vocab
        self._context_window = context_window
        self._embedding_seed = embedding_seed
        self._embedding_dim = embedding_dim
        self._miss_logprob = miss_logprob
        self._embedder = embedder
        self._max_pattern_len = max((len(p) for p in patterns), default=0)
        self._uniform_logprob = -math.log(len(vocab)) if vocab else miss_logprob
        self._lock = threading.Lock()
        self.call_counts: dict[str, int] = {"tokenize": 0, "score": 0, "generate": 0, "embed": 0}

    def _count(self, op: str) -> None:
        with self._lock:
            self.call_counts[op] += 1

    @property
    def context_window(self) -> int:
        return self._context_window

    @property
    def can_embed(self) -> bool:
        return self._embedder

    @property
    def embedding_dim(self) -> int:
        return self._embedding_dim

    def tokenize(self, text: str) -> TokenSequence:
        self._count("tokenize")
        pieces = split_pieces(text)
        return TokenSequence(tuple(piece_id(p) for p in pieces), text)

    def _next_logprobs(self, prefix: list[str]) -> dict[str, float]:
        """Explicit next-token logprobs after the given token prefix."""
        for length in range(min(self._max_pattern_len, len(prefix)), 0, -1):
            emission = self._patterns.get(tuple(prefix[-length:]))
            if emission is not None:
                return emission.logprobs
        empty = self._patterns.get(())
        if empty is not None:
            return empty.logprobs
        return {piece: self._uniform_logprob for piece in self._vocab}

    def _argmax_piece(self, logprobs: dict[str, float]) -> str | None:
        best_lp = self._miss_logprob if len(logprobs) < len(self._vocab) else None
        if logprobs:
            top = max(logprobs.values())
            best_lp = top if best_lp is None else max(top, best_lp)
        if best_lp is None:
            return None
        candidates = [p for p, lp in logprobs.items() if lp == best_lp]
        if best_lp == self._miss_logprob:
            candidates.extend(p for p in self._vocab if p not in logprobs)
        return min(candidates) if candidates else None

    def score(self, prompt: str, continuation: str) -> ScoreResult:
        self._count("score")
        if not continuation:
            raise ValueError("continuation must be non-empty")
        prompt_pieces = split_pieces(prompt)
        full_pieces = split_pieces(prompt + continuation)
        if len(full_pieces) > self._context_window:
            raise LmContextOverflowError(
                f"{len(full_pieces)} tokens exceed context window {self._context_window}"
            )
        prompt_ids = tuple(piece_id(p) for p in prompt_pieces)
        full_ids = tuple(piece_id(p) for p in full_pieces)
        start = common_prefix_length(prompt_ids, full_ids)
        if start == len(full_ids):
            raise ValueError("continuation contributed no tokens")
        scored = []
        for position in range(start, len(full_pieces)):
            logprobs = self._next_logprobs(full_pieces[:position])
            piece = full_pieces[position]
            logprob = logprobs.get(piece, self._miss_logprob)
            scored.append(
                ScoredToken(
                    token_id=full_ids[position],
                    logprob=logprob,
                    is_argmax=piece == self._argmax_piece(logprobs),
                )
            )
        return ScoreResult(tuple(scored))

    def generate(self, prompt: str, max_tokens: int) -> GenerationResult:
        self._count("generate")
        if max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        prompt_pieces = split_pieces(prompt)
        if len(prompt_pieces) + max_tokens > self._context_window:
            raise LmContextOverflowError(
                f"{len(prompt_pieces)} prompt tokens + {max_tokens} generated tokens "
                f"exceed context window {self._context_window}"
            )
        context = list(prompt_pieces)
        generated: list[str] = []
        prefixes: list[str] = []
        for _ in range(max_tokens):
            piece = self._argmax_piece(self._next_logprobs(context))
            if piece is None:
                raise MockScriptError("cannot generate: script vocabulary is empty")
            context.append(piece)
            generated.append(piece)
            prefixes.append(join_pieces(generated))
        sequence = TokenSequence(tuple(piece_id(p) for p in generated), join_pieces(generated))
        return GenerationResult(
            prompt_token_count=len(prompt_pieces),
            generated=sequence,
            detokenized_prefixes=tuple(prefixes),
        )

    def embed(self, text: str) -> np.ndarray:
        self._count("embed")
        if not self._embedder:
            raise LmCapabilityError("this mock has no embedder capability")
        digest = hashlib.sha256(text.encode("utf-8")).digest()
        entropy = int.from_bytes(digest[:16], "big")
        rng = np.random.default_rng([self._embedding_seed, entropy])
        vector = rng.standard_normal(self._embedding_dim)
        norm = np.linalg.norm(vector)
        return vector / norm


def build_mock_lm(script: dict | str) -> MockLm:
    """Compile a script document (dict or JSON text) into a MockLm."""
    if isinstance(script, str):
        try:
            script = json.loads(script)
        except json.JSONDecodeError as exc:
            raise MockScriptError(f"script is not valid JSON: {exc}") from exc
    if not isinstance(script, dict):
        raise MockScriptError("script must be a JSON object")

    known = {
        "context_window",
        "embedding_seed",
        "embedding_dim",
        "extra_vocab",
        "miss_logprob",
        "embedder",
        "rules",
    }
    unknown = set(script) - known
    if unknown:
        raise MockScriptError(f"unknown script keys: {sorted(unknown)}")

    context_window = script.get("context_window", DEFAULT_CONTEXT_WINDOW)
    if not isinstance(context_window, int) or context_window < 1:
        raise MockScriptError("context_window must be a positive integer")
    embedding_seed = script.get("embedding_seed", 0)
    if not isinstance(embedding_seed, int) or embedding_seed < 0:
        raise MockScriptError("embedding_seed must be a non-negative integer")
    embedding_dim = script.get("embedding_dim", DEFAULT_EMBEDDING_DIM)
    if not isinstance(embedding_dim, int) or embedding_dim < 1:
        raise MockScriptError("embedding_dim must be a positive integer")
    miss_logprob = _validate_logprob(script.get("miss_logprob", DEFAULT_MISS_LOGPROB), "miss_logprob")
    embedder = script.get("embedder", True)
    if not isinstance(embedder, bool):
        raise MockScriptError("embedder must be a boolean")

    vocab: set[str] = set()
    extra_vocab = script.get("extra_vocab", [])
    if not isinstance(extra_vocab, list) or not all(isinstance(v, str) for v in extra_vocab):
        raise MockScriptError("extra_vocab must be a list of strings")
    for entry in extra_vocab:
        vocab.update(split_pieces(entry))

    patterns: dict[tuple[str, ...], _Emission] = {}

    def emit(pattern: tuple[str, ...], piece: str, logprob: float) -> None:
        patterns.setdefault(pattern, _Emission()).merge(piece, logprob)
        vocab.add(piece)

    def stage_patterns(suffix_pieces: list[str], text: str, logprob: float, where: str) -> None:
        pieces = split_pieces(text)
        if not pieces:
            raise MockScriptError(f"{where}: continuation text must be non-empty")
        for k, piece in enumerate(pieces):
            emit(tuple(suffix_pieces + pieces[:k]), piece, logprob)

    rules = script.get("rules", [])
    if not isinstance(rules, list):
        raise MockScriptError("rules must be a list")
    for i, rule in enumerate(rules):
        where = f"rules[{i}]"
        if not isinstance(rule, dict):
            raise MockScriptError(f"{where}: rule must be an object")
        suffix = rule.get("suffix")
        if not isinstance(suffix, str):
            raise MockScriptError(f"{where}: missing 'suffix' string")
        suffix_pieces = split_pieces(suffix)
        vocab.update(suffix_pieces)
        flavors = [key for key in ("text", "options", "distribution") if key in rule]
        if len(flavors) != 1:
            raise MockScriptError(f"{where}: exactly one of text/options/distribution required")
        extras = set(rule) - {"suffix", "logprob", "text", "options", "distribution"}
        if extras:
            raise MockScriptError(f"{where}: unknown keys {sorted(extras)}")
        flavor = flavors[0]
        if flavor == "text":
            logprob = _validate_logprob(rule.get("logprob", 0.0), where)
            if not isinstance(rule["text"], str):
                raise MockScriptError(f"{where}: text must be a string")
            stage_patterns(suffix_pieces, rule["text"], logprob, where)
        elif flavor == "options":
            if "logprob" in rule:
                raise MockScriptError(f"{where}: options carry their own per-token logprobs")
            options = rule["options"]
            if not isinstance(options, dict) or not options:
                raise MockScriptError(f"{where}: options must be a non-empty object")
            for text, logprob in options.items():
                stage_patterns(
                    suffix_pieces, text, _validate_logprob(logprob, f"{where}.options[{text!r}]"), where
                )
        else:
            distribution = rule["distribution"]
            if not isinstance(distribution, dict) or not distribution:
                raise MockScriptError(f"{where}: distribution must be a non-empty object")
            for token, prob in distribution.items():
                if not isinstance(token, str) or " " in token:
                    raise MockScriptError(
                        f"{where}: distribution keys must be single tokens, got {token!r}"
                    )
                if not isinstance(prob, (int, float)) or isinstance(prob, bool) or not 0 < prob <= 1:
                    raise MockScriptError(f"{where}: probability for {token!r} must be in (0, 1]")
                emit(tuple(suffix_pieces), token, math.log(prob))

    return MockLm(
        patterns=patterns,
        vocab=tuple(sorted(vocab)),
        context_window=context_window,
        embedding_seed=embedding_seed,
        embedding_dim=embedding_dim,
        miss_logprob=miss_logprob,
        embedder=embedder,
    )
