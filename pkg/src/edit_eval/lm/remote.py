"""HTTP client for the inference wire protocol.

Wire endpoints (JSON bodies, all fields required unless marked optional):

  POST /v1/tokenize  {model_variant?, text}                       -> {token_ids[], pieces[]}
  POST /v1/score     {model_variant?, prompt, continuation}       -> {tokens[{id, logprob, is_argmax}]}
  POST /v1/generate  {model_variant?, prompt, max_tokens, greedy} -> {token_ids[], text}
  POST /v1/embed     {model_variant?, text}                       -> {vector[]}

model_variant selects an externally edited model; absence selects the
base model.  Errors come back as an HTTP status plus {code, message}.
pieces are concatenation-ready: joining pieces[:l] yields the exact text
of the first l tokens, which is how generation prefixes are rebuilt
client-side.
"""

from __future__ import annotations

import numpy as np

import httpx

from .base import (
    GenerationResult,
    LanguageModel,
    LmCapabilityError,
    LmContextOverflowError,
    LmError,
    LmProtocolError,
    LmTransportError,
    ScoredToken,
    ScoreResult,
    TokenSequence,
)

_ERRORS_BY_CODE: dict[str, type[LmError]] = {
    LmCapabilityError.code: LmCapabilityError,
    LmContextOverflowError.code: LmContextOverflowError,
    LmTransportError.code: LmTransportError,
}


class RemoteLm(LanguageModel):
    """LanguageModel backed by a remote inference endpoint.

    The wire protocol does not advertise capabilities, so the context
    window and embedder flag are configuration, not discovery.
    """

    def __init__(
        self,
        base_url: str,
        *,
        model_variant: str | None = None,
        context_window: int = 2048,
        embedder: bool = True,
        timeout: float = 30.0,
        max_connections: int = 8,
        client: httpx.Client | None = None,
    ) -> None:
        self._base_url = base_url.rstrip("/")
        self._model_variant = model_variant
        self._context_window = context_window
        self._embedder = embedder
        self._client = client or httpx.Client(
            timeout=timeout,
            limits=httpx.Limits(max_connections=max_connections),
        )

    def with_variant(self, model_variant: str) -> "RemoteLm":
        """A handle to the same endpoint bound to an edited model variant."""
        if not model_variant:
            raise ValueError("model_variant must be non-empty")
        return RemoteLm(
            self._base_url,
            model_variant=model_variant,
            context_window=self._context_window,
            embedder=self._embedder,
            client=self._client,
        )

    @property
    def context_window(self) -> int:
        return self._context_window

    @property
    def can_embed(self) -> bool:
        return self._embedder

    @property
    def model_variant(self) -> str | None:
        return self._model_variant

    def _post(self, path: str, payload: dict) -> dict:
        if self._model_variant is not None:
            payload = {"model_variant": self._model_variant, **payload}
        try:
            response = self._client.post(self._base_url + path, json=payload)
        except httpx.HTTPError as exc:
            raise LmTransportError(f"POST {path}: {exc}") from exc
        if response.status_code >= 500:
            raise LmTransportError(f"POST {path}: server error {response.status_code}")
        if response.status_code >= 400:
            try:
                body = response.json()
                code, message = body["code"], body["message"]
            except Exception:
                raise LmProtocolError(
                    f"POST {path}: status {response.status_code} without error body"
                ) from None
            raise _ERRORS_BY_CODE.get(code, LmProtocolError)(f"POST {path}: {message}")
        try:
            return response.json()
        except Exception as exc:
            raise LmProtocolError(f"POST {path}: non-JSON reply") from exc

    def tokenize(self, text: str) -> TokenSequence:
        body = self._post("/v1/tokenize", {"text": text})
        token_ids, pieces = body.get("token_ids"), body.get("pieces")
        if not isinstance(token_ids, list) or not isinstance(pieces, list):
            raise LmProtocolError("tokenize reply missing token_ids/pieces")
        if len(token_ids) != len(pieces):
            raise LmProtocolError("tokenize reply has mismatched token_ids and pieces")
        return TokenSequence(tuple(int(t) for t in token_ids), text)

    def score(self, prompt: str, continuation: str) -> ScoreResult:
        if not continuation:
            raise ValueError("continuation must be non-empty")
        body = self._post("/v1/score", {"prompt": prompt, "continuation": continuation})
        tokens = body.get("tokens")
        if not isinstance(tokens, list):
            raise LmProtocolError("score reply missing tokens")
        try:
            scored = tuple(
                ScoredToken(
                    token_id=int(entry["id"]),
                    logprob=float(entry["logprob"]),
                    is_argmax=bool(entry["is_argmax"]),
                )
                for entry in tokens
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise LmProtocolError(f"malformed score entry: {exc}") from exc
        return ScoreResult(scored)

    def generate(self, prompt: str, max_tokens: int) -> GenerationResult:
        if max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        prompt_tokens = self.tokenize(prompt)
        body = self._post(
            "/v1/generate",
            {"prompt": prompt, "max_tokens": max_tokens, "greedy": True},
        )
        token_ids, text = body.get("token_ids"), body.get("text")
        if not isinstance(token_ids, list) or not isinstance(text, str):
            raise LmProtocolError("generate reply missing token_ids/text")
        pieces_body = self._post("/v1/tokenize", {"text": text})
        pieces = pieces_body.get("pieces")
        if not isinstance(pieces, list) or len(pieces) != len(token_ids):
            raise LmProtocolError(
                "generated text does not retokenize to the generated token count"
            )
        prefixes = []
        acc = ""
        for piece in pieces:
            acc += piece
            prefixes.append(acc)
        return GenerationResult(
            prompt_token_count=len(prompt_tokens),
            generated=TokenSequence(tuple(int(t) for t in token_ids), text),
            detokenized_prefixes=tuple(prefixes),
        )

    def embed(self, text: str) -> np.ndarray:
        if not self._embedder:
            raise LmCapabilityError("handle configured without embedder capability")
        body = self._post("/v1/embed", {"text": text})
        vector = body.get("vector")
        if not isinstance(vector, list) or not vector:
            raise LmProtocolError("embed reply missing vector")
        array = np.asarray(vector, dtype=float)
        norm = np.linalg.norm(array)
        if norm == 0:
            raise LmProtocolError("embed reply is the zero vector")
        return array / norm
