"""Serve mock models over the inference wire protocol.

Exists for two jobs: loopback contract testing of the remote client, and
`edit-eval serve-mock`, which lets the whole engine run against HTTP
without a real model behind it.  model_variant names select alternative
scripts, standing in for externally edited checkpoints.
"""

from __future__ import annotations

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .base import LmCapabilityError, LmContextOverflowError
from .mock import MockLm, MockScriptError, split_pieces


class TokenizeRequest(BaseModel):
    model_variant: str | None = None
    text: str


class ScoreRequest(BaseModel):
    model_variant: str | None = None
    prompt: str
    continuation: str


class GenerateRequest(BaseModel):
    model_variant: str | None = None
    prompt: str
    max_tokens: int
    greedy: bool


class EmbedRequest(BaseModel):
    model_variant: str | None = None
    text: str


def wire_pieces(text: str) -> list[str]:
    """Concatenation-ready pieces: join(pieces[:l]) is the first-l-token text."""
    pieces = split_pieces(text)
    return [piece if i == 0 else " " + piece for i, piece in enumerate(pieces)]


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def build_app(base: MockLm, variants: dict[str, MockLm] | None = None) -> FastAPI:
    app = FastAPI(title="edit-eval mock inference endpoint")
    models = dict(variants or {})

    def resolve(variant: str | None) -> MockLm:
        if variant is None:
            return base
        try:
            return models[variant]
        except KeyError:
            raise LookupError(variant) from None

    @app.exception_handler(LookupError)
    async def unknown_variant(_, exc: LookupError):
        return _error(404, "unknown_model_variant", f"no model variant {exc.args[0]!r}")

    @app.exception_handler(LmCapabilityError)
    async def capability(_, exc: LmCapabilityError):
        return _error(400, exc.code, str(exc))

    @app.exception_handler(LmContextOverflowError)
    async def overflow(_, exc: LmContextOverflowError):
        return _error(400, exc.code, str(exc))

    @app.exception_handler(MockScriptError)
    async def script(_, exc: MockScriptError):
        return _error(500, "script_error", str(exc))

    @app.exception_handler(ValueError)
    async def invalid(_, exc: ValueError):
        return _error(400, "invalid_request", str(exc))

    @app.post("/v1/tokenize")
    async def tokenize(request: TokenizeRequest):
        model = resolve(request.model_variant)
        sequence = model.tokenize(request.text)
        return {"token_ids": list(sequence.token_ids), "pieces": wire_pieces(request.text)}

    @app.post("/v1/score")
    async def score(request: ScoreRequest):
        model = resolve(request.model_variant)
        result = model.score(request.prompt, request.continuation)
        return {
            "tokens": [
                {"id": token.token_id, "logprob": token.logprob, "is_argmax": token.is_argmax}
                for token in result.tokens
            ]
        }

    @app.post("/v1/generate")
    async def generate(request: GenerateRequest):
        if not request.greedy:
            raise ValueError("only greedy decoding is supported")
        model = resolve(request.model_variant)
        result = model.generate(request.prompt, request.max_tokens)
        return {
            "token_ids": list(result.generated.token_ids),
            "text": result.generated.text,
        }

    @app.post("/v1/embed")
    async def embed(request: EmbedRequest):
        model = resolve(request.model_variant)
        return {"vector": [float(x) for x in model.embed(request.text)]}

    return app
