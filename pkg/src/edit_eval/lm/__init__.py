"""Model access: the LanguageModel contract, a scripted mock, and the wire client."""

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
    with_boundary_space,
)
from .mock import MockLm, MockScriptError, build_mock_lm, piece_id, split_pieces
from .remote import RemoteLm
from .server import build_app

__all__ = [
    "GenerationResult",
    "LanguageModel",
    "LmCapabilityError",
    "LmContextOverflowError",
    "LmError",
    "LmProtocolError",
    "LmTransportError",
    "MockLm",
    "MockScriptError",
    "RemoteLm",
    "ScoreResult",
    "ScoredToken",
    "TokenSequence",
    "build_app",
    "build_mock_lm",
    "piece_id",
    "split_pieces",
    "with_boundary_space",
]
