"""Rating sessions: persistence plus the HTTP service raters work against.

A session is a fixed, ordered list of rating items under a directory;
judgments append to a JSONL log, one per (item_id, rater_id), first
write wins.  The service keeps raters blind: the next-item payload
carries only prompt, answer, expected answers, few-shot guidance, and
progress; dataset, editor, and match indices stay server-side.

Endpoints:
  GET  /rate/session/{id}/next?rater_id=R   -> next unjudged item, or 204
  POST /rate/session/{id}/judgment          {item_id, correct, rater_id}
  GET  /rate/session/{id}/export            -> judgments JSONL
"""

from __future__ import annotations

import json
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse, Response
from pydantic import BaseModel

from ..analysis import RatingItem
from ..judge import DEFAULT_FEW_SHOTS


def rating_item_to_dict(item: RatingItem) -> dict:
    return {
        "item_id": item.item_id,
        "dataset": item.dataset,
        "editor": item.editor,
        "prompt": item.prompt,
        "generated_text": item.generated_text,
        "expected": list(item.expected_answers),
        "class": item.label,
    }


def rating_item_from_dict(data: dict) -> RatingItem:
    return RatingItem(
        item_id=data["item_id"],
        dataset=data["dataset"],
        editor=data["editor"],
        prompt=data["prompt"],
        generated_text=data["generated_text"],
        expected_answers=tuple(data["expected"]),
        label=data["class"],
    )


def rating_items_to_jsonl(items: Sequence[RatingItem]) -> str:
    return "".join(
        json.dumps(rating_item_to_dict(item), ensure_ascii=False) + "\n" for item in items
    )


def rating_items_from_jsonl(payload: str) -> list[RatingItem]:
    items = []
    # "\n" only: generated text may carry unicode separators like U+2028.
    for lineno, line in enumerate(payload.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            items.append(rating_item_from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValueError(f"rating item line {lineno}: {exc}") from exc
    return items


def judgments_to_truths(payload: str) -> dict[str, bool]:
    """Collapse a judgment export into per-item ground truth.

    Majority vote across raters; exact ties drop the item (the paper
    reports a single ground truth, so disagreement has no home here).
    """
    votes: dict[str, list[bool]] = {}
    seen: set[tuple[str, str]] = set()
    for lineno, line in enumerate(payload.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
            pair = (data["item_id"], data["rater_id"])
            if pair in seen:
                continue
            seen.add(pair)
            votes.setdefault(data["item_id"], []).append(bool(data["correct"]))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValueError(f"judgment line {lineno}: {exc}") from exc
    truths = {}
    for item_id, ballots in votes.items():
        yes = sum(ballots)
        if 2 * yes != len(ballots):
            truths[item_id] = 2 * yes > len(ballots)
    return truths


class RatingSessionStore:
    """Directory-backed session storage with per-session write serialization."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def _session_dir(self, session_id: str) -> Path:
        return self.root / session_id

    def create_session(self, session_id: str, items: Sequence[RatingItem]) -> None:
        if not items:
            raise ValueError("a session needs at least one item")
        directory = self._session_dir(session_id)
        if directory.exists():
            raise FileExistsError(f"session {session_id!r} already exists")
        directory.mkdir(parents=True)
        (directory / "items.jsonl").write_text(rating_items_to_jsonl(items), "utf-8")
        (directory / "judgments.jsonl").write_text("", "utf-8")

    def session_exists(self, session_id: str) -> bool:
        return (self._session_dir(session_id) / "items.jsonl").exists()

    def items(self, session_id: str) -> list[RatingItem]:
        path = self._session_dir(session_id) / "items.jsonl"
        if not path.exists():
            raise KeyError(session_id)
        return rating_items_from_jsonl(path.read_text("utf-8"))

    def judgments(self, session_id: str) -> list[dict]:
        path = self._session_dir(session_id) / "judgments.jsonl"
        if not path.exists():
            raise KeyError(session_id)
        return [
            json.loads(line)
            for line in path.read_text("utf-8").split("\n")
            if line.strip()
        ]

    def next_item(self, session_id: str, rater_id: str) -> dict | None:
        items = self.items(session_id)
        judged = {
            j["item_id"] for j in self.judgments(session_id) if j["rater_id"] == rater_id
        }
        total = len(items)
        done = len(judged)
        for item in items:
            if item.item_id not in judged:
                return {
                    "item_id": item.item_id,
                    "prompt": item.prompt,
                    "generated_text": item.generated_text,
                    "expected_answers": list(item.expected_answers),
                    "few_shots": [
                        {
                            "query": shot.query,
                            "expected": shot.expected,
                            "answer": shot.answer,
                            "verdict": shot.verdict,
                        }
                        for shot in DEFAULT_FEW_SHOTS
                    ],
                    "progress": {"done": done, "total": total},
                }
        return None

    def record_judgment(
        self, session_id: str, item_id: str, rater_id: str, correct: bool
    ) -> dict:
        """Store a judgment; repeated (item_id, rater_id) pairs keep the first."""
        if not rater_id:
            raise ValueError("rater_id must be non-empty")
        with self._lock(session_id):
            items = {item.item_id for item in self.items(session_id)}
            if item_id not in items:
                raise LookupError(item_id)
            existing = self.judgments(session_id)
            for judgment in existing:
                if judgment["item_id"] == item_id and judgment["rater_id"] == rater_id:
                    return {**judgment, "duplicate": True}
            judgment = {
                "item_id": item_id,
                "rater_id": rater_id,
                "correct": bool(correct),
                "timestamp": datetime.now(timezone.utc).isoformat(),
            }
            path = self._session_dir(session_id) / "judgments.jsonl"
            with path.open("a", encoding="utf-8") as sink:
                sink.write(json.dumps(judgment, ensure_ascii=False) + "\n")
            return {**judgment, "duplicate": False}

    def export_jsonl(self, session_id: str) -> str:
        return "".join(
            json.dumps(judgment, ensure_ascii=False) + "\n"
            for judgment in self.judgments(session_id)
        )


class JudgmentBody(BaseModel):
    item_id: str
    correct: bool
    rater_id: str


def build_rating_app(store: RatingSessionStore) -> FastAPI:
    app = FastAPI(title="edit-eval rating service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    def not_found(what: str) -> JSONResponse:
        return JSONResponse(status_code=404, content={"code": "not_found", "message": what})

    @app.get("/rate/session/{session_id}/next")
    async def next_item(session_id: str, rater_id: str):
        try:
            payload = store.next_item(session_id, rater_id)
        except KeyError:
            return not_found(f"no session {session_id!r}")
        if payload is None:
            return Response(status_code=204)
        return payload

    @app.post("/rate/session/{session_id}/judgment")
    async def judgment(session_id: str, body: JudgmentBody):
        try:
            stored = store.record_judgment(session_id, body.item_id, body.rater_id, body.correct)
        except KeyError:
            return not_found(f"no session {session_id!r}")
        except LookupError:
            return not_found(f"no item {body.item_id!r} in session {session_id!r}")
        except ValueError as exc:
            return JSONResponse(
                status_code=400, content={"code": "invalid_request", "message": str(exc)}
            )
        done = len({
            j["item_id"]
            for j in store.judgments(session_id)
            if j["rater_id"] == body.rater_id
        })
        return {
            "status": "duplicate" if stored["duplicate"] else "recorded",
            "progress": {"done": done, "total": len(store.items(session_id))},
        }

    @app.get("/rate/session/{session_id}/export")
    async def export(session_id: str):
        try:
            payload = store.export_jsonl(session_id)
        except KeyError:
            return not_found(f"no session {session_id!r}")
        return PlainTextResponse(payload, media_type="application/x-ndjson")

    return app
