"""Rating sessions: store semantics, majority truths, and the HTTP service."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor

import pytest
from fastapi.testclient import TestClient

from edit_eval.analysis import RatingItem
from edit_eval.harness.rating import (
    RatingSessionStore,
    build_rating_app,
    judgments_to_truths,
    rating_items_from_jsonl,
    rating_items_to_jsonl,
)
from edit_eval.judge import DEFAULT_FEW_SHOTS


def _item(i: int, editor: str = "no_edit", label: str = "late") -> RatingItem:
    return RatingItem(
        item_id=f"zsre-{i:06d}:{editor}",
        dataset="zsre",
        editor=editor,
        prompt=f"probe {i}",
        generated_text=f"gen {i} body",
        expected_answers=(f"ans{i}", f"alias{i}"),
        label=label,
    )


def _judgment_line(item_id: str, rater_id: str, correct: bool) -> str:
    return json.dumps({"item_id": item_id, "rater_id": rater_id, "correct": correct}) + "\n"


def test_rating_items_round_trip():
    items = [
        _item(0),
        _item(1, editor="in_context", label="early"),
        RatingItem(
            item_id="zsre-000002:no_edit",
            dataset="zsre",
            editor="no_edit",
            prompt="line separated prompt",
            generated_text="gen with  separator",
            expected_answers=("a",),
            label="late",
        ),
    ]
    assert rating_items_from_jsonl(rating_items_to_jsonl(items)) == items


def test_rating_items_bad_line_is_named():
    payload = rating_items_to_jsonl([_item(0)]) + "{oops\n"
    with pytest.raises(ValueError, match="line 2"):
        rating_items_from_jsonl(payload)


def test_judgments_to_truths_majority_vote():
    payload = (
        _judgment_line("a", "r1", True)
        + _judgment_line("a", "r2", True)
        + _judgment_line("a", "r3", False)
        + _judgment_line("a", "r1", False)  # repeat pair: first vote stands
        + _judgment_line("b", "r1", False)
        + _judgment_line("b", "r2", False)
        + _judgment_line("b", "r3", True)
        + _judgment_line("c", "r1", True)  # exact tie: dropped
        + _judgment_line("c", "r2", False)
        + _judgment_line("d", "r1", True)
    )
    assert judgments_to_truths(payload) == {"a": True, "b": False, "d": True}


def test_judgments_to_truths_names_corrupt_line():
    payload = _judgment_line("a", "r1", True) + "{oops\n"
    with pytest.raises(ValueError, match="judgment line 2"):
        judgments_to_truths(payload)


def test_store_create_and_read(tmp_path):
    store = RatingSessionStore(tmp_path)
    items = [_item(i) for i in range(3)]
    store.create_session("sess-1", items)
    assert store.session_exists("sess-1")
    assert store.items("sess-1") == items
    assert store.judgments("sess-1") == []
    with pytest.raises(FileExistsError):
        store.create_session("sess-1", items)
    with pytest.raises(ValueError):
        store.create_session("sess-2", [])
    with pytest.raises(KeyError):
        store.items("missing")
    with pytest.raises(KeyError):
        store.judgments("missing")


def test_next_item_is_cursor_stable_and_blind(tmp_path):
    store = RatingSessionStore(tmp_path)
    items = [_item(i) for i in range(3)]
    store.create_session("sess-1", items)

    payload = store.next_item("sess-1", "r1")
    assert payload["item_id"] == items[0].item_id
    assert payload["progress"] == {"done": 0, "total": 3}
    # Raters stay blind: no dataset, editor, or class label in the payload.
    assert set(payload) == {
        "item_id",
        "prompt",
        "generated_text",
        "expected_answers",
        "few_shots",
        "progress",
    }
    assert payload["expected_answers"] == ["ans0", "alias0"]
    assert len(payload["few_shots"]) == len(DEFAULT_FEW_SHOTS)
    assert payload["few_shots"][0] == {
        "query": DEFAULT_FEW_SHOTS[0].query,
        "expected": DEFAULT_FEW_SHOTS[0].expected,
        "answer": DEFAULT_FEW_SHOTS[0].answer,
        "verdict": DEFAULT_FEW_SHOTS[0].verdict,
    }

    store.record_judgment("sess-1", items[0].item_id, "r1", True)
    advanced = store.next_item("sess-1", "r1")
    assert advanced["item_id"] == items[1].item_id
    assert advanced["progress"] == {"done": 1, "total": 3}
    # Progress is per rater; a fresh rater starts at the front.
    assert store.next_item("sess-1", "r2")["item_id"] == items[0].item_id

    for item in items[1:]:
        store.record_judgment("sess-1", item.item_id, "r1", False)
    assert store.next_item("sess-1", "r1") is None


def test_record_judgment_first_write_wins(tmp_path):
    store = RatingSessionStore(tmp_path)
    items = [_item(0)]
    store.create_session("sess-1", items)
    first = store.record_judgment("sess-1", items[0].item_id, "r1", True)
    assert first["duplicate"] is False
    second = store.record_judgment("sess-1", items[0].item_id, "r1", False)
    assert second["duplicate"] is True
    assert second["correct"] is True  # the original vote stands
    assert len(store.judgments("sess-1")) == 1
    with pytest.raises(LookupError):
        store.record_judgment("sess-1", "no-such-item", "r1", True)
    with pytest.raises(ValueError):
        store.record_judgment("sess-1", items[0].item_id, "", True)


def test_record_judgment_serializes_concurrent_writes(tmp_path):
    store = RatingSessionStore(tmp_path)
    items = [_item(0)]
    store.create_session("sess-1", items)
    with ThreadPoolExecutor(max_workers=8) as pool:
        futures = [
            pool.submit(store.record_judgment, "sess-1", items[0].item_id, f"r{k % 2}", True)
            for k in range(16)
        ]
        results = [f.result() for f in futures]
    judgments = store.judgments("sess-1")
    assert len(judgments) == 2  # one per rater, duplicates collapsed
    assert sum(1 for r in results if not r["duplicate"]) == 2


@pytest.fixture()
def rating_client(tmp_path):
    store = RatingSessionStore(tmp_path)
    items = [_item(i) for i in range(3)]
    store.create_session("sess-1", items)
    return TestClient(build_rating_app(store)), items


def test_http_rating_flow(rating_client):
    client, items = rating_client
    response = client.get("/rate/session/sess-1/next", params={"rater_id": "r1"})
    assert response.status_code == 200
    assert response.json()["item_id"] == items[0].item_id

    response = client.post(
        "/rate/session/sess-1/judgment",
        json={"item_id": items[0].item_id, "correct": True, "rater_id": "r1"},
    )
    assert response.status_code == 200
    assert response.json() == {"status": "recorded", "progress": {"done": 1, "total": 3}}

    # Idempotent resubmission (e.g. a retried request) reports duplicate.
    response = client.post(
        "/rate/session/sess-1/judgment",
        json={"item_id": items[0].item_id, "correct": False, "rater_id": "r1"},
    )
    assert response.json() == {"status": "duplicate", "progress": {"done": 1, "total": 3}}

    for item in items[1:]:
        client.post(
            "/rate/session/sess-1/judgment",
            json={"item_id": item.item_id, "correct": False, "rater_id": "r1"},
        )
    response = client.get("/rate/session/sess-1/next", params={"rater_id": "r1"})
    assert response.status_code == 204


def test_http_error_paths(rating_client):
    client, items = rating_client
    response = client.get("/rate/session/ghost/next", params={"rater_id": "r1"})
    assert response.status_code == 404
    assert response.json()["code"] == "not_found"
    assert client.get("/rate/session/sess-1/next").status_code == 422

    body = {"item_id": "no-such-item", "correct": True, "rater_id": "r1"}
    assert client.post("/rate/session/sess-1/judgment", json=body).status_code == 404
    body = {"item_id": items[0].item_id, "correct": True, "rater_id": "r1"}
    assert client.post("/rate/session/ghost/judgment", json=body).status_code == 404
    body = {"item_id": items[0].item_id, "correct": True, "rater_id": ""}
    response = client.post("/rate/session/sess-1/judgment", json=body)
    assert response.status_code == 400
    assert response.json()["code"] == "invalid_request"
    assert (
        client.post("/rate/session/sess-1/judgment", json={"item_id": "x"}).status_code == 422
    )
    assert client.get("/rate/session/ghost/export").status_code == 404


def test_http_export_feeds_truths(rating_client):
    client, items = rating_client
    votes = {"r1": [True, True, False], "r2": [True, False, False]}
    for rater_id, ballots in votes.items():
        for item, correct in zip(items, ballots):
            client.post(
                "/rate/session/sess-1/judgment",
                json={"item_id": item.item_id, "correct": correct, "rater_id": rater_id},
            )
    response = client.get("/rate/session/sess-1/export")
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("application/x-ndjson")
    truths = judgments_to_truths(response.text)
    # Item 1 splits 1-1 and is dropped; the others have clean majorities.
    assert truths == {items[0].item_id: True, items[2].item_id: False}


def test_http_allows_cross_origin_raters(rating_client):
    client, _ = rating_client
    response = client.get(
        "/rate/session/sess-1/next",
        params={"rater_id": "r1"},
        headers={"Origin": "http://localhost:5173"},
    )
    assert response.headers.get("access-control-allow-origin") == "*"
