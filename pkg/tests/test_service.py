import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from auginspect.guidance import GuidanceCache, GuidanceUnavailable, StubProvider
from auginspect.metrics import QualityScores
from auginspect.service import ApiError, create_app, parse_filter
from auginspect.session import FilterSpec, MarkState

from conftest import build_figure_session

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def session_with_scores():
    session = build_figure_session()
    scores = {}
    for index, inst in enumerate(session.dataset.instances):
        scores[inst.id] = QualityScores(
            fluency=(index % 11) / 10,
            grammaticality=(index % 5) / 4,
            alignment=(index % 3) / 2,
        )
    session.scores = scores
    return session


@pytest.fixture
def client(session_with_scores, tmp_path):
    stub = StubProvider.from_file(DATA_DIR / "stub_rules.txt")
    app = create_app(
        session_with_scores,
        provider=stub,
        guidance_cache=GuidanceCache(tmp_path / "cache"),
    )
    return TestClient(app)


def test_dataset_default_page(client):
    response = client.get("/api/dataset")
    assert response.status_code == 200
    body = response.json()
    assert body["total"] == 122  # 61 originals + 61 generated
    assert len(body["rows"]) == 50
    ids = [row["id"] for row in body["rows"]]
    assert ids == sorted(ids)
    row = body["rows"][0]
    assert {"id", "text", "label", "origin", "mark", "scores", "verdict", "highlights"} <= set(row)


def test_dataset_sort_by_metric(client, session_with_scores):
    response = client.get("/api/dataset", params={"sort": "grammaticality", "dir": "asc"})
    rows = response.json()["rows"]
    values = [row["scores"]["grammaticality"] for row in rows]
    assert values == sorted(values)
    assert values[0] == min(
        s.grammaticality for s in session_with_scores.scores.values()
    )

    response = client.get("/api/dataset", params={"sort": "fluency", "dir": "desc"})
    rows = response.json()["rows"]
    values = [row["scores"]["fluency"] for row in rows]
    assert values == sorted(values, reverse=True)


def test_dataset_filter_by_transform(client):
    response = client.get("/api/dataset", params={"filter": "transform:RandomCharSubst"})
    body = response.json()
    assert body["total"] == 37
    assert all("RandomCharSubst" in row["transforms"] for row in body["rows"])


def test_dataset_filter_metric_range(client, session_with_scores):
    response = client.get("/api/dataset", params={"filter": "fluency>=0.5", "page_size": 200})
    body = response.json()
    expected = sum(1 for s in session_with_scores.scores.values() if s.fluency >= 0.5)
    assert body["total"] == expected
    assert all(row["scores"]["fluency"] >= 0.5 for row in body["rows"])


def test_dataset_page_beyond_end(client):
    first = client.get("/api/dataset").json()
    response = client.get("/api/dataset", params={"page": 99}).json()
    assert response["rows"] == []
    assert response["total"] == first["total"]


def test_bad_filter_expression(client):
    response = client.get("/api/dataset", params={"filter": "transform:NoSuchThing"})
    assert response.status_code == 400
    body = response.json()
    assert body["error"]["code"] == "bad_request"
    assert "NoSuchThing" in body["error"]["message"]

    assert client.get("/api/dataset", params={"filter": "gibberish"}).status_code == 400
    assert client.get("/api/dataset", params={"sort": "age"}).status_code == 400
    assert client.get("/api/dataset", params={"page": 0}).status_code == 400


def test_selection_groups(client, session_with_scores):
    members = session_with_scores.members_of(
        __import__("auginspect.session", fromlist=["GroupKey"]).GroupKey("transform", "RandomCharSubst")
    )
    response = client.post("/api/selection/groups", json={"ids": members[:5], "kind": "transform"})
    assert response.status_code == 200
    groups = response.json()["groups"]
    assert len(groups) == 1
    assert groups[0]["key"] == "transform:RandomCharSubst"
    assert groups[0]["member_count"] == 37
    assert len(groups[0]["examples"]) == 3

    feature = client.post(
        "/api/selection/groups", json={"ids": [members[0]], "kind": "feature"}
    ).json()["groups"]
    assert feature == []


def test_selection_groups_feature_display(client, session_with_scores):
    from auginspect.session import GroupKey

    loc_members = session_with_scores.members_of(GroupKey("feature", "amr:location"))
    response = client.post(
        "/api/selection/groups", json={"ids": loc_members[:2], "kind": "feature"}
    )
    groups = response.json()["groups"]
    assert groups[0]["display"] == "Has a description of a location"
    assert groups[0]["member_count"] == 24


def test_selection_groups_unknown_id(client):
    response = client.post("/api/selection/groups", json={"ids": ["zzz"], "kind": "transform"})
    assert response.status_code == 404
    assert response.json()["error"]["code"] == "not_found"


def test_selection_groups_bad_kind(client):
    response = client.post("/api/selection/groups", json={"ids": [], "kind": "color"})
    assert response.status_code == 400


def test_mark_and_stats(client, session_with_scores):
    member = session_with_scores.dataset.generated()[0].id
    response = client.post("/api/marks", json={"id": member, "state": "high_quality"})
    assert response.status_code == 200
    assert response.json()["stats"]["inspected"] == 1
    assert client.get("/api/stats").json()["high_quality"] == 1


def test_mark_unknown_id(client):
    response = client.post("/api/marks", json={"id": "zzz", "state": "high_quality"})
    assert response.status_code == 404
    assert response.json()["error"]["code"] == "not_found"


def test_mark_bad_state(client, session_with_scores):
    member = session_with_scores.dataset.generated()[0].id
    response = client.post("/api/marks", json={"id": member, "state": "amazing"})
    assert response.status_code == 400


def test_batch_mark_and_undo(client):
    body = {"key": {"kind": "transform", "value": "RandomCharSubst"}, "state": "high_quality",
            "scope": "all_members"}
    response = client.post("/api/marks/batch", json=body)
    assert response.status_code == 200
    assert response.json()["count"] == 37
    assert client.get("/api/stats").json()["high_quality"] == 37

    undo = client.post("/api/undo")
    assert undo.status_code == 200
    assert client.get("/api/stats").json()["high_quality"] == 0

    nothing = client.post("/api/undo")
    assert nothing.status_code == 400


def test_batch_mark_empty_group(client):
    body = {"key": {"kind": "transform", "value": "AddNeutralEmoji"}, "state": "high_quality"}
    response = client.post("/api/marks/batch", json=body)
    assert response.status_code == 400
    assert "empty group" in response.json()["error"]["message"]


def test_idempotent_retry_mark(client, session_with_scores):
    member = session_with_scores.dataset.generated()[0].id
    headers = {"X-Request-Id": "req-1"}
    first = client.post("/api/marks", json={"id": member, "state": "high_quality"}, headers=headers)
    stats_after = client.get("/api/stats").json()
    second = client.post("/api/marks", json={"id": member, "state": "high_quality"}, headers=headers)
    assert first.json() == second.json()
    assert client.get("/api/stats").json() == stats_after
    # only one mark event was recorded
    mark_events = [e for e in session_with_scores.events if e["type"] == "mark"]
    assert len(mark_events) == 1


def test_idempotent_retry_batch(client, session_with_scores):
    headers = {"X-Request-Id": "req-batch"}
    body = {"key": {"kind": "feature", "value": "amr:location"}, "state": "low_quality"}
    first = client.post("/api/marks/batch", json=body, headers=headers)
    second = client.post("/api/marks/batch", json=body, headers=headers)
    assert first.json() == second.json()
    batch_events = [e for e in session_with_scores.events if e["type"] == "batch_mark"]
    assert len(batch_events) == 1


def test_idempotent_retry_undo(client, session_with_scores):
    member = session_with_scores.dataset.generated()[0].id
    client.post("/api/marks", json={"id": member, "state": "high_quality"})
    client.post("/api/marks", json={"id": member, "state": "low_quality"})
    headers = {"X-Request-Id": "req-undo"}
    first = client.post("/api/undo", headers=headers)
    second = client.post("/api/undo", headers=headers)
    assert first.json() == second.json()
    # only one undo was applied: the mark is back to its first state, not gone
    assert session_with_scores.marks[member].state.value == "high_quality"


def test_guidance_endpoint(client, session_with_scores):
    ids = [i.id for i in session_with_scores.dataset.generated()[:4]]
    response = client.post("/api/guidance", json={"ids": ids})
    assert response.status_code == 200
    verdicts = response.json()["verdicts"]
    assert [v["id"] for v in verdicts] == ids
    assert all("predicted_label" in v for v in verdicts)
    # verdicts become visible in the table rows
    rows = client.get(
        "/api/dataset", params={"filter": "origin:generated", "page_size": 200}
    ).json()["rows"]
    by_id = {row["id"]: row for row in rows}
    assert all(by_id[i]["verdict"] is not None for i in ids)


def test_guidance_unknown_id(client):
    response = client.post("/api/guidance", json={"ids": ["zzz"]})
    assert response.status_code == 404


def test_guidance_provider_down(session_with_scores):
    class Down:
        name = "down"

        def complete(self, prompt):
            raise GuidanceUnavailable("nope")

    app = create_app(session_with_scores, provider=Down())
    client = TestClient(app)
    ids = [i.id for i in session_with_scores.dataset.generated()[:3]]
    response = client.post("/api/guidance", json={"ids": ids})
    assert response.status_code == 200  # HTTP 200 envelope with per-id errors
    verdicts = response.json()["verdicts"]
    assert all(v["error"]["code"] == "upstream_unavailable" for v in verdicts)
    # marking still works with guidance down
    assert client.post("/api/marks", json={"id": ids[0], "state": "high_quality"}).status_code == 200


def test_guidance_disabled(session_with_scores):
    app = create_app(session_with_scores, provider=None)
    client = TestClient(app)
    response = client.post("/api/guidance", json={"ids": [session_with_scores.dataset.generated()[0].id]})
    assert response.status_code == 200
    assert response.json()["verdicts"][0]["error"]["code"] == "upstream_unavailable"


def test_export_matches_session_bytes(client, session_with_scores):
    member = session_with_scores.dataset.generated()[0].id
    client.post("/api/marks", json={"id": member, "state": "high_quality"})
    response = client.get("/api/export")
    assert response.status_code == 200
    assert response.content == session_with_scores.export_bytes()
    rows = [json.loads(line) for line in response.content.decode().splitlines()]
    assert [row["id"] for row in rows] == [member]


def test_stats_zero_and_monotone(client, session_with_scores):
    stats = client.get("/api/stats").json()
    assert stats["inspected"] == 0
    assert stats["high_quality"] == 0
    seen = 0
    for inst in session_with_scores.dataset.generated()[:5]:
        client.post("/api/marks", json={"id": inst.id, "state": "high_quality"})
        now = client.get("/api/stats").json()["inspected"]
        assert now >= seen
        seen = now
    assert seen == 5


def test_meta_endpoint(client):
    meta = client.get("/api/meta").json()
    assert meta["label_set"] == ["negative", "positive"]
    assert len(meta["transforms"]) == 20
    assert meta["features"]["amr:location"] == "Has a description of a location"


def test_writer_conflict(tmp_path, session_with_scores):
    from auginspect.store import SessionStore

    store = SessionStore(tmp_path)
    store.init_dir()
    store.acquire_writer()
    app = create_app(session_with_scores, store=store)
    client = TestClient(app)
    member = session_with_scores.dataset.generated()[0].id
    assert client.post("/api/marks", json={"id": member, "state": "high_quality"}).status_code == 200

    # another writer stomps the lock: mutations now conflict, reads still work
    store.lock_path.write_text('{"pid": 1, "token": "stolen"}', "utf-8")
    response = client.post("/api/marks", json={"id": member, "state": "low_quality"})
    assert response.status_code == 409
    assert response.json()["error"]["code"] == "conflict"
    assert client.get("/api/dataset").status_code == 200


def test_parse_filter_round_trip():
    spec = parse_filter("transform:WordDeletion,consistency:false,fluency>=0.25", "alignment", "desc")
    assert spec.transform == "WordDeletion"
    assert spec.consistency is False
    assert spec.metric_ranges == (("fluency", 0.25, float("inf")),)
    assert spec.sort_by == "alignment"
    assert spec.descending is True
    with pytest.raises(ApiError):
        parse_filter("mark:splendid")
