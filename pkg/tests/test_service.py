import pytest
from fastapi.testclient import TestClient

from minpair.service import create_app
from minpair.validation import RecordStore, Status, ValidationRecord

SECRET = "test-secret"


def _record(i, status=Status.NEEDS_REVIEW):
    return ValidationRecord(
        id=f"r:{i}",
        error_type="polarity_affix_del",
        source="The probes unexpectedly become faster or slower.",
        human_correct="Die Sonden werden unerwartet schneller oder langsamer.",
        human_contrastive="Die Sonden werden erwartet schneller oder langsamer.",
        machine_reference="Die Sonden werden erwartet schneller.",
        engine_name="deepl",
        status=status,
    )


@pytest.fixture
def store(tmp_path):
    records = [_record(i) for i in range(3)] + [_record(3, Status.AUTO_ACCEPT)]
    return RecordStore.create(tmp_path / "store", records)


@pytest.fixture
def client(store):
    return TestClient(create_app(store, SECRET))


def _decision(client, rid, decision="accept", version=0, **extra):
    body = {"id": rid, "decision": decision, "expected_version": version,
            "reviewer": "alice", **extra}
    return client.post("/api/decisions", json=body,
                       headers={"X-Review-Secret": SECRET})


class TestQueue:
    def test_only_pending_items(self, client):
        items = client.get("/api/queue").json()["items"]
        assert [i["id"] for i in items] == ["r:0", "r:1", "r:2"]

    def test_pagination(self, client):
        page1 = client.get("/api/queue", params={"limit": 2}).json()
        assert [i["id"] for i in page1["items"]] == ["r:0", "r:1"]
        assert page1["next_cursor"] == "r:1"
        page2 = client.get("/api/queue",
                           params={"limit": 2, "cursor": page1["next_cursor"]}).json()
        assert [i["id"] for i in page2["items"]] == ["r:2"]
        assert page2["next_cursor"] is None

    def test_item_shape(self, client):
        item = client.get("/api/queue").json()["items"][0]
        assert item["version"] == 0
        assert item["machine_reference"] == "Die Sonden werden erwartet schneller."
        assert isinstance(item["machine_highlight"], list)

    def test_decided_item_leaves_queue(self, client):
        _decision(client, "r:0")
        items = client.get("/api/queue").json()["items"]
        assert [i["id"] for i in items] == ["r:1", "r:2"]


class TestStats:
    def test_counts(self, client):
        stats = client.get("/api/stats").json()
        assert stats["pending"] == 3
        assert stats["total"] == 4
        assert stats["by_status"] == {"NEEDS_REVIEW": 3, "AUTO_ACCEPT": 1}
        assert stats["by_error_type"]["polarity_affix_del"]["NEEDS_REVIEW"] == 3

    def test_updates_after_decision(self, client):
        _decision(client, "r:0")
        stats = client.get("/api/stats").json()
        assert stats["pending"] == 2
        assert stats["by_status"]["REVIEWED_ACCEPT"] == 1


class TestDecisions:
    def test_accept(self, client):
        reply = _decision(client, "r:0")
        assert reply.status_code == 200
        assert reply.json() == {"id": "r:0", "status": "REVIEWED_ACCEPT", "version": 1}

    def test_mark_contrastive(self, client):
        reply = _decision(client, "r:0", "mark_contrastive",
                          manually_derived_correct="Die Sonden werden unerwartet schneller.")
        assert reply.status_code == 200
        assert reply.json()["status"] == "REVIEWED_CONTRASTIVE"

    def test_missing_secret(self, client):
        body = {"id": "r:0", "decision": "accept", "expected_version": 0,
                "reviewer": "alice"}
        assert client.post("/api/decisions", json=body).status_code == 401

    def test_wrong_secret(self, client):
        body = {"id": "r:0", "decision": "accept", "expected_version": 0,
                "reviewer": "alice"}
        reply = client.post("/api/decisions", json=body,
                            headers={"X-Review-Secret": "nope"})
        assert reply.status_code == 401

    def test_unknown_id(self, client):
        assert _decision(client, "r:99").status_code == 404

    def test_unknown_decision(self, client):
        assert _decision(client, "r:0", "promote").status_code == 422

    def test_illegal_transition(self, client):
        # AUTO_ACCEPT is terminal
        assert _decision(client, "r:3", "drop").status_code == 422

    def test_version_conflict_reports_current_state(self, client):
        _decision(client, "r:0")
        reply = _decision(client, "r:0", "drop", version=0)
        assert reply.status_code == 409
        body = reply.json()
        assert body["current_version"] == 1
        assert body["current_status"] == "REVIEWED_ACCEPT"

    def test_retry_with_same_body_is_idempotent(self, client):
        first = _decision(client, "r:0")
        again = _decision(client, "r:0")
        assert again.status_code == 200
        assert again.json() == first.json()


def test_decisions_survive_restart(tmp_path):
    store = RecordStore.create(tmp_path / "store", [_record(0), _record(1)])
    client = TestClient(create_app(store, SECRET))
    _decision(client, "r:0", "mark_contrastive",
              manually_derived_correct="Die Sonden werden unerwartet schneller.")
    _decision(client, "r:1", "drop")

    reopened = RecordStore.open(tmp_path / "store")
    client2 = TestClient(create_app(reopened, SECRET))
    stats = client2.get("/api/stats").json()
    assert stats["pending"] == 0
    assert stats["by_status"] == {"REVIEWED_CONTRASTIVE": 1, "REVIEWED_DROP": 1}
    assert reopened.get("r:0").manually_derived_correct == \
        "Die Sonden werden unerwartet schneller."
