import json
import threading

import pytest
from fastapi.testclient import TestClient

from hscn.events import Store
from hscn.orchestrator import PipelineEngine
from hscn.service.app import create_app

from conftest import make_pair


@pytest.fixture
def client(tmp_path):
    app = create_app(store_dir=tmp_path / "store")
    with TestClient(app) as c:
        yield c


def ingest(client, n, prefix="p"):
    pairs = [
        {"id": f"{prefix}{i}", "hs": f"hateful text {i}", "cn": f"counter text {i} {i}"}
        for i in range(n)
    ]
    resp = client.post("/candidates", json={"pairs": pairs})
    assert resp.status_code == 200, resp.text
    return resp.json()["ids"]


def score_pair_twice(client, pid, a=2, b=3):
    for annotator, value in (("a1", a), ("a2", b)):
        resp = client.post("/review/score", json={
            "pair_id": pid, "annotator_id": annotator, "score": value,
        })
        assert resp.status_code == 200, resp.text
    return resp.json()


def test_healthz(client):
    resp = client.get("/healthz")
    assert resp.status_code == 200
    assert resp.json()["status"] == "ok"


def test_ingest_and_generate(client):
    ids = ingest(client, 3)
    assert len(ids) == 3
    resp = client.post("/candidates", json={"generate": {
        "hs": ["some new hate"],
        "backend": {"kind": "stub", "stub_seed": 4},
        "params": {"n_samples": 3},
    }})
    assert resp.status_code == 200
    body = resp.json()
    assert body["report"]["succeeded"] == 1
    assert len(body["ids"]) >= 1


def test_review_flow(client):
    ingest(client, 2)
    resp = client.get("/review/next", params={"annotator": "a1"})
    pair = resp.json()["pair"]
    assert pair is not None
    result = score_pair_twice(client, pair["id"])
    assert result["tier"] == "geq2"


def test_review_next_excludes_already_scored(client):
    ids = ingest(client, 1)
    score_pair_twice(client, ids[0])
    resp = client.get("/review/next", params={"annotator": "a1"})
    assert resp.json()["pair"] is None


def test_score_idempotent_double_submit(client):
    ids = ingest(client, 1)
    payload = {
        "pair_id": ids[0], "annotator_id": "a1", "score": 2,
        "idempotency_key": "once",
    }
    first = client.post("/review/score", json=payload).json()
    second = client.post("/review/score", json=payload).json()
    assert first["duplicate"] is False
    assert second["duplicate"] is True


def test_error_codes_are_machine_readable(client):
    resp = client.post("/review/score", json={
        "pair_id": "missing", "annotator_id": "a1", "score": 2,
    })
    assert resp.status_code == 404
    assert resp.json()["error"]["code"] == "unknown_id"

    ids = ingest(client, 1)
    client.post("/review/score", json={"pair_id": ids[0], "annotator_id": "a1", "score": 2})
    resp = client.post("/review/score", json={"pair_id": ids[0], "annotator_id": "a1", "score": 3})
    assert resp.status_code == 409
    assert resp.json()["error"]["code"] == "duplicate_annotator"


def test_experiment_and_expert_flow(client):
    ids = ingest(client, 12)
    resp = client.post("/experiments", json={
        "conditions": [{"reviewer_mode": "expert_direct", "session_size": 3, "rng_seed": 1}],
        "operators": ["op1", "op2"],
    })
    assert resp.status_code == 200, resp.text
    exp = resp.json()["experiment"]
    assert len(exp["assignments"]["op1"]) == 3

    item = client.get("/expert/next", params={"operator": "op1"}).json()["item"]
    assert item["condition"] == "expert_direct"
    resp = client.post("/expert/decision", json={
        "experiment_id": exp["id"], "pair_id": item["pair"]["id"],
        "operator_id": "op1", "action": "validate", "elapsed": 12.5,
    })
    assert resp.status_code == 200
    assert resp.json()["action"] == "validate"

    item = client.get("/expert/next", params={"operator": "op1"}).json()["item"]
    original = item["pair"]["cn"]
    resp = client.post("/expert/decision", json={
        "experiment_id": exp["id"], "pair_id": item["pair"]["id"],
        "operator_id": "op1", "action": "edit",
        "edited_cn": original + " improved", "elapsed": 44.0,
    })
    assert resp.status_code == 200
    assert resp.json()["edit_rate"] > 0

    report = client.get("/reports/effort", params={
        "experiment": exp["id"], "condition": "expert_direct",
    })
    assert report.status_code == 200
    body = report.json()
    assert body["counts"]["decided"] == 2
    assert body["pairs_final"] == 100.0


def test_export_accepted_ndjson(client):
    ids = ingest(client, 6)
    resp = client.post("/experiments", json={
        "conditions": [{"reviewer_mode": "expert_direct", "session_size": 2, "rng_seed": 0}],
        "operators": ["op1"],
    })
    exp = resp.json()["experiment"]
    for item in exp["assignments"]["op1"]:
        client.post("/expert/decision", json={
            "experiment_id": exp["id"], "pair_id": item["pair_id"],
            "operator_id": "op1", "action": "validate",
        })
    resp = client.get("/export/accepted")
    assert resp.status_code == 200
    assert resp.headers["content-type"].startswith("application/x-ndjson")
    lines = [json.loads(line) for line in resp.text.strip().splitlines()]
    assert len(lines) == 2
    assert all(rec["state"] == "accepted" for rec in lines)


def test_invalid_payload_is_422(client):
    resp = client.post("/review/score", json={"pair_id": "x", "annotator_id": "a", "score": 9})
    assert resp.status_code == 422


def test_store_survives_restart(tmp_path):
    store_dir = tmp_path / "store"
    app = create_app(store_dir=store_dir)
    with TestClient(app) as c:
        ingest(c, 4)
        c.app.state.engine.store.close()
    app2 = create_app(store_dir=store_dir)
    with TestClient(app2) as c:
        assert c.get("/healthz").json()["pairs"] == 4


def test_concurrent_annotators_via_http(client):
    n = 150
    ingest(client, n)
    errors = []

    def annotate(name):
        try:
            done = 0
            while done < n:
                pair = client.get("/review/next", params={"annotator": name}).json()["pair"]
                if pair is None:
                    continue
                resp = client.post("/review/score", json={
                    "pair_id": pair["id"], "annotator_id": name, "score": done % 4,
                })
                assert resp.status_code == 200, resp.text
                done += 1
        except Exception as exc:  # pragma: no cover
            errors.append(exc)

    threads = [threading.Thread(target=annotate, args=(f"ann{i}",)) for i in range(2)]
    for t in threads:
        t.start()
    for t in threads:
        t.join(timeout=120)
    assert not errors
    engine: PipelineEngine = client.app.state.engine
    assert len(engine.state.tiers) == n
    assert all(len(v) == 2 for v in engine.state.scores.values())
