import numpy as np
import pytest
from fastapi.testclient import TestClient

from perfsentry.api import create_app
from perfsentry.model import SeriesKey, TicketRecord, TicketSelectors
from perfsentry.pipeline import PipelineConfig, recompute_all
from perfsentry.store import Store
from perfsentry.triage import TriageFilter, grouped_change_points

from conftest import make_bundle, make_key, seeded_store

CONFIG = PipelineConfig(seed=99)


def three_series_store(rng) -> Store:
    """Three series stepping at the same revision (index 30), one flat."""
    def step(hi, lo):
        return np.concatenate([rng.normal(hi, 0.1, 30), rng.normal(lo, 0.1, 30)])

    store = seeded_store(
        {
            "insert": step(10.0, 5.0),
            "update": step(20.0, 8.0),
            "scan": step(30.0, 29.0),
            "flat": np.full(60, 4.0),
        }
    )
    recompute_all(store, "sys-perf", CONFIG)
    return store


@pytest.fixture
def env(rng):
    store = three_series_store(rng)
    client = TestClient(create_app(store, CONFIG))
    return client, store


def unprocessed(client, **params):
    response = client.get("/api/v1/change-points", params={"status": "unprocessed", **params})
    assert response.status_code == 200
    return response.json()


def processed(client, **params):
    response = client.get("/api/v1/change-points", params={"status": "processed", **params})
    assert response.status_code == 200
    return response.json()


def test_health(env):
    client, _ = env
    assert client.get("/api/v1/health").json() == {"status": "ok"}


def test_points_grouped_by_revision(env):
    client, _ = env
    body = unprocessed(client)
    assert len(body["groups"]) == 1
    group = body["groups"][0]
    assert group["revision"] == "rev0030"
    assert group["summary"]["total"] == 3
    tests = {p["series"]["test"] for p in group["points"]}
    assert tests == {"insert", "update", "scan"}
    # hazard sort: largest |hazard| first
    hazards = [abs(p["hazard"]) for p in group["points"]]
    assert hazards == sorted(hazards, reverse=True)


def test_acknowledge_partial_group(env):
    client, _ = env
    group = unprocessed(client)["groups"][0]
    ids = [p["id"] for p in group["points"][:2]]
    response = client.post(
        "/api/v1/change-points/acknowledge", json={"ids": ids, "actor": "baron"}
    )
    assert response.status_code == 200
    assert len(response.json()["records"]) == 2
    remaining = unprocessed(client)["groups"]
    assert remaining[0]["summary"]["total"] == 1
    got = processed(client)["groups"]
    assert got[0]["summary"]["acknowledged"] == 2


def test_hide_removes_from_unprocessed(env):
    client, _ = env
    group = unprocessed(client)["groups"][0]
    pid = group["points"][0]["id"]
    response = client.post(f"/api/v1/change-points/{pid}/hide", json={"actor": "baron"})
    assert response.status_code == 200
    ids = {p["id"] for g in unprocessed(client)["groups"] for p in g["points"]}
    assert pid not in ids


def test_triage_is_idempotent_at_api_level(env):
    client, store = env
    pid = unprocessed(client)["groups"][0]["points"][0]["id"]
    for _ in range(2):
        response = client.post(
            f"/api/v1/change-points/{pid}/acknowledge", json={"actor": "baron"}
        )
        assert response.status_code == 200
    assert sum(r.point_id == pid for r in store.triage_records()) == 1


def test_empty_id_list_rejected(env):
    client, _ = env
    response = client.post(
        "/api/v1/change-points/acknowledge", json={"ids": [], "actor": "baron"}
    )
    assert response.status_code == 400


def test_unknown_id_is_404(env):
    client, _ = env
    response = client.post(
        "/api/v1/change-points/acknowledge",
        json={"ids": ["feedfeedfeedfeedfeedfeed"], "actor": "baron"},
    )
    assert response.status_code == 404


def test_stale_id_accepted_with_warning(env):
    client, store = env
    pid = unprocessed(client)["groups"][0]["points"][0]["id"]
    key, revision = store.point_identity(pid)
    store.replace_change_points(key, [])  # a recompute removed the point
    response = client.post(
        f"/api/v1/change-points/{pid}/acknowledge", json={"actor": "baron"}
    )
    assert response.status_code == 200
    assert response.json()["warnings"] == [{"id": pid, "reason": "stale"}]
    audit = client.get("/api/v1/audit").json()
    assert audit["acknowledged_without_raw_point"] == 1


def test_malformed_filter_rejected(env):
    client, _ = env
    response = client.get("/api/v1/change-points", params={"status": "bogus"})
    assert response.status_code == 422
    body = response.json()
    assert body["detail"][0]["loc"][-1] == "status"
    response = client.get("/api/v1/change-points", params={"sort": "bogus"})
    assert response.status_code == 400


def test_min_hazard_filter(env):
    client, _ = env
    body = unprocessed(client, min_hazard=0.5)
    tests = {p["series"]["test"] for g in body["groups"] for p in g["points"]}
    assert "scan" not in tests  # |ln(30/29)| ~= 0.034
    assert {"insert", "update"} <= tests


def test_ticket_match_suppresses_from_both_lists(env):
    client, store = env
    store.upsert_ticket(
        TicketRecord("PERF-1", TicketSelectors(test="insert"), "rev0030", None, "drop")
    )
    tests = {
        p["series"]["test"] for g in unprocessed(client)["groups"] for p in g["points"]
    }
    assert "insert" not in tests
    # even if someone had acknowledged it, it stays off the processed list
    store.record_triage(make_key("insert"), "rev0030", "acknowledged", "baron")
    tests = {
        p["series"]["test"] for g in processed(client)["groups"] for p in g["points"]
    }
    assert "insert" not in tests


def test_ticket_fix_revision_matches_later_improvement(rng):
    values = np.concatenate(
        [rng.normal(10, 0.1, 30), rng.normal(5, 0.1, 30), rng.normal(10, 0.1, 30)]
    )
    store = seeded_store({"insert": values})
    recompute_all(store, "sys-perf", CONFIG)
    points = sorted(store.change_points(make_key("insert")), key=lambda p: p.commit_order)
    assert len(points) == 2
    store.upsert_ticket(
        TicketRecord(
            "PERF-2",
            TicketSelectors(test="insert"),
            points[0].revision,
            points[1].revision,
            "drop and fix",
        )
    )
    client = TestClient(create_app(store, CONFIG))
    trend = client.get(f"/api/v1/series/{make_key('insert').id}/trend").json()
    by_rev = {p["revision"]: p for p in trend["change_points"]}
    assert by_rev[points[0].revision]["tickets"][0]["matched_on"] == "first_failing"
    assert by_rev[points[1].revision]["tickets"][0]["matched_on"] == "fix"
    # and both drop off the triage lists
    assert unprocessed(client)["groups"] == []


def test_ticket_outside_every_range_matches_nothing(env):
    client, store = env
    store.upsert_ticket(
        TicketRecord("PERF-3", TicketSelectors(test="insert"), "rev0005", None, "unrelated")
    )
    tests = {
        p["series"]["test"] for g in unprocessed(client)["groups"] for p in g["points"]
    }
    assert "insert" in tests


def test_trend_payload(env):
    client, store = env
    key = make_key("insert")
    pid = unprocessed(client)["groups"][0]["points"][0]["id"]
    trend = client.get(f"/api/v1/series/{key.id}/trend").json()
    assert len(trend["values"]) == 60
    orders = [v["order"] for v in trend["values"]]
    assert orders == sorted(orders)
    # segments tile the analyzed window
    segs = trend["segments"]
    assert sum(s["count"] for s in segs) == 60
    for a, b in zip(segs[:-1], segs[1:]):
        assert b["start_order"] > a["end_order"]
    # hidden state flows through for recoloring
    target = trend["change_points"][0]
    client.post(
        f"/api/v1/change-points/{target['id']}/hide", json={"actor": "baron"}
    )
    trend = client.get(f"/api/v1/series/{key.id}/trend").json()
    assert trend["change_points"][0]["triage_state"] == "hidden"


def test_trend_unknown_series_is_plain(env):
    client, _ = env
    trend = client.get(f"/api/v1/series/{make_key('nothing').id}/trend").json()
    assert trend["values"] == []
    assert trend["change_points"] == []


def test_audit_counters(env):
    client, store = env
    fresh = client.get("/api/v1/audit").json()
    assert fresh == {
        "acknowledged_without_raw_point": 0,
        "acknowledged_without_ticket": 0,
        "hidden_with_ticket": 0,
    }
    groups = unprocessed(client)["groups"]
    insert_point = next(
        p for p in groups[0]["points"] if p["series"]["test"] == "insert"
    )
    scan_point = next(p for p in groups[0]["points"] if p["series"]["test"] == "scan")
    client.post(f"/api/v1/change-points/{insert_point['id']}/acknowledge", json={"actor": "b"})
    client.post(f"/api/v1/change-points/{scan_point['id']}/hide", json={"actor": "b"})
    store.upsert_ticket(
        TicketRecord("PERF-9", TicketSelectors(test="scan"), "rev0030", None, "noise doc")
    )
    audit = client.get("/api/v1/audit").json()
    assert audit["acknowledged_without_ticket"] == 1
    assert audit["hidden_with_ticket"] == 1


def test_canary_tag_excluded_by_default(rng):
    store = Store()
    store.import_commit_log("sys-perf", [f"rev{i:04d}" for i in range(60)])
    vals = np.concatenate([rng.normal(10, 0.1, 30), rng.normal(5, 0.1, 30)])
    for i in range(60):
        store.ingest_bundle(
            make_bundle(f"rev{i:04d}", i + 1, {"cpu_noise": vals[i]}, tags=("canary",))
        )
    recompute_all(store, "sys-perf", CONFIG)
    client = TestClient(create_app(store, CONFIG))
    assert unprocessed(client)["groups"] == []
    shown = unprocessed(client, include_tags="canary")
    assert len(shown["groups"]) == 1


def test_ingest_and_recompute_endpoints(rng):
    store = Store()
    store.import_commit_log("sys-perf", ["a1", "a2", "a3"])
    client = TestClient(create_app(store, CONFIG))
    bundle = {
        "project": "sys-perf", "variant": "linux", "task": "bench",
        "revision": "a1", "order": 1, "timestamp": "2026-01-05T00:00:00Z",
        "results": [
            {"test": "x", "config": "1", "measurement": "m", "value": 10.0},
            {"test": "y", "config": "1", "measurement": "m", "value": 20.0},
        ],
    }
    response = client.post("/api/v1/ingest/results", json=bundle)
    assert response.status_code == 200
    body = response.json()
    assert body["series_updated"] == 2
    assert body["recompute"][0]["totals"]["series"] == 2

    bad = dict(bundle, revision="a2", order=2)
    bad["results"] = [{"test": "x", "config": "1", "measurement": "m", "value": None}]
    assert client.post("/api/v1/ingest/results", json=bad).status_code == 400

    response = client.post("/api/v1/ingest/tickets", json=[{
        "ticket_id": "PERF-7", "selectors": {}, "first_failing_revision": "a1",
        "fix_revision": None, "summary": "s",
    }])
    assert response.status_code == 200
    assert client.post("/api/v1/recompute", json={}).status_code == 400
    response = client.post("/api/v1/recompute", json={"project": "sys-perf"})
    assert response.status_code == 200
    assert response.json()["totals"]["series"] == 2


def test_partition_into_exactly_one_bucket(env):
    client, store = env
    # act on one point, ticket another, leave the third
    groups = unprocessed(client)["groups"][0]
    by_test = {p["series"]["test"]: p for p in groups["points"]}
    client.post(
        f"/api/v1/change-points/{by_test['insert']['id']}/acknowledge",
        json={"actor": "b"},
    )
    store.upsert_ticket(
        TicketRecord("PERF-4", TicketSelectors(test="update"), "rev0030", None, "known")
    )
    raw_ids = {p.id for k in store.series_keys() for p in store.change_points(k)}
    unproc = {p["id"] for g in unprocessed(client)["groups"] for p in g["points"]}
    proc = {p["id"] for g in processed(client)["groups"] for p in g["points"]}
    flt = TriageFilter(exclude_tags=())
    suppressed = raw_ids - unproc - proc
    assert unproc.isdisjoint(proc)
    assert len(unproc) + len(proc) + len(suppressed) == len(raw_ids)
    assert by_test["update"]["id"] in suppressed


def test_pagination_cursor(rng):
    # several revisions each carrying one change point
    store = Store()
    store.import_commit_log("sys-perf", [f"rev{i:04d}" for i in range(200)])
    series = {}
    for s in range(4):
        vals = np.concatenate(
            [rng.normal(10, 0.05, 40 + 30 * s), rng.normal(5, 0.05, 160 - 30 * s)]
        )
        series[f"t{s}"] = vals
    for i in range(200):
        store.ingest_bundle(
            make_bundle(f"rev{i:04d}", i + 1, {k: v[i] for k, v in series.items()})
        )
    recompute_all(store, "sys-perf", CONFIG)
    client = TestClient(create_app(store, CONFIG))
    first = client.get("/api/v1/change-points", params={"limit": 2}).json()
    assert len(first["groups"]) == 2
    assert first["next_cursor"]
    second = client.get(
        "/api/v1/change-points", params={"limit": 50, "cursor": first["next_cursor"]}
    ).json()
    first_orders = [g["order"] for g in first["groups"]]
    second_orders = [g["order"] for g in second["groups"]]
    assert first_orders == sorted(first_orders, reverse=True)
    assert all(o < min(first_orders) for o in second_orders)
    assert second["next_cursor"] is None
