"""HTTP API: endpoint behavior, error envelope, SSE stream, clock admin."""

import json

import pytest
from fastapi.testclient import TestClient

from dctwin.engine import Engine
from dctwin.rms.core import RunState
from dctwin.rms.http import create_app

from conftest import make_small_scenario


@pytest.fixture
def api(tmp_path):
    eng = Engine(make_small_scenario(), seed=42, store_dir=tmp_path / "store")
    client = TestClient(create_app(eng))
    yield client, eng
    eng.close()


def finish_run(eng, run_id):
    run = eng.rms.runs[run_id]
    while run.state not in (RunState.COMPLETED, RunState.FAILED, RunState.ABORTED):
        eng.tick()
        assert eng.t < 600.0
    eng.run_for(1.0)


class TestTelemetryAndCommands:
    def test_telemetry_endpoint(self, api):
        client, eng = api
        eng.run_for(1.0)
        r = client.get("/api/v1/robots/r1/telemetry")
        assert r.status_code == 200
        body = r.json()
        assert body["robot_id"] == "r1"
        assert body["mode"] == "IDLE"

    def test_unknown_robot_404_envelope(self, api):
        client, _ = api
        r = client.get("/api/v1/robots/nope/telemetry")
        assert r.status_code == 404
        body = r.json()
        assert set(body) == {"code", "message", "details"}
        assert body["code"] == "not_found"

    def test_post_command_jog(self, api):
        client, eng = api
        r = client.post("/api/v1/robots/r1/commands",
                        json={"kind": "JOG", "params": {"linear": 0.3}})
        assert r.status_code == 200
        assert r.json()["seq"] == 1
        eng.run_for(2.0)
        assert eng.robot.x > 1.5

    def test_invalid_command_kind_400(self, api):
        client, _ = api
        r = client.post("/api/v1/robots/r1/commands", json={"kind": "FLY"})
        assert r.status_code == 400
        assert r.json()["code"] == "invalid_request"

    def test_rejected_command_422(self, api):
        client, _ = api
        r = client.post("/api/v1/robots/r1/commands",
                        json={"kind": "JOG", "params": {"linear": 9.0}})
        assert r.status_code == 422
        assert r.json()["code"] == "command_rejected"


class TestMissionsAndRuns:
    def test_mission_crud_and_run(self, api):
        client, eng = api
        r = client.post("/api/v1/missions", json={
            "id": "api-m1", "name": "api-m1", "dwell_seconds": 2.0,
            "points": [{"index": 1, "x": 2.5, "y": 2.5,
                        "lift_heights": [0.3], "sensors": ["ENV"]}],
        })
        assert r.status_code == 200
        assert r.json()["id"] == "api-m1"
        assert client.get("/api/v1/missions/api-m1").status_code == 200
        names = {m["id"] for m in client.get("/api/v1/missions").json()}
        assert {"mini", "api-m1"} <= names

        run = client.post("/api/v1/missions/api-m1/runs").json()
        assert run["state"] == "RUNNING"
        finish_run(eng, run["run_id"])
        got = client.get(f"/api/v1/runs/{run['run_id']}").json()
        assert got["state"] == "COMPLETED"
        assert [o["status"] for o in got["outcomes"]] == ["DONE"]

    def test_invalid_mission_400(self, api):
        client, _ = api
        r = client.post("/api/v1/missions", json={"points": []})
        assert r.status_code == 400
        assert r.json()["code"] == "invalid_mission"

    def test_busy_conflict_409(self, api):
        client, _ = api
        client.post("/api/v1/missions/mini/runs")
        r = client.post("/api/v1/missions/mini/runs")
        assert r.status_code == 409
        assert r.json()["code"] == "robot_busy"

    def test_pause_resume_abort(self, api):
        client, eng = api
        run = client.post("/api/v1/missions/mini/runs").json()
        eng.run_for(2.0)
        rid = run["run_id"]
        assert client.post(f"/api/v1/runs/{rid}/pause").json()["state"] == "PAUSED"
        assert client.post(f"/api/v1/runs/{rid}/resume").json()["state"] == "RUNNING"
        assert client.post(f"/api/v1/runs/{rid}/abort").json()["state"] == "ABORTED"
        r = client.post(f"/api/v1/runs/{rid}/resume")
        assert r.status_code == 409

    def test_report_json_and_csv(self, api):
        client, eng = api
        run = client.post("/api/v1/missions/mini/runs").json()
        rid = run["run_id"]
        # report refused while the run is live
        assert client.get(f"/api/v1/runs/{rid}/report").status_code == 409
        finish_run(eng, rid)
        rep = client.get(f"/api/v1/runs/{rid}/report").json()
        assert set(rep) >= {"environmental", "equipment", "alarms"}
        csv = client.get(f"/api/v1/runs/{rid}/report", params={"format": "csv"})
        assert csv.headers["content-type"].startswith("text/csv")
        assert csv.text.startswith("section,channel")

    def test_audit_and_log_and_records(self, api):
        client, eng = api
        run = client.post("/api/v1/missions/mini/runs").json()
        rid = run["run_id"]
        finish_run(eng, rid)
        audit = client.get(f"/api/v1/runs/{rid}/audit").json()
        assert audit["reads_total"] > 0
        log = client.get(f"/api/v1/runs/{rid}/log")
        assert log.headers["content-type"].startswith("application/xml")
        assert log.text.startswith('<?xml version="1.0"')
        recs = client.get(f"/api/v1/runs/{rid}/records").json()
        assert len(recs) == 2


class TestAlarmsAndPanels:
    def _completed_run(self, api):
        client, eng = api
        run = client.post("/api/v1/missions/mini/runs").json()
        finish_run(eng, run["run_id"])
        return client

    def test_alarm_listing_and_filter(self, api):
        client = self._completed_run(api)
        alarms = client.get("/api/v1/alarms").json()
        assert alarms
        opened = client.get("/api/v1/alarms", params={"state": "OPEN"}).json()
        assert all(a["state"] == "OPEN" for a in opened)

    def test_ack_resolve_flow(self, api):
        client = self._completed_run(api)
        alarm = client.get("/api/v1/alarms").json()[0]
        aid = alarm["alarm_id"]
        acked = client.post(f"/api/v1/alarms/{aid}/ack", json={"actor": "op-1"}).json()
        assert acked["state"] == "ACKNOWLEDGED"
        assert acked["acked_by"] == "op-1"
        resolved = client.post(f"/api/v1/alarms/{aid}/resolve").json()
        assert resolved["state"] == "RESOLVED"
        r = client.post(f"/api/v1/alarms/{aid}/ack")
        assert r.status_code == 409

    def test_rack_panel(self, api):
        client = self._completed_run(api)
        panel = client.get("/api/v1/racks/R1/panel").json()
        assert panel["rack_id"] == "R1"
        assert panel["servers"]
        assert client.get("/api/v1/racks/R99/panel").status_code == 404

    def test_model_geometry(self, api):
        client, _ = api
        model = client.get("/api/v1/model").json()
        assert model["floor"] == {"width": 12.0, "depth": 10.0}
        assert {r["id"] for r in model["racks"]} == {"R1", "R2"}
        assert model["doors"][0]["state"] == "CLOSED"
        assert model["charging_stations"][0]["id"] == "cs1"


class TestEventsStream:
    def test_sse_delivers_events_in_order(self, api):
        client, eng = api
        client.post("/api/v1/missions/mini/runs")
        eng.run_for(2.0)
        seqs = []
        with client.stream("GET", "/api/v1/events", params={"limit": 5}) as resp:
            assert resp.headers["content-type"].startswith("text/event-stream")
            buf = "".join(resp.iter_text())
        for block in buf.split("\n\n"):
            for line in block.splitlines():
                if line.startswith("data: "):
                    seqs.append(json.loads(line[6:])["seq"])
        assert seqs == sorted(seqs)
        assert len(seqs) == 5

    def test_sse_since_filters(self, api):
        client, eng = api
        client.post("/api/v1/missions/mini/runs")
        eng.run_for(2.0)
        with client.stream("GET", "/api/v1/events",
                           params={"since": 3, "limit": 2}) as resp:
            buf = "".join(resp.iter_text())
        first = json.loads(
            next(l for l in buf.splitlines() if l.startswith("data: "))[6:]
        )
        assert first["seq"] > 3


class TestAdminClock:
    def test_pause_and_accel(self, api):
        client, eng = api
        out = client.post("/api/v1/admin/clock", json={"paused": True}).json()
        assert out["paused"] is True
        t0 = eng.t
        eng.run_for(1.0) if False else [eng.tick() for _ in range(10)]
        assert eng.t == t0  # paused engine does not advance
        out = client.post("/api/v1/admin/clock",
                          json={"paused": False, "accel": 250.0}).json()
        assert out["accel"] == 250.0
        eng.tick()
        assert eng.t > t0

    def test_accel_bounds(self, api):
        client, _ = api
        r = client.post("/api/v1/admin/clock", json={"accel": 5000})
        assert r.status_code == 400


class TestTwinApi:
    def test_twin_state_and_panel(self, api):
        client, eng = api
        run = client.post("/api/v1/missions/mini/runs").json()
        finish_run(eng, run["run_id"])
        state = client.get("/twin/state").json()
        assert state["health"] == "LIVE"
        assert state["pose"] is not None
        panel = client.get("/twin/racks/R1/panel").json()
        assert panel["rack_id"] == "R1"

    def test_twin_knowledge(self, api):
        client, _ = api
        entries = client.get("/twin/knowledge/R1-S2").json()
        assert any(e["predicate"] == "maintenance_ticket" for e in entries)

    def test_tablet_command_roundtrip(self, api):
        client, eng = api
        run = client.post("/api/v1/missions/mini/runs").json()
        finish_run(eng, run["run_id"])
        alarm = client.get("/api/v1/alarms", params={"state": "OPEN"}).json()[0]
        out = client.post("/twin/tablet/R1/command",
                          json={"action": "ACK_ALARM",
                                "alarm_id": alarm["alarm_id"]}).json()
        assert out["status"] == "ok"
        assert out["alarm"]["state"] == "ACKNOWLEDGED"
