"""HTTP surface for the RMS and the twin's local read API.

All bodies are JSON; errors use a uniform {code, message, details}
envelope; timestamps are simulated seconds since scenario start.
"""

from __future__ import annotations

import asyncio
import json
import os
import threading

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse, StreamingResponse

from ..robot import CommandKind, MotionCommand
from .service import RmsError

_STATUS = {
    "not_found": 404,
    "robot_busy": 409,
    "invalid_state": 409,
    "mode_conflict": 409,
    "invalid_transition": 409,
    "run_not_terminal": 409,
    "command_rejected": 422,
}


def create_app(engine, lock: threading.Lock | None = None) -> FastAPI:
    lock = lock or threading.Lock()
    app = FastAPI(title="dctwin RMS", version="1.0")
    app.state.engine = engine
    app.state.lock = lock
    rms = engine.rms
    twin = engine.twin
    token = os.environ.get("DCS_API_TOKEN")

    @app.exception_handler(RmsError)
    async def rms_error_handler(request: Request, exc: RmsError):
        return JSONResponse(
            status_code=_STATUS.get(exc.code, 400),
            content={"code": exc.code, "message": exc.message,
                     "details": exc.details},
        )

    @app.middleware("http")
    async def check_token(request: Request, call_next):
        if token and request.headers.get("x-api-token") != token:
            return JSONResponse(
                status_code=401,
                content={"code": "unauthorized", "message": "bad or missing token",
                         "details": {}},
            )
        return await call_next(request)

    # -- robots ----------------------------------------------------------

    @app.get("/api/v1/robots/{robot_id}/telemetry")
    def telemetry(robot_id: str):
        with lock:
            return rms.telemetry(robot_id)

    @app.post("/api/v1/robots/{robot_id}/commands")
    async def post_command(robot_id: str, request: Request):
        body = await request.json()
        try:
            kind = CommandKind(body["kind"])
        except (KeyError, ValueError):
            raise RmsError("invalid_request", f"unknown command kind {body.get('kind')}")
        with lock:
            return rms.command(robot_id, MotionCommand(kind, body.get("params", {})))

    # -- missions and runs ----------------------------------------------

    @app.post("/api/v1/missions")
    async def create_mission(request: Request):
        body = await request.json()
        with lock:
            return rms.create_mission(body).as_dict()

    @app.get("/api/v1/missions")
    def list_missions():
        with lock:
            return [m.as_dict() for m in rms.missions.values()]

    @app.get("/api/v1/missions/{mission_id}")
    def get_mission(mission_id: str):
        with lock:
            if mission_id not in rms.missions:
                raise RmsError("not_found", f"unknown mission {mission_id}")
            return rms.missions[mission_id].as_dict()

    @app.post("/api/v1/missions/{mission_id}/runs")
    async def start_run(mission_id: str, request: Request):
        body = {}
        if await request.body():
            body = await request.json()
        with lock:
            return rms.start_run(
                mission_id, queue_if_busy=bool(body.get("queue", False))
            ).as_dict()

    @app.get("/api/v1/runs")
    def list_runs():
        with lock:
            return [r.as_dict() for r in rms.runs.values()]

    @app.get("/api/v1/runs/{run_id}")
    def get_run(run_id: str):
        with lock:
            return rms._get_run(run_id).as_dict()

    @app.post("/api/v1/runs/{run_id}/pause")
    def pause(run_id: str):
        with lock:
            rms.pause_run(run_id)
            return rms._get_run(run_id).as_dict()

    @app.post("/api/v1/runs/{run_id}/resume")
    def resume(run_id: str):
        with lock:
            rms.resume_run(run_id)
            return rms._get_run(run_id).as_dict()

    @app.post("/api/v1/runs/{run_id}/abort")
    def abort(run_id: str):
        with lock:
            rms.abort_run(run_id)
            return rms._get_run(run_id).as_dict()

    @app.get("/api/v1/runs/{run_id}/report")
    def report(run_id: str, format: str = "json"):
        from .. import store as store_mod

        with lock:
            rep = rms.generate_report(run_id)
        if format == "csv":
            return PlainTextResponse(store_mod.report_csv(rep), media_type="text/csv")
        return JSONResponse(content=json.loads(store_mod.report_json(rep)))

    @app.get("/api/v1/runs/{run_id}/audit")
    def audit(run_id: str):
        with lock:
            return rms.accuracy_audit(run_id)

    @app.get("/api/v1/runs/{run_id}/log")
    def robot_log(run_id: str):
        with lock:
            xml = rms.export_robot_log(run_id)
        return PlainTextResponse(xml, media_type="application/xml")

    @app.get("/api/v1/runs/{run_id}/records")
    def run_records(run_id: str):
        with lock:
            rms._get_run(run_id)
            return rms.store.query("inspections", run_id=run_id)

    # -- alarms ----------------------------------------------------------

    @app.get("/api/v1/alarms")
    def alarms(state: str | None = None):
        with lock:
            return [a.as_dict() for a in rms.list_alarms(state)]

    @app.post("/api/v1/alarms/{alarm_id}/ack")
    async def ack(alarm_id: str, request: Request):
        body = {}
        if await request.body():
            body = await request.json()
        with lock:
            return rms.ack_alarm(alarm_id, actor=body.get("actor", "operator")).as_dict()

    @app.post("/api/v1/alarms/{alarm_id}/resolve")
    def resolve(alarm_id: str):
        with lock:
            return rms.resolve_alarm(alarm_id).as_dict()

    # -- world -----------------------------------------------------------

    @app.get("/api/v1/racks/{rack_id}/panel")
    def rack_panel(rack_id: str):
        with lock:
            return rms.rack_panel(rack_id)

    @app.get("/api/v1/model")
    def model_geometry():
        with lock:
            m = engine.world.model
            return {
                "name": engine.scenario.name,
                "floor": {"width": m.floor_width, "depth": m.floor_depth},
                "cell_size": m.cell_size,
                "racks": [
                    {"id": r.id, "x": r.x, "y": r.y, "heading": r.heading,
                     "width": r.width, "depth": r.depth,
                     "servers": [s.id for s in r.servers]}
                    for r in m.racks
                ],
                "doors": [
                    {"id": d.id, "x1": d.x1, "y1": d.y1, "x2": d.x2, "y2": d.y2,
                     "state": engine.world.door_state(d.id).value}
                    for d in m.doors
                ],
                "charging_stations": [
                    {"id": s.id, "x": s.x, "y": s.y, "heading": s.heading}
                    for s in m.charging_stations
                ],
            }

    # -- event stream ----------------------------------------------------

    @app.get("/api/v1/events")
    async def events(since: int = 0, limit: int | None = None):
        # Unbounded by default (client disconnect cancels the task);
        # with ?limit=N the stream closes after delivering N events so
        # polling clients can drain in bounded requests.
        async def gen():
            seq = since
            sent = 0
            while True:
                with lock:
                    batch = rms.events_since(seq)
                for ev in batch:
                    seq = max(seq, ev["seq"])
                    yield f"id: {ev['seq']}\nevent: {ev['kind']}\ndata: {json.dumps(ev)}\n\n"
                    sent += 1
                    if limit is not None and sent >= limit:
                        return
                if not batch:
                    if limit is not None:
                        return
                    yield ": keepalive\n\n"
                    await asyncio.sleep(0.1)

        return StreamingResponse(gen(), media_type="text/event-stream")

    # -- admin clock -----------------------------------------------------

    @app.post("/api/v1/admin/clock")
    async def clock(request: Request):
        body = await request.json()
        with lock:
            if "paused" in body:
                engine.paused = bool(body["paused"])
            if "accel" in body:
                accel = float(body["accel"])
                if not (1.0 <= accel <= 1000.0):
                    raise RmsError("invalid_request", "accel must be in [1, 1000]")
                engine.accel = accel
            return {"paused": engine.paused, "accel": engine.accel, "t": engine.t}

    # -- twin local API --------------------------------------------------

    @app.get("/twin/state")
    def twin_state():
        with lock:
            return twin.state(engine.t)

    @app.get("/twin/racks/{rack_id}/panel")
    def twin_panel(rack_id: str):
        with lock:
            return twin.rack_panel(rack_id)

    @app.get("/twin/knowledge/{subject}")
    def knowledge(subject: str):
        with lock:
            return twin.knowledge_lookup(subject)

    @app.post("/twin/tablet/{rack_id}/command")
    async def tablet(rack_id: str, request: Request):
        body = await request.json()
        with lock:
            return twin.tablet_command(
                rack_id, body.get("action"), alarm_id=body.get("alarm_id")
            )

    return app
