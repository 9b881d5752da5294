"""Robot Management Service: mission scheduling and execution, robot
control, inspection ingestion, alarming, auto-charging, and reporting.

All state mutation funnels through ``on_tick`` (driven by the simulation
loop) and the command entry points, so observers always see consistent
run state.
"""

from __future__ import annotations

import math

from .. import planner, store as store_mod
from ..robot import CommandError, CommandKind, MotionCommand, RobotMode, RobotSim
from ..world import LED_SEVERITY, LedState, World, DoorState
from .core import (
    Alarm,
    AlarmKind,
    AlarmState,
    InspectionPoint,
    Mission,
    MissionRun,
    PointOutcome,
    RunState,
    Severity,
    TERMINAL_RUN_STATES,
    ThresholdConfig,
)

POLL_INTERVAL = 0.5      # s, telemetry publication cadence
TELEMETRY_LOG_INTERVAL = 1.0  # s, journal downsampling


class RmsError(Exception):
    def __init__(self, code: str, message: str, details: dict | None = None):
        self.code = code
        self.message = message
        self.details = details or {}
        super().__init__(message)


class RmsService:
    def __init__(
        self,
        world: World,
        robot: RobotSim,
        store: store_mod.Store,
        thresholds: ThresholdConfig | None = None,
        robot_id: str = "r1",
        scenario_name: str = "scenario",
        seed: int = 42,
    ):
        self.world = world
        self.robot = robot
        self.store = store
        self.thresholds = thresholds or ThresholdConfig()
        self.robot_id = robot_id
        self.scenario_name = scenario_name
        self.seed = seed

        self.missions: dict[str, Mission] = {}
        self.runs: dict[str, MissionRun] = {}
        self.alarms: dict[str, Alarm] = {}
        self.records: dict[int, dict] = {}
        self.reports: dict[str, dict] = {}
        self.rack_panels: dict[str, dict] = {}

        self.events: list[dict] = []
        self._event_seq = 0
        self._cmd_seq = 0
        self._mission_seq = 0
        self._run_seq = 0
        self._alarm_seq = 0
        self._run_log: dict[str, list[dict]] = {}

        self.active_run_id: str | None = None
        self.run_queue: list[str] = []   # pending run ids waiting for the robot
        self._charge_pending = False     # STOP issued, DOCK once robot idle
        self._charging_for: str | None = None  # run paused/deferred for charging
        self._charge_interlude_start: float | None = None
        self._last_poll = -1e9
        self._last_tlog = -1e9

    # ------------------------------------------------------------------
    # events

    def _emit(self, kind: str, t: float, payload: dict):
        self._event_seq += 1
        self.events.append(
            {"seq": self._event_seq, "t": t, "kind": kind, "payload": payload}
        )

    def events_since(self, seq: int) -> list[dict]:
        if not self.events or seq >= self.events[-1]["seq"]:
            return []
        # events list is append-only with dense seq numbers
        start = max(0, seq)
        return [e for e in self.events[start:] if e["seq"] > seq]

    # ------------------------------------------------------------------
    # missions

    def create_mission(self, definition: dict) -> Mission:
        points_raw = definition.get("points") or []
        if not points_raw:
            raise RmsError("invalid_mission", "mission must contain >=1 point")
        dwell = float(definition.get("dwell_seconds", 25.0))
        if dwell <= 0:
            raise RmsError("invalid_mission", "dwell_seconds must be > 0")
        grid = self.robot.nav_grid
        points = []
        for raw in points_raw:
            p = InspectionPoint(
                index=int(raw["index"]),
                x=float(raw["x"]),
                y=float(raw["y"]),
                rack_id=raw.get("rack_id") or raw.get("rack"),
                lift_heights=[float(h) for h in raw.get("lift_heights", raw.get("lifts", [0.5, 1.5]))],
                sensors=list(raw.get("sensors", ["ENV", "LED"])),
            )
            if not grid.free_at(p.x, p.y):
                raise RmsError(
                    "invalid_mission",
                    f"point {p.index} at ({p.x}, {p.y}) is in blocked space",
                    {"index": p.index},
                )
            for h in p.lift_heights:
                if not (0.0 <= h <= self.robot.cfg.max_lift):
                    raise RmsError(
                        "invalid_mission",
                        f"point {p.index}: lift height {h} out of range",
                    )
            if p.rack_id is not None and p.rack_id not in self.world.model._racks:
                raise RmsError(
                    "invalid_mission", f"point {p.index}: unknown rack {p.rack_id}"
                )
            points.append(p)
        points.sort(key=lambda p: p.index)
        indices = [p.index for p in points]
        if indices != list(range(1, len(points) + 1)):
            raise RmsError(
                "invalid_mission",
                f"point indices must be contiguous 1..N, got {indices}",
            )
        self._mission_seq += 1
        mid = definition.get("id") or f"m{self._mission_seq:03d}"
        if mid in self.missions and self._mission_started(mid):
            raise RmsError("invalid_mission", f"mission {mid} already ran; not editable")
        mission = Mission(
            id=mid,
            name=definition.get("name", mid),
            points=points,
            dwell_seconds=dwell,
            start_policy=dict(definition.get("start_policy", {"kind": "MANUAL"})),
        )
        self.missions[mid] = mission
        return mission

    def _mission_started(self, mission_id: str) -> bool:
        return any(r.mission_id == mission_id for r in self.runs.values())

    # ------------------------------------------------------------------
    # runs

    def start_run(self, mission_id: str, queue_if_busy: bool = False) -> MissionRun:
        if mission_id not in self.missions:
            raise RmsError("not_found", f"unknown mission {mission_id}")
        mission = self.missions[mission_id]
        busy = self.active_run_id is not None and self.runs[
            self.active_run_id
        ].state not in TERMINAL_RUN_STATES
        if busy and not queue_if_busy:
            raise RmsError("robot_busy", "robot busy: another run is active")
        self._run_seq += 1
        run = MissionRun(
            run_id=f"run-{self._run_seq:04d}",
            mission_id=mission_id,
            outcomes=[PointOutcome(index=p.index) for p in mission.points],
        )
        self.runs[run.run_id] = run
        self._run_log[run.run_id] = []
        if busy:
            run.notes.append("QUEUED")
            self.run_queue.append(run.run_id)
            return run
        self._activate_run(run)
        return run

    def _activate_run(self, run: MissionRun):
        t = self.world.t
        self.active_run_id = run.run_id
        frac = self.robot.battery / self.robot.cfg.battery_capacity_kwh
        if frac < self.thresholds.low_battery_frac:
            run.notes.append("DEFERRED_CHARGING")
            self._charging_for = run.run_id
            self._open_low_battery_alarm(t, frac)
            self._issue(MotionCommand(CommandKind.DOCK), t)
            self._log_run_state(run, t)
            return
        run.state = RunState.RUNNING
        run.started = t
        self._log_run_state(run, t)
        self._emit("run", t, {"run_id": run.run_id, "state": run.state.value})

    def pause_run(self, run_id: str):
        run = self._get_run(run_id)
        if run.state is not RunState.RUNNING:
            raise RmsError("invalid_state", f"run {run_id} is {run.state.value}, not RUNNING")
        run.state = RunState.PAUSED
        run.dispatched = False
        t = self.world.t
        self._issue(MotionCommand(CommandKind.STOP), t)
        self._log_run_state(run, t)
        self._emit("run", t, {"run_id": run_id, "state": run.state.value})

    def resume_run(self, run_id: str):
        run = self._get_run(run_id)
        if run.state is not RunState.PAUSED:
            raise RmsError("invalid_state", f"run {run_id} is {run.state.value}, not PAUSED")
        run.state = RunState.RUNNING
        run.dispatched = False
        t = self.world.t
        self._log_run_state(run, t)
        self._emit("run", t, {"run_id": run_id, "state": run.state.value})

    def abort_run(self, run_id: str):
        run = self._get_run(run_id)
        if run.state in TERMINAL_RUN_STATES:
            raise RmsError("invalid_state", f"run {run_id} already terminal")
        self._finish_run(run, RunState.ABORTED)
        self._issue(MotionCommand(CommandKind.STOP), self.world.t)

    def _get_run(self, run_id: str) -> MissionRun:
        if run_id not in self.runs:
            raise RmsError("not_found", f"unknown run {run_id}")
        return self.runs[run_id]

    def _finish_run(self, run: MissionRun, state: RunState, note: str | None = None):
        t = self.world.t
        run.state = state
        run.ended = t
        if note:
            run.notes.append(note)
        if self.active_run_id == run.run_id:
            self.active_run_id = None
        self._log_run_state(run, t)
        self._emit("run", t, {"run_id": run.run_id, "state": state.value,
                              "note": note})
        if state is RunState.COMPLETED:
            self.reports[run.run_id] = self.generate_report(run.run_id)
        # repeating missions re-enqueue themselves
        mission = self.missions.get(run.mission_id)
        if (
            state is RunState.COMPLETED
            and mission
            and mission.start_policy.get("kind") == "REPEATING"
        ):
            self.start_run(mission.id, queue_if_busy=True)

    def _log_run_state(self, run: MissionRun, t: float):
        self.store.append(
            "runs", {"t": t, "run_id": run.run_id, "state": run.state.value}
        )

    # ------------------------------------------------------------------
    # commands

    def command(self, robot_id: str, cmd: MotionCommand) -> dict:
        """External command entry: mode rules enforced, then forwarded."""
        if robot_id != self.robot_id:
            raise RmsError("not_found", f"unknown robot {robot_id}")
        run = self.runs.get(self.active_run_id) if self.active_run_id else None
        if cmd.kind in (CommandKind.JOG, CommandKind.SET_LIFT):
            if run is not None and run.state is RunState.RUNNING:
                raise RmsError(
                    "mode_conflict",
                    f"{cmd.kind.value} requires manual mode or a PAUSED run",
                )
        if cmd.kind is CommandKind.STOP and run is not None and run.state is RunState.RUNNING:
            run.state = RunState.PAUSED
            run.dispatched = False
            self._log_run_state(run, self.world.t)
            self._emit("run", self.world.t,
                       {"run_id": run.run_id, "state": run.state.value})
        try:
            return self._issue(cmd, self.world.t)
        except CommandError as exc:
            raise RmsError("command_rejected", str(exc)) from exc

    def _issue(self, cmd: MotionCommand, t: float) -> dict:
        """Forward a command to the simulator and log it."""
        self.robot.command(cmd, t)
        self._cmd_seq += 1
        seq = self._cmd_seq
        loggable = {
            k: v for k, v in cmd.params.items() if k != "waypoints"
        }
        entry = {
            "entry": "command",
            "t": t,
            "seq": seq,
            "kind": cmd.kind.value,
            "params": dict(cmd.params),
        }
        if self.active_run_id:
            self._run_log.setdefault(self.active_run_id, []).append(entry)
        self.store.append(
            "commands",
            {"t": t, "seq": seq, "kind": cmd.kind.value, "params": loggable,
             "run_id": self.active_run_id},
        )
        self._emit("command", t, {"seq": seq, "kind": cmd.kind.value})
        return {"seq": seq}

    # ------------------------------------------------------------------
    # telemetry

    def telemetry(self, robot_id: str | None = None) -> dict:
        if robot_id is not None and robot_id != self.robot_id:
            raise RmsError("not_found", f"unknown robot {robot_id}")
        r = self.robot
        run = self.runs.get(self.active_run_id) if self.active_run_id else None
        point_index = None
        if run and run.cursor < len(run.outcomes):
            point_index = run.outcomes[run.cursor].index
        return {
            "robot_id": self.robot_id,
            "t": self.world.t,
            "x": r.x,
            "y": r.y,
            "heading": r.heading,
            "speed": r.v,
            "lift_height": r.lift_height,
            "battery_kwh": r.battery,
            "battery_pct": 100.0 * r.battery / r.cfg.battery_capacity_kwh,
            "mode": r.mode.value,
            "run_id": run.run_id if run else None,
            "point_index": point_index,
        }

    # ------------------------------------------------------------------
    # tick processing

    def on_tick(self, t: float, robot_events: list, door_changes: list[str]):
        for door_id in door_changes:
            self._emit("door", t, {
                "door_id": door_id,
                "state": self.world.door_state(door_id).value,
            })
        for ev in robot_events:
            self._handle_robot_event(ev)
        self._start_due_missions(t)
        self._dispatch(t)
        if t - self._last_poll >= POLL_INTERVAL - 1e-9:
            self._last_poll = t
            snap = self.telemetry()
            self._emit("telemetry", t, snap)
            self.auto_charge_policy(snap)
        if t - self._last_tlog >= TELEMETRY_LOG_INTERVAL - 1e-9:
            self._last_tlog = t
            r = self.robot
            self.store.append(
                "telemetry",
                {"t": t, "x": r.x, "y": r.y, "heading": r.heading,
                 "battery_kwh": r.battery, "mode": r.mode.value,
                 "run_id": self.active_run_id},
            )
        self._maybe_resume_after_charge(t)

    def _handle_robot_event(self, ev):
        t = ev.t
        run = self.runs.get(self.active_run_id) if self.active_run_id else None
        if ev.kind == "MODE_CHANGE":
            entry = {
                "entry": "transition", "t": t, "from": ev.data["from"],
                "to": ev.data["to"], "x": ev.data["x"], "y": ev.data["y"],
                "heading": ev.data["heading"],
            }
            if self.active_run_id:
                self._run_log.setdefault(self.active_run_id, []).append(entry)
            self._emit("mode", t, dict(ev.data))
        elif ev.kind == "DOOR_REQUEST":
            door_id = ev.data["door_id"]
            ack = self.world.actuate_door(door_id, DoorState.OPEN)
            self._emit("door", t, {"door_id": door_id, "state": "OPENING",
                                   "effective_time": ack["effective_time"]})
        elif ev.kind == "PATH_DONE":
            if run and run.state is RunState.RUNNING and run.cursor < len(run.outcomes):
                out = run.outcomes[run.cursor]
                if out.arrival_time is None:
                    out.arrival_time = t
        elif ev.kind == "SENSOR_READOUT":
            self._on_readout(t, ev.data, run)
        elif ev.kind == "INSPECT_DONE":
            if run and run.state is RunState.RUNNING:
                out = run.outcomes[run.cursor]
                out.status = "DONE"
                run.cursor += 1
                run.dispatched = False
                if run.cursor >= len(run.outcomes):
                    self._finish_run(run, RunState.COMPLETED)
        elif ev.kind == "DOCKED":
            if self._charge_interlude_start is None:
                self._charge_interlude_start = t
            self._emit("dock", t, dict(ev.data))
        elif ev.kind == "LIFT_DONE":
            self._emit("lift", t, dict(ev.data))
        elif ev.kind == "BUMP":
            self._emit("bump", t, dict(ev.data))
        elif ev.kind == "FAULT":
            self._open_alarm(
                t, AlarmKind.ROBOT_FAULT, Severity.CRITICAL, self.robot_id,
                run_id=run.run_id if run else None,
            )
            self._emit("fault", t, dict(ev.data))
            if run and run.state not in TERMINAL_RUN_STATES:
                self._finish_run(run, RunState.FAILED, note=ev.data.get("reason"))

    def _start_due_missions(self, t: float):
        if self.active_run_id is not None:
            return
        for mission in self.missions.values():
            pol = mission.start_policy
            if pol.get("kind") == "SCHEDULED" and not self._mission_started(mission.id):
                if t >= float(pol.get("time", 0.0)):
                    self.start_run(mission.id)
                    return

    def _dispatch(self, t: float):
        """Advance the executor: next queued run, or next point of the
        active run."""
        if self.active_run_id is None and self.run_queue:
            if self.robot.mode in (RobotMode.IDLE, RobotMode.CHARGING) and not self.robot.busy:
                run = self.runs[self.run_queue.pop(0)]
                self._activate_run(run)
        run = self.runs.get(self.active_run_id) if self.active_run_id else None
        if run is None or run.state is not RunState.RUNNING or run.dispatched:
            return
        if self.robot.busy or self.robot.mode not in (RobotMode.IDLE, RobotMode.CHARGING):
            return
        mission = self.missions[run.mission_id]
        point = mission.points[run.cursor]
        try:
            path = planner.plan_path(
                self.robot.nav_grid,
                (self.robot.x, self.robot.y),
                (point.x, point.y),
            )
        except planner.NoPathError:
            out = run.outcomes[run.cursor]
            out.status = "SKIPPED"
            out.reason = "unreachable"
            self._finish_run(
                run, RunState.FAILED,
                note=f"point {point.index} unreachable from current pose",
            )
            return
        self._issue(
            MotionCommand(CommandKind.FOLLOW_PATH, {"waypoints": path}), t
        )
        self._issue(
            MotionCommand(
                CommandKind.INSPECT,
                {
                    "point_index": point.index,
                    "lift_heights": list(point.lift_heights),
                    "dwell_seconds": mission.dwell_seconds,
                    "sensors": list(point.sensors),
                },
            ),
            t,
        )
        run.dispatched = True

    # ------------------------------------------------------------------
    # ingestion and alarms

    def _on_readout(self, t: float, data: dict, run: MissionRun | None):
        readout = data["readout"]
        point_index = data.get("point_index")
        rack_id = None
        if run is not None:
            mission = self.missions[run.mission_id]
            for p in mission.points:
                if p.index == point_index:
                    rack_id = p.rack_id
                    break
        record = {
            "t": readout["t"],
            "run_id": run.run_id if run else None,
            "point_index": point_index,
            "rack_id": rack_id,
            "pose": readout["pose"],
            "lift_height": readout["lift_height"],
            "env": readout["env"],
            "led_readings": readout["led_readings"],
        }
        digest = store_mod.readout_digest(readout)
        if run is not None:
            self._run_log.setdefault(run.run_id, []).append(
                {"entry": "sensing", "t": t, "point": point_index, "digest": digest}
            )
        self.ingest_inspection(record)

    def ingest_inspection(self, record: dict) -> list[Alarm]:
        """Persist one inspection record and raise/update alarms."""
        run_id = record.get("run_id")
        if run_id is not None and run_id not in self.runs:
            raise RmsError("not_found", f"unknown run {run_id}")
        rec_id = self.store.append("inspections", record)
        record = dict(record)
        record["record_id"] = rec_id
        self.records[rec_id] = record
        run = self.runs.get(run_id)
        if run and run.cursor < len(run.outcomes):
            run.outcomes[run.cursor].records.append(rec_id)
        t = record["t"]
        raised = []
        subject_rack = record.get("rack_id") or "unknown"
        for ch, value, bound in self.thresholds.violations(record["env"]):
            raised.append(
                self._open_alarm(
                    t, AlarmKind.ENV_THRESHOLD, Severity.WARNING,
                    f"{subject_rack}:{ch}", value=value, threshold=bound,
                    record_id=rec_id, run_id=run_id,
                )
            )
        for reading in record["led_readings"]:
            observed = reading["observed"]
            if observed == LedState.ERROR.value:
                raised.append(
                    self._open_alarm(
                        t, AlarmKind.LED_ERROR, Severity.CRITICAL,
                        reading["server_id"], record_id=rec_id, run_id=run_id,
                    )
                )
            elif observed == LedState.WARNING.value:
                raised.append(
                    self._open_alarm(
                        t, AlarmKind.LED_WARNING, Severity.WARNING,
                        reading["server_id"], record_id=rec_id, run_id=run_id,
                    )
                )
        self._update_panel(record)
        self._emit("record", t, {"record_id": rec_id, "run_id": run_id,
                                 "rack_id": record.get("rack_id"),
                                 "point_index": record.get("point_index")})
        return raised

    def _open_alarm(
        self,
        t: float,
        kind: AlarmKind,
        severity: Severity,
        subject: str,
        value: float | None = None,
        threshold: float | None = None,
        record_id: int | None = None,
        run_id: str | None = None,
    ) -> Alarm:
        # duplicate suppression: update the OPEN alarm with same kind+subject
        for alarm in self.alarms.values():
            if (
                alarm.kind is kind
                and alarm.subject == subject
                and alarm.state is AlarmState.OPEN
            ):
                alarm.updated = t
                if value is not None:
                    alarm.value = value
                if record_id is not None:
                    alarm.record_ids.append(record_id)
                self._persist_alarm(alarm)
                self._emit("alarm", t, alarm.as_dict())
                return alarm
        self._alarm_seq += 1
        alarm = Alarm(
            alarm_id=f"al-{self._alarm_seq:04d}",
            kind=kind,
            severity=severity,
            subject=subject,
            created=t,
            updated=t,
            value=value,
            threshold=threshold,
            record_ids=[record_id] if record_id is not None else [],
            run_id=run_id,
        )
        self.alarms[alarm.alarm_id] = alarm
        self._persist_alarm(alarm)
        self._emit("alarm", t, alarm.as_dict())
        return alarm

    def _open_low_battery_alarm(self, t: float, frac: float):
        self._open_alarm(
            t, AlarmKind.LOW_BATTERY, Severity.WARNING, self.robot_id,
            value=round(100.0 * frac, 3),
            threshold=100.0 * self.thresholds.low_battery_frac,
            run_id=self.active_run_id,
        )

    def _persist_alarm(self, alarm: Alarm):
        d = alarm.as_dict()
        d["t"] = alarm.updated
        self.store.append("alarms", d)

    def ack_alarm(self, alarm_id: str, actor: str = "operator") -> Alarm:
        alarm = self._get_alarm(alarm_id)
        if alarm.state is AlarmState.ACKNOWLEDGED:
            return alarm  # idempotent
        if alarm.state is not AlarmState.OPEN:
            raise RmsError(
                "invalid_transition",
                f"alarm {alarm_id} is {alarm.state.value}; cannot acknowledge",
            )
        alarm.state = AlarmState.ACKNOWLEDGED
        alarm.acked_by = actor
        alarm.acked_at = self.world.t
        alarm.updated = self.world.t
        self._persist_alarm(alarm)
        self._emit("alarm", self.world.t, alarm.as_dict())
        return alarm

    def resolve_alarm(self, alarm_id: str) -> Alarm:
        alarm = self._get_alarm(alarm_id)
        if alarm.state is AlarmState.RESOLVED:
            return alarm
        alarm.state = AlarmState.RESOLVED
        alarm.updated = self.world.t
        self._persist_alarm(alarm)
        self._emit("alarm", self.world.t, alarm.as_dict())
        return alarm

    def _get_alarm(self, alarm_id: str) -> Alarm:
        if alarm_id not in self.alarms:
            raise RmsError("not_found", f"unknown alarm {alarm_id}")
        return self.alarms[alarm_id]

    def list_alarms(self, state: str | None = None) -> list[Alarm]:
        out = [
            a for a in self.alarms.values()
            if state is None or a.state.value == state
        ]
        out.sort(key=lambda a: (a.created, a.alarm_id))
        return out

    # ------------------------------------------------------------------
    # auto-charge policy

    def auto_charge_policy(self, snapshot: dict):
        """Evaluated every telemetry tick; total function, never raises."""
        frac = snapshot["battery_kwh"] / self.robot.cfg.battery_capacity_kwh
        mode = snapshot["mode"]
        t = self.world.t
        if self._charge_pending:
            # STOP issued; dock as soon as the robot has come to rest
            if not self.robot.busy and self.robot.mode in (RobotMode.IDLE,):
                self._charge_pending = False
                self._issue(MotionCommand(CommandKind.DOCK), t)
            return
        if frac >= self.thresholds.low_battery_frac:
            return
        if mode not in ("IDLE", "NAVIGATING", "INSPECTING"):
            return
        run = self.runs.get(self.active_run_id) if self.active_run_id else None
        self._open_low_battery_alarm(t, frac)
        if run is not None and run.state is RunState.RUNNING:
            run.state = RunState.PAUSED
            run.dispatched = False
            run.charging_interludes.append({"start": t, "end": None, "pct_start":
                                            round(100 * frac, 3)})
            self._charging_for = run.run_id
            self._log_run_state(run, t)
            self._emit("run", t, {"run_id": run.run_id, "state": "PAUSED",
                                  "note": "auto-charge"})
            self._issue(MotionCommand(CommandKind.STOP), t)
            self._charge_pending = True
        else:
            self._charging_for = None
            self._issue(MotionCommand(CommandKind.DOCK), t)

    def _maybe_resume_after_charge(self, t: float):
        if self.robot.mode is not RobotMode.CHARGING:
            return
        frac = self.robot.battery / self.robot.cfg.battery_capacity_kwh
        if frac < self.thresholds.resume_frac:
            return
        run = self.runs.get(self._charging_for) if self._charging_for else None
        self._charging_for = None
        self._charge_interlude_start = None
        if run is None:
            return
        if run.state is RunState.PAUSED:
            for interlude in run.charging_interludes:
                if interlude["end"] is None:
                    interlude["end"] = t
                    interlude["pct_end"] = round(100 * frac, 3)
            run.state = RunState.RUNNING
            run.dispatched = False
            self._log_run_state(run, t)
            self._emit("run", t, {"run_id": run.run_id, "state": "RUNNING",
                                  "note": "resumed-after-charge"})
        elif run.state is RunState.PENDING:
            run.state = RunState.RUNNING
            run.started = t
            self._log_run_state(run, t)
            self._emit("run", t, {"run_id": run.run_id, "state": "RUNNING"})

    # ------------------------------------------------------------------
    # panels

    def _update_panel(self, record: dict):
        rack_id = record.get("rack_id")
        by_rack: dict[str, dict] = {}
        for reading in record["led_readings"]:
            by_rack.setdefault(reading["rack_id"], {})[reading["server_id"]] = (
                reading["observed"]
            )
        touched = set(by_rack)
        if rack_id:
            touched.add(rack_id)
        for rid in touched:
            panel = self.rack_panels.setdefault(
                rid, {"rack_id": rid, "version": 0, "env": None, "servers": {},
                      "last_record_id": None, "last_t": None}
            )
            panel["version"] += 1
            panel["last_record_id"] = record["record_id"]
            panel["last_t"] = record["t"]
            if rid == rack_id:
                panel["env"] = dict(record["env"])
            panel["servers"].update(by_rack.get(rid, {}))

    def rack_panel(self, rack_id: str) -> dict:
        if rack_id not in self.world.model._racks:
            raise RmsError("not_found", f"unknown rack {rack_id}")
        panel = self.rack_panels.get(rack_id) or {
            "rack_id": rack_id, "version": 0, "env": None, "servers": {},
            "last_record_id": None, "last_t": None,
        }
        open_alarms = [
            a.as_dict() for a in self.list_alarms()
            if a.state in (AlarmState.OPEN, AlarmState.ACKNOWLEDGED)
            and (a.subject.startswith(rack_id + ":")
                 or a.subject.startswith(rack_id + "-")
                 or a.subject == rack_id)
        ]
        out = dict(panel)
        out["alarms"] = open_alarms
        return out

    # ------------------------------------------------------------------
    # reports and audit

    def generate_report(self, run_id: str) -> dict:
        run = self._get_run(run_id)
        if run.state not in TERMINAL_RUN_STATES:
            raise RmsError("run_not_terminal", f"run {run_id} is {run.state.value}")
        if run_id in self.reports:
            return self.reports[run_id]
        records = self.store.query("inspections", run_id=run_id)
        channels = {}
        for ch in ("temperature_c", "humidity_pct", "noise_db", "pm25_ugm3"):
            vals = [r["env"][ch] for r in records]
            violations = 0
            lo, hi = self.thresholds.limits.get(ch, (None, None))
            for v in vals:
                if (lo is not None and v < lo) or (hi is not None and v > hi):
                    violations += 1
            channels[ch] = {
                "min": round(min(vals), 6) if vals else None,
                "max": round(max(vals), 6) if vals else None,
                "mean": round(sum(vals) / len(vals), 6) if vals else None,
                "violations": violations,
            }
        per_rack: dict[str, dict] = {}
        for r in records:
            for reading in r["led_readings"]:
                rid = reading["rack_id"]
                row = per_rack.setdefault(
                    rid, {"rack_id": rid, "worst_led": "OK",
                          "ok_count": 0, "warning_count": 0, "error_count": 0}
                )
                obs = reading["observed"]
                row[obs.lower() + "_count"] += 1
                if LED_SEVERITY[LedState(obs)] > LED_SEVERITY[LedState(row["worst_led"])]:
                    row["worst_led"] = obs
        alarm_items = []
        for alarm in self.list_alarms():
            if alarm.run_id == run_id or any(
                rid in {rec["record_id"] for rec in records}
                for rid in alarm.record_ids
            ):
                d = alarm.as_dict()
                d["record_id"] = alarm.record_ids[0] if alarm.record_ids else None
                alarm_items.append(d)
        report = {
            "run_id": run_id,
            "mission_id": run.mission_id,
            "generated_at": self.world.t,
            "run_state": run.state.value,
            "started": run.started,
            "ended": run.ended,
            "environmental": {
                "channels": channels,
                "record_count": len(records),
            },
            "equipment": {
                "racks": sorted(per_rack.values(), key=lambda r: r["rack_id"]),
                "rack_count": len(per_rack),
            },
            "alarms": {"items": alarm_items, "count": len(alarm_items)},
        }
        return report

    def accuracy_audit(self, run_id: str) -> dict:
        from ..world import led_state

        run = self._get_run(run_id)
        if run.state not in TERMINAL_RUN_STATES:
            raise RmsError("run_not_terminal", f"run {run_id} is {run.state.value}")
        records = self.store.query("inspections", run_id=run_id)
        total = correct = 0
        for rec in records:
            for reading in rec["led_readings"]:
                truth = led_state(self.world.model, reading["server_id"], rec["t"])
                total += 1
                if reading["observed"] == truth.value:
                    correct += 1
        return {
            "run_id": run_id,
            "reads_total": total,
            "reads_correct": correct,
            "accuracy": (correct / total) if total else None,
        }

    # ------------------------------------------------------------------
    # robot log export

    def run_log_entries(self, run_id: str) -> list[dict]:
        self._get_run(run_id)
        return list(self._run_log.get(run_id, []))

    def export_robot_log(self, run_id: str) -> str:
        return store_mod.robot_log_xml(
            run_id, self.scenario_name, self.seed, self.run_log_entries(run_id)
        )
