"""Application-layer digital-twin controller.

Polls RMS telemetry on a fixed cadence, keeps a short pose history, and
renders a smoothed pose one poll interval in the past via cubic Hermite
interpolation (finite-difference tangents, shortest-arc headings).
Mirrors per-rack tablet panels and alarms from the event stream, relays
tablet commands, and serves knowledge lookups.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field


class Health(str, enum.Enum):
    LIVE = "LIVE"
    STALE = "STALE"
    LOST = "LOST"


STALE_MISSED_INTERVALS = 2
LOST_MISSED_INTERVALS = 10


@dataclass
class PoseSample:
    t: float
    x: float
    y: float
    heading: float
    speed: float = 0.0


class PoseSampleBuffer:
    """Ring of the last K telemetry samples, strictly increasing in time."""

    def __init__(self, capacity: int = 16):
        self.capacity = capacity
        self._ring: deque[PoseSample] = deque(maxlen=capacity)

    def add(self, sample: PoseSample):
        if self._ring and sample.t <= self._ring[-1].t:
            raise ValueError("sample timestamps must be strictly increasing")
        self._ring.append(sample)

    def __len__(self):
        return len(self._ring)

    @property
    def samples(self) -> list[PoseSample]:
        return list(self._ring)

    @property
    def last(self) -> PoseSample | None:
        return self._ring[-1] if self._ring else None


def _wrap(a: float) -> float:
    while a <= -math.pi:
        a += 2 * math.pi
    while a > math.pi:
        a -= 2 * math.pi
    return a


def interpolate_pose(buffer: PoseSampleBuffer, query_time: float) -> dict:
    """Pose estimate at query_time from the sample buffer.

    Piecewise cubic Hermite between bracketing samples with
    finite-difference tangents; exact at the knots; heading follows the
    shortest arc. Outside the sampled range the nearest sample holds.
    """
    samples = buffer.samples
    if not samples:
        raise ValueError("buffer is empty")
    if len(samples) == 1 or query_time <= samples[0].t:
        s = samples[0] if query_time <= samples[0].t else samples[-1]
        return {"t": query_time, "x": s.x, "y": s.y, "heading": s.heading}
    if query_time >= samples[-1].t:
        s = samples[-1]
        return {"t": query_time, "x": s.x, "y": s.y, "heading": s.heading}
    # find bracketing pair
    k = 0
    while samples[k + 1].t < query_time:
        k += 1
    s0, s1 = samples[k], samples[k + 1]
    h = s1.t - s0.t
    u = (query_time - s0.t) / h

    def tangent(idx: int, value) -> float:
        lo = max(0, idx - 1)
        hi = min(len(samples) - 1, idx + 1)
        return (value(samples[hi]) - value(samples[lo])) / (samples[hi].t - samples[lo].t)

    def hermite(p0, p1, m0, m1):
        u2, u3 = u * u, u * u * u
        return (
            (2 * u3 - 3 * u2 + 1) * p0
            + (u3 - 2 * u2 + u) * h * m0
            + (-2 * u3 + 3 * u2) * p1
            + (u3 - u2) * h * m1
        )

    x = hermite(s0.x, s1.x, tangent(k, lambda s: s.x), tangent(k + 1, lambda s: s.x))
    y = hermite(s0.y, s1.y, tangent(k, lambda s: s.y), tangent(k + 1, lambda s: s.y))
    # heading: unwrap around s0 so the interpolation takes the shortest arc
    d_mid = _wrap(s1.heading - s0.heading)
    heading = _wrap(s0.heading + u * d_mid)
    return {"t": query_time, "x": x, "y": y, "heading": heading}


@dataclass
class KnowledgeEntry:
    subject: str
    predicate: str
    object: str

    def as_dict(self) -> dict:
        return {"subject": self.subject, "predicate": self.predicate,
                "object": self.object}


class KnowledgeBase:
    """Flat triple store with one-hop neighbor expansion on lookup."""

    def __init__(self, triples: list[tuple[str, str, str]]):
        self.triples = [KnowledgeEntry(*t) for t in triples]
        self._by_subject: dict[str, list[KnowledgeEntry]] = {}
        for e in self.triples:
            self._by_subject.setdefault(e.subject, []).append(e)

    def lookup(self, subject_id: str) -> list[KnowledgeEntry]:
        direct = list(self._by_subject.get(subject_id, []))
        seen = {(e.subject, e.predicate, e.object) for e in direct}
        out = list(direct)
        visited = {subject_id}
        for e in direct:
            if e.object in visited:
                continue
            visited.add(e.object)
            for hop in self._by_subject.get(e.object, []):
                key = (hop.subject, hop.predicate, hop.object)
                if key not in seen:
                    seen.add(key)
                    out.append(hop)
        return out


class TwinController:
    """Owns TwinState; one poll/event consumer, read-only snapshot API.

    ``telemetry_source`` returns the latest TelemetrySnapshot dict or
    raises on transport failure; ``event_source(seq)`` returns events
    with sequence numbers greater than ``seq``.
    """

    def __init__(
        self,
        telemetry_source,
        event_source,
        knowledge: KnowledgeBase | None = None,
        poll_interval: float = 0.5,
        buffer_capacity: int = 16,
        rms=None,
    ):
        self.telemetry_source = telemetry_source
        self.event_source = event_source
        self.knowledge = knowledge or KnowledgeBase([])
        self.poll_interval = poll_interval
        self.rms = rms
        self.buffer = PoseSampleBuffer(buffer_capacity)
        self.missed = 0
        self.health = Health.LIVE
        self.last_sample_t: float | None = None
        self.last_event_seq = 0
        self.panels: dict[str, dict] = {}
        self.alarms: dict[str, dict] = {}
        self.run_progress: dict = {}
        self.last_telemetry: dict | None = None
        self.lift_height = 0.0

    # -- polling ---------------------------------------------------------

    def poll_tick(self, now: float) -> dict:
        """One poll cycle; degrades health on failure, never raises."""
        try:
            snap = self.telemetry_source()
        except Exception:
            snap = None
        if snap is not None:
            self.missed = 0
            self.health = Health.LIVE
            self.last_telemetry = snap
            self.lift_height = snap.get("lift_height", 0.0)
            t = snap["t"]
            if self.last_sample_t is None or t > self.last_sample_t:
                self.buffer.add(
                    PoseSample(
                        t=t, x=snap["x"], y=snap["y"],
                        heading=snap["heading"], speed=snap.get("speed", 0.0),
                    )
                )
                self.last_sample_t = t
            try:
                events = self.event_source(self.last_event_seq)
            except Exception:
                events = []
            for ev in events:
                self.last_event_seq = max(self.last_event_seq, ev["seq"])
                self._apply_event(ev)
        else:
            self.missed += 1
            if self.missed > LOST_MISSED_INTERVALS:
                self.health = Health.LOST
            elif self.missed > STALE_MISSED_INTERVALS:
                self.health = Health.STALE
        return self.state(now)

    def _apply_event(self, ev: dict):
        kind = ev["kind"]
        payload = ev["payload"]
        if kind == "record":
            rack_id = payload.get("rack_id")
            if rack_id is None:
                return
            if self.rms is not None:
                try:
                    panel = self.rms.rack_panel(rack_id)
                except Exception:
                    return  # unknown rack: log-and-drop
                prev = self.panels.get(rack_id)
                # last-writer-wins by record timestamp
                if prev and prev.get("last_t") is not None and panel.get("last_t") is not None:
                    if panel["last_t"] < prev["last_t"]:
                        return
                version = (prev["twin_version"] + 1) if prev else 1
                panel = dict(panel)
                panel["twin_version"] = version
                self.panels[rack_id] = panel
        elif kind == "alarm":
            self.alarms[payload["alarm_id"]] = payload
            # refresh affected panels' alarm lists lazily via state()
        elif kind == "run":
            self.run_progress = payload

    # -- snapshots -------------------------------------------------------

    def smoothed_pose(self, now: float) -> dict | None:
        """Rendering-time pose: fixed one-interval interpolation delay.

        While LOST the pose freezes at the last estimate."""
        if len(self.buffer) == 0:
            return None
        query = now - self.poll_interval
        if self.health is Health.LOST and self.last_sample_t is not None:
            query = min(query, self.last_sample_t)
        return interpolate_pose(self.buffer, query)

    def state(self, now: float) -> dict:
        open_alarms = [
            a for a in self.alarms.values()
            if a["state"] in ("OPEN", "ACKNOWLEDGED")
        ]
        return {
            "t": now,
            "health": self.health.value,
            "pose": self.smoothed_pose(now),
            "lift_height": self.lift_height,
            "telemetry": self.last_telemetry,
            "open_alarms": sorted(open_alarms, key=lambda a: a["alarm_id"]),
            "run": dict(self.run_progress),
            "panel_racks": sorted(self.panels),
        }

    def rack_panel(self, rack_id: str) -> dict:
        panel = self.panels.get(rack_id)
        if panel is None and self.rms is not None:
            panel = dict(self.rms.rack_panel(rack_id))
            panel["twin_version"] = 0
        if panel is None:
            return {"rack_id": rack_id, "version": 0, "twin_version": 0,
                    "env": None, "servers": {}, "alarms": []}
        out = dict(panel)
        out["alarms"] = [
            a for a in self.alarms.values()
            if a["state"] in ("OPEN", "ACKNOWLEDGED")
            and (a["subject"] == rack_id
                 or a["subject"].startswith(rack_id + ":")
                 or a["subject"].startswith(rack_id + "-"))
        ]
        return out

    # -- commands --------------------------------------------------------

    def tablet_command(self, rack_id: str, action: str, alarm_id: str | None = None) -> dict:
        """Relay a tablet action to the RMS (ACK_ALARM or REQUEST_RECHECK)."""
        if self.rms is None:
            raise RuntimeError("no RMS attached")
        from .rms.service import RmsError

        if action == "ACK_ALARM":
            if alarm_id is None:
                raise RmsError("invalid_request", "alarm_id required for ACK_ALARM")
            alarm = self.rms.ack_alarm(alarm_id, actor=f"tablet:{rack_id}")
            return {"status": "ok", "alarm": alarm.as_dict()}
        if action == "REQUEST_RECHECK":
            point = None
            mission_dwell = 25.0
            for mission in self.rms.missions.values():
                for p in mission.points:
                    if p.rack_id == rack_id:
                        point = p
                        mission_dwell = mission.dwell_seconds
            if point is None:
                raise RmsError(
                    "no_inspection_point", f"no inspection point for rack {rack_id}"
                )
            mission = self.rms.create_mission(
                {
                    "name": f"recheck-{rack_id}",
                    "dwell_seconds": mission_dwell,
                    "points": [
                        {
                            "index": 1,
                            "x": point.x,
                            "y": point.y,
                            "rack_id": rack_id,
                            "lift_heights": list(point.lift_heights),
                            "sensors": list(point.sensors),
                        }
                    ],
                }
            )
            run = self.rms.start_run(mission.id, queue_if_busy=True)
            return {"status": "ok", "mission_id": mission.id, "run_id": run.run_id,
                    "queued": "QUEUED" in run.notes}
        raise RmsError("invalid_request", f"unknown tablet action {action}")

    def knowledge_lookup(self, subject_id: str) -> list[dict]:
        return [e.as_dict() for e in self.knowledge.lookup(subject_id)]
