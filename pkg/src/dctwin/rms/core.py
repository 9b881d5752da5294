"""Service-layer domain types: missions, runs, alarms, thresholds."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class RunState(str, enum.Enum):
    PENDING = "PENDING"
    RUNNING = "RUNNING"
    PAUSED = "PAUSED"
    COMPLETED = "COMPLETED"
    ABORTED = "ABORTED"
    FAILED = "FAILED"


TERMINAL_RUN_STATES = {RunState.COMPLETED, RunState.ABORTED, RunState.FAILED}


class AlarmKind(str, enum.Enum):
    ENV_THRESHOLD = "ENV_THRESHOLD"
    LED_ERROR = "LED_ERROR"
    LED_WARNING = "LED_WARNING"
    ROBOT_FAULT = "ROBOT_FAULT"
    LOW_BATTERY = "LOW_BATTERY"


class Severity(str, enum.Enum):
    INFO = "INFO"
    WARNING = "WARNING"
    CRITICAL = "CRITICAL"


class AlarmState(str, enum.Enum):
    OPEN = "OPEN"
    ACKNOWLEDGED = "ACKNOWLEDGED"
    RESOLVED = "RESOLVED"


@dataclass
class InspectionPoint:
    index: int
    x: float
    y: float
    rack_id: str | None = None
    lift_heights: list[float] = field(default_factory=lambda: [0.5, 1.5])
    sensors: list[str] = field(default_factory=lambda: ["ENV", "LED"])

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "x": self.x,
            "y": self.y,
            "rack_id": self.rack_id,
            "lift_heights": list(self.lift_heights),
            "sensors": list(self.sensors),
        }


@dataclass
class Mission:
    id: str
    name: str
    points: list[InspectionPoint]
    dwell_seconds: float = 25.0
    start_policy: dict = field(default_factory=lambda: {"kind": "MANUAL"})

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "dwell_seconds": self.dwell_seconds,
            "start_policy": dict(self.start_policy),
            "points": [p.as_dict() for p in self.points],
        }


@dataclass
class PointOutcome:
    index: int
    status: str = "PENDING"  # PENDING | DONE | SKIPPED
    arrival_time: float | None = None
    records: list[int] = field(default_factory=list)
    reason: str | None = None

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "status": self.status,
            "arrival_time": self.arrival_time,
            "records": list(self.records),
            "reason": self.reason,
        }


@dataclass
class MissionRun:
    run_id: str
    mission_id: str
    state: RunState = RunState.PENDING
    outcomes: list[PointOutcome] = field(default_factory=list)
    charging_interludes: list[dict] = field(default_factory=list)
    started: float | None = None
    ended: float | None = None
    notes: list[str] = field(default_factory=list)
    cursor: int = 0          # index into outcomes of the point being worked
    dispatched: bool = False

    def as_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "mission_id": self.mission_id,
            "state": self.state.value,
            "started": self.started,
            "ended": self.ended,
            "notes": list(self.notes),
            "charging_interludes": [dict(c) for c in self.charging_interludes],
            "outcomes": [o.as_dict() for o in self.outcomes],
        }


@dataclass
class Alarm:
    alarm_id: str
    kind: AlarmKind
    severity: Severity
    subject: str
    created: float
    updated: float
    state: AlarmState = AlarmState.OPEN
    value: float | None = None
    threshold: float | None = None
    record_ids: list[int] = field(default_factory=list)
    run_id: str | None = None
    acked_by: str | None = None
    acked_at: float | None = None

    def as_dict(self) -> dict:
        return {
            "alarm_id": self.alarm_id,
            "kind": self.kind.value,
            "severity": self.severity.value,
            "subject": self.subject,
            "state": self.state.value,
            "created": self.created,
            "updated": self.updated,
            "value": self.value,
            "threshold": self.threshold,
            "record_ids": list(self.record_ids),
            "run_id": self.run_id,
            "acked_by": self.acked_by,
            "acked_at": self.acked_at,
        }


_DEFAULT_LIMITS = {
    "temperature_c": (15.0, 30.0),
    "humidity_pct": (30.0, 70.0),
    "noise_db": (None, 75.0),
    "pm25_ugm3": (None, 35.0),
}


@dataclass(frozen=True)
class ThresholdConfig:
    limits: dict = field(default_factory=lambda: dict(_DEFAULT_LIMITS))
    low_battery_frac: float = 0.25
    resume_frac: float = 0.80

    def __post_init__(self):
        for ch, (lo, hi) in self.limits.items():
            if lo is not None and hi is not None and lo >= hi:
                raise ValueError(f"threshold for {ch}: low must be < high")
        if not (0.0 < self.low_battery_frac < 1.0):
            raise ValueError("low_battery_frac must be in (0, 1)")

    @classmethod
    def from_dict(cls, d: dict | None) -> "ThresholdConfig":
        if not d:
            return cls()
        limits = dict(_DEFAULT_LIMITS)
        for ch in limits:
            if ch in d:
                lo, hi = d[ch]
                limits[ch] = (lo, hi)
        return cls(
            limits=limits,
            low_battery_frac=d.get("low_battery", 0.25),
            resume_frac=d.get("resume", 0.80),
        )

    def violations(self, env: dict) -> list[tuple[str, float, float]]:
        """(channel, value, violated bound) for every out-of-range channel."""
        out = []
        for ch, (lo, hi) in self.limits.items():
            v = env.get(ch)
            if v is None:
                continue
            if lo is not None and v < lo:
                out.append((ch, v, lo))
            elif hi is not None and v > hi:
                out.append((ch, v, hi))
        return out
