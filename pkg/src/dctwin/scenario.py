"""Scenario documents: the declarative world description that seeds a
deterministic simulation.

A scenario is a single YAML file holding floor geometry, the rack table,
doors, charging stations, heat sources, ambient values, the fault
schedule, calibration constants, robot parameters, thresholds, shipped
missions, and knowledge triples. ``scenarios/dc140.yaml`` is the
normative example.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from .robot import RobotConfig
from .world import (
    Ambient,
    ChargingStation,
    DataCenterModel,
    Door,
    DoorState,
    EnvZone,
    FaultEvent,
    HeatSource,
    LedState,
    ModelError,
    Rack,
    ServerUnit,
)


class ScenarioError(Exception):
    pass


@dataclass
class Scenario:
    name: str
    model: DataCenterModel
    robot_cfg: RobotConfig
    robot_start: tuple[float, float, float] = (1.0, 1.0, 0.0)
    robot_battery_frac: float = 1.0
    thresholds: dict = field(default_factory=dict)
    missions: list[dict] = field(default_factory=list)
    knowledge: list[tuple[str, str, str]] = field(default_factory=list)

    def mission_by_name(self, name: str) -> dict:
        for m in self.missions:
            if m.get("name") == name or m.get("id") == name:
                return m
        raise ScenarioError(f"scenario has no mission named {name!r}")


def _build_servers(rack_id: str, raw_rack: dict, defaults: dict) -> tuple:
    if "servers" in raw_rack:
        out = []
        for s in raw_rack["servers"]:
            out.append(
                ServerUnit(
                    id=s["id"],
                    rack_id=rack_id,
                    slot_start=int(s["slot_start"]),
                    slot_height=int(s["slot_height"]),
                    nominal_led=LedState(s.get("led", "OK")),
                    knowledge_key=s.get("knowledge_key", ""),
                )
            )
        return tuple(out)
    count = int(defaults.get("servers_per_rack", 8))
    height = int(defaults.get("server_height_u", 5))
    key = defaults.get("knowledge_key", "srv-model-a")
    return tuple(
        ServerUnit(
            id=f"{rack_id}-S{i + 1}",
            rack_id=rack_id,
            slot_start=1 + i * height,
            slot_height=height,
            nominal_led=LedState.OK,
            knowledge_key=key,
        )
        for i in range(count)
    )


def from_dict(doc: dict) -> Scenario:
    try:
        floor = doc["floor"]
        defaults = doc.get("rack_defaults", {})
        racks = []
        for raw in doc.get("racks", []):
            rid = raw["id"]
            racks.append(
                Rack(
                    id=rid,
                    x=float(raw["x"]),
                    y=float(raw["y"]),
                    heading=float(raw.get("heading", 0.0)),
                    width=float(raw.get("width", defaults.get("width", 0.6))),
                    depth=float(raw.get("depth", defaults.get("depth", 1.1))),
                    u_slots=int(raw.get("u_slots", defaults.get("u_slots", 42))),
                    servers=_build_servers(rid, raw, defaults),
                )
            )
        doors = [
            Door(
                id=d["id"],
                x1=float(d["x1"]), y1=float(d["y1"]),
                x2=float(d["x2"]), y2=float(d["y2"]),
                state=DoorState(d.get("state", "OPEN")),
                actuation_delay=float(d.get("actuation_delay", 2.0)),
            )
            for d in doc.get("doors", [])
        ]
        stations = [
            ChargingStation(
                id=s["id"], x=float(s["x"]), y=float(s["y"]),
                heading=float(s.get("heading", 0.0)),
            )
            for s in doc.get("charging_stations", [])
        ]
        sources = [
            HeatSource(x=float(h["x"]), y=float(h["y"]), power=float(h["power"]))
            for h in doc.get("heat_sources", [])
        ]
        zones = [
            EnvZone(
                channel=z["channel"],
                x0=float(z["x0"]), y0=float(z["y0"]),
                x1=float(z["x1"]), y1=float(z["y1"]),
                delta=float(z["delta"]),
            )
            for z in doc.get("env_zones", [])
        ]
        faults = [
            FaultEvent(
                server_id=f["server_id"],
                start_time=float(f["start"]),
                end_time=float(f["end"]),
                led=LedState(f.get("led", "ERROR")),
            )
            for f in doc.get("fault_schedule", [])
        ]
        amb = doc.get("ambient", {})
        calib = doc.get("calibration", {})
        model = DataCenterModel(
            floor_width=float(floor["width"]),
            floor_depth=float(floor["depth"]),
            cell_size=float(doc.get("cell_size", 0.25)),
            racks=racks,
            doors=doors,
            charging_stations=stations,
            heat_sources=sources,
            ambient=Ambient(
                temperature_c=float(amb.get("temperature_c", 22.0)),
                humidity_pct=float(amb.get("humidity_pct", 45.0)),
                noise_db=float(amb.get("noise_db", 60.0)),
                pm25_ugm3=float(amb.get("pm25_ugm3", 8.0)),
            ),
            env_zones=zones,
            fault_schedule=faults,
            heat_k=float(calib.get("heat_k", 0.02)),
            heat_sigma=float(calib.get("heat_sigma", 1.5)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed scenario document: {exc}") from exc

    violations = model.validate()
    if violations:
        raise ModelError(violations)

    robot_raw = dict(doc.get("robot", {}))
    start = robot_raw.pop("start", {})
    battery_frac = float(robot_raw.pop("battery_frac", 1.0))
    sensors = doc.get("sensors", {})
    robot_raw.setdefault("p_misread", sensors.get("p_misread", 0.01))
    robot_raw.setdefault("sigma_temp", sensors.get("sigma_temp", 0.2))
    robot_raw.setdefault("sigma_hum", sensors.get("sigma_hum", 1.0))
    robot_raw.setdefault("sensor_range", sensors.get("range", 1.2))
    cfg = RobotConfig.from_dict(robot_raw)

    knowledge = [tuple(t) for t in doc.get("knowledge", [])]
    return Scenario(
        name=doc.get("name", "scenario"),
        model=model,
        robot_cfg=cfg,
        robot_start=(
            float(start.get("x", 1.0)),
            float(start.get("y", 1.0)),
            float(start.get("heading", 0.0)),
        ),
        robot_battery_frac=battery_frac,
        thresholds=dict(doc.get("thresholds", {})),
        missions=list(doc.get("missions", [])),
        knowledge=knowledge,
    )


def to_dict(sc: Scenario) -> dict:
    """Canonical document form; load(to_dict(load(x))) is a fixed point."""
    m = sc.model
    doc = {
        "name": sc.name,
        "floor": {"width": m.floor_width, "depth": m.floor_depth},
        "cell_size": m.cell_size,
        "calibration": {"heat_k": m.heat_k, "heat_sigma": m.heat_sigma},
        "ambient": {
            "temperature_c": m.ambient.temperature_c,
            "humidity_pct": m.ambient.humidity_pct,
            "noise_db": m.ambient.noise_db,
            "pm25_ugm3": m.ambient.pm25_ugm3,
        },
        "robot": {
            "start": {"x": sc.robot_start[0], "y": sc.robot_start[1],
                      "heading": sc.robot_start[2]},
            "battery_frac": sc.robot_battery_frac,
            "max_speed": sc.robot_cfg.max_speed,
            "max_accel": sc.robot_cfg.max_accel,
            "max_yaw_rate": sc.robot_cfg.max_yaw_rate,
            "lift_speed": sc.robot_cfg.lift_speed,
            "idle_load_factor": sc.robot_cfg.idle_load_factor,
        },
        "sensors": {
            "p_misread": sc.robot_cfg.p_misread,
            "sigma_temp": sc.robot_cfg.sigma_temp,
            "sigma_hum": sc.robot_cfg.sigma_hum,
            "range": sc.robot_cfg.sensor_range,
        },
        "racks": [
            {
                "id": r.id, "x": r.x, "y": r.y, "heading": r.heading,
                "width": r.width, "depth": r.depth, "u_slots": r.u_slots,
                "servers": [
                    {
                        "id": s.id, "slot_start": s.slot_start,
                        "slot_height": s.slot_height, "led": s.nominal_led.value,
                        "knowledge_key": s.knowledge_key,
                    }
                    for s in r.servers
                ],
            }
            for r in m.racks
        ],
        "doors": [
            {
                "id": d.id, "x1": d.x1, "y1": d.y1, "x2": d.x2, "y2": d.y2,
                "state": d.state.value, "actuation_delay": d.actuation_delay,
            }
            for d in m.doors
        ],
        "charging_stations": [
            {"id": s.id, "x": s.x, "y": s.y, "heading": s.heading}
            for s in m.charging_stations
        ],
        "heat_sources": [
            {"x": h.x, "y": h.y, "power": h.power} for h in m.heat_sources
        ],
        "env_zones": [
            {"channel": z.channel, "x0": z.x0, "y0": z.y0, "x1": z.x1,
             "y1": z.y1, "delta": z.delta}
            for z in m.env_zones
        ],
        "fault_schedule": [
            {"server_id": f.server_id, "start": f.start_time, "end": f.end_time,
             "led": f.led.value}
            for f in m.fault_schedule
        ],
        "thresholds": dict(sc.thresholds),
        "missions": [dict(mi) for mi in sc.missions],
        "knowledge": [list(t) for t in sc.knowledge],
    }
    return doc


def loads(text: str) -> Scenario:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"scenario parse failure: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a mapping")
    return from_dict(doc)


def dumps(sc: Scenario) -> str:
    return yaml.safe_dump(to_dict(sc), sort_keys=False, default_flow_style=None)


def find_scenario(path_or_name: str) -> Path:
    """Resolve a scenario path: literal path, DCS_SCENARIO_DIR, or shipped."""
    p = Path(path_or_name)
    if p.exists():
        return p
    candidates = []
    env_dir = os.environ.get("DCS_SCENARIO_DIR")
    if env_dir:
        candidates.append(Path(env_dir) / path_or_name)
        candidates.append(Path(env_dir) / f"{path_or_name}.yaml")
    shipped = resources.files("dctwin") / "scenarios"
    candidates.append(Path(str(shipped / path_or_name)))
    candidates.append(Path(str(shipped / f"{path_or_name}.yaml")))
    for c in candidates:
        if c.exists():
            return c
    raise ScenarioError(f"scenario not found: {path_or_name}")


def load(path_or_name: str) -> Scenario:
    return loads(find_scenario(path_or_name).read_text())
