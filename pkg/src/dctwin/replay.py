"""Deterministic replay of an exported robot log.

Replay rebuilds a bare world + robot (no RMS) from the scenario and the
seed recorded in the log header, feeds the logged commands back at their
recorded times, and checks that every transition and sensing entry is
reproduced exactly. Door-open requests emitted by the robot are honored
the same way the live service honors them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import store as store_mod
from .robot import CommandKind, MotionCommand, RobotSim
from .scenario import Scenario
from .world import DoorState, World


@dataclass
class ReplayResult:
    identical: bool
    compared: int
    divergence_index: int | None = None
    expected: dict | None = None
    actual: dict | None = None
    note: str = ""
    events: list = field(default_factory=list)

    def describe(self) -> str:
        if self.identical:
            return f"identical ({self.compared} log entries reproduced)"
        lines = [f"divergence at entry {self.divergence_index}"]
        lines.append(f"  expected: {self.expected}")
        lines.append(f"  actual:   {self.actual}")
        if self.note:
            lines.append(f"  {self.note}")
        return "\n".join(lines)


def replay_log(scenario: Scenario, log_text: str, seed: int | None = None) -> ReplayResult:
    """Re-run the logged commands and compare the resulting timeline.

    ``seed`` overrides the seed stored in the log, which is how replay
    divergence (a different sensor noise stream) can be demonstrated.
    """
    parsed = store_mod.parse_robot_log(log_text)
    if seed is None:
        seed = parsed["seed"]
    entries = parsed["entries"]
    commands = [e for e in entries if e["entry"] == "command"]
    expected = [e for e in entries if e["entry"] != "command"]

    world = World(scenario.model)
    robot = RobotSim(
        world,
        scenario.robot_cfg,
        seed=seed,
        start_pose=scenario.robot_start,
        battery_energy=scenario.robot_battery_frac
        * scenario.robot_cfg.battery_capacity_kwh,
    )
    dt = scenario.robot_cfg.tick
    actual: list[dict] = []
    last_t = entries[-1]["t"] if entries else 0.0

    ticks = 0
    cmd_i = 0
    t = 0.0
    # run a little past the final logged entry so trailing motion settles
    while t < last_t + 2.0 * dt:
        while cmd_i < len(commands) and commands[cmd_i]["t"] <= t + 1e-9:
            c = commands[cmd_i]
            robot.command(MotionCommand(CommandKind(c["kind"]), dict(c["params"])), t)
            cmd_i += 1
        ticks += 1
        new_t = ticks * dt
        world.advance(new_t)
        for ev in robot.step(dt, t_start=new_t - dt):
            if ev.kind == "MODE_CHANGE":
                actual.append(
                    {
                        "entry": "transition", "t": ev.t, "from": ev.data["from"],
                        "to": ev.data["to"], "x": ev.data["x"], "y": ev.data["y"],
                        "heading": ev.data["heading"],
                    }
                )
            elif ev.kind == "SENSOR_READOUT":
                actual.append(
                    {
                        "entry": "sensing", "t": ev.t,
                        "point": ev.data.get("point_index"),
                        "digest": store_mod.readout_digest(ev.data["readout"]),
                    }
                )
            elif ev.kind == "DOOR_REQUEST":
                world.actuate_door(ev.data["door_id"], DoorState.OPEN)
        t = new_t

    # the log covers the run window only, so the replay timeline may end
    # with extra transitions (e.g. the final return to IDLE); the logged
    # entries must be an exact prefix of what the replay produced
    for i, exp in enumerate(expected):
        if i >= len(actual):
            return ReplayResult(
                False, i, divergence_index=i, expected=exp, actual=None,
                note="replay produced fewer entries than the log",
            )
        if actual[i] != exp:
            return ReplayResult(
                False, i, divergence_index=i, expected=exp, actual=actual[i]
            )
    return ReplayResult(True, len(expected))
