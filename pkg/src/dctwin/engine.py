"""Simulation engine: wires world, robot, RMS, store, and twin together
and owns the fixed-dt tick loop and the simulation clock controls."""

from __future__ import annotations

import tempfile
from pathlib import Path

from .rms.core import ThresholdConfig, RunState, TERMINAL_RUN_STATES
from .rms.service import RmsService
from .robot import RobotSim
from .scenario import Scenario
from .store import Store
from .twin import KnowledgeBase, TwinController
from .world import World

TWIN_POLL_INTERVAL = 0.5


class Engine:
    def __init__(
        self,
        scenario: Scenario,
        seed: int = 42,
        store_dir: str | Path | None = None,
        thresholds_override: dict | None = None,
    ):
        self.scenario = scenario
        self.seed = seed
        self.world = World(scenario.model)
        self.dt = scenario.robot_cfg.tick
        self.robot = RobotSim(
            self.world,
            scenario.robot_cfg,
            seed=seed,
            start_pose=scenario.robot_start,
            battery_energy=scenario.robot_battery_frac
            * scenario.robot_cfg.battery_capacity_kwh,
        )
        if store_dir is None:
            self._tmpdir = tempfile.TemporaryDirectory(prefix="dctwin-")
            store_dir = self._tmpdir.name
        self.store = Store(store_dir)
        merged = dict(scenario.thresholds)
        merged.update(thresholds_override or {})
        self.rms = RmsService(
            self.world,
            self.robot,
            self.store,
            thresholds=ThresholdConfig.from_dict(merged),
            scenario_name=scenario.name,
            seed=seed,
        )
        triples = list(scenario.knowledge)
        for srv in scenario.model.servers.values():
            if srv.knowledge_key:
                triples.append((srv.id, "model", srv.knowledge_key))
        self.twin = TwinController(
            telemetry_source=self.rms.telemetry,
            event_source=self.rms.events_since,
            knowledge=KnowledgeBase(triples),
            poll_interval=TWIN_POLL_INTERVAL,
            rms=self.rms,
        )
        for mdef in scenario.missions:
            d = dict(mdef)
            d.setdefault("id", d.get("name"))
            self.rms.create_mission(d)

        self.ticks = 0
        self.t = 0.0
        self.paused = False
        self.accel = 100.0
        self._twin_last = float("-inf")

    def tick(self):
        """Advance simulated time by one dt. No-op while paused."""
        if self.paused:
            return
        self.ticks += 1
        new_t = self.ticks * self.dt
        door_changes = self.world.advance(new_t)
        events = self.robot.step(self.dt, t_start=new_t - self.dt)
        self.rms.on_tick(new_t, events, door_changes)
        if new_t - self._twin_last >= TWIN_POLL_INTERVAL - 1e-9:
            self._twin_last = new_t
            self.twin.poll_tick(new_t)
        self.t = new_t

    def run_for(self, seconds: float):
        end = self.t + seconds
        while self.t < end - 1e-9:
            self.tick()

    def start_mission(self, name: str):
        mission = None
        for m in self.rms.missions.values():
            if m.name == name or m.id == name:
                mission = m
                break
        if mission is None:
            raise KeyError(f"no mission named {name!r}")
        return self.rms.start_run(mission.id)

    def run_to_completion(self, run_id: str, max_sim_time: float = 86400.0):
        """Tick until the run reaches a terminal state (or the time cap)."""
        run = self.rms.runs[run_id]
        while run.state not in TERMINAL_RUN_STATES and self.t < max_sim_time:
            self.tick()
        return run

    def close(self):
        self.store.close()
