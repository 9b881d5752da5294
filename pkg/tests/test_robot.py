"""Robot simulator: trapezoidal motion, rotation/lift limits, battery
laws, door handling, jog, dock, estop, and the sensor model."""

import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from dctwin.robot import (
    CommandError,
    CommandKind,
    FULL_LOAD_MODES,
    MotionCommand,
    RobotConfig,
    RobotMode,
    RobotSim,
    battery_step,
    read_sensors,
    split_legs,
    trapezoid_time,
)
from dctwin.world import DataCenterModel, DoorState, World

from conftest import make_small_scenario

CFG = RobotConfig()
DT = CFG.tick


def empty_world(width=20.0, depth=20.0):
    return World(DataCenterModel(floor_width=width, floor_depth=depth))


def run_until(robot, world, predicate, max_t=600.0, on_event=None):
    """Tick the pair until predicate(events) returns a value or time runs
    out; returns (value, t)."""
    ticks = 0
    while ticks * DT < max_t:
        ticks += 1
        new_t = ticks * DT
        world.advance(new_t)
        events = robot.step(DT, t_start=new_t - DT)
        if on_event:
            for ev in events:
                on_event(ev)
        val = predicate(events)
        if val is not None:
            return val, new_t
    raise AssertionError(f"condition not reached within {max_t} s")


def find_event(kind):
    def pred(events):
        for ev in events:
            if ev.kind == kind:
                return ev
        return None
    return pred


class TestTrapezoidOracle:
    def test_long_leg_closed_form(self):
        # [DERIVED] L >= vmax^2/a: t = L/v + v/a = 20/1.5 + 1.5/0.3
        assert trapezoid_time(20.0, 1.5, 0.3) == pytest.approx(20.0 / 1.5 + 5.0)

    def test_short_leg_closed_form(self):
        # [DERIVED] triangular profile: t = 2*sqrt(L/a) = 2*sqrt(20)
        assert trapezoid_time(6.0, 1.5, 0.3) == pytest.approx(2.0 * math.sqrt(20.0))

    def test_boundary_length_continuous(self):
        crit = 1.5 * 1.5 / 0.3
        below = trapezoid_time(crit - 1e-9, 1.5, 0.3)
        above = trapezoid_time(crit + 1e-9, 1.5, 0.3)
        assert below == pytest.approx(above, abs=1e-6)

    def test_zero_length(self):
        assert trapezoid_time(0.0, 1.5, 0.3) == 0.0

    def test_sim_matches_closed_form_long(self):
        w = empty_world()
        r = RobotSim(w, CFG, start_pose=(2.0, 2.0, 0.0))
        r.command(MotionCommand(CommandKind.FOLLOW_PATH,
                                {"waypoints": [(2.0, 2.0), (16.0, 2.0)]}), 0.0)
        ev, _ = run_until(r, w, find_event("PATH_DONE"))
        assert ev.t == pytest.approx(trapezoid_time(14.0, 1.5, 0.3), abs=1e-6)
        assert (r.x, r.y) == (16.0, 2.0)

    def test_sim_matches_closed_form_short(self):
        w = empty_world()
        r = RobotSim(w, CFG, start_pose=(2.0, 2.0, 0.0))
        r.command(MotionCommand(CommandKind.FOLLOW_PATH,
                                {"waypoints": [(2.0, 2.0), (8.0, 2.0)]}), 0.0)
        ev, _ = run_until(r, w, find_event("PATH_DONE"))
        assert ev.t == pytest.approx(trapezoid_time(6.0, 1.5, 0.3), abs=1e-6)

    def test_stop_and_rotate_kink(self):
        # 90 degree corner: two legs plus a quarter-turn at 1 rad/s
        w = empty_world()
        r = RobotSim(w, CFG, start_pose=(2.0, 2.0, 0.0))
        r.command(MotionCommand(CommandKind.FOLLOW_PATH,
                                {"waypoints": [(2.0, 2.0), (10.0, 2.0), (10.0, 10.0)]}), 0.0)
        ev, _ = run_until(r, w, find_event("PATH_DONE"))
        expected = 2.0 * trapezoid_time(8.0, 1.5, 0.3) + (math.pi / 2.0)
        assert ev.t == pytest.approx(expected, abs=1e-6)

    def test_shallow_kink_keeps_rolling(self):
        # 26.6 degree bend (< 30): one leg, no intermediate stop
        w = empty_world()
        r = RobotSim(w, CFG, start_pose=(2.0, 2.0, 0.0))
        pts = [(2.0, 2.0), (10.0, 2.0), (18.0, 6.0)]
        r.command(MotionCommand(CommandKind.FOLLOW_PATH, {"waypoints": pts}), 0.0)
        ev, _ = run_until(r, w, find_event("PATH_DONE"))
        L = 8.0 + math.hypot(8.0, 4.0)
        assert ev.t == pytest.approx(trapezoid_time(L, 1.5, 0.3), abs=1e-6)

    def test_initial_rotation_billed(self):
        # facing +x, path goes -x: pi seconds of rotation first
        w = empty_world()
        r = RobotSim(w, CFG, start_pose=(16.0, 2.0, 0.0))
        r.command(MotionCommand(CommandKind.FOLLOW_PATH,
                                {"waypoints": [(16.0, 2.0), (2.0, 2.0)]}), 0.0)
        ev, _ = run_until(r, w, find_event("PATH_DONE"))
        assert ev.t == pytest.approx(math.pi + trapezoid_time(14.0, 1.5, 0.3), abs=1e-6)


class TestSplitLegs:
    def test_no_kink_single_leg(self):
        legs = split_legs([(0, 0), (1, 0), (2, 0.1)], math.radians(30))
        assert len(legs) == 1

    def test_sharp_kink_splits(self):
        legs = split_legs([(0, 0), (1, 0), (1, 1)], math.radians(30))
        assert len(legs) == 2
        assert legs[0] == [(0, 0), (1, 0)]
        assert legs[1] == [(1, 0), (1, 1)]

    def test_short_input(self):
        assert split_legs([(0, 0)], math.radians(30)) == []


class TestMotionLimits:
    def _drive_random_mission(self, seed):
        rng = random.Random(seed)
        w = empty_world()
        r = RobotSim(w, CFG, start_pose=(2.0, 2.0, 0.0))
        pts = [(2.0, 2.0)]
        for _ in range(rng.randint(1, 4)):
            pts.append((rng.uniform(1.0, 19.0), rng.uniform(1.0, 19.0)))
        r.command(MotionCommand(CommandKind.FOLLOW_PATH, {"waypoints": pts}), 0.0)
        max_v = 0.0
        max_dv = 0.0
        max_yaw_in_place = 0.0
        max_jump_rolling = 0.0
        prev_v, prev_h = r.v, r.heading
        ticks = 0
        while (r.busy or r.mode is not RobotMode.IDLE) and ticks < 8000:
            ticks += 1
            w.advance(ticks * DT)
            r.step(DT, t_start=(ticks - 1) * DT)
            max_v = max(max_v, r.v)
            max_dv = max(max_dv, abs(r.v - prev_v))
            dh = abs(math.remainder(r.heading - prev_h, 2.0 * math.pi))
            if prev_v <= 1e-9 and r.v <= 1e-9:
                max_yaw_in_place = max(max_yaw_in_place, dh / DT)
            else:
                max_jump_rolling = max(max_jump_rolling, dh)
            prev_v, prev_h = r.v, r.heading
        assert not r.busy
        return max_v, max_dv / DT, max_yaw_in_place, max_jump_rolling

    def test_limits_respected_over_random_missions(self):
        for seed in range(25):
            v, acc, yaw, jump = self._drive_random_mission(seed)
            assert v <= CFG.max_speed + 1e-9
            assert acc <= CFG.max_accel + 1e-6
            # in-place rotation is rate limited; while rolling the heading
            # tracks the path tangent and may bend up to the 30 degree
            # keep-rolling threshold at a waypoint
            assert yaw <= CFG.max_yaw_rate + 1e-6
            assert jump <= math.radians(30.0) + CFG.max_yaw_rate * DT + 1e-6

    def test_lift_rate_limited(self):
        w = empty_world()
        r = RobotSim(w, CFG)
        r.command(MotionCommand(CommandKind.SET_LIFT, {"height": 2.4}), 0.0)
        prev = r.lift_height
        ev, t = run_until(r, w, find_event("LIFT_DONE"), max_t=30.0)
        assert ev.t == pytest.approx(2.4 / 0.15, abs=1e-6)  # [DERIVED] 16 s
        assert r.lift_height == 2.4

    def test_lift_target_out_of_range_rejected(self):
        r = RobotSim(empty_world(), CFG)
        with pytest.raises(CommandError):
            r.command(MotionCommand(CommandKind.SET_LIFT, {"height": 3.0}), 0.0)
        with pytest.raises(CommandError):
            r.command(MotionCommand(CommandKind.SET_LIFT, {"height": -0.1}), 0.0)


class TestBattery:
    def test_full_load_six_hour_drain(self):
        # [PAPER] 6 h endurance at full load from a 1.56 kWh pack
        e = battery_step(1.56, 6 * 3600.0, RobotMode.NAVIGATING, CFG)
        assert e == pytest.approx(0.0, abs=1e-12)

    def test_idle_load_factor(self):
        # idle burns 15% of full load: 1 h costs 0.26 * 0.15 kWh
        e = battery_step(1.56, 3600.0, RobotMode.IDLE, CFG)
        assert e == pytest.approx(1.56 - 0.26 * 0.15, abs=1e-12)

    def test_charge_rate_and_cap(self):
        # [PAPER] 40% -> 100% in exactly one hour
        e = battery_step(0.4 * 1.56, 3600.0, RobotMode.CHARGING, CFG)
        assert e == pytest.approx(1.56, abs=1e-12)
        assert battery_step(1.56, 100.0, RobotMode.CHARGING, CFG) == 1.56

    def test_estop_consumes_nothing(self):
        assert battery_step(1.0, 3600.0, RobotMode.ESTOPPED, CFG) == 1.0

    def test_floor_at_zero(self):
        assert battery_step(0.001, 3600.0, RobotMode.DOCKING, CFG) == 0.0

    def test_tick_integration_matches_single_step(self):
        # integration is linear: many small steps equal one big step
        e = 1.2
        for _ in range(1000):
            e = battery_step(e, 3.6, RobotMode.INSPECTING, CFG)
        assert e == pytest.approx(battery_step(1.2, 3600.0, RobotMode.INSPECTING, CFG),
                                  abs=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(e=st.floats(0.0, 1.56), dt=st.floats(0.01, 3600.0),
           mode=st.sampled_from(list(RobotMode)))
    def test_battery_stays_in_bounds(self, e, dt, mode):
        out = battery_step(e, dt, mode, CFG)
        assert 0.0 <= out <= CFG.battery_capacity_kwh
        if mode in FULL_LOAD_MODES:
            assert out <= e

    def test_depletion_forces_estop(self):
        w = empty_world()
        r = RobotSim(w, CFG, start_pose=(2.0, 2.0, 0.0),
                     battery_energy=1e-6)
        r.command(MotionCommand(CommandKind.FOLLOW_PATH,
                                {"waypoints": [(2.0, 2.0), (16.0, 2.0)]}), 0.0)
        ev, _ = run_until(r, w, find_event("FAULT"), max_t=10.0)
        assert ev.data["reason"] == "battery depleted"
        assert r.mode is RobotMode.ESTOPPED
        assert r.battery == 0.0


class TestDoors:
    def test_hold_request_resume_at_closed_door(self, small_scenario):
        w = World(small_scenario.model)
        r = RobotSim(w, small_scenario.robot_cfg, start_pose=(6.0, 6.0, math.pi / 2))
        r.command(MotionCommand(CommandKind.FOLLOW_PATH,
                                {"waypoints": [(6.0, 6.0), (6.0, 9.5)]}), 0.0)
        ev, t_req = run_until(r, w, find_event("DOOR_REQUEST"), max_t=30.0)
        assert ev.data["door_id"] == "d1"
        # holding at the standoff distance before the crossing
        assert r.y == pytest.approx(8.0 - 0.4, abs=1e-6)
        assert r.v == 0.0
        w.actuate_door("d1", DoorState.OPEN)
        ev, _ = run_until(r, w, find_event("PATH_DONE"), max_t=60.0)
        assert r.y == pytest.approx(9.5)

    def test_open_door_no_hold(self, small_scenario):
        w = World(small_scenario.model)
        w.actuate_door("d1", DoorState.OPEN)
        w.advance(2.5)
        r = RobotSim(w, small_scenario.robot_cfg, start_pose=(6.0, 6.0, math.pi / 2))
        r.command(MotionCommand(CommandKind.FOLLOW_PATH,
                                {"waypoints": [(6.0, 6.0), (6.0, 9.5)]}), 2.5)
        ticks = 50
        events = []
        while ticks * DT < 30.0:
            ticks += 1
            w.advance(ticks * DT)
            events += r.step(DT, t_start=(ticks - 1) * DT)
            if any(e.kind == "PATH_DONE" for e in events):
                break
        assert not any(e.kind == "DOOR_REQUEST" for e in events)
        assert any(e.kind == "PATH_DONE" for e in events)


class TestJogAndStop:
    def test_jog_ramps_and_moves(self):
        w = empty_world()
        r = RobotSim(w, CFG, start_pose=(2.0, 2.0, 0.0))
        r.command(MotionCommand(CommandKind.JOG, {"linear": 0.5, "angular": 0.0}), 0.0)
        for k in range(40):  # 2 s
            w.advance((k + 1) * DT)
            r.step(DT, t_start=k * DT)
        assert r.mode is RobotMode.JOGGING
        assert r.v == pytest.approx(0.5, abs=1e-9)
        # ramp-then-cruise distance; tick integration is within one tick
        assert r.x - 2.0 == pytest.approx(0.5833, abs=0.03)

    def test_jog_rate_limits_enforced(self):
        r = RobotSim(empty_world(), CFG)
        with pytest.raises(CommandError):
            r.command(MotionCommand(CommandKind.JOG, {"linear": 2.0}), 0.0)
        with pytest.raises(CommandError):
            r.command(MotionCommand(CommandKind.JOG, {"linear": 0.5, "angular": 1.5}), 0.0)
        with pytest.raises(CommandError):
            r.command(MotionCommand(CommandKind.JOG, {"linear": -0.5}), 0.0)

    def test_jog_bump_stops_at_obstacle(self, small_scenario):
        w = World(small_scenario.model)
        r = RobotSim(w, small_scenario.robot_cfg, start_pose=(2.0, 5.0, 0.0))
        r.command(MotionCommand(CommandKind.JOG, {"linear": 1.0, "angular": 0.0}), 0.0)
        ev, _ = run_until(r, w, find_event("BUMP"), max_t=30.0)
        assert r.v == 0.0
        # never inside the inflated footprint of rack R1
        assert r.collision_grid().free_at(r.x, r.y)

    def test_stop_decelerates_with_limit(self):
        w = empty_world()
        r = RobotSim(w, CFG, start_pose=(2.0, 2.0, 0.0))
        r.command(MotionCommand(CommandKind.FOLLOW_PATH,
                                {"waypoints": [(2.0, 2.0), (18.0, 2.0)]}), 0.0)
        ticks = 0
        while r.v < 1.49:
            ticks += 1
            w.advance(ticks * DT)
            r.step(DT, t_start=(ticks - 1) * DT)
        v0, x0 = r.v, r.x
        r.command(MotionCommand(CommandKind.STOP), ticks * DT)
        _, t_idle = run_until(
            r, w,
            lambda evs: True if (not r.busy and r.v == 0.0) else None,
            max_t=30.0,
        )
        # braking distance v^2 / (2a)
        assert r.x - x0 == pytest.approx(v0 * v0 / 0.6, abs=0.01)

    def test_jog_rejected_while_path_active(self):
        w = empty_world()
        r = RobotSim(w, CFG, start_pose=(2.0, 2.0, 0.0))
        r.command(MotionCommand(CommandKind.FOLLOW_PATH,
                                {"waypoints": [(2.0, 2.0), (16.0, 2.0)]}), 0.0)
        with pytest.raises(CommandError):
            r.command(MotionCommand(CommandKind.JOG, {"linear": 0.5}), 0.0)


class TestDockAndEstop:
    def test_dock_drives_to_station_and_charges(self, small_scenario):
        w = World(small_scenario.model)
        r = RobotSim(w, small_scenario.robot_cfg, start_pose=(3.0, 2.0, 0.0),
                     battery_energy=0.5 * 1.56)
        r.command(MotionCommand(CommandKind.DOCK), 0.0)
        ev, _ = run_until(r, w, find_event("DOCKED"), max_t=60.0)
        assert ev.data["station_id"] == "cs1"
        assert r.mode is RobotMode.CHARGING
        assert math.hypot(r.x - 1.0, r.y - 1.0) < 0.05
        assert r.heading == pytest.approx(0.0, abs=1e-9)
        b0 = r.battery
        for k in range(20):
            w.advance(60.0 + (k + 1) * DT)
            r.step(DT)
        assert r.battery > b0

    def test_dock_without_station_faults(self):
        w = empty_world()
        r = RobotSim(w, CFG)
        r.command(MotionCommand(CommandKind.DOCK), 0.0)
        ev, _ = run_until(r, w, find_event("FAULT"), max_t=1.0)
        assert "station" in ev.data["reason"]

    def test_estop_halts_and_blocks_commands(self):
        w = empty_world()
        r = RobotSim(w, CFG, start_pose=(2.0, 2.0, 0.0))
        r.command(MotionCommand(CommandKind.FOLLOW_PATH,
                                {"waypoints": [(2.0, 2.0), (16.0, 2.0)]}), 0.0)
        for k in range(20):
            w.advance((k + 1) * DT)
            r.step(DT, t_start=k * DT)
        r.command(MotionCommand(CommandKind.ESTOP), 1.0)
        assert r.mode is RobotMode.ESTOPPED
        with pytest.raises(CommandError):
            r.command(MotionCommand(CommandKind.FOLLOW_PATH,
                                    {"waypoints": [(2.0, 2.0), (3.0, 2.0)]}), 1.0)


class TestSensors:
    def _standing_robot(self, p_misread, seed=42):
        sc = make_small_scenario()
        cfg = RobotConfig(p_misread=p_misread, sigma_temp=sc.robot_cfg.sigma_temp,
                          sigma_hum=sc.robot_cfg.sigma_hum)
        w = World(sc.model)
        r = RobotSim(w, cfg, seed=seed, start_pose=(5.3, 5.0, math.pi))
        return sc, w, r

    def test_zero_misread_is_exact(self):
        _, w, r = self._standing_robot(0.0)
        out = read_sensors(w, (5.3, 5.0, math.pi), 0.5, {"sensors": ["LED"]},
                           r.rng, r.cfg, t=0.0)
        obs = {rd["server_id"]: rd["observed"] for rd in out["led_readings"]}
        assert obs == {"R1-S1": "OK", "R1-S2": "ERROR"}

    def test_sensor_range_limits_visibility(self):
        _, w, r = self._standing_robot(0.0)
        # R2's anchor at (8.55, 5) is 1.75 m away from (6.8, 5): not visible
        out = read_sensors(w, (6.8, 5.0, 0.0), 0.5, {"sensors": ["LED"]},
                           r.rng, r.cfg, t=0.0)
        assert out["led_readings"] == []

    def test_env_noise_statistics(self):
        _, w, r = self._standing_robot(0.0)
        temps = []
        for _ in range(4000):
            out = read_sensors(w, (2.0, 2.0, 0.0), 0.0, {"sensors": ["ENV"]},
                               r.rng, r.cfg, t=0.0)
            temps.append(out["env"]["temperature_c"])
        truth = w.env_sample(2.0, 2.0).temperature_c
        mean = sum(temps) / len(temps)
        var = sum((v - mean) ** 2 for v in temps) / (len(temps) - 1)
        assert mean == pytest.approx(truth, abs=0.02)  # sigma/sqrt(n) ~ 0.003
        assert math.sqrt(var) == pytest.approx(0.2, abs=0.02)

    def test_misread_rate_close_to_p(self):
        _, w, r = self._standing_robot(0.01)
        total = wrong = 0
        for _ in range(6000):
            out = read_sensors(w, (5.3, 5.0, math.pi), 0.5, {"sensors": ["LED"]},
                               r.rng, r.cfg, t=0.0)
            for rd in out["led_readings"]:
                total += 1
                truth = "ERROR" if rd["server_id"] == "R1-S2" else "OK"
                if rd["observed"] != truth:
                    wrong += 1
        rate = wrong / total
        # 12000 reads at p=0.01: 5 sigma is ~0.0045
        assert rate == pytest.approx(0.01, abs=0.005)

    def test_deterministic_given_seed(self):
        _, w1, r1 = self._standing_robot(0.01, seed=9)
        _, w2, r2 = self._standing_robot(0.01, seed=9)
        for _ in range(50):
            a = read_sensors(w1, (5.3, 5.0, 0.0), 0.5, {}, r1.rng, r1.cfg, t=1.0)
            b = read_sensors(w2, (5.3, 5.0, 0.0), 0.5, {}, r2.rng, r2.cfg, t=1.0)
            assert a == b

    def test_inspect_emits_readout_per_height(self):
        sc = make_small_scenario()
        w = World(sc.model)
        r = RobotSim(w, sc.robot_cfg, start_pose=(5.3, 5.0, math.pi))
        r.command(MotionCommand(CommandKind.INSPECT,
                                {"point_index": 7, "lift_heights": [0.5, 1.5],
                                 "dwell_seconds": 10.0}), 0.0)
        readouts = []
        done, t_done = run_until(
            r, w, find_event("INSPECT_DONE"), max_t=60.0,
            on_event=lambda ev: readouts.append(ev) if ev.kind == "SENSOR_READOUT" else None,
        )
        assert done.data["point_index"] == 7
        assert [ro.data["readout"]["lift_height"] for ro in readouts] == [0.5, 1.5]
        # dwell shared across heights plus the two lift moves
        lift_time = (0.5 / 0.15) + (1.0 / 0.15)
        assert done.t == pytest.approx(10.0 + lift_time, abs=1e-6)

    def test_inspect_requires_positive_dwell(self):
        r = RobotSim(empty_world(), CFG)
        with pytest.raises(CommandError):
            r.command(MotionCommand(CommandKind.INSPECT,
                                    {"lift_heights": [0.5], "dwell_seconds": 0.0}), 0.0)
