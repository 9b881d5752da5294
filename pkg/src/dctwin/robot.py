"""Kinematic, battery, and sensing simulation of the inspection robot.

Motion follows a trapezoidal speed profile (bounded speed and
acceleration) with stop-and-rotate at sharp path kinks. Phase
transitions inside a tick are resolved analytically, so travel
durations match the closed-form trapezoid times to floating-point
precision rather than tick quantization.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, field

from . import planner
from .world import DoorState, EnvSample, LedState, World, led_state as _led_truth

_EPS = 1e-9


class CommandError(Exception):
    """Command rejected before execution (mode conflict or limit violation)."""


class SensorNotReady(Exception):
    """Sensor capture attempted while the lift is still moving."""


class RobotMode(str, enum.Enum):
    IDLE = "IDLE"
    NAVIGATING = "NAVIGATING"
    INSPECTING = "INSPECTING"
    JOGGING = "JOGGING"
    DOCKING = "DOCKING"
    CHARGING = "CHARGING"
    ESTOPPED = "ESTOPPED"


class CommandKind(str, enum.Enum):
    FOLLOW_PATH = "FOLLOW_PATH"
    INSPECT = "INSPECT"
    JOG = "JOG"
    SET_LIFT = "SET_LIFT"
    DOCK = "DOCK"
    STOP = "STOP"
    ESTOP = "ESTOP"


# Modes billed at full load when discharging.
FULL_LOAD_MODES = {
    RobotMode.NAVIGATING,
    RobotMode.INSPECTING,
    RobotMode.JOGGING,
    RobotMode.DOCKING,
}


@dataclass(frozen=True)
class RobotConfig:
    max_speed: float = 1.5          # m/s
    max_accel: float = 0.3          # m/s^2
    max_yaw_rate: float = 1.0       # rad/s
    lift_speed: float = 0.15        # m/s
    max_lift: float = 2.4           # m
    battery_capacity_kwh: float = 1.56
    full_load_hours: float = 6.0
    charge_kw: float = 0.936        # 0.6 * capacity per hour (40% -> 100% in 1 h)
    idle_load_factor: float = 0.15
    tick: float = 0.05              # s
    sensor_range: float = 1.2       # m, rack front face visibility
    p_misread: float = 0.01
    sigma_temp: float = 0.2
    sigma_hum: float = 1.0
    footprint_radius: float = 0.5   # inflation radius (0.6 x 0.8 m body)
    turn_stop_deg: float = 30.0     # kink angle forcing a stop-and-rotate
    door_standoff: float = 0.4      # m, hold distance before a closed door
    dock_pos_tol: float = 0.05
    dock_heading_tol: float = 0.1

    @classmethod
    def from_dict(cls, d: dict) -> "RobotConfig":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        return cls(**known)

    @property
    def discharge_kw(self) -> float:
        return self.battery_capacity_kwh / self.full_load_hours


@dataclass(frozen=True)
class MotionCommand:
    kind: CommandKind
    params: dict = field(default_factory=dict)


@dataclass
class RobotEvent:
    kind: str
    t: float
    data: dict = field(default_factory=dict)


def battery_step(
    energy: float, dt: float, activity: RobotMode, cfg: RobotConfig
) -> float:
    """Pure battery law: discharge by mode load factor, charge at fixed rate."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if activity is RobotMode.CHARGING:
        return min(cfg.battery_capacity_kwh, energy + cfg.charge_kw * dt / 3600.0)
    if activity is RobotMode.ESTOPPED:
        return energy
    load = 1.0 if activity in FULL_LOAD_MODES else cfg.idle_load_factor
    return max(0.0, energy - cfg.discharge_kw * load * dt / 3600.0)


def read_sensors(
    world: World,
    pose: tuple[float, float, float],
    lift_height: float,
    point_spec: dict,
    rng: random.Random,
    cfg: RobotConfig,
    lift_moving: bool = False,
    t: float | None = None,
) -> dict:
    """One sensor capture at an inspection point.

    Environmental channels get zero-mean Gaussian noise on temperature and
    humidity; each visible server's LED is misread with probability
    ``p_misread`` (uniform over the wrong states). Reproducible given the
    rng stream.
    """
    if lift_moving:
        raise SensorNotReady("lift still moving")
    x, y, _ = pose
    t = world.t if t is None else t
    env = world.env_sample(x, y)
    sensors = set(point_spec.get("sensors", ("ENV", "LED")))
    noisy = EnvSample(
        temperature_c=env.temperature_c
        + (rng.gauss(0.0, cfg.sigma_temp) if "ENV" in sensors else 0.0),
        humidity_pct=env.humidity_pct
        + (rng.gauss(0.0, cfg.sigma_hum) if "ENV" in sensors else 0.0),
        noise_db=env.noise_db,
        pm25_ugm3=env.pm25_ugm3,
    )
    led_readings = []
    if "LED" in sensors:
        visible = []
        for rack in world.model.racks:
            ax, ay = rack.tablet_anchor
            if math.hypot(ax - x, ay - y) <= cfg.sensor_range:
                visible.append(rack)
        visible.sort(key=lambda r: r.id)
        states = list(LedState)
        for rack in visible:
            for srv in sorted(rack.servers, key=lambda s: s.id):
                truth = _led_truth(world.model, srv.id, t)
                if cfg.p_misread > 0 and rng.random() < cfg.p_misread:
                    wrong = [s for s in states if s is not truth]
                    observed = wrong[rng.randrange(len(wrong))]
                else:
                    observed = truth
                led_readings.append(
                    {
                        "server_id": srv.id,
                        "rack_id": rack.id,
                        "observed": observed.value,
                        "confidence": round(1.0 - cfg.p_misread, 6),
                    }
                )
    return {
        "t": t,
        "pose": {"x": x, "y": y, "heading": pose[2]},
        "lift_height": lift_height,
        "env": noisy.as_dict(),
        "led_readings": led_readings,
    }


def _wrap(a: float) -> float:
    """Wrap angle to (-pi, pi]."""
    while a <= -math.pi:
        a += 2 * math.pi
    while a > math.pi:
        a -= 2 * math.pi
    return a


def split_legs(pts: list[tuple[float, float]], turn_stop_rad: float):
    """Split a waypoint polyline into legs at kinks sharper than the
    stop threshold; within a leg the robot keeps rolling."""
    if len(pts) < 2:
        return []
    legs = [[pts[0], pts[1]]]
    for k in range(1, len(pts) - 1):
        h_in = math.atan2(pts[k][1] - pts[k - 1][1], pts[k][0] - pts[k - 1][0])
        h_out = math.atan2(pts[k + 1][1] - pts[k][1], pts[k + 1][0] - pts[k][0])
        if abs(_wrap(h_out - h_in)) > turn_stop_rad:
            legs.append([pts[k], pts[k + 1]])
        else:
            legs[-1].append(pts[k + 1])
    return legs


def trapezoid_time(length: float, vmax: float, a: float) -> float:
    """Closed-form rest-to-rest travel time over a straight distance."""
    if length <= 0:
        return 0.0
    if length >= vmax * vmax / a:
        return length / vmax + vmax / a
    return 2.0 * math.sqrt(length / a)


# --- actions -----------------------------------------------------------


class _Action:
    mode = RobotMode.NAVIGATING
    done = False

    def advance(self, robot: "RobotSim", h: float, t: float) -> float:
        raise NotImplementedError


class _RotateTo(_Action):
    def __init__(self, target: float, mode=RobotMode.NAVIGATING):
        self.target = target
        self.mode = mode

    def advance(self, robot, h, t):
        delta = _wrap(self.target - robot.heading)
        need = abs(delta) / robot.cfg.max_yaw_rate
        if need <= h + _EPS:
            robot.heading = self.target
            self.done = True
            return min(need, h) if need > 0 else 0.0
        robot.heading = _wrap(
            robot.heading + math.copysign(robot.cfg.max_yaw_rate * h, delta)
        )
        return h


class _Translate(_Action):
    def __init__(self, pts, mode=RobotMode.NAVIGATING, done_event=None):
        self.pts = list(pts)
        self.mode = mode
        self.done_event = done_event  # (kind, extra) emitted on completion
        self.cum = [0.0]
        for a, b in zip(self.pts, self.pts[1:]):
            self.cum.append(self.cum[-1] + math.hypot(b[0] - a[0], b[1] - a[1]))
        self.L = self.cum[-1]
        self.s = 0.0
        self.crossings = None  # computed lazily against door segments
        self.requested_doors = set()

    def _compute_crossings(self, robot):
        self.crossings = []
        for door in robot.world.model.doors:
            seg = door.segment()
            for k in range(len(self.pts) - 1):
                a, b = self.pts[k], self.pts[k + 1]
                pt = _segment_intersection(a, b, (door.x1, door.y1), (door.x2, door.y2))
                if pt is not None:
                    s_cross = self.cum[k] + math.hypot(pt[0] - a[0], pt[1] - a[1])
                    self.crossings.append((s_cross, door.id))
        self.crossings.sort()

    def _stop_target(self, robot, events, t):
        """Leg end, or a hold point before the next closed door crossing."""
        if self.crossings is None:
            self._compute_crossings(robot)
        for s_cross, door_id in self.crossings:
            if s_cross < self.s - _EPS:
                continue
            if robot.world.door_state(door_id) is DoorState.CLOSED:
                hold = max(self.s, s_cross - robot.cfg.door_standoff)
                return hold, door_id
        return self.L, None

    def _place(self, robot):
        s = min(self.s, self.L)
        k = 0
        while k < len(self.cum) - 2 and self.cum[k + 1] < s - _EPS:
            k += 1
        a, b = self.pts[k], self.pts[k + 1]
        seg_len = self.cum[k + 1] - self.cum[k]
        f = 0.0 if seg_len <= _EPS else (s - self.cum[k]) / seg_len
        robot.x = a[0] + (b[0] - a[0]) * f
        robot.y = a[1] + (b[1] - a[1]) * f
        if seg_len > _EPS:
            robot.heading = math.atan2(b[1] - a[1], b[0] - a[0])

    def advance(self, robot, h, t):
        cfg = robot.cfg
        target, door_id = self._stop_target(robot, None, t)
        d = target - self.s
        if d <= _EPS and robot.v <= _EPS:
            if door_id is not None:
                # waiting at a closed door
                robot.waiting_door = door_id
                if door_id not in self.requested_doors:
                    self.requested_doors.add(door_id)
                    robot._emit("DOOR_REQUEST", t, {"door_id": door_id})
                return h
            robot.waiting_door = None
            self.s = self.L
            self._place(robot)
            robot.v = 0.0
            self.done = True
            if self.done_event:
                kind, extra = self.done_event
                data = dict(extra)
                data.update({"x": robot.x, "y": robot.y, "heading": robot.heading})
                robot._emit(kind, t, data)
            return 0.0
        robot.waiting_door = None
        a, vmax, v = cfg.max_accel, cfg.max_speed, robot.v
        if v * v >= 2.0 * a * d - 1e-12:
            # on (or past) the deceleration parabola: ramp down at full decel
            t_stop = v / a if a > 0 else 0.0
            tt = min(h, t_stop)
            self.s += v * tt - 0.5 * a * tt * tt
            robot.v = max(0.0, v - a * tt)
            if t_stop <= h + 1e-12:
                self.s = target
                robot.v = 0.0
            self._place(robot)
            return tt if tt > 0 else h  # t_stop==0 with d>eps cannot happen
        if v < vmax - 1e-12:
            t1 = (vmax - v) / a
            t2 = (-v + math.sqrt(v * v / 2.0 + a * d)) / a
            tt = min(h, t1, t2)
            self.s += v * tt + 0.5 * a * tt * tt
            robot.v = min(vmax, v + a * tt)
            self._place(robot)
            return max(tt, _EPS)
        t3 = (d - vmax * vmax / (2.0 * a)) / vmax
        tt = min(h, max(t3, _EPS))
        self.s += vmax * tt
        self._place(robot)
        return tt


class _LiftTo(_Action):
    mode = RobotMode.INSPECTING

    def __init__(self, target: float, mode=RobotMode.INSPECTING, notify: bool = True):
        self.target = target
        self.mode = mode
        self.notify = notify

    def advance(self, robot, h, t):
        delta = self.target - robot.lift_height
        need = abs(delta) / robot.cfg.lift_speed
        if need <= h + _EPS:
            robot.lift_height = self.target
            self.done = True
            if self.notify:
                robot._emit("LIFT_DONE", t + max(need, 0.0), {"height": self.target})
            return min(need, h) if need > 0 else 0.0
        robot.lift_height += math.copysign(robot.cfg.lift_speed * h, delta)
        return h


class _Dwell(_Action):
    mode = RobotMode.INSPECTING

    def __init__(self, duration: float):
        self.remaining = duration

    def advance(self, robot, h, t):
        tt = min(h, self.remaining)
        self.remaining -= tt
        if self.remaining <= _EPS:
            self.done = True
        return tt


class _Sense(_Action):
    mode = RobotMode.INSPECTING

    def __init__(self, point_spec: dict):
        self.point_spec = point_spec

    def advance(self, robot, h, t):
        readout = read_sensors(
            robot.world,
            (robot.x, robot.y, robot.heading),
            robot.lift_height,
            self.point_spec,
            robot.rng,
            robot.cfg,
            t=t,
        )
        robot._emit(
            "SENSOR_READOUT",
            t,
            {"point_index": self.point_spec.get("index"), "readout": readout},
        )
        self.done = True
        return 0.0


class _Notify(_Action):
    """Zero-time marker emitting an event when reached in the queue."""

    mode = RobotMode.INSPECTING

    def __init__(self, kind: str, data: dict, mode=RobotMode.INSPECTING):
        self.kind = kind
        self.data = data
        self.mode = mode

    def advance(self, robot, h, t):
        robot._emit(self.kind, t, dict(self.data))
        self.done = True
        return 0.0


class _BeginCharge(_Action):
    mode = RobotMode.DOCKING

    def __init__(self, station_id: str):
        self.station_id = station_id

    def advance(self, robot, h, t):
        robot.charging = True
        robot._emit("DOCKED", t, {"station_id": self.station_id})
        self.done = True
        return 0.0


# --- geometry helper ----------------------------------------------------


def _segment_intersection(a, b, c, d):
    """Intersection point of segments ab and cd, or None."""
    r = (b[0] - a[0], b[1] - a[1])
    s = (d[0] - c[0], d[1] - c[1])
    denom = r[0] * s[1] - r[1] * s[0]
    if abs(denom) < 1e-12:
        return None
    qp = (c[0] - a[0], c[1] - a[1])
    t = (qp[0] * s[1] - qp[1] * s[0]) / denom
    u = (qp[0] * r[1] - qp[1] * r[0]) / denom
    if -1e-9 <= t <= 1 + 1e-9 and -1e-9 <= u <= 1 + 1e-9:
        return (a[0] + t * r[0], a[1] + t * r[1])
    return None


# --- the robot ----------------------------------------------------------


class RobotSim:
    """Single inspection robot simulated against a World.

    Commands are enqueued via :meth:`command` and compiled to an action
    queue; :meth:`step` advances simulated time with exact sub-tick
    phase transitions. Events carry exact timestamps.
    """

    def __init__(
        self,
        world: World,
        cfg: RobotConfig,
        seed: int = 42,
        start_pose: tuple[float, float, float] = (1.0, 1.0, 0.0),
        battery_energy: float | None = None,
    ):
        self.world = world
        self.cfg = cfg
        self.rng = random.Random(f"{seed}:sensors")
        self.x, self.y, self.heading = start_pose
        self.v = 0.0
        self.lift_height = 0.0
        self.battery = (
            cfg.battery_capacity_kwh if battery_energy is None else battery_energy
        )
        self.mode = RobotMode.IDLE
        self.charging = False
        self.waiting_door = None
        self.jog_linear = 0.0
        self.jog_angular = 0.0
        self._jogging = False
        self._actions: list[_Action] = []
        self._events: list[RobotEvent] = []
        self.active_path: list[tuple[float, float]] = []
        self._nav_grid = None
        self._collision_grids: dict[frozenset, "planner.Grid"] = {}

    # -- grids -----------------------------------------------------------

    @property
    def nav_grid(self):
        """Inflated grid with all doors treated as openable."""
        if self._nav_grid is None:
            self._nav_grid = planner.inflate(
                self.world.occupancy(doors_open=True), self.cfg.footprint_radius
            )
        return self._nav_grid

    def collision_grid(self):
        """Inflated grid honoring current door states."""
        key = self.world.closed_door_ids()
        if key not in self._collision_grids:
            self._collision_grids[key] = planner.inflate(
                self.world.occupancy(), self.cfg.footprint_radius
            )
        return self._collision_grids[key]

    # -- events ----------------------------------------------------------

    def _emit(self, kind: str, t: float, data: dict):
        self._events.append(RobotEvent(kind=kind, t=t, data=data))

    def _set_mode(self, mode: RobotMode, t: float):
        if mode is not self.mode:
            prev = self.mode
            self.mode = mode
            self._emit(
                "MODE_CHANGE",
                t,
                {
                    "from": prev.value,
                    "to": mode.value,
                    "x": self.x,
                    "y": self.y,
                    "heading": self.heading,
                },
            )

    # -- commands --------------------------------------------------------

    @property
    def busy(self) -> bool:
        return bool(self._actions) or self._jogging or self.v > _EPS

    def command(self, cmd: MotionCommand, t: float | None = None):
        """Validate and enqueue one command. Raises CommandError on
        rejection; effects begin on the next step."""
        t = self.world.t if t is None else t
        kind = cmd.kind
        if self.mode is RobotMode.ESTOPPED and kind is not CommandKind.ESTOP:
            raise CommandError("robot is ESTOPPED")
        if kind is CommandKind.ESTOP:
            self._actions.clear()
            self._jogging = False
            self.v = 0.0
            self.charging = False
            self._set_mode(RobotMode.ESTOPPED, t)
            return
        if kind is CommandKind.STOP:
            self._do_stop(t)
            return
        if kind is CommandKind.JOG:
            if self._actions or (self.busy and not self._jogging):
                raise CommandError("jog rejected: robot is executing a path; STOP first")
            vl = float(cmd.params.get("linear", 0.0))
            w = float(cmd.params.get("angular", 0.0))
            if not (0.0 <= vl <= self.cfg.max_speed):
                raise CommandError(f"jog linear rate {vl} outside [0, {self.cfg.max_speed}]")
            if abs(w) > self.cfg.max_yaw_rate:
                raise CommandError(f"jog angular rate {w} exceeds {self.cfg.max_yaw_rate}")
            self.jog_linear, self.jog_angular = vl, w
            self._jogging = True
            self.charging = False
            return
        if kind is CommandKind.SET_LIFT:
            target = float(cmd.params["height"])
            if not (0.0 <= target <= self.cfg.max_lift):
                raise CommandError(
                    f"lift target {target} outside [0, {self.cfg.max_lift}]"
                )
            self._actions.append(_LiftTo(target, mode=self._context_mode()))
            return
        if kind is CommandKind.FOLLOW_PATH:
            if self._jogging:
                raise CommandError("cannot follow a path while jogging; STOP first")
            if self._actions:
                raise CommandError("robot busy")
            waypoints = [tuple(p) for p in cmd.params["waypoints"]]
            for p in waypoints:
                if not self.nav_grid.free_at(*p):
                    raise CommandError(f"waypoint {p} not in free space")
            self.charging = False
            self._compile_path(waypoints, mode=RobotMode.NAVIGATING)
            return
        if kind is CommandKind.INSPECT:
            if self._jogging:
                raise CommandError("cannot inspect while jogging")
            self._compile_inspect(cmd.params)
            return
        if kind is CommandKind.DOCK:
            if self._actions or self._jogging:
                raise CommandError("robot busy")
            self._compile_dock(t)
            return
        raise CommandError(f"unknown command kind {kind}")

    def _context_mode(self):
        return RobotMode.INSPECTING

    def _do_stop(self, t):
        self._jogging = False
        self.jog_linear = self.jog_angular = 0.0
        if self.v > _EPS:
            d = self.v * self.v / (2.0 * self.cfg.max_accel)
            end = (
                self.x + math.cos(self.heading) * d,
                self.y + math.sin(self.heading) * d,
            )
            self._actions = [_Translate([(self.x, self.y), end], mode=RobotMode.NAVIGATING)]
        else:
            self._actions = []

    def _compile_path(self, waypoints, mode, done_event=("PATH_DONE", {})):
        self.active_path = list(waypoints)
        legs = split_legs(waypoints, math.radians(self.cfg.turn_stop_deg))
        actions = []
        for li, leg in enumerate(legs):
            h0 = math.atan2(leg[1][1] - leg[0][1], leg[1][0] - leg[0][0])
            actions.append(_RotateTo(h0, mode=mode))
            is_last = li == len(legs) - 1
            actions.append(
                _Translate(leg, mode=mode, done_event=done_event if is_last else None)
            )
        if not legs:
            actions.append(_Notify(done_event[0], dict(done_event[1]), mode=mode))
        self._actions.extend(actions)

    def _compile_inspect(self, params: dict):
        heights = list(params.get("lift_heights", [0.0]))
        for hgt in heights:
            if not (0.0 <= hgt <= self.cfg.max_lift):
                raise CommandError(f"lift height {hgt} out of range")
        dwell = float(params.get("dwell_seconds", 0.0))
        if dwell <= 0:
            raise CommandError("dwell_seconds must be positive")
        share = dwell / len(heights)
        spec = {
            "index": params.get("point_index"),
            "sensors": params.get("sensors", ["ENV", "LED"]),
        }
        for hgt in heights:
            self._actions.append(_LiftTo(hgt, notify=False))
            self._actions.append(_Dwell(share))
            self._actions.append(_Sense(spec))
        self._actions.append(
            _Notify("INSPECT_DONE", {"point_index": params.get("point_index")})
        )

    def _compile_dock(self, t):
        stations = self.world.model.charging_stations
        if not stations:
            self._emit("FAULT", t, {"reason": "no charging station in scenario",
                                    "severity": "CRITICAL"})
            return
        grid = self.collision_grid()
        best = None
        for st in stations:
            try:
                path = planner.plan_path(grid, (self.x, self.y), (st.x, st.y))
            except planner.NoPathError:
                continue
            cost = planner.path_length(path)
            if best is None or cost < best[0]:
                best = (cost, st, path)
        if best is None:
            self._emit(
                "FAULT", t, {"reason": "no reachable charging station",
                             "severity": "CRITICAL"},
            )
            return
        _, st, path = best
        self.charging = False
        self._compile_path(path, mode=RobotMode.DOCKING, done_event=("PATH_DONE", {"dock": True}))
        self._actions.append(_RotateTo(st.heading, mode=RobotMode.DOCKING))
        self._actions.append(_BeginCharge(st.id))

    # -- stepping --------------------------------------------------------

    def step(self, dt: float, t_start: float | None = None) -> list[RobotEvent]:
        """Advance the robot by dt seconds; returns events with exact times."""
        if dt <= 0:
            raise ValueError("dt must be positive")
        t_start = self.world.t - dt if t_start is None else t_start
        if self.mode is RobotMode.ESTOPPED:
            return self._drain_events()
        remaining = dt
        tnow = t_start
        guard = 0
        while remaining > 1e-9:
            guard += 1
            if guard > 10000:  # pragma: no cover - safety valve
                break
            if self._jogging:
                consumed = self._advance_jog(remaining, tnow)
            elif self._actions:
                act = self._actions[0]
                self._set_mode(act.mode, tnow)
                consumed = act.advance(self, remaining, tnow)
                if act.done:
                    self._actions.pop(0)
                    if not self._actions:
                        self.active_path = []
                        self._set_mode(
                            RobotMode.CHARGING if self.charging else RobotMode.IDLE,
                            tnow + consumed,
                        )
            else:
                self._set_mode(
                    RobotMode.CHARGING if self.charging else RobotMode.IDLE, tnow
                )
                consumed = remaining
            if consumed <= 0:
                continue
            self.battery = battery_step(self.battery, consumed, self.mode, self.cfg)
            tnow += consumed
            remaining -= consumed
            if self.battery <= 0.0 and self.mode is not RobotMode.CHARGING:
                self.battery = 0.0
                self._actions.clear()
                self._jogging = False
                self.v = 0.0
                self._emit(
                    "FAULT", tnow, {"reason": "battery depleted", "severity": "CRITICAL"}
                )
                self._set_mode(RobotMode.ESTOPPED, tnow)
                break
        return self._drain_events()

    def _drain_events(self) -> list[RobotEvent]:
        """Hand off pending events exactly once (including any emitted
        between steps, e.g. a dock fault raised at command time)."""
        out = self._events
        self._events = []
        return out

    def _advance_jog(self, h: float, t: float) -> float:
        cfg = self.cfg
        self._set_mode(RobotMode.JOGGING, t)
        dv = self.jog_linear - self.v
        self.v += math.copysign(min(abs(dv), cfg.max_accel * h), dv) if dv else 0.0
        self.heading = _wrap(self.heading + self.jog_angular * h)
        dist = self.v * h
        if dist > 0:
            grid = self.collision_grid()
            step_len = grid.cell_size / 4.0
            moved = 0.0
            cx, cy = self.x, self.y
            bumped = False
            while moved < dist - _EPS:
                d = min(step_len, dist - moved)
                nx = cx + math.cos(self.heading) * d
                ny = cy + math.sin(self.heading) * d
                if not grid.free_at(nx, ny):
                    bumped = True
                    break
                cx, cy = nx, ny
                moved += d
            self.x, self.y = cx, cy
            if bumped:
                self.v = 0.0
                self.jog_linear = 0.0
                self._emit("BUMP", t, {"x": self.x, "y": self.y})
        return h

    # -- snapshots -------------------------------------------------------

    def pose(self) -> dict:
        return {"x": self.x, "y": self.y, "heading": self.heading}

    def lift_moving(self) -> bool:
        return any(isinstance(a, _LiftTo) for a in self._actions[:1])
