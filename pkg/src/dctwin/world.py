"""Static data-center world model and its ground-truth dynamics.

The model is the single source of truth for geometry (floor, racks,
doors, charging stations), the environmental field, server LED states
driven by a fault schedule, and door actuation. Everything except door
state and the clock is immutable after load.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from shapely.geometry import LineString, Polygon, box


class ModelError(Exception):
    """A scenario failed model validation; carries every violation found."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class LedState(str, enum.Enum):
    OK = "OK"
    WARNING = "WARNING"
    ERROR = "ERROR"


# Severity order used when fault events overlap.
LED_SEVERITY = {LedState.OK: 0, LedState.WARNING: 1, LedState.ERROR: 2}


class DoorState(str, enum.Enum):
    OPEN = "OPEN"
    CLOSED = "CLOSED"


@dataclass(frozen=True)
class ServerUnit:
    id: str
    rack_id: str
    slot_start: int
    slot_height: int
    nominal_led: LedState = LedState.OK
    knowledge_key: str = ""


@dataclass(frozen=True)
class Rack:
    id: str
    x: float
    y: float
    heading: float  # direction the front face normal points
    width: float = 0.6   # along the front face
    depth: float = 1.1   # front to back
    u_slots: int = 42
    servers: tuple = ()

    @property
    def tablet_anchor(self) -> tuple[float, float]:
        """Center of the front face, where the virtual tablet hangs."""
        return (
            self.x + math.cos(self.heading) * self.depth / 2.0,
            self.y + math.sin(self.heading) * self.depth / 2.0,
        )

    def footprint(self) -> Polygon:
        c, s = math.cos(self.heading), math.sin(self.heading)
        hd, hw = self.depth / 2.0, self.width / 2.0
        corners = []
        for dx, dy in ((hd, hw), (hd, -hw), (-hd, -hw), (-hd, hw)):
            corners.append((self.x + c * dx - s * dy, self.y + s * dx + c * dy))
        return Polygon(corners)


@dataclass(frozen=True)
class Door:
    id: str
    x1: float
    y1: float
    x2: float
    y2: float
    state: DoorState = DoorState.OPEN
    actuation_delay: float = 2.0

    def segment(self) -> LineString:
        return LineString([(self.x1, self.y1), (self.x2, self.y2)])


@dataclass(frozen=True)
class ChargingStation:
    id: str
    x: float
    y: float
    heading: float = 0.0


@dataclass(frozen=True)
class HeatSource:
    x: float
    y: float
    power: float  # watts


@dataclass(frozen=True)
class FaultEvent:
    server_id: str
    start_time: float
    end_time: float
    led: LedState


@dataclass(frozen=True)
class Ambient:
    temperature_c: float = 22.0
    humidity_pct: float = 45.0
    noise_db: float = 60.0
    pm25_ugm3: float = 8.0


@dataclass(frozen=True)
class EnvZone:
    """Rectangular additive offset on one environmental channel."""
    channel: str
    x0: float
    y0: float
    x1: float
    y1: float
    delta: float

    def contains(self, x: float, y: float) -> bool:
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1


@dataclass(frozen=True)
class EnvSample:
    temperature_c: float
    humidity_pct: float
    noise_db: float
    pm25_ugm3: float

    def as_dict(self) -> dict:
        return {
            "temperature_c": self.temperature_c,
            "humidity_pct": self.humidity_pct,
            "noise_db": self.noise_db,
            "pm25_ugm3": self.pm25_ugm3,
        }


ENV_CHANNELS = ("temperature_c", "humidity_pct", "noise_db", "pm25_ugm3")


@dataclass
class DataCenterModel:
    floor_width: float
    floor_depth: float
    cell_size: float = 0.25
    racks: list[Rack] = field(default_factory=list)
    doors: list[Door] = field(default_factory=list)
    charging_stations: list[ChargingStation] = field(default_factory=list)
    heat_sources: list[HeatSource] = field(default_factory=list)
    ambient: Ambient = field(default_factory=Ambient)
    env_zones: list[EnvZone] = field(default_factory=list)
    fault_schedule: list[FaultEvent] = field(default_factory=list)
    heat_k: float = 0.02      # degC per watt at the source peak
    heat_sigma: float = 1.5   # m, Gaussian spread of each source

    def __post_init__(self):
        self._servers = {}
        self._racks = {}
        for rack in self.racks:
            self._racks[rack.id] = rack
            for srv in rack.servers:
                self._servers[srv.id] = srv
        self._doors = {d.id: d for d in self.doors}
        self._faults_by_server: dict[str, list[FaultEvent]] = {}
        for ev in self.fault_schedule:
            self._faults_by_server.setdefault(ev.server_id, []).append(ev)

    # -- lookups ---------------------------------------------------------

    def rack(self, rack_id: str) -> Rack:
        return self._racks[rack_id]

    def server(self, server_id: str) -> ServerUnit:
        return self._servers[server_id]

    @property
    def servers(self) -> dict[str, ServerUnit]:
        return self._servers

    def door(self, door_id: str) -> Door:
        return self._doors[door_id]

    def inside_floor(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.floor_width and 0.0 <= y <= self.floor_depth

    # -- validation ------------------------------------------------------

    def validate(self) -> list[str]:
        """Return every invariant violation (empty list means valid)."""
        bad = []
        if self.floor_width <= 0 or self.floor_depth <= 0:
            bad.append("floor dimensions must be positive")
            return bad
        if self.cell_size <= 0:
            bad.append("cell_size must be positive")

        seen = set()
        for rack in self.racks:
            if rack.id in seen:
                bad.append(f"duplicate rack id {rack.id}")
            seen.add(rack.id)
        for door in self.doors:
            if door.id in seen:
                bad.append(f"duplicate door id {door.id}")
            seen.add(door.id)
            if door.actuation_delay < 0:
                bad.append(f"door {door.id}: negative actuation_delay")
            for x, y in ((door.x1, door.y1), (door.x2, door.y2)):
                if not self.inside_floor(x, y):
                    bad.append(f"door {door.id}: endpoint outside floor")
                    break
        for st in self.charging_stations:
            if st.id in seen:
                bad.append(f"duplicate station id {st.id}")
            seen.add(st.id)
            if not self.inside_floor(st.x, st.y):
                bad.append(f"charging station {st.id} outside floor")

        floor = box(0.0, 0.0, self.floor_width, self.floor_depth)
        polys = [(r.id, r.footprint()) for r in self.racks]
        for rid, poly in polys:
            if not floor.contains(poly):
                bad.append(f"rack {rid} extends outside the floor")
        for i in range(len(polys)):
            for j in range(i + 1, len(polys)):
                a, b = polys[i], polys[j]
                if a[1].intersection(b[1]).area > 1e-9:
                    bad.append(f"racks {a[0]} and {b[0]} overlap")

        for rack in self.racks:
            used = []
            for srv in rack.servers:
                if srv.slot_start < 1:
                    bad.append(f"server {srv.id}: slot_start < 1")
                if srv.slot_start + srv.slot_height - 1 > rack.u_slots:
                    bad.append(f"server {srv.id}: exceeds rack u_slots")
                used.append((srv.slot_start, srv.slot_start + srv.slot_height - 1, srv.id))
            used.sort()
            for k in range(1, len(used)):
                if used[k][0] <= used[k - 1][1]:
                    bad.append(
                        f"servers {used[k - 1][2]} and {used[k][2]} overlap slots"
                    )

        for ev in self.fault_schedule:
            if ev.start_time >= ev.end_time:
                bad.append(f"fault on {ev.server_id}: start_time >= end_time")
            if ev.server_id not in self._servers:
                bad.append(f"fault references unknown server {ev.server_id}")
        return bad


# -- ground-truth field / LED sampling ----------------------------------


def env_sample(model: DataCenterModel, x: float, y: float, t: float) -> EnvSample:
    """Environmental field at a point: ambient + Gaussian heat plumes + zones."""
    if not model.inside_floor(x, y):
        raise ValueError(f"position ({x}, {y}) outside floor")
    temp = model.ambient.temperature_c
    two_sigma_sq = 2.0 * model.heat_sigma ** 2
    for src in model.heat_sources:
        d2 = (x - src.x) ** 2 + (y - src.y) ** 2
        temp += src.power * model.heat_k * math.exp(-d2 / two_sigma_sq)
    values = {
        "temperature_c": temp,
        "humidity_pct": model.ambient.humidity_pct,
        "noise_db": model.ambient.noise_db,
        "pm25_ugm3": model.ambient.pm25_ugm3,
    }
    for zone in model.env_zones:
        if zone.contains(x, y):
            values[zone.channel] += zone.delta
    return EnvSample(**values)


def led_state(model: DataCenterModel, server_id: str, t: float) -> LedState:
    """Ground-truth LED state: worst active fault, else the nominal state."""
    srv = model.server(server_id)  # KeyError for unknown ids
    state = srv.nominal_led
    for ev in model._faults_by_server.get(server_id, ()):
        if ev.start_time <= t < ev.end_time:
            if LED_SEVERITY[ev.led] > LED_SEVERITY[state]:
                state = ev.led
    return state


# -- occupancy grid ------------------------------------------------------


@dataclass
class Grid:
    blocked: np.ndarray  # bool, shape (nx, ny)
    cell_size: float

    @property
    def nx(self) -> int:
        return self.blocked.shape[0]

    @property
    def ny(self) -> int:
        return self.blocked.shape[1]

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        return (int(x / self.cell_size), int(y / self.cell_size))

    def center(self, i: int, j: int) -> tuple[float, float]:
        return ((i + 0.5) * self.cell_size, (j + 0.5) * self.cell_size)

    def in_bounds(self, i: int, j: int) -> bool:
        return 0 <= i < self.nx and 0 <= j < self.ny

    def free(self, i: int, j: int) -> bool:
        return self.in_bounds(i, j) and not self.blocked[i, j]

    def free_at(self, x: float, y: float) -> bool:
        i, j = self.cell_of(x, y)
        return self.free(i, j)


def occupancy_grid(model: DataCenterModel, closed_doors=None) -> Grid:
    """Rasterize the model: a cell is blocked iff its interior overlaps a
    rack footprint, extends past a wall, or is crossed by a CLOSED door.

    ``closed_doors`` overrides which door ids count as closed; by default
    the doors' declared states are used.
    """
    cs = model.cell_size
    nx = math.ceil(model.floor_width / cs - 1e-9)
    ny = math.ceil(model.floor_depth / cs - 1e-9)
    blocked = np.zeros((nx, ny), dtype=bool)

    # walls: cells whose extent pokes past the floor boundary
    if nx * cs > model.floor_width + 1e-9:
        blocked[nx - 1, :] = True
    if ny * cs > model.floor_depth + 1e-9:
        blocked[:, ny - 1] = True

    def cells_near(geom):
        x0, y0, x1, y1 = geom.bounds
        i0 = max(0, int(x0 / cs) - 1)
        j0 = max(0, int(y0 / cs) - 1)
        i1 = min(nx - 1, int(x1 / cs) + 1)
        j1 = min(ny - 1, int(y1 / cs) + 1)
        return i0, j0, i1, j1

    for rack in model.racks:
        poly = rack.footprint()
        i0, j0, i1, j1 = cells_near(poly)
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                if blocked[i, j]:
                    continue
                cell = box(i * cs, j * cs, (i + 1) * cs, (j + 1) * cs)
                if poly.intersection(cell).area > 1e-9:
                    blocked[i, j] = True

    if closed_doors is None:
        closed_doors = {d.id for d in model.doors if d.state is DoorState.CLOSED}
    for door in model.doors:
        if door.id not in closed_doors:
            continue
        seg = door.segment()
        i0, j0, i1, j1 = cells_near(seg)
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                if blocked[i, j]:
                    continue
                cell = box(i * cs, j * cs, (i + 1) * cs, (j + 1) * cs)
                if seg.intersection(cell).length > 1e-9:
                    blocked[i, j] = True

    return Grid(blocked=blocked, cell_size=cs)


# -- runtime world (doors + clock) ---------------------------------------


@dataclass
class DoorRuntime:
    state: DoorState
    target: DoorState | None = None
    effective_time: float = 0.0


class World:
    """Runtime wrapper: the immutable model plus door states and the clock.

    All mutation happens through ``advance`` and ``actuate_door``; callers
    holding a reference between ticks only ever see fully applied state.
    """

    def __init__(self, model: DataCenterModel):
        violations = model.validate()
        if violations:
            raise ModelError(violations)
        self.model = model
        self.t = 0.0
        self._doors = {d.id: DoorRuntime(state=d.state) for d in model.doors}
        self._grid_cache: dict[tuple, Grid] = {}

    def door_state(self, door_id: str) -> DoorState:
        if door_id not in self._doors:
            raise KeyError(f"unknown door {door_id}")
        return self._doors[door_id].state

    def closed_door_ids(self) -> frozenset:
        return frozenset(
            d for d, rt in self._doors.items() if rt.state is DoorState.CLOSED
        )

    def actuate_door(self, door_id: str, target: DoorState) -> dict:
        """Request a door state change; it takes effect after the delay."""
        if door_id not in self._doors:
            raise KeyError(f"unknown door {door_id}")
        rt = self._doors[door_id]
        door = self.model.door(door_id)
        if rt.state is target and rt.target is None:
            return {"door_id": door_id, "state": target.value, "effective_time": self.t}
        rt.target = target
        rt.effective_time = self.t + door.actuation_delay
        return {
            "door_id": door_id,
            "state": target.value,
            "effective_time": rt.effective_time,
        }

    def advance(self, t: float) -> list[str]:
        """Move the clock to ``t``; returns ids of doors that changed state."""
        changed = []
        for door_id, rt in self._doors.items():
            if rt.target is not None and t >= rt.effective_time - 1e-12:
                if rt.state is not rt.target:
                    changed.append(door_id)
                rt.state = rt.target
                rt.target = None
        self.t = t
        return changed

    def occupancy(self, doors_open: bool = False) -> Grid:
        """Current occupancy grid; ``doors_open`` treats all doors as open
        (used for mission planning, since the robot can request opening)."""
        key = frozenset() if doors_open else self.closed_door_ids()
        if key not in self._grid_cache:
            self._grid_cache[key] = occupancy_grid(self.model, closed_doors=key)
        return self._grid_cache[key]

    def env_sample(self, x: float, y: float) -> EnvSample:
        return env_sample(self.model, x, y, self.t)

    def led_state(self, server_id: str) -> LedState:
        return led_state(self.model, server_id, self.t)
