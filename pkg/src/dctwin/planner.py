"""Grid path planning: obstacle inflation, A*, and line-of-sight smoothing."""

from __future__ import annotations

import heapq
import math

import numpy as np
from scipy import ndimage

from .world import Grid


class NoPathError(Exception):
    """Goal unreachable from start on the inflated grid."""


SQRT2 = math.sqrt(2.0)


def inflate(grid: Grid, radius: float) -> Grid:
    """Dilate blocked cells by a disk of the given radius (in meters)."""
    r = int(math.ceil(radius / grid.cell_size - 1e-9))
    if r <= 0:
        return Grid(blocked=grid.blocked.copy(), cell_size=grid.cell_size)
    size = 2 * r + 1
    yy, xx = np.mgrid[-r:r + 1, -r:r + 1]
    disk = (xx * xx + yy * yy) <= r * r
    assert disk.shape == (size, size)
    blocked = ndimage.binary_dilation(grid.blocked, structure=disk)
    return Grid(blocked=blocked, cell_size=grid.cell_size)


def neighbors(grid: Grid, i: int, j: int):
    """8-connected free neighbors; diagonal moves may not cut corners."""
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        if grid.free(i + di, j + dj):
            yield (i + di, j + dj), 1.0
    for di, dj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
        if (
            grid.free(i + di, j + dj)
            and grid.free(i + di, j)
            and grid.free(i, j + dj)
        ):
            yield (i + di, j + dj), SQRT2


def astar_cells(grid: Grid, start: tuple[int, int], goal: tuple[int, int]):
    """A* on the grid; returns (cell path, cost in cell units)."""
    if not grid.free(*start):
        raise NoPathError(f"start cell {start} is blocked")
    if not grid.free(*goal):
        raise NoPathError(f"goal cell {goal} is blocked")
    if start == goal:
        return [start], 0.0

    def h(cell):
        dx = abs(cell[0] - goal[0])
        dy = abs(cell[1] - goal[1])
        return (dx + dy) + (SQRT2 - 2.0) * min(dx, dy)

    open_heap = [(h(start), 0.0, start)]
    g = {start: 0.0}
    came = {}
    closed = set()
    while open_heap:
        _, gc, cur = heapq.heappop(open_heap)
        if cur in closed:
            continue
        if cur == goal:
            path = [cur]
            while cur in came:
                cur = came[cur]
                path.append(cur)
            path.reverse()
            return path, gc
        closed.add(cur)
        for nxt, step in neighbors(grid, *cur):
            ng = gc + step
            if ng < g.get(nxt, math.inf):
                g[nxt] = ng
                came[nxt] = cur
                heapq.heappush(open_heap, (ng + h(nxt), ng, nxt))
    raise NoPathError(f"no path from {start} to {goal}")


def line_of_sight(grid: Grid, a: tuple[float, float], b: tuple[float, float]) -> bool:
    """Exact supercover ray walk: every cell touched by the segment must
    be free. Corner grazing is treated conservatively, requiring both
    side cells free, matching the no-corner-cutting rule of A*."""
    cs = grid.cell_size
    x0, y0 = a[0] / cs, a[1] / cs
    x1, y1 = b[0] / cs, b[1] / cs
    i, j = int(math.floor(x0)), int(math.floor(y0))
    i_end, j_end = int(math.floor(x1)), int(math.floor(y1))
    if not grid.free(i, j):
        return False
    dx, dy = x1 - x0, y1 - y0
    step_i = 1 if dx > 0 else -1
    step_j = 1 if dy > 0 else -1
    inv_dx = abs(1.0 / dx) if dx else math.inf
    inv_dy = abs(1.0 / dy) if dy else math.inf
    t_max_x = ((i + (step_i > 0)) - x0) / dx if dx else math.inf
    t_max_y = ((j + (step_j > 0)) - y0) / dy if dy else math.inf
    while (i, j) != (i_end, j_end):
        if min(t_max_x, t_max_y) > 1.0 + 1e-12:
            break  # endpoint sits on a cell boundary; segment is done
        if abs(t_max_x - t_max_y) < 1e-12:
            # passes through a cell corner: both side cells must be free
            if not (grid.free(i + step_i, j) and grid.free(i, j + step_j)):
                return False
            i += step_i
            j += step_j
            t_max_x += inv_dx
            t_max_y += inv_dy
        elif t_max_x < t_max_y:
            i += step_i
            t_max_x += inv_dx
        else:
            j += step_j
            t_max_y += inv_dy
        if not grid.free(i, j):
            return False
    return True


def smooth(grid: Grid, pts: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Greedy line-of-sight shortcutting; keeps endpoints exactly."""
    if len(pts) <= 2:
        return list(pts)
    out = [pts[0]]
    i = 0
    while i < len(pts) - 1:
        j = len(pts) - 1
        while j > i + 1 and not line_of_sight(grid, pts[i], pts[j]):
            j -= 1
        out.append(pts[j])
        i = j
    return out


def plan_path(
    grid: Grid,
    start: tuple[float, float],
    goal: tuple[float, float],
    do_smooth: bool = True,
) -> list[tuple[float, float]]:
    """Plan a waypoint path in world coordinates on an (already inflated) grid.

    Raises NoPathError when the goal is unreachable. The returned path
    starts exactly at ``start`` and ends exactly at ``goal``.
    """
    sc = grid.cell_of(*start)
    gc = grid.cell_of(*goal)
    if sc == gc:
        if start == goal:
            return [start]
        return [start, goal]
    cells, _cost = astar_cells(grid, sc, gc)
    pts = [start] + [grid.center(i, j) for i, j in cells[1:-1]] + [goal]
    if do_smooth:
        pts = smooth(grid, pts)
    # drop consecutive duplicates
    out = [pts[0]]
    for p in pts[1:]:
        if math.hypot(p[0] - out[-1][0], p[1] - out[-1][1]) > 1e-9:
            out.append(p)
    return out


def path_length(pts) -> float:
    return sum(
        math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(pts, pts[1:])
    )
