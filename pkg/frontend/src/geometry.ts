/** World-to-canvas mapping and rack footprint geometry for the map. */

import type { RackModel } from "./types";

export interface Transform {
  scale: number;
  offsetX: number;
  offsetY: number;
  toCanvas(x: number, y: number): [number, number];
  toWorld(px: number, py: number): [number, number];
}

/** Uniform-scale fit of the floor into a canvas with padding; the world
 * y-axis points up, the canvas y-axis points down. */
export function makeTransform(
  floor: { width: number; depth: number },
  canvasWidth: number,
  canvasHeight: number,
  padding = 16,
): Transform {
  const availW = canvasWidth - 2 * padding;
  const availH = canvasHeight - 2 * padding;
  const scale = Math.min(availW / floor.width, availH / floor.depth);
  const offsetX = padding + (availW - floor.width * scale) / 2;
  const offsetY = padding + (availH - floor.depth * scale) / 2;
  return {
    scale,
    offsetX,
    offsetY,
    toCanvas(x: number, y: number): [number, number] {
      return [offsetX + x * scale, offsetY + (floor.depth - y) * scale];
    },
    toWorld(px: number, py: number): [number, number] {
      return [(px - offsetX) / scale, floor.depth - (py - offsetY) / scale];
    },
  };
}

/** Rack footprint corners (world coordinates, counter-clockwise).
 * heading 0 means the long (depth) side runs along y. */
export function rackCorners(rack: RackModel): [number, number][] {
  const c = Math.cos(rack.heading);
  const s = Math.sin(rack.heading);
  const hw = rack.width / 2;
  const hd = rack.depth / 2;
  const local: [number, number][] = [
    [-hw, -hd],
    [hw, -hd],
    [hw, hd],
    [-hw, hd],
  ];
  return local.map(([lx, ly]) => [
    rack.x + lx * c - ly * s,
    rack.y + lx * s + ly * c,
  ]);
}

/** Nearest rack within `maxDist` meters of a world point, for assigning
 * rack ids to mission points drawn on the map. */
export function nearestRack(
  racks: RackModel[],
  x: number,
  y: number,
  maxDist = 1.5,
): RackModel | null {
  let best: RackModel | null = null;
  let bestD = maxDist;
  for (const r of racks) {
    const d = Math.hypot(r.x - x, r.y - y);
    if (d <= bestD) {
      best = r;
      bestD = d;
    }
  }
  return best;
}
