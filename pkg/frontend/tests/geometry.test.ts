import { describe, expect, it } from "vitest";

import { makeTransform, nearestRack, rackCorners } from "../src/geometry";
import type { RackModel } from "../src/types";

const floor = { width: 12, depth: 10 };

describe("makeTransform", () => {
  it("maps the floor corners into the padded canvas with y flipped", () => {
    const tf = makeTransform(floor, 620, 520, 10);
    // width-limited: scale = 600/12 = 50; floor height 500 fills exactly
    expect(tf.scale).toBe(50);
    expect(tf.toCanvas(0, 0)).toEqual([10, 510]);
    expect(tf.toCanvas(12, 10)).toEqual([610, 10]);
  });

  it("centers the unused axis", () => {
    const tf = makeTransform({ width: 10, depth: 10 }, 1000, 520, 10);
    expect(tf.scale).toBe(50);
    const [x0] = tf.toCanvas(0, 0);
    const [x1] = tf.toCanvas(10, 0);
    expect((x0 - 10) - (990 - x1)).toBeCloseTo(0, 9);
  });

  it("round-trips world -> canvas -> world", () => {
    const tf = makeTransform(floor, 860, 620);
    for (const [x, y] of [[0, 0], [3.7, 8.2], [12, 10]] as const) {
      const [px, py] = tf.toCanvas(x, y);
      const [wx, wy] = tf.toWorld(px, py);
      expect(wx).toBeCloseTo(x, 9);
      expect(wy).toBeCloseTo(y, 9);
    }
  });
});

describe("rackCorners", () => {
  const rack = (heading: number): RackModel => ({
    id: "R1", x: 4, y: 5, heading, width: 0.6, depth: 1.1, servers: [],
  });

  it("axis-aligned footprint at heading 0", () => {
    const corners = rackCorners(rack(0));
    const xs = corners.map(([x]) => x);
    const ys = corners.map(([, y]) => y);
    expect(Math.min(...xs)).toBeCloseTo(4 - 0.3, 9);
    expect(Math.max(...xs)).toBeCloseTo(4 + 0.3, 9);
    expect(Math.min(...ys)).toBeCloseTo(5 - 0.55, 9);
    expect(Math.max(...ys)).toBeCloseTo(5 + 0.55, 9);
  });

  it("rotating by 90 degrees swaps the extents", () => {
    const corners = rackCorners(rack(Math.PI / 2));
    const xs = corners.map(([x]) => x);
    const ys = corners.map(([, y]) => y);
    expect(Math.max(...xs) - Math.min(...xs)).toBeCloseTo(1.1, 9);
    expect(Math.max(...ys) - Math.min(...ys)).toBeCloseTo(0.6, 9);
  });

  it("keeps the centroid at the rack center", () => {
    const corners = rackCorners(rack(0.7));
    const cx = corners.reduce((a, [x]) => a + x, 0) / 4;
    const cy = corners.reduce((a, [, y]) => a + y, 0) / 4;
    expect(cx).toBeCloseTo(4, 9);
    expect(cy).toBeCloseTo(5, 9);
  });
});

describe("nearestRack", () => {
  const racks: RackModel[] = [
    { id: "R1", x: 4, y: 5, heading: 0, width: 0.6, depth: 1.1, servers: [] },
    { id: "R2", x: 8, y: 5, heading: 0, width: 0.6, depth: 1.1, servers: [] },
  ];

  it("picks the closest rack within range", () => {
    expect(nearestRack(racks, 4.5, 5.2)?.id).toBe("R1");
    expect(nearestRack(racks, 7.4, 5.0)?.id).toBe("R2");
  });

  it("returns null when nothing is close enough", () => {
    expect(nearestRack(racks, 0.5, 0.5)).toBeNull();
  });
});
