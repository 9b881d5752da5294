/** Canvas renderer for the floor map. */

import { makeTransform, rackCorners, type Transform } from "./geometry";
import type { ConsoleState } from "./state";
import type { FloorModel } from "./types";
import type { MissionDraft } from "./mission";

const COLORS = {
  floor: "#10151c",
  grid: "#1c2430",
  rack: "#3b4b63",
  rackEdge: "#5d7294",
  doorOpen: "#3fa55f",
  doorClosed: "#b3442f",
  robot: "#e8c24a",
  station: "#3d7dc4",
  draft: "#c66bd1",
};

export class MapView {
  private transform: Transform;

  constructor(
    private canvas: HTMLCanvasElement,
    private model: FloorModel,
  ) {
    this.transform = makeTransform(
      model.floor, canvas.width, canvas.height);
  }

  worldAt(px: number, py: number): [number, number] {
    return this.transform.toWorld(px, py);
  }

  render(state: ConsoleState, draft: MissionDraft | null): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = this.canvas;
    const tf = this.transform;
    ctx.fillStyle = COLORS.floor;
    ctx.fillRect(0, 0, width, height);

    // meter grid
    ctx.strokeStyle = COLORS.grid;
    ctx.lineWidth = 1;
    for (let x = 0; x <= this.model.floor.width; x += 1) {
      const [px0, py0] = tf.toCanvas(x, 0);
      const [px1, py1] = tf.toCanvas(x, this.model.floor.depth);
      ctx.beginPath();
      ctx.moveTo(px0, py0);
      ctx.lineTo(px1, py1);
      ctx.stroke();
    }
    for (let y = 0; y <= this.model.floor.depth; y += 1) {
      const [px0, py0] = tf.toCanvas(0, y);
      const [px1, py1] = tf.toCanvas(this.model.floor.width, y);
      ctx.beginPath();
      ctx.moveTo(px0, py0);
      ctx.lineTo(px1, py1);
      ctx.stroke();
    }

    for (const rack of this.model.racks) {
      const corners = rackCorners(rack).map(([x, y]) => tf.toCanvas(x, y));
      ctx.beginPath();
      ctx.moveTo(corners[0][0], corners[0][1]);
      for (const [px, py] of corners.slice(1)) ctx.lineTo(px, py);
      ctx.closePath();
      ctx.fillStyle = COLORS.rack;
      ctx.fill();
      ctx.strokeStyle = COLORS.rackEdge;
      ctx.stroke();
    }

    for (const door of this.model.doors) {
      const live = state.doorStates[door.id] ?? door.state;
      ctx.strokeStyle = live === "OPEN" ? COLORS.doorOpen : COLORS.doorClosed;
      ctx.lineWidth = 3;
      const [ax, ay] = tf.toCanvas(door.x1, door.y1);
      const [bx, by] = tf.toCanvas(door.x2, door.y2);
      ctx.beginPath();
      ctx.moveTo(ax, ay);
      ctx.lineTo(bx, by);
      ctx.stroke();
      ctx.lineWidth = 1;
    }

    for (const st of this.model.charging_stations) {
      const [px, py] = tf.toCanvas(st.x, st.y);
      ctx.fillStyle = COLORS.station;
      ctx.beginPath();
      ctx.arc(px, py, 5, 0, 2 * Math.PI);
      ctx.fill();
    }

    if (draft) {
      ctx.fillStyle = COLORS.draft;
      ctx.strokeStyle = COLORS.draft;
      let prev: [number, number] | null = null;
      for (const p of draft.points) {
        const [px, py] = tf.toCanvas(p.x, p.y);
        ctx.beginPath();
        ctx.arc(px, py, 4, 0, 2 * Math.PI);
        ctx.fill();
        if (prev) {
          ctx.beginPath();
          ctx.moveTo(prev[0], prev[1]);
          ctx.lineTo(px, py);
          ctx.stroke();
        }
        prev = [px, py];
      }
    }

    const tel = state.telemetry;
    if (tel) {
      const [px, py] = tf.toCanvas(tel.x, tel.y);
      ctx.fillStyle = COLORS.robot;
      ctx.beginPath();
      ctx.arc(px, py, 6, 0, 2 * Math.PI);
      ctx.fill();
      ctx.strokeStyle = COLORS.robot;
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.moveTo(px, py);
      ctx.lineTo(
        px + 12 * Math.cos(tel.heading),
        py - 12 * Math.sin(tel.heading),
      );
      ctx.stroke();
      ctx.lineWidth = 1;
    }
  }
}
