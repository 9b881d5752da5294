/** Mission drafting and client-side validation for the editor. */

import type { Mission, MissionPoint } from "./types";

export const MAX_LIFT = 2.4;
export const SENSOR_KINDS = ["ENV", "LED"] as const;

export interface MissionDraft {
  id: string;
  name: string;
  dwell_seconds: number;
  points: MissionPoint[];
}

export function emptyDraft(): MissionDraft {
  return { id: "", name: "", dwell_seconds: 10, points: [] };
}

export function addPoint(
  draft: MissionDraft,
  x: number,
  y: number,
  rackId: string | null = null,
): MissionDraft {
  const point: MissionPoint = {
    index: draft.points.length + 1,
    x,
    y,
    rack_id: rackId,
    lift_heights: [0.5],
    sensors: ["ENV", "LED"],
  };
  return { ...draft, points: [...draft.points, point] };
}

export function removePoint(draft: MissionDraft, index: number): MissionDraft {
  const points = draft.points
    .filter((p) => p.index !== index)
    .map((p, k) => ({ ...p, index: k + 1 }));
  return { ...draft, points };
}

/** All problems with the draft; an empty list means submit-ready. */
export function validateDraft(
  draft: MissionDraft,
  floor?: { width: number; depth: number },
): string[] {
  const errors: string[] = [];
  if (!draft.id.trim()) errors.push("mission id is required");
  else if (!/^[a-zA-Z0-9_-]+$/.test(draft.id))
    errors.push("mission id may only contain letters, digits, '-' and '_'");
  if (!(draft.dwell_seconds > 0)) errors.push("dwell must be positive");
  if (draft.points.length === 0) errors.push("at least one point is required");
  draft.points.forEach((p, k) => {
    const tag = `point ${k + 1}`;
    if (p.index !== k + 1) errors.push(`${tag}: indices must be 1..n in order`);
    if (!Number.isFinite(p.x) || !Number.isFinite(p.y))
      errors.push(`${tag}: coordinates must be numbers`);
    else if (floor && (p.x < 0 || p.x > floor.width || p.y < 0 || p.y > floor.depth))
      errors.push(`${tag}: outside the floor`);
    if (p.lift_heights.length === 0) errors.push(`${tag}: needs a lift height`);
    for (const h of p.lift_heights) {
      if (!(h >= 0 && h <= MAX_LIFT))
        errors.push(`${tag}: lift height ${h} outside [0, ${MAX_LIFT}]`);
    }
    if (p.sensors.length === 0) errors.push(`${tag}: needs a sensor`);
    for (const s of p.sensors) {
      if (!SENSOR_KINDS.includes(s as (typeof SENSOR_KINDS)[number]))
        errors.push(`${tag}: unknown sensor ${s}`);
    }
  });
  return errors;
}

/** Request body for POST /api/v1/missions. */
export function toRequestBody(draft: MissionDraft): Mission {
  return {
    id: draft.id.trim(),
    name: draft.name.trim() || draft.id.trim(),
    dwell_seconds: draft.dwell_seconds,
    points: draft.points.map((p) => ({ ...p })),
  };
}
