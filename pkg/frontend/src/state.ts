/** Console view model: a plain immutable-ish store updated by pure
 * reducers. Hydrated from REST on load, then advanced by the event
 * stream; a hard refresh rebuilds the same state from the API alone. */

import type { Alarm, Mission, RmsEvent, Run, Telemetry } from "./types";

export interface CommandLogEntry {
  seq: number;
  t: number;
  kind: string;
}

export interface ConsoleState {
  telemetry: Telemetry | null;
  missions: Record<string, Mission>;
  runs: Record<string, Run>;
  alarms: Record<string, Alarm>;
  doorStates: Record<string, string>;
  commandLog: CommandLogEntry[];
  recordCount: number;
  lastSeq: number;
  faults: { t: number; reason: string; severity: string }[];
}

export function initialState(): ConsoleState {
  return {
    telemetry: null,
    missions: {},
    runs: {},
    alarms: {},
    doorStates: {},
    commandLog: [],
    recordCount: 0,
    lastSeq: 0,
    faults: [],
  };
}

export interface Snapshot {
  telemetry: Telemetry;
  missions: Mission[];
  runs: Run[];
  alarms: Alarm[];
  doors: { id: string; state: string }[];
}

/** Rebuild the store from REST responses (initial load / hard refresh). */
export function applySnapshot(state: ConsoleState, snap: Snapshot): ConsoleState {
  const next = initialState();
  next.telemetry = snap.telemetry;
  for (const m of snap.missions) next.missions[m.id] = m;
  for (const r of snap.runs) next.runs[r.run_id] = r;
  for (const a of snap.alarms) next.alarms[a.alarm_id] = a;
  for (const d of snap.doors) next.doorStates[d.id] = d.state;
  next.lastSeq = state.lastSeq;
  return next;
}

const COMMAND_LOG_LIMIT = 200;

/** Apply one stream event. Events at or below lastSeq are ignored so a
 * resumed stream can safely overlap with the snapshot. */
export function reduce(state: ConsoleState, ev: RmsEvent): ConsoleState {
  if (ev.seq <= state.lastSeq) return state;
  const next: ConsoleState = { ...state, lastSeq: ev.seq };
  const p = ev.payload as Record<string, any>;
  switch (ev.kind) {
    case "telemetry":
      next.telemetry = p as Telemetry;
      break;
    case "run": {
      const existing = next.runs[p.run_id];
      const base: Run = existing ?? {
        run_id: String(p.run_id),
        mission_id: "",
        state: "PENDING",
        started: null,
        ended: null,
        cursor: 0,
        outcomes: [],
        notes: [],
      };
      next.runs = { ...next.runs, [p.run_id]: { ...base, ...p } };
      break;
    }
    case "alarm":
      next.alarms = { ...next.alarms, [p.alarm_id]: p as Alarm };
      break;
    case "door":
      next.doorStates = { ...next.doorStates, [p.door_id]: p.state };
      break;
    case "command":
      next.commandLog = [
        ...next.commandLog,
        { seq: ev.seq, t: ev.t, kind: p.kind },
      ].slice(-COMMAND_LOG_LIMIT);
      break;
    case "record":
      next.recordCount = next.recordCount + 1;
      break;
    case "fault":
      next.faults = [
        ...next.faults,
        { t: ev.t, reason: String(p.reason ?? "fault"), severity: String(p.severity ?? "WARNING") },
      ];
      break;
    default:
      break; // mode / lift / dock / bump only matter for the activity feed
  }
  return next;
}

export function reduceAll(state: ConsoleState, events: RmsEvent[]): ConsoleState {
  return events.reduce(reduce, state);
}

/** Alarms ordered OPEN first, then by severity, newest first within a group. */
export function sortedAlarms(state: ConsoleState): Alarm[] {
  const stateRank: Record<string, number> = { OPEN: 0, ACKNOWLEDGED: 1, RESOLVED: 2 };
  const sevRank: Record<string, number> = { CRITICAL: 0, WARNING: 1, INFO: 2 };
  return Object.values(state.alarms).sort((a, b) => {
    const s = (stateRank[a.state] ?? 9) - (stateRank[b.state] ?? 9);
    if (s !== 0) return s;
    const v = (sevRank[a.severity] ?? 9) - (sevRank[b.severity] ?? 9);
    if (v !== 0) return v;
    return b.alarm_id.localeCompare(a.alarm_id);
  });
}

/** The run currently shown in the control panel: active if any, else the
 * most recent one. */
export function focusedRun(state: ConsoleState): Run | null {
  const runs = Object.values(state.runs);
  if (runs.length === 0) return null;
  const active = runs.filter((r) =>
    ["RUNNING", "PAUSED", "PENDING"].includes(r.state),
  );
  const pool = active.length > 0 ? active : runs;
  return pool.sort((a, b) => b.run_id.localeCompare(a.run_id))[0];
}

export function runProgress(run: Run): { done: number; total: number } {
  const total = run.outcomes.length;
  const done = run.outcomes.filter((o) => o.status !== "PENDING").length;
  return { done, total };
}
