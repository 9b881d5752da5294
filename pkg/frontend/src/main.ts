/** Console entry point: hydrate from REST, subscribe to the event
 * stream, and wire the panels. */

import { ApiClient, ApiRequestError } from "./api";
import { fmtDuration, fmtPct, runStateClass } from "./format";
import { nearestRack } from "./geometry";
import { MapView } from "./map";
import {
  addPoint,
  emptyDraft,
  removePoint,
  toRequestBody,
  validateDraft,
  type MissionDraft,
} from "./mission";
import {
  applySnapshot,
  focusedRun,
  initialState,
  reduceAll,
  runProgress,
  sortedAlarms,
  type ConsoleState,
} from "./state";
import { EventStream } from "./sse";
import type { FloorModel } from "./types";

const api = new ApiClient("");
let state: ConsoleState = initialState();
let draft: MissionDraft | null = null;
let model: FloorModel | null = null;
let map: MapView | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setStatus(text: string, bad = false): void {
  const bar = el<HTMLElement>("status");
  bar.textContent = text;
  bar.className = bad ? "bad" : "";
}

async function call<T>(work: Promise<T>): Promise<T | null> {
  try {
    return await work;
  } catch (e) {
    if (e instanceof ApiRequestError) setStatus(e.message, true);
    else setStatus(String(e), true);
    return null;
  }
}

function renderTelemetry(): void {
  const t = state.telemetry;
  if (!t) return;
  el("tel-mode").textContent = t.mode;
  el("tel-pose").textContent =
    `(${t.x.toFixed(2)}, ${t.y.toFixed(2)}) @ ${t.heading.toFixed(2)} rad`;
  el("tel-speed").textContent = `${t.speed.toFixed(2)} m/s`;
  el("tel-lift").textContent = `${t.lift_height.toFixed(2)} m`;
  el("tel-battery").textContent = fmtPct(t.battery_pct);
  el("tel-clock").textContent = fmtDuration(t.t);
}

function renderRun(): void {
  const run = focusedRun(state);
  const box = el("run-box");
  if (!run) {
    box.innerHTML = "<em>no runs yet</em>";
    return;
  }
  const { done, total } = runProgress(run);
  const duration =
    run.started !== null
      ? fmtDuration((run.ended ?? state.telemetry?.t ?? run.started) - run.started)
      : "-";
  box.innerHTML = `
    <div><b>${run.run_id}</b> (${run.mission_id})
      <span class="${runStateClass(run.state)}">${run.state}</span></div>
    <div>points ${done}/${total} &middot; ${duration}</div>
    <div>${run.notes.join("; ")}</div>`;
  (el<HTMLButtonElement>("btn-pause")).dataset.run = run.run_id;
  (el<HTMLButtonElement>("btn-resume")).dataset.run = run.run_id;
  (el<HTMLButtonElement>("btn-abort")).dataset.run = run.run_id;
  (el<HTMLButtonElement>("btn-report")).dataset.run = run.run_id;
}

function renderAlarms(): void {
  const list = el("alarm-list");
  list.innerHTML = "";
  for (const alarm of sortedAlarms(state).slice(0, 50)) {
    const row = document.createElement("div");
    row.className = `alarm ${alarm.state.toLowerCase()}`;
    row.innerHTML = `<span>[${alarm.severity}] ${alarm.kind} ${alarm.subject}
      (${alarm.state})</span>`;
    if (alarm.state === "OPEN") {
      const ack = document.createElement("button");
      ack.textContent = "ack";
      ack.onclick = () => void call(api.ackAlarm(alarm.alarm_id));
      row.appendChild(ack);
    } else if (alarm.state === "ACKNOWLEDGED") {
      const res = document.createElement("button");
      res.textContent = "resolve";
      res.onclick = () => void call(api.resolveAlarm(alarm.alarm_id));
      row.appendChild(res);
    }
    list.appendChild(row);
  }
}

function renderCommandLog(): void {
  el("cmd-log").textContent = state.commandLog
    .slice(-12)
    .map((c) => `#${c.seq} ${fmtDuration(c.t)} ${c.kind}`)
    .join("\n");
}

function renderMissions(): void {
  const sel = el<HTMLSelectElement>("mission-select");
  const current = sel.value;
  sel.innerHTML = "";
  for (const m of Object.values(state.missions)) {
    const opt = document.createElement("option");
    opt.value = m.id;
    opt.textContent = `${m.id} (${m.points.length} pts)`;
    sel.appendChild(opt);
  }
  if (current) sel.value = current;
}

function renderDraft(): void {
  const box = el("draft-box");
  if (!draft) {
    box.textContent = "click 'new mission', then click the map to add points";
    return;
  }
  const errors = validateDraft(draft, model?.floor);
  box.innerHTML = `
    <div>draft <b>${draft.id || "(unnamed)"}</b>: ${draft.points.length} points,
      dwell ${draft.dwell_seconds}s</div>
    <div>${draft.points
      .map((p) => `#${p.index} (${p.x.toFixed(1)}, ${p.y.toFixed(1)})` +
                  (p.rack_id ? ` ${p.rack_id}` : ""))
      .join(" &middot; ")}</div>
    <div class="bad">${errors.join("<br>")}</div>`;
}

function renderAll(): void {
  renderTelemetry();
  renderRun();
  renderAlarms();
  renderCommandLog();
  renderMissions();
  renderDraft();
  if (map) map.render(state, draft);
}

async function hydrate(): Promise<void> {
  const [telemetry, missions, runs, alarms] = await Promise.all([
    api.telemetry(),
    api.missions(),
    api.runs(),
    api.alarms(),
  ]);
  model = model ?? (await api.model());
  state = applySnapshot(state, {
    telemetry,
    missions,
    runs,
    alarms,
    doors: model.doors.map((d) => ({ id: d.id, state: d.state })),
  });
  renderAll();
}

function wire(): void {
  const canvas = el<HTMLCanvasElement>("map");
  if (model) map = new MapView(canvas, model);

  canvas.addEventListener("click", (e) => {
    if (!draft || !map || !model) return;
    const rect = canvas.getBoundingClientRect();
    const [wx, wy] = map.worldAt(e.clientX - rect.left, e.clientY - rect.top);
    const rack = nearestRack(model.racks, wx, wy);
    draft = addPoint(draft, Math.round(wx * 10) / 10, Math.round(wy * 10) / 10,
                     rack ? rack.id : null);
    renderAll();
  });

  el("btn-new-mission").onclick = () => {
    const id = prompt("mission id?") ?? "";
    draft = { ...emptyDraft(), id, name: id };
    renderAll();
  };
  el("btn-undo-point").onclick = () => {
    if (draft && draft.points.length > 0)
      draft = removePoint(draft, draft.points.length);
    renderAll();
  };
  el("btn-submit-mission").onclick = () => {
    if (!draft) return;
    const errors = validateDraft(draft, model?.floor);
    if (errors.length > 0) {
      setStatus(errors[0], true);
      return;
    }
    void call(api.createMission(toRequestBody(draft))).then((m) => {
      if (m) {
        draft = null;
        setStatus(`mission ${m.id} created`);
        void hydrate();
      }
    });
  };
  el("btn-start-run").onclick = () => {
    const id = el<HTMLSelectElement>("mission-select").value;
    if (id) void call(api.startRun(id)).then(() => void hydrate());
  };
  for (const action of ["pause", "resume", "abort"] as const) {
    el(`btn-${action}`).onclick = (e) => {
      const runId = (e.target as HTMLElement).dataset.run;
      if (runId) void call(api.runAction(runId, action));
    };
  }
  el("btn-report").onclick = (e) => {
    const runId = (e.target as HTMLElement).dataset.run;
    if (runId)
      void call(api.report(runId)).then((rep) => {
        if (rep) el("report-box").textContent = JSON.stringify(rep, null, 2);
      });
  };

  // manual controls
  el("btn-jog").onclick = () => {
    const linear = parseFloat(el<HTMLInputElement>("jog-linear").value) || 0;
    const angular = parseFloat(el<HTMLInputElement>("jog-angular").value) || 0;
    void call(api.sendCommand("r1", "JOG", { linear, angular }));
  };
  el("btn-stop").onclick = () => void call(api.sendCommand("r1", "STOP"));
  el("btn-estop").onclick = () => void call(api.sendCommand("r1", "ESTOP"));
  el("btn-dock").onclick = () => void call(api.sendCommand("r1", "DOCK"));
  el("btn-lift").onclick = () => {
    const height = parseFloat(el<HTMLInputElement>("lift-height").value) || 0;
    void call(api.sendCommand("r1", "SET_LIFT", { height }));
  };
}

async function start(): Promise<void> {
  model = await api.model();
  wire();
  await hydrate();
  const stream = new EventStream("", {
    onEvents: (events) => {
      state = reduceAll(state, events);
      renderAll();
    },
  });
  stream.start(state.lastSeq);
  setStatus(`connected to ${model.name}`);
}

void start().catch((e) => setStatus(String(e), true));
