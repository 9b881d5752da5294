/** Thin typed client for the RMS HTTP API. */

import type {
  Alarm,
  ApiError,
  FloorModel,
  Mission,
  Run,
  Telemetry,
} from "./types";

export class ApiRequestError extends Error {
  constructor(
    public status: number,
    public body: ApiError,
  ) {
    super(`${body.code}: ${body.message}`);
  }
}

export class ApiClient {
  constructor(
    private base = "",
    private fetchFn: typeof fetch = fetch.bind(globalThis),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await this.fetchFn(`${this.base}${path}`, {
      method,
      headers: body !== undefined ? { "content-type": "application/json" } : {},
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    if (!resp.ok) {
      let err: ApiError;
      try {
        err = (await resp.json()) as ApiError;
      } catch {
        err = { code: "http_error", message: resp.statusText, details: {} };
      }
      throw new ApiRequestError(resp.status, err);
    }
    return (await resp.json()) as T;
  }

  model(): Promise<FloorModel> {
    return this.request("GET", "/api/v1/model");
  }

  telemetry(robotId = "r1"): Promise<Telemetry> {
    return this.request("GET", `/api/v1/robots/${robotId}/telemetry`);
  }

  sendCommand(robotId: string, kind: string, params: Record<string, unknown> = {}) {
    return this.request<{ seq: number }>(
      "POST", `/api/v1/robots/${robotId}/commands`, { kind, params });
  }

  missions(): Promise<Mission[]> {
    return this.request("GET", "/api/v1/missions");
  }

  createMission(mission: Mission): Promise<Mission> {
    return this.request("POST", "/api/v1/missions", mission);
  }

  startRun(missionId: string, queue = false): Promise<Run> {
    return this.request("POST", `/api/v1/missions/${missionId}/runs`, { queue });
  }

  runs(): Promise<Run[]> {
    return this.request("GET", "/api/v1/runs");
  }

  runAction(runId: string, action: "pause" | "resume" | "abort"): Promise<Run> {
    return this.request("POST", `/api/v1/runs/${runId}/${action}`);
  }

  report(runId: string): Promise<Record<string, unknown>> {
    return this.request("GET", `/api/v1/runs/${runId}/report`);
  }

  audit(runId: string): Promise<Record<string, unknown>> {
    return this.request("GET", `/api/v1/runs/${runId}/audit`);
  }

  alarms(state?: string): Promise<Alarm[]> {
    const q = state ? `?state=${state}` : "";
    return this.request("GET", `/api/v1/alarms${q}`);
  }

  ackAlarm(alarmId: string, actor = "console"): Promise<Alarm> {
    return this.request("POST", `/api/v1/alarms/${alarmId}/ack`, { actor });
  }

  resolveAlarm(alarmId: string): Promise<Alarm> {
    return this.request("POST", `/api/v1/alarms/${alarmId}/resolve`);
  }

  rackPanel(rackId: string): Promise<Record<string, unknown>> {
    return this.request("GET", `/api/v1/racks/${rackId}/panel`);
  }

  tabletCommand(rackId: string, action: string, alarmId?: string) {
    return this.request<Record<string, unknown>>(
      "POST", `/twin/tablet/${rackId}/command`,
      { action, alarm_id: alarmId });
  }
}
