/** Wire types for the RMS HTTP API. */

export interface Telemetry {
  robot_id: string;
  t: number;
  x: number;
  y: number;
  heading: number;
  speed: number;
  lift_height: number;
  battery_kwh: number;
  battery_pct: number;
  mode: string;
  run_id: string | null;
  point_index: number | null;
}

export interface MissionPoint {
  index: number;
  x: number;
  y: number;
  rack_id?: string | null;
  lift_heights: number[];
  sensors: string[];
}

export interface Mission {
  id: string;
  name: string;
  dwell_seconds: number;
  points: MissionPoint[];
}

export interface PointOutcome {
  index: number;
  status: string;
  reason?: string | null;
}

export interface Run {
  run_id: string;
  mission_id: string;
  state: string;
  started: number | null;
  ended: number | null;
  cursor: number;
  outcomes: PointOutcome[];
  notes: string[];
}

export interface Alarm {
  alarm_id: string;
  kind: string;
  severity: string;
  subject: string;
  state: string;
  value?: number | null;
  threshold?: number | null;
  run_id?: string | null;
  acked_by?: string | null;
  record_ids?: number[];
}

export interface DoorModel {
  id: string;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  state: string;
}

export interface RackModel {
  id: string;
  x: number;
  y: number;
  heading: number;
  width: number;
  depth: number;
  servers: string[];
}

export interface FloorModel {
  name: string;
  floor: { width: number; depth: number };
  cell_size: number;
  racks: RackModel[];
  doors: DoorModel[];
  charging_stations: { id: string; x: number; y: number; heading: number }[];
}

export interface RmsEvent {
  seq: number;
  t: number;
  kind: string;
  payload: Record<string, unknown>;
}

export interface ApiError {
  code: string;
  message: string;
  details: Record<string, unknown>;
}
