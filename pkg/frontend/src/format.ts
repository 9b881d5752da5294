/** Small display formatting helpers. */

/** Simulated seconds as h:mm:ss (or m:ss below one hour). */
export function fmtDuration(seconds: number): string {
  const s = Math.max(0, Math.round(seconds));
  const h = Math.floor(s / 3600);
  const m = Math.floor((s % 3600) / 60);
  const sec = s % 60;
  const mm = String(m).padStart(2, "0");
  const ss = String(sec).padStart(2, "0");
  return h > 0 ? `${h}:${mm}:${ss}` : `${m}:${ss}`;
}

export function fmtPct(fraction0to100: number): string {
  return `${fraction0to100.toFixed(1)}%`;
}

export function fmtMeters(v: number): string {
  return `${v.toFixed(2)} m`;
}

/** Run state to a semantic CSS class. */
export function runStateClass(state: string): string {
  switch (state) {
    case "RUNNING":
      return "ok";
    case "COMPLETED":
      return "ok";
    case "PAUSED":
    case "PENDING":
      return "warn";
    case "FAILED":
    case "ABORTED":
      return "bad";
    default:
      return "";
  }
}
