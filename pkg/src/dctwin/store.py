"""Durable append-only storage for inspection data, alarms, commands,
telemetry, and report/robot-log exports.

Each stream is a JSON-lines journal. A record is acknowledged only after
it is flushed; recovery drops a torn tail line (no trailing newline or
invalid JSON) without losing any acknowledged record.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
from pathlib import Path
from xml.etree import ElementTree
from xml.sax.saxutils import quoteattr

STREAMS = ("inspections", "alarms", "commands", "telemetry", "runs")

# minimal per-stream schema: required fields
_SCHEMAS = {
    "inspections": ("t", "run_id", "point_index", "env", "led_readings"),
    "alarms": ("t", "alarm_id", "kind", "severity", "state"),
    "commands": ("t", "seq", "kind"),
    "telemetry": ("t", "x", "y", "heading", "battery_kwh", "mode"),
    "runs": ("t", "run_id", "state"),
}


class SchemaError(Exception):
    """Record rejected: missing required fields for its stream."""


class Journal:
    """One append-only JSONL stream with strictly increasing record ids."""

    def __init__(self, path: Path, required: tuple[str, ...]):
        self.path = path
        self.required = required
        self._records: list[dict] = []
        self._next_id = 1
        self._fh = None
        self._recover()

    def _recover(self):
        if self.path.exists():
            raw = self.path.read_bytes()
            for line in raw.split(b"\n")[:-1]:  # only newline-terminated lines count
                try:
                    rec = json.loads(line)
                except ValueError:
                    continue  # torn or corrupt line
                self._records.append(rec)
            if self._records:
                self._next_id = max(r["record_id"] for r in self._records) + 1
            # rewrite so a torn tail never accumulates
            with open(self.path, "w") as fh:
                for rec in self._records:
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")
        self._fh = open(self.path, "a")

    def append(self, record: dict) -> int:
        missing = [k for k in self.required if k not in record]
        if missing:
            raise SchemaError(f"record missing fields {missing}")
        rec = dict(record)
        rec["record_id"] = self._next_id
        line = json.dumps(rec, sort_keys=True) + "\n"
        self._fh.write(line)
        self._fh.flush()
        os.fsync(self._fh.fileno())
        self._next_id += 1
        self._records.append(rec)
        return rec["record_id"]

    def records(self) -> list[dict]:
        return list(self._records)

    def close(self):
        if self._fh:
            self._fh.close()
            self._fh = None


class Store:
    """File-backed store: one journal per stream under a root directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._journals = {
            name: Journal(self.root / f"{name}.jsonl", _SCHEMAS[name])
            for name in STREAMS
        }

    def append(self, stream: str, record: dict) -> int:
        return self._journals[stream].append(record)

    def query(self, stream: str, run_id: str | None = None, time_range=None) -> list[dict]:
        """Filtered, time-ordered records (matches a full-scan filter)."""
        out = []
        for rec in self._journals[stream].records():
            if run_id is not None and rec.get("run_id") != run_id:
                continue
            if time_range is not None:
                lo, hi = time_range
                if lo is not None and rec["t"] < lo:
                    continue
                if hi is not None and rec["t"] > hi:
                    continue
            out.append(rec)
        out.sort(key=lambda r: (r["t"], r["record_id"]))
        return out

    def close(self):
        for j in self._journals.values():
            j.close()


# --- robot log (XML) ----------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def robot_log_xml(run_id: str, scenario: str, seed: int, entries: list[dict]) -> str:
    """Serialize a run's command/transition/sensing timeline as XML.

    Attribute order is fixed so export -> parse -> export is a byte-level
    fixed point.
    """
    buf = io.StringIO()
    buf.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    buf.write(
        f'<robot-log run-id="{run_id}" scenario="{scenario}" seed="{seed}">\n'
    )
    for e in entries:
        kind = e["entry"]
        if kind == "command":
            buf.write(
                f'  <command t="{_fmt(e["t"])}" seq="{e["seq"]}" kind="{e["kind"]}"'
            )
            params = e.get("params") or {}
            wps = params.get("waypoints")
            simple = {
                k: v for k, v in sorted(params.items()) if k != "waypoints"
            }
            if simple:
                blob = json.dumps(simple, sort_keys=True)
                buf.write(f" params={quoteattr(blob)}")
            if wps:
                buf.write(">\n")
                for x, y in wps:
                    buf.write(f'    <waypoint x="{_fmt(float(x))}" y="{_fmt(float(y))}"/>\n')
                buf.write("  </command>\n")
            else:
                buf.write("/>\n")
        elif kind == "transition":
            buf.write(
                f'  <transition t="{_fmt(e["t"])}" from="{e["from"]}" to="{e["to"]}"'
                f' x="{_fmt(e["x"])}" y="{_fmt(e["y"])}" heading="{_fmt(e["heading"])}"/>\n'
            )
        elif kind == "sensing":
            buf.write(
                f'  <sensing t="{_fmt(e["t"])}" point="{e["point"]}" digest="{e["digest"]}"/>\n'
            )
        else:
            raise ValueError(f"unknown log entry kind {kind}")
    buf.write("</robot-log>\n")
    return buf.getvalue()


def parse_robot_log(text: str) -> dict:
    """Parse a robot-log XML document back into the entry-list form."""
    try:
        root = ElementTree.fromstring(text)
    except ElementTree.ParseError as exc:
        raise ValueError(f"robot log parse error: {exc}") from exc
    if root.tag != "robot-log":
        raise ValueError("not a robot-log document")
    entries = []
    for el in root:
        if el.tag == "command":
            params = {}
            if el.get("params"):
                params = json.loads(el.get("params"))
            wps = [
                (float(w.get("x")), float(w.get("y")))
                for w in el.findall("waypoint")
            ]
            if wps:
                params["waypoints"] = wps
            entries.append(
                {
                    "entry": "command",
                    "t": float(el.get("t")),
                    "seq": int(el.get("seq")),
                    "kind": el.get("kind"),
                    "params": params,
                }
            )
        elif el.tag == "transition":
            entries.append(
                {
                    "entry": "transition",
                    "t": float(el.get("t")),
                    "from": el.get("from"),
                    "to": el.get("to"),
                    "x": float(el.get("x")),
                    "y": float(el.get("y")),
                    "heading": float(el.get("heading")),
                }
            )
        elif el.tag == "sensing":
            entries.append(
                {
                    "entry": "sensing",
                    "t": float(el.get("t")),
                    "point": int(el.get("point")),
                    "digest": el.get("digest"),
                }
            )
    return {
        "run_id": root.get("run-id"),
        "scenario": root.get("scenario"),
        "seed": int(root.get("seed")),
        "entries": entries,
    }


def readout_digest(readout: dict) -> str:
    """Stable digest of one sensor readout, used for replay comparison."""
    blob = json.dumps(readout, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


# --- report exports -----------------------------------------------------


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _num(v):
    if isinstance(v, float):
        return f"{v:.3f}"
    return str(v)


def report_csv(report: dict) -> str:
    """Flatten the three report sections into three tables, marked by a
    leading ``section`` column. Numbers carry fixed 3-decimal precision."""
    lines = []
    lines.append("section,channel,min,max,mean,violations")
    for ch in sorted(report["environmental"]["channels"]):
        st = report["environmental"]["channels"][ch]
        lines.append(
            "environmental,%s,%s,%s,%s,%d"
            % (ch, _num(st["min"]), _num(st["max"]), _num(st["mean"]), st["violations"])
        )
    lines.append("")
    lines.append("section,rack_id,worst_led,ok_count,warning_count,error_count")
    for row in report["equipment"]["racks"]:
        lines.append(
            "equipment,%s,%s,%d,%d,%d"
            % (row["rack_id"], row["worst_led"], row["ok_count"],
               row["warning_count"], row["error_count"])
        )
    lines.append("")
    lines.append("section,alarm_id,kind,severity,subject,value,threshold,state,record_id")
    for al in report["alarms"]["items"]:
        lines.append(
            "alarms,%s,%s,%s,%s,%s,%s,%s,%s"
            % (
                al["alarm_id"], al["kind"], al["severity"], al["subject"],
                _num(al.get("value", "")) if al.get("value") is not None else "",
                _num(al.get("threshold", "")) if al.get("threshold") is not None else "",
                al["state"], al.get("record_id", ""),
            )
        )
    return "\n".join(lines) + "\n"
