"""Generate the shipped dc140 scenario: 27.5 m x 19 m floor (522.5 m^2),
140 racks in 7 rows of 20, 1.8 m aisles, and the 114-point full-sweep
mission. Run from the repo root:

    python tools/gen_dc140.py
"""

import io
from pathlib import Path

ROWS = 7
RACKS_PER_ROW = 20
RACK_W, RACK_D = 0.6, 1.1
ROW_PITCH = 2.9          # rack depth + 1.8 m aisle
X0 = 5.05                # first row center x
Y0 = 3.8                 # first rack center y
AISLE_OFFSET = 1.45      # row center -> aisle centerline
POINTS_PER_ROW = [17, 17, 16, 16, 16, 16, 16]  # = 114


def rack_rows():
    for k in range(ROWS):
        x = round(X0 + ROW_PITCH * k, 4)
        for j in range(RACKS_PER_ROW):
            y = round(Y0 + RACK_W * j, 4)
            yield f"R{k + 1}{j + 1:02d}", x, y


def mission_points():
    idx = 0
    pts = []
    for k, n in enumerate(POINTS_PER_ROW):
        x = round(X0 + ROW_PITCH * k + AISLE_OFFSET, 4)
        ys = [round(Y0 + 11.4 * i / (n - 1), 4) for i in range(n)]
        if k % 2 == 1:
            ys.reverse()
        for y in ys:
            idx += 1
            j = round((y - Y0) / RACK_W)
            j = min(max(j, 0), RACKS_PER_ROW - 1)
            rack = f"R{k + 1}{j + 1:02d}"
            lifts = [0.5, 1.5] if idx % 2 == 1 else [1.5, 0.5]
            pts.append((idx, x, y, rack, lifts))
    return pts


def main():
    buf = io.StringIO()
    w = buf.write
    w("# dc140: normative example scenario.\n")
    w("# 27.5 m x 19 m floor (522.5 m^2), 140 racks in 7 rows of 20,\n")
    w("# 1.8 m aisles, one charging station, one door, 114-point sweep.\n")
    w("name: dc140\n")
    w("floor: {width: 27.5, depth: 19.0}\n")
    w("cell_size: 0.25\n")
    w("calibration: {heat_k: 0.02, heat_sigma: 1.5}\n")
    w("ambient: {temperature_c: 22.0, humidity_pct: 45.0, noise_db: 62.0, pm25_ugm3: 8.0}\n")
    w("robot:\n")
    w("  start: {x: 2.0, y: 2.0, heading: 0.0}\n")
    w("  battery_frac: 1.0\n")
    w("sensors: {p_misread: 0.01, sigma_temp: 0.2, sigma_hum: 1.0, range: 1.2}\n")
    w("thresholds:\n")
    w("  temperature_c: [15.0, 30.0]\n")
    w("  humidity_pct: [30.0, 70.0]\n")
    w("  noise_db: [null, 75.0]\n")
    w("  pm25_ugm3: [null, 35.0]\n")
    w("  low_battery: 0.25\n")
    w("rack_defaults: {width: 0.6, depth: 1.1, u_slots: 42, servers_per_rack: 8, server_height_u: 5, knowledge_key: srv-model-a}\n")
    w("racks:\n")
    for rid, x, y in rack_rows():
        w(f"  - {{id: {rid}, x: {x}, y: {y}, heading: 0.0}}\n")
    w("doors:\n")
    w("  - {id: d-entry, x1: 26.5, y1: 2.0, x2: 27.5, y2: 2.0, state: OPEN, actuation_delay: 2.0}\n")
    w("charging_stations:\n")
    w("  - {id: cs1, x: 1.5, y: 1.5, heading: 0.0}\n")
    w("heat_sources:\n")
    w("  - {x: 9.4, y: 9.5, power: 600.0}\n")
    w("env_zones:\n")
    w("  - {channel: noise_db, x0: 18.0, y0: 0.0, x1: 27.5, y1: 19.0, delta: 6.0}\n")
    w("fault_schedule:\n")
    w("  - {server_id: R305-S2, start: 0.0, end: 100000.0, led: ERROR}\n")
    w("  - {server_id: R512-S5, start: 0.0, end: 100000.0, led: WARNING}\n")
    w("  - {server_id: R110-S1, start: 600.0, end: 2400.0, led: ERROR}\n")
    w("knowledge:\n")
    w("  - [srv-model-a, manual, 'kb://manuals/srv-model-a']\n")
    w("  - [srv-model-a, spec, '5U dual-socket 500W']\n")
    w("  - [srv-model-a, vendor, ExampleCorp]\n")
    w("  - [R305-S2, maintenance_ticket, 'ticket-4711']\n")
    w("missions:\n")
    w("  - id: full-sweep\n")
    w("    name: full-sweep\n")
    w("    dwell_seconds: 25.0\n")
    w("    points:\n")
    for idx, x, y, rack, lifts in mission_points():
        w(
            f"      - {{index: {idx}, x: {x}, y: {y}, rack_id: {rack}, "
            f"lift_heights: [{lifts[0]}, {lifts[1]}], sensors: [ENV, LED]}}\n"
        )
    out = Path(__file__).resolve().parent.parent / "src" / "dctwin" / "scenarios" / "dc140.yaml"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(buf.getvalue())
    print(f"wrote {out} ({len(buf.getvalue())} bytes)")


if __name__ == "__main__":
    main()
