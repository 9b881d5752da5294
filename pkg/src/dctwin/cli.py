"""Command line entry points: run, replay, serve."""

from __future__ import annotations

import errno
import json
import signal
import socket
import sys
import threading
import time
from pathlib import Path

import click

from . import replay as replay_mod
from . import scenario as scenario_mod
from . import store as store_mod
from .engine import Engine
from .rms.core import RunState


@click.group()
def main():
    """Data-center inspection simulator, RMS, and digital twin."""


def _load_scenario(name: str, config: str | None) -> scenario_mod.Scenario:
    try:
        sc = scenario_mod.load(name)
    except scenario_mod.ScenarioError as exc:
        raise click.ClickException(str(exc))
    if config:
        import yaml

        overrides = yaml.safe_load(Path(config).read_text()) or {}
        data = scenario_mod.to_dict(sc)
        _deep_merge(data, overrides)
        sc = scenario_mod.from_dict(data)
    return sc


def _deep_merge(base: dict, extra: dict):
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(base.get(k), dict):
            _deep_merge(base[k], v)
        else:
            base[k] = v


def _paced_loop(engine: Engine, should_stop, accel: float):
    """Tick as fast as possible but never ahead of sim_time / accel."""
    wall_start = time.monotonic()
    sim_start = engine.t
    while not should_stop():
        engine.tick()
        ahead = (engine.t - sim_start) / accel - (time.monotonic() - wall_start)
        if ahead > 0.01:
            time.sleep(min(ahead, 0.05))


@main.command()
@click.argument("scenario_name", metavar="SCENARIO")
@click.option("--mission", default=None, help="Mission name or id (default: first in scenario).")
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--accel", default=100.0, show_default=True, type=float,
              help="Time acceleration factor (simulated seconds per wall second).")
@click.option("--out", default="./out", show_default=True,
              type=click.Path(file_okay=False))
@click.option("--config", default=None, type=click.Path(exists=True, dir_okay=False),
              help="YAML file with scenario overrides.")
def run(scenario_name, mission, seed, accel, out, config):
    """Run one mission to completion and write its artifacts.

    Exits 0 only if the run reaches COMPLETED. Writes report.json,
    report.csv, audit.json, and robot_log.xml into OUT.
    """
    if not (1.0 <= accel <= 1000.0):
        raise click.ClickException("accel must be in [1, 1000]")
    sc = _load_scenario(scenario_name, config)
    if not sc.missions:
        raise click.ClickException(f"scenario {sc.name} ships no missions")
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    engine = Engine(sc, seed=seed, store_dir=out_dir / "store")
    engine.accel = accel
    mission_name = mission or sc.missions[0].get("name") or sc.missions[0]["id"]
    try:
        run_obj = engine.start_mission(mission_name)
    except KeyError as exc:
        raise click.ClickException(str(exc))

    click.echo(f"scenario={sc.name} mission={mission_name} seed={seed} accel={accel}")
    _paced_loop(
        engine,
        lambda: run_obj.state.value in ("COMPLETED", "FAILED", "ABORTED"),
        accel,
    )
    engine.run_for(1.0)  # let telemetry and twin settle

    report = engine.rms.generate_report(run_obj.run_id)
    audit = engine.rms.accuracy_audit(run_obj.run_id)
    (out_dir / "report.json").write_text(store_mod.report_json(report))
    (out_dir / "report.csv").write_text(store_mod.report_csv(report))
    (out_dir / "audit.json").write_text(json.dumps(audit, sort_keys=True, indent=2) + "\n")
    (out_dir / "robot_log.xml").write_text(engine.rms.export_robot_log(run_obj.run_id))
    engine.close()

    click.echo(
        f"run {run_obj.run_id}: {run_obj.state.value}"
        f" sim_duration={(run_obj.ended or engine.t) - (run_obj.started or 0.0):.2f}s"
        f" points={sum(1 for o in run_obj.outcomes if o.status == 'DONE')}"
        f"/{len(run_obj.outcomes)}"
    )
    if run_obj.state is not RunState.COMPLETED:
        for note in run_obj.notes:
            click.echo(f"  note: {note}", err=True)
        alarms = [a for a in engine.rms.list_alarms() if a.kind.value == "ROBOT_FAULT"]
        for a in alarms:
            click.echo(f"  fault: {a.message}", err=True)
        sys.exit(1)


@main.command()
@click.argument("log_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--scenario", "scenario_name", default=None,
              help="Scenario name or path (default: the one recorded in the log).")
@click.option("--seed", default=None, type=int,
              help="Override the recorded seed (to demonstrate divergence).")
@click.option("--config", default=None, type=click.Path(exists=True, dir_okay=False))
def replay(log_file, scenario_name, seed, config):
    """Re-run a robot log and verify the timeline is reproduced.

    Exits 0 and prints "identical" when every logged transition and
    sensing entry matches; otherwise prints the first divergence and
    exits 1. A truncated or malformed log is a parse error (exit 2).
    """
    text = Path(log_file).read_text()
    try:
        parsed = store_mod.parse_robot_log(text)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    sc = _load_scenario(scenario_name or parsed["scenario"], config)
    result = replay_mod.replay_log(sc, text, seed=seed)
    click.echo(result.describe())
    sys.exit(0 if result.identical else 1)


@main.command()
@click.argument("scenario_name", metavar="SCENARIO")
@click.option("--port", default=8080, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--accel", default=1.0, show_default=True, type=float)
@click.option("--out", default=None, type=click.Path(file_okay=False),
              help="Journal directory (default: a temporary directory).")
@click.option("--config", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--ui", default=None, type=click.Path(exists=True, file_okay=False),
              help="Static directory to serve at / (the operator console).")
def serve(scenario_name, port, host, seed, accel, out, config, ui):
    """Serve the RMS HTTP API with the simulation ticking in-process."""
    import uvicorn

    from .rms.http import create_app

    if not (1.0 <= accel <= 1000.0):
        raise click.ClickException("accel must be in [1, 1000]")
    # fail fast with a clear message if the port is taken
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        probe.bind((host, port))
    except OSError as exc:
        if exc.errno == errno.EADDRINUSE:
            raise click.ClickException(f"port {port} is already in use")
        raise
    finally:
        probe.close()

    sc = _load_scenario(scenario_name, config)
    engine = Engine(sc, seed=seed, store_dir=out)
    engine.accel = accel
    lock = threading.Lock()
    app = create_app(engine, lock)
    if ui is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui, html=True), name="ui")
    stop = threading.Event()

    def tick_loop():
        wall_last = time.monotonic()
        while not stop.is_set():
            with lock:
                accel_now = engine.accel
                if not engine.paused:
                    engine.tick()
            # pace one dt of simulated time per dt/accel of wall time
            wall_last += engine.dt / accel_now
            delay = wall_last - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            else:
                wall_last = time.monotonic()

    ticker = threading.Thread(target=tick_loop, daemon=True)
    ticker.start()

    server = uvicorn.Server(uvicorn.Config(app, host=host, port=port, log_level="warning"))

    def shutdown(signum, frame):
        with lock:
            rid = engine.rms.active_run_id
            if rid is not None:
                try:
                    engine.rms.abort_run(rid)
                except Exception:
                    pass
            engine.store.close()
        stop.set()
        server.should_exit = True

    signal.signal(signal.SIGTERM, shutdown)
    signal.signal(signal.SIGINT, shutdown)
    click.echo(f"serving {sc.name} on http://{host}:{port} (accel={accel})")
    server.run()
    stop.set()
    ticker.join(timeout=2.0)


if __name__ == "__main__":
    main()
