"""Shared fixtures: a small fast scenario and engine builders."""

import pytest

from dctwin import scenario as scenario_mod
from dctwin.engine import Engine

SMALL_DOC = {
    "name": "small",
    "floor": {"width": 12.0, "depth": 10.0},
    "cell_size": 0.25,
    "ambient": {"temperature_c": 22.0, "humidity_pct": 45.0,
                "noise_db": 60.0, "pm25_ugm3": 8.0},
    "robot": {"start": {"x": 1.5, "y": 1.5, "heading": 0.0}, "battery_frac": 1.0},
    "sensors": {"p_misread": 0.01, "sigma_temp": 0.2, "sigma_hum": 1.0, "range": 1.2},
    "thresholds": {
        "temperature_c": [15.0, 30.0],
        "humidity_pct": [30.0, 70.0],
        "noise_db": [None, 75.0],
        "pm25_ugm3": [None, 35.0],
        "low_battery": 0.25,
    },
    "rack_defaults": {"width": 0.6, "depth": 1.1, "u_slots": 42,
                      "servers_per_rack": 2, "server_height_u": 5,
                      "knowledge_key": "srv-model-a"},
    "racks": [
        {"id": "R1", "x": 4.0, "y": 5.0, "heading": 0.0},
        {"id": "R2", "x": 8.0, "y": 5.0, "heading": 0.0},
    ],
    "doors": [
        {"id": "d1", "x1": 5.5, "y1": 8.0, "x2": 6.5, "y2": 8.0,
         "state": "CLOSED", "actuation_delay": 2.0},
    ],
    "charging_stations": [{"id": "cs1", "x": 1.0, "y": 1.0, "heading": 0.0}],
    "heat_sources": [{"x": 4.0, "y": 5.0, "power": 300.0}],
    "env_zones": [],
    "fault_schedule": [
        {"server_id": "R1-S2", "start": 0.0, "end": 100000.0, "led": "ERROR"},
    ],
    "knowledge": [
        ["srv-model-a", "manual", "kb://manuals/srv-model-a"],
        ["R1-S2", "maintenance_ticket", "ticket-1"],
    ],
    "missions": [
        {
            "id": "mini",
            "name": "mini",
            "dwell_seconds": 4.0,
            "points": [
                {"index": 1, "x": 5.3, "y": 5.0, "rack_id": "R1",
                 "lift_heights": [0.5], "sensors": ["ENV", "LED"]},
                {"index": 2, "x": 9.3, "y": 5.0, "rack_id": "R2",
                 "lift_heights": [0.5], "sensors": ["ENV", "LED"]},
            ],
        }
    ],
}


def make_small_scenario(**overrides):
    doc = {k: (dict(v) if isinstance(v, dict) else v) for k, v in SMALL_DOC.items()}
    doc.update(overrides)
    return scenario_mod.from_dict(doc)


@pytest.fixture
def small_scenario():
    return make_small_scenario()


@pytest.fixture
def engine(small_scenario, tmp_path):
    eng = Engine(small_scenario, seed=42, store_dir=tmp_path / "store")
    yield eng
    eng.close()


@pytest.fixture
def dc140():
    return scenario_mod.load("dc140")
