"""World model: geometry, environmental field, LED truth, occupancy,
door actuation."""

import math

import pytest
from hypothesis import given, settings, strategies as st

from dctwin import scenario as scenario_mod
from dctwin.world import (
    Ambient,
    DataCenterModel,
    Door,
    DoorState,
    FaultEvent,
    HeatSource,
    LedState,
    ModelError,
    Rack,
    ServerUnit,
    World,
    env_sample,
    led_state,
    occupancy_grid,
)

from conftest import make_small_scenario


def _rack(rid="R1", x=4.0, y=5.0, heading=0.0, servers=()):
    return Rack(id=rid, x=x, y=y, heading=heading, servers=servers)


def _model(**kw):
    defaults = dict(floor_width=12.0, floor_depth=10.0)
    defaults.update(kw)
    return DataCenterModel(**defaults)


class TestGeometry:
    def test_tablet_anchor_heading_zero(self):
        r = _rack()
        ax, ay = r.tablet_anchor
        assert ax == pytest.approx(4.0 + 1.1 / 2.0)
        assert ay == pytest.approx(5.0)

    def test_tablet_anchor_rotated(self):
        r = _rack(heading=math.pi / 2.0)
        ax, ay = r.tablet_anchor
        assert ax == pytest.approx(4.0)
        assert ay == pytest.approx(5.0 + 0.55)

    def test_footprint_area(self):
        assert _rack().footprint().area == pytest.approx(0.6 * 1.1)

    def test_footprint_rotation_preserves_area(self):
        assert _rack(heading=0.7).footprint().area == pytest.approx(0.66)


class TestValidation:
    def test_valid_model_has_no_violations(self, small_scenario):
        assert small_scenario.model.validate() == []

    def test_overlapping_racks_detected(self):
        m = _model(racks=[_rack("R1"), _rack("R2", x=4.2)])
        assert any("overlap" in v.lower() for v in m.validate())

    def test_rack_outside_floor_detected(self):
        m = _model(racks=[_rack("R1", x=11.9)])
        assert m.validate()

    def test_duplicate_rack_ids_detected(self):
        m = _model(racks=[_rack("R1"), _rack("R1", x=8.0)])
        assert any("duplicate" in v.lower() for v in m.validate())

    def test_fault_for_unknown_server_detected(self):
        m = _model(
            racks=[_rack("R1")],
            fault_schedule=[FaultEvent("nope-S1", 0.0, 10.0, LedState.ERROR)],
        )
        assert any("nope-S1" in v for v in m.validate())

    def test_overlapping_server_slots_detected(self):
        servers = (
            ServerUnit("R1-S1", "R1", slot_start=1, slot_height=5),
            ServerUnit("R1-S2", "R1", slot_start=4, slot_height=5),
        )
        m = _model(racks=[_rack("R1", servers=servers)])
        assert m.validate()

    def test_scenario_load_raises_model_error(self):
        with pytest.raises(ModelError):
            make_small_scenario(racks=[
                {"id": "R1", "x": 4.0, "y": 5.0, "heading": 0.0},
                {"id": "R1", "x": 8.0, "y": 5.0, "heading": 0.0},
            ])


class TestEnvField:
    def test_ambient_far_from_sources(self):
        m = _model(ambient=Ambient(22.0, 45.0, 60.0, 8.0))
        s = env_sample(m, 6.0, 5.0, 0.0)
        assert s.temperature_c == pytest.approx(22.0)
        assert s.humidity_pct == pytest.approx(45.0)

    def test_heat_source_peak_and_falloff(self):
        # [DERIVED] T(d) = 22 + 300 * 0.02 * exp(-d^2 / (2 * 1.5^2))
        m = _model(heat_sources=[HeatSource(6.0, 5.0, 300.0)])
        assert env_sample(m, 6.0, 5.0, 0.0).temperature_c == pytest.approx(28.0)
        expected = 22.0 + 6.0 * math.exp(-(1.5 ** 2) / 4.5)
        assert env_sample(m, 7.5, 5.0, 0.0).temperature_c == pytest.approx(expected)

    def test_heat_sources_superpose(self):
        m = _model(heat_sources=[HeatSource(6.0, 5.0, 300.0),
                                 HeatSource(6.0, 5.0, 100.0)])
        assert env_sample(m, 6.0, 5.0, 0.0).temperature_c == pytest.approx(30.0)

    def test_env_zone_offsets_channel(self, small_scenario):
        doc_model = make_small_scenario(env_zones=[
            {"channel": "noise_db", "x0": 0.0, "y0": 0.0, "x1": 6.0, "y1": 10.0,
             "delta": 6.0},
        ]).model
        inside = env_sample(doc_model, 2.0, 2.0, 0.0)
        outside = env_sample(doc_model, 9.3, 5.0, 0.0)
        assert inside.noise_db == pytest.approx(outside.noise_db + 6.0)

    def test_outside_floor_rejected(self):
        with pytest.raises(ValueError):
            env_sample(_model(), 13.0, 5.0, 0.0)

    @settings(max_examples=50, deadline=None)
    @given(x=st.floats(0.1, 11.9), y=st.floats(0.1, 9.9),
           power=st.floats(0.0, 2000.0))
    def test_temperature_never_below_ambient(self, x, y, power):
        m = _model(heat_sources=[HeatSource(6.0, 5.0, power)])
        s = env_sample(m, x, y, 0.0)
        assert s.temperature_c >= m.ambient.temperature_c - 1e-12


class TestLedTruth:
    def _faulty_model(self):
        servers = (
            ServerUnit("R1-S1", "R1", 1, 5),
            ServerUnit("R1-S2", "R1", 6, 5),
        )
        return _model(
            racks=[_rack("R1", servers=servers)],
            fault_schedule=[
                FaultEvent("R1-S1", 10.0, 20.0, LedState.WARNING),
                FaultEvent("R1-S1", 15.0, 30.0, LedState.ERROR),
            ],
        )

    def test_nominal_outside_fault_window(self):
        m = self._faulty_model()
        assert led_state(m, "R1-S1", 5.0) is LedState.OK
        assert led_state(m, "R1-S1", 35.0) is LedState.OK

    def test_fault_window_half_open(self):
        m = self._faulty_model()
        assert led_state(m, "R1-S1", 10.0) is LedState.WARNING
        assert led_state(m, "R1-S1", 20.0) is LedState.ERROR  # second fault active
        assert led_state(m, "R1-S1", 30.0) is LedState.OK

    def test_worst_overlapping_fault_wins(self):
        m = self._faulty_model()
        assert led_state(m, "R1-S1", 17.0) is LedState.ERROR

    def test_unaffected_server_stays_nominal(self):
        m = self._faulty_model()
        assert led_state(m, "R1-S2", 17.0) is LedState.OK

    def test_unknown_server_raises(self):
        with pytest.raises(KeyError):
            led_state(self._faulty_model(), "ghost", 0.0)


class TestOccupancy:
    def test_rack_cells_blocked_free_floor_not(self, small_scenario):
        g = occupancy_grid(small_scenario.model)
        assert not g.free_at(4.0, 5.0)   # rack center
        assert g.free_at(2.0, 2.0)       # open floor

    def test_dimensions(self, small_scenario):
        g = occupancy_grid(small_scenario.model)
        assert (g.nx, g.ny) == (48, 40)

    def test_closed_door_blocks_open_door_does_not(self, small_scenario):
        m = small_scenario.model
        closed = occupancy_grid(m, closed_doors={"d1"})
        opened = occupancy_grid(m, closed_doors=set())
        assert not closed.free_at(6.0, 8.0)
        assert opened.free_at(6.0, 8.0)

    def test_cell_roundtrip(self, small_scenario):
        g = occupancy_grid(small_scenario.model)
        i, j = g.cell_of(3.14, 2.72)
        cx, cy = g.center(i, j)
        assert abs(cx - 3.14) <= g.cell_size / 2.0
        assert abs(cy - 2.72) <= g.cell_size / 2.0


class TestWorldRuntime:
    def test_door_actuation_delay(self, small_scenario):
        w = World(small_scenario.model)
        assert w.door_state("d1") is DoorState.CLOSED
        ack = w.actuate_door("d1", DoorState.OPEN)
        assert ack["effective_time"] == pytest.approx(2.0)
        w.advance(1.0)
        assert w.door_state("d1") is DoorState.CLOSED
        changed = w.advance(2.0)
        assert changed == ["d1"]
        assert w.door_state("d1") is DoorState.OPEN

    def test_occupancy_cache_tracks_door_state(self, small_scenario):
        w = World(small_scenario.model)
        assert not w.occupancy().free_at(6.0, 8.0)
        w.actuate_door("d1", DoorState.OPEN)
        w.advance(2.5)
        assert w.occupancy().free_at(6.0, 8.0)
        assert not w.occupancy(doors_open=False) is None

    def test_doors_open_variant_ignores_state(self, small_scenario):
        w = World(small_scenario.model)
        assert w.occupancy(doors_open=True).free_at(6.0, 8.0)

    def test_scenario_roundtrip_fixed_point(self, small_scenario):
        doc = scenario_mod.to_dict(small_scenario)
        again = scenario_mod.to_dict(scenario_mod.from_dict(doc))
        assert doc == again
