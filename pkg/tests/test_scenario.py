"""Scenario construction, validation and instantiation."""

import pytest

from windcosim.cosim import Scheme
from windcosim.errors import ScenarioValidationError, UnresolvedReferenceError
from windcosim.scenario import (DEFAULT_FAULT, ConnectionSpec, build_large_scale,
                                build_monolithic, build_small_scale, instantiate,
                                run_scenario, standard_wiring)


def test_component_counts():
    assert build_monolithic().component_ids() == ["grid"]
    assert build_small_scale().component_ids() == ["grid", "conv_wpp", "frt_wpp"]
    large = build_large_scale().component_ids()
    assert len(large) == 65
    assert large[0] == "grid"
    assert sum(c.startswith("conv_") for c in large) == 32
    assert sum(c.startswith("frt_") for c in large) == 32


def test_standard_wiring_connection_count():
    assert len(standard_wiring(["a"])) == 11
    assert len(build_small_scale().connections) == 11
    assert len(build_large_scale().connections) == 11 * 32


def test_default_fault_is_shared():
    for build in (build_monolithic, build_small_scale, build_large_scale):
        sc = build()
        assert sc.events == [DEFAULT_FAULT]
        assert sc.events[0].bus == 6
        assert sc.events[0].start == 1.0
        assert sc.events[0].duration == 0.18


def test_large_scale_rating_is_conserved():
    sc = build_large_scale()
    ratings = [sg.mva for sg in sc.network.sgens]
    assert len(ratings) == 32
    assert all(r == ratings[0] for r in ratings)
    assert sum(ratings) == pytest.approx(85.0, abs=1e-12)


def test_large_scale_collector_topology():
    sc = build_large_scale()
    net = sc.network
    assert len(net.buses) == 9 + 1 + 32
    assert len(net.branches) == 9 + 1 + 32
    collector_kv = [b for b in net.buses if b.base_kv == 33.0]
    assert len(collector_kv) == 33
    assert sc.pcc_branch == (3, 10)
    # four strings of eight: each string head hangs off the collector bus
    heads = [br for br in net.branches if br.from_bus == 10]
    assert len(heads) == 4


def test_validate_passes_for_all_builders():
    for build in (build_monolithic, build_small_scale, build_large_scale):
        build().validate()


def test_validate_rejects_unknown_mode():
    sc = build_small_scale()
    sc.mode = "distributed"
    with pytest.raises(ScenarioValidationError):
        sc.validate()


def test_validate_rejects_duplicate_wtg_ids():
    sc = build_small_scale()
    sc.wtgs = sc.wtgs + sc.wtgs
    with pytest.raises(ScenarioValidationError, match="duplicate"):
        sc.validate()


def test_validate_rejects_wtg_without_generator():
    sc = build_small_scale()
    sc.network.sgens = []
    with pytest.raises(UnresolvedReferenceError):
        sc.validate()


def test_validate_rejects_rating_mismatch():
    sc = build_small_scale()
    sc.wpp_rating_mva = 90.0
    with pytest.raises(ScenarioValidationError, match="rated"):
        sc.validate()


def test_validate_rejects_fault_at_unknown_bus():
    sc = build_small_scale()
    sc.events[0] = type(sc.events[0])(bus=77, start=1.0, duration=0.1)
    with pytest.raises(UnresolvedReferenceError):
        sc.validate()


def test_validate_rejects_connections_on_monolithic():
    sc = build_monolithic()
    sc.connections = [ConnectionSpec("grid.v_pcc", "grid.v_pcc")]
    with pytest.raises(ScenarioValidationError):
        sc.validate()


def test_validate_rejects_missing_mandatory_input():
    sc = build_small_scale()
    sc.connections = [c for c in sc.connections if c.sink != "conv_wpp.v_meas"]
    with pytest.raises(ScenarioValidationError, match="conv_wpp.v_meas"):
        sc.validate()


def test_validate_rejects_connection_to_unknown_component():
    sc = build_small_scale()
    sc.connections = sc.connections + [ConnectionSpec("grid.v_pcc", "conv_x.v_meas")]
    with pytest.raises(UnresolvedReferenceError):
        sc.validate()


def test_validate_rejects_recording_unknown_component():
    sc = build_small_scale()
    sc.master.record.append("ghost.value")
    with pytest.raises(UnresolvedReferenceError):
        sc.validate()


def test_instantiate_orders_grid_then_converters_then_supervisors():
    master = instantiate(build_small_scale())
    assert master.execution_order() == ["grid", "conv_wpp", "frt_wpp"]
    master = instantiate(build_large_scale())
    order = master.execution_order()
    assert order[0] == "grid"
    assert order[1:33] == [f"conv_wtg{k:02d}" for k in range(1, 33)]
    assert order[33:] == [f"frt_wtg{k:02d}" for k in range(1, 33)]


def test_run_scenario_applies_overrides_and_reports_events():
    sc = build_monolithic(t_end=0.05, fault=None)
    trace, meta = run_scenario(sc, scheme="parallel", macro_step=5e-3, t_end=0.02)
    assert len(trace.time) == 5                    # 0 .. 0.02 in 5 ms steps
    assert trace.time[-1] == pytest.approx(0.02, abs=1e-12)
    assert meta.events == []
    # the scenario object is not mutated by the overrides
    assert sc.master.t_end == 0.05
    assert sc.master.scheme is Scheme.SERIAL

    sc2 = build_monolithic(t_end=0.02)
    _, meta2 = run_scenario(sc2)
    assert meta2.events == [dict(bus=6, start=1.0, duration=0.18, admittance=1e6)]
