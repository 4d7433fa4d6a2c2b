"""Smoke tests for the Python bindings."""

import math

import pytest

import mzmesh


def test_effective_index_anchor():
    assert mzmesh.effective_index(0.45, 1.55) == pytest.approx(2.45, abs=1e-12)
    assert mzmesh.effective_index(0.52, 1.55) == pytest.approx(2.534, abs=1e-12)


def test_parameter_counts():
    assert mzmesh.trainable_parameter_count(2, 3, 5) == 72
    assert mzmesh.trainable_parameter_count(2, 6, 5) == 144
    topo = mzmesh.build_topology(4, 3)
    assert topo.unit_count == 5


def test_coupler_splits_evenly_at_anchor():
    p = mzmesh.coupler_response(1.55, 0.0)
    assert p.through == pytest.approx(p.cross, abs=1e-12)
    assert p.through == pytest.approx(0.70547, abs=1e-4)


def test_simulation_conserves_power_within_loss():
    dev = mzmesh.make_device(2, 2)
    spectrum = mzmesh.simulate_spectrum(dev, [1.5, 1.55, 1.6])
    assert len(spectrum) == 3
    for row in spectrum:
        assert len(row) == 2
        assert 0.0 <= sum(row) <= 1.0


def test_gradient_matches_finite_differences():
    spec = mzmesh.DesignSpec()
    spec.layers = 1
    spec.grid_count = 4
    spec.seed = 3
    dev = mzmesh.initial_device(spec)
    obj = mzmesh.build_targets(spec)
    obj.alpha1 = 0.0
    obj.alpha2 = 0.0
    report = mzmesh.gradient(dev, obj)
    assert len(report.gradient) == len(dev.params)
    assert all(math.isfinite(g) for g in report.gradient)
    assert mzmesh.evaluate_objective(dev, obj) == report.objective


def test_micro_optimization_descends():
    spec = mzmesh.DesignSpec()
    spec.layers = 1
    spec.grid_count = 5
    spec.max_iterations = 40
    spec.seed = 5
    result = mzmesh.run_optimization(spec)
    assert result.trace.points[0].objective >= result.trace.best_objective
    assert result.trace.best_objective == mzmesh.evaluate_objective(
        result.device, result.objective
    )


def test_geometry_round_trip(tmp_path):
    spec = mzmesh.DesignSpec()
    spec.layers = 2
    spec.seed = 9
    dev = mzmesh.initial_device(spec)
    path = tmp_path / "geometry.json"
    mzmesh.write_geometry_json(path, dev)
    back = mzmesh.read_geometry_json(path)
    assert back.params == dev.params

    grid = [1.5, 1.55, 1.6]
    assert mzmesh.simulate_spectrum(back, grid) == mzmesh.simulate_spectrum(dev, grid)


def test_etch_sweep_reports_reference(tmp_path):
    spec = mzmesh.DesignSpec()
    spec.layers = 1
    spec.grid_count = 4
    spec.seed = 2
    dev = mzmesh.initial_device(spec)
    obj = mzmesh.build_targets(spec)
    report = mzmesh.etch_sweep(dev, [-10.0, 0.0, 10.0], obj)
    assert report.offsets_nm == [-10.0, 0.0, 10.0]
    assert report.reference_objective == report.objectives[1]


def test_layer_study_rows_are_seeded(tmp_path):
    spec = mzmesh.DesignSpec()
    spec.layers = 1
    spec.grid_count = 4
    spec.max_iterations = 15
    rows = mzmesh.layer_study(spec, [1, 1], 1)
    assert len(rows) == 2
    assert rows[0].seed != rows[1].seed
    assert all(row.error == "" for row in rows)
    assert all(len(row.offset_objectives) == 5 for row in rows)


def test_design_spec_serialization_round_trip(tmp_path):
    spec = mzmesh.DesignSpec()
    spec.kind = mzmesh.DeviceKind.duplexer
    spec.layers = 6
    spec.grid_start_nm = 1450.0
    spec.grid_stop_nm = 1630.0
    spec.grid_count = 21
    text = mzmesh.serialize_design_spec(spec)
    path = tmp_path / "spec.ini"
    path.write_text(text)
    again = mzmesh.parse_design_spec(path)
    assert mzmesh.serialize_design_spec(again) == text


def test_spec_parsing_rejects_bad_ratios(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text(
        "kind = splitter\n[grid]\nstart_nm = 1400\nstop_nm = 1600\ncount = 8\n"
        "[target]\nratios = 0.6, 0.6\n"
    )
    with pytest.raises(ValueError, match="sum"):
        mzmesh.parse_design_spec(bad)
