"""Smoke tests for the python bindings."""

import math

import numpy as np
import pytest

import heatcert as hc


def test_graph_and_degrees():
    g = hc.generate_family("path_3", hc.MeasureMode.counting)
    assert g.size == 3
    assert g.degree(g.index_of("1")) == 2.0
    assert g.weighted_degree(g.index_of("1")) == 2.0

    two = hc.build_graph([("x", "y", 2.0)], hc.MeasureMode.normalizing)
    assert two.weighted_degree(0) == 1.0


def test_roundtrip(tmp_path):
    g = hc.generate_family("polyline_8_1", hc.MeasureMode.counting)
    path = str(tmp_path / "g.txt")
    hc.save_graph(g, path)
    h = hc.load_graph(path)
    assert hc.graph_to_string(g) == hc.graph_to_string(h)


def test_metric_and_intrinsic():
    g = hc.generate_family("cycle_8", hc.MeasureMode.normalizing)
    m = hc.MetricStructure.all_pairs_distances(g, hc.combinatorial_weights(g))
    assert m.diameter == 4.0
    assert m.global_jump_size == 1.0
    rep = hc.verify_intrinsic(g, m)
    assert rep["pass"]
    assert len(m.ball(0, 1.0)) == 3


def test_heat_kernel_closed_form():
    g = hc.build_graph([("x", "y", 1.0)], hc.MeasureMode.counting)
    dec = hc.decompose(g)
    assert dec.lambda_bottom == pytest.approx(0.0, abs=1e-12)
    for t in (0.1, 1.0, 5.0):
        assert hc.heat_kernel(dec, t, 0, 0) == pytest.approx(
            (1.0 + math.exp(-2.0 * t)) / 2.0
        )
    f = np.array([1.0, 0.0])
    ode = hc.heat_evolve_ode(g, f, 1.0)
    spec = hc.heat_semigroup_apply(g, dec, 1.0, f)
    assert np.max(np.abs(ode - spec)) <= 1e-7
    assert hc.dirichlet_energy(g, f) == pytest.approx(2.0)


def test_zeta_and_corrections():
    assert hc.zeta(1.0, 1.0, 1.0) == pytest.approx(
        math.log(1.0 + math.sqrt(2.0)) + 1.0 - math.sqrt(2.0), rel=1e-12
    )
    assert hc.zeta(0.0, 3.0, 1.0) == 0.0
    cc = hc.counting_corrections(8.0, 8.0, 4.0, 4.0, 1.0, relaxed=True)
    assert cc["kappa"] == 1
    assert cc["theta"] == pytest.approx(0.75)
    with pytest.raises(hc.GuardViolation):
        hc.counting_corrections(1.0, 1.0, 4.0, 4.0, 1.0)


def test_sobolev_optimizer_vs_oracle():
    g = hc.build_graph([("x", "y", 1.0)], hc.MeasureMode.counting)
    p = hc.SobolevProblem(g, [0, 1], 1.0, 4.0)
    opt = hc.minimal_sobolev_constant(p, restarts=50, seed=1)
    oracle = hc.grid_oracle_constant(p, resolution=1e-3)
    assert abs(opt["phi_star"] - oracle["value"]) <= 0.01 * oracle["value"]
    assert hc.sobolev_ratio(p, opt["maximizer"]) == pytest.approx(
        opt["phi_star"], rel=1e-12
    )


def test_pipeline_smoke(tmp_path):
    config = {
        "family": "cycle_64",
        "measure": "normalizing",
        "metric": "combinatorial",
        "r1": 2.0,
        "r2": 16.0,
        "n": 3.0,
        "tgrid_per_decade": 8,
        "t_max": 1e4,
        "restarts": 10,
        "relaxed_guards": True,
        "vertex_transitive": True,
        "seed": 7,
        "out": str(tmp_path / "report"),
    }
    rep = hc.run_pipeline("forward-normalizing", config)
    assert rep["pass_summary"]["all_pass"]
    assert rep["metadata"]["watermark"] == "non-theorem regime"
    assert (tmp_path / "report" / "report.json").exists()
    conds = [c["condition"] for c in rep["certificates"]]
    assert conds == ["V", "G"]

    with pytest.raises(hc.PipelineError):
        hc.run_pipeline("forward-normalizing", {**config, "r2": 10.0})
