import math
from dataclasses import replace

import numpy as np
import pytest
from conftest import full_config

from hesccd.instances import arbitrage_config, case1_config, case3_config
from hesccd.model import GeneratorSpec, HesConfig
from hesccd.signals import Signal
from hesccd.solver import SolveReport
from hesccd.transcription import (Override, ScenarioOverlay, apply_scenario_overlay, assemble_lp, build_mesh,
                                  hour_window, index_variables, interval_hours, scale_lp, unscale_solution,
                                  unscaled_lp)


def _gen_only(tau=0.1389, n=25):
    return HesConfig(generator=GeneratorSpec(100.0, tau=tau, x0=50.0), pure_generator=True,
                     signals={"electricity_price": Signal.constant("electricity_price", "$/MWh", 20.0)},
                     horizon=build_mesh(0, n - 1, 1))


def test_mesh_counts():
    m = build_mesh(0, 262980, 1)
    assert m.n_nodes == 262981 and m.n_intervals == 262980
    assert build_mesh(0, 24, 1).n_nodes == 25
    with pytest.raises(ValueError, match="not integral"):
        build_mesh(0, 10, 3)


def test_layout_counts():
    assert index_variables(full_config(), build_mesh(0, 24, 1)).total == 4 * 25 + 10 * 24 + 3
    assert index_variables(full_config(), build_mesh(0, 1, 1)).total == 8 + 10 + 3
    assert index_variables(_gen_only(), build_mesh(0, 24, 1)).total == 25 + 24


def test_layout_roundtrip():
    cfg = full_config()
    lay = index_variables(cfg, build_mesh(0, 24, 1))
    names = lay.names()
    assert len(set(names)) == lay.total
    for j in (0, 7, 120, lay.total - 1):
        kind, k = lay.describe(j)
        assert lay.col(kind, k) == j
    x = np.arange(lay.total, dtype=float)
    dec = lay.decode(x)
    assert dec["u_G"].size == 24 and dec["x_T"].size == 25
    assert float(dec["sigma_P"]) == x[lay.col("sigma_P")]


def test_row_counts_full_config():
    lp = assemble_lp(full_config(), build_mesh(0, 24, 1))
    tags = lp.row_tags
    assert tags.count("eq4") + tags.count("eq5") == 4 * 24
    assert tags.count("eq13") == 4 + 3
    assert tags.count("eq12") == 3 * 25
    assert sum(n.startswith("eq13:periodic") for n in lp.row_names) == 3


def test_generator_decay_coefficient():
    lp = assemble_lp(_gen_only(), build_mesh(0, 24, 1))
    a = math.exp(-1.0 / 0.1389)
    assert a == pytest.approx(math.exp(-7.1994), rel=1e-4)
    assert a == pytest.approx(7.4702e-4, rel=1e-4)
    lay = lp.layout
    rows = [i for i, n in enumerate(lp.row_names) if n.startswith("eq4")]
    assert len(rows) == 24
    A = lp.A.tocsr()
    for i in rows:
        k = int(lp.row_names[i].split("[")[1].rstrip("]"))
        assert A[i, lay.col("x_G", k)] == pytest.approx(-a, rel=1e-14)
        assert A[i, lay.col("x_G", k + 1)] == 1.0
        assert A[i, lay.col("u_G", k)] == pytest.approx(-(1 - a), rel=1e-14)


def test_instant_generator_drops_state_dynamics():
    lp = assemble_lp(_gen_only(tau=0.0), build_mesh(0, 24, 1))
    assert not any(n.startswith("eq13:x0_G") for n in lp.row_names)
    assert sum(n.startswith("eq4") for n in lp.row_names) == 24


def test_idle_storage_satisfies_dynamics():
    cfg = full_config()
    lp = assemble_lp(cfg, build_mesh(0, 24, 1))
    lay = lp.layout
    x = np.zeros(lp.n_cols)
    for d in "PET":
        x[lay.col(f"x_{d}", np.arange(25))] = 3.0
    rows = [i for i, n in enumerate(lp.row_names) if n.startswith("eq5")]
    assert np.all((lp.A @ x - lp.b)[rows] == 0.0)


def test_peak_window_raises_generator_bound():
    cfg = case1_config(hours=48)
    lp = assemble_lp(cfg, build_mesh(0, 48, 1))
    out = apply_scenario_overlay(lp, ScenarioOverlay(peak_window=hour_window(15, 19), peak_mode="state"))
    hours = interval_hours(lp)
    cols = lp.layout.col("x_G", np.arange(49))
    in_peak = np.isin(hours, [15, 16, 17, 18])
    assert np.all(out.lb[cols][in_peak] == 1083.0)
    assert np.all(out.lb[cols][~in_peak] == lp.lb[cols][~in_peak])
    charge = lp.layout.col("u_in_P", np.arange(48))
    assert np.all(out.ub[charge][in_peak[:48]] == 0.0)


def test_peak_window_request_mode_for_slow_generator():
    cfg = case1_config(hours=24)
    lp = assemble_lp(cfg, build_mesh(0, 24, 1))
    out = apply_scenario_overlay(lp, ScenarioOverlay(peak_window=(15, 16)))
    cols = lp.layout.col("u_G", np.array([15, 16]))
    assert np.all(out.lb[cols] == 1083.0)


def test_sale_window_bounds():
    cfg = case3_config(hours=48)
    lp = assemble_lp(cfg, build_mesh(0, 48, 1))
    out = apply_scenario_overlay(lp, ScenarioOverlay(sale_windows={"T": hour_window(8, 9)}))
    ub = out.ub[lp.layout.col("u_R_T", np.arange(48))]
    expected = np.where(np.arange(48) % 24 == 8, cfg.storage_t.u_out_max, 0.0)
    assert np.array_equal(ub, expected)


def test_empty_overlay_identity():
    lp = assemble_lp(arbitrage_config(), build_mesh(0, 2, 1))
    assert apply_scenario_overlay(lp, ScenarioOverlay()) is lp
    assert apply_scenario_overlay(lp, None) is lp


def test_override_inversion_noted():
    lp = assemble_lp(arbitrage_config(), build_mesh(0, 2, 1))
    out = apply_scenario_overlay(lp, ScenarioOverlay(overrides=(Override("x_G", 1.0, lower=2.0),)))
    assert any("induced infeasibility" in n and "hour 1" in n for n in out.notes)


def test_objective_scale_multiplies():
    lp = assemble_lp(case1_config(hours=24), build_mesh(0, 24, 1))
    j = lp.layout.col("sigma_P")
    lp = replace(lp, c=lp.c.copy())
    lp.c[j] = -1.17580e6
    s = scale_lp(lp, 1e-9)
    assert s.c[j] == pytest.approx(-1.17580e-3, rel=1e-15)
    assert scale_lp(lp, 1.0) is lp
    with pytest.raises(ValueError):
        scale_lp(lp, 0.0)
    with pytest.raises(ValueError):
        scale_lp(lp, -1.0)


def test_column_scale_is_a_change_of_variables():
    lp = assemble_lp(case1_config(hours=24), build_mesh(0, 24, 1))
    j = lp.layout.col("sigma_P")
    s = scale_lp(lp, 1.0, {"sigma_P": 1e-3})
    assert s.lb[j] == 0.0 and np.isinf(s.ub[j])
    rng = np.random.default_rng(0)
    x = rng.uniform(0, 10, lp.n_cols)
    xs = x.copy()
    xs[j] = x[j] / 1e-3
    assert np.allclose(s.A @ xs, lp.A @ x, rtol=1e-13)
    back = unscaled_lp(s)
    assert np.allclose(back.A.toarray(), lp.A.toarray(), rtol=1e-14)


def test_unscale_values():
    lp = assemble_lp(case1_config(hours=24), build_mesh(0, 24, 1))
    s = scale_lp(lp, 1e-9, {"sigma_P": 1e-3})
    x = np.zeros(lp.n_cols)
    j = lp.layout.col("sigma_P")
    x[j] = 237530.0
    rep = unscale_solution(SolveReport("optimal", 0.1, x, scaled=True), s)
    assert rep.objective == pytest.approx(1e8, rel=1e-15)
    assert rep.x[j] == pytest.approx(237.53, rel=1e-15)
    plain = SolveReport("optimal", 3.0, x)
    assert unscale_solution(plain, lp) is plain
