from dataclasses import replace

import numpy as np
import pytest

from hesccd.analysis import (OracleRefused, brute_force_oracle, constraint_residuals, energy_accounting,
                             extract_trajectory, run_sweep, set_path, write_accounting_csv, write_trajectory_csv)
from hesccd.analysis.accounting import GENERATOR_CATEGORIES
from hesccd.analysis.trajectory import read_trajectory_csv
from hesccd.economics import EconomicParams, npv_breakdown
from hesccd.instances import arbitrage_config, case1_small_config, random_oracle_config
from hesccd.pipeline import build_problem, config_mesh, run_config
from hesccd.signals import Signal
from hesccd.solver import SolveReport
from hesccd.transcription import ScenarioOverlay, build_mesh, hour_window


def test_arbitrage_storage_series(arbitrage_result):
    assert arbitrage_result.trajectory.states["x_E"] == pytest.approx([0.0, 1.0, 0.0], abs=1e-9)


def test_null_solution_decodes_to_zero():
    lp = build_problem(arbitrage_config())
    traj = extract_trajectory(SolveReport("optimal", 0.0, np.zeros(lp.n_cols)), lp)
    assert all(np.all(v == 0) for v in traj.states.values())
    assert all(np.all(v == 0) for v in traj.controls.values())


def test_decoded_constraints_hold(arbitrage_result):
    res = constraint_residuals(arbitrage_result.trajectory, arbitrage_result.lp.meta["config"])
    assert max(res.values()) <= 1e-9


def test_extract_requires_primal():
    lp = build_problem(arbitrage_config())
    with pytest.raises(ValueError, match="no primal"):
        extract_trajectory(SolveReport("infeasible"), lp)


def test_trajectory_csv_roundtrip(tmp_path, arbitrage_result):
    traj = arbitrage_result.trajectory
    cfg = arbitrage_result.lp.meta["config"]
    write_trajectory_csv(traj, tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert len(lines) == 1 + traj.mesh.n_nodes
    back = read_trajectory_csv(tmp_path / "t.csv", traj.mesh, traj.sigma, traj.prices)
    for k in traj.states:
        assert np.array_equal(back.states[k], traj.states[k])
    for k in traj.controls:
        assert np.array_equal(back.controls[k], traj.controls[k])
    assert npv_breakdown(back, cfg).npv == npv_breakdown(traj, cfg).npv


def test_accounting_arbitrage(arbitrage_result):
    acc = arbitrage_result.accounting
    assert acc.generator["charge_E"] == pytest.approx(0.5, abs=1e-12)
    assert acc.generator["grid"] == pytest.approx(0.5, abs=1e-12)
    assert acc.revenue["electric"] == pytest.approx(1.0)
    assert acc.storage_revenue_share == pytest.approx(0.5, abs=1e-12)
    assert acc.primary_load == {"generator": None, "storage": None}


def test_accounting_without_storage_activity():
    res = run_config(arbitrage_config(storage=False), objective_scale=1.0)
    acc = res.accounting
    assert sum(acc.generator.values()) == pytest.approx(1.0, abs=1e-12)
    assert acc.generator["charge_E"] == 0.0


def test_accounting_categories_fixed_on_case_run(tmp_path):
    res = run_config(case1_small_config(hours=48))
    acc = res.accounting
    assert tuple(acc.generator) == GENERATOR_CATEGORIES
    assert set(acc.primary_load) == {"generator", "storage"}
    for s in acc.split_sums().values():
        assert s == pytest.approx(1.0, abs=1e-9)
    write_accounting_csv(acc, tmp_path / "a.csv")
    assert (tmp_path / "a.csv").read_text().startswith("split,category,fraction")


def test_zero_energy_fractions_undefined():
    cfg = arbitrage_config()
    lp = build_problem(cfg)
    traj = extract_trajectory(SolveReport("optimal", 0.0, np.zeros(lp.n_cols)), lp)
    acc = energy_accounting(traj, cfg)
    assert all(v is None for v in acc.generator.values())
    assert acc.storage_revenue_share is None


def test_set_path_nested():
    cfg = arbitrage_config()
    out = set_path(cfg, "storage_e.u_in_max", 3.0)
    assert out.storage_e.u_in_max == 3.0 and cfg.storage_e.u_in_max == 1.0
    with pytest.raises(KeyError):
        set_path(cfg, "storage_e.nope", 1.0)


def test_sweep_empty_axes_single_point():
    res = run_sweep(arbitrage_config(), [], tol=1e-9)
    assert res.npv.size == 1
    assert float(res.npv) == pytest.approx(100.0, abs=1e-6)


def test_sweep_records_failures_and_continues():
    cfg = arbitrage_config()
    res = run_sweep(cfg, [("generator.x_g_min", [1.0, 5.0])])
    assert res.status.tolist() == ["optimal", "error"]
    assert "bound inversion" in res.messages[1]
    assert np.isnan(res.npv[1])


@pytest.mark.parametrize("workers", [4, 16])
def test_sweep_independent_of_workers(workers):
    base = replace(case1_small_config(hours=24), scenario=ScenarioOverlay())
    axes = [("scenario.peak_window", [(), hour_window(15, 16), hour_window(15, 17)]),
            ("loads.l_e", [0.1, 0.2])]
    a = run_sweep(base, axes, parallelism=1)
    b = run_sweep(base, axes, parallelism=workers, executor="thread")
    assert np.array_equal(a.npv, b.npv)
    for d in a.sigma:
        assert np.array_equal(a.sigma[d], b.sigma[d])
    assert a.status.tolist() == b.status.tolist()


def test_sweep_process_pool_matches_serial(tmp_path):
    base = replace(case1_small_config(hours=24), scenario=ScenarioOverlay())
    axes = [("scenario.peak_window", [(), hour_window(15, 17)])]
    a = run_sweep(base, axes, parallelism=1)
    b = run_sweep(base, axes, parallelism=2, executor="process")
    assert np.array_equal(a.npv, b.npv)
    a.to_csv(tmp_path / "s.csv")
    rows = (tmp_path / "s.csv").read_text().splitlines()
    assert rows[0] == "index,scenario.peak_window,status,npv,sigma_P,message"
    assert len(rows) == 3


def test_oracle_arbitrage():
    cfg = arbitrage_config()
    out = brute_force_oracle(cfg, config_mesh(cfg), 0.01)
    assert out.best == pytest.approx(100.0, abs=1e-9)
    assert out.schedule["u_in_E"].tolist() == pytest.approx([1.0, 0.0])
    assert out.schedule["u_out_E"].tolist() == pytest.approx([0.0, 1.0])
    assert out.sigma["E"] == pytest.approx(1.0)


def test_oracle_null_activity_dominates():
    rng = np.random.default_rng(4)
    cfg = random_oracle_config(rng)
    zero = {k: Signal.hourly(k, v.unit, np.zeros(v.values.size)) for k, v in cfg.signals.items()}
    econ = replace(cfg.economics, c_vom_g=1.0)
    cfg = replace(cfg, signals=zero, economics=econ,
                  generator=replace(cfg.generator, x_g_min=0.0, x_g_max=0.05))
    cfg = cfg.with_storage(cfg.enabled_domains[0], x0=0.0)
    out = brute_force_oracle(cfg, config_mesh(cfg), 0.01)
    assert out.best == pytest.approx(0.0, abs=1e-12)
    assert all(np.all(v == 0) for v in out.schedule.values())


def test_oracle_refuses_large_problems():
    cfg = arbitrage_config()
    with pytest.raises(OracleRefused, match="5 nodes"):
        brute_force_oracle(cfg, build_mesh(0, 6, 1))
    with pytest.raises(OracleRefused, match="grid too large"):
        brute_force_oracle(cfg, config_mesh(cfg), 1e-3, max_grid=1e6)


def test_oracle_sigma_grid():
    cfg = arbitrage_config()
    cfg = replace(cfg, economics=EconomicParams(c_occ_e=10.0))
    out = brute_force_oracle(cfg, config_mesh(cfg), 0.05, sigma_grid={"E": [0.0, 0.5, 2.0]})
    # only 0.5 MWh of capacity may be used once it is cheaper than the whole unit
    lp = run_config(replace(cfg, storage_e=replace(cfg.storage_e, sigma_max=None)), objective_scale=1.0)
    assert out.best <= lp.report.objective + 1e-9
    assert out.sigma["E"] in (0.0, 0.5, 2.0)
