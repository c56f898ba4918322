import numpy as np
import pytest

from hesccd.economics import (EconomicParams, capital_cost_affine, discount_factor, idc_factor, npv_breakdown,
                              profit_rate_coefficients)
from hesccd.model import GeneratorSpec, HesConfig, LoadModel, StorageSpec
from hesccd.transcription import build_mesh


def test_idc_values():
    assert idc_factor(0.075, 3) == pytest.approx(0.1209375, abs=1e-12)
    assert idc_factor(0.0, 11.0) == 0.0
    assert idc_factor(0.075, 7) == pytest.approx(0.3084375, abs=1e-12)


def test_capital_form_case1_values():
    p = EconomicParams(c_occ_g=0.0, c_occ_p=1048947.0, r=0.075, t_con=3.0)
    form = capital_cost_affine(p, ("P",))
    coef = dict(form.items())["sigma_P"]
    assert coef == pytest.approx(1048947.0 * 1.1209375, rel=1e-12)
    assert coef == pytest.approx(1.17580e6, rel=1e-5)
    assert form.const == 0.0
    assert form.evaluate({"sigma_P": 237.53}) == pytest.approx(2.7929e8, rel=1e-4)


def test_capital_form_zero_and_no_idc():
    assert all(v == 0 for _, v in capital_cost_affine(EconomicParams()).items())
    p = EconomicParams(c_occ_g=5.0, c_occ_e=7.0, r=0.075, t_con=0.0)
    form = capital_cost_affine(p, ("E",))
    assert form.const == 5.0 and dict(form.items())["sigma_E"] == 7.0


def test_discount_floor_semantics():
    assert discount_factor(0.0, 0.075) == 1.0
    assert discount_factor(8765.0, 0.075) == 1.0
    assert discount_factor(2 * 8766.0, 0.075) == pytest.approx(1.155625, abs=1e-12)
    arr = discount_factor(np.array([0.0, 8766.0]), 0.1)
    assert arr.tolist() == pytest.approx([1.0, 1.1])


def _gen_only(**gen):
    return HesConfig(generator=GeneratorSpec(100.0, **gen), loads=LoadModel(l_p=0.1, l_e=0.2), pure_generator=True)


def test_profit_coefficient_on_generator():
    cfg = _gen_only()
    form = profit_rate_coefficients(0, cfg, {"electricity_price": np.array([30.0])})
    assert dict(form.items())["x_G"] == pytest.approx(21.0, abs=1e-12)


def test_profit_null_economy():
    cfg = _gen_only()
    form = profit_rate_coefficients(0, cfg, {"electricity_price": np.array([0.0])})
    assert all(v == 0 for _, v in form.items()) and form.const == 0.0


@pytest.mark.parametrize("beta", [0.0, 0.25])
def test_fuel_coefficient(beta):
    cfg = HesConfig(generator=GeneratorSpec(100.0, rho_fuel=146.952, beta_backend=beta), pure_generator=True)
    form = profit_rate_coefficients(0, cfg, {"electricity_price": np.array([0.0]), "fuel_price": np.array([0.003])})
    assert dict(form.items())["x_G"] == pytest.approx(-0.440856 * (1 + beta), rel=1e-12)


def test_profit_missing_price_stream():
    cfg = HesConfig(generator=GeneratorSpec(100.0, rho_fuel=1.0), pure_generator=True)
    with pytest.raises(KeyError, match="fuel_price"):
        profit_rate_coefficients(0, cfg, {"electricity_price": np.array([1.0])})


class _Traj:
    def __init__(self, mesh, states, controls, sigma, prices):
        self.mesh, self.states, self.controls, self.sigma, self.prices = mesh, states, controls, sigma, prices


def test_npv_null_solution():
    mesh = build_mesh(0, 3, 1)
    cfg = HesConfig(generator=GeneratorSpec(1.0), storage_e=StorageSpec(enabled=True, u_in_max=1, u_out_max=1))
    z = np.zeros(3)
    traj = _Traj(mesh, {"x_G": np.zeros(4), "x_E": np.zeros(4)},
                 {"u_G": z, "u_in_E": z, "u_out_E": z, "u_R_E": z}, {"E": 0.0}, {"electricity_price": np.ones(3)})
    out = npv_breakdown(traj, cfg)
    assert all(v == 0.0 for v in out.as_dict().values())


def test_npv_mismatched_trajectory():
    mesh = build_mesh(0, 3, 1)
    cfg = HesConfig(generator=GeneratorSpec(1.0), pure_generator=True)
    traj = _Traj(mesh, {"x_G": np.zeros(3)}, {"u_G": np.zeros(2)}, {}, {})
    with pytest.raises(ValueError, match="mismatch"):
        npv_breakdown(traj, cfg)


def test_npv_arbitrage(arbitrage_result):
    assert arbitrage_result.npv.npv == pytest.approx(100.0, abs=1e-9)
    assert arbitrage_result.npv.revenue_electric == pytest.approx(100.0, abs=1e-9)
