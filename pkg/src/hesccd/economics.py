"""Cost and revenue coefficients of the net-present-value objective.

All operating quantities are rates in $/h evaluated at a mesh interval's
left endpoint; the objective integrates them with step ``h`` and divides by
the annual discount factor.
"""
from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Mapping

import numpy as np

from .model import DOMAINS, Affine, HesConfig, eval_nodes
from .signals import HOURS_PER_YEAR


@dataclass(frozen=True)
class EconomicParams:
    """Cost inputs.

    Fixed O&M: ``c_fom_g`` in $/yr, storage ``c_fom_*`` in $ per unit of
    capacity per hour.  Overnight storage costs are per MWh (per kg for
    tertiary storage).
    """

    c_occ_g: float = 0.0
    c_occ_p: float = 0.0
    c_occ_e: float = 0.0
    c_occ_t: float = 0.0
    c_fom_g: float = 0.0
    c_fom_p: float = 0.0
    c_fom_e: float = 0.0
    c_fom_t: float = 0.0
    c_vom_g: float = 0.0
    c_vom_p: float = 0.0
    c_vom_e: float = 0.0
    c_vom_t: float = 0.0
    c_co2: float = 0.0
    r: float = 0.0
    t_con: float = 0.0

    def occ(self, domain):
        return getattr(self, f"c_occ_{domain.lower()}")

    def fom(self, domain):
        return getattr(self, f"c_fom_{domain.lower()}")

    def vom(self, domain):
        return getattr(self, f"c_vom_{domain.lower()}")


def validate_economics(params: EconomicParams, report):
    for f in fields(params):
        if f.name in ("r", "t_con"):
            continue
        if getattr(params, f.name) < 0:
            report.add(f"economics.{f.name}", "cost must be >= 0")
    if not (0 <= params.r < 1):
        report.add("economics.r", "must lie in [0, 1)")
    if params.t_con < 0:
        report.add("economics.t_con", "must be >= 0")


@dataclass(frozen=True)
class NpvBreakdown:
    npv: float
    capital: float
    fixed_om: float
    variable_om: float
    fuel: float
    carbon: float
    revenue_primary: float
    revenue_electric: float
    revenue_tertiary: float

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def idc_factor(r: float, t_con: float) -> float:
    """Interest-during-construction loading on overnight cost."""
    return (r / 2.0) * t_con + (r * r / 6.0) * t_con * t_con


def capital_cost_affine(params: EconomicParams, domains=DOMAINS) -> Affine:
    """Capital cost as an affine form in the storage capacities ``sigma_P/E/T``."""
    load = 1.0 + idc_factor(params.r, params.t_con)
    coef = {f"sigma_{d}": params.occ(d) * load for d in domains}
    return Affine(coef, params.c_occ_g * load)


def discount_factor(t, r: float):
    """``(1 + r) ** floor(t / 8766)`` for hours since t0 (scalar or array)."""
    years = np.floor(np.asarray(t, dtype=float) / HOURS_PER_YEAR + 1e-12)
    out = (1.0 + r) ** years
    return float(out) if out.ndim == 0 else out


def _price(prices: Mapping[str, np.ndarray], role: str, k: int, required: bool):
    arr = prices.get(role)
    if arr is None:
        if required:
            raise KeyError(f"missing signal '{role}' for an enabled revenue or cost stream")
        return 0.0
    return float(arr[k])


def profit_rate_coefficients(k: int, config: HesConfig, prices: Mapping[str, np.ndarray],
                             variables: Mapping[str, Affine] = None) -> Affine:
    """Operating profit rate [$/h] at interval ``k`` as an affine form.

    ``variables`` maps symbolic names (``x_G``, ``u_in_P``, ``sigma_E``, ...)
    to the expressions to substitute; by default each name stands for
    itself, so the result is keyed by name.
    """
    g = config.generator
    econ = config.economics or EconomicParams()
    doms = config.enabled_domains

    def v(name):
        if variables is None:
            return Affine.var(name)
        return variables[name]

    x_g = v("x_G")
    u = {}
    for d in doms:
        for key in (f"u_in_{d}", f"u_out_{d}", f"u_R_{d}"):
            u[key] = v(key)
    nodes = eval_nodes(x_g, u, config)

    c_e = _price(prices, "electricity_price", k, True)
    c_fuel = _price(prices, "fuel_price", k, g.rho_fuel > 0)
    sp, se, st = config.storage_p, config.storage_e, config.storage_t

    revenue = c_e * nodes.n9
    if "P" in doms:
        c_p = _price(prices, "primary_price", k, sp.direct_sale_allowed)
        revenue = revenue + c_p * sp.eta_out * u["u_R_P"]
    if "E" in doms:
        # direct sale of stored electricity earns the grid price; cancels the
        # load-offset term folded into n9
        revenue = revenue + c_e * se.eta_out * u["u_R_E"]
    if "T" in doms:
        c_t = _price(prices, "tertiary_price", k, st.direct_sale_allowed)
        revenue = revenue + c_t * st.eta_out * u["u_R_T"]

    fuel = g.rho_fuel * c_fuel * (1.0 + g.beta_backend) * x_g
    carbon = econ.c_co2 * g.alpha_co2 * g.rho_fuel * x_g
    fom = Affine(const=econ.c_fom_g / HOURS_PER_YEAR)
    for d in doms:
        fom = fom + econ.fom(d) * v(f"sigma_{d}")
    vom = econ.c_vom_g * x_g
    for d in doms:
        s = config.storage(d)
        charge = s.eta_in * u[f"u_in_{d}"]
        if d == "T":
            charge = charge / s.e2h
        vom = vom + econ.vom(d) * (charge + u[f"u_out_{d}"])
    return revenue - fuel - carbon - fom - vom


def npv_breakdown(trajectory, config: HesConfig, prices: Mapping[str, np.ndarray] = None) -> NpvBreakdown:
    """Recompute the NPV of a decoded trajectory by left-endpoint quadrature.

    Independent of the LP objective vector: every stream is integrated
    directly from the state/control series.
    """
    mesh = trajectory.mesh
    prices = trajectory.prices if prices is None else prices
    n_int = mesh.n_nodes - 1
    x_g = np.asarray(trajectory.states["x_G"][:n_int], dtype=float)
    ctl = {k: np.asarray(v, dtype=float) for k, v in trajectory.controls.items()}
    if x_g.size != n_int or any(a.size != n_int for a in ctl.values()):
        raise ValueError("trajectory/mesh mismatch")
    g = config.generator
    econ = config.economics or EconomicParams()
    doms = config.enabled_domains
    sigma = trajectory.sigma

    t = mesh.h * np.arange(n_int)
    w = mesh.h / discount_factor(t, econ.r)
    nodes = eval_nodes(x_g, ctl, config)
    zeros = np.zeros(n_int)

    def price(role):
        arr = prices.get(role)
        return zeros if arr is None else np.asarray(arr, dtype=float)[:n_int]

    c_e = price("electricity_price")

    rev_e = c_e * nodes.n9
    if "E" in doms:
        rev_e = rev_e + c_e * config.storage_e.eta_out * ctl["u_R_E"]
    rev_p = price("primary_price") * config.storage_p.eta_out * ctl["u_R_P"] if "P" in doms else zeros
    rev_t = price("tertiary_price") * config.storage_t.eta_out * ctl["u_R_T"] if "T" in doms else zeros

    fuel = g.rho_fuel * price("fuel_price") * (1.0 + g.beta_backend) * x_g
    carbon = econ.c_co2 * g.alpha_co2 * g.rho_fuel * x_g
    fom_rate = econ.c_fom_g / HOURS_PER_YEAR + sum(econ.fom(d) * sigma[d] for d in doms)
    vom = econ.c_vom_g * x_g
    for d in doms:
        s = config.storage(d)
        charge = s.eta_in * ctl[f"u_in_{d}"]
        if d == "T":
            charge = charge / s.e2h
        vom = vom + econ.vom(d) * (charge + ctl[f"u_out_{d}"])

    load = 1.0 + idc_factor(econ.r, econ.t_con)
    capital = (econ.c_occ_g + sum(econ.occ(d) * sigma[d] for d in doms)) * load

    fixed_om = float(np.sum(w * fom_rate))
    variable_om = float(np.sum(w * vom))
    fuel_t = float(np.sum(w * fuel))
    carbon_t = float(np.sum(w * carbon))
    r_p, r_e, r_t = (float(np.sum(w * a)) for a in (rev_p, rev_e, rev_t))
    npv = -capital - fixed_om - variable_om - fuel_t - carbon_t + r_p + r_e + r_t
    return NpvBreakdown(npv, capital, fixed_om, variable_om, fuel_t, carbon_t, r_p, r_e, r_t)
