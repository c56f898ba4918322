"""Where generated energy goes, who covers each load, and where revenue comes from."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from ..economics import EconomicParams, discount_factor
from ..model import HesConfig, eval_nodes
from .trajectory import Trajectory

GENERATOR_CATEGORIES = ("grid", "charge_P", "primary_load", "tertiary_primary_load", "conversion_loss",
                        "charge_E", "electric_load", "charge_T")


def _fractions(parts: Mapping[str, float], total: float) -> dict:
    if total == 0.0:
        return {k: None for k in parts}
    return {k: v / total for k, v in parts.items()}


@dataclass(frozen=True)
class EnergyAccounting:
    """Integrated energy and revenue splits.

    Fractions are ``None`` when their denominator is zero.  ``totals`` holds
    the integrated quantities behind each split.
    """

    generator: Mapping[str, Optional[float]]
    primary_load: Mapping[str, Optional[float]]
    electric_load: Mapping[str, Optional[float]]
    revenue: Mapping[str, Optional[float]]
    storage_revenue_share: Optional[float]
    totals: Mapping[str, float] = field(default_factory=dict)

    def split_sums(self) -> dict:
        """Sum of each defined split (each should be 1)."""
        out = {}
        for name in ("generator", "primary_load", "electric_load", "revenue"):
            split = getattr(self, name)
            if all(v is not None for v in split.values()) and split:
                out[name] = float(sum(split.values()))
        if self.storage_revenue_share is not None:
            out["revenue_attribution"] = self.storage_revenue_share + (1.0 - self.storage_revenue_share)
        return out

    def rows(self):
        for name in ("generator", "primary_load", "electric_load", "revenue"):
            for k, v in getattr(self, name).items():
                yield name, k, v
        share = self.storage_revenue_share
        yield "revenue_attribution", "storage", share
        yield "revenue_attribution", "generator", None if share is None else 1.0 - share


def energy_accounting(traj: Trajectory, config: HesConfig) -> EnergyAccounting:
    """Integrate (left endpoint, step h) every destination and source."""
    h = traj.mesh.h
    n_int = traj.mesh.n_nodes - 1
    nv = traj.nodes
    c = traj.controls
    doms = config.enabled_domains
    x_g = np.asarray(traj.states["x_G"][:n_int], dtype=float)
    zero = np.zeros(n_int)

    def integ(a):
        return float(h * np.sum(np.broadcast_to(a, (n_int,))))

    def ctl(key):
        return c.get(key, zero)

    gen = {
        "grid": integ(nv.n8),
        "charge_P": integ(ctl("u_in_P")),
        "primary_load": integ(nv.l_gp),
        "tertiary_primary_load": integ(nv.l_gpt),
        "conversion_loss": integ((1.0 - config.generator.eta_g) * nv.n4),
        "charge_E": integ(ctl("u_in_E")),
        "electric_load": integ(nv.l_ge),
        "charge_T": integ(ctl("u_in_T")),
    }
    generated = integ(x_g)

    sp_, se = config.storage_p, config.storage_e
    p_total = integ(config.loads.l_p * x_g)
    p_store = integ(sp_.eta_out * (ctl("u_out_P") - ctl("u_R_P"))) if "P" in doms else 0.0
    e_total = integ(config.loads.l_e * x_g)
    e_store = integ(se.eta_out * (ctl("u_out_E") - ctl("u_R_E"))) if "E" in doms else 0.0
    primary = _fractions({"generator": integ(nv.l_gp), "storage": p_store}, p_total)
    electric = _fractions({"generator": integ(nv.l_ge), "storage": e_store}, e_total)

    econ = config.economics or EconomicParams()
    w = h / discount_factor(h * np.arange(n_int), econ.r)
    prices = traj.prices

    def price(role):
        arr = prices.get(role)
        return zero if arr is None else np.asarray(arr, dtype=float)[:n_int]

    c_e = price("electricity_price")
    direct_e = c_e * se.eta_out * ctl("u_R_E") if "E" in doms else zero
    rev_e = c_e * nv.n9 + direct_e
    rev_p = price("primary_price") * sp_.eta_out * ctl("u_R_P") if "P" in doms else zero
    rev_t = price("tertiary_price") * config.storage_t.eta_out * ctl("u_R_T") if "T" in doms else zero
    direct = direct_e + rev_p + rev_t
    parts = {"primary": float(np.sum(w * rev_p)), "electric": float(np.sum(w * rev_e)),
             "tertiary": float(np.sum(w * rev_t))}
    total_rev = sum(parts.values())
    revenue = _fractions(parts, total_rev)

    # grid revenue carried by discharge terms: node n9 with generator and charging zeroed
    discharge_only = {k: v for k, v in c.items() if k.startswith(("u_out_", "u_R_"))}
    n9_storage = np.broadcast_to(eval_nodes(0.0, discharge_only, config).n9, (n_int,))
    storage_rev = float(np.sum(w * (c_e * n9_storage + direct)))
    share = None if total_rev == 0.0 else storage_rev / total_rev

    totals = dict(gen)
    totals.update(generated=generated, primary_load_total=p_total, electric_load_total=e_total,
                  revenue_total=total_rev, storage_revenue=storage_rev)
    return EnergyAccounting(_fractions(gen, generated), primary, electric, revenue, share, totals)


def write_accounting_csv(acc: EnergyAccounting, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["split", "category", "fraction"])
        for split, cat, v in acc.rows():
            w.writerow([split, cat, "" if v is None else repr(float(v))])
