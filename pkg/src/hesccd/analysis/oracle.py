"""Exhaustive grid search over controls and capacities for tiny instances.

Independent of the LP: it simulates the dynamics forward, rejects points
that break a bound or node constraint, and scores each schedule with its
own stage-profit evaluation.  Schedules reaching the same state (generator
power, stored amounts and the running maximum of each store) are merged,
and, within one interval, grid points with the same effect on the next
state are reduced to the most profitable one.  Both reductions keep the
search exact while avoiding the full product of every interval's grid.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ..economics import EconomicParams, discount_factor, idc_factor
from ..model import HesConfig, eval_nodes
from ..signals import HOURS_PER_YEAR
from ..transcription import Mesh, generator_decay, resolve_signals

FEAS_TOL = 1e-9


class OracleRefused(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    best: float
    schedule: dict
    states: dict
    sigma: dict
    evaluated: int = 0
    grid_sizes: tuple = field(default_factory=tuple)


def _axis(lo, hi, res):
    if hi < lo - FEAS_TOL:
        return np.zeros(0)
    if hi - lo <= FEAS_TOL:
        return np.array([lo])
    n = int(math.floor((hi - lo) / res + 1e-9))
    pts = lo + res * np.arange(n + 1)
    if hi - pts[-1] > 1e-9:
        pts = np.append(pts, hi)
    return pts


def _stage_profit(config, econ, prices, k, x_g, u):
    """Operating profit rate at interval k for arrays of candidate points."""
    g = config.generator
    doms = config.enabled_domains
    nodes = eval_nodes(x_g, u, config)
    c_e = prices["electricity_price"][k]
    rev = c_e * nodes.n9
    if "P" in doms:
        rev = rev + prices.get("primary_price", np.zeros(k + 1))[k] * config.storage_p.eta_out * u["u_R_P"]
    if "E" in doms:
        rev = rev + c_e * config.storage_e.eta_out * u["u_R_E"]
    if "T" in doms:
        rev = rev + prices.get("tertiary_price", np.zeros(k + 1))[k] * config.storage_t.eta_out * u["u_R_T"]
    fuel_price = prices.get("fuel_price", np.zeros(k + 1))[k]
    cost = g.rho_fuel * x_g * (fuel_price * (1.0 + g.beta_backend) + econ.c_co2 * g.alpha_co2)
    cost = cost + econ.c_vom_g * x_g + econ.c_fom_g / HOURS_PER_YEAR
    for d in doms:
        s = config.storage(d)
        charge = s.eta_in * u[f"u_in_{d}"] / (s.e2h if d == "T" else 1.0)
        cost = cost + econ.vom(d) * (charge + u[f"u_out_{d}"])
    return rev - cost, nodes


def _node_ok(nodes, u, doms):
    ok = np.ones(np.shape(nodes.n1), dtype=bool)
    t = FEAS_TOL
    if "P" in doms:
        ok &= u["u_in_P"] <= nodes.n1 + t
    if "E" in doms:
        ok &= u["u_in_E"] <= nodes.n5 + t
    if "T" in doms:
        ok &= u["u_in_T"] <= nodes.n7 + t
        ok &= (nodes.l_gpt >= -t) & (nodes.l_gpt <= nodes.n3 + t)
    ok &= (nodes.l_gp >= -t) & (nodes.l_gp <= nodes.n2 + t)
    ok &= (nodes.l_ge >= -t) & (nodes.l_ge <= nodes.n5 + t)
    for d in doms:
        ok &= u[f"u_R_{d}"] <= u[f"u_out_{d}"] + t
    return ok


def brute_force_oracle(config: HesConfig, mesh: Mesh, resolution: float = 0.01,
                       sigma_grid: dict = None, max_grid: float = 1e8, max_work: float = 2e8) -> OracleResult:
    """Best objective over the control grid at ``resolution`` and the capacity grid.

    ``sigma_grid`` maps a storage domain to candidate capacities; by default
    each capacity is the exact peak stored amount of the schedule.
    """
    if mesh.n_nodes > 5:
        raise OracleRefused(f"oracle limited to 5 nodes, got {mesh.n_nodes}")
    if config.scenario is not None and not config.scenario.empty:
        raise OracleRefused("oracle does not apply scenario overlays")
    g = config.generator
    econ = config.economics or EconomicParams()
    doms = config.enabled_domains
    sig = resolve_signals(config, mesh)
    prices = {k: v for k, v in sig.items() if k.endswith("_price")}
    h, N = mesh.h, mesh.n_nodes
    a = generator_decay(g.tau, h)
    w = h / discount_factor(h * np.arange(N - 1), econ.r)

    ctl_names = ["u_G"] + [k for d in doms for k in (f"u_in_{d}", f"u_out_{d}", f"u_R_{d}")]

    def axes_at(k):
        out = []
        for name in ctl_names:
            if name == "u_G":
                lo, hi = g.u_g_min, g.u_max
                if g.tau == 0:
                    lo, hi = max(lo, sig["x_g_min"][k]), min(hi, sig["x_g_max"][k])
            else:
                d = name[-1]
                s = config.storage(d)
                lo = 0.0
                if name.startswith("u_in"):
                    hi = s.u_in_max
                elif name.startswith("u_out"):
                    hi = s.u_out_max
                else:
                    hi = s.u_out_max if s.direct_sale_allowed else 0.0
            out.append(_axis(lo, hi, resolution))
        return out

    sizes = []
    for k in range(N - 1):
        ax = axes_at(k)
        size = int(np.prod([len(v) for v in ax], dtype=float))
        if size > max_grid:
            raise OracleRefused(f"grid too large: {size} points per interval exceeds {int(max_grid)}")
        sizes.append(size)

    # state vector: x_G (if dynamic), x_S per domain, running max per domain
    x0 = [g.x0] if g.tau > 0 else []
    x0 += [config.storage(d).x0 for d in doms] * 2
    if g.tau > 0 and not (sig["x_g_min"][0] - FEAS_TOL <= g.x0 <= sig["x_g_max"][0] + FEAS_TOL):
        return OracleResult(-math.inf, {}, {}, {}, 0, tuple(sizes))
    states = np.array([x0], dtype=float)
    values = np.zeros(1)
    history = []  # per stage: (parent index, control row) for each surviving state
    evaluated = 0
    nd = len(doms)
    off = 1 if g.tau > 0 else 0

    for k in range(N - 1):
        ax = axes_at(k)
        grid = np.array(list(itertools.product(*ax))) if all(len(v) for v in ax) else np.zeros((0, len(ax)))
        nc = grid.shape[0]
        if nc == 0 or states.shape[0] == 0:
            return OracleResult(-math.inf, {}, {}, {}, evaluated, tuple(sizes))
        u_all = {name: grid[:, i] for i, name in enumerate(ctl_names)}
        # node feasibility and stage profit depend on the state only through x_G
        if g.tau > 0:
            _, group = np.unique(np.round(states[:, 0], 9), return_inverse=True)
            group = group.ravel()
        else:
            group = np.zeros(states.shape[0], dtype=int)
        parts = []
        for gi in range(int(group.max()) + 1):
            members = np.nonzero(group == gi)[0]
            x_g = states[members[0], 0] * np.ones(nc) if g.tau > 0 else u_all["u_G"]
            profit, nodes = _stage_profit(config, econ, prices, k, x_g, u_all)
            ok = _node_ok(nodes, u_all, doms)
            evaluated += nc
            if not ok.any():
                continue
            # controls reaching the same next state are interchangeable: keep the best
            effect = [u_all["u_G"]] if g.tau > 0 else []
            for d in doms:
                s = config.storage(d)
                gain = s.eta_in / s.e2h if d == "T" else s.eta_in
                effect.append(gain * u_all[f"u_in_{d}"] - u_all[f"u_out_{d}"])
            idx = np.nonzero(ok)[0]
            if effect:
                key = np.round(np.column_stack(effect)[idx], 12)
                order = np.lexsort((-profit[idx],) + tuple(key[:, j] for j in range(key.shape[1] - 1, -1, -1)))
                first = np.ones(order.size, dtype=bool)
                first[1:] = np.any(key[order][1:] != key[order][:-1], axis=1)
                idx = idx[order[first]]
            else:
                idx = idx[[int(np.argmax(profit[idx]))]]
            nr = idx.size
            evaluated += members.size * nr
            if evaluated > max_work:
                raise OracleRefused(f"search too large: more than {int(max_work)} evaluations")
            S = np.repeat(states[members], nr, axis=0)
            C = np.tile(grid[idx], (members.size, 1))
            P = np.tile(profit[idx], members.size)
            parent = np.repeat(members, nr)
            u = {name: C[:, i] for i, name in enumerate(ctl_names)}
            new = np.empty_like(S)
            keep = np.ones(S.shape[0], dtype=bool)
            if g.tau > 0:
                new[:, 0] = a * S[:, 0] + (1.0 - a) * u["u_G"]
                keep &= (new[:, 0] >= sig["x_g_min"][k + 1] - FEAS_TOL) & (new[:, 0] <= sig["x_g_max"][k + 1] + FEAS_TOL)
            for i, d in enumerate(doms):
                s = config.storage(d)
                gain = s.eta_in / s.e2h if d == "T" else s.eta_in
                xs = S[:, off + i] + h * (gain * u[f"u_in_{d}"] - u[f"u_out_{d}"])
                keep &= xs >= -FEAS_TOL
                xs = np.maximum(xs, 0.0)
                new[:, off + i] = xs
                new[:, off + nd + i] = np.maximum(S[:, off + nd + i], xs)
                if s.sigma_max is not None:
                    keep &= new[:, off + nd + i] <= s.sigma_max + FEAS_TOL
            val = values[parent] + w[k] * P
            parts.append((new[keep], val[keep], parent[keep], C[keep]))
        if not parts or sum(p[0].shape[0] for p in parts) == 0:
            return OracleResult(-math.inf, {}, {}, {}, evaluated, tuple(sizes))
        new, val, parent, C = (np.concatenate([p[i] for p in parts]) for i in range(4))
        # merge identical states, keeping the best value (first index on ties)
        key = np.round(new, 9)
        order = np.lexsort((-val,) + tuple(key[:, j] for j in range(key.shape[1] - 1, -1, -1)))
        key_sorted = key[order]
        first = np.ones(order.size, dtype=bool)
        first[1:] = np.any(key_sorted[1:] != key_sorted[:-1], axis=1)
        keep = order[first]
        states, values = new[keep], val[keep]
        history.append((parent[keep], C[keep]))

    # terminal conditions and capacity choice
    ok = np.ones(states.shape[0], dtype=bool)
    for i, d in enumerate(doms):
        if config.storage(d).enforce_terminal:
            ok &= np.abs(states[:, off + i] - config.storage(d).x0) <= 1e-7
    load = 1.0 + idc_factor(econ.r, econ.t_con)
    total = values - econ.c_occ_g * load
    sigma_choice = {}
    for i, d in enumerate(doms):
        per_unit = econ.occ(d) * load + econ.fom(d) * float(np.sum(w))
        need = states[:, off + nd + i]
        if sigma_grid and d in sigma_grid:
            cand = np.sort(np.asarray(sigma_grid[d], dtype=float))
            j = np.searchsorted(cand, need - FEAS_TOL)
            ok &= j < cand.size
            chosen = cand[np.minimum(j, cand.size - 1)]
        else:
            # costs are non-negative, so the smallest admissible capacity is optimal
            chosen = need
        total -= per_unit * chosen
        sigma_choice[d] = chosen
    total = np.where(ok, total, -np.inf)
    best = int(np.argmax(total))
    if not np.isfinite(total[best]):
        return OracleResult(-math.inf, {}, {}, {}, evaluated, tuple(sizes))

    # backtrack the schedule
    rows, idx = [], best
    for parent, C in reversed(history):
        rows.append(C[idx])
        idx = parent[idx]
    rows.reverse()
    sched = {name: np.array([r[i] for r in rows]) for i, name in enumerate(ctl_names)}
    traj = _simulate(config, mesh, sched, sig)
    return OracleResult(float(total[best]), sched, traj, {d: float(sigma_choice[d][best]) for d in doms},
                        evaluated, tuple(sizes))


def _simulate(config, mesh, sched, sig):
    g = config.generator
    a = generator_decay(g.tau, mesh.h)
    N = mesh.n_nodes
    out = {}
    if g.tau > 0:
        x = [g.x0]
        for k in range(N - 1):
            x.append(a * x[-1] + (1 - a) * sched["u_G"][k])
        out["x_G"] = np.array(x)
    else:
        out["x_G"] = np.append(sched["u_G"], sched["u_G"][-1])
    for d in config.enabled_domains:
        s = config.storage(d)
        gain = s.eta_in / s.e2h if d == "T" else s.eta_in
        x = [s.x0]
        for k in range(N - 1):
            x.append(x[-1] + mesh.h * (gain * sched[f"u_in_{d}"][k] - sched[f"u_out_{d}"][k]))
        out[f"x_{d}"] = np.array(x)
    return out
