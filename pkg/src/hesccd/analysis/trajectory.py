"""Decoding LP solutions into time series and CSV exports."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from ..model import HesConfig, NodeValues, eval_nodes
from ..transcription import LpProblem, Mesh, unscale_solution

NODE_FIELDS = ("n1", "n2", "n3", "n4", "n5", "n6", "n7", "n8", "n9", "l_gp", "l_gpt", "l_ge")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States per node, controls and node values per interval, capacities.

    ``states`` and ``controls`` are keyed by layout kind (``x_G``, ``u_in_E``,
    ...); ``sigma`` by storage domain.
    """

    mesh: Mesh
    states: Mapping[str, np.ndarray]
    controls: Mapping[str, np.ndarray]
    nodes: NodeValues
    sigma: Mapping[str, float]
    prices: Mapping[str, np.ndarray]
    objective: Optional[float] = None

    @property
    def grid_power(self) -> np.ndarray:
        return self.nodes.n9

    @property
    def domains(self) -> tuple:
        return tuple(self.sigma)


def extract_trajectory(report, lp: LpProblem, config: HesConfig = None) -> Trajectory:
    """Decode ``report`` by the LP's layout and recompute the node values."""
    if report.x is None:
        raise ValueError(f"report has no primal values (status {report.status})")
    if report.scaled:
        report = unscale_solution(report, lp)
    layout = lp.layout
    if layout is None:
        raise ValueError("LP carries no variable layout")
    config = config or lp.meta.get("config")
    mesh = lp.meta.get("mesh")
    if config is None or mesh is None:
        raise ValueError("LP metadata lacks the configuration or mesh")
    vals = layout.decode(report.x)
    states = {k: vals[k] for k in layout.state_kinds}
    controls = {k: vals[k] for k in layout.control_kinds}
    sigma = {k[len("sigma_"):]: vals[k] for k in layout.plant_kinds}
    n_int = mesh.n_nodes - 1
    nodes = eval_nodes(states["x_G"][:n_int], controls, config)
    nodes = NodeValues(**{f: np.broadcast_to(np.asarray(v, dtype=float), (n_int,)).copy()
                          for f, v in nodes.as_dict().items()})
    signals = lp.meta.get("signals", {})
    prices = {k: v for k, v in signals.items() if k.endswith("_price")}
    return Trajectory(mesh, states, controls, nodes, sigma, prices, report.objective)


def constraint_residuals(traj: Trajectory, config: HesConfig) -> dict:
    """Largest violation of each family of path/boundary constraints."""
    n = traj.nodes
    out = {}
    neg = lambda a: float(np.max(np.maximum(-np.asarray(a), 0.0), initial=0.0))  # noqa: E731
    c = traj.controls
    doms = config.enabled_domains
    if "P" in doms:
        out["charge_P<=n1"] = neg(n.n1 - c["u_in_P"])
    if "E" in doms:
        out["charge_E<=n5"] = neg(n.n5 - c["u_in_E"])
    if "T" in doms:
        out["charge_T<=n7"] = neg(n.n7 - c["u_in_T"])
        out["l_gpt>=0"] = neg(n.l_gpt)
        out["l_gpt<=n3"] = neg(n.n3 - n.l_gpt)
    out["l_gp>=0"] = neg(n.l_gp)
    out["l_gp<=n2"] = neg(n.n2 - n.l_gp)
    out["l_ge>=0"] = neg(n.l_ge)
    out["l_ge<=n5"] = neg(n.n5 - n.l_ge)
    for d in doms:
        out[f"u_R<=u_out_{d}"] = neg(c[f"u_out_{d}"] - c[f"u_R_{d}"])
        out[f"x_{d}<=sigma"] = neg(traj.sigma[d] - traj.states[f"x_{d}"])
        out[f"x_{d}>=0"] = neg(traj.states[f"x_{d}"])
        if config.storage(d).enforce_terminal:
            x = traj.states[f"x_{d}"]
            out[f"periodic_{d}"] = float(abs(x[-1] - x[0]))
    return out


TRAJECTORY_COLUMNS_DOC = (
    "hour, then every state kind (node value), every control kind and the twelve "
    "node values n1..n9, l_gp, l_gpt, l_ge (interval values, blank on the final node), grid_power"
)


def trajectory_columns(traj: Trajectory) -> list:
    return (["hour"] + list(traj.states) + list(traj.controls) + list(NODE_FIELDS) + ["grid_power"])


def write_trajectory_csv(traj: Trajectory, path):
    """One row per mesh node; interval quantities are blank on the last node."""
    cols = trajectory_columns(traj)
    times = traj.mesh.times
    n_int = traj.mesh.n_nodes - 1
    nd = traj.nodes.as_dict()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for k in range(traj.mesh.n_nodes):
            row = [repr(float(times[k]))]
            row += [repr(float(traj.states[s][k])) for s in traj.states]
            if k < n_int:
                row += [repr(float(traj.controls[u][k])) for u in traj.controls]
                row += [repr(float(nd[f][k])) for f in NODE_FIELDS]
                row.append(repr(float(traj.grid_power[k])))
            else:
                row += [""] * (len(traj.controls) + len(NODE_FIELDS) + 1)
            w.writerow(row)


def read_trajectory_csv(path, mesh: Mesh, sigma: Mapping[str, float], prices=None) -> Trajectory:
    """Inverse of :func:`write_trajectory_csv` (node values re-read verbatim)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if len(body) != mesh.n_nodes:
        raise ValueError("trajectory/mesh mismatch")
    cols = {name: [r[i] for r in body] for i, name in enumerate(header)}
    states = {k: np.array([float(v) for v in cols[k]]) for k in header if k.startswith("x_")}
    controls = {k: np.array([float(v) for v in cols[k][:-1]]) for k in header if k.startswith("u_")}
    nodes = NodeValues(**{f: np.array([float(v) for v in cols[f][:-1]]) for f in NODE_FIELDS})
    return Trajectory(mesh, states, controls, nodes, dict(sigma), prices or {})
