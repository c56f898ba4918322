"""Assemble, scale, solve and decode one configuration."""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .economics import NpvBreakdown, npv_breakdown
from .model import HesConfig, validate_config
from .solver import SolveReport, solve, verify_optimality
from .solver.report import OPTIMAL
from .transcription import (LpProblem, Mesh, ScenarioOverlay, apply_scenario_overlay, assemble_lp,
                            build_mesh, scale_lp, unscale_solution)

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RunResult:
    lp: LpProblem
    scaled_lp: LpProblem
    report: SolveReport
    trajectory: Optional[object] = None
    npv: Optional[NpvBreakdown] = None
    accounting: Optional[object] = None

    @property
    def sigma(self) -> dict:
        return {} if self.trajectory is None else dict(self.trajectory.sigma)


def config_mesh(config: HesConfig, mesh: Mesh = None) -> Mesh:
    if mesh is not None:
        return mesh
    hz = config.horizon
    if isinstance(hz, Mesh):
        return hz
    if hz is None:
        raise ConfigError("no horizon configured")
    return build_mesh(*hz)


def build_problem(config: HesConfig, mesh: Mesh = None, overlay: ScenarioOverlay = None) -> LpProblem:
    rep = validate_config(config)
    if not rep.ok:
        raise ConfigError(str(rep))
    mesh = config_mesh(config, mesh)
    lp = assemble_lp(config, mesh)
    overlay = config.scenario if overlay is None else overlay
    if overlay is not None:
        lp = apply_scenario_overlay(lp, overlay, mesh)
    return lp


def max_sigma_report(slp: LpProblem, report: SolveReport, tol: float = 1e-9) -> SolveReport:
    """Among (near-)optimal solutions, the one with the largest total capacity.

    Solves ``max sum(sigma)`` over the (scaled) problem ``slp`` plus the row
    ``NPV >= NPV* - eps``.  ``report`` is in original units; the returned
    point carries no duals since it is a different vertex.
    """
    sig_cols = [slp.layout.col(k) for k in slp.layout.plant_kinds]
    if not sig_cols:
        return report
    target = report.objective * slp.obj_scale
    eps = tol * (1.0 + abs(target))
    row = sp.csr_matrix(-slp.c.reshape(1, -1))
    A = sp.vstack([slp.A, row], format="csr")
    b = np.append(slp.b, -(target - slp.c0 - eps))
    c = np.zeros(slp.n_cols)
    c[sig_cols] = 1.0
    aux = replace(slp, A=A, b=b, c=c, c0=0.0, sense=np.append(slp.sense, "<"),
                  row_names=slp.row_names + ("eq26:npv_floor[0]",), obj_scale=1.0, col_scale=None)
    r2 = solve(aux, tol=tol)
    if r2.status != OPTIMAL:
        log.warning("capacity tie-break solve failed (%s); keeping the primary optimum", r2.status)
        return report
    x = r2.x * slp.scales()
    obj = float((slp.c @ r2.x + slp.c0) / slp.obj_scale)
    return replace(report, x=x, y=None, d=None, objective=obj,
                   warnings=report.warnings + ("capacity tie-break: duals dropped",))


def run_config(config: HesConfig, mesh: Mesh = None, overlay: ScenarioOverlay = None,
               objective_scale: float = 1e-9, tol: float = 1e-9, max_iter: int = None,
               sigma_mode: str = "optimal", decode: bool = True) -> RunResult:
    """Full pipeline; ``sigma_mode="max"`` breaks ties towards the largest capacity."""
    from .analysis.accounting import energy_accounting
    from .analysis.trajectory import extract_trajectory

    lp = build_problem(config, mesh, overlay)
    slp = scale_lp(lp, objective_scale)
    rep = solve(slp, tol=tol, max_iter=max_iter)
    rep = unscale_solution(rep, slp)
    if rep.status != OPTIMAL:
        return RunResult(lp, slp, rep)
    if sigma_mode == "max":
        rep = max_sigma_report(slp, rep, tol)
    elif sigma_mode != "optimal":
        raise ValueError(f"unknown sigma_mode '{sigma_mode}'")
    if not decode:
        return RunResult(lp, slp, rep)
    traj = extract_trajectory(rep, lp, config)
    npv = npv_breakdown(traj, config)
    acc = energy_accounting(traj, config)
    return RunResult(lp, slp, rep, traj, npv, acc)


def certify(result: RunResult, tol: float = 1e-9):
    return verify_optimality(result.lp, result.report, tol)
