"""Parameter sweeps over cross products of configuration values."""
from __future__ import annotations

import csv
import itertools
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, is_dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from ..model import HesConfig


def set_path(obj, path: str, value):
    """Return a copy of nested frozen dataclasses with ``path`` replaced.

    Path segments are attribute names; ``signals.<role>`` replaces one
    signal in the mapping.
    """
    head, _, rest = path.partition(".")
    if isinstance(obj, Mapping):
        out = dict(obj)
        out[head] = set_path(out[head], rest, value) if rest else value
        return out
    if not is_dataclass(obj):
        raise KeyError(f"cannot descend into '{head}' of {type(obj).__name__}")
    if not hasattr(obj, head):
        raise KeyError(f"unknown config path segment '{head}'")
    if not rest:
        return replace(obj, **{head: value})
    inner = getattr(obj, head)
    if inner is None:
        raise KeyError(f"config path '{path}' passes through an unset field")
    return replace(obj, **{head: set_path(inner, rest, value)})


@dataclass(frozen=True, eq=False)
class SweepResult:
    axes: tuple
    npv: np.ndarray
    sigma: Mapping[str, np.ndarray]
    status: np.ndarray
    messages: np.ndarray

    @property
    def shape(self) -> tuple:
        return self.npv.shape

    def points(self):
        names = [a for a, _ in self.axes]
        grids = [v for _, v in self.axes]
        for idx in itertools.product(*(range(len(g)) for g in grids)):
            yield idx, dict(zip(names, (g[i] for g, i in zip(grids, idx))))

    def to_csv(self, path):
        names = [a for a, _ in self.axes]
        doms = list(self.sigma)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["index"] + names + ["status", "npv"] + [f"sigma_{d}" for d in doms] + ["message"])
            for idx, vals in self.points():
                key = idx if idx else ()
                row = ["-".join(map(str, idx)) or "0"] + [_fmt(vals[n]) for n in names]
                row += [self.status[key], repr(float(self.npv[key]))]
                row += [repr(float(self.sigma[d][key])) for d in doms]
                row.append(self.messages[key])
                w.writerow(row)


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if hasattr(v, "peak_window"):
        return " ".join(map(str, v.peak_window)) or "none"
    if hasattr(v, "name") and hasattr(v, "values"):
        return v.name
    return str(v)


def _solve_point(args):
    from ..pipeline import max_sigma_report, run_config

    config, mesh, tol, sigma_mode, objective_scale = args
    try:
        res = run_config(config, mesh, objective_scale=objective_scale, tol=tol, decode=False)
        rep = res.report
        if rep.status != "optimal":
            return rep.status, float("nan"), {}, rep.message
        npv = float(rep.objective)
        if sigma_mode == "max":
            rep = max_sigma_report(res.scaled_lp, rep, tol)
    except Exception as exc:  # a failed point must not stop the sweep
        return "error", float("nan"), {}, f"{type(exc).__name__}: {exc}"
    layout = res.lp.layout
    sig = {k[len("sigma_"):]: float(rep.x[layout.col(k)]) for k in layout.plant_kinds}
    return "optimal", npv, sig, ""


def run_sweep(base: HesConfig, axes: Sequence = (), parallelism: int = 1, mesh=None,
              tol: float = 1e-9, sigma_mode: str = "max", objective_scale: float = 1e-9,
              executor: str = "process") -> SweepResult:
    """Solve every point of the cross product of ``axes``.

    ``axes`` is a sequence (or mapping) of ``(config_path, values)``.
    Results are placed by grid index, so they do not depend on
    ``parallelism`` or completion order.
    """
    axes = tuple((name, tuple(vals)) for name, vals in (axes.items() if isinstance(axes, Mapping) else axes))
    shape = tuple(len(v) for _, v in axes)
    jobs = []
    for combo in itertools.product(*(v for _, v in axes)):
        cfg = base
        for (name, _), val in zip(axes, combo):
            cfg = set_path(cfg, name, val)
        jobs.append((cfg, mesh, tol, sigma_mode, objective_scale))
    if parallelism <= 1 or len(jobs) <= 1:
        results = [_solve_point(j) for j in jobs]
    else:
        pool_cls = ProcessPoolExecutor if executor == "process" else ThreadPoolExecutor
        with pool_cls(max_workers=parallelism) as pool:
            results = list(pool.map(_solve_point, jobs))
    doms = base.enabled_domains
    npv = np.array([r[1] for r in results], dtype=float).reshape(shape)
    sigma = {d: np.array([r[2].get(d, np.nan) for r in results], dtype=float).reshape(shape) for d in doms}
    status = np.array([r[0] for r in results], dtype=object).reshape(shape)
    messages = np.array([r[3] for r in results], dtype=object).reshape(shape)
    return SweepResult(axes, npv, sigma, status, messages)
