"""Direct transcription of the co-design problem into a sparse linear program.

States live on the mesh nodes, controls are held constant over each
interval (zero-order hold, exact for these linear dynamics) and the
objective integral uses left-endpoint quadrature.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

import numpy as np
import scipy.sparse as sp

from .economics import EconomicParams, capital_cost_affine, discount_factor, profit_rate_coefficients
from .model import DOMAINS, Affine, HesConfig, eval_nodes
from .signals import covering, resample_to_mesh, wind_speed_to_availability

log = logging.getLogger(__name__)

PRICE_ROLES = ("electricity_price", "primary_price", "tertiary_price", "fuel_price")


@dataclass(frozen=True)
class Mesh:
    t0: float
    tf: float
    h: float
    n_nodes: int

    @property
    def n_intervals(self) -> int:
        return self.n_nodes - 1

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.n_nodes)


def build_mesh(t0: float, tf: float, h: float) -> Mesh:
    if not h > 0:
        raise ValueError("mesh step h must be > 0")
    if not tf > t0:
        raise ValueError("mesh requires tf > t0")
    steps = (tf - t0) / h
    n = round(steps)
    if abs(steps - n) > 1e-9 * max(1.0, steps):
        raise ValueError(f"(tf - t0)/h = {steps} is not integral")
    return Mesh(float(t0), float(tf), float(h), int(n) + 1)


@dataclass(frozen=True)
class VariableLayout:
    """Column map: node states, then interval controls, then capacities.

    Within a block the kinds of one time index are contiguous.
    """

    n_nodes: int
    state_kinds: tuple
    control_kinds: tuple
    plant_kinds: tuple

    @property
    def n_x(self):
        return len(self.state_kinds)

    @property
    def n_u(self):
        return len(self.control_kinds)

    @property
    def total(self) -> int:
        return self.n_x * self.n_nodes + self.n_u * (self.n_nodes - 1) + len(self.plant_kinds)

    @property
    def kinds(self) -> tuple:
        return self.state_kinds + self.control_kinds + self.plant_kinds

    def col(self, kind: str, k=0):
        """Column index (or array of indices) of ``kind`` at time index ``k``."""
        if kind in self.state_kinds:
            return self.state_kinds.index(kind) + self.n_x * np.asarray(k)
        if kind in self.control_kinds:
            base = self.n_x * self.n_nodes
            return base + self.control_kinds.index(kind) + self.n_u * np.asarray(k)
        if kind in self.plant_kinds:
            return self.n_x * self.n_nodes + self.n_u * (self.n_nodes - 1) + self.plant_kinds.index(kind)
        raise KeyError(f"unknown variable kind '{kind}'")

    def series(self, kind: str) -> np.ndarray:
        n = self.n_nodes if kind in self.state_kinds else self.n_nodes - 1
        return self.col(kind, np.arange(n))

    def describe(self, j: int) -> tuple:
        """Inverse map: column -> (kind, time index)."""
        j = int(j)
        if not 0 <= j < self.total:
            raise IndexError(j)
        ns = self.n_x * self.n_nodes
        if j < ns:
            return self.state_kinds[j % self.n_x], j // self.n_x
        j -= ns
        nc = self.n_u * (self.n_nodes - 1)
        if j < nc:
            return self.control_kinds[j % self.n_u], j // self.n_u
        return self.plant_kinds[j - nc], 0

    def name(self, j: int) -> str:
        kind, k = self.describe(j)
        return kind if kind in self.plant_kinds else f"{kind}[{k}]"

    def names(self) -> list:
        return [self.name(j) for j in range(self.total)]

    def decode(self, x) -> dict:
        x = np.asarray(x, dtype=float)
        if x.size != self.total:
            raise ValueError(f"layout mismatch: {x.size} values for {self.total} columns")
        return {kind: (x[self.series(kind)] if kind not in self.plant_kinds else float(x[self.col(kind)]))
                for kind in self.kinds}


def index_variables(config: HesConfig, mesh: Mesh) -> VariableLayout:
    doms = config.enabled_domains
    states = ("x_G",) + tuple(f"x_{d}" for d in doms)
    controls = ("u_G",) + tuple(k for d in doms for k in (f"u_in_{d}", f"u_out_{d}", f"u_R_{d}"))
    plant = tuple(f"sigma_{d}" for d in doms)
    return VariableLayout(mesh.n_nodes, states, controls, plant)


@dataclass(frozen=True)
class Override:
    kind: str
    hour: float = 0.0
    lower: Optional[float] = None
    upper: Optional[float] = None


@dataclass(frozen=True)
class ScenarioOverlay:
    """Daily hour-of-day windows and literal bound overrides.

    ``peak_mode`` selects how the full-capacity requirement binds:
    ``"state"`` raises the generator power lower bound at window nodes,
    ``"request"`` raises the requested-power lower bound on window
    intervals, ``"auto"`` uses ``"state"`` when ``tau == 0`` and
    ``"request"`` otherwise.
    """

    peak_window: tuple = ()
    sale_windows: Mapping[str, tuple] = field(default_factory=dict)
    overrides: tuple = ()
    peak_mode: str = "auto"

    @property
    def empty(self) -> bool:
        return not self.peak_window and not self.sale_windows and not self.overrides


def hour_window(start: int, end: int) -> tuple:
    """Daily hours ``[start, end)``."""
    return tuple(range(int(start), int(end)))


def validate_overlay(overlay: ScenarioOverlay, report, config: HesConfig = None):
    def check_hours(hours, path):
        for hr in hours:
            if not (float(hr).is_integer() and 0 <= hr < 24):
                report.add(path, f"hour {hr} outside [0, 24)")

    check_hours(overlay.peak_window, "scenario.peak_window")
    for d, hours in overlay.sale_windows.items():
        if d not in DOMAINS:
            report.add("scenario.sale_windows", f"unknown storage domain '{d}'")
        elif config is not None and not config.storage(d).enabled:
            report.add(f"scenario.sale_windows.{d}", "storage domain not enabled")
        check_hours(hours, f"scenario.sale_windows.{d}")
    if overlay.peak_mode not in ("auto", "state", "request"):
        report.add("scenario.peak_mode", f"unknown mode '{overlay.peak_mode}'")
    if config is not None:
        kinds = set(index_variables(config, Mesh(0, 1, 1, 2)).kinds)
        for o in overlay.overrides:
            if o.kind not in kinds:
                report.add("scenario.overrides", f"unknown variable kind '{o.kind}'")


@dataclass(frozen=True, eq=False)
class LpProblem:
    """``maximize c @ x + c0  s.t.  A x (<= | =) b,  lb <= x <= ub``.

    ``col_scale``/``obj_scale`` record scaling relative to original units:
    original ``x = col_scale * x_scaled`` and the objective was multiplied
    by ``obj_scale``.  ``row_names`` start with a family tag shared by
    all rows of one kind (``eq4:...`` for generator lag rows).
    """

    c: np.ndarray
    c0: float
    A: sp.csr_matrix
    sense: np.ndarray
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    row_names: tuple
    layout: Optional[VariableLayout] = None
    col_names: tuple = ()
    bound_tags: tuple = ()
    obj_scale: float = 1.0
    col_scale: Optional[np.ndarray] = None
    meta: Mapping = field(default_factory=dict)
    notes: tuple = ()

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    @property
    def n_cols(self) -> int:
        return self.A.shape[1]

    @property
    def row_tags(self) -> list:
        return [name.split(":", 1)[0] for name in self.row_names]

    def column_names(self) -> list:
        if self.col_names:
            return list(self.col_names)
        if self.layout is not None:
            return self.layout.names()
        return [f"c{j}" for j in range(self.n_cols)]

    def scales(self) -> np.ndarray:
        return np.ones(self.n_cols) if self.col_scale is None else self.col_scale


class _RowBuilder:
    """Accumulates sparse rows from per-interval templates, vectorised over k."""

    def __init__(self, layout: VariableLayout):
        self.layout = layout
        self.rows, self.cols, self.vals = [], [], []
        self.sense, self.rhs, self.names = [], [], []
        self.m = 0

    def _column(self, key, ks):
        kind, dk = key if isinstance(key, tuple) else (key, 0)
        if kind in self.layout.plant_kinds:
            return np.full(ks.size, self.layout.col(kind), dtype=np.int64)
        return np.asarray(self.layout.col(kind, ks + dk), dtype=np.int64)

    def add(self, expr: Affine, ks, sense: str, tag: str, label: str, rhs=0.0):
        """Emit ``expr (sense) rhs`` for every k in ``ks``; ``expr`` keys are
        ``kind`` or ``(kind, dk)``.  Constants move to the right-hand side."""
        ks = np.asarray(ks, dtype=np.int64)
        if ks.size == 0:
            return
        if not expr.items():
            # identically-zero row: drop when trivially satisfied
            lhs = expr.const - np.asarray(rhs, dtype=float)
            if np.all(lhs <= 0.0 if sense == "<" else lhs == 0.0):
                return
        row_ids = self.m + np.arange(ks.size)
        merged = {}
        for key, v in expr.items():
            merged[key] = merged.get(key, 0.0) + v
        for key, v in merged.items():
            if v == 0.0:
                continue
            self.rows.append(row_ids)
            self.cols.append(self._column(key, ks))
            self.vals.append(np.full(ks.size, v))
        rhs = np.broadcast_to(np.asarray(rhs, dtype=float), ks.shape) - expr.const
        self.rhs.append(rhs)
        self.sense.append(np.full(ks.size, sense))
        self.names.extend(f"{tag}:{label}[{k}]" for k in ks)
        self.m += ks.size

    def build(self, n_cols):
        if self.rows:
            rows = np.concatenate(self.rows)
            cols = np.concatenate(self.cols)
            vals = np.concatenate(self.vals)
        else:
            rows = cols = np.zeros(0, dtype=np.int64)
            vals = np.zeros(0)
        A = sp.coo_matrix((vals, (rows, cols)), shape=(self.m, n_cols)).tocsr()
        A.sum_duplicates()
        A.eliminate_zeros()
        b = np.concatenate(self.rhs) if self.rhs else np.zeros(0)
        sense = np.concatenate(self.sense) if self.sense else np.zeros(0, dtype="<U1")
        return A, sense, b, tuple(self.names)


def resolve_signals(config: HesConfig, mesh: Mesh) -> dict:
    """Extend and resample every signal the LP needs onto the mesh.

    Prices come back at interval left endpoints; ``x_g_min``/``x_g_max``
    at nodes.
    """
    out = {}
    for role in PRICE_ROLES:
        sig = config.signals.get(role)
        if sig is not None:
            out[role] = resample_to_mesh(covering(sig, mesh), mesh)
    g = config.generator

    def node_bound(value, default):
        if value is None:
            return np.full(mesh.n_nodes, float(default))
        if isinstance(value, str):
            sig = config.signals[value]
            return resample_to_mesh(covering(sig, mesh), mesh, at="nodes")
        return np.full(mesh.n_nodes, float(value))

    out["x_g_min"] = node_bound(g.x_g_min, 0.0)
    if g.turbine is not None:
        avail = wind_speed_to_availability(config.signals["wind_speed"], g.turbine, g.nominal_capacity)
        out["x_g_max"] = resample_to_mesh(covering(avail, mesh), mesh, at="nodes")
        if g.x_g_max is not None:
            out["x_g_max"] = np.minimum(out["x_g_max"], node_bound(g.x_g_max, g.nominal_capacity))
    else:
        out["x_g_max"] = node_bound(g.x_g_max, g.nominal_capacity)
    return out


def generator_decay(tau: float, h: float) -> float:
    """ZOH state-transition factor ``exp(-h / tau)`` (0 for an instantaneous generator)."""
    return 0.0 if tau == 0 else math.exp(-h / tau)


def assemble_lp(config: HesConfig, mesh: Mesh, signals: Mapping[str, np.ndarray] = None) -> LpProblem:
    """Transcribe ``config`` over ``mesh`` into an :class:`LpProblem`.

    ``signals`` are the mesh-resampled arrays from :func:`resolve_signals`
    (computed here when omitted).
    """
    if signals is None:
        signals = resolve_signals(config, mesh)
    layout = index_variables(config, mesh)
    n, N = layout.total, mesh.n_nodes
    K = np.arange(N - 1)
    nodes_k = np.arange(N)
    g = config.generator
    doms = config.enabled_domains
    h = mesh.h
    rb = _RowBuilder(layout)

    for name in ("x_g_min", "x_g_max"):
        if signals[name].shape != (N,):
            raise ValueError(f"signal '{name}' does not match the mesh ({signals[name].shape} vs {N} nodes)")

    # generator dynamics
    a = generator_decay(g.tau, h)
    if g.tau > 0:
        rb.add(Affine({("x_G", 1): 1.0, "x_G": -a, "u_G": -(1.0 - a)}), K, "=", "eq4", "gen_zoh")
    else:
        rb.add(Affine({"x_G": 1.0, "u_G": -1.0}), K, "=", "eq4", "gen_instant")

    # storage dynamics
    for d in doms:
        s = config.storage(d)
        gain = s.eta_in / s.e2h if d == "T" else s.eta_in
        rb.add(Affine({(f"x_{d}", 1): 1.0, f"x_{d}": -1.0, f"u_in_{d}": -h * gain, f"u_out_{d}": h}),
               K, "=", "eq5", f"storage_{d}")

    # revenue share never exceeds discharge
    for d in doms:
        rb.add(Affine({f"u_R_{d}": 1.0, f"u_out_{d}": -1.0}), K, "<", "eq10", f"uR<=uout_{d}")

    # capacity coupling at every node
    for d in doms:
        rb.add(Affine({f"x_{d}": 1.0, f"sigma_{d}": -1.0}), nodes_k, "<", "eq12", f"x<=sigma_{d}")

    # boundary conditions
    if g.tau > 0:
        rb.add(Affine({"x_G": 1.0}), [0], "=", "eq13", "x0_G", rhs=g.x0)
    for d in doms:
        rb.add(Affine({f"x_{d}": 1.0}), [0], "=", "eq13", f"x0_{d}", rhs=config.storage(d).x0)
    for d in doms:
        if config.storage(d).enforce_terminal:
            rb.add(Affine({(f"x_{d}", N - 1): 1.0, f"x_{d}": -1.0}), [0], "=", "eq13", f"periodic_{d}")

    # node constraints
    u_sym = {key: Affine.var(key) for d in doms for key in (f"u_in_{d}", f"u_out_{d}", f"u_R_{d}")}
    nv = eval_nodes(Affine.var("x_G"), u_sym, config)
    if "P" in doms:
        rb.add(u_sym["u_in_P"] - nv.n1, K, "<", "eq14", "uinP<=n1")
    if "E" in doms:
        rb.add(u_sym["u_in_E"] - nv.n5, K, "<", "eq14", "uinE<=n5")
    if "T" in doms:
        rb.add(u_sym["u_in_T"] - nv.n7, K, "<", "eq14", "uinT<=n7")
    rb.add(-nv.l_gp, K, "<", "eq15", "lgp>=0")
    rb.add(nv.l_gp - nv.n2, K, "<", "eq15", "lgp<=n2")
    if "T" in doms:
        rb.add(-nv.l_gpt, K, "<", "eq15", "lgpt>=0")
        rb.add(nv.l_gpt - nv.n3, K, "<", "eq15", "lgpt<=n3")
    rb.add(-nv.l_ge, K, "<", "eq15", "lge>=0")
    rb.add(nv.l_ge - nv.n5, K, "<", "eq15", "lge<=n5")

    A, sense, b, row_names = rb.build(n)

    # bounds
    lb = np.zeros(n)
    ub = np.full(n, np.inf)
    tags = ["eq26"] * n
    xg = layout.series("x_G")
    lb[xg] = signals["x_g_min"]
    ub[xg] = signals["x_g_max"]
    for j in xg:
        tags[j] = "eq11"
    ug = layout.series("u_G")
    lb[ug], ub[ug] = g.u_g_min, g.u_max
    for d in doms:
        s = config.storage(d)
        ub[layout.series(f"u_in_{d}")] = s.u_in_max
        ub[layout.series(f"u_out_{d}")] = s.u_out_max
        ub[layout.series(f"u_R_{d}")] = s.u_out_max if s.direct_sale_allowed else 0.0
        for kind in (f"u_in_{d}", f"u_out_{d}", f"u_R_{d}"):
            for j in layout.series(kind):
                tags[j] = "eq9"
        for j in layout.series(f"x_{d}"):
            tags[j] = "eq12"
        js = layout.col(f"sigma_{d}")
        ub[js] = np.inf if s.sigma_max is None else s.sigma_max
        tags[js] = "eq8"
    for j in ug:
        tags[j] = "eq9"

    c, c0 = objective_vector(config, mesh, layout, signals)
    meta = {"tau": g.tau, "t0": mesh.t0, "h": mesh.h, "n_nodes": N,
            "config": config, "mesh": mesh, "signals": signals}
    return LpProblem(c, c0, A, sense, b, lb, ub, row_names, layout,
                     bound_tags=tuple(tags), meta=meta)


def objective_vector(config: HesConfig, mesh: Mesh, layout: VariableLayout, signals) -> tuple:
    """Discounted NPV objective as ``(c, c0)`` over the layout's columns.

    The profit rate is linear in the price signals, so its coefficients are
    obtained by evaluating the rate once per unit price and combining them
    with each interval's prices.
    """
    econ = config.economics or EconomicParams()
    doms = config.enabled_domains
    N = mesh.n_nodes
    n_int = N - 1
    c = np.zeros(layout.total)
    cap = capital_cost_affine(econ, doms)
    c0 = -cap.const
    for kind, v in cap.items():
        c[layout.col(kind)] -= v

    roles = [r for r in PRICE_ROLES if r in signals]
    zero_prices = {r: np.zeros(1) for r in roles}
    base = profit_rate_coefficients(0, config, zero_prices)
    per_role = {}
    for r in roles:
        unit = dict(zero_prices)
        unit[r] = np.ones(1)
        per_role[r] = profit_rate_coefficients(0, config, unit) - base

    t = mesh.h * np.arange(n_int)
    w = mesh.h / discount_factor(t, econ.r)
    keys = set(base.coef) | {k for f in per_role.values() for k in f.coef}
    for key in sorted(keys):
        series = np.full(n_int, base.coef.get(key, 0.0))
        for r, form in per_role.items():
            coef = form.coef.get(key, 0.0)
            if coef != 0.0:
                series = series + coef * signals[r][:n_int]
        if key in layout.plant_kinds:
            c[layout.col(key)] += float(np.sum(w * series))
        else:
            c[layout.col(key, np.arange(n_int))] += w * series
    const = np.full(n_int, base.const)
    for r, form in per_role.items():
        const = const + form.const * signals[r][:n_int]
    c0 += float(np.sum(w * const))
    return c, c0


def interval_hours(lp: LpProblem) -> np.ndarray:
    """Hour-of-day at every interval left endpoint (nodes: one more entry)."""
    n = lp.meta["n_nodes"]
    return np.floor(np.mod(lp.meta["t0"] + lp.meta["h"] * np.arange(n), 24.0) + 1e-9)


def apply_scenario_overlay(lp: LpProblem, overlay: ScenarioOverlay, mesh: Mesh = None) -> LpProblem:
    """Tighten bounds for peak windows, sale windows and literal overrides.

    Bound inversions induced by the overlay are logged and listed in
    ``notes``; the solver then reports the problem infeasible.
    """
    if overlay is None or overlay.empty:
        return lp
    layout = lp.layout
    lb, ub = lp.lb.copy(), lp.ub.copy()
    notes = list(lp.notes)
    hours = interval_hours(lp)
    n_int = layout.n_nodes - 1
    doms = [k[len("sigma_"):] for k in layout.plant_kinds]
    ks = np.arange(n_int)

    if overlay.peak_window:
        in_peak = np.isin(hours, np.asarray(overlay.peak_window, dtype=float))
        mode = overlay.peak_mode
        if mode == "auto":
            mode = "state" if lp.meta.get("tau", 0.0) == 0 else "request"
        for d in doms:
            ub[layout.col(f"u_in_{d}", ks[in_peak[:n_int]])] = 0.0
        if mode == "state":
            cols = layout.col("x_G", np.nonzero(in_peak)[0])
        else:
            cols = layout.col("u_G", ks[in_peak[:n_int]])
        lb[cols] = ub[cols]

    for d, window in overlay.sale_windows.items():
        in_sale = np.isin(hours[:n_int], np.asarray(window, dtype=float))
        cols_r = layout.col(f"u_R_{d}", ks)
        cols_o = layout.col(f"u_out_{d}", ks)
        ub[cols_r] = np.where(in_sale, ub[cols_o], 0.0)

    for o in overlay.overrides:
        if o.kind in layout.plant_kinds:
            j = layout.col(o.kind)
        else:
            k = int(round((o.hour - lp.meta["t0"]) / lp.meta["h"]))
            j = layout.col(o.kind, k)
        if o.lower is not None:
            lb[j] = o.lower
        if o.upper is not None:
            ub[j] = o.upper
        if lb[j] > ub[j]:
            msg = f"induced infeasibility: {layout.name(j)} at hour {o.hour}: lower {lb[j]} > upper {ub[j]}"
            log.warning(msg)
            notes.append(msg)

    bad = np.nonzero(lb > ub)[0]
    for j in bad:
        kind, k = layout.describe(j)
        msg = f"induced infeasibility: {layout.name(j)} at hour {lp.meta['t0'] + k * lp.meta['h']:g}"
        if msg not in notes and not any(n.startswith(f"induced infeasibility: {layout.name(j)} ") for n in notes):
            notes.append(msg)
    return replace(lp, lb=lb, ub=ub, notes=tuple(notes))


def scale_lp(lp: LpProblem, objective_scale: float = 1e-9, column_scales: Mapping = None) -> LpProblem:
    """Scale the objective and optionally change column units.

    ``column_scales`` maps a column index or plant kind to ``s`` with
    ``x_original = s * x_scaled``.
    """
    if not (objective_scale > 0 and math.isfinite(objective_scale)):
        raise ValueError("objective scale must be positive and finite")
    s = np.ones(lp.n_cols)
    for key, val in (column_scales or {}).items():
        if not (val > 0 and math.isfinite(val)):
            raise ValueError(f"column scale for {key} must be positive and finite")
        j = lp.layout.col(key) if isinstance(key, str) else key
        s[j] = val
    if objective_scale == 1.0 and np.all(s == 1.0):
        return lp
    A = (lp.A @ sp.diags(s)).tocsr()
    c = lp.c * s * objective_scale
    with np.errstate(invalid="ignore"):
        lb = lp.lb / s
        ub = lp.ub / s
    return replace(lp, A=A, c=c, c0=lp.c0 * objective_scale, lb=lb, ub=ub,
                   obj_scale=lp.obj_scale * objective_scale, col_scale=lp.scales() * s)


def unscale_solution(report, lp: LpProblem):
    """Map a report on the scaled ``lp`` back to original units."""
    if lp.col_scale is None and lp.obj_scale == 1.0:
        return report
    if lp.obj_scale is None or lp.obj_scale <= 0:
        raise ValueError("scaling metadata missing")
    s = lp.scales()
    w = lp.obj_scale
    changes = {"objective": None if report.objective is None else report.objective / w}
    if report.x is not None:
        changes["x"] = report.x * s
    if report.y is not None:
        changes["y"] = report.y / w
    if report.d is not None:
        changes["d"] = report.d / (w * s)
    return replace(report, **changes, scaled=False)


def unscaled_lp(lp: LpProblem) -> LpProblem:
    """The same problem in original units (inverse of :func:`scale_lp`)."""
    if lp.col_scale is None and lp.obj_scale == 1.0:
        return lp
    s = lp.scales()
    A = (lp.A @ sp.diags(1.0 / s)).tocsr()
    return replace(lp, A=A, c=lp.c / s / lp.obj_scale, c0=lp.c0 / lp.obj_scale,
                   lb=lp.lb * s, ub=lp.ub * s, obj_scale=1.0, col_scale=None)
