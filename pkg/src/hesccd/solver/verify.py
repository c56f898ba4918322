"""Primal/dual certificate checks for ``maximize c x  s.t.  A x (<=|=) b, l <= x <= u``."""
from __future__ import annotations

import numpy as np

from .report import Certificate


def lagrangian_bound(lp, y) -> float:
    """Upper bound on the optimum from any row prices ``y``.

    Prices on ``<=`` rows are clipped at zero first, so the bound is valid
    for every ``y``; it is ``inf`` whenever a reduced cost pushes towards an
    infinite bound.
    """
    y = np.asarray(y, dtype=float).copy()
    ineq = lp.sense == "<"
    y[ineq] = np.maximum(y[ineq], 0.0)
    d = lp.c - lp.A.T @ y
    with np.errstate(invalid="ignore"):
        hi = np.where(d > 0, d * lp.ub, np.where(d < 0, d * lp.lb, 0.0))
    return float(lp.b @ y + np.sum(hi) + lp.c0)


def primal_violations(lp, x):
    """Per-row violation and per-column bound violation of ``x``."""
    x = np.asarray(x, dtype=float)
    ax = lp.A @ x if lp.n_rows else np.zeros(0)
    r = ax - lp.b
    row_v = np.where(lp.sense == "<", np.maximum(r, 0.0), np.abs(r))
    col_v = np.maximum(np.maximum(lp.lb - x, x - lp.ub), 0.0)
    return row_v, col_v


def verify_optimality(lp, report, tol: float = 1e-9) -> Certificate:
    """Check primal feasibility, dual feasibility, complementary slackness
    and the duality gap of ``report`` against ``tol * (1 + |objective|)``."""
    if report.x is None:
        raise ValueError("report carries no primal values")
    if report.y is None:
        raise ValueError("missing duals: cannot certify optimality")
    x = np.asarray(report.x, dtype=float)
    y = np.asarray(report.y, dtype=float)
    if x.size != lp.n_cols or y.size != lp.n_rows:
        raise ValueError("layout mismatch between report and LP")
    msgs = []
    primal_obj = float(lp.c @ x + lp.c0)
    threshold = tol * (1.0 + abs(primal_obj))

    row_v, col_v = primal_violations(lp, x)
    p_res = float(max(row_v.max(initial=0.0), col_v.max(initial=0.0)))
    worst = ""
    if row_v.size and row_v.max() >= col_v.max(initial=0.0) and row_v.max() > 0:
        worst = lp.row_names[int(np.argmax(row_v))]
    elif col_v.size and col_v.max() > 0:
        j = int(np.argmax(col_v))
        names = lp.column_names()
        tag = lp.bound_tags[j] if lp.bound_tags else "bound"
        worst = f"{tag}:bound {names[j]}"
    if p_res > threshold:
        msgs.append(f"primal residual {p_res:.3g} at {worst}")

    d = lp.c - lp.A.T @ y if lp.n_rows else lp.c.copy()
    ineq = lp.sense == "<"
    dual_v = [np.maximum(-y[ineq], 0.0)]
    dual_v.append(np.where(np.isinf(lp.ub), np.maximum(d, 0.0), 0.0))
    dual_v.append(np.where(np.isinf(lp.lb), np.maximum(-d, 0.0), 0.0))
    d_res = float(max((v.max(initial=0.0) for v in dual_v), default=0.0))
    if d_res > threshold:
        msgs.append(f"dual residual {d_res:.3g}")

    slack = lp.b - (lp.A @ x if lp.n_rows else 0.0)
    comp = [np.abs(y[ineq] * slack[ineq])]
    with np.errstate(invalid="ignore"):
        up = np.where(d > 0, d * (lp.ub - x), 0.0)
        lo = np.where(d < 0, -d * (x - lp.lb), 0.0)
    up = np.where(np.isfinite(up), up, 0.0)
    lo = np.where(np.isfinite(lo), lo, 0.0)
    comp += [np.abs(up), np.abs(lo)]
    c_res = float(max((v.max(initial=0.0) for v in comp), default=0.0))
    if c_res > threshold:
        msgs.append(f"complementarity {c_res:.3g}")

    # dual objective with infinite-bound terms dropped (already counted as dual infeasibility)
    with np.errstate(invalid="ignore"):
        terms = np.where(d > 0, d * lp.ub, np.where(d < 0, d * lp.lb, 0.0))
    terms = np.where(np.isfinite(terms), terms, 0.0)
    dual_obj = float(lp.b @ y + np.sum(terms) + lp.c0)
    gap = abs(dual_obj - primal_obj)
    if gap > threshold:
        msgs.append(f"duality gap {gap:.3g}")
    passed = max(p_res, d_res, c_res, gap) <= threshold
    return Certificate(passed, p_res, d_res, c_res, gap, threshold, worst, tuple(msgs))
