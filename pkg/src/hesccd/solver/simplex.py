"""Bounded primal revised simplex.

The LP is brought into the form ``min c z  s.t.  M z = b, l <= z <= u`` by
adding one slack per inequality row.  The basis inverse is kept as a sparse
LU factorisation plus a product-form eta file that is refactored every
``refactor_every`` updates.  Pricing is Dantzig's rule with a fallback to
Bland's smallest-index rule after a run of degenerate pivots; the ratio
test is a two-pass Harris test with bound flips.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .report import (INFEASIBLE, ITERATION_LIMIT, OPTIMAL, SINGULAR, UNBOUNDED,
                     SolveReport)
from .verify import verify_optimality

AT_LOWER, AT_UPPER, AT_ZERO, BASIC = 0, 1, 2, -1


@dataclass(frozen=True, eq=False)
class StandardFormLp:
    """``min c z`` over ``M z = b`` with ``z = [x, slacks]``.

    ``c`` is the negated maximisation objective; slack ``i`` of original
    row ``slack_rows[i]`` sits at column ``n_orig + i``.
    """

    c: np.ndarray
    M: sp.csc_matrix
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    n_orig: int
    slack_rows: np.ndarray

    def to_original(self, z):
        return np.asarray(z)[: self.n_orig]

    def from_original(self, x, lp):
        """Lift an LP point to standard form (slacks from the row activity)."""
        x = np.asarray(x, dtype=float)
        s = lp.b[self.slack_rows] - (lp.A @ x)[self.slack_rows]
        return np.concatenate([x, s])


def to_standard_form(lp) -> StandardFormLp:
    m, n = lp.n_rows, lp.n_cols
    slack_rows = np.nonzero(lp.sense == "<")[0]
    S = sp.csc_matrix((np.ones(slack_rows.size), (slack_rows, np.arange(slack_rows.size))),
                      shape=(m, slack_rows.size))
    M = sp.hstack([lp.A.tocsc(), S], format="csc")
    c = np.concatenate([-lp.c, np.zeros(slack_rows.size)])
    lb = np.concatenate([lp.lb, np.zeros(slack_rows.size)])
    ub = np.concatenate([lp.ub, np.full(slack_rows.size, np.inf)])
    return StandardFormLp(c, M, lp.b.astype(float), lb, ub, n, slack_rows)


class SingularBasis(RuntimeError):
    pass


class _BasisFactor:
    def __init__(self, M: sp.csc_matrix):
        self.M = M
        self.m = M.shape[0]
        self.lu = None
        self.etas = []

    def refactor(self, basis):
        B = self.M[:, basis].tocsc()
        try:
            self.lu = splu(B, permc_spec="COLAMD")
        except RuntimeError as exc:
            raise SingularBasis(str(exc)) from None
        self.etas = []

    def ftran(self, v):
        w = self.lu.solve(np.asarray(v, dtype=float))
        for r, idx, vals, inv in self.etas:
            t = w[r]
            if t != 0.0:
                w[idx] += t * vals
                w[r] = t * inv
        return w

    def btran(self, c):
        w = np.array(c, dtype=float)
        for r, idx, vals, inv in reversed(self.etas):
            w[r] = inv * w[r] + vals @ w[idx]
        return self.lu.solve(w, trans="T")

    def update(self, r, alpha):
        inv = 1.0 / alpha[r]
        idx = np.nonzero(alpha)[0]
        idx = idx[idx != r]
        self.etas.append((r, idx, -alpha[idx] * inv, inv))


def _column(M, j):
    v = np.zeros(M.shape[0])
    lo, hi = M.indptr[j], M.indptr[j + 1]
    v[M.indices[lo:hi]] = M.data[lo:hi]
    return v


class _Simplex:
    def __init__(self, sf: StandardFormLp, tol, max_iter, refactor_every, callback=None, lp=None):
        self.sf = sf
        self.tol = tol
        self.max_iter = max_iter
        self.refactor_every = refactor_every
        self.callback = callback
        self.lp = lp
        m = sf.M.shape[0]
        self.m = m
        finite = np.concatenate([np.abs(sf.b), np.abs(sf.lb[np.isfinite(sf.lb)]),
                                 np.abs(sf.ub[np.isfinite(sf.ub)])])
        self.tol_p = tol * (1.0 + (finite.max() if finite.size else 0.0)) * 1e-1
        self.tol_d = tol
        self.tol_piv = 1e-9
        self.iterations = 0

        # nonbasic starting point and artificial columns
        x = np.where(np.isfinite(sf.lb), sf.lb, np.where(np.isfinite(sf.ub), sf.ub, 0.0))
        status = np.where(np.isfinite(sf.lb), AT_LOWER, np.where(np.isfinite(sf.ub), AT_UPPER, AT_ZERO))
        r = sf.b - sf.M @ x
        n = sf.M.shape[1]
        basis = np.empty(m, dtype=np.int64)
        slack_of_row = np.full(m, -1)
        slack_of_row[sf.slack_rows] = sf.n_orig + np.arange(sf.slack_rows.size)
        art_rows, art_sign = [], []
        for i in range(m):
            j = slack_of_row[i]
            if j >= 0 and r[i] >= 0:
                basis[i] = j
                x[j] = r[i]
                status[j] = BASIC
            else:
                basis[i] = n + len(art_rows)
                art_rows.append(i)
                art_sign.append(1.0 if r[i] >= 0 else -1.0)
        na = len(art_rows)
        Aart = sp.csc_matrix((np.array(art_sign), (np.array(art_rows, dtype=np.int64), np.arange(na))),
                             shape=(m, na))
        self.M = sp.hstack([sf.M, Aart], format="csc")
        self.MT = self.M.T.tocsr()
        self.n = n
        self.art_rows = np.array(art_rows, dtype=np.int64)
        self.lb = np.concatenate([sf.lb, np.zeros(na)])
        self.ub = np.concatenate([sf.ub, np.full(na, np.inf)])
        x = np.concatenate([x, np.abs(r[self.art_rows]) if na else np.zeros(0)])
        status = np.concatenate([status, np.full(na, BASIC)])
        self.x, self.status, self.basis = x, status, basis
        self.factor = _BasisFactor(self.M)
        self.factor.refactor(self.basis)

    # -- helpers -----------------------------------------------------------
    def recompute_basics(self):
        nb = self.status != BASIC
        rhs = self.sf.b - self.M[:, nb] @ self.x[nb]
        self.x[self.basis] = self.factor.ftran(rhs)

    def refactor(self):
        self.factor.refactor(self.basis)
        self.recompute_basics()

    def duals(self, cost):
        y = self.factor.btran(cost[self.basis])
        d = cost - self.MT @ y
        return y, d

    def entering_candidates(self, d):
        st = self.status
        movable = self.lb < self.ub
        score = np.zeros_like(d)
        lower = (st == AT_LOWER) & movable & (d < -self.tol_d)
        upper = (st == AT_UPPER) & movable & (d > self.tol_d)
        free = (st == AT_ZERO) & (np.abs(d) > self.tol_d)
        score[lower | upper | free] = np.abs(d[lower | upper | free])
        return score

    # -- main loop -----------------------------------------------------------
    def run(self, cost, phase):
        # dual tolerance relative to the cost scale, so objective scaling is harmless
        self.tol_d = self.tol * max(np.abs(cost).max(initial=0.0), 1e-300) * 1e-1
        degenerate = 0
        since_refactor = 0
        checked_fresh = False
        while True:
            if since_refactor >= self.refactor_every:
                self.refactor()
                since_refactor = 0
            y, d = self.duals(cost)
            if self.callback is not None and phase == 2:
                self.callback(self.x[: self.sf.n_orig].copy(), -y.copy())
            score = self.entering_candidates(d)
            if not np.any(score > 0):
                if since_refactor > 0 and not checked_fresh:
                    self.refactor()
                    since_refactor = 0
                    checked_fresh = True
                    continue
                return OPTIMAL
            checked_fresh = False
            if self.iterations >= self.max_iter:
                return ITERATION_LIMIT
            if degenerate > 50:
                q = int(np.flatnonzero(score > 0)[0])
            else:
                q = int(np.argmax(score))
            direction = 1.0 if (self.status[q] == AT_LOWER or (self.status[q] == AT_ZERO and d[q] < 0)) else -1.0
            alpha = self.factor.ftran(_column(self.M, q))
            rate = direction * alpha
            result = self.ratio_test(q, rate)
            if result is None:
                return UNBOUNDED
            theta, r, flip = result
            self.iterations += 1
            degenerate = degenerate + 1 if theta <= self.tol_p else 0
            xb = self.x[self.basis] - theta * rate
            self.x[self.basis] = xb
            if flip:
                self.status[q] = AT_UPPER if self.status[q] == AT_LOWER else AT_LOWER
                self.x[q] = self.ub[q] if self.status[q] == AT_UPPER else self.lb[q]
                continue
            self.x[q] += direction * theta
            p = self.basis[r]
            if rate[r] > 0:
                self.x[p], self.status[p] = self.lb[p], AT_LOWER
            else:
                self.x[p], self.status[p] = self.ub[p], AT_UPPER
            self.basis[r] = q
            self.status[q] = BASIC
            self.factor.update(r, alpha)
            since_refactor += 1

    def ratio_test(self, q, rate):
        xb = self.x[self.basis]
        lb = self.lb[self.basis]
        ub = self.ub[self.basis]
        dec = rate > self.tol_piv
        inc = rate < -self.tol_piv
        relaxed = np.full(self.m, np.inf)
        exact = np.full(self.m, np.inf)
        with np.errstate(invalid="ignore", divide="ignore"):
            relaxed[dec] = (xb[dec] - lb[dec] + self.tol_p) / rate[dec]
            exact[dec] = (xb[dec] - lb[dec]) / rate[dec]
            relaxed[inc] = (ub[inc] - xb[inc] + self.tol_p) / -rate[inc]
            exact[inc] = (ub[inc] - xb[inc]) / -rate[inc]
        theta_max = relaxed.min(initial=np.inf)
        span = self.ub[q] - self.lb[q]
        if not np.isfinite(theta_max):
            if np.isfinite(span):
                return span, -1, True
            return None
        if span <= theta_max and np.isfinite(span):
            return span, -1, True
        cand = np.nonzero(exact <= theta_max)[0]
        r = int(cand[np.argmax(np.abs(rate[cand]))])
        return max(exact[r], 0.0), r, False

    def drive_out_artificials(self):
        """Pivot basic artificials (at zero) out where a structural column can replace them."""
        for r in range(self.m):
            if self.basis[r] < self.n:
                continue
            e = np.zeros(self.m)
            e[r] = 1.0
            row = self.MT[: self.n] @ self.factor.btran(e)
            cand = np.nonzero((np.abs(row) > 1e-7) & (self.status[: self.n] != BASIC))[0]
            if cand.size == 0:
                continue
            q = int(cand[np.argmax(np.abs(row[cand]))])
            alpha = self.factor.ftran(_column(self.M, q))
            p = self.basis[r]
            self.status[p] = AT_LOWER
            self.x[p] = 0.0
            self.basis[r] = q
            self.status[q] = BASIC
            self.factor.update(r, alpha)
            if len(self.factor.etas) >= self.refactor_every:
                self.factor.refactor(self.basis)
        self.refactor()


def _trivial_report(lp, status, t0, message="", **kw):
    return SolveReport(status=status, wall_time=time.perf_counter() - t0, message=message, **kw)


def solve(lp, tol: float = 1e-9, max_iter: int = None, refactor_every: int = 50,
          callback=None) -> SolveReport:
    """Solve ``lp`` (maximisation) with the bounded revised simplex.

    ``callback(x, y)`` is invoked at every phase-2 iterate with the current
    primal point and row prices, both in LP terms.
    """
    t0 = time.perf_counter()
    bad = np.nonzero(lp.lb > lp.ub)[0]
    if bad.size:
        j = int(bad[0])
        names = lp.column_names()
        tag = lp.bound_tags[j] if lp.bound_tags else "bound"
        msg = f"{tag}: bound inversion on {names[j]} ({lp.lb[j]} > {lp.ub[j]})"
        if lp.notes:
            msg += "; " + "; ".join(lp.notes[:3])
        return _trivial_report(lp, INFEASIBLE, t0, msg)
    if lp.n_cols == 0 and lp.n_rows == 0:
        rep = SolveReport(OPTIMAL, lp.c0, np.zeros(0), np.zeros(0), np.zeros(0))
        return _finish(lp, rep, tol, t0)

    sf = to_standard_form(lp)
    if max_iter is None:
        max_iter = max(20000, 20 * (sf.M.shape[0] + sf.M.shape[1]))
    try:
        spx = _Simplex(sf, tol, max_iter, refactor_every, callback, lp)
        phase1_cost = np.concatenate([np.zeros(spx.n), np.ones(spx.M.shape[1] - spx.n)])
        status = OPTIMAL
        if spx.M.shape[1] > spx.n:
            status = spx.run(phase1_cost, 1)
            if status == ITERATION_LIMIT:
                return _trivial_report(lp, ITERATION_LIMIT, t0, "iteration limit in phase 1",
                                       iterations=spx.iterations, phase1_iterations=spx.iterations)
            art = spx.x[spx.n:]
            infeas = art.sum()
            if infeas > spx.tol_p * 10:
                i = int(spx.art_rows[int(np.argmax(art))])
                msg = f"{lp.row_names[i]}: infeasible (phase-1 residual {infeas:.3g})"
                return _trivial_report(lp, INFEASIBLE, t0, msg, iterations=spx.iterations,
                                       phase1_iterations=spx.iterations)
            spx.ub[spx.n:] = 0.0
            spx.x[spx.n:] = np.where(spx.status[spx.n:] == BASIC, spx.x[spx.n:], 0.0)
            spx.drive_out_artificials()
        it1 = spx.iterations
        cost = np.concatenate([sf.c, np.zeros(spx.M.shape[1] - spx.n)])
        status = spx.run(cost, 2)
    except SingularBasis as exc:
        return _trivial_report(lp, SINGULAR, t0, f"numerically singular basis: {exc}")

    z = spx.x[: sf.n_orig].copy()
    y_min, _ = spx.duals(cost)
    y = -y_min
    d = lp.c - lp.A.T @ y
    rep = SolveReport(status, float(lp.c @ z + lp.c0), z, y, d, spx.iterations, it1)
    if status == UNBOUNDED:
        rep = SolveReport(UNBOUNDED, None, z, None, None, spx.iterations, it1,
                          message="objective unbounded above")
        return _finish(lp, rep, tol, t0, certify=False)
    return _finish(lp, rep, tol, t0, certify=True)


def _finish(lp, rep, tol, t0, certify=True):
    changes = {"wall_time": time.perf_counter() - t0,
               "scaled": lp.obj_scale != 1.0 or lp.col_scale is not None}
    if certify and rep.x is not None and rep.y is not None:
        cert = verify_optimality(lp, rep, tol)
        changes.update(primal_residual=cert.primal_residual, dual_residual=cert.dual_residual,
                       complementarity=cert.complementarity, gap=cert.gap)
        if rep.status == OPTIMAL and not cert.passed:
            changes["warnings"] = rep.warnings + (f"certificate: {cert}",)
    return replace(rep, **changes)
