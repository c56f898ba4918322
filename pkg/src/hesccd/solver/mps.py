"""Fixed-format MPS export/import and ``name value`` solution files.

Names are shortened to eight characters (``C0000001`` for columns,
``R0000001`` for rows) and the long names are kept in a CSV sidecar.
Numbers are written with Python's shortest round-trip representation so a
re-import reproduces every coefficient exactly; long values run past the
nominal 12-character field, which whitespace-splitting readers accept.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import replace
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .report import FEASIBLE_UNVERIFIED, INFEASIBLE, OPTIMAL, SolveReport
from .verify import primal_violations, verify_optimality

log = logging.getLogger(__name__)

OBJ_ROW = "OBJ"


class MpsError(ValueError):
    pass


def column_short_name(j: int) -> str:
    return f"C{j + 1:07d}"


def row_short_name(i: int) -> str:
    return f"R{i + 1:07d}"


def _num(v: float) -> str:
    return repr(float(v))


def _line(f1, f2, f3, f4):
    # field starts at columns 2, 5, 15, 25
    return f" {f1:<2} {f2:<8}  {f3:<8}  {f4}"


def export_mps(lp, path, names_path=None, name: str = "HESLP") -> Path:
    """Write ``lp`` as fixed-format MPS plus a name-map CSV.

    The objective is negated (the file states a minimisation) and its
    constant is stored as the objective row's RHS, read back as
    ``offset = -rhs``.
    """
    path = Path(path)
    names_path = Path(names_path) if names_path else path.with_suffix(".names.csv")
    A = lp.A.tocsc()
    m, n = lp.n_rows, lp.n_cols
    out = [
        "* maximisation problem: objective row holds the negated coefficients",
        f"NAME          {name}",
        "ROWS",
        f" N  {OBJ_ROW}",
    ]
    for i in range(m):
        out.append(f" {'L' if lp.sense[i] == '<' else 'E'}  {row_short_name(i)}")
    out.append("COLUMNS")
    for j in range(n):
        cname = column_short_name(j)
        lo, hi = A.indptr[j], A.indptr[j + 1]
        wrote = False
        if lp.c[j] != 0.0:
            out.append(_line("", cname, OBJ_ROW, _num(-lp.c[j])))
            wrote = True
        for i, v in zip(A.indices[lo:hi], A.data[lo:hi]):
            out.append(_line("", cname, row_short_name(int(i)), _num(v)))
            wrote = True
        if not wrote:
            out.append(_line("", cname, OBJ_ROW, "0.0"))
    out.append("RHS")
    for i in np.nonzero(lp.b)[0]:
        out.append(_line("", "RHS", row_short_name(int(i)), _num(lp.b[i])))
    if lp.c0 != 0.0:
        out.append(_line("", "RHS", OBJ_ROW, _num(lp.c0)))
    out.append("BOUNDS")
    for j in range(n):
        cname = column_short_name(j)
        lo, hi = lp.lb[j], lp.ub[j]
        if lo == hi:
            out.append(_line("FX", "BND", cname, _num(lo)))
            continue
        if np.isneginf(lo) and np.isposinf(hi):
            out.append(_line("FR", "BND", cname, ""))
            continue
        if np.isneginf(lo):
            out.append(_line("MI", "BND", cname, ""))
        elif lo != 0.0 or hi < 0:
            out.append(_line("LO", "BND", cname, _num(lo)))
        if np.isfinite(hi):
            out.append(_line("UP", "BND", cname, _num(hi)))
    out.append("ENDATA")
    try:
        path.write_text("\n".join(line.rstrip() for line in out) + "\n", encoding="ascii")
        write_name_map(lp, names_path)
    except OSError as exc:
        raise OSError(f"cannot write MPS output: {exc}") from exc
    return path


def write_name_map(lp, path):
    col_names = lp.column_names()
    tags = lp.bound_tags or ("",) * lp.n_cols
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["short", "kind", "long", "family"])
        for j, long in enumerate(col_names):
            w.writerow([column_short_name(j), "column", long, tags[j]])
        for i, long in enumerate(lp.row_names):
            w.writerow([row_short_name(i), "row", long, long.split(":", 1)[0]])


def read_name_map(path) -> dict:
    with open(path, newline="", encoding="utf-8") as fh:
        return {row["short"]: row for row in csv.DictReader(fh)}


def read_mps(path, names_path=None):
    """Parse an MPS file into an :class:`LpProblem` (maximisation of minus the file objective).

    ``G`` rows are negated into ``<=`` form.  ``RANGES`` is rejected.
    """
    from ..transcription import LpProblem

    section = None
    rows, senses = [], []
    row_index = {}
    obj_name = None
    cols, col_index = [], {}
    trip_r, trip_c, trip_v = [], [], []
    cobj = {}
    rhs = {}
    bounds = []
    maximise = False
    with open(path, encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("*"):
                continue
            if not line[0].isspace():
                head = line.split()
                section = head[0].upper()
                if section == "RANGES":
                    raise MpsError(f"line {lineno}: RANGES section not supported")
                if section == "OBJSENSE" and len(head) > 1:
                    maximise = head[1].upper() in ("MAX", "MAXIMIZE")
                if section == "ENDATA":
                    break
                continue
            tok = line.split()
            if section == "OBJSENSE":
                maximise = tok[0].upper() in ("MAX", "MAXIMIZE")
            elif section == "ROWS":
                kind, rname = tok[0].upper(), tok[1]
                if kind == "N":
                    if obj_name is None:
                        obj_name = rname
                    continue
                if kind not in ("L", "E", "G"):
                    raise MpsError(f"line {lineno}: unknown row type {kind}")
                row_index[rname] = len(rows)
                rows.append(rname)
                senses.append(kind)
            elif section == "COLUMNS":
                if "MARKER" in tok:
                    raise MpsError(f"line {lineno}: integer markers not supported")
                cname = tok[0]
                if cname not in col_index:
                    col_index[cname] = len(cols)
                    cols.append(cname)
                j = col_index[cname]
                for rname, val in zip(tok[1::2], tok[2::2]):
                    v = float(val)
                    if rname == obj_name:
                        cobj[j] = cobj.get(j, 0.0) + v
                    elif rname in row_index:
                        if v != 0.0:
                            trip_r.append(row_index[rname])
                            trip_c.append(j)
                            trip_v.append(v)
                    else:
                        raise MpsError(f"line {lineno}: unknown row {rname}")
            elif section == "RHS":
                pairs = tok[1:] if len(tok) % 2 == 1 else tok
                for rname, val in zip(pairs[0::2], pairs[1::2]):
                    rhs[rname] = float(val)
            elif section == "BOUNDS":
                kind = tok[0].upper()
                if kind in ("FR", "MI", "PL", "BV"):
                    cname, val = tok[-1], None
                    if len(tok) == 4:
                        cname = tok[2]
                    elif len(tok) == 3 and tok[2] not in col_index:
                        cname = tok[1]
                else:
                    cname, val = (tok[2], tok[3]) if len(tok) >= 4 else (tok[1], tok[2])
                if cname not in col_index:
                    raise MpsError(f"line {lineno}: bound on unknown column {cname}")
                bounds.append((kind, col_index[cname], None if val is None else float(val), lineno))
            else:
                raise MpsError(f"line {lineno}: data outside a known section")

    m, n = len(rows), len(cols)
    lb = np.zeros(n)
    ub = np.full(n, np.inf)
    for kind, j, val, lineno in bounds:
        if kind == "UP":
            ub[j] = val
        elif kind == "LO":
            lb[j] = val
        elif kind == "FX":
            lb[j] = ub[j] = val
        elif kind == "FR":
            lb[j], ub[j] = -np.inf, np.inf
        elif kind == "MI":
            lb[j] = -np.inf
        elif kind == "PL":
            ub[j] = np.inf
        else:
            raise MpsError(f"line {lineno}: unsupported bound type {kind}")
    A = sp.coo_matrix((trip_v, (trip_r, trip_c)), shape=(m, n)).tocsr()
    b = np.array([rhs.get(r, 0.0) for r in rows])
    flip = np.array([s == "G" for s in senses], dtype=bool)
    if flip.any():
        D = sp.diags(np.where(flip, -1.0, 1.0))
        A = (D @ A).tocsr()
        b = np.where(flip, -b, b)
    sense = np.array(["=" if s == "E" else "<" for s in senses], dtype="<U1")
    c = np.zeros(n)
    for j, v in cobj.items():
        c[j] = v
    offset = -rhs.get(obj_name, 0.0) if obj_name else 0.0
    if not maximise:
        c, c0 = -c, -offset
    else:
        c0 = offset

    row_names, col_names, tags = list(rows), list(cols), ()
    if names_path is not None:
        nm = read_name_map(names_path)
        row_names = [nm[r]["long"] if r in nm else r for r in rows]
        col_names = [nm[cn]["long"] if cn in nm else cn for cn in cols]
        tags = tuple(nm[cn]["family"] if cn in nm else "" for cn in cols)
    return LpProblem(c, float(c0), A, sense, b, lb, ub, tuple(row_names),
                     col_names=tuple(col_names), bound_tags=tags)


def write_solution(report: SolveReport, lp, path, duals: bool = True):
    """Write primal values (column names) and, optionally, row duals of
    the exported minimisation (row names)."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("* primal values by column; row entries are minimisation duals\n")
        for j, v in enumerate(report.x):
            fh.write(f"{column_short_name(j)} {_num(v)}\n")
        if duals and report.y is not None:
            for i, v in enumerate(report.y):
                fh.write(f"{row_short_name(i)} {_num(-v)}\n")


def import_external_solution(lp, path, tol: float = 1e-9) -> SolveReport:
    """Rebuild a :class:`SolveReport` from a ``name value`` file.

    Names may be short (as exported) or long.  Status is ``optimal`` only
    when a dual certificate is present and passes; a primal-only feasible
    point is ``feasible, optimality unverified``.
    """
    col_lookup = {column_short_name(j): j for j in range(lp.n_cols)}
    col_lookup.update({name: j for j, name in enumerate(lp.column_names())})
    row_lookup = {row_short_name(i): i for i in range(lp.n_rows)}
    row_lookup.update({name: i for i, name in enumerate(lp.row_names)})
    x = np.zeros(lp.n_cols)
    y = np.zeros(lp.n_rows)
    seen_c, seen_r = set(), set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line[0] in "*#":
                continue
            tok = line.split()
            if len(tok) != 2:
                raise ValueError(f"{path}: line {lineno}: expected 'name value'")
            name, val = tok[0], float(tok[1])
            if name in col_lookup:
                x[col_lookup[name]] = val
                seen_c.add(col_lookup[name])
            elif name in row_lookup:
                # file holds minimisation duals
                y[row_lookup[name]] = -val
                seen_r.add(row_lookup[name])
            else:
                raise ValueError(f"{path}: line {lineno}: unknown variable name '{name}'")
    warnings = []
    missing = lp.n_cols - len(seen_c)
    if missing:
        warnings.append(f"{missing} column values missing, defaulted to 0")
        log.warning(warnings[-1])
    has_duals = bool(seen_r)
    if has_duals and len(seen_r) < lp.n_rows:
        warnings.append(f"{lp.n_rows - len(seen_r)} row duals missing, defaulted to 0")
    objective = float(lp.c @ x + lp.c0)
    report = SolveReport("", objective, x, y if has_duals else None,
                         (lp.c - lp.A.T @ y) if has_duals else None, warnings=tuple(warnings))
    row_v, col_v = primal_violations(lp, x)
    p_res = float(max(row_v.max(initial=0.0), col_v.max(initial=0.0)))
    threshold = tol * (1.0 + abs(objective))
    if has_duals:
        cert = verify_optimality(lp, report, tol)
        status = OPTIMAL if cert.passed else (FEASIBLE_UNVERIFIED if p_res <= threshold else INFEASIBLE)
        return replace(report, status=status, primal_residual=cert.primal_residual,
                       dual_residual=cert.dual_residual, complementarity=cert.complementarity,
                       gap=cert.gap, message=str(cert))
    if p_res <= threshold:
        return replace(report, status=FEASIBLE_UNVERIFIED, primal_residual=p_res)
    worst = lp.row_names[int(np.argmax(row_v))] if row_v.size and row_v.max() >= col_v.max(initial=0) else "bounds"
    return replace(report, status=INFEASIBLE, primal_residual=p_res,
                   message=f"external point violates {worst} by {p_res:.3g}")
