"""
A full year through an external solver
======================================

An hourly one-year instance (8761 nodes) is assembled, written as MPS,
solved by HiGHS when it is installed, and the answer is read back and
checked against the original problem.
"""

import tempfile
import time
from pathlib import Path

from hesccd.instances import case1_config
from hesccd.pipeline import build_problem
from hesccd.solver import export_mps, import_external_solution, read_mps
from hesccd.solver.external import highs_available, solve_mps_with_highs

t0 = time.perf_counter()
lp = build_problem(case1_config(hours=8760))
print(f"assembled {lp.n_rows} rows x {lp.n_cols} columns in {time.perf_counter() - t0:.2f} s")

work = Path(tempfile.mkdtemp())
export_mps(lp, work / "year.mps", work / "names.csv")
back = read_mps(work / "year.mps", work / "names.csv")
print("MPS round trip exact:", (back.A != lp.A).nnz == 0 and (back.c == lp.c).all() and (back.b == lp.b).all())

if highs_available():
    t0 = time.perf_counter()
    status = solve_mps_with_highs(work / "year.mps", work / "solution.txt")
    rep = import_external_solution(lp, work / "solution.txt")
    print(f"HiGHS: {status}; re-imported as {rep.status}, NPV {rep.objective:.6g} $, "
          f"primal residual {rep.primal_residual:.1e} ({time.perf_counter() - t0:.1f} s)")
else:
    print("highspy not installed; install the 'highs' extra to solve externally")
