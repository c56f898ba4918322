"""Hand an exported MPS file to HiGHS and write its answer as a solution file.

HiGHS is an optional dependency (``pip install artifact[highs]``).
"""
from __future__ import annotations

import importlib.util
from pathlib import Path


def highs_available() -> bool:
    return importlib.util.find_spec("highspy") is not None


def solve_mps_with_highs(mps_path, solution_path, time_limit: float = None, tol: float = 1e-9) -> str:
    """Solve ``mps_path`` with HiGHS; write primal values and row duals.

    Returns the HiGHS model status as a lower-case string.
    """
    try:
        import highspy
    except ImportError as exc:
        raise RuntimeError("external solver requested but highspy is not installed") from exc
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("primal_feasibility_tolerance", tol)
    h.setOptionValue("dual_feasibility_tolerance", tol)
    if time_limit is not None:
        h.setOptionValue("time_limit", float(time_limit))
    status = h.readModel(str(mps_path))
    if status == highspy.HighsStatus.kError:
        raise RuntimeError(f"HiGHS could not read {mps_path}")
    h.run()
    model_status = h.modelStatusToString(h.getModelStatus()).lower()
    lp = h.getLp()
    sol = h.getSolution()
    with open(Path(solution_path), "w", encoding="ascii") as fh:
        fh.write(f"* HiGHS model status: {model_status}\n")
        for name, v in zip(lp.col_names_, sol.col_value):
            fh.write(f"{name} {float(v)!r}\n")
        if sol.dual_valid:
            for name, v in zip(lp.row_names_, sol.row_dual):
                fh.write(f"{name} {float(v)!r}\n")
    return model_status
