"""Result containers shared by the bundled and external solver paths."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration-limit"
SINGULAR = "singular-basis"
FEASIBLE_UNVERIFIED = "feasible, optimality unverified"


@dataclass(frozen=True, eq=False)
class SolveReport:
    """Outcome of one solve, in the maximisation sense of the LP it came from.

    ``y`` are row prices (d objective / d rhs) and ``d = c - A.T @ y`` the
    reduced costs.
    """

    status: str
    objective: Optional[float] = None
    x: Optional[np.ndarray] = None
    y: Optional[np.ndarray] = None
    d: Optional[np.ndarray] = None
    iterations: int = 0
    phase1_iterations: int = 0
    primal_residual: float = float("nan")
    dual_residual: float = float("nan")
    complementarity: float = float("nan")
    gap: float = float("nan")
    wall_time: float = 0.0
    message: str = ""
    warnings: tuple = ()
    scaled: bool = False

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


@dataclass(frozen=True)
class Certificate:
    passed: bool
    primal_residual: float
    dual_residual: float
    complementarity: float
    gap: float
    threshold: float
    worst_row: str = ""
    messages: tuple = ()

    def __str__(self):
        head = "pass" if self.passed else "FAIL"
        body = (f"primal {self.primal_residual:.3g}, dual {self.dual_residual:.3g}, "
                f"compl {self.complementarity:.3g}, gap {self.gap:.3g} (threshold {self.threshold:.3g})")
        extra = "; ".join(self.messages)
        return f"{head}: {body}" + (f"; {extra}" if extra else "")
