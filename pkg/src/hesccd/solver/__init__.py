"""LP solving: bundled simplex, certificates, MPS and solution-file exchange."""
from .mps import export_mps, import_external_solution, read_mps, write_solution
from .report import Certificate, SolveReport
from .simplex import StandardFormLp, solve, to_standard_form
from .verify import lagrangian_bound, verify_optimality

__all__ = [
    "Certificate", "SolveReport", "StandardFormLp", "export_mps", "import_external_solution",
    "lagrangian_bound", "read_mps", "solve", "to_standard_form", "verify_optimality", "write_solution",
]
