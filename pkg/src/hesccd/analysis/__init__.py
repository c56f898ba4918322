"""Trajectories, energy accounting, sweeps and the brute-force oracle."""
from .accounting import EnergyAccounting, energy_accounting, write_accounting_csv
from .oracle import OracleRefused, OracleResult, brute_force_oracle
from .sweep import SweepResult, run_sweep, set_path
from .trajectory import Trajectory, constraint_residuals, extract_trajectory, write_trajectory_csv

__all__ = [
    "EnergyAccounting", "OracleRefused", "OracleResult", "SweepResult", "Trajectory",
    "brute_force_oracle", "constraint_residuals", "energy_accounting", "extract_trajectory",
    "run_sweep", "set_path", "write_accounting_csv", "write_trajectory_csv",
]
