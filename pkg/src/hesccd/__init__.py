"""Control co-design of hybrid generator/storage plants as a linear program."""
from .economics import EconomicParams, discount_factor, idc_factor, npv_breakdown
from .model import (GeneratorSpec, HesConfig, LoadModel, StorageSpec, TurbineSpec, eval_nodes,
                    validate_config)
from .signals import Signal, load_signal_csv, turbine_power
from .transcription import (LpProblem, Mesh, ScenarioOverlay, apply_scenario_overlay, assemble_lp,
                            build_mesh, index_variables, scale_lp, unscale_solution)

__all__ = [
    "EconomicParams", "GeneratorSpec", "HesConfig", "LoadModel", "LpProblem", "Mesh", "ScenarioOverlay",
    "Signal", "StorageSpec", "TurbineSpec", "apply_scenario_overlay", "assemble_lp", "build_mesh",
    "discount_factor", "eval_nodes", "idc_factor", "index_variables", "load_signal_csv", "npv_breakdown",
    "scale_lp", "turbine_power", "unscale_solution", "validate_config",
]
__version__ = "0.1.0"
