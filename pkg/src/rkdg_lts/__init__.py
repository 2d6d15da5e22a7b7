"""RKDG solver with predictor-corrector local time stepping for 1D
conservation laws."""

from .diagnostics import (convergence_rates, l1_rel_error, total_mass,
                          total_variation_means)
from .dg import compute_lh, edge_values, eval_at, nodal_values, project_initial
from .exact import (advection_exact, burgers_exact, burgers_shock_position,
                    burgers_shock_time, euler_riemann_exact, solve_riemann)
from .limiters import LimiterConfig, apply_limiter, limit_mesh, minmod, modified_minmod
from .lts import (InternalConsistencyError, PredictorTable,
                  build_predictor_table, correct_interface, lts_step,
                  predict_interface)
from .mesh import MeshError, MeshPartition, build_partition
from .models import FLUX_KINDS, SolverError, make_model, numerical_flux
from .runner import (CASES, RunConfig, RunResult, config_hash,
                     convergence_study, run_case)
from .ssprk import RKScheme, gts_step, scheme_for_order

__version__ = "0.1.0"

__all__ = [
    "CASES", "FLUX_KINDS", "InternalConsistencyError", "LimiterConfig",
    "MeshError", "MeshPartition", "PredictorTable", "RKScheme", "RunConfig",
    "RunResult", "SolverError", "advection_exact", "apply_limiter",
    "build_partition", "build_predictor_table", "burgers_exact",
    "burgers_shock_position", "burgers_shock_time", "compute_lh",
    "config_hash", "convergence_rates", "convergence_study",
    "correct_interface", "edge_values", "euler_riemann_exact", "eval_at",
    "gts_step", "l1_rel_error", "limit_mesh", "lts_step", "make_model",
    "minmod", "modified_minmod", "nodal_values", "numerical_flux",
    "predict_interface", "project_initial", "run_case", "scheme_for_order",
    "solve_riemann", "total_mass", "total_variation_means",
]
