"""Splitting methods for the resolvent of a sum of two maximal monotone operators."""
from .core import (DimensionError, MonotoneOperator, ProxFunction, as_operator, as_vector,
                   inner, norm)
from .strengthening import (ComposedReflector, ProbeReport, StrengthenedOperator, apply_T,
                            reflected_resolvent, reflector, strengthened_resolvent,
                            trajectory_probe)
from .solver import (ConfigurationError, LyapunovWitness, NumericalFailure, SolveReport,
                     SolverState, StepSchedule, StopReason, aamr_step, dr_step, init_state,
                     lyapunov, next_r, recover, solve, solve_aamr, solve_dr, step)
from .applications import (BestApproxProblem, StrongWeakProblem, best_approximation,
                           prox_of_sum, strong_weak_minimize)

__all__ = [
    "DimensionError", "MonotoneOperator", "ProxFunction", "as_operator", "as_vector", "inner",
    "norm", "ComposedReflector", "ProbeReport", "StrengthenedOperator", "apply_T",
    "reflected_resolvent", "reflector", "strengthened_resolvent", "trajectory_probe",
    "ConfigurationError", "LyapunovWitness", "NumericalFailure", "SolveReport", "SolverState",
    "StepSchedule", "StopReason", "aamr_step", "dr_step", "init_state", "lyapunov", "next_r",
    "recover", "solve", "solve_aamr", "solve_dr", "step", "BestApproxProblem",
    "StrongWeakProblem", "best_approximation", "prox_of_sum", "strong_weak_minimize",
]

__version__ = "0.1.0"
