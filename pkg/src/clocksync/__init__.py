"""clocksync: two stochastically driven mechanical clocks sharing a cavity.

Simulation and analysis of cavity-mediated clock synchronization and its
thermodynamic cost: effective dissipative coupling, NESS covariances and
entropy production rates, Langevin trajectories, tick statistics, and
quench transients.
"""

__version__ = "0.1.0"

from .errors import (BranchSelectionError, ClockSyncError, ConfigError,
                     ConstantSeriesError, EnsembleError, FrameMismatchError,
                     LyapunovSolveError, PlateauError, StabilityError,
                     ThresholdError, TimestepError, TurningPointError)
from .model import (EffectiveCoupling, LinearDynamics, NormalModes,
                    PhysicalParams, cavity_susceptibility, effective_coupling,
                    full_drift_and_diffusion, normal_modes_closed_form,
                    normal_modes_numeric, paper_preset, reduced_drift_matrix)
from .steadystate import (CovarianceState, EntropyRates, analytic_sync_degree,
                          entropy_rates, occupations, solve_lyapunov,
                          steady_state)
from .trajectory import (Trajectory, displacements, propagate_exact,
                         run_ensemble, simulate)
from .metrics import (SyncMetrics, TickSeries, TransientResult, clock_stats,
                      extract_ticks, pearson_sync_degree, power_spectrum,
                      transient_correlation, transient_entropy_flux,
                      transient_time)
from .experiments import (SweepRow, find_threshold, find_turning_point,
                          sweep_coupling, transient_experiment)

__all__ = [
    "BranchSelectionError", "ClockSyncError", "ConfigError",
    "ConstantSeriesError", "CovarianceState", "EffectiveCoupling",
    "EnsembleError", "EntropyRates", "FrameMismatchError", "LinearDynamics",
    "LyapunovSolveError", "NormalModes", "PhysicalParams", "PlateauError",
    "StabilityError", "SweepRow", "SyncMetrics", "ThresholdError",
    "TickSeries", "TimestepError", "Trajectory", "TransientResult",
    "TurningPointError", "analytic_sync_degree", "cavity_susceptibility",
    "clock_stats", "displacements", "effective_coupling", "entropy_rates",
    "extract_ticks", "find_threshold", "find_turning_point",
    "full_drift_and_diffusion", "normal_modes_closed_form",
    "normal_modes_numeric", "occupations", "paper_preset",
    "pearson_sync_degree", "power_spectrum", "propagate_exact",
    "reduced_drift_matrix", "run_ensemble", "simulate", "solve_lyapunov",
    "steady_state", "sweep_coupling", "transient_correlation",
    "transient_entropy_flux", "transient_experiment", "transient_time",
]
