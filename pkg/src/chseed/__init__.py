"""Implicit Euler / Fourier collocation solver for the Cahn-Hilliard equation
with instrumentation for its discrete long-time stability properties."""

from .checkpoint import BadCheckpoint, read_checkpoint, write_checkpoint
from .config import ConfigError, RunConfig, load_config, make_run_config
from .diagnostics import (DiagnosticsRecord, GronwallReport, TheoryBounds,
                          check_energy_decay, check_hminus1_recursion,
                          check_summed_dissipation, chemical_potential, energy,
                          hminus1_recursion_violations, make_record, theory_bounds,
                          uniform_gronwall_check)
from .potential import (AssumptionConstants, PolynomialPotential, StepBounds,
                        UnboundedConstantError, assumption_constants, concavity_bound,
                        eval_F, eval_f, step_bounds)
from .run import CSV_COLUMNS, SolverAbort, initial_condition, iterate_solution, run
from .spectral import (Field, Grid2D, SpectralField, apply_A_power, backward, forward,
                       grad_laplacian, gradient, inner_h, laplacian, mean, norm_l2,
                       poincare_gamma1, remove_mean, seminorm)
from .stepper import (LinearSolveFailure, NonConvergence, ScheduleReport, SolverConfig,
                      StepOutcome, StepSchedule, fixed_point_solve, newton_solve, step,
                      validate_schedule)

__version__ = "0.1.0"
