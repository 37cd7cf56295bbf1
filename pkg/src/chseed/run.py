"""Initial conditions, the stepping loop with its retry policy, and run I/O.

``run`` executes a :class:`~chseed.config.RunConfig`: it steps the schedule,
writes one diagnostics row per accepted step to CSV, snapshots the state
every ``snapshot_every`` steps, and always checkpoints the final state on
success.  A step that fails to converge is retried at k/2, k/4, k/8, k/16
before the run aborts.
"""
from __future__ import annotations

import csv
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from .checkpoint import read_checkpoint, write_checkpoint
from .config import ConfigError, RunConfig
from .diagnostics import DiagnosticsRecord, make_record
from .potential import PolynomialPotential
from .spectral import Field, Grid2D
from .stepper import (LinearSolveFailure, NonConvergence, SolverConfig, StepOutcome,
                      StepSchedule, step)

__all__ = ["CSV_COLUMNS", "SolverAbort", "initial_condition", "iterate_solution",
           "write_csv_row", "run"]

CSV_COLUMNS = ("step", "t", "k_n", "mass", "energy", "h1", "h2", "h3",
               "omega_h1", "hm1", "du_l2", "du_hm1", "solver_iters", "residual")

_RETRY_DIVISORS = (1, 2, 4, 8, 16)


class SolverAbort(RuntimeError):
    """A step failed at the nominal size and every retry."""

    def __init__(self, step_index: int, k_nominal: float, cause: Exception):
        self.step_index = step_index
        self.k_nominal = k_nominal
        self.cause = cause
        super().__init__(
            f"step {step_index} failed at k = {k_nominal} and all retries down to k/16: {cause}"
        )


def initial_condition(spec: str, grid: Grid2D, epsilon: float = 0.1,
                      center: str = "origin") -> Field:
    """Construct a preset initial state or load one from a checkpoint file.

    Presets: ``I`` is +1 inside the unit disk around the domain midpoint and
    -1 outside; ``II`` is the tanh profile of a circular interface of radius
    0.17 (anchored at the origin corner by default, at the domain midpoint
    with ``center='center'``); ``III`` is sin(4x) cos(3y).  Any other spec is
    treated as a checkpoint path.
    """
    X, Y = grid.mesh
    if spec == "I":
        inside = (X - np.pi) ** 2 + (Y - np.pi) ** 2 < 1.0
        return Field(np.where(inside, 1.0, -1.0), grid)
    if spec == "II":
        if center == "center":
            r = np.sqrt((X - np.pi) ** 2 + (Y - np.pi) ** 2)
        else:
            r = np.sqrt(X ** 2 + Y ** 2)
        return Field(np.tanh((r - 0.17) / (math.sqrt(2.0) * epsilon)), grid)
    if spec == "III":
        return Field(np.sin(4.0 * X) * np.cos(3.0 * Y), grid)
    path = Path(spec)
    if not path.is_file():
        raise ConfigError(f"initial condition {spec!r} is neither a preset nor a file")
    values, _ = read_checkpoint(path)
    if values.shape != (grid.n, grid.n):
        raise ConfigError(
            f"checkpoint {spec!r} holds a {values.shape} field, grid wants {(grid.n, grid.n)}"
        )
    return Field(values, grid)


@dataclass(frozen=True)
class _AcceptedStep:
    index: int
    t: float
    u_prev: Field
    outcome: StepOutcome


def iterate_solution(u0: Field, schedule: StepSchedule, epsilon: float,
                     P: Optional[PolynomialPotential], cfg: SolverConfig) -> Iterator[_AcceptedStep]:
    """Yield accepted steps until the horizon, halving the step on failure.

    Raises :class:`SolverAbort` when a step still fails at k/16.  Solver
    failures of either kind (iteration budget, inner linear solve) trigger
    the retry ladder.
    """
    u = u0
    u_before: Optional[Field] = None
    t = 0.0
    index = 0
    eps_t = 1e-9 * max(1.0, schedule.t_end)
    for k_nominal in schedule.step_sizes():
        if t >= schedule.t_end - eps_t:
            return
        guess = None
        if cfg.predictor and u_before is not None:
            guess = Field(2.0 * u.values - u_before.values, u.grid)
        outcome = None
        failure: Exception | None = None
        for div in _RETRY_DIVISORS:
            try:
                outcome = step(u, k_nominal / div, epsilon, P, cfg, initial_guess=guess)
                break
            except (NonConvergence, LinearSolveFailure) as exc:
                failure = exc
        if outcome is None:
            raise SolverAbort(index + 1, k_nominal, failure)
        index += 1
        t += outcome.k_used
        accepted = _AcceptedStep(index=index, t=t, u_prev=u, outcome=outcome)
        u_before = u
        u = outcome.u_next
        yield accepted


def _format(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_csv_row(writer, record: DiagnosticsRecord) -> None:
    writer.writerow([_format(getattr(record, col)) for col in CSV_COLUMNS])


def run(config: RunConfig) -> int:
    """Execute a configured simulation; returns a process exit status.

    0 on success, 2 when the solver aborts (the CSV keeps all accepted
    steps).  Configuration problems raise :class:`ConfigError` so the CLI
    can map them to status 3.
    """
    grid = Grid2D(config.n, config.length)
    P = PolynomialPotential(config.coeffs) if any(config.coeffs) else None
    schedule = config.schedule()
    u0 = initial_condition(config.ic, grid, epsilon=config.epsilon, center=config.ic_center)

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = Path(config.out_csv)
    if csv_path.parent != Path("."):
        csv_path.parent.mkdir(parents=True, exist_ok=True)

    write_checkpoint(out_dir / "state_000000.chk", u0.values, 0.0)
    status = 0
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        final_t = 0.0
        final_u = u0
        try:
            for accepted in iterate_solution(u0, schedule, config.epsilon, P, config.solver):
                record = make_record(accepted.index, accepted.t, accepted.u_prev,
                                     accepted.outcome, config.epsilon, P)
                write_csv_row(writer, record)
                final_t = accepted.t
                final_u = accepted.outcome.u_next
                if accepted.index % config.snapshot_every == 0:
                    write_checkpoint(out_dir / f"state_{accepted.index:06d}.chk",
                                     final_u.values, final_t)
        except SolverAbort as exc:
            print(f"error: {exc}", file=sys.stderr)
            status = 2
    if status == 0:
        write_checkpoint(out_dir / "state_final.chk", final_u.values, final_t)
    return status
