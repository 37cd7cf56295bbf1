"""Command-line interface.

Subcommands::

    chseed run       --config FILE [--override key=value ...]
    chseed bounds    --config FILE [--override key=value ...]
    chseed check     --csv FILE [--config FILE] [--override key=value ...]
    chseed constants --coeffs a1 a2 ... --c0 C0 [--eta ETA] [--epsilon EPS]

Exit codes: 0 success, 2 solver abort, 3 configuration error, 4 monitor
violation found by ``check``.
"""
from __future__ import annotations

import argparse
import csv as csv_mod
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, apply_overrides, load_config, make_run_config
from .diagnostics import (check_energy_decay, check_summed_dissipation, energy,
                          hminus1_recursion_violations, theory_bounds)
from .potential import (PolynomialPotential, UnboundedConstantError,
                        assumption_constants, concavity_bound, step_bounds)
from .run import CSV_COLUMNS, initial_condition, run
from .spectral import Grid2D, mean, poincare_gamma1, seminorm
from .stepper import validate_schedule

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chseed",
                                     description="implicit Euler Cahn-Hilliard solver")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a configured simulation")
    run_p.add_argument("--config", required=True)
    run_p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")

    bounds_p = sub.add_parser("bounds", help="print the computable stability bounds")
    bounds_p.add_argument("--config", required=True)
    bounds_p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")

    check_p = sub.add_parser("check", help="replay inequality monitors over a finished run")
    check_p.add_argument("--csv", required=True)
    check_p.add_argument("--config")
    check_p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")

    const_p = sub.add_parser("constants", help="print growth constants of a potential")
    const_p.add_argument("--coeffs", required=True, nargs="+", type=float)
    const_p.add_argument("--c0", required=True, type=float)
    const_p.add_argument("--eta", type=float, default=1.0)
    const_p.add_argument("--epsilon", type=float, default=0.1)
    return parser


def _load(args):
    data = load_config(args.config) if args.config else {}
    data = apply_overrides(data, getattr(args, "override", []))
    return make_run_config(data)


def _default_c0(P: PolynomialPotential) -> float:
    # midpoint choice keeping every supremum finite: c0 = a_{2p-1} / (2p)
    return P.coeffs[-1] / (2 * P.p)


def _cmd_run(args) -> int:
    return run(_load(args))


def _cmd_bounds(args) -> int:
    config = _load(args)
    grid = Grid2D(config.n, config.length)
    if not any(config.coeffs):
        print("linear flow (f = 0): every step size is admissible, no radii to report")
        return 0
    P = PolynomialPotential(config.coeffs)
    u0 = initial_condition(config.ic, grid, epsilon=config.epsilon, center=config.ic_center)
    alpha = config.alpha if config.alpha is not None else abs(mean(u0))
    R = config.R if config.R is not None else seminorm(u0, -1)
    c0 = config.c0 if config.c0 is not None else _default_c0(P)
    schedule = config.schedule()
    report = validate_schedule(schedule, P, config.epsilon)
    print(report.summary())
    try:
        tb = theory_bounds(P, config.epsilon, alpha, schedule.k_sup(), grid,
                           c0=c0, eta=config.eta, R=R, rho_target=config.rho_target)
    except ValueError as exc:
        print(f"bounds unavailable: {exc}")
        return 0
    consts = assumption_constants(P, c0, config.eta if config.eta is not None
                                  else ((P.p - 1.5) / alpha if alpha > 0 else 1.0))
    print(f"c0 = {c0:.6g}  c1 = {consts.c1:.6g}  c2 = {consts.c2:.6g}  "
          f"c3 = {consts.c3:.6g}  c = {consts.c:.6g}")
    print(f"alpha = {alpha:.6g}  R = |u0_bar|_-1 = {R:.6g}")
    print(f"gamma1      = {tb.gamma1:.9g}")
    print(f"C1(alpha)   = {tb.C1_alpha:.9g}")
    print(f"rho_0k      = {tb.rho_0k:.9g}")
    print(f"rho_hat_0   = {tb.rho_hat_0:.9g}")
    print(f"E_hat_0     = {tb.E_hat_0:.9g}")
    print(f"absorbing time bound (target rho = {tb.rho_target:.9g}) = {tb.n0_time:.9g}")
    return 0


def _read_csv(path) -> dict[str, np.ndarray]:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"csv file not found: {p}")
    with open(p, newline="") as fh:
        reader = csv_mod.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_COLUMNS:
            raise ConfigError(f"{p}: unexpected CSV schema {header!r}")
        rows = [[float(x) for x in row] for row in reader]
    table = np.asarray(rows, dtype=float) if rows else np.empty((0, len(CSV_COLUMNS)))
    return {col: table[:, i] for i, col in enumerate(CSV_COLUMNS)}


def _cmd_check(args) -> int:
    config = _load(args)
    cols = _read_csv(args.csv)
    nrows = len(cols["step"])
    if nrows == 0:
        print("empty run: nothing to check")
        return 0
    problems: list[str] = []
    tol = config.solver.tol

    drift = np.abs(cols["mass"] - cols["mass"][0])
    if drift.max() > 1e-11:
        problems.append(f"mass drifts by {drift.max():.3e} (> 1e-11)")

    grid = Grid2D(config.n, config.length)
    gamma1 = poincare_gamma1(grid)
    margin = gamma1 * cols["h1"] * (1.0 + 1e-9) + 1e-10 - cols["hm1"]
    if margin.min() < 0:
        problems.append("mean-free H^-1 norm exceeds gamma1 * |u|_1 somewhere")

    P = PolynomialPotential(config.coeffs) if any(config.coeffs) else None
    u0 = initial_condition(config.ic, grid, epsilon=config.epsilon, center=config.ic_center)
    e0 = energy(u0, config.epsilon, P)
    hm1_0 = seminorm(u0, -1)

    class _Row:
        __slots__ = ("step", "t", "k_n", "mass", "energy", "h1", "h2", "h3", "omega_h1",
                     "hm1", "du_l2", "du_hm1", "solver_iters", "residual")

        def __init__(self, i):
            for col in CSV_COLUMNS:
                setattr(self, col, cols[col][i])

    records = [_Row(i) for i in range(nrows)]
    decay = check_energy_decay(records, tol=tol, energy0=e0)
    if decay:
        steps = ", ".join(str(v.step) for v in decay[:5])
        problems.append(f"energy increases at {len(decay)} step(s) (first: {steps})")

    if P is not None:
        c = concavity_bound(P)
        k_sup = float(cols["k_n"].max())
        if c == 0.0 or k_sup <= 8.0 * config.epsilon / c ** 2:
            c_k = 1.0 if c == 0.0 else min(1.0, c ** 2 * k_sup / (8.0 * config.epsilon))
            if c_k > 0 and not check_summed_dissipation(records, c_k, e0, tol=tol):
                problems.append("summed dissipation budget exceeded")
        c0 = config.c0 if config.c0 is not None else _default_c0(P)
        alpha = config.alpha if config.alpha is not None else abs(mean(u0))
        try:
            tb = theory_bounds(P, config.epsilon, alpha, k_sup, grid, c0=c0,
                               eta=config.eta, R=hm1_0)
            bad = hminus1_recursion_violations(records, config.epsilon, tb.gamma1,
                                               tb.C1_alpha, hm1_initial=hm1_0)
            if bad:
                problems.append(f"H^-1 recursion fails at {len(bad)} step(s) (first: {bad[:5]})")
        except (ValueError, UnboundedConstantError):
            pass  # concavity or growth constants unavailable; skip the recursion monitor

    if problems:
        for p in problems:
            print(f"violation: {p}")
        return 4
    print(f"all monitors passed over {nrows} steps")
    return 0


def _cmd_constants(args) -> int:
    P = PolynomialPotential(args.coeffs)
    consts = assumption_constants(P, args.c0, args.eta)
    print(f"p  = {P.p}")
    print(f"c  = {consts.c:.17g}")
    print(f"c0 = {consts.c0:.17g}")
    print(f"c1 = {consts.c1:.17g}")
    print(f"c2 = {consts.c2:.17g} (eta = {consts.eta:.17g})")
    print(f"c3 = {consts.c3:.17g}")
    b = step_bounds(P, args.epsilon)
    if b.unconditional:
        print(f"step ceilings at eps = {args.epsilon}: unconditional (c = 0)")
    else:
        print(f"k_energy    = {b.k_energy:.17g}")
        print(f"k_potential = {b.k_potential:.17g}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "bounds": _cmd_bounds,
                "check": _cmd_check, "constants": _cmd_constants}
    try:
        return handlers[args.command](args)
    except (ConfigError, UnboundedConstantError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
