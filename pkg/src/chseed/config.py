"""Run configuration: defaults, flat key-value config files, overrides.

Config files are a flat TOML-compatible subset: one ``key = value`` pair
per line, ``#`` comments, dotted keys, and values that are numbers, booleans,
double-quoted strings, or ``[...]`` lists of numbers.  Every key has a
default reproducing the reference experiment (cubic double well, eps = 0.1,
80 x 80 grid on (0, 2 pi)^2, constant k = 0.1 up to T = 100, preset III).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .stepper import SolverConfig, StepSchedule

__all__ = ["ConfigError", "RunConfig", "DEFAULTS", "load_config", "parse_value",
           "apply_overrides", "make_run_config"]


class ConfigError(ValueError):
    """Malformed configuration file, key, or value."""


DEFAULTS: dict[str, object] = {
    "domain.length": 2.0 * math.pi,
    "grid.n": 80,
    "model.epsilon": 0.1,
    "potential.coeffs": [-1.0, 0.0, 1.0],
    "schedule.kind": "constant",
    "schedule.k": 0.1,
    "schedule.k_lo": 0.05,
    "schedule.k_hi": 0.15,
    "schedule.seed": 0,
    "schedule.values": [],
    "run.t_end": 100.0,
    "ic.preset": "III",
    "ic.center": "origin",
    "solver.mode": "fixed_point",
    "solver.tol": 1e-10,
    "solver.max_iter": 200,
    "solver.linear_tol": 1e-8,
    "solver.linear_max_iter": 4000,
    "solver.predictor": False,
    "solver.dealias": False,
    "output.csv": "diagnostics.csv",
    "output.dir": "out",
    "output.snapshot_every": 100,
    "bounds.c0": None,
    "bounds.eta": None,
    "bounds.alpha": None,
    "bounds.R": None,
    "bounds.rho_target": None,
}


def parse_value(text: str):
    """Parse one scalar or list literal of the config subset."""
    s = text.strip()
    if not s:
        raise ConfigError("empty value")
    if s.startswith("[") and s.endswith("]"):
        inner = s[1:-1].strip()
        if not inner:
            return []
        return [parse_value(item) for item in inner.split(",")]
    if s.startswith('"') and s.endswith('"') and len(s) >= 2:
        return s[1:-1]
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        pass
    # bare word, accepted as a string for convenience
    return s


def _strip_comment(line: str) -> str:
    out = []
    quoted = False
    for ch in line:
        if ch == '"':
            quoted = not quoted
        if ch == "#" and not quoted:
            break
        out.append(ch)
    return "".join(out)


def load_config(path) -> dict[str, object]:
    """Read a config file into a flat key-value dict, validating keys."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    data: dict[str, object] = {}
    for lineno, raw in enumerate(p.read_text().splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{p}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in DEFAULTS:
            raise ConfigError(f"{p}:{lineno}: unknown key {key!r}")
        try:
            data[key] = parse_value(value)
        except ConfigError as exc:
            raise ConfigError(f"{p}:{lineno}: {exc}") from None
    return data


def apply_overrides(data: dict[str, object], overrides) -> dict[str, object]:
    out = dict(data)
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like key=value")
        key, _, value = item.partition("=")
        key = key.strip()
        if key not in DEFAULTS:
            raise ConfigError(f"unknown override key {key!r}")
        out[key] = parse_value(value)
    return out


@dataclass
class RunConfig:
    """Fully resolved configuration of one simulation."""

    length: float = DEFAULTS["domain.length"]
    n: int = DEFAULTS["grid.n"]
    epsilon: float = DEFAULTS["model.epsilon"]
    coeffs: tuple[float, ...] = (-1.0, 0.0, 1.0)
    schedule_kind: str = "constant"
    k: float = 0.1
    k_lo: float = 0.05
    k_hi: float = 0.15
    seed: int = 0
    schedule_values: tuple[float, ...] = ()
    t_end: float = 100.0
    ic: str = "III"
    ic_center: str = "origin"
    solver: SolverConfig = field(default_factory=SolverConfig)
    out_csv: str = "diagnostics.csv"
    out_dir: str = "out"
    snapshot_every: int = 100
    c0: Optional[float] = None
    eta: Optional[float] = None
    alpha: Optional[float] = None
    R: Optional[float] = None
    rho_target: Optional[float] = None

    def __post_init__(self):
        if not self.length > 0 or not self.epsilon > 0 or self.n < 8:
            raise ConfigError("domain length, epsilon must be positive and grid.n >= 8")
        if self.t_end < 0:
            raise ConfigError("run.t_end must be nonnegative")
        if self.snapshot_every < 1:
            raise ConfigError("output.snapshot_every must be at least 1")
        if self.ic_center not in ("origin", "center"):
            raise ConfigError("ic.center must be 'origin' or 'center'")

    def schedule(self) -> StepSchedule:
        try:
            if self.schedule_kind == "constant":
                return StepSchedule.constant(self.k, self.t_end)
            if self.schedule_kind == "list":
                return StepSchedule.from_list(self.schedule_values, self.t_end)
            if self.schedule_kind == "random_uniform":
                return StepSchedule.random_uniform(self.k_lo, self.k_hi, self.t_end, self.seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        raise ConfigError(f"unknown schedule kind {self.schedule_kind!r}")


def make_run_config(data: dict[str, object]) -> RunConfig:
    """Build a validated RunConfig from a flat key-value dict."""
    merged = dict(DEFAULTS)
    merged.update(data)
    try:
        solver = SolverConfig(
            mode=str(merged["solver.mode"]),
            tol=float(merged["solver.tol"]),
            max_iter=int(merged["solver.max_iter"]),
            linear_tol=float(merged["solver.linear_tol"]),
            linear_max_iter=int(merged["solver.linear_max_iter"]),
            predictor=bool(merged["solver.predictor"]),
            dealias=bool(merged["solver.dealias"]),
        )
        coeffs = tuple(float(c) for c in merged["potential.coeffs"])
        optional = {
            key: (None if merged[f"bounds.{key}"] is None else float(merged[f"bounds.{key}"]))
            for key in ("c0", "eta", "alpha", "R", "rho_target")
        }
        return RunConfig(
            length=float(merged["domain.length"]),
            n=int(merged["grid.n"]),
            epsilon=float(merged["model.epsilon"]),
            coeffs=coeffs,
            schedule_kind=str(merged["schedule.kind"]),
            k=float(merged["schedule.k"]),
            k_lo=float(merged["schedule.k_lo"]),
            k_hi=float(merged["schedule.k_hi"]),
            seed=int(merged["schedule.seed"]),
            schedule_values=tuple(float(v) for v in merged["schedule.values"]),
            t_end=float(merged["run.t_end"]),
            ic=str(merged["ic.preset"]),
            ic_center=str(merged["ic.center"]),
            solver=solver,
            out_csv=str(merged["output.csv"]),
            out_dir=str(merged["output.dir"]),
            snapshot_every=int(merged["output.snapshot_every"]),
            **optional,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
