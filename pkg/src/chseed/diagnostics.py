"""Stability diagnostics for implicit Euler Cahn-Hilliard trajectories.

Per-step scalar records (mass, free energy, Sobolev seminorms of the state
and the chemical potential, increment norms), monitors for the discrete
inequalities the scheme provably satisfies (energy decay, summed
dissipation, the mean-free H^-1 contraction recursion), the computable
absorbing-set radii, and a numeric checker for the variable-step uniform
Gronwall lemma.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .potential import PolynomialPotential, assumption_constants, concavity_bound
from .spectral import Field, Grid2D, apply_A_power, mean, norm_l2, poincare_gamma1, seminorm
from .stepper import StepOutcome

__all__ = [
    "DiagnosticsRecord",
    "TheoryBounds",
    "GronwallReport",
    "EnergyViolation",
    "energy",
    "chemical_potential",
    "make_record",
    "check_energy_decay",
    "check_summed_dissipation",
    "check_hminus1_recursion",
    "hminus1_recursion_violations",
    "theory_bounds",
    "uniform_gronwall_check",
]


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Scalar diagnostics of one accepted step (field order = CSV order)."""

    step: int
    t: float
    k_n: float
    mass: float
    energy: float
    h1: float
    h2: float
    h3: float
    omega_h1: float
    hm1: float
    du_l2: float
    du_hm1: float
    solver_iters: int
    residual: float

    def __post_init__(self):
        for name in ("t", "k_n", "mass", "energy", "h1", "h2", "h3",
                     "omega_h1", "hm1", "du_l2", "du_hm1", "residual"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"non-finite diagnostics entry {name}")


def energy(u: Field, epsilon: float, P: Optional[PolynomialPotential]) -> float:
    """Free energy (eps/2) |u|_1^2 + h^2 sum F(u_ij)."""
    grad_part = 0.5 * epsilon * seminorm(u, 1) ** 2
    bulk = u.grid.h ** 2 * float(np.sum(P.F(u.values))) if P is not None else 0.0
    return grad_part + bulk


def chemical_potential(u: Field, epsilon: float, P: Optional[PolynomialPotential]) -> Field:
    """Variational derivative of the free energy: eps A u + f(u)."""
    au = apply_A_power(u, 1.0)
    vals = epsilon * au.values + (P.f(u.values) if P is not None else 0.0)
    return Field(vals, u.grid)


def make_record(step: int, t: float, u_prev: Field, outcome: StepOutcome,
                epsilon: float, P: Optional[PolynomialPotential]) -> DiagnosticsRecord:
    u = outcome.u_next
    du = Field(u.values - u_prev.values, u.grid)
    return DiagnosticsRecord(
        step=step,
        t=t,
        k_n=outcome.k_used,
        mass=mean(u),
        energy=energy(u, epsilon, P),
        h1=seminorm(u, 1),
        h2=seminorm(u, 2),
        h3=seminorm(u, 3),
        omega_h1=seminorm(outcome.omega_next, 1),
        hm1=seminorm(u, -1),
        du_l2=norm_l2(du),
        du_hm1=seminorm(du, -1),
        solver_iters=outcome.iters,
        residual=outcome.final_residual,
    )


@dataclass(frozen=True)
class EnergyViolation:
    step: int
    increase: float
    allowed: float


def _decay_slack(tol: float, energy_prev: float) -> float:
    # the decay proof assumes exact solves; allow slack proportional to the
    # nonlinear solver tolerance
    return 10.0 * tol * (1.0 + abs(energy_prev))


def check_energy_decay(records: Sequence[DiagnosticsRecord], tol: float = 1e-10,
                       energy0: Optional[float] = None) -> list[EnergyViolation]:
    """Steps where the free energy increased beyond the solver-tolerance slack.

    ``energy0`` checks the transition from the initial state into the first
    record as well; an empty list means the trajectory decays throughout.
    """
    violations: list[EnergyViolation] = []
    prev = energy0
    for rec in records:
        if prev is not None:
            allowed = _decay_slack(tol, prev)
            if rec.energy > prev + allowed:
                violations.append(EnergyViolation(rec.step, rec.energy - prev, allowed))
        prev = rec.energy
    return violations


def check_summed_dissipation(records: Sequence[DiagnosticsRecord], c_k: float,
                             energy0: float, tol: float = 1e-10) -> bool:
    """Final-step dissipation budget:
    (1 - c_k) sum_j k_j |du^{j+1}/k_j|_{-1}^2 + E(u^{final}) <= E(u^0) + slack.

    Valid for c_k in (0, 1] when sup k <= 8 c_k eps / c^2; the time-derivative
    seminorm is reconstructed from the recorded |du|_{-1} as du_hm1 / k_j.
    """
    if not 0 < c_k <= 1:
        raise ValueError("c_k must lie in (0, 1]")
    if not records:
        return True
    dissipation = sum(r.du_hm1 ** 2 / r.k_n for r in records)
    slack = sum(_decay_slack(tol, r.energy) for r in records) + _decay_slack(tol, energy0)
    lhs = (1.0 - c_k) * dissipation + records[-1].energy
    return lhs <= energy0 + slack


def _recursion_holds(hm1_prev: float, hm1_next: float, k_n: float, epsilon: float,
                     gamma1: float, C1_alpha: float) -> bool:
    lhs = 0.5 * (hm1_next ** 2 - hm1_prev ** 2) + (k_n * epsilon / (2.0 * gamma1 ** 2)) * hm1_next ** 2
    rhs = C1_alpha * k_n
    return lhs <= rhs + 1e-9 * (1.0 + abs(lhs))


def check_hminus1_recursion(u_n: Field, u_next: Field, k_n: float, epsilon: float,
                            gamma1: float, C1_alpha: float) -> bool:
    """One-step mean-free H^-1 contraction inequality:
    (1/2)(|u_next_bar|_{-1}^2 - |u_n_bar|_{-1}^2)
        + (k eps / 2 gamma1^2) |u_next_bar|_{-1}^2 <= C1(alpha) k.
    """
    return _recursion_holds(seminorm(u_n, -1), seminorm(u_next, -1),
                            k_n, epsilon, gamma1, C1_alpha)


def hminus1_recursion_violations(records: Sequence[DiagnosticsRecord], epsilon: float,
                                 gamma1: float, C1_alpha: float,
                                 hm1_initial: Optional[float] = None) -> list[int]:
    """Steps of a recorded trajectory violating the H^-1 recursion."""
    bad: list[int] = []
    prev = hm1_initial
    for rec in records:
        if prev is not None and not _recursion_holds(prev, rec.hm1, rec.k_n, epsilon,
                                                     gamma1, C1_alpha):
            bad.append(rec.step)
        prev = rec.hm1
    return bad


@dataclass(frozen=True)
class TheoryBounds:
    """Computable absorbing-set quantities for the mean-free H^-1 norm.

    ``rho_0k`` is the absorbing radius at step ceiling k; ``rho_hat_0`` its
    step-independent version under the energy-decay step restriction;
    ``E_hat_0`` the uniform bound max(R, rho_hat_0); ``n0_time`` the time
    after which trajectories from |u0_bar|_{-1} <= R stay within
    ``rho_target``.
    """

    gamma1: float
    C1_alpha: float
    rho_0k: float
    rho_hat_0: float
    E_hat_0: float
    n0_time: float
    rho_target: float


def theory_bounds(P: PolynomialPotential, epsilon: float, alpha: float, k_sup: float,
                  grid: Grid2D, c0: float, eta: Optional[float] = None, R: float = 0.0,
                  rho_target: Optional[float] = None) -> TheoryBounds:
    """Evaluate the absorbing-radius formulas for the given potential and grid.

    ``alpha`` bounds the conserved mean, |m(u0)| <= alpha.  For alpha > 0 and
    ``eta`` unset, eta = (p - 3/2) / alpha; for alpha = 0 the eta-dependent
    term drops out entirely.  ``rho_target`` defaults to sqrt(2) * rho_0k,
    which turns the absorbing-time bound into
    (gamma1^2 + eps k)/eps * ln(R^2 / rho_0k^2).
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if not k_sup > 0 or not epsilon > 0:
        raise ValueError("epsilon and k_sup must be positive")
    c = concavity_bound(P)
    if c == 0.0:
        raise ValueError(
            "unconditional: concavity bound c = 0 makes the step restriction "
            "8 eps / c^2 infinite and rho_hat_0 undefined"
        )
    if eta is None:
        eta = (P.p - 1.5) / alpha if alpha > 0 else 1.0
    consts = assumption_constants(P, c0, eta)
    gamma1 = poincare_gamma1(grid)
    C1 = (consts.c1 + (consts.c2 * alpha if alpha > 0 else 0.0) + 2.0 * consts.c3) * grid.area
    rho_0k = math.sqrt(2.0 * C1 * (gamma1 ** 2 + epsilon * k_sup) / epsilon)
    rho_hat_0 = math.sqrt(2.0 * C1) * math.sqrt(gamma1 ** 2 / epsilon + 8.0 * epsilon / c ** 2)
    E_hat_0 = max(R, rho_hat_0)
    if rho_target is None:
        rho_target = math.sqrt(2.0) * rho_0k
    if rho_target <= rho_0k:
        raise ValueError("rho_target must exceed rho_0k")
    if R > 0 and R ** 2 > rho_target ** 2 - rho_0k ** 2:
        n0_time = (gamma1 ** 2 + epsilon * k_sup) / epsilon * (
            math.log(R ** 2) - math.log(rho_target ** 2 - rho_0k ** 2)
        )
    else:
        n0_time = 0.0
    return TheoryBounds(gamma1=gamma1, C1_alpha=C1, rho_0k=rho_0k, rho_hat_0=rho_hat_0,
                        E_hat_0=E_hat_0, n0_time=n0_time, rho_target=rho_target)


@dataclass(frozen=True)
class GronwallReport:
    """Outcome of the uniform Gronwall check; premise failures are reported
    separately from conclusion failures."""

    a1: float
    a2: float
    a3: float
    r_hat: float
    c_vartheta: float
    bound: float
    max_tail_xi: float
    premise_violations: tuple[str, ...]
    conclusion_violations: tuple[int, ...]

    @property
    def premise_ok(self) -> bool:
        return not self.premise_violations

    @property
    def conclusion_ok(self) -> bool:
        return not self.conclusion_violations

    @property
    def passed(self) -> bool:
        return self.premise_ok and self.conclusion_ok


def uniform_gronwall_check(k_seq, xi_seq, zeta_seq, eta_seq, n_star: int, N: int,
                           vartheta: float, c_vartheta: Optional[float] = None) -> GronwallReport:
    """Numerically verify the variable-step uniform Gronwall lemma.

    Sequences are indexed n = 0..M with times t^0 = 0, t^n = t^{n-1} + k_n.
    Hypotheses checked for n >= n_star: k eta^n <= vartheta in (0, 1) with
    k = sup k_n, and the recursion (1 - k_n eta^n) xi^n <= xi^{n-1} + k_n
    zeta^n.  The window quantities a_i are the largest sums
    sum_{n = n*}^{n*+N} k_n {eta, zeta, xi}^n over admissible n* >= n_star,
    and r_hat the smallest time span of N consecutive steps.  The conclusion
    xi^n <= (a2 + a3 / r_hat) exp(c_vartheta a1) is then checked for every
    n >= n_star + N.  c_vartheta defaults to -ln(1 - vartheta)/vartheta, the
    tightest constant with 1/(1-x) <= exp(c x) on (0, vartheta].
    """
    k = np.asarray(k_seq, dtype=float)
    xi = np.asarray(xi_seq, dtype=float)
    zeta = np.asarray(zeta_seq, dtype=float)
    eta = np.asarray(eta_seq, dtype=float)
    M = len(k) - 1
    if not (len(xi) == len(zeta) == len(eta) == M + 1):
        raise ValueError("sequences must share one length")
    if min(k.min(), xi.min(), zeta.min(), eta.min()) < 0:
        raise ValueError("sequences must be nonnegative")
    if not 0 < vartheta < 1:
        raise ValueError("vartheta must lie in (0, 1)")
    if not 0 <= n_star <= M - N or N < 1:
        raise ValueError("need 0 <= n_star and n_star + N <= M")
    if c_vartheta is None:
        c_vartheta = -math.log1p(-vartheta) / vartheta

    premise: list[str] = []
    k_sup = float(k[n_star:].max())
    tiny = 1e-12
    for n in range(n_star, M + 1):
        if k_sup * eta[n] > vartheta + tiny:
            premise.append(f"step_bound: k * eta^{n} = {k_sup * eta[n]:.6g} exceeds vartheta")
    for n in range(max(n_star, 1), M + 1):
        lhs = (1.0 - k[n] * eta[n]) * xi[n]
        rhs = xi[n - 1] + k[n] * zeta[n]
        if lhs > rhs + tiny * (1.0 + abs(rhs)):
            premise.append(f"recursion: fails at n = {n} ({lhs:.6g} > {rhs:.6g})")

    kx = k * xi
    kz = k * zeta
    ke = k * eta
    a1 = a2 = a3 = 0.0
    for start in range(n_star, M - N + 1):
        sl = slice(start, start + N + 1)
        a1 = max(a1, float(ke[sl].sum()))
        a2 = max(a2, float(kz[sl].sum()))
        a3 = max(a3, float(kx[sl].sum()))
    r_hat = math.inf
    for start in range(n_star, M - N + 2):
        r_hat = min(r_hat, float(k[start:start + N].sum()))
    if not r_hat > 0:
        raise ValueError("window time span r_hat must be positive")

    bound = (a2 + a3 / r_hat) * math.exp(c_vartheta * a1)
    tail = xi[n_star + N:]
    conclusion = tuple(
        int(n) for n in range(n_star + N, M + 1)
        if xi[n] > bound * (1.0 + 1e-9) + tiny
    )
    return GronwallReport(
        a1=a1, a2=a2, a3=a3, r_hat=r_hat, c_vartheta=float(c_vartheta), bound=float(bound),
        max_tail_xi=float(tail.max()) if tail.size else 0.0,
        premise_violations=tuple(premise),
        conclusion_violations=conclusion,
    )
