"""Odd-degree polynomial nonlinearities and their coercivity constants.

The nonlinearity is f(v) = a_1 v + ... + a_{2p-1} v^{2p-1} with positive
leading coefficient; its primitive F vanishes at zero.  The module computes
the growth/coercivity constants that control the step-size thresholds and
absorbing radii of the implicit Euler flow:

* ``concavity_bound``       smallest c >= 0 with F''(v) >= -c everywhere,
* ``assumption_constants``  c1, c2, c3 for the standard growth inequalities,
* ``step_bounds``           the k <= 8 eps / c^2 and k < 2 eps / c^2 ceilings.

Suprema of the auxiliary polynomials are located at exact critical points
(companion-matrix root finding) with a dense-grid fallback on a radius that
bounds all real roots.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PolynomialPotential",
    "AssumptionConstants",
    "StepBounds",
    "UnboundedConstantError",
    "eval_f",
    "eval_F",
    "concavity_bound",
    "assumption_constants",
    "step_bounds",
]


class UnboundedConstantError(ValueError):
    """A requested supremum is infinite for the given parameters."""


@dataclass(frozen=True)
class PolynomialPotential:
    """Polynomial f(v) = sum_{j=1}^{2p-1} a_j v^j with a_{2p-1} > 0.

    ``coeffs`` lists a_1 ... a_{2p-1}; the degree must be odd and at least
    three (p >= 2), and the leading coefficient positive so F grows at
    infinity.
    """

    coeffs: tuple[float, ...]

    def __post_init__(self):
        c = tuple(float(a) for a in self.coeffs)
        object.__setattr__(self, "coeffs", c)
        if len(c) < 3 or len(c) % 2 == 0:
            raise ValueError("need an odd degree 2p-1 with p >= 2, so at least 3 coefficients")
        if not c[-1] > 0:
            raise ValueError("leading coefficient must be positive")

    @property
    def p(self) -> int:
        """Degree parameter: f has degree 2p - 1."""
        return (len(self.coeffs) + 1) // 2

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    @property
    def primitive_coeffs(self) -> tuple[float, ...]:
        """Coefficients b_2 ... b_{2p} of F with j b_j = a_{j-1} and F(0) = 0."""
        return tuple(a / (j + 2) for j, a in enumerate(self.coeffs))

    def f(self, v):
        """Evaluate f by Horner recurrence (scalar or ndarray)."""
        acc = np.zeros_like(np.asarray(v, dtype=float)) if np.ndim(v) else 0.0
        for a in reversed(self.coeffs):
            acc = acc * v + a
        return acc * v

    def F(self, v):
        """Evaluate the primitive F of f with F(0) = 0."""
        acc = np.zeros_like(np.asarray(v, dtype=float)) if np.ndim(v) else 0.0
        for b in reversed(self.primitive_coeffs):
            acc = acc * v + b
        return acc * v * v

    def fprime(self, v):
        """Evaluate f' = F''."""
        acc = np.zeros_like(np.asarray(v, dtype=float)) if np.ndim(v) else 0.0
        for j, a in reversed(list(enumerate(self.coeffs, start=1))):
            acc = acc * v + j * a
        return acc

    def fprime_min(self) -> float:
        """Global minimum of f' over the reals."""
        return _poly_min(self._fprime_ascending())

    def _f_ascending(self) -> np.ndarray:
        # powers 0 .. 2p-1
        return np.concatenate(([0.0], np.asarray(self.coeffs)))

    def _F_ascending(self) -> np.ndarray:
        # powers 0 .. 2p
        return np.concatenate(([0.0, 0.0], np.asarray(self.primitive_coeffs)))

    def _fprime_ascending(self) -> np.ndarray:
        return np.asarray([j * a for j, a in enumerate(self.coeffs, start=1)])


@dataclass(frozen=True)
class AssumptionConstants:
    """Constants of the growth inequalities for a given (c0, eta) pair.

    On every real v the potential satisfies
        f(v) v >= p c0 v^{2p} - c1,
        |f(v)| <= eta c0 v^{2p} + c2,
        (1/2) c0 v^{2p} - c3 <= F(v) <= (3/2) c0 v^{2p} + c3,
        F''(v) >= -c.
    """

    c0: float
    c1: float
    c2: float
    c3: float
    c: float
    eta: float

    def __post_init__(self):
        if not self.c0 > 0:
            raise ValueError("c0 must be positive")
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.c < 0:
            raise ValueError("concavity bound must be nonnegative")


@dataclass(frozen=True)
class StepBounds:
    """Step-size ceilings: energy decay needs k <= k_energy, the chemical
    potential bound needs k < k_potential.  Both are +inf when F is convex."""

    k_energy: float
    k_potential: float

    @property
    def unconditional(self) -> bool:
        return math.isinf(self.k_energy)


def eval_f(P: PolynomialPotential, v):
    return P.f(v)


def eval_F(P: PolynomialPotential, v):
    return P.F(v)


def _trim(ascending: np.ndarray) -> np.ndarray:
    """Drop trailing (highest-power) zero coefficients."""
    a = np.asarray(ascending, dtype=float)
    nz = np.nonzero(a)[0]
    if nz.size == 0:
        return np.zeros(1)
    return a[: nz[-1] + 1]


def _extrema_radius(ascending: np.ndarray) -> float:
    """Radius containing all real roots (hence all extrema of the primitive):
    1 + 2 * sum|a_j| / |a_lead|."""
    a = _trim(ascending)
    lead = abs(a[-1])
    if lead == 0.0:
        return 1.0
    return 1.0 + 2.0 * float(np.sum(np.abs(a))) / lead

def _poly_eval(ascending: np.ndarray, v):
    acc = np.zeros_like(np.asarray(v, dtype=float)) if np.ndim(v) else 0.0
    for a in reversed(list(ascending)):
        acc = acc * v + a
    return acc


def _critical_values(ascending: np.ndarray) -> np.ndarray:
    """Values of the polynomial at its real critical points, plus a
    dense-grid sample as a safety net for root-finding misses."""
    a = _trim(ascending)
    deriv = _trim(np.asarray([j * c for j, c in enumerate(a)][1:] or [0.0]))
    vals = [float(_poly_eval(a, 0.0))]
    if deriv.size > 1:
        roots = np.roots(deriv[::-1])
        real = roots[np.abs(roots.imag) <= 1e-8 * (1.0 + np.abs(roots.real))].real
        if real.size:
            vals.extend(float(x) for x in _poly_eval(a, real))
    radius = max(_extrema_radius(a), _extrema_radius(deriv))
    grid = np.linspace(-radius, radius, 20001)
    vals.extend((float(np.min(_poly_eval(a, grid))), float(np.max(_poly_eval(a, grid)))))
    return np.asarray(vals)


def _poly_sup(ascending: np.ndarray, what: str) -> float:
    """Supremum over the reals; raises when the polynomial is unbounded above."""
    a = _trim(ascending)
    if a.size == 1:
        return float(a[0])
    degree = a.size - 1
    if degree % 2 == 1 or a[-1] > 0:
        raise UnboundedConstantError(
            f"unbounded supremum while computing {what}: "
            f"auxiliary polynomial of degree {degree} grows at infinity"
        )
    return float(np.max(_critical_values(a)))


def _poly_min(ascending: np.ndarray) -> float:
    a = _trim(ascending)
    if a.size == 1:
        return float(a[0])
    degree = a.size - 1
    if degree % 2 == 1 or a[-1] < 0:
        raise UnboundedConstantError("polynomial is unbounded below")
    return float(np.min(_critical_values(a)))


def concavity_bound(P: PolynomialPotential) -> float:
    """Smallest c >= 0 with F''(v) >= -c for all real v.

    F'' = f' has even degree 2p-2 and positive leading coefficient, so its
    minimum sits at a real critical point (a root of f'').
    """
    if not P.coeffs[-1] > 0:
        raise ValueError("concavity bound needs a positive leading coefficient")
    return max(0.0, -P.fprime_min())


def assumption_constants(P: PolynomialPotential, c0: float, eta: float) -> AssumptionConstants:
    """Tightest c1, c2, c3 for the growth inequalities at the given c0, eta.

    Raises :class:`UnboundedConstantError` when c0 (or eta) sits on the
    wrong side of the leading coefficient and a supremum is infinite:
    c1 needs p c0 < a_{2p-1}; c3 needs a_{2p-1}/(2p) to lie strictly
    between c0/2 and 3 c0/2; c2 needs eta c0 > 0.
    """
    if not c0 > 0:
        raise ValueError("c0 must be positive")
    if not eta > 0:
        raise ValueError("eta must be positive")
    twop = 2 * P.p

    # c1: sup of p c0 v^{2p} - v f(v)
    g1 = np.zeros(twop + 1)
    g1[twop] += P.p * c0
    for j, a in enumerate(P.coeffs, start=1):
        g1[j + 1] -= a
    c1 = max(0.0, _poly_sup(g1, "c1"))

    # c2: sup of |f(v)| - eta c0 v^{2p}, split over the two signs of f
    f_asc = P._f_ascending()
    branch = np.zeros(twop + 1)
    branch[: f_asc.size] = f_asc
    branch[twop] -= eta * c0
    sup_plus = _poly_sup(branch, "c2")
    branch = np.zeros(twop + 1)
    branch[: f_asc.size] = -f_asc
    branch[twop] -= eta * c0
    sup_minus = _poly_sup(branch, "c2")
    c2 = max(0.0, sup_plus, sup_minus)

    # c3: smallest constant making both sandwich bounds on F hold
    F_asc = P._F_ascending()
    lower = -F_asc.copy()
    lower[twop] += 0.5 * c0
    upper = F_asc.copy()
    upper[twop] -= 1.5 * c0
    c3 = max(0.0, _poly_sup(lower, "c3"), _poly_sup(upper, "c3"))

    return AssumptionConstants(c0=c0, c1=c1, c2=c2, c3=c3, c=concavity_bound(P), eta=eta)


def step_bounds(P: PolynomialPotential, epsilon: float) -> StepBounds:
    """Step-size ceilings 8 eps / c^2 (energy decay) and 2 eps / c^2
    (chemical-potential bound); unconditional when F is convex (c = 0)."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    c = concavity_bound(P)
    if c == 0.0:
        return StepBounds(math.inf, math.inf)
    return StepBounds(8.0 * epsilon / c ** 2, 2.0 * epsilon / c ** 2)
