"""Dense brute-force references on tiny grids, used by the test suite.

The negative Laplacian is assembled as an explicit matrix by pushing basis
vectors through the spectral operator; the implicit Euler system is then
solved with a generic dense Newton method and norms recomputed from an
eigendecomposition.  A size guard keeps accidental large builds out.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .potential import PolynomialPotential
from .spectral import Field, Grid2D

__all__ = [
    "DenseOperator",
    "OracleSizeError",
    "dense_A",
    "dense_G",
    "dense_implicit_step",
    "dense_seminorm",
]

_MAX_N = 16


class OracleSizeError(ValueError):
    """Grid too large for dense assembly."""


@dataclass(frozen=True, eq=False)
class DenseOperator:
    """Explicit matrix form of the negative Laplacian on an n^2 grid."""

    matrix: np.ndarray
    grid: Grid2D


def _guard(grid: Grid2D):
    if grid.n > _MAX_N:
        raise OracleSizeError(f"dense oracle limited to n <= {_MAX_N}, got n = {grid.n}")


@lru_cache(maxsize=8)
def _assemble(n: int, length: float) -> np.ndarray:
    grid = Grid2D(n, length)
    k2 = grid.k2
    A = np.empty((n * n, n * n))
    basis = np.zeros((n, n))
    for j in range(n * n):
        basis.flat[j] = 1.0
        A[:, j] = np.real(np.fft.ifft2(k2 * np.fft.fft2(basis))).ravel()
        basis.flat[j] = 0.0
    return A


def dense_A(grid: Grid2D) -> DenseOperator:
    _guard(grid)
    return DenseOperator(_assemble(grid.n, grid.length), grid)


def dense_G(op: DenseOperator) -> np.ndarray:
    """Pseudo-inverse of A on the mean-free subspace."""
    lam, V = np.linalg.eigh(0.5 * (op.matrix + op.matrix.T))
    inv = np.where(lam > 1e-10, 1.0 / np.where(lam > 1e-10, lam, 1.0), 0.0)
    return (V * inv) @ V.T


@lru_cache(maxsize=8)
def _eigendecomposition(n: int, length: float):
    A = _assemble(n, length)
    return np.linalg.eigh(0.5 * (A + A.T))


def dense_seminorm(grid: Grid2D, u: np.ndarray, s: int) -> float:
    """|u|_s recomputed from the eigendecomposition of the dense A."""
    _guard(grid)
    if s not in (-1, 1, 2, 3):
        raise ValueError(f"unsupported seminorm order {s!r}")
    lam, V = _eigendecomposition(grid.n, grid.length)
    coeff = V.T @ np.asarray(u, dtype=float).ravel()
    keep = lam > 1e-10
    total = float(np.sum(lam[keep] ** s * coeff[keep] ** 2))
    return float(np.sqrt(grid.h ** 2 * total))


def dense_implicit_step(u_n, k: float, epsilon: float, P: PolynomialPotential | None,
                        grid: Grid2D | None = None, tol: float = 1e-13) -> np.ndarray:
    """Solve (I + k eps A^2) u + k A f(u) = u_n by dense Newton.

    Accepts a Field or a flat/2-D array (then ``grid`` is required); returns
    the solution as a flat vector.  Newton with the explicit Jacobian
    I + k eps A^2 + k A diag(f'(u)) iterates until the h-norm residual falls
    below tol * max(1, ||u_n||_h); fails after 50 iterations.
    """
    if isinstance(u_n, Field):
        grid = u_n.grid
        b = u_n.values.ravel().copy()
    else:
        if grid is None:
            raise ValueError("grid required when passing a bare array")
        b = np.asarray(u_n, dtype=float).ravel().copy()
    _guard(grid)
    A = _assemble(grid.n, grid.length)
    M = np.eye(A.shape[0]) + k * epsilon * (A @ A)
    u = b.copy()
    target = tol * max(1.0, grid.h * float(np.linalg.norm(b)))
    for _ in range(50):
        f_u = P.f(u) if P is not None else np.zeros_like(u)
        resid = M @ u + k * (A @ f_u) - b
        if grid.h * float(np.linalg.norm(resid)) <= target:
            return u
        fp = P.fprime(u) if P is not None else np.zeros_like(u)
        J = M + k * (A * fp[np.newaxis, :])
        u = u - np.linalg.solve(J, resid)
    raise RuntimeError("dense Newton failed after 50 iterations")
