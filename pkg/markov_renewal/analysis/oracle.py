"""Deterministic ground-truth solvers for the renewal equation.

- lattice_renewal / lattice_solve: exact recursions on the lattice
- grid_convolution_U / grid_convolution_F: non-lattice measures discretised
  onto a grid of step ``h`` (first-order accurate) and solved on the lattice
- extrapolate: Richardson combination of two grid solutions
"""

import logging
from math import ceil

import numpy as np
import scipy.linalg

from markov_renewal.analysis.measures import (
    density_mass,
    evaluate_characteristic,
    lattice_weight_array,
)
from markov_renewal.analysis.spectral import spectral_radius
from markov_renewal.exceptions import AssumptionError
from markov_renewal.models.measure import (
    Characteristic,
    LatticeCharacteristic,
    LatticeMeasureMatrix,
    MeasureMatrix,
)
from markov_renewal.models.results import GridSolution

logger = logging.getLogger(__name__)

# Atoms on a cell boundary stay in that cell despite rounding of a / h.
SNAP_SLACK = 1e-12


def _factor(mu0: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rho = spectral_radius(mu0)
    if rho >= 1.0:
        raise AssumptionError(f"rho(mu(0)) = {rho:.6g} >= 1", rho_at_zero=rho)
    lu, piv = scipy.linalg.lu_factor(np.eye(mu0.shape[0]) - mu0)
    return lu, piv


def _renewal_recursion(W: np.ndarray, N: int, rhs0: np.ndarray) -> np.ndarray:
    """Solve ``X(n) = sum_m W_m X(n - m) + 1{n=0} rhs0`` for ``n = 0..N``."""
    lu = _factor(W[0])
    X = np.zeros((N + 1, *rhs0.shape))
    X[0] = scipy.linalg.lu_solve(lu, rhs0)
    depth = W.shape[0] - 1
    for n in range(1, N + 1):
        m = min(n, depth)
        if m == 0:
            continue
        # sum_{k=1..m} W[k] @ X[n-k]
        rhs = np.einsum("kij,kj...->i...", W[1 : m + 1], X[n - np.arange(1, m + 1)])
        X[n] = scipy.linalg.lu_solve(lu, rhs)
    return X


def lattice_renewal(L: LatticeMeasureMatrix, N: int) -> np.ndarray:
    """Renewal density ``U({n})``, ``n = 0..N``, by the exact recursion.

    ``U({n}) = (I - mu({0}))^-1 (1{n=0} I + sum_{m=1}^n mu({m}) U({n-m}))``.

    Args:
        L: Lattice measure matrix.
        N: Horizon.

    Returns:
        Array of shape ``(N + 1, p, p)``.

    Raises:
        AssumptionError: If ``rho(mu({0})) >= 1``.
    """
    return _renewal_recursion(lattice_weight_array(L), N, np.eye(L.p))


def _characteristic_array(f: LatticeCharacteristic, N: int) -> np.ndarray:
    out = np.zeros((N + 1, f.p))
    for i, seq in enumerate(f.values):
        k = min(len(seq), N + 1)
        out[:k, i] = seq[:k]
    return out


def lattice_solve(L: LatticeMeasureMatrix, f: LatticeCharacteristic, N: int) -> np.ndarray:
    """Solution ``F(n)`` of ``F = f + mu * F`` on the lattice, shape ``(N + 1, p)``.

    Raises:
        AssumptionError: If ``rho(mu({0})) >= 1``.
    """
    W = lattice_weight_array(L)
    fa = _characteristic_array(f, N)
    lu = _factor(W[0])
    F = np.zeros((N + 1, L.p))
    depth = W.shape[0] - 1
    for n in range(N + 1):
        rhs = fa[n].copy()
        for m in range(1, min(n, depth) + 1):
            rhs += W[m] @ F[n - m]
        F[n] = scipy.linalg.lu_solve(lu, rhs)
    return F


def discretise(M: MeasureMatrix, T: float, h: float) -> np.ndarray:
    """Cell masses ``mu((k-1)h, kh]`` plus atoms snapped to right endpoints.

    Returns:
        Weight array of shape ``(K + 1, p, p)`` with ``K = ceil(T / h)``.
    """
    if h <= 0.0:
        raise ValueError("h must be positive")
    K = ceil(T / h - SNAP_SLACK)
    grid = h * np.arange(K + 1)
    W = np.zeros((K + 1, M.p, M.p))
    for i, row in enumerate(M.entries):
        for j, m in enumerate(row):
            if m.densities:
                cumulative = np.array([sum(density_mass(d, t) for d in m.densities) for t in grid])
                W[1:, i, j] += np.diff(cumulative)
            for a in m.atoms:
                cell = max(0, ceil(a.location / h - SNAP_SLACK))
                if cell <= K:
                    W[cell, i, j] += a.weight
    return W


def grid_convolution_U(M: MeasureMatrix, T: float, h: float) -> GridSolution:
    """Renewal measure ``U(kh)``, ``k = 0..T/h``, from the discretised measure.

    The step-function approximation carries a one-sided ``O(h)`` bias from
    snapping mass to right cell endpoints.

    Raises:
        AssumptionError: If ``rho(mu(0)) >= 1``.
    """
    W = discretise(M, T, h)
    K = W.shape[0] - 1
    density = _renewal_recursion(W, K, np.eye(M.p))
    logger.debug("grid renewal solved on %d cells (h=%g)", K, h)
    return GridSolution(h=h, times=h * np.arange(K + 1), values=np.cumsum(density, axis=0))


def grid_convolution_F(M: MeasureMatrix, f: Characteristic, T: float, h: float) -> GridSolution:
    """``F(kh) = sum_j U({jh}) f((k - j) h)`` on the grid.

    Raises:
        AssumptionError: If ``rho(mu(0)) >= 1``.
    """
    W = discretise(M, T, h)
    K = W.shape[0] - 1
    density = _renewal_recursion(W, K, np.eye(M.p))
    times = h * np.arange(K + 1)
    fv = np.array([evaluate_characteristic(f, t) for t in times])
    F = np.zeros((K + 1, M.p))
    for i in range(M.p):
        for ell in range(M.p):
            F[:, i] += np.convolve(density[:, i, ell], fv[:, ell])[: K + 1]
    return GridSolution(h=h, times=times, values=F)


def extrapolate(
    coarse: GridSolution, fine: GridSolution, t: float
) -> tuple[np.ndarray, np.ndarray]:
    """Richardson value ``2 F_{h/2}(t) - F_h(t)`` and the error estimate ``|F_h - F_{h/2}|``."""
    c, f = coarse.at(t), fine.at(t)
    return 2.0 * f - c, np.abs(c - f)
