"""Exact evaluation of matrix transforms.

- laplace_matrix: ``L mu(z)`` for the atom + exponential-polynomial family
- laplace_derivative: closed-form ``d/dz L mu(z)``
- generating_matrix: ``G mu(z) = sum_n mu({n}) z^n`` for lattice matrices
- domain_abscissa: the infimum of ``Re z`` where ``L mu`` is finite

Both transforms are compiled once per (hashable) model into a vectorised
kernel. The kernels share the determinant, adjugate and resolvent helpers
used by the root, Laurent and condition modules.
"""

import logging
from functools import lru_cache
from math import factorial

import numpy as np

from markov_renewal.analysis.measures import lattice_weight_array
from markov_renewal.exceptions import DomainError, PoleError
from markov_renewal.models.measure import LatticeMeasureMatrix, MeasureMatrix
from markov_renewal.models.results import DomainAbscissa, TransformValue

logger = logging.getLogger(__name__)


def _as_points(z: complex | np.ndarray) -> np.ndarray:
    return np.atleast_1d(np.asarray(z, dtype=complex))


def _det(A: np.ndarray) -> np.ndarray:
    """Batched determinant; cofactor expansion for p <= 3."""
    p = A.shape[-1]
    if p == 1:
        return A[..., 0, 0]
    if p == 2:  # noqa: PLR2004
        return A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0]
    if p == 3:  # noqa: PLR2004
        return (
            A[..., 0, 0] * (A[..., 1, 1] * A[..., 2, 2] - A[..., 1, 2] * A[..., 2, 1])
            - A[..., 0, 1] * (A[..., 1, 0] * A[..., 2, 2] - A[..., 1, 2] * A[..., 2, 0])
            + A[..., 0, 2] * (A[..., 1, 0] * A[..., 2, 1] - A[..., 1, 1] * A[..., 2, 0])
        )
    return np.linalg.det(A)


def _adjugate(A: np.ndarray) -> np.ndarray:
    """Batched adjugate; exact cofactors for p <= 3, ``det * inv`` otherwise."""
    p = A.shape[-1]
    if p == 1:
        return np.ones_like(A)
    if p == 2:  # noqa: PLR2004
        adj = np.empty_like(A)
        adj[..., 0, 0] = A[..., 1, 1]
        adj[..., 1, 1] = A[..., 0, 0]
        adj[..., 0, 1] = -A[..., 0, 1]
        adj[..., 1, 0] = -A[..., 1, 0]
        return adj
    if p == 3:  # noqa: PLR2004
        adj = np.empty_like(A)
        for i in range(3):
            for j in range(3):
                rows = [r for r in range(3) if r != j]
                cols = [c for c in range(3) if c != i]
                minor = A[..., rows, :][..., :, cols]
                adj[..., i, j] = (-1) ** (i + j) * _det(minor)
        return adj
    return _det(A)[..., None, None] * np.linalg.inv(A)


class _MatrixFunction:
    """Shared linear-algebra layer over a matrix-valued analytic function ``K(z)``.

    Subclasses implement ``values`` and ``derivatives`` for point arrays.
    """

    p: int

    def values(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def derivatives(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def identity_minus(self, z: complex | np.ndarray) -> np.ndarray:
        """``I - K(z)`` with shape ``(n, p, p)``."""
        return np.eye(self.p) - self.values(_as_points(z))

    def det(self, z: complex | np.ndarray) -> np.ndarray:
        """``det(I - K(z))``."""
        return _det(self.identity_minus(z))

    def det_derivative(self, z: complex | np.ndarray) -> np.ndarray:
        """``d/dz det(I - K(z)) = tr(adj(I - K) (-K'))`` (Jacobi's formula)."""
        pts = _as_points(z)
        adj = _adjugate(self.identity_minus(pts))
        return -np.einsum("nij,nji->n", adj, self.derivatives(pts))

    def log_derivative(self, z: complex | np.ndarray) -> np.ndarray:
        """``det'/det = tr((I - K)^-1 (-K'))``."""
        pts = _as_points(z)
        sol = np.linalg.solve(self.identity_minus(pts), -self.derivatives(pts))
        return np.trace(sol, axis1=1, axis2=2)

    def resolvent(self, z: complex | np.ndarray) -> np.ndarray:
        """``(I - K(z))^-1``."""
        return np.linalg.inv(self.identity_minus(z))


class TransformKernel(_MatrixFunction):
    """Vectorised ``L mu(z)`` for a measure matrix.

    Attributes:
        p: Number of types.
        abscissa: Domain abscissa.
    """

    def __init__(self, M: MeasureMatrix) -> None:
        self.p = M.p
        atom_idx: list[int] = []
        atom_loc: list[float] = []
        atom_w: list[float] = []
        dens_idx: list[int] = []
        dens: list[tuple[float, int, float]] = []
        for i, row in enumerate(M.entries):
            for j, m in enumerate(row):
                for a in m.atoms:
                    if a.weight > 0.0:
                        atom_idx.append(i * self.p + j)
                        atom_loc.append(a.location)
                        atom_w.append(a.weight)
                for d in m.densities:
                    if d.coefficient > 0.0:
                        dens_idx.append(i * self.p + j)
                        dens.append((d.coefficient, d.power, d.rate))
        self._atom_loc = np.array(atom_loc)
        self._atom_w = np.array(atom_w)
        self._atom_sel = self._selector(atom_idx)
        self._dens_c = np.array([c for c, _, _ in dens])
        self._dens_k = np.array([k for _, k, _ in dens], dtype=int)
        self._dens_beta = np.array([b for _, _, b in dens])
        self._dens_fact = np.array([float(factorial(k)) for k in self._dens_k])
        self._dens_fact1 = np.array([float(factorial(k + 1)) for k in self._dens_k])
        self._dens_sel = self._selector(dens_idx)
        self.abscissa = float(np.max(-self._dens_beta)) if dens else float("-inf")

    def _selector(self, idx: list[int]) -> np.ndarray:
        sel = np.zeros((len(idx), self.p * self.p))
        sel[np.arange(len(idx)), idx] = 1.0
        return sel

    def _check(self, pts: np.ndarray, continued: bool) -> None:
        if not continued:
            bad = pts.real <= self.abscissa
            if np.any(bad):
                z = complex(pts[np.argmax(bad)])
                raise DomainError(
                    f"Re z = {z.real:g} is not above the domain abscissa {self.abscissa:g}"
                )
        elif self._dens_beta.size:
            if np.any(pts[:, None] == -self._dens_beta[None, :]):
                raise PoleError("evaluation point hits a density pole z = -beta")

    def values(self, z: np.ndarray, continued: bool = False) -> np.ndarray:
        """``L mu(z)`` at every point, shape ``(n, p, p)``.

        Args:
            z: Evaluation points.
            continued: Evaluate the meromorphic continuation left of the abscissa.
        """
        pts = _as_points(z)
        self._check(pts, continued)
        out = np.zeros((pts.size, self.p * self.p), dtype=complex)
        if self._atom_w.size:
            out += (self._atom_w * np.exp(-np.outer(pts, self._atom_loc))) @ self._atom_sel
        if self._dens_c.size:
            shifted = pts[:, None] + self._dens_beta[None, :]
            out += (self._dens_c * self._dens_fact / shifted ** (self._dens_k + 1)) @ self._dens_sel
        return out.reshape(pts.size, self.p, self.p)

    def derivatives(self, z: np.ndarray, continued: bool = False) -> np.ndarray:
        """Closed-form ``d/dz L mu(z)``, shape ``(n, p, p)``."""
        pts = _as_points(z)
        self._check(pts, continued)
        out = np.zeros((pts.size, self.p * self.p), dtype=complex)
        if self._atom_w.size:
            terms = -self._atom_loc * self._atom_w * np.exp(-np.outer(pts, self._atom_loc))
            out += terms @ self._atom_sel
        if self._dens_c.size:
            shifted = pts[:, None] + self._dens_beta[None, :]
            terms = -self._dens_c * self._dens_fact1 / shifted ** (self._dens_k + 2)
            out += terms @ self._dens_sel
        return out.reshape(pts.size, self.p, self.p)


class GeneratingKernel(_MatrixFunction):
    """Vectorised ``G mu(z)`` for a lattice matrix (an entire polynomial)."""

    def __init__(self, L: LatticeMeasureMatrix) -> None:
        self.p = L.p
        self.weights = lattice_weight_array(L)
        self._flat = self.weights.reshape(self.weights.shape[0], -1)
        n = np.arange(self.weights.shape[0])
        self._deriv_flat = (n[1:, None] * self._flat[1:]) if n.size > 1 else self._flat[:0]

    def values(self, z: np.ndarray) -> np.ndarray:
        pts = _as_points(z)
        powers = pts[:, None] ** np.arange(self._flat.shape[0])[None, :]
        return (powers @ self._flat).reshape(pts.size, self.p, self.p)

    def derivatives(self, z: np.ndarray) -> np.ndarray:
        pts = _as_points(z)
        if self._deriv_flat.shape[0] == 0:
            return np.zeros((pts.size, self.p, self.p), dtype=complex)
        powers = pts[:, None] ** np.arange(self._deriv_flat.shape[0])[None, :]
        return (powers @ self._deriv_flat).reshape(pts.size, self.p, self.p)


@lru_cache(maxsize=256)
def compile_kernel(M: MeasureMatrix) -> TransformKernel:
    """Return the cached transform kernel of ``M``."""
    return TransformKernel(M)


@lru_cache(maxsize=256)
def compile_generating_kernel(L: LatticeMeasureMatrix) -> GeneratingKernel:
    """Return the cached generating-function kernel of ``L``."""
    return GeneratingKernel(L)


def domain_abscissa(M: MeasureMatrix) -> DomainAbscissa:
    """Return ``max(-beta)`` over density terms with positive mass, or ``-inf``."""
    return DomainAbscissa(abscissa=compile_kernel(M).abscissa)


def laplace_matrix(M: MeasureMatrix, z: complex, *, continued: bool = False) -> TransformValue:
    """Evaluate ``L mu(z)``.

    Entry ``(i, j)`` is ``sum w exp(-z a) + sum c k! / (z + beta)^(k+1)``.

    Args:
        M: Measure matrix.
        z: Evaluation point.
        continued: Allow points left of the abscissa (meromorphic continuation).

    Returns:
        The transform value.

    Raises:
        DomainError: If ``Re z`` does not exceed the abscissa.
        PoleError: If ``continued`` and ``z = -beta`` for a density term.
    """
    matrix = compile_kernel(M).values(np.array([z]), continued=continued)[0]
    return TransformValue(z=complex(z), matrix=matrix)


def laplace_derivative(
    M: MeasureMatrix, z: complex, *, continued: bool = False
) -> TransformValue:
    """Evaluate ``d/dz L mu(z)`` term by term."""
    matrix = compile_kernel(M).derivatives(np.array([z]), continued=continued)[0]
    return TransformValue(z=complex(z), matrix=matrix)


def generating_matrix(L: LatticeMeasureMatrix, z: complex) -> TransformValue:
    """Evaluate ``G mu(z) = sum_n mu({n}) z^n``; ``G mu(exp(-h z)) = L mu(z)``."""
    matrix = compile_generating_kernel(L).values(np.array([z]))[0]
    return TransformValue(z=complex(z), matrix=matrix)


def inf_norm(A: np.ndarray) -> np.ndarray:
    """Operator infinity-norm (maximum absolute row sum), batched over leading axes."""
    return np.max(np.sum(np.abs(A), axis=-1), axis=-1)
