"""Spectral radius, Perron vectors, primitivity and the Malthusian parameter."""

import logging
from collections.abc import Callable

import numpy as np
import scipy.linalg

from markov_renewal.analysis.measures import incidence_pattern, instant_mass_matrix
from markov_renewal.analysis.transform import compile_kernel
from markov_renewal.exceptions import (
    AssumptionError,
    ConvergenceError,
    DomainError,
    NoMalthusianError,
    NotPrimitiveError,
)
from markov_renewal.models.measure import MeasureMatrix
from markov_renewal.models.results import AssumptionReport, MalthusianResult, SpectralProfile

logger = logging.getLogger(__name__)

BRACKET_OFFSET = 1e-6
MAX_DOUBLINGS = 60
MAX_BISECTIONS = 200


def spectral_radius(A: np.ndarray) -> float:
    """Modulus of the largest eigenvalue.

    Args:
        A: Square complex matrix with finite entries.

    Returns:
        ``max |eigenvalue|``; for nonnegative matrices the Perron root.

    Raises:
        DomainError: If the matrix has non-finite entries.
        ConvergenceError: If the eigenvalue solver does not converge.
    """
    A = np.asarray(A)
    if not np.all(np.isfinite(A)):
        raise DomainError("matrix has non-finite entries")
    try:
        eigenvalues = scipy.linalg.eigvals(A)
    except np.linalg.LinAlgError as e:
        raise ConvergenceError(f"eigenvalue solver failed: {e}") from e
    return float(np.max(np.abs(eigenvalues)))


def is_primitive(pattern: np.ndarray) -> bool:
    """Primitivity by boolean powering up to Wielandt's exponent ``(p-1)^2 + 1``."""
    B = np.asarray(pattern) != 0
    p = B.shape[0]
    exponent = (p - 1) ** 2 + 1
    power = np.eye(p, dtype=bool)
    base = B.copy()
    while exponent:
        if exponent & 1:
            power = (power.astype(int) @ base.astype(int)) > 0
        base = (base.astype(int) @ base.astype(int)) > 0
        exponent >>= 1
    return bool(np.all(power))


def incidence_matrix(M: MeasureMatrix) -> np.ndarray:
    """0/1 incidence matrix: entry 1 where ``mu^{i,j}`` has positive mass."""
    return incidence_pattern(M).astype(int)


def perron_vector(A: np.ndarray) -> np.ndarray:
    """Positive unit Perron eigenvector of a nonnegative primitive matrix.

    Raises:
        NotPrimitiveError: If ``A`` is not primitive.
    """
    A = np.asarray(A, dtype=float)
    if np.any(A < 0):
        raise ValueError("perron_vector needs a nonnegative matrix")
    if not is_primitive(A > 0):
        raise NotPrimitiveError("matrix is not primitive")
    eigenvalues, vectors = scipy.linalg.eig(A)
    idx = int(np.argmax(eigenvalues.real))
    v = np.real(vectors[:, idx])
    v = v * np.sign(v[np.argmax(np.abs(v))])
    return np.asarray(v / np.linalg.norm(v))


def varrho(M: MeasureMatrix, theta: float) -> float:
    """``rho(L mu(theta))`` for real ``theta`` in the domain."""
    return spectral_radius(compile_kernel(M).values(np.array([theta]))[0].real)


def spectral_profile(M: MeasureMatrix) -> SpectralProfile:
    """Return ``varrho`` together with ``rho(mu(0))`` and primitivity of the incidence matrix."""

    def profile(theta: float) -> float:
        return varrho(M, theta)

    return SpectralProfile(
        varrho=profile,
        rho_at_zero=spectral_radius(instant_mass_matrix(M)),
        primitive=is_primitive(incidence_pattern(M)),
    )


def _lower_bracket(rho: Callable[[float], float], abscissa: float) -> tuple[float, float] | None:
    """Find ``theta`` with ``varrho(theta) >= 1``; returns ``(theta, varrho)`` or None.

    For a finite abscissa the offset halves toward it until ``varrho >= 1`` or
    ``abscissa + offset`` rounds to the abscissa.
    """
    if np.isfinite(abscissa):
        offset = BRACKET_OFFSET * max(1.0, abs(abscissa))
        while (theta := abscissa + offset) != abscissa:
            value = rho(theta)
            if value >= 1.0:
                return theta, value
            offset *= 0.5
        return None
    theta, step = 0.0, 1.0
    for _ in range(MAX_DOUBLINGS):
        value = rho(theta)
        if value >= 1.0 and np.isfinite(value):
            return theta, value
        theta -= step
        step *= 2.0
    return None


def check_assumptions(M: MeasureMatrix) -> AssumptionReport:
    """Verdicts for (A1), (A2) and (A3)."""
    abscissa = compile_kernel(M).abscissa
    rho0 = spectral_radius(instant_mass_matrix(M))
    found = _lower_bracket(lambda th: varrho(M, th), abscissa)
    return AssumptionReport(
        a1=True,
        a2=rho0 < 1.0,
        a3=found is not None,
        abscissa=abscissa,
        rho_at_zero=rho0,
    )


def find_malthusian(M: MeasureMatrix, tol_rho: float = 1e-12) -> MalthusianResult:
    """Locate the Malthusian parameter ``alpha`` with ``varrho(alpha) = 1``.

    The bracket starts just right of the domain abscissa (or at 0, moving left
    for entire transforms) and its right end advances with doubling steps
    until ``varrho <= 1``; bisection then uses the monotonicity of ``varrho``.

    Args:
        M: Measure matrix.
        tol_rho: Bound on ``|varrho(alpha) - 1|``.

    Returns:
        The Malthusian result.

    Raises:
        AssumptionError: If ``rho(mu(0)) >= 1``.
        NoMalthusianError: If ``varrho < 1`` on the whole sampled domain.
        ConvergenceError: If bisection stalls before reaching ``tol_rho``.
    """
    rho0 = spectral_radius(instant_mass_matrix(M))
    if rho0 >= 1.0:
        raise AssumptionError(f"rho(mu(0)) = {rho0:.6g} >= 1 violates (A2)", rho_at_zero=rho0)

    def rho(theta: float) -> float:
        return varrho(M, theta)

    abscissa = compile_kernel(M).abscissa
    start = _lower_bracket(rho, abscissa)
    if start is None:
        raise NoMalthusianError("varrho < 1 on the sampled real domain; (A3) fails")
    lo, rho_lo = start
    if abs(rho_lo - 1.0) <= tol_rho:
        return MalthusianResult(alpha=lo, bracket=(lo, lo), varrho_at_alpha=rho_lo)

    step = BRACKET_OFFSET * max(1.0, abs(lo))
    hi = lo + step
    rho_hi = rho(hi)
    for _ in range(MAX_DOUBLINGS):
        if rho_hi <= 1.0:
            break
        lo, rho_lo = hi, rho_hi
        step *= 2.0
        hi = lo + step
        rho_hi = rho(hi)
    else:
        raise ConvergenceError("could not bracket the Malthusian parameter")
    logger.debug("Malthusian bracket [%r, %r]", lo, hi)

    for iteration in range(1, MAX_BISECTIONS + 1):
        mid = 0.5 * (lo + hi)
        rho_mid = rho(mid)
        if abs(rho_mid - 1.0) <= tol_rho:
            logger.info("Malthusian parameter %.15g after %d bisections", mid, iteration)
            return MalthusianResult(
                alpha=mid, bracket=(lo, hi), varrho_at_alpha=rho_mid, iterations=iteration
            )
        if rho_mid > 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * np.finfo(float).eps * max(abs(mid), np.finfo(float).tiny):
            break
    raise ConvergenceError(
        f"bisection stalled at theta={0.5 * (lo + hi):.17g} before |varrho - 1| <= {tol_rho:g}"
    )
