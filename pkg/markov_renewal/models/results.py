"""Result models produced by the analysis pipeline.

Matrices are carried as numpy arrays. These models are frozen but, unlike the
input models, not hashable.
"""

from collections.abc import Callable
from enum import Enum
from typing import Any, NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

_RESULT_CONFIG = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class Rectangle(NamedTuple):
    """Closed rectangle ``[re_lo, re_hi] x [im_lo, im_hi]`` in the complex plane."""

    re_lo: float
    re_hi: float
    im_lo: float
    im_hi: float

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_lo + self.re_hi), 0.5 * (self.im_lo + self.im_hi))

    @property
    def half_diagonal(self) -> float:
        return 0.5 * float(np.hypot(self.re_hi - self.re_lo, self.im_hi - self.im_lo))


class TransformValue(BaseModel):
    """Value of ``L mu(z)`` or ``G mu(z)`` at a single point."""

    model_config = _RESULT_CONFIG

    z: complex = Field(..., description="Evaluation point")
    matrix: np.ndarray = Field(..., description="Complex p x p matrix")


class DomainAbscissa(BaseModel):
    """Infimum of ``Re z`` over which the Laplace transform is finite."""

    model_config = ConfigDict(frozen=True)

    abscissa: float = Field(..., description="Abscissa, -inf for entire transforms")

    @property
    def is_entire(self) -> bool:
        """True when the transform is finite on the whole plane."""
        return self.abscissa == float("-inf")


class SpectralProfile(BaseModel):
    """Spectral radius along the real domain."""

    model_config = _RESULT_CONFIG

    varrho: Callable[[float], float] = Field(..., description="theta -> rho(L mu(theta))")
    rho_at_zero: float = Field(..., description="Spectral radius of mu(0)")
    primitive: bool = Field(..., description="Primitivity of the incidence matrix")


class MalthusianResult(BaseModel):
    """Malthusian parameter found by monotone bisection."""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(..., description="Malthusian parameter")
    bracket: tuple[float, float] = Field(..., description="Final bisection interval")
    varrho_at_alpha: float = Field(..., description="Spectral radius at alpha")
    iterations: int = Field(0, description="Bisection steps taken")


class AssumptionReport(BaseModel):
    """Verdicts for the standing assumptions (A1)-(A3)."""

    model_config = ConfigDict(frozen=True)

    a1: bool = Field(..., description="Transform domain has a finite or -inf abscissa")
    a2: bool = Field(..., description="rho(mu(0)) < 1")
    a3: bool = Field(..., description="Some real theta has 1 <= varrho(theta) < inf")
    abscissa: float = Field(..., description="Domain abscissa")
    rho_at_zero: float = Field(..., description="Spectral radius of mu(0)")


class SearchRegion(BaseModel):
    """Rectangle ``(re_min, re_max] x [-im_max, im_max]`` searched for roots."""

    model_config = ConfigDict(frozen=True)

    re_min: float = Field(..., description="Left edge, the remainder exponent")
    re_max: float = Field(..., description="Right edge")
    im_max: float = Field(..., gt=0.0, description="Half-height of the band")

    @model_validator(mode="after")
    def check_order(self) -> "SearchRegion":
        """Require ``re_min < re_max``."""
        if not self.re_min < self.re_max:
            raise ValueError("re_min must be smaller than re_max")
        return self

    def rectangle(self) -> Rectangle:
        """Return the region as a closed rectangle."""
        return Rectangle(self.re_min, self.re_max, -self.im_max, self.im_max)


class RootRecord(BaseModel):
    """Root of the characteristic equation.

    ``pole_order`` and ``laurent`` stay empty until the laurent module fills them.
    For lattice roots, ``zeta`` holds the root of ``det(I - G mu(z))``.
    """

    model_config = _RESULT_CONFIG

    lam: complex = Field(..., description="Root lambda")
    det_multiplicity: int = Field(..., ge=1, description="Zero multiplicity of the determinant")
    pole_order: int | None = Field(None, description="Pole order k(lambda)")
    laurent: tuple[np.ndarray, ...] = Field(default=(), description="A_{lambda,1..k}")
    zeta: complex | None = Field(None, description="Generating-function root exp(-lambda)")


class LaurentData(BaseModel):
    """Principal-part coefficients of a resolvent at a root."""

    model_config = _RESULT_CONFIG

    lam: complex = Field(..., description="Root lambda")
    center: complex = Field(..., description="Contour center, lambda or exp(-lambda)")
    radius: float = Field(..., gt=0.0, description="Contour radius")
    A: tuple[np.ndarray, ...] = Field(..., description="Coefficients of (z-center)^-k, k>=1")
    pole_order: int = Field(..., ge=1, description="Largest k with a nonzero coefficient")
    nodes: int = Field(..., description="Trapezoidal node count at convergence")

    @property
    def principal(self) -> tuple[np.ndarray, ...]:
        """Coefficients ``A_1..A_{pole_order}``."""
        return self.A[: self.pole_order]


class RootCoefficients(BaseModel):
    """Expansion coefficients attached to one root."""

    model_config = _RESULT_CONFIG

    lam: complex = Field(..., description="Root lambda")
    pole_order: int = Field(..., ge=1, description="Pole order k(lambda)")
    det_multiplicity: int = Field(..., ge=1, description="Determinant multiplicity")
    C: tuple[np.ndarray, ...] = Field(default=(), description="C_{lambda,0..k-1}")
    B: tuple[np.ndarray, ...] = Field(default=(), description="B_{lambda,0..k-1}")
    lattice_B: tuple[np.ndarray, ...] = Field(default=(), description="Lattice B_{lambda,1..k}")
    b: tuple[np.ndarray, ...] = Field(default=(), description="b_{lambda,0..k-1,f}")


class ExpansionCoefficients(BaseModel):
    """Coefficients for every root of a search region."""

    model_config = _RESULT_CONFIG

    roots: tuple[RootCoefficients, ...] = Field(default=(), description="Per-root data")

    def for_root(self, lam: complex, tol: float = 1e-8) -> RootCoefficients:
        """Return the coefficients of the root closest to ``lam``.

        Raises:
            KeyError: If no root lies within ``tol * max(1, |lam|)``.
        """
        for rc in self.roots:
            if abs(rc.lam - lam) <= tol * max(1.0, abs(lam)):
                return rc
        raise KeyError(f"no coefficients for root {lam}")


class ExpansionKind(str, Enum):
    """Which quantity an expansion describes, and on which time scale."""

    U_NONLATTICE = "U-nonlattice"
    F_NONLATTICE = "F-nonlattice"
    U_LATTICE = "U-lattice"
    F_LATTICE = "F-lattice"


class ExpansionTerm(BaseModel):
    """Single term ``exp(lam * t) * t**power * coeff``."""

    model_config = _RESULT_CONFIG

    lam: complex = Field(..., description="Exponent lambda")
    power: int = Field(..., ge=0, description="Power of t")
    coeff: np.ndarray = Field(..., description="p x p matrix or p-vector")


class Expansion(BaseModel):
    """Finite exponential-polynomial expansion with a remainder exponent."""

    model_config = _RESULT_CONFIG

    kind: ExpansionKind = Field(..., description="Expansion type")
    terms: tuple[ExpansionTerm, ...] = Field(default=(), description="Expansion terms")
    remainder_exponent: float = Field(..., description="Remainder O(t^q exp(theta t))")
    polynomial_remainder: bool = Field(False, description="Remainder carries a factor t")
    epsilon: float | None = Field(None, description="Margin added to theta, if any")
    shape: tuple[int, ...] = Field(..., description="Shape of the evaluated value")

    @property
    def is_lattice(self) -> bool:
        return self.kind in (ExpansionKind.U_LATTICE, ExpansionKind.F_LATTICE)


class ScaledValue(BaseModel):
    """Overflow-safe value ``mantissa * exp(exponent)``."""

    model_config = _RESULT_CONFIG

    mantissa: np.ndarray = Field(..., description="Real mantissa array")
    exponent: float = Field(..., description="Natural-log scale")

    def value(self) -> np.ndarray:
        """Return ``mantissa * exp(exponent)``, which may overflow to inf."""
        with np.errstate(over="ignore"):
            return np.asarray(self.mantissa * np.exp(self.exponent))


class ConditionId(str, Enum):
    """Checked hypothesis."""

    B = "B"
    E = "E"
    STRIP = "strip-emptiness"


class Verdict(str, Enum):
    """Outcome of a condition check."""

    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


class ConditionReport(BaseModel):
    """Verdict plus scan data for one condition check."""

    model_config = ConfigDict(frozen=True)

    condition: ConditionId = Field(..., description="Checked condition")
    verdict: Verdict = Field(..., description="pass, fail or inconclusive")
    witness: dict[str, Any] = Field(default_factory=dict, description="Scan data")


class GridSolution(BaseModel):
    """Oracle values sampled at ``t_k = k * h``."""

    model_config = _RESULT_CONFIG

    h: float = Field(..., gt=0.0, description="Step")
    times: np.ndarray = Field(..., description="Sample times")
    values: np.ndarray = Field(..., description="Values, leading axis over times")

    def at(self, t: float) -> np.ndarray:
        """Return the value at the grid point ``floor(t / h)`` (right-continuous step)."""
        k = int(np.floor(t / self.h + 1e-9))
        return np.asarray(self.values[min(max(k, 0), len(self.times) - 1)])


class SimEstimate(BaseModel):
    """Monte Carlo estimate for one ancestor type."""

    model_config = _RESULT_CONFIG

    initial_type: int = Field(..., ge=0, description="Type of the ancestor")
    t_grid: tuple[float, ...] = Field(..., description="Evaluation times")
    mean: np.ndarray = Field(..., description="Mean score Z_t, shape (len(t_grid),)")
    std_error: np.ndarray = Field(..., description="Standard error of mean")
    count_mean: np.ndarray = Field(..., description="Mean births per type, (len(t_grid), p)")
    count_std_error: np.ndarray = Field(..., description="Standard error of count_mean")
    replications: int = Field(..., ge=1, description="Number of replications")
    seed: int = Field(..., ge=0, description="Root seed")


class SlopeTestResult(BaseModel):
    """Least-squares decay test of log-residuals."""

    model_config = ConfigDict(frozen=True)

    slope: float | None = Field(None, description="Fitted slope, None if residuals are exact")
    threshold: float = Field(..., description="theta + margin")
    exact: bool = Field(..., description="All residuals below the noise floor")
    passed: bool = Field(..., description="Test verdict")
    points: int = Field(..., description="Residuals above the floor used in the fit")
