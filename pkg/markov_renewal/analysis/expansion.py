"""Assembly and evaluation of exponential-polynomial expansions.

An expansion is ``sum_lambda e^(lambda t) sum_k t^k coeff_{lambda,k}`` plus a
remainder ``O(t^q e^(theta t))``. Builders exist for the renewal measure
``U(t)`` and for ``F(t) = U * f(t)``, each in a non-lattice and a lattice form.
"""

import logging
from concurrent.futures import Executor

import numpy as np

from markov_renewal.analysis.conditions import check_strip_empty
from markov_renewal.analysis.laurent import (
    expansion_coefficients,
    lattice_expansion_coefficients,
)
from markov_renewal.analysis.measures import variation_order
from markov_renewal.analysis.roots import locate_lattice_roots, locate_roots
from markov_renewal.exceptions import DomainError, StripRootError, UnsupportedRootError
from markov_renewal.models.config import Tolerances
from markov_renewal.models.measure import (
    Characteristic,
    LatticeCharacteristic,
    LatticeMeasureMatrix,
    MeasureMatrix,
)
from markov_renewal.models.results import (
    Expansion,
    ExpansionCoefficients,
    ExpansionKind,
    ExpansionTerm,
    ScaledValue,
    SearchRegion,
    Verdict,
)

logger = logging.getLogger(__name__)

OVERFLOW_EXPONENT = 700.0
REALNESS_TOL = 1e-10
EPSILON_CAP = 1e-3


def _terms(
    coefficients: ExpansionCoefficients, use_vectors: bool
) -> tuple[ExpansionTerm, ...]:
    terms = []
    for rc in coefficients.roots:
        coeffs = rc.b if use_vectors else rc.C
        terms.extend(
            ExpansionTerm(lam=rc.lam, power=k, coeff=np.asarray(c)) for k, c in enumerate(coeffs)
        )
    return tuple(terms)


def u_expansion_from_coefficients(
    coefficients: ExpansionCoefficients, region: SearchRegion, p: int
) -> Expansion:
    """Renewal-measure expansion with remainder ``O(t e^(re_min t))``."""
    return Expansion(
        kind=ExpansionKind.U_NONLATTICE,
        terms=_terms(coefficients, use_vectors=False),
        remainder_exponent=region.re_min,
        polynomial_remainder=True,
        shape=(p, p),
    )


def f_expansion_from_coefficients(
    coefficients: ExpansionCoefficients, theta: float, p: int
) -> Expansion:
    """Characteristic expansion with remainder ``O(e^((theta + eps) t))``."""
    re_parts = [complex(rc.lam).real for rc in coefficients.roots]
    gap = min(re_parts) - theta if re_parts else EPSILON_CAP
    epsilon = 0.5 * min(EPSILON_CAP, gap)
    return Expansion(
        kind=ExpansionKind.F_NONLATTICE,
        terms=_terms(coefficients, use_vectors=True),
        remainder_exponent=theta + epsilon,
        epsilon=epsilon,
        shape=(p,),
    )


def build_U_expansion(
    M: MeasureMatrix,
    region: SearchRegion,
    tolerances: Tolerances | None = None,
    executor: Executor | None = None,
) -> Expansion:
    """Expansion of the renewal measure ``U(t) = sum_n mu^{*n}([0, t])``.

    Args:
        M: Measure matrix satisfying (A1)-(A3).
        region: Search region; ``re_min`` is the remainder exponent.
        tolerances: Numerical tolerances.
        executor: Optional executor for per-root work.

    Returns:
        Terms ``(lambda, k, C_{lambda,k})`` for every root in the region.

    Raises:
        UnsupportedRootError: If ``region.re_min <= 0``.
    """
    if region.re_min <= 0.0:
        raise UnsupportedRootError(
            f"renewal measure expansion needs re_min > 0, got {region.re_min:g}"
        )
    roots = locate_roots(M, region, tolerances, executor)
    coefficients = expansion_coefficients(M, roots, tolerances, executor)
    expansion = u_expansion_from_coefficients(coefficients, region, M.p)
    logger.info("U expansion with %d term(s), remainder %g", len(expansion.terms), region.re_min)
    return expansion


def strip_theta(f: Characteristic, vartheta: float) -> float:
    """Smallest admissible ``theta >= vartheta`` for the variation moment of ``f``."""
    order = variation_order(f)
    if not np.isfinite(order):
        return vartheta
    return max(vartheta, order + 1e-6 * max(1.0, abs(order)))


def build_F_expansion(
    M: MeasureMatrix,
    f: Characteristic,
    region: SearchRegion,
    tolerances: Tolerances | None = None,
    executor: Executor | None = None,
) -> Expansion:
    """Expansion of ``F = U * f`` for a characteristic ``f``.

    ``theta`` is raised above the variation order of ``f`` when needed; the
    strip between ``region.re_min`` and ``theta`` must then be free of roots.

    Raises:
        StripRootError: If a root lies in ``(re_min, theta]``.
        DivergentMomentError: If a moment of ``f`` diverges at a root.
    """
    vartheta = region.re_min
    theta = strip_theta(f, vartheta)
    if theta > vartheta:
        report = check_strip_empty(M, vartheta, theta, region.im_max, tolerances)
        if report.verdict != Verdict.PASS:
            raise StripRootError(
                f"{report.witness.get('count')} root(s) in the strip ({vartheta:g}, {theta:g}]"
            )
    roots = [r for r in locate_roots(M, region, tolerances, executor) if r.lam.real > theta]
    coefficients = expansion_coefficients(M, roots, tolerances, executor, f=f)
    expansion = f_expansion_from_coefficients(coefficients, theta, M.p)
    logger.info(
        "F expansion with %d term(s), remainder %g", len(expansion.terms),
        expansion.remainder_exponent,
    )
    return expansion


def lattice_f_expansion_from_coefficients(
    coefficients: ExpansionCoefficients, theta: float, p: int, vectors: bool
) -> Expansion:
    """Lattice expansion of ``F(n)`` (vectors) or ``U({n})`` (matrices)."""
    return Expansion(
        kind=ExpansionKind.F_LATTICE if vectors else ExpansionKind.U_LATTICE,
        terms=_terms(coefficients, use_vectors=vectors),
        remainder_exponent=theta,
        shape=(p,) if vectors else (p, p),
    )


def build_lattice_F_expansion(
    L: LatticeMeasureMatrix,
    f: LatticeCharacteristic,
    theta: float,
    tolerances: Tolerances | None = None,
    executor: Executor | None = None,
) -> Expansion:
    """Expansion ``F(n) = sum e^(lambda n) sum n^k b_{lambda,k,f} + O(e^(theta n))``.

    Finitely supported characteristics are summable at every ``theta``.
    """
    roots = locate_lattice_roots(L, theta)
    coefficients = lattice_expansion_coefficients(L, roots, tolerances, executor, f=f)
    return lattice_f_expansion_from_coefficients(coefficients, theta, L.p, vectors=True)


def build_lattice_U_expansion(
    L: LatticeMeasureMatrix,
    theta: float,
    tolerances: Tolerances | None = None,
    executor: Executor | None = None,
) -> Expansion:
    """Expansion of the lattice renewal density ``U({n})``."""
    roots = locate_lattice_roots(L, theta)
    coefficients = lattice_expansion_coefficients(L, roots, tolerances, executor)
    return lattice_f_expansion_from_coefficients(coefficients, theta, L.p, vectors=False)


def _paired(terms: tuple[ExpansionTerm, ...]) -> list[tuple[ExpansionTerm, float]]:
    """Terms with weight 2 when their conjugate partner is present (and dropped)."""
    out: list[tuple[ExpansionTerm, float]] = []
    used: set[int] = set()
    for i, term in enumerate(terms):
        if i in used:
            continue
        lam = complex(term.lam)
        partner = None
        if lam.imag != 0.0:
            partner = next(
                (
                    j
                    for j in range(i + 1, len(terms))
                    if j not in used
                    and terms[j].power == term.power
                    and abs(complex(terms[j].lam) - lam.conjugate()) <= 1e-12 * max(1.0, abs(lam))
                ),
                None,
            )
        if partner is not None:
            used.add(partner)
        out.append((term, 1.0 if partner is None else 2.0))
    return out


def _accumulate(exp: Expansion, t: float, shift: float) -> np.ndarray:
    total = np.zeros(exp.shape, dtype=complex)
    unpaired = np.zeros(exp.shape, dtype=complex)
    for term, weight in _paired(exp.terms):
        value = np.exp((complex(term.lam) - shift) * t) * t**term.power * term.coeff
        if weight == 2.0:  # noqa: PLR2004
            total += 2.0 * value.real
        else:
            unpaired += value
    residue = float(np.max(np.abs(unpaired.imag))) if unpaired.size else 0.0
    scale = max(float(np.max(np.abs(total + unpaired))) if total.size else 0.0, 1e-300)
    if residue > REALNESS_TOL * scale:
        logger.warning("expansion value at t=%g has imaginary residue %.3g", t, residue / scale)
    return np.asarray((total + unpaired).real)


def _check_time(t: float) -> None:
    if t < 0.0:
        raise DomainError(f"expansions are evaluated at t >= 0, got {t:g}")


def evaluate_scaled(exp: Expansion, t: float) -> ScaledValue:
    """Overflow-safe evaluation ``mantissa * exp(exponent)``.

    Raises:
        DomainError: If ``t < 0``.
    """
    _check_time(t)
    lead = max((complex(term.lam).real for term in exp.terms), default=0.0)
    return ScaledValue(mantissa=_accumulate(exp, t, lead), exponent=lead * t)


def evaluate(exp: Expansion, t: float) -> np.ndarray | ScaledValue:
    """Evaluate an expansion at ``t >= 0``; real matrix or vector.

    Conjugate terms are combined in the real form
    ``2 e^(Re lambda t) t^k Re(e^(i Im lambda t) coeff)``.

    Args:
        exp: Expansion.
        t: Time (``n`` for lattice expansions).

    Returns:
        The value, or a ``ScaledValue`` when ``max Re lambda * t > 700``.

    Raises:
        DomainError: If ``t < 0``.
    """
    _check_time(t)
    lead = max((complex(term.lam).real for term in exp.terms), default=0.0)
    if lead * t > OVERFLOW_EXPONENT:
        return evaluate_scaled(exp, t)
    return _accumulate(exp, t, 0.0)
