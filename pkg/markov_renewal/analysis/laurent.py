"""Laurent coefficients of the resolvent and the expansion coefficients built from them.

At a root ``lambda`` the resolvent has the principal part
``sum_k A_k (z - lambda)^-k``. The coefficients are extracted by the
trapezoidal rule on a circle, which converges geometrically for integrands
analytic in an annulus. From them:

- ``C_k`` (renewal measure expansion)
- ``B_k = (k+1) C_{k+1} + lambda C_k`` (characteristic expansion)
- ``b_{k,f}`` (vectors for a given characteristic)

The lattice analogues use the generating function around ``zeta = exp(-lambda)``.
"""

import logging
from collections.abc import Callable, Sequence
from concurrent.futures import Executor
from math import comb, factorial, pi
from typing import TypeVar

import numpy as np
from numpy.polynomial import polynomial as P

from markov_renewal.analysis.measures import (
    exponential_order,
    integrate_xk_exp,
    lattice_to_measure_matrix,
    tail_xk_exp,
)
from markov_renewal.analysis.roots import disk_zero_count, lattice_polynomial_roots
from markov_renewal.analysis.transform import (
    _MatrixFunction,
    compile_generating_kernel,
    compile_kernel,
    inf_norm,
)
from markov_renewal.exceptions import (
    BoundaryRootError,
    ConvergenceError,
    DivergentMomentError,
    LaurentMismatchError,
    QuadratureError,
    RadiusError,
    SingularContourError,
    UnsupportedRootError,
)
from markov_renewal.models.config import Tolerances
from markov_renewal.models.measure import (
    Characteristic,
    LatticeCharacteristic,
    LatticeMeasureMatrix,
    MeasureMatrix,
)
from markov_renewal.models.results import (
    ExpansionCoefficients,
    LaurentData,
    RootCoefficients,
    RootRecord,
)

logger = logging.getLogger(__name__)

RADIUS_HALVINGS = 8
START_NODES = 64
QUADRATURE_TOL = 1e-11
BRIDGE_TOL = 1e-6

_T = TypeVar("_T")
_R = TypeVar("_R")


def _map(fn: Callable[[_T], _R], items: Sequence[_T], executor: Executor | None) -> list[_R]:
    if executor is None:
        return [fn(x) for x in items]
    return list(executor.map(fn, items))


def _admissible_radius(
    center: complex, neighbours: Sequence[complex], boundary_distance: float
) -> float:
    distances = [abs(center - w) for w in neighbours if abs(center - w) > 0.0]
    return 0.25 * min([*distances, boundary_distance, 1.0])


def _contour_coefficients(
    kernel: _MatrixFunction,
    lam: complex,
    center: complex,
    radius: float,
    orders: int,
    tol: Tolerances,
) -> LaurentData:
    """Trapezoidal extraction of the ``(z - center)^-k`` coefficients, k = 1..orders."""
    previous: np.ndarray | None = None
    n = START_NODES
    while n <= tol.max_nodes:
        u = np.exp(2j * pi * np.arange(n) / n)
        z = center + radius * u
        d = kernel.det(z)
        if float(np.min(np.abs(d))) < tol.boundary_floor * (1.0 + float(np.max(np.abs(d)))):
            raise SingularContourError(f"I - K(z) is singular on the contour around {center}")
        try:
            R = kernel.resolvent(z)
        except np.linalg.LinAlgError as e:
            raise SingularContourError(f"resolvent failed on the contour around {center}") from e
        weights = (radius * u)[None, :] ** np.arange(1, orders + 1)[:, None]
        A = np.einsum("kn,nij->kij", weights, R) / n
        if previous is not None:
            scale = max(1.0, float(np.max(inf_norm(A))))
            if float(np.max(np.abs(A - previous))) < QUADRATURE_TOL * scale:
                break
        previous = A
        n *= 2
    else:
        raise QuadratureError(f"Laurent coefficients at {lam} did not converge", nodes=n // 2)

    if center.imag == 0.0:
        A = A.real.astype(complex)
    norms = inf_norm(A)
    top = float(np.max(norms))
    significant = [k + 1 for k in range(orders) if norms[k] > tol.tol_laurent * top]
    if top == 0.0 or not significant:
        raise ConvergenceError(f"no pole of the resolvent found at {lam}")
    pole_order = max(significant)
    logger.debug("pole order %d at %s with %d nodes", pole_order, lam, n)
    return LaurentData(
        lam=lam,
        center=center,
        radius=radius,
        A=tuple(A),
        pole_order=pole_order,
        nodes=n,
    )


def _verified_radius(
    det: Callable[[np.ndarray], np.ndarray],
    center: complex,
    radius: float,
    multiplicity: int,
    tol: Tolerances,
) -> float:
    for _ in range(RADIUS_HALVINGS):
        try:
            if disk_zero_count(det, center, radius, tol) == multiplicity:
                return radius
        except BoundaryRootError:
            pass
        radius *= 0.5
    raise RadiusError(f"no contour radius isolates the root at {center}")


def laurent_coeffs(
    M: MeasureMatrix,
    root: RootRecord,
    tolerances: Tolerances | None = None,
    neighbours: Sequence[complex] = (),
) -> LaurentData:
    """Laurent matrices ``A_{lambda,1..m}`` of ``(I - L mu(z))^-1`` at a root.

    The radius is a quarter of the distance to the nearest neighbouring root,
    the domain boundary or 1, halved until the circle encloses exactly
    ``det_multiplicity`` zeros.

    Args:
        M: Measure matrix.
        root: Located root.
        tolerances: Numerical tolerances.
        neighbours: Other roots to keep outside the contour.

    Returns:
        Laurent data with ``m = det_multiplicity`` coefficients.

    Raises:
        RadiusError: If no admissible radius exists.
        QuadratureError: If node doubling exceeds the budget.
        SingularContourError: If the resolvent is singular at a node.
    """
    tol = tolerances or Tolerances()
    kernel = compile_kernel(M)
    lam = complex(root.lam)
    radius = _admissible_radius(lam, neighbours, lam.real - kernel.abscissa)
    radius = _verified_radius(kernel.det, lam, radius, root.det_multiplicity, tol)
    return _contour_coefficients(kernel, lam, lam, radius, root.det_multiplicity, tol)


def c_coeffs(ld: LaurentData) -> tuple[np.ndarray, ...]:
    """Renewal-measure coefficients ``C_{lambda,0..k-1}``.

    ``C_k = (1/k!) sum_{n=0}^{kappa-1-k} (-1)^n / (n! lambda^(n+1)) A_{n+k+1}``.

    Raises:
        UnsupportedRootError: If ``Re lambda <= 0``.
    """
    lam = complex(ld.lam)
    if lam.real <= 0.0:
        raise UnsupportedRootError(f"no coefficient formula for Re(lambda) = {lam.real:g} <= 0")
    kappa = ld.pole_order
    A = ld.A
    return tuple(
        sum(
            ((-1) ** n / (factorial(n) * lam ** (n + 1))) * A[n + k]
            for n in range(kappa - k)
        )
        / factorial(k)
        for k in range(kappa)
    )


def b_coeffs(C: Sequence[np.ndarray], lam: complex) -> tuple[np.ndarray, ...]:
    """``B_k = (k+1) C_{k+1} + lambda C_k`` with ``C_kappa = 0``."""
    kappa = len(C)
    return tuple(
        (k + 1) * C[k + 1] + lam * C[k] if k + 1 < kappa else lam * C[k] for k in range(kappa)
    )


def _component_moment(comp_steps: list[tuple[float, float]], lam: complex, j: int) -> complex:
    """``int x^j exp(-lam x) s(x) dx`` for the step part ``s`` of one component."""
    if not comp_steps:
        return 0j
    steps = sorted(comp_steps)
    total = 0j
    level = 0.0
    for (a, jump), nxt in zip(steps, [*steps[1:], None], strict=True):
        level += jump
        if level == 0.0:
            continue
        if nxt is None:
            total += level * tail_xk_exp(j, lam, a)
        elif nxt[0] > a:
            total += level * integrate_xk_exp(j, -lam, a, nxt[0])
    return total


def char_moments(f: Characteristic, lam: complex, jmax: int) -> np.ndarray:
    """Moments ``m_j(lambda) = int_0^inf f(x) x^j exp(-lambda x) dx``, j = 0..jmax.

    Args:
        f: Characteristic.
        lam: Complex exponent with ``Re lam`` above the exponential order of ``f``.
        jmax: Highest moment.

    Returns:
        Array of shape ``(jmax + 1, p)``.

    Raises:
        DivergentMomentError: If the integral does not converge.
    """
    lam = complex(lam)
    order = exponential_order(f)
    if lam.real <= order:
        raise DivergentMomentError(
            f"moments diverge at Re(lambda)={lam.real:g}; exponential order is {order:g}"
        )
    out = np.zeros((jmax + 1, f.p), dtype=complex)
    for i, comp in enumerate(f.components):
        steps = [(s.location, s.jump) for s in comp.steps]
        for j in range(jmax + 1):
            value = _component_moment(steps, lam, j)
            for g in comp.functions:
                if g.coefficient != 0.0:
                    n = g.power + j
                    value += g.coefficient * factorial(n) / (lam + g.rate) ** (n + 1)
            out[j, i] = value
    return out


def b_vectors_from_B(
    B: Sequence[np.ndarray], f: Characteristic, lam: complex
) -> tuple[np.ndarray, ...]:
    """``b_j = sum_{k>=j} B_k binom(k, j) (-1)^(k-j) m_{k-j}(lambda)``."""
    kappa = len(B)
    m = char_moments(f, lam, kappa - 1) if kappa else np.zeros((0, f.p))
    return tuple(
        sum(B[k] @ m[k - j] * comb(k, j) * (-1) ** (k - j) for k in range(j, kappa))
        for j in range(kappa)
    )


def b_vector_coeffs(
    coefficients: ExpansionCoefficients, f: Characteristic, lam: complex
) -> tuple[np.ndarray, ...]:
    """Vectors ``b_{lambda,0..k-1,f}`` of the characteristic expansion.

    Raises:
        KeyError: If ``lam`` is not among the coefficient roots.
        DivergentMomentError: If the moments of ``f`` diverge at ``lam``.
    """
    return b_vectors_from_B(coefficients.for_root(lam).B, f, lam)


def _lattice_root_radius(L: LatticeMeasureMatrix, zeta: complex) -> float:
    others = [z for z, _ in lattice_polynomial_roots(L)]
    return _admissible_radius(zeta, others, abs(zeta))


def lattice_laurent(
    L: LatticeMeasureMatrix,
    root: RootRecord,
    tolerances: Tolerances | None = None,
    verify: bool = False,
) -> LaurentData:
    """Lattice matrices ``B_{lambda,1..m}``: coefficients of ``(I - G mu(z))^-1`` at zeta.

    Args:
        L: Lattice measure matrix.
        root: Root from ``locate_lattice_roots``.
        tolerances: Numerical tolerances.
        verify: Cross-check the pole order against the embedded atom matrix.

    Raises:
        RadiusError: If no admissible radius exists.
        QuadratureError: If node doubling exceeds the budget.
        SingularContourError: If the resolvent is singular at a node.
        LaurentMismatchError: If ``verify`` and the two representations disagree.
    """
    tol = tolerances or Tolerances()
    kernel = compile_generating_kernel(L)
    zeta = complex(root.zeta) if root.zeta is not None else complex(np.exp(-root.lam))
    radius = _lattice_root_radius(L, zeta)
    radius = _verified_radius(kernel.det, zeta, radius, root.det_multiplicity, tol)
    data = _contour_coefficients(
        kernel, complex(root.lam), zeta, radius, root.det_multiplicity, tol
    )
    if verify:
        lattice_bridge_check(L, root, data, tol)
    return data


def lattice_bridge_check(
    L: LatticeMeasureMatrix,
    root: RootRecord,
    lattice_data: LaurentData,
    tolerances: Tolerances | None = None,
) -> LaurentData:
    """Compare lattice Laurent data with the embedded non-lattice representation.

    With ``zeta = exp(-h lambda')``, the leading coefficients satisfy
    ``B_kappa = A_kappa (-h zeta)^kappa`` and the pole orders agree.

    Returns:
        Laurent data of the embedded atom matrix at ``lambda' = lambda / h``.

    Raises:
        LaurentMismatchError: If pole orders or leading coefficients disagree.
    """
    tol = tolerances or Tolerances()
    h = L.span
    zeta = complex(lattice_data.center)
    lam = complex(root.lam) / h
    period = 2j * pi / h
    neighbours = [lam + period, lam - period]
    for z, _ in lattice_polynomial_roots(L):
        if z != 0 and abs(z - zeta) > 0.0:
            other = complex(-np.log(z)) / h
            neighbours.extend([other, other + period, other - period])
    embedded = laurent_coeffs(
        lattice_to_measure_matrix(L),
        RootRecord(lam=lam, det_multiplicity=root.det_multiplicity),
        tol,
        neighbours,
    )
    if embedded.pole_order != lattice_data.pole_order:
        raise LaurentMismatchError(
            f"pole orders differ at {root.lam}: lattice {lattice_data.pole_order}, "
            f"embedded {embedded.pole_order}"
        )
    kappa = embedded.pole_order
    expected = embedded.A[kappa - 1] * (-h * zeta) ** kappa
    actual = lattice_data.A[kappa - 1]
    scale = max(1e-300, float(inf_norm(actual)))
    if float(inf_norm(expected - actual)) > BRIDGE_TOL * scale:
        raise LaurentMismatchError(f"leading Laurent coefficients disagree at {root.lam}")
    return embedded


def _binomial_powers(d: int) -> np.ndarray:
    """Power-basis coefficients of ``binom(n + d - 1, d - 1)`` as a polynomial in ``n``."""
    if d == 1:
        return np.array([1.0])
    return np.asarray(P.polyfromroots(-np.arange(1.0, d))) / factorial(d - 1)


def _lattice_char_series(f: LatticeCharacteristic, zeta: complex, lmax: int) -> np.ndarray:
    """Taylor coefficients ``f_l = sum_m f(m) binom(m, l) zeta^(m-l)``, shape (lmax+1, p)."""
    out = np.zeros((lmax + 1, f.p), dtype=complex)
    for i, seq in enumerate(f.values):
        for m, value in enumerate(seq):
            if value == 0.0:
                continue
            for ell in range(min(m, lmax) + 1):
                out[ell, i] += value * comb(m, ell) * zeta ** (m - ell)
    return out


def _lattice_collect(
    principal: Sequence[np.ndarray], zeta: complex
) -> tuple[np.ndarray, ...]:
    """Collect ``sum_d P_d (-1/zeta)^d binom(n+d-1, d-1)`` by powers of ``n``."""
    kappa = len(principal)
    coeffs: list[np.ndarray] = [np.zeros_like(principal[0]) for _ in range(kappa)]
    for d in range(1, kappa + 1):
        factor = (-1.0 / zeta) ** d
        for k, c in enumerate(_binomial_powers(d)):
            coeffs[k] = coeffs[k] + principal[d - 1] * factor * c
    return tuple(coeffs)


def lattice_b_vector_coeffs(
    lattice_B: Sequence[np.ndarray], f: LatticeCharacteristic, zeta: complex
) -> tuple[np.ndarray, ...]:
    """Vectors ``b_{lambda,0..k-1,f}`` of the lattice expansion ``F(n)``.

    ``P_d = sum_{k>=d} B_k f_{k-d}`` is the ``(z - zeta)^-d`` coefficient of
    ``(I - G mu(z))^-1 f(z)``; its ``z^n`` coefficient is
    ``P_d (-e^lambda)^d binom(n+d-1, d-1) e^(lambda n)``.
    """
    kappa = len(lattice_B)
    series = _lattice_char_series(f, zeta, kappa - 1)
    principal = [
        sum(lattice_B[k - 1] @ series[k - d] for k in range(d, kappa + 1))
        for d in range(1, kappa + 1)
    ]
    return _lattice_collect(principal, zeta)


def lattice_c_coeffs(
    lattice_B: Sequence[np.ndarray], zeta: complex
) -> tuple[np.ndarray, ...]:
    """Matrices ``C_{lambda,0..k-1}`` of the lattice renewal density ``U({n})``."""
    return _lattice_collect(list(lattice_B), zeta)


def _close_conjugates(
    roots: Sequence[RootRecord], solve: Callable[[RootRecord], RootCoefficients],
    executor: Executor | None,
) -> list[RootCoefficients]:
    """Solve for upper roots only and conjugate the data for their lower partners."""
    upper = [r for r in roots if complex(r.lam).imag >= 0.0]
    solved = dict(zip([complex(r.lam) for r in upper], _map(solve, upper, executor), strict=True))
    out = []
    for r in roots:
        lam = complex(r.lam)
        if lam in solved:
            out.append(solved[lam])
            continue
        partner = min(solved, key=lambda w: abs(w - lam.conjugate()), default=None)
        if partner is not None and abs(partner - lam.conjugate()) <= 1e-12 * max(1.0, abs(lam)):
            rc = solved[partner]
            out.append(
                RootCoefficients(
                    lam=lam,
                    pole_order=rc.pole_order,
                    det_multiplicity=rc.det_multiplicity,
                    C=tuple(np.conj(c) for c in rc.C),
                    B=tuple(np.conj(b) for b in rc.B),
                    lattice_B=tuple(np.conj(b) for b in rc.lattice_B),
                    b=tuple(np.conj(b) for b in rc.b),
                )
            )
        else:
            out.append(solve(r))
    return out


def expansion_coefficients(
    M: MeasureMatrix,
    roots: Sequence[RootRecord],
    tolerances: Tolerances | None = None,
    executor: Executor | None = None,
    f: Characteristic | None = None,
) -> ExpansionCoefficients:
    """Laurent data and ``C``, ``B`` (and ``b`` for ``f``) for every root.

    Raises:
        UnsupportedRootError: If a root has ``Re lambda <= 0``.
    """
    tol = tolerances or Tolerances()
    all_lams = [complex(r.lam) for r in roots]

    def solve(root: RootRecord) -> RootCoefficients:
        lam = complex(root.lam)
        ld = laurent_coeffs(M, root, tol, [w for w in all_lams if w != lam])
        C = c_coeffs(ld)
        B = b_coeffs(C, lam)
        b = b_vectors_from_B(B, f, lam) if f is not None else ()
        return RootCoefficients(
            lam=lam,
            pole_order=ld.pole_order,
            det_multiplicity=root.det_multiplicity,
            C=C,
            B=B,
            b=b,
        )

    result = ExpansionCoefficients(roots=tuple(_close_conjugates(roots, solve, executor)))
    logger.info("expansion coefficients for %d root(s)", len(result.roots))
    return result


def lattice_expansion_coefficients(
    L: LatticeMeasureMatrix,
    roots: Sequence[RootRecord],
    tolerances: Tolerances | None = None,
    executor: Executor | None = None,
    f: LatticeCharacteristic | None = None,
    verify: bool = False,
) -> ExpansionCoefficients:
    """Lattice ``B``, renewal-density ``C`` (and ``b`` for ``f``) for every lattice root."""
    tol = tolerances or Tolerances()

    def solve(root: RootRecord) -> RootCoefficients:
        ld = lattice_laurent(L, root, tol, verify=verify)
        lam = complex(root.lam)
        zeta = complex(ld.center)
        lattice_B = ld.principal
        b = lattice_b_vector_coeffs(lattice_B, f, zeta) if f is not None else ()
        return RootCoefficients(
            lam=lam,
            pole_order=ld.pole_order,
            det_multiplicity=root.det_multiplicity,
            C=lattice_c_coeffs(lattice_B, zeta),
            lattice_B=lattice_B,
            b=b,
        )

    return ExpansionCoefficients(roots=tuple(_close_conjugates(roots, solve, executor)))


def with_pole_orders(
    roots: Sequence[RootRecord], coefficients: ExpansionCoefficients
) -> list[RootRecord]:
    """Copy of ``roots`` with ``pole_order`` filled in where coefficients exist."""
    out = []
    for r in roots:
        try:
            order: int | None = coefficients.for_root(complex(r.lam)).pole_order
        except KeyError:
            order = r.pole_order
        out.append(r.model_copy(update={"pole_order": order}))
    return out
