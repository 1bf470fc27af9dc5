"""Operations on the measure family.

- total_mass, instant_mass_matrix, singular_part
- integrate_xk_exp: closed form of ``int_a^b x^k exp(lam x) dx``
- characteristic utilities: evaluation, exponential and variation orders,
  variation moment
- lattice helpers: support gcd and embedding as an atom matrix
"""

import logging
from math import factorial, gcd

import numpy as np
import scipy.optimize
from numpy.polynomial import Polynomial

from markov_renewal.exceptions import DivergentMomentError
from markov_renewal.models.measure import (
    AtomTerm,
    Characteristic,
    CharacteristicComponent,
    ExpPolyTerm,
    LatticeMeasureMatrix,
    MeasureMatrix,
    ScalarMeasure,
)

logger = logging.getLogger(__name__)

# Below this |lam * t| the power series is used; the closed form cancels there.
_SERIES_RADIUS = 2.0
_SERIES_TERMS = 60
# Grid points used to bracket sign changes of a derivative with several rates.
_SIGN_SAMPLES = 4096


def _primitive_xk_exp(k: int, lam: complex, t: float) -> complex:
    """``int_0^t x^k exp(lam x) dx`` for ``t >= 0``."""
    if t == 0.0:
        return 0j
    z = lam * t
    if abs(z) <= _SERIES_RADIUS:
        # sum_n lam^n t^(n+k+1) / (n! (n+k+1))
        total = 0j
        term = complex(t ** (k + 1))
        for n in range(_SERIES_TERMS):
            contrib = term / (n + k + 1)
            total += contrib
            if abs(contrib) <= 1e-18 * abs(total):
                break
            term *= z / (n + 1)
        return total
    partial = 0j
    power = 1 + 0j
    for j in range(k + 1):
        partial += power / factorial(j)
        power *= -z
    return complex((-1) ** (k + 1) * factorial(k) / lam ** (k + 1) * (1 - np.exp(z) * partial))


def integrate_xk_exp(k: int, lam: complex, a: float, b: float) -> complex:
    """Closed form of ``int_a^b x^k exp(lam x) dx``.

    Uses ``(-1)^(k+1) k! / lam^(k+1) * (1 - exp(lam t) sum_{j<=k} (-lam t)^j / j!)``
    and a power series when ``|lam t|`` is small, including ``lam = 0``.

    Args:
        k: Nonnegative integer power.
        lam: Complex exponent.
        a: Lower limit, ``a >= 0``.
        b: Upper limit, ``b >= a``.

    Returns:
        The integral as a complex number.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if a < 0 or b < a:
        raise ValueError("limits must satisfy 0 <= a <= b")
    return _primitive_xk_exp(k, complex(lam), b) - _primitive_xk_exp(k, complex(lam), a)


def tail_xk_exp(k: int, lam: complex, a: float) -> complex:
    """``int_a^inf x^k exp(-lam x) dx`` for ``Re lam > 0``."""
    lam = complex(lam)
    if lam.real <= 0:
        raise DivergentMomentError(f"tail integral diverges for Re(lambda)={lam.real:g} <= 0")
    head = sum(factorial(k) / factorial(i) * a**i / lam ** (k - i + 1) for i in range(k + 1))
    return complex(np.exp(-lam * a) * head)


def density_mass(term: ExpPolyTerm, t: float) -> float:
    """Mass of a density term on ``[0, t]``."""
    return term.coefficient * integrate_xk_exp(term.power, -term.rate, 0.0, t).real


def total_mass(m: ScalarMeasure, t: float) -> float:
    """Return ``m([0, t])``.

    Args:
        m: Scalar measure.
        t: Nonnegative time.

    Returns:
        Total mass of atoms at or before ``t`` plus the integrated densities.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    atoms = sum(a.weight for a in m.atoms if a.location <= t)
    return float(atoms + sum(density_mass(d, t) for d in m.densities))


def total_mass_matrix(M: MeasureMatrix, t: float) -> np.ndarray:
    """Entry-wise ``mu^{i,j}([0, t])``."""
    return np.array([[total_mass(m, t) for m in row] for row in M.entries])


def instant_mass_matrix(M: MeasureMatrix) -> np.ndarray:
    """Return ``mu(0)``, the matrix of atom weights at location 0."""
    return np.array(
        [[sum(a.weight for a in m.atoms if a.location == 0.0) for m in row] for row in M.entries],
        dtype=float,
    )


def singular_part(M: MeasureMatrix) -> MeasureMatrix:
    """Return the atomic part of every entry; for this family it is the singular part."""
    return MeasureMatrix(
        entries=tuple(tuple(ScalarMeasure(atoms=m.atoms) for m in row) for row in M.entries)
    )


def incidence_pattern(M: MeasureMatrix) -> np.ndarray:
    """Boolean pattern of entries with positive total mass."""
    return np.array([[not m.is_zero for m in row] for row in M.entries], dtype=bool)


def evaluate_component(comp: CharacteristicComponent, t: float) -> float:
    """Value of one characteristic component at ``t`` (zero for ``t < 0``)."""
    if t < 0:
        return 0.0
    value = sum(s.jump for s in comp.steps if s.location <= t)
    for g in comp.functions:
        value += g.coefficient * t**g.power * np.exp(-g.rate * t)
    return float(value)


def evaluate_characteristic(f: Characteristic, t: float) -> np.ndarray:
    """Vector ``f(t)``."""
    return np.array([evaluate_component(c, t) for c in f.components])


def _step_tail(comp: CharacteristicComponent) -> float:
    return float(sum(s.jump for s in comp.steps))


def exponential_order(f: Characteristic) -> float:
    """Abscissa beyond which ``int f(x) x^j exp(-lam x) dx`` converges.

    Steps with a nonzero total jump behave like a constant at infinity, giving
    order 0. Function terms contribute ``-beta``.
    """
    order = float("-inf")
    for comp in f.components:
        if abs(_step_tail(comp)) > 0.0:
            order = max(order, 0.0)
        for g in comp.functions:
            if g.coefficient != 0.0:
                order = max(order, -g.rate)
    return order


def variation_order(f: Characteristic) -> float:
    """Abscissa beyond which ``int exp(-theta x) Vf(x) dx`` converges.

    Any nonzero term has a nondecreasing variation, so the order is at least 0.
    """
    order = float("-inf")
    for comp in f.components:
        if any(s.jump != 0.0 for s in comp.steps):
            order = max(order, 0.0)
        for g in comp.functions:
            if g.coefficient != 0.0:
                order = max(order, 0.0, -g.rate)
    return order


def _derivative_groups(comp: CharacteristicComponent) -> dict[float, Polynomial]:
    """``g'(x) = sum_beta P_beta(x) exp(-beta x)`` for the function part ``g`` of ``comp``."""
    groups: dict[float, Polynomial] = {}
    for g in comp.functions:
        coef = np.zeros(g.power + 1)
        coef[g.power] -= g.coefficient * g.rate
        if g.power >= 1:
            coef[g.power - 1] += g.coefficient * g.power
        groups[g.rate] = groups.get(g.rate, Polynomial([0.0])) + Polynomial(coef)
    return {beta: P.trim() for beta, P in groups.items() if np.any(P.trim().coef != 0.0)}


def _derivative_value(groups: dict[float, Polynomial], x: np.ndarray) -> np.ndarray:
    return np.asarray(sum(P(x) * np.exp(-beta * x) for beta, P in groups.items()))


def _constant_sign_horizon(groups: dict[float, Polynomial]) -> float:
    """``X`` such that the slowest-decaying group fixes the sign of ``g'`` on ``[X, inf)``.

    With ``P_0`` the group of smallest rate, ``|P_0(x)| >= |a_0| x^d_0 / 2`` for
    ``x >= max(1, 2 S_0)``; ``X`` is then doubled until every other group is
    below ``1 / n`` of that bound, each ratio being decreasing past its turning point.
    """
    beta0 = min(groups)
    coef0 = groups[beta0].coef
    d0, a0 = len(coef0) - 1, abs(coef0[-1])
    X = max(1.0, 2.0 * float(np.sum(np.abs(coef0[:-1]))) / a0)
    others = [
        (beta - beta0, len(P.coef) - 1, float(np.sum(np.abs(P.coef))))
        for beta, P in groups.items()
        if beta != beta0
    ]
    if not others:
        return X
    for gap, d, bound in others:
        X = max(X, (d - d0) / gap)

    def dominated(x: float) -> bool:
        limit = -np.log(len(others))
        return all(
            np.log(2.0 * bound / a0) + (d - d0) * np.log(x) - gap * x < limit
            for gap, d, bound in others
        )

    while not dominated(X):
        X *= 2.0
    return X


def _split_points(groups: dict[float, Polynomial]) -> list[float]:
    """Points in ``(0, inf)`` between which ``g'`` keeps one sign.

    Extra points are harmless; a single group uses the real roots of its
    polynomial, several groups are bracketed on a grid up to the horizon.
    """
    if not groups:
        return []
    if len(groups) == 1:
        (P,) = groups.values()
        roots = P.roots() if len(P.coef) > 1 else np.array([])
        real = [
            float(r.real) for r in roots if abs(r.imag) <= 1e-9 * max(1.0, abs(r)) and r.real > 0
        ]
        return sorted(set(real))
    X = _constant_sign_horizon(groups)
    grid = np.linspace(0.0, X, _SIGN_SAMPLES + 1)
    values = _derivative_value(groups, grid)
    points = [float(x) for x, v in zip(grid[1:], values[1:], strict=True) if v == 0.0]
    for k in np.flatnonzero(values[:-1] * values[1:] < 0.0):
        root = scipy.optimize.brentq(
            lambda x: float(_derivative_value(groups, np.array([x]))[0]), grid[k], grid[k + 1]
        )
        points.append(float(root))
    return sorted(set(points))


def _signed_moment(
    groups: dict[float, Polynomial], theta: float, a: float, b: float | None
) -> float:
    """``int_a^b exp(-theta x) g'(x) dx``; ``b = None`` integrates to infinity."""
    total = 0.0
    for beta, P in groups.items():
        lam = theta + beta
        for power, weight in enumerate(P.coef):
            if weight == 0.0:
                continue
            if b is None:
                total += weight * tail_xk_exp(power, lam, a).real
            else:
                total += weight * integrate_xk_exp(power, -lam, a, b).real
    return total


def _jump_transform(comp: CharacteristicComponent, theta: float) -> float:
    """``sum_s exp(-theta s) |f(s) - f(s-)|`` over the jump points of ``comp``."""
    jumps: dict[float, float] = {}
    for s in comp.steps:
        jumps[s.location] = jumps.get(s.location, 0.0) + s.jump
    jumps[0.0] = jumps.get(0.0, 0.0) + sum(g.coefficient for g in comp.functions if g.power == 0)
    return float(sum(abs(j) * np.exp(-theta * s) for s, j in jumps.items()))


def variation_moment(f: Characteristic, theta: float) -> np.ndarray:
    """Closed-form ``int_0^inf exp(-theta x) Vf_i(x) dx`` per component.

    Uses ``int exp(-theta x) Vf(x) dx = (1/theta) int exp(-theta y) |df|(dy)``.
    Jumps at a common location are merged. The absolutely continuous part is
    split at the sign changes of ``f'`` and every piece is integrated in closed form.

    Raises:
        DivergentMomentError: If ``theta`` does not exceed ``variation_order(f)``.
    """
    if theta <= variation_order(f):
        raise DivergentMomentError(
            f"variation moment diverges at theta={theta:g}; order is {variation_order(f):g}"
        )
    out = np.zeros(f.p)
    for i, comp in enumerate(f.components):
        weight = _jump_transform(comp, theta)
        groups = _derivative_groups(comp)
        if groups:
            edges = [0.0, *_split_points(groups)]
            for a, b in zip(edges, [*edges[1:], None], strict=True):
                weight += abs(_signed_moment(groups, theta, a, b))
        out[i] = weight / theta if weight else 0.0
    return out


def lattice_weight_array(L: LatticeMeasureMatrix) -> np.ndarray:
    """Weights as an array of shape ``(max_index + 1, p, p)``."""
    W = np.zeros((L.max_index + 1, L.p, L.p))
    for i, row in enumerate(L.weights):
        for j, vec in enumerate(row):
            W[: len(vec), i, j] = vec
    return W


def lattice_span_gcd(L: LatticeMeasureMatrix) -> int:
    """Greatest common divisor of the positive-weight indices ``n >= 1``; 0 if none."""
    W = lattice_weight_array(L)
    support = [n for n in range(1, W.shape[0]) if np.any(W[n] > 0.0)]
    g = 0
    for n in support:
        g = gcd(g, n)
    return g


def lattice_to_measure_matrix(L: LatticeMeasureMatrix) -> MeasureMatrix:
    """Embed a lattice matrix as atoms at ``n * h``."""
    return MeasureMatrix(
        entries=tuple(
            tuple(
                ScalarMeasure(
                    atoms=tuple(
                        AtomTerm(location=n * L.span, weight=w) for n, w in enumerate(vec) if w > 0
                    )
                )
                for vec in row
            )
            for row in L.weights
        )
    )
