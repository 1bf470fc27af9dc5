"""Numerical checks of the spread-out hypotheses behind the non-lattice theorems.

- check_B: some convolution power of the singular part has transform norm < 1
- check_E: the resolvent norm stays bounded along the line ``Re z = vartheta``
- check_strip_empty: no characteristic root in a vertical strip

Verdicts for (E) are scanned-band verdicts; the witness always records the band.
"""

import logging

import numpy as np

from markov_renewal.analysis.measures import singular_part
from markov_renewal.analysis.roots import count_zeros_nudged
from markov_renewal.analysis.transform import compile_kernel, inf_norm
from markov_renewal.exceptions import DomainError, RootOnLineError
from markov_renewal.models.config import Tolerances
from markov_renewal.models.measure import MeasureMatrix
from markov_renewal.models.results import ConditionId, ConditionReport, Rectangle, Verdict

logger = logging.getLogger(__name__)

LINE_HALF_WIDTH = 1e-6
MAX_REFINEMENTS = 6
STABILITY = 0.05
# Relative rise of the norm over the last tenth of the band that counts as growth.
TREND_TOL = 1e-2


def check_B(M: MeasureMatrix, vartheta: float, m_max: int = 8) -> ConditionReport:
    """Condition (B): ``||L((mu^{*m})_s)(vartheta)|| < 1`` for some ``m <= m_max``.

    For atoms plus densities the singular part of ``mu^{*m}`` is the m-th
    convolution power of the atomic part, whose transform is the matrix power.

    Raises:
        DomainError: If ``vartheta`` is not above the domain abscissa.
    """
    abscissa = compile_kernel(M).abscissa
    if vartheta <= abscissa:
        raise DomainError(f"vartheta={vartheta:g} is not above the abscissa {abscissa:g}")
    atomic = compile_kernel(singular_part(M)).values(np.array([vartheta]))[0].real
    power = np.eye(M.p)
    norms: list[float] = []
    for m in range(1, m_max + 1):
        power = power @ atomic
        norms.append(float(inf_norm(power)))
        if norms[-1] < 1.0:
            return ConditionReport(
                condition=ConditionId.B,
                verdict=Verdict.PASS,
                witness={"vartheta": vartheta, "m": m, "norms": norms},
            )
    return ConditionReport(
        condition=ConditionId.B,
        verdict=Verdict.FAIL,
        witness={"vartheta": vartheta, "m": m_max, "norms": norms},
    )


def _norm_scan(M: MeasureMatrix, vartheta: float, etas: np.ndarray) -> np.ndarray:
    kernel = compile_kernel(M)
    z = vartheta + 1j * etas
    try:
        return np.asarray(inf_norm(kernel.resolvent(z)))
    except np.linalg.LinAlgError:
        return np.full(etas.shape, np.inf)


def _growing(norms: np.ndarray) -> bool:
    n = norms.size
    if int(np.argmax(norms)) < n - max(1, n // 20):
        return False
    tail = norms[n - max(2, n // 10):]
    return bool(tail[-1] > tail[0] * (1.0 + TREND_TOL))


def check_E(
    M: MeasureMatrix,
    vartheta: float,
    eta_max: float = 50.0,
    n_grid: int = 1001,
    tolerances: Tolerances | None = None,
) -> ConditionReport:
    """Condition (E): ``sup_eta ||(I - L mu(vartheta + i eta))^-1|| < inf`` within the band.

    The grid over ``[0, eta_max]`` is refined (``n -> 2n - 1``) until two
    successive suprema agree within 5 %.

    Args:
        M: Measure matrix.
        vartheta: Abscissa of the scanned line.
        eta_max: Upper end of the scanned band.
        n_grid: Initial number of grid points.
        tolerances: Numerical tolerances for the line root count.

    Returns:
        Pass if the supremum is finite and stable, fail if it is infinite,
        inconclusive if unstable or still growing at ``eta_max``.

    Raises:
        RootOnLineError: If a root lies on the line within ``|Im| <= eta_max``.
    """
    half = LINE_HALF_WIDTH * max(1.0, abs(vartheta))
    count, _ = count_zeros_nudged(
        M, Rectangle(vartheta - half, vartheta + half, -eta_max, eta_max), tolerances
    )
    if count:
        raise RootOnLineError(f"{count} root(s) on the line Re z = {vartheta:g}")

    n = n_grid
    etas = np.linspace(0.0, eta_max, n)
    norms = _norm_scan(M, vartheta, etas)
    sup = float(np.max(norms))
    witness: dict[str, object] = {"vartheta": vartheta, "eta_max": eta_max}
    verdict = Verdict.INCONCLUSIVE
    for _ in range(MAX_REFINEMENTS):
        if not np.isfinite(sup):
            verdict = Verdict.FAIL
            break
        n = 2 * n - 1
        etas = np.linspace(0.0, eta_max, n)
        norms = _norm_scan(M, vartheta, etas)
        refined = float(np.max(norms))
        stable = np.isfinite(refined) and abs(refined - sup) <= STABILITY * sup
        sup = refined
        if stable:
            verdict = Verdict.PASS
            break
    else:
        if not np.isfinite(sup):
            verdict = Verdict.FAIL
    if verdict == Verdict.PASS and _growing(norms):
        verdict = Verdict.INCONCLUSIVE
    witness.update(
        {
            "supremum": sup,
            "argmax_eta": float(etas[int(np.argmax(norms))]),
            "n_grid": n,
            "eta": etas[:: max(1, n // 50)].tolist(),
            "norms": norms[:: max(1, n // 50)].tolist(),
        }
    )
    if verdict != Verdict.PASS:
        logger.warning("condition (E) at vartheta=%g: %s", vartheta, verdict.value)
    return ConditionReport(condition=ConditionId.E, verdict=verdict, witness=witness)


def check_strip_empty(
    M: MeasureMatrix,
    theta1: float,
    theta2: float,
    im_max: float,
    tolerances: Tolerances | None = None,
) -> ConditionReport:
    """Pass iff no root lies in ``(theta1, theta2] x [-im_max, im_max]``.

    Raises:
        ValueError: If ``theta1 >= theta2``.
        BoundaryRootError: If the strip boundary cannot be cleared of zeros.
    """
    if theta1 >= theta2:
        raise ValueError("theta1 must be smaller than theta2")
    count, rect = count_zeros_nudged(M, Rectangle(theta1, theta2, -im_max, im_max), tolerances)
    return ConditionReport(
        condition=ConditionId.STRIP,
        verdict=Verdict.PASS if count == 0 else Verdict.FAIL,
        witness={"count": count, "rectangle": list(rect), "theta1": theta1, "theta2": theta2},
    )
