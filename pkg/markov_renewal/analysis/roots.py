"""Roots of the characteristic equation ``det(I - L mu(z)) = 0``.

Non-lattice roots are counted by the argument principle (phase tracking along
rectangle edges) and isolated by subdividing the search rectangle. Inside a
box with few zeros, the power sums of the zeros are read off contour
integrals of ``det'/det``, which separates clusters and yields multiple roots
to full accuracy without Newton's slow convergence. Simple roots are polished
by damped Newton iteration.

Lattice roots are the zeros of the polynomial ``q(z) = det(I - G mu(z))``.
"""

import logging
from collections.abc import Callable, Iterable
from concurrent.futures import Executor
from functools import lru_cache
from math import pi

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as P

from markov_renewal.analysis.measures import lattice_span_gcd, lattice_weight_array
from markov_renewal.analysis.transform import TransformKernel, compile_kernel
from markov_renewal.exceptions import (
    BoundaryRootError,
    ConvergenceError,
    DegenerateError,
    DomainError,
    LatticeSpanError,
    MaxDepthError,
    QuadratureError,
)
from markov_renewal.models.config import Tolerances
from markov_renewal.models.measure import LatticeMeasureMatrix, MeasureMatrix
from markov_renewal.models.results import Rectangle, RootRecord, SearchRegion

logger = logging.getLogger(__name__)

START_NODES = 64
NUDGE_ATTEMPTS = 8
NUDGE_SIZE = 1e-6
NUDGE_SEED = 20240917
CUT_FRACTIONS = (0.5, 0.47, 0.53, 0.41, 0.59, 0.37, 0.63, 0.29, 0.71)
# Boxes with more zeros than this are subdivided before moments are used.
MAX_CLUSTER = 4
GROUP_SPREAD = 0.05
# A single cluster inside a disk this small (relative) is reported as one multiple root.
MIN_DISK = 1e-4
NEWTON_STEPS = 50
# Smallest parameter step of phase tracking before a zero counts as on the path.
MIN_STEP = 1e-15

_Root = tuple[complex, int]


def det_char(M: MeasureMatrix, z: complex) -> complex:
    """Exact determinant of ``I - L mu(z)``.

    Raises:
        DomainError: If ``Re z`` does not exceed the domain abscissa.
    """
    return complex(compile_kernel(M).det(np.array([z]))[0])


def _phase_change(
    det: Callable[[np.ndarray], np.ndarray],
    path: Callable[[np.ndarray], np.ndarray],
    label: str,
    tol: Tolerances,
) -> float:
    """Total change of ``arg det`` along ``path(s)``, ``s`` in ``[0, 1]``.

    Starts from ``START_NODES`` uniform samples and bisects every sub-interval
    whose phase step is ``pi / 2`` or more, so zeros close to the path only
    refine the sampling locally.
    """
    s = np.linspace(0.0, 1.0, START_NODES + 1)
    d = det(path(s))
    peak = float(np.max(np.abs(d)))
    if float(np.min(np.abs(d))) < tol.boundary_floor * (1.0 + peak):
        raise BoundaryRootError(f"zero of det on {label}")
    total = 0.0
    pending = []
    for k in range(START_NODES):
        step = float(np.angle(d[k + 1] / d[k]))
        if abs(step) < pi / 2:
            total += step
        else:
            pending.append((s[k], s[k + 1], d[k], d[k + 1]))
    evaluations = START_NODES + 1
    while pending:
        evaluations += len(pending)
        if evaluations > tol.max_nodes:
            raise QuadratureError(f"phase tracking unresolved on {label}", nodes=evaluations)
        mids = np.array([0.5 * (a + b) for a, b, _, _ in pending])
        dm = det(path(mids))
        peak = max(peak, float(np.max(np.abs(dm))))
        if float(np.min(np.abs(dm))) < tol.boundary_floor * (1.0 + peak):
            raise BoundaryRootError(f"zero of det on {label}")
        refined = []
        for (a, b, da, db), m, dmid in zip(pending, mids, dm, strict=True):
            if b - a < MIN_STEP:
                raise BoundaryRootError(f"zero of det on {label}")
            for lo, hi, dlo, dhi in ((a, m, da, dmid), (m, b, dmid, db)):
                step = float(np.angle(dhi / dlo))
                if abs(step) < pi / 2:
                    total += step
                else:
                    refined.append((lo, hi, dlo, dhi))
        pending = refined
    return total


def disk_zero_count(
    det: Callable[[np.ndarray], np.ndarray],
    center: complex,
    radius: float,
    tolerances: Tolerances | None = None,
) -> int:
    """Winding number of ``det`` around the circle ``|z - center| = radius``.

    Args:
        det: Vectorised determinant, analytic on the closed disk.
        center: Circle center.
        radius: Circle radius.
        tolerances: Numerical tolerances.

    Raises:
        BoundaryRootError: If ``det`` vanishes on the circle.
        QuadratureError: If phase tracking exceeds the node budget.
    """

    def circle(s: np.ndarray) -> np.ndarray:
        return center + radius * np.exp(2j * pi * s)

    label = f"circle |z - {center}| = {radius:g}"
    total = _phase_change(det, circle, label, tolerances or Tolerances())
    return round(total / (2 * pi))


def _corners(rect: Rectangle) -> list[complex]:
    return [
        complex(rect.re_lo, rect.im_lo),
        complex(rect.re_hi, rect.im_lo),
        complex(rect.re_hi, rect.im_hi),
        complex(rect.re_lo, rect.im_hi),
    ]


def _count(kernel: TransformKernel, rect: Rectangle, tol: Tolerances) -> int:
    if rect.re_lo <= kernel.abscissa:
        raise DomainError(
            f"rectangle edge Re z = {rect.re_lo:g} is not above the abscissa {kernel.abscissa:g}"
        )
    c = _corners(rect)
    total = 0.0
    for k in range(4):
        a, b = c[k], c[(k + 1) % 4]

        def edge(s: np.ndarray, a: complex = a, b: complex = b) -> np.ndarray:
            return a + (b - a) * s

        total += _phase_change(kernel.det, edge, f"segment {a} -> {b}", tol)
    winding = total / (2 * pi)
    count = round(winding)
    if abs(winding - count) > 0.05 or count < 0:  # noqa: PLR2004
        raise QuadratureError(f"non-integer winding number {winding:.6g}")
    return int(count)


def count_zeros(
    M: MeasureMatrix, region: Rectangle | SearchRegion, tolerances: Tolerances | None = None
) -> int:
    """Number of zeros of ``det(I - L mu)`` inside a rectangle, with multiplicity.

    Args:
        M: Measure matrix.
        region: Rectangle or search region.
        tolerances: Numerical tolerances.

    Returns:
        Winding number of the determinant around the rectangle boundary.

    Raises:
        BoundaryRootError: If the determinant vanishes on the boundary.
        QuadratureError: If phase tracking exceeds the node budget.
    """
    rect = region.rectangle() if isinstance(region, SearchRegion) else region
    return _count(compile_kernel(M), rect, tolerances or Tolerances())


def _nudge(rect: Rectangle, rng: np.random.Generator, abscissa: float) -> Rectangle:
    width, height = rect.re_hi - rect.re_lo, rect.im_hi - rect.im_lo
    u = rng.uniform(0.5, 1.5, size=4) * NUDGE_SIZE
    re_lo = rect.re_lo - u[0] * width
    if re_lo <= abscissa:
        re_lo = rect.re_lo + u[0] * width
    return Rectangle(re_lo, rect.re_hi + u[1] * width, rect.im_lo - u[2] * height,
                     rect.im_hi + u[3] * height)


def count_zeros_nudged(
    M: MeasureMatrix, rect: Rectangle, tolerances: Tolerances | None = None
) -> tuple[int, Rectangle]:
    """Count zeros, expanding the rectangle slightly when a zero sits on its boundary.

    Returns:
        The count and the rectangle it refers to.

    Raises:
        BoundaryRootError: After ``NUDGE_ATTEMPTS`` failed expansions.
    """
    tol = tolerances or Tolerances()
    kernel = compile_kernel(M)
    rng = np.random.default_rng(NUDGE_SEED)
    for attempt in range(NUDGE_ATTEMPTS + 1):
        try:
            return _count(kernel, rect, tol), rect
        except BoundaryRootError:
            if attempt == NUDGE_ATTEMPTS:
                break
            rect = _nudge(rect, rng, kernel.abscissa)
            logger.debug("zero on contour, nudged rectangle to %s", rect)
    raise BoundaryRootError("zero remains on the contour after nudging", attempts=NUDGE_ATTEMPTS)


def _power_sums_from_roots(s: np.ndarray) -> np.ndarray:
    """Roots of the monic polynomial whose root power sums are ``s[1..c]``."""
    c = len(s) - 1
    e = np.zeros(c + 1, dtype=complex)
    e[0] = 1.0
    for k in range(1, c + 1):
        e[k] = sum((-1) ** (i - 1) * e[k - i] * s[i] for i in range(1, k + 1)) / k
    coeffs = np.array([(-1) ** k * e[k] for k in range(c + 1)])
    return np.roots(coeffs) if c > 0 else np.array([], dtype=complex)


def _rect_moments(
    kernel: TransformKernel, rect: Rectangle, count: int, tol: Tolerances
) -> np.ndarray | None:
    """Power sums ``s_k = sum w_i^k``, ``w = (z - center) / half_diagonal``, k = 0..count.

    Gauss-Legendre per edge with node doubling; None if not converged.
    """
    center, scale = rect.center, rect.half_diagonal
    c = _corners(rect)
    previous: np.ndarray | None = None
    n = 32
    while n <= 1024:  # noqa: PLR2004
        x, wts = np.polynomial.legendre.leggauss(n)
        s = np.zeros(count + 1, dtype=complex)
        for k in range(4):
            a, b = c[k], c[(k + 1) % 4]
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            z = mid + half * x
            g = kernel.log_derivative(z)
            w = (z - center) / scale
            for j in range(count + 1):
                s[j] += np.sum(wts * w**j * g) * half
        s /= 2j * pi
        if previous is not None and np.max(np.abs(s - previous)) <= 1e-10 * max(1.0, count):
            if abs(s[0] - count) < 1e-6:  # noqa: PLR2004
                return s
            return None
        previous = s
        n *= 2
    return None


def _disk_moments(
    kernel: TransformKernel, center: complex, radius: float, count: int, tol: Tolerances
) -> np.ndarray:
    """Power sums of ``(z - center) / radius`` over zeros in a disk, k = 0..count."""
    previous: np.ndarray | None = None
    n = START_NODES
    while n <= tol.max_nodes:
        u = np.exp(2j * pi * np.arange(n) / n)
        z = center + radius * u
        d = kernel.det(z)
        if float(np.min(np.abs(d))) < tol.boundary_floor * (1.0 + float(np.max(np.abs(d)))):
            raise BoundaryRootError(f"zero on circle |z - {center}| = {radius:g}")
        g = kernel.log_derivative(z)
        s = np.array([radius * np.mean(u ** (j + 1) * g) for j in range(count + 1)])
        if previous is not None and np.max(np.abs(s - previous)) <= 1e-12 * max(1.0, count):
            return s
        previous = s
        n *= 2
    raise QuadratureError(f"disk moments did not converge around {center}", nodes=n // 2)


def _newton_polish(kernel: TransformKernel, z0: complex, radius: float) -> complex:
    """Damped Newton on ``det``; stays within ``radius`` of the start."""
    z = z0
    d = complex(kernel.det(np.array([z]))[0])
    for _ in range(NEWTON_STEPS):
        dp = complex(kernel.det_derivative(np.array([z]))[0])
        if dp == 0 or d == 0:
            return z
        step = d / dp
        damping = 1.0
        while damping > 1e-3:  # noqa: PLR2004
            candidate = z - damping * step
            if candidate.real > kernel.abscissa:
                d_new = complex(kernel.det(np.array([candidate]))[0])
                if abs(d_new) <= abs(d):
                    break
            damping *= 0.5
        else:
            return z
        if abs(candidate - z0) > radius:
            return z0
        increment = abs(candidate - z)
        z, d = candidate, d_new
        if increment < 1e-12 * max(1.0, abs(z)):  # noqa: PLR2004
            return z
    return z


def _group(points: np.ndarray, threshold: float) -> list[list[int]]:
    """Single-linkage grouping of points closer than ``threshold``."""
    groups: list[list[int]] = []
    for i, w in enumerate(points):
        hits = [g for g in groups if any(abs(w - points[j]) <= threshold for j in g)]
        merged = [i]
        for g in hits:
            merged.extend(g)
            groups.remove(g)
        groups.append(sorted(merged))
    return groups


def _resolve_disk(
    kernel: TransformKernel,
    center: complex,
    radius: float,
    count: int,
    depth: int,
    tol: Tolerances,
) -> list[_Root]:
    """Resolve ``count`` zeros known to lie near ``center`` into roots with multiplicities."""
    if depth > tol.max_depth:
        raise MaxDepthError(f"root cluster near {center} below resolution")
    radius = min(radius, 0.9 * (center.real - kernel.abscissa))
    for _ in range(12):
        try:
            s = _disk_moments(kernel, center, radius, count, tol)
        except BoundaryRootError:
            radius *= 0.77
            continue
        found = round(s[0].real)
        if found == count and abs(s[0] - count) < 1e-6:  # noqa: PLR2004
            break
        radius *= 0.5 if found > count else 1.3
        radius = min(radius, 0.9 * (center.real - kernel.abscissa))
    else:
        raise ConvergenceError(f"no disk isolates {count} zero(s) near {center}")

    mean_w = s[1] / count
    if count == 1:
        z = center + radius * mean_w
        return [(_newton_polish(kernel, z, 0.5 * radius), 1)]

    local = _power_sums_from_roots(s)
    spread = float(np.max(np.abs(local - mean_w))) * radius
    groups = _group(local, GROUP_SPREAD)
    scale = max(1.0, abs(center))
    if spread <= tol.cluster * scale or (len(groups) == 1 and radius <= MIN_DISK * scale):
        return [(center + radius * mean_w, count)]
    centers = [complex(np.mean(local[g])) for g in groups]
    roots: list[_Root] = []
    for k, (g, sub_center_w) in enumerate(zip(groups, centers, strict=True)):
        extent = float(np.max(np.abs(local[g] - sub_center_w)))
        others = [abs(sub_center_w - c) for n, c in enumerate(centers) if n != k]
        sub_radius = max(4.0 * extent, 1e-3)
        if others:
            sub_radius = min(sub_radius, 0.5 * min(others))
        roots.extend(
            _resolve_disk(
                kernel,
                center + radius * sub_center_w,
                radius * sub_radius,
                len(g),
                depth + 1,
                tol,
            )
        )
    return roots


def _resolve_box(
    kernel: TransformKernel,
    rect: Rectangle,
    count: int,
    depth: int,
    tol: Tolerances,
    mapper: Callable[[Callable[[Rectangle], int], Iterable[Rectangle]], list[int]],
) -> list[_Root]:
    if count == 0:
        return []
    if depth > tol.max_depth:
        raise MaxDepthError(f"subdivision depth {tol.max_depth} exceeded in {rect}")
    if count <= MAX_CLUSTER:
        s = _rect_moments(kernel, rect, count, tol)
        if s is not None:
            scale = rect.half_diagonal
            local = _power_sums_from_roots(s)
            groups = _group(local, GROUP_SPREAD)
            centers = [complex(np.mean(local[g])) for g in groups]
            roots: list[_Root] = []
            for k, (g, c_w) in enumerate(zip(groups, centers, strict=True)):
                extent = float(np.max(np.abs(local[g] - c_w)))
                others = [abs(c_w - o) for n, o in enumerate(centers) if n != k]
                radius_w = 0.25 if not others else min(0.25, 0.5 * min(others))
                radius_w = max(radius_w, 3.0 * extent)
                roots.extend(
                    _resolve_disk(
                        kernel, rect.center + scale * c_w, scale * radius_w, len(g), depth + 1, tol
                    )
                )
            return roots
    return [
        root
        for sub, sub_count in _subdivide(kernel, rect, count, tol, mapper)
        for root in _resolve_box(kernel, sub, sub_count, depth + 1, tol, mapper)
    ]


def _split(rect: Rectangle, fraction: float) -> list[Rectangle]:
    width, height = rect.re_hi - rect.re_lo, rect.im_hi - rect.im_lo
    re_cut = rect.re_lo + fraction * width
    im_cut = rect.im_lo + fraction * height
    if width > 2 * height:
        return [Rectangle(rect.re_lo, re_cut, rect.im_lo, rect.im_hi),
                Rectangle(re_cut, rect.re_hi, rect.im_lo, rect.im_hi)]
    if height > 2 * width:
        return [Rectangle(rect.re_lo, rect.re_hi, rect.im_lo, im_cut),
                Rectangle(rect.re_lo, rect.re_hi, im_cut, rect.im_hi)]
    return [
        Rectangle(rect.re_lo, re_cut, rect.im_lo, im_cut),
        Rectangle(re_cut, rect.re_hi, rect.im_lo, im_cut),
        Rectangle(rect.re_lo, re_cut, im_cut, rect.im_hi),
        Rectangle(re_cut, rect.re_hi, im_cut, rect.im_hi),
    ]


def _subdivide(
    kernel: TransformKernel,
    rect: Rectangle,
    count: int,
    tol: Tolerances,
    mapper: Callable[[Callable[[Rectangle], int], Iterable[Rectangle]], list[int]],
) -> list[tuple[Rectangle, int]]:
    """Split ``rect`` at the first cut fraction whose sub-counts are clean and add up."""
    for fraction in CUT_FRACTIONS:
        subs = _split(rect, fraction)
        try:
            counts = mapper(lambda r: _count(kernel, r, tol), subs)
        except BoundaryRootError:
            continue
        if sum(counts) == count:
            return list(zip(subs, counts, strict=True))
        logger.debug("sub-counts %s do not add up to %d in %s", counts, count, rect)
    raise QuadratureError(f"no clean cut found for {rect}")


def _merge(roots: list[_Root], tol: Tolerances) -> list[_Root]:
    merged: list[_Root] = []
    for z, m in sorted(roots, key=lambda r: (-r[0].real, -r[0].imag)):
        for k, (w, n) in enumerate(merged):
            if abs(z - w) <= tol.cluster * max(1.0, abs(w)):
                merged[k] = ((w * n + z * m) / (n + m), n + m)
                break
        else:
            merged.append((z, m))
    return merged


def _symmetrize(roots: list[_Root], tol: Tolerances) -> list[_Root]:
    """Snap near-real roots to the axis and replace lower roots by upper conjugates."""
    snapped = [
        (complex(z.real, 0.0) if abs(z.imag) <= tol.cluster * max(1.0, abs(z)) else z, m)
        for z, m in roots
    ]
    upper = [(z, m) for z, m in snapped if z.imag > 0]
    out = [(z, m) for z, m in snapped if z.imag >= 0]
    for z, m in snapped:
        if z.imag >= 0:
            continue
        partner = min(upper, key=lambda r: abs(r[0] - z.conjugate()), default=None)
        if partner is not None and abs(partner[0] - z.conjugate()) <= 1e-6 * max(1.0, abs(z)):
            out.append((partner[0].conjugate(), m))
        else:
            logger.warning("root %s has no conjugate partner in the region", z)
            out.append((z, m))
    return out


def _sort_key(root: RootRecord) -> tuple[float, float]:
    return (-root.lam.real, -root.lam.imag)


def locate_roots(
    M: MeasureMatrix,
    region: SearchRegion,
    tolerances: Tolerances | None = None,
    executor: Executor | None = None,
) -> list[RootRecord]:
    """Find every zero of ``det(I - L mu)`` in the search region.

    Args:
        M: Measure matrix.
        region: Search rectangle; ``re_min`` must exceed the domain abscissa.
        tolerances: Numerical tolerances.
        executor: Optional executor for counting sub-boxes concurrently.

    Returns:
        Root records sorted by decreasing real part, conjugate pairs closed.

    Raises:
        BoundaryRootError: If the region boundary cannot be cleared of zeros.
        QuadratureError: If counting or moments exceed the node budget.
        MaxDepthError: If subdivision exceeds the maximum depth.
    """
    tol = tolerances or Tolerances()
    kernel = compile_kernel(M)

    def mapper(fn: Callable[[Rectangle], int], items: Iterable[Rectangle]) -> list[int]:
        if executor is None:
            return [fn(r) for r in items]
        return list(executor.map(fn, items))

    total, rect = count_zeros_nudged(M, region.rectangle(), tol)
    logger.debug("%d zero(s) in %s", total, rect)
    roots = _symmetrize(_merge(_resolve_box(kernel, rect, total, 0, tol, mapper), tol), tol)
    if sum(m for _, m in roots) != total:
        raise ConvergenceError(
            f"resolved multiplicities {sum(m for _, m in roots)} differ from count {total}"
        )
    records = []
    for z, m in roots:
        residual = abs(complex(kernel.det(np.array([z]))[0]))
        if residual > tol.tol_det:
            raise ConvergenceError(f"root {z} has residual |det| = {residual:.3g}")
        records.append(RootRecord(lam=z, det_multiplicity=m))
    records.sort(key=_sort_key)
    logger.info("located %d root(s) in %s", len(records), region)
    return records


def _poly_det(matrix: list[list[Polynomial]]) -> Polynomial:
    """Cofactor expansion along the first row."""
    p = len(matrix)
    if p == 1:
        return matrix[0][0]
    total = Polynomial([0.0])
    for j in range(p):
        minor = [row[:j] + row[j + 1:] for row in matrix[1:]]
        term = matrix[0][j] * _poly_det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


@lru_cache(maxsize=128)
def characteristic_polynomial(L: LatticeMeasureMatrix) -> Polynomial:
    """Exact ``q(z) = det(I - G mu(z))`` with negligible leading coefficients trimmed."""
    W = lattice_weight_array(L)
    entries = [
        [Polynomial((1.0 if i == j else 0.0) - W[:, i, j]) for j in range(L.p)] for i in range(L.p)
    ]
    q = _poly_det(entries)
    scale = float(np.max(np.abs(q.coef))) if q.coef.size else 0.0
    return q.trim(tol=1e-14 * scale) if scale > 0 else q


@lru_cache(maxsize=128)
def lattice_polynomial_roots(L: LatticeMeasureMatrix) -> tuple[tuple[complex, int], ...]:
    """All zeros of ``q`` with multiplicities, polished and verified by deflation.

    Raises:
        DegenerateError: If ``q`` is constant.
    """
    q = characteristic_polynomial(L)
    if q.degree() < 1:
        raise DegenerateError("det(I - G mu(z)) is constant; there are no roots")
    raw = P.polyroots(q.coef)
    dq = q.deriv()
    polished = []
    for z in raw:
        z = complex(z)
        for _ in range(NEWTON_STEPS):
            d = complex(dq(z))
            if d == 0:
                break
            step = complex(q(z)) / d
            z -= step
            if abs(step) < 1e-15 * max(1.0, abs(z)):
                break
        polished.append(z)
    groups = _group(np.array(polished), 1e-5 * max(1.0, float(np.max(np.abs(polished)))))
    roots = []
    norm = float(np.sum(np.abs(q.coef)))
    for g in groups:
        zeta = complex(np.mean(np.array(raw)[g]))
        m = len(g)
        _, remainder = divmod(q, Polynomial.fromroots([zeta] * m))
        if float(np.max(np.abs(remainder.coef))) > 1e-6 * norm:
            logger.warning("deflation residual large for lattice root %s (m=%d)", zeta, m)
        if m == 1:
            zeta = polished[g[0]]
        roots.append((zeta, m))
    return tuple(roots)


def _lattice_lambda(zeta: complex) -> complex:
    """``lambda = -log(zeta)`` with imaginary part in ``(-pi, pi]``."""
    if abs(zeta.imag) <= 1e-14 * abs(zeta):
        zeta = complex(zeta.real, 0.0)
        if zeta.real < 0:
            return complex(-np.log(-zeta.real), pi)
    lam = -np.log(zeta)
    if lam.imag <= -pi:
        lam += 2j * pi
    return complex(lam)


def locate_lattice_roots(L: LatticeMeasureMatrix, theta: float) -> list[RootRecord]:
    """Roots ``lambda`` of the lattice characteristic equation with ``Re lambda > theta``.

    Computes ``q(z) = det(I - G mu(z))`` exactly, takes its zeros with
    ``0 < |z| < exp(-theta)`` and maps each ``zeta`` to ``lambda = -log(zeta)``.

    Raises:
        DegenerateError: If ``q`` is constant.
        LatticeSpanError: If the support is not normalised to maximal span 1.
    """
    span_gcd = lattice_span_gcd(L)
    if span_gcd > 1:
        raise LatticeSpanError(
            f"support lies on {span_gcd}Z; rescale the lattice to maximal span 1", gcd=span_gcd
        )
    bound = np.exp(-theta)
    records = []
    for zeta, m in lattice_polynomial_roots(L):
        if 0.0 < abs(zeta) < bound:
            records.append(RootRecord(lam=_lattice_lambda(zeta), det_multiplicity=m, zeta=zeta))
    records.sort(key=_sort_key)
    logger.info("located %d lattice root(s) above theta=%g", len(records), theta)
    return records
