"""Tests for markov_renewal.analysis.laurent module.

Tests cover contour extraction of Laurent coefficients, pole orders, the
``C``, ``B`` and ``b`` coefficients, characteristic moments, conjugate
closure and the lattice generating-function analogues.
"""

from math import exp, log, pi

import numpy as np
import pytest
from numpy.testing import assert_allclose

from markov_renewal.analysis.laurent import (
    b_coeffs,
    b_vector_coeffs,
    c_coeffs,
    char_moments,
    expansion_coefficients,
    lattice_b_vector_coeffs,
    lattice_c_coeffs,
    lattice_expansion_coefficients,
    lattice_laurent,
    laurent_coeffs,
    with_pole_orders,
)
from markov_renewal.analysis.measures import lattice_to_measure_matrix
from markov_renewal.analysis.roots import locate_lattice_roots, locate_roots
from markov_renewal.analysis.transform import compile_kernel
from markov_renewal.exceptions import DivergentMomentError, UnsupportedRootError
from markov_renewal.models.measure import (
    AtomTerm,
    Characteristic,
    CharacteristicComponent,
    ExpPolyTerm,
    FunctionTerm,
    LatticeCharacteristic,
    LatticeMeasureMatrix,
    MeasureMatrix,
    ScalarMeasure,
)
from markov_renewal.models.results import LaurentData, RootRecord, SearchRegion

NILPOTENT = np.array([[0.0, 1.0], [0.0, 0.0]])


def _root(lam: complex, m: int) -> RootRecord:
    return RootRecord(lam=lam, det_multiplicity=m)


def _circle_mean(values: np.ndarray) -> np.ndarray:
    return np.asarray(np.mean(values, axis=0))


class TestLaurentCoeffs:
    """Tests for the laurent_coeffs function."""

    def test_golden(self, golden: MeasureMatrix) -> None:
        """Test A_1 = [[1, 2], [0, 1]] and A_2 = [[0, 1], [0, 0]]."""
        ld = laurent_coeffs(golden, _root(1.0, 2))
        assert ld.pole_order == 2
        assert_allclose(ld.A[0], [[1.0, 2.0], [0.0, 1.0]], atol=1e-8)
        assert_allclose(ld.A[1], NILPOTENT, atol=1e-8)
        assert len(ld.principal) == 2

    def test_tilted(self, tilted: MeasureMatrix) -> None:
        """Test A_1 = [[1, 1], [0, 1]] and A_2 = [[0, 1], [0, 0]]."""
        ld = laurent_coeffs(tilted, _root(1.0, 2))
        assert_allclose(ld.A[0], [[1.0, 1.0], [0.0, 1.0]], atol=1e-8)
        assert_allclose(ld.A[1], NILPOTENT, atol=1e-8)

    def test_simple_pole_with_double_zero(self, diagonal: MeasureMatrix) -> None:
        """Test that a double determinant zero can be a simple pole."""
        ld = laurent_coeffs(diagonal, _root(1.0, 2))
        assert ld.pole_order == 1
        assert_allclose(ld.A[0], np.eye(2), atol=1e-8)
        assert_allclose(ld.A[1], np.zeros((2, 2)), atol=1e-8)

    def test_radius_avoids_neighbours(self, golden: MeasureMatrix) -> None:
        """Test that the contour stays within a quarter of the nearest neighbour."""
        ld = laurent_coeffs(golden, _root(1.0, 2), neighbours=[1.4])
        assert ld.radius <= 0.1 + 1e-15
        assert ld.nodes >= 64

    def test_reconstruction_golden(self, golden: MeasureMatrix) -> None:
        """Test that R(z) minus the principal part is the constant regular part."""
        ld = laurent_coeffs(golden, _root(1.0, 2))
        u = np.exp(2j * pi * np.arange(16) / 16)
        z = 1.0 + 0.5 * ld.radius * u
        R = compile_kernel(golden).resolvent(z)
        principal = sum(
            A[None] / ((z - 1.0) ** (k + 1))[:, None, None] for k, A in enumerate(ld.A)
        )
        regular = np.array([[1.0, 1.0], [0.0, 1.0]])
        assert np.max(np.abs(R - principal - regular)) < 1e-6

    def test_remainder_is_analytic(self) -> None:
        """Test that R minus the principal part has equal means on two circles."""
        M = lattice_to_measure_matrix(LatticeMeasureMatrix(weights=(((0.0, 2.0),),)))
        lam = complex(log(2.0))
        ld = laurent_coeffs(M, _root(lam, 1), neighbours=[lam + 2j * pi, lam - 2j * pi])
        kernel = compile_kernel(M)
        u = np.exp(2j * pi * np.arange(64) / 64)
        means = []
        for scale in (0.5, 0.25):
            z = lam + scale * ld.radius * u
            remainder = kernel.resolvent(z) - ld.A[0][None] / (z - lam)[:, None, None]
            means.append(_circle_mean(remainder))
        assert_allclose(means[0], means[1], atol=1e-6)
        assert_allclose(ld.A[0], [[1.0]], atol=1e-9)


class TestCoefficientFormulas:
    """Tests for c_coeffs and b_coeffs."""

    def test_golden_c(self, golden: MeasureMatrix) -> None:
        """Test C_0 = [[1, 1], [0, 1]] and C_1 = [[0, 1], [0, 0]]."""
        C = c_coeffs(laurent_coeffs(golden, _root(1.0, 2)))
        assert len(C) == 2
        assert_allclose(C[0], [[1.0, 1.0], [0.0, 1.0]], atol=1e-8)
        assert_allclose(C[1], NILPOTENT, atol=1e-8)

    def test_golden_b(self, golden: MeasureMatrix) -> None:
        """Test B_0 = [[1, 2], [0, 1]] and B_1 = [[0, 1], [0, 0]]."""
        C = c_coeffs(laurent_coeffs(golden, _root(1.0, 2)))
        B = b_coeffs(C, 1.0)
        assert_allclose(B[0], [[1.0, 2.0], [0.0, 1.0]], atol=1e-8)
        assert_allclose(B[1], NILPOTENT, atol=1e-8)

    def test_tilted_c(self, tilted: MeasureMatrix) -> None:
        """Test C_0 = I and C_1 = [[0, 1], [0, 0]]."""
        C = c_coeffs(laurent_coeffs(tilted, _root(1.0, 2)))
        assert_allclose(C[0], np.eye(2), atol=1e-8)
        assert_allclose(C[1], NILPOTENT, atol=1e-8)

    def test_diagonal_c(self, diagonal: MeasureMatrix) -> None:
        """Test a single coefficient C_0 = I at a simple pole."""
        C = c_coeffs(laurent_coeffs(diagonal, _root(1.0, 2)))
        assert len(C) == 1
        assert_allclose(C[0], np.eye(2), atol=1e-8)

    def test_b_from_explicit_c(self) -> None:
        """Test B_k = (k+1) C_{k+1} + lambda C_k with C_kappa = 0."""
        C = (np.array([[2.0]]), np.array([[3.0]]))
        B = b_coeffs(C, 0.5)
        assert_allclose(B[0], [[3.0 + 1.0]])
        assert_allclose(B[1], [[1.5]])

    def test_unsupported_root(self) -> None:
        """Test that Re lambda <= 0 raises UnsupportedRootError."""
        ld = LaurentData(
            lam=-0.5, center=-0.5, radius=0.1, A=(np.eye(1),), pole_order=1, nodes=64
        )
        with pytest.raises(UnsupportedRootError):
            c_coeffs(ld)


class TestCharMoments:
    """Tests for the char_moments function."""

    def test_indicator(self) -> None:
        """Test m_j = j! / lambda^(j+1) for the unit step."""
        m = char_moments(Characteristic.indicator(1, 0), 2.0, 2)
        assert_allclose(m[:, 0], [0.5, 0.25, 0.25])

    def test_hump(self) -> None:
        """Test int x * x e^{-x} e^{-x} dx = 1/4."""
        comp = CharacteristicComponent(
            functions=(FunctionTerm(coefficient=1.0, power=1, rate=1.0),)
        )
        m = char_moments(Characteristic(components=(comp,)), 1.0, 1)
        assert m[1, 0] == pytest.approx(0.25)

    def test_window(self) -> None:
        """Test the lifetime window 1[0, 1) at lambda = 1."""
        f = Characteristic.model_validate(
            {"components": [{"steps": [{"loc": 0.0, "jump": 1.0}, {"loc": 1.0, "jump": -1.0}]}]}
        )
        m = char_moments(f, 1.0, 0)
        assert m[0, 0] == pytest.approx(1.0 - exp(-1.0))

    def test_complex_lambda(self) -> None:
        """Test the step moment at a complex exponent."""
        lam = 1.0 + 2.0j
        m = char_moments(Characteristic.indicator(1, 0), lam, 1)
        assert_allclose(m[:, 0], [1 / lam, 1 / lam**2])

    def test_divergent_raises(self) -> None:
        """Test that Re lambda at or below the exponential order raises."""
        with pytest.raises(DivergentMomentError):
            char_moments(Characteristic.indicator(1, 0), 0.0, 0)


class TestExpansionCoefficients:
    """Tests for expansion_coefficients and b vectors."""

    def test_golden(self, golden: MeasureMatrix, region: SearchRegion) -> None:
        """Test per-root data for the golden model."""
        roots = locate_roots(golden, region)
        coeffs = expansion_coefficients(golden, roots)
        rc = coeffs.for_root(1.0)
        assert rc.pole_order == 2
        assert rc.det_multiplicity == 2
        assert_allclose(rc.C[0], [[1.0, 1.0], [0.0, 1.0]], atol=1e-8)
        assert rc.b == ()

    def test_indicator_b_equals_c_column(
        self, golden: MeasureMatrix, region: SearchRegion
    ) -> None:
        """Test that f = e_j gives b_k = C_k e_j."""
        roots = locate_roots(golden, region)
        coeffs = expansion_coefficients(golden, roots)
        b = b_vector_coeffs(coeffs, Characteristic.indicator(2, 1), 1.0)
        C = coeffs.for_root(1.0).C
        assert_allclose(b[0], C[0][:, 1], atol=1e-8)
        assert_allclose(b[1], C[1][:, 1], atol=1e-8)

    def test_with_f(self, tilted: MeasureMatrix, region: SearchRegion) -> None:
        """Test that passing f fills the b vectors."""
        roots = locate_roots(tilted, region)
        coeffs = expansion_coefficients(tilted, roots, f=Characteristic.indicator(2, 0))
        rc = coeffs.for_root(1.0)
        assert_allclose(rc.b[0], [1.0, 0.0], atol=1e-8)
        assert_allclose(rc.b[1], [0.0, 0.0], atol=1e-8)

    def test_conjugate_closure(self) -> None:
        """Test C_0 = 1/lambda for every root of 1 - 2 exp(-z), paired exactly."""
        M = lattice_to_measure_matrix(LatticeMeasureMatrix(weights=(((0.0, 2.0),),)))
        roots = locate_roots(M, SearchRegion(re_min=0.2, re_max=1.5, im_max=10.0))
        coeffs = expansion_coefficients(M, roots)
        assert len(coeffs.roots) == 3
        for rc in coeffs.roots:
            assert_allclose(rc.C[0], [[1.0 / complex(rc.lam)]], atol=1e-9)
        upper, lower = coeffs.roots[0], coeffs.roots[2]
        assert_allclose(lower.C[0], np.conj(upper.C[0]), rtol=0, atol=0)

    def test_for_root_missing(self, golden: MeasureMatrix, region: SearchRegion) -> None:
        """Test that an unknown root raises KeyError."""
        coeffs = expansion_coefficients(golden, locate_roots(golden, region))
        with pytest.raises(KeyError):
            coeffs.for_root(2.0)

    def test_with_pole_orders(self, golden: MeasureMatrix, region: SearchRegion) -> None:
        """Test that pole orders are copied onto root records."""
        roots = locate_roots(golden, region)
        coeffs = expansion_coefficients(golden, roots)
        extra = _root(2.5, 1)
        filled = with_pole_orders([*roots, extra], coeffs)
        assert filled[0].pole_order == 2
        assert filled[1].pole_order is None

    def test_two_densities(self) -> None:
        """Test a gamma-density root with Laurent data from the closed form."""
        # L(z) = 2 / (z + 1)^2 has a simple root at sqrt(2) - 1.
        gamma = ExpPolyTerm(coefficient=2.0, power=1, rate=1.0)
        M = MeasureMatrix(entries=((ScalarMeasure(densities=(gamma,)),),))
        lam = 2**0.5 - 1.0
        coeffs = expansion_coefficients(M, [_root(lam, 1)])
        # A_1 = 1 / det'(lam) with det' = 4 / (lam + 1)^3.
        A1 = (lam + 1.0) ** 3 / 4.0
        assert_allclose(coeffs.roots[0].C[0], [[A1 / lam]], rtol=1e-9)

    def test_atom_and_density_mix(self) -> None:
        """Test that delta_1 plus a unit density gives a located simple root."""
        m = ScalarMeasure(
            atoms=(AtomTerm(location=1.0, weight=1.0),),
            densities=(ExpPolyTerm(coefficient=1.0, rate=1.0),),
        )
        M = MeasureMatrix(entries=((m,),))
        roots = locate_roots(M, SearchRegion(re_min=0.05, re_max=2.0, im_max=1.0))
        coeffs = expansion_coefficients(M, roots)
        lam = complex(roots[0].lam).real
        derivative = exp(-lam) + 1.0 / (lam + 1.0) ** 2
        assert_allclose(coeffs.roots[0].C[0], [[1.0 / (derivative * lam)]], rtol=1e-8)


class TestLatticeCoefficients:
    """Tests for the lattice Laurent data and coefficients."""

    def test_doubling_laurent(self, doubling: LatticeMeasureMatrix) -> None:
        """Test B_1 = -1/2 for (1 - 2z)^-1 at zeta = 1/2."""
        root = locate_lattice_roots(doubling, -1.0)[0]
        ld = lattice_laurent(doubling, root, verify=True)
        assert ld.pole_order == 1
        assert_allclose(ld.A[0], [[-0.5]], atol=1e-10)

    def test_doubling_c(self, doubling: LatticeMeasureMatrix) -> None:
        """Test U({n}) = 2^n, i.e. C_0 = 1."""
        root = locate_lattice_roots(doubling, -1.0)[0]
        ld = lattice_laurent(doubling, root)
        assert_allclose(lattice_c_coeffs(ld.principal, 0.5)[0], [[1.0]], atol=1e-10)

    def test_geometric(self, geometric: LatticeMeasureMatrix) -> None:
        """Test C_0 = 4/3 and b_0 = 2 for f = (1, 1)."""
        roots = locate_lattice_roots(geometric, -1.0)
        f = LatticeCharacteristic(values=((1.0, 1.0),))
        coeffs = lattice_expansion_coefficients(geometric, roots, f=f)
        rc = coeffs.roots[0]
        assert complex(rc.lam) == pytest.approx(log(2.0))
        assert_allclose(rc.C[0], [[4.0 / 3.0]], atol=1e-10)
        assert_allclose(rc.b[0], [2.0], atol=1e-10)
        assert_allclose(
            lattice_b_vector_coeffs(rc.lattice_B, f, 0.5)[0], [2.0], atol=1e-10
        )

    def test_double_zero_simple_pole(self) -> None:
        """Test det multiplicity 2 with pole order 1 on the lattice."""
        L = LatticeMeasureMatrix(weights=(((0.0, 2.0), (0.0,)), ((0.0,), (0.0, 2.0))))
        roots = locate_lattice_roots(L, -1.0)
        assert roots[0].det_multiplicity == 2
        coeffs = lattice_expansion_coefficients(L, roots)
        assert coeffs.roots[0].pole_order == 1
        assert_allclose(coeffs.roots[0].C[0], np.eye(2), atol=1e-8)
