"""Tests for markov_renewal.engine and markov_renewal._engine_base modules.

Tests cover the worker pool configuration, per-model caching, region
resolution, dispatch on the characteristic type, stage timings and both
engine facades.
"""

from concurrent.futures import ThreadPoolExecutor
from math import exp, log

import numpy as np
import pytest
from numpy.testing import assert_allclose

from markov_renewal import evaluate
from markov_renewal._engine_base import (
    DEFAULT_IM_MAX,
    THREADS_ENV,
    BaseEngine,
    ExpansionEngine,
    thread_count,
)
from markov_renewal.engine import LatticeRenewalEngine, RenewalEngine
from markov_renewal.exceptions import (
    DimensionError,
    InvalidModelError,
    UnsupportedRootError,
)
from markov_renewal.models.branching import BranchingModel, ReproductionLaw
from markov_renewal.models.config import RegionSpec, Tolerances
from markov_renewal.models.measure import (
    Characteristic,
    LatticeCharacteristic,
    LatticeMeasureMatrix,
    MeasureMatrix,
)
from markov_renewal.models.results import ExpansionKind, SearchRegion, Verdict


@pytest.fixture
def spec() -> RegionSpec:
    """Region parameters with a derived right edge."""
    return RegionSpec(theta=0.1, im_max=5.0)


class TestThreadCount:
    """Tests for the thread_count function."""

    def test_unset(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test that an unset variable means sequential evaluation."""
        monkeypatch.delenv(THREADS_ENV, raising=False)
        assert thread_count() == 1

    def test_valid(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test that a positive integer is used as is."""
        monkeypatch.setenv(THREADS_ENV, " 4 ")
        assert thread_count() == 4

    @pytest.mark.parametrize("raw", ["abc", "0", "-2", "1.5"])
    def test_invalid_falls_back(self, monkeypatch: pytest.MonkeyPatch, raw: str) -> None:
        """Test that invalid values fall back to one thread."""
        monkeypatch.setenv(THREADS_ENV, raw)
        assert thread_count() == 1


class TestBaseEngine:
    """Tests for the shared engine plumbing."""

    def test_defaults(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test default tolerances, one thread and no executor."""
        monkeypatch.delenv(THREADS_ENV, raising=False)
        engine = BaseEngine()
        assert engine.tolerances == Tolerances()
        assert engine.threads == 1
        assert engine.executor is None

    def test_threads_from_environment(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test that MRE_THREADS sizes the pool when threads is omitted."""
        monkeypatch.setenv(THREADS_ENV, "3")
        assert BaseEngine().threads == 3
        assert BaseEngine(threads=0).threads == 1

    def test_executor_lifecycle(self) -> None:
        """Test that the pool is created once and released by close()."""
        engine = BaseEngine(threads=2)
        executor = engine.executor
        assert isinstance(executor, ThreadPoolExecutor)
        assert engine.executor is executor
        engine.close()
        assert engine._executor is None

    def test_timed_accumulates(self) -> None:
        """Test that repeated stages add up."""
        engine = BaseEngine(threads=1)
        with engine._timed("stage"):
            pass
        first = engine.timings["stage"]
        with engine._timed("stage"):
            pass
        assert engine.timings["stage"] >= first

    def test_search_region_explicit(self) -> None:
        """Test that explicit edges are used without a Malthusian parameter."""
        region = BaseEngine(threads=1).search_region(RegionSpec(theta=0.2, re_max=4.0))
        assert region == SearchRegion(re_min=0.2, re_max=4.0, im_max=DEFAULT_IM_MAX)


class TestRenewalEngine:
    """Tests for the non-lattice engine."""

    def test_protocol(self, golden: MeasureMatrix) -> None:
        """Test that the engine satisfies the ExpansionEngine protocol."""
        assert isinstance(RenewalEngine(golden, threads=1), ExpansionEngine)

    def test_malthusian_cached(self, golden: MeasureMatrix) -> None:
        """Test alpha = 1, computed once and timed."""
        engine = RenewalEngine(golden, threads=1)
        result = engine.malthusian()
        assert result.alpha == pytest.approx(1.0, abs=1e-9)
        assert engine.malthusian() is result
        assert "malthusian" in engine.timings

    def test_search_region_derived(self, golden: MeasureMatrix, spec: RegionSpec) -> None:
        """Test that re_max defaults to alpha + 1."""
        region = RenewalEngine(golden, threads=1).search_region(spec)
        assert region.re_min == 0.1
        assert region.re_max == pytest.approx(2.0, abs=1e-9)
        assert region.im_max == 5.0

    def test_roots_cached(self, golden: MeasureMatrix, spec: RegionSpec) -> None:
        """Test that located roots are cached per region."""
        engine = RenewalEngine(golden, threads=1)
        roots = engine.located_roots(spec)
        assert [r.det_multiplicity for r in roots] == [2]
        assert engine.located_roots(spec) is roots

    def test_assumptions(self, golden: MeasureMatrix) -> None:
        """Test that the assumption report is computed once."""
        engine = RenewalEngine(golden, threads=1)
        report = engine.assumptions()
        assert report.a1 and report.a2 and report.a3
        assert engine.assumptions() is report
        assert engine.abscissa().abscissa == 0.0

    def test_expand_dispatch(self, golden: MeasureMatrix, spec: RegionSpec) -> None:
        """Test U expansion without a characteristic and F expansion with one."""
        with RenewalEngine(golden, threads=1) as engine:
            u = engine.expand(spec)
            f = engine.expand(spec, Characteristic.indicator(2, 0))
        assert u.kind == ExpansionKind.U_NONLATTICE
        assert f.kind == ExpansionKind.F_NONLATTICE
        assert_allclose(evaluate(u, 1.0), exp(1.0) * np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_threaded_matches_sequential(self, golden: MeasureMatrix, spec: RegionSpec) -> None:
        """Test that a worker pool gives the same expansion."""
        with RenewalEngine(golden, threads=2) as engine:
            threaded = evaluate(engine.expand(spec), 2.0)
        with RenewalEngine(golden, threads=1) as engine:
            sequential = evaluate(engine.expand(spec), 2.0)
        assert_allclose(threaded, sequential, rtol=1e-12)

    def test_lattice_characteristic_rejected(
        self, golden: MeasureMatrix, spec: RegionSpec
    ) -> None:
        """Test that a lattice characteristic raises TypeError."""
        engine = RenewalEngine(golden, threads=1)
        with pytest.raises(TypeError, match="lattice"):
            engine.expand(spec, LatticeCharacteristic.unit(2, 0))
        with pytest.raises(TypeError, match="lattice"):
            engine.expansion_coefficients(spec, LatticeCharacteristic.unit(2, 0))

    def test_characteristic_dimension(self, golden: MeasureMatrix, region: SearchRegion) -> None:
        """Test that a characteristic with the wrong length raises DimensionError."""
        engine = RenewalEngine(golden, threads=1)
        with pytest.raises(DimensionError):
            engine.f_expansion(Characteristic.indicator(3, 0), region)
        with pytest.raises(DimensionError):
            engine.grid_oracle(1.0, 0.1, Characteristic.indicator(1, 0))

    def test_u_expansion_needs_positive_re_min(self, golden: MeasureMatrix) -> None:
        """Test that the renewal-measure expansion refuses re_min <= 0."""
        engine = RenewalEngine(golden, threads=1)
        with pytest.raises(UnsupportedRootError):
            engine.u_expansion(SearchRegion(re_min=-0.5, re_max=2.0, im_max=5.0))

    def test_coefficients_cached(self, golden: MeasureMatrix, region: SearchRegion) -> None:
        """Test that coefficients are cached per region and characteristic."""
        engine = RenewalEngine(golden, threads=1)
        coefficients = engine.coefficients(region)
        assert engine.coefficients(region) is coefficients
        f = Characteristic.indicator(2, 1)
        assert engine.coefficients(region, f) is not coefficients

    def test_laurent(self, golden: MeasureMatrix, region: SearchRegion) -> None:
        """Test the Laurent data of the double root."""
        engine = RenewalEngine(golden, threads=1)
        (root,) = engine.roots(region)
        data = engine.laurent(root, region)
        assert data.pole_order == 2

    def test_conditions(self, golden: MeasureMatrix) -> None:
        """Test the condition checks through the engine."""
        engine = RenewalEngine(golden, threads=1)
        assert engine.check_B(0.5).verdict == Verdict.PASS
        assert engine.strip(1.5, 3.0, 2.0).verdict == Verdict.PASS
        assert "conditions" in engine.timings

    def test_grid_oracle(self, golden: MeasureMatrix) -> None:
        """Test that the grid oracle runs on the engine's model."""
        solution = RenewalEngine(golden, threads=1).grid_oracle(1.0, 1e-2)
        assert solution.values.shape == (101, 2, 2)

    def test_simulate(self, golden: MeasureMatrix) -> None:
        """Test the default branching model built from the matrix."""
        estimates = RenewalEngine(golden, threads=1).simulate([0.0], 5, seed=0)
        assert_allclose(estimates[0].mean, [2.0])

    def test_simulate_mismatched_model(self, golden: MeasureMatrix) -> None:
        """Test that a branching model with other intensities raises."""
        law = ReproductionLaw(rate=1.0)
        branching = BranchingModel(reproduction=((law, law), (law, law)))
        with pytest.raises(InvalidModelError):
            RenewalEngine(golden, threads=1).simulate([1.0], 5, seed=0, branching=branching)


class TestLatticeRenewalEngine:
    """Tests for the lattice engine."""

    def test_protocol(self, doubling: LatticeMeasureMatrix) -> None:
        """Test that the engine satisfies the ExpansionEngine protocol."""
        assert isinstance(LatticeRenewalEngine(doubling, threads=1), ExpansionEngine)

    def test_malthusian_in_index_units(self) -> None:
        """Test that alpha is per lattice step whatever the span."""
        lattice = LatticeMeasureMatrix(span=0.5, weights=(((0.0, 2.0),),))
        engine = LatticeRenewalEngine(lattice, threads=1)
        assert engine.malthusian().alpha == pytest.approx(log(2.0), abs=1e-10)
        atom = engine.embedded().entries[0][0].atoms[0]
        assert atom.location == pytest.approx(0.5)

    def test_expand(self, geometric: LatticeMeasureMatrix) -> None:
        """Test the U and F expansions against the exact recursion."""
        with LatticeRenewalEngine(geometric, threads=1, verify=True) as engine:
            spec = RegionSpec(theta=-1.0)
            f = LatticeCharacteristic(values=((1.0, 1.0),))
            u = engine.expand(spec)
            F = engine.expand(spec, f)
            exact_u = engine.exact(8)
            exact_f = engine.exact(8, f)
        assert u.kind == ExpansionKind.U_LATTICE
        assert F.kind == ExpansionKind.F_LATTICE
        for n in range(1, 9):
            assert_allclose(evaluate(u, n), exact_u[n], rtol=1e-10)
            assert_allclose(evaluate(F, n), exact_f[n], rtol=1e-10)

    def test_roots_cached(self, doubling: LatticeMeasureMatrix) -> None:
        """Test that roots are cached per theta."""
        engine = LatticeRenewalEngine(doubling, threads=1)
        roots = engine.located_roots(RegionSpec(theta=-1.0))
        assert engine.roots(-1.0) is roots
        assert complex(roots[0].lam) == pytest.approx(log(2.0))
        assert engine.laurent(roots[0]).pole_order == 1

    def test_non_lattice_characteristic_rejected(self, doubling: LatticeMeasureMatrix) -> None:
        """Test that a non-lattice characteristic raises TypeError."""
        engine = LatticeRenewalEngine(doubling, threads=1)
        with pytest.raises(TypeError, match="non-lattice"):
            engine.expand(RegionSpec(theta=-1.0), Characteristic.indicator(1, 0))

    def test_characteristic_dimension(self, doubling: LatticeMeasureMatrix) -> None:
        """Test that a characteristic with the wrong length raises DimensionError."""
        engine = LatticeRenewalEngine(doubling, threads=1)
        with pytest.raises(DimensionError):
            engine.f_expansion(LatticeCharacteristic.unit(2, 0), -1.0)
        with pytest.raises(DimensionError):
            engine.exact(3, LatticeCharacteristic.unit(2, 0))

    def test_assumptions(self, doubling: LatticeMeasureMatrix) -> None:
        """Test the assumption report in index units."""
        report = LatticeRenewalEngine(doubling, threads=1).assumptions()
        assert report.a1 and report.a2 and report.a3
        assert report.rho_at_zero == 0.0
