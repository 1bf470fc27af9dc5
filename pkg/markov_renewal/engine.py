"""Renewal engine facades.

This module provides the primary interfaces for analyzing a renewal equation
``F = f + mu * F``:

- RenewalEngine: non-lattice measure matrices (atoms plus densities)
- LatticeRenewalEngine: finite-support measure matrices on the lattice

Both engines cache per-model results (Malthusian parameter, roots, expansion
coefficients) and own the worker pool, with context manager support for
releasing it.

Example (non-lattice):
    >>> with RenewalEngine(model) as engine:
    ...     alpha = engine.malthusian().alpha
    ...     expansion = engine.u_expansion(SearchRegion(re_min=0.5, re_max=2.0, im_max=10.0))
    ...     value = evaluate(expansion, 3.0)

Example (lattice):
    >>> with LatticeRenewalEngine(lattice) as engine:
    ...     expansion = engine.f_expansion(f, theta=-1.0)
"""

from collections.abc import Sequence

import numpy as np

from markov_renewal._engine_base import DEFAULT_IM_MAX, BaseEngine
from markov_renewal.analysis.conditions import check_B, check_E, check_strip_empty
from markov_renewal.analysis.expansion import (
    f_expansion_from_coefficients,
    lattice_f_expansion_from_coefficients,
    strip_theta,
    u_expansion_from_coefficients,
)
from markov_renewal.analysis.laurent import (
    expansion_coefficients,
    lattice_expansion_coefficients,
    lattice_laurent,
    laurent_coeffs,
)
from markov_renewal.analysis.measures import lattice_to_measure_matrix
from markov_renewal.analysis.oracle import (
    grid_convolution_F,
    grid_convolution_U,
    lattice_renewal,
    lattice_solve,
)
from markov_renewal.analysis.roots import locate_lattice_roots, locate_roots
from markov_renewal.analysis.simulation import DEFAULT_CAP, cmj_simulate, validate_model
from markov_renewal.analysis.spectral import check_assumptions, find_malthusian
from markov_renewal.analysis.transform import domain_abscissa
from markov_renewal.exceptions import DimensionError, StripRootError, UnsupportedRootError
from markov_renewal.models.branching import BranchingModel
from markov_renewal.models.config import RegionSpec, Tolerances
from markov_renewal.models.measure import (
    Characteristic,
    LatticeCharacteristic,
    LatticeMeasureMatrix,
    MeasureMatrix,
)
from markov_renewal.models.results import (
    AssumptionReport,
    ConditionReport,
    DomainAbscissa,
    Expansion,
    ExpansionCoefficients,
    GridSolution,
    LaurentData,
    MalthusianResult,
    RootRecord,
    SearchRegion,
    SimEstimate,
    Verdict,
)


def _check_components(p: int, f: Characteristic | LatticeCharacteristic) -> None:
    if f.p != p:
        raise DimensionError(f"characteristic has {f.p} components, the model has {p} types")


class RenewalEngine(BaseEngine):
    """Engine for non-lattice measure matrices.

    Example:
        >>> with RenewalEngine(model, Tolerances(tol_det=1e-9)) as engine:
        ...     roots = engine.roots(region)
        ...     coefficients = engine.coefficients(region)

    Attributes:
        model: Analyzed measure matrix.
    """

    def __init__(
        self,
        model: MeasureMatrix,
        tolerances: Tolerances | None = None,
        threads: int | None = None,
    ) -> None:
        """Initialize the non-lattice engine.

        Args:
            model: Measure matrix satisfying (A1)-(A3).
            tolerances: Numerical tolerances.
            threads: Worker threads; read from ``MRE_THREADS`` when omitted.
        """
        super().__init__(tolerances, threads)
        self.model = model
        self._assumptions: AssumptionReport | None = None
        self._malthusian: MalthusianResult | None = None
        self._roots: dict[SearchRegion, list[RootRecord]] = {}
        self._coefficients: dict[
            tuple[SearchRegion, Characteristic | None], ExpansionCoefficients
        ] = {}

    def __enter__(self) -> "RenewalEngine":
        """Enter context manager.

        Returns:
            The engine instance.
        """
        return self

    def __exit__(self, *args: object) -> None:
        """Exit context manager and shut down the worker pool."""
        self.close()

    @property
    def p(self) -> int:
        """Number of types."""
        return self.model.p

    def abscissa(self) -> DomainAbscissa:
        """Domain abscissa of the Laplace transform."""
        return domain_abscissa(self.model)

    def assumptions(self) -> AssumptionReport:
        """Verdicts for (A1)-(A3)."""
        if self._assumptions is None:
            with self._timed("assumptions"):
                self._assumptions = check_assumptions(self.model)
        return self._assumptions

    def malthusian(self) -> MalthusianResult:
        """Malthusian parameter.

        Raises:
            AssumptionError: If (A2) fails.
            NoMalthusianError: If (A3) fails.
        """
        if self._malthusian is None:
            with self._timed("malthusian"):
                self._malthusian = find_malthusian(self.model, self.tolerances.tol_rho)
        return self._malthusian

    def roots(self, region: SearchRegion) -> list[RootRecord]:
        """Characteristic roots in a search region, cached per region."""
        if region not in self._roots:
            with self._timed("roots"):
                self._roots[region] = locate_roots(
                    self.model, region, self.tolerances, self.executor
                )
        return self._roots[region]

    def located_roots(self, spec: RegionSpec) -> list[RootRecord]:
        """Roots in the region resolved from configured parameters."""
        return self.roots(self.search_region(spec))

    def laurent(self, root: RootRecord, region: SearchRegion) -> LaurentData:
        """Laurent data at ``root``, keeping the other roots of ``region`` outside the contour."""
        lam = complex(root.lam)
        neighbours = [complex(r.lam) for r in self.roots(region) if complex(r.lam) != lam]
        return laurent_coeffs(self.model, root, self.tolerances, neighbours)

    def coefficients(
        self, region: SearchRegion, f: Characteristic | None = None
    ) -> ExpansionCoefficients:
        """``C``, ``B`` (and ``b`` for ``f``) for every root in the region.

        With a characteristic, only roots right of its admissible ``theta`` are used.
        """
        key = (region, f)
        if key not in self._coefficients:
            roots = self.roots(region)
            if f is not None:
                _check_components(self.p, f)
                theta = strip_theta(f, region.re_min)
                roots = [r for r in roots if complex(r.lam).real > theta]
            with self._timed("coefficients"):
                self._coefficients[key] = expansion_coefficients(
                    self.model, roots, self.tolerances, self.executor, f=f
                )
        return self._coefficients[key]

    def expansion_coefficients(
        self,
        spec: RegionSpec,
        f: Characteristic | LatticeCharacteristic | None = None,
    ) -> ExpansionCoefficients:
        """Coefficients for the region resolved from configured parameters."""
        if isinstance(f, LatticeCharacteristic):
            raise TypeError("a lattice characteristic needs a lattice model")
        return self.coefficients(self.search_region(spec), f)

    def u_expansion(self, region: SearchRegion) -> Expansion:
        """Expansion of the renewal measure ``U(t)``.

        Raises:
            UnsupportedRootError: If ``region.re_min <= 0``.
        """
        if region.re_min <= 0.0:
            raise UnsupportedRootError(
                f"renewal measure expansion needs re_min > 0, got {region.re_min:g}"
            )
        return u_expansion_from_coefficients(self.coefficients(region), region, self.p)

    def f_expansion(self, f: Characteristic, region: SearchRegion) -> Expansion:
        """Expansion of ``F = U * f``.

        Raises:
            DimensionError: If ``f`` has the wrong number of components.
            StripRootError: If a root lies between ``re_min`` and the admissible ``theta``.
        """
        _check_components(self.p, f)
        theta = strip_theta(f, region.re_min)
        if theta > region.re_min:
            report = self.strip(region.re_min, theta, region.im_max)
            if report.verdict != Verdict.PASS:
                raise StripRootError(
                    f"{report.witness.get('count')} root(s) in the strip "
                    f"({region.re_min:g}, {theta:g}]"
                )
        return f_expansion_from_coefficients(self.coefficients(region, f), theta, self.p)

    def expand(
        self,
        spec: RegionSpec,
        f: Characteristic | LatticeCharacteristic | None = None,
    ) -> Expansion:
        """``U`` expansion without a characteristic, ``F`` expansion with one."""
        if isinstance(f, LatticeCharacteristic):
            raise TypeError("a lattice characteristic needs a lattice model")
        region = self.search_region(spec)
        return self.u_expansion(region) if f is None else self.f_expansion(f, region)

    def check_B(self, vartheta: float, m_max: int = 8) -> ConditionReport:
        """Condition (B) at ``vartheta``."""
        with self._timed("conditions"):
            return check_B(self.model, vartheta, m_max)

    def check_E(
        self, vartheta: float, eta_max: float = DEFAULT_IM_MAX, n_grid: int = 1001
    ) -> ConditionReport:
        """Condition (E) on the line ``Re z = vartheta`` up to ``eta_max``.

        Raises:
            RootOnLineError: If a root lies on the scanned line.
        """
        with self._timed("conditions"):
            return check_E(self.model, vartheta, eta_max, n_grid, self.tolerances)

    def strip(self, theta1: float, theta2: float, im_max: float) -> ConditionReport:
        """Strip-emptiness check on ``(theta1, theta2] x [-im_max, im_max]``."""
        with self._timed("conditions"):
            return check_strip_empty(self.model, theta1, theta2, im_max, self.tolerances)

    def grid_oracle(self, T: float, h: float, f: Characteristic | None = None) -> GridSolution:
        """Grid solution of ``U`` (or ``F`` for ``f``) on ``[0, T]`` with step ``h``."""
        with self._timed("oracle"):
            if f is None:
                return grid_convolution_U(self.model, T, h)
            _check_components(self.p, f)
            return grid_convolution_F(self.model, f, T, h)

    def simulate(
        self,
        t_grid: Sequence[float],
        replications: int,
        seed: int,
        branching: BranchingModel | None = None,
        population_cap: float = DEFAULT_CAP,
    ) -> list[SimEstimate]:
        """Monte Carlo means of a branching process whose intensities are the model.

        Without ``branching``, each entry is simulated as its own point process
        (Poisson densities, deterministic atoms) and every birth counts.

        Raises:
            InvalidModelError: If ``branching`` does not match the model.
            PopulationCapError: If the expected population exceeds the cap.
        """
        model = branching or BranchingModel.from_measure_matrix(self.model)
        validate_model(model, self.model)
        with self._timed("simulation"):
            return cmj_simulate(
                model,
                t_grid,
                replications,
                seed,
                population_cap=population_cap,
                executor=self.executor,
            )


class LatticeRenewalEngine(BaseEngine):
    """Engine for lattice measure matrices.

    Times are lattice indices ``n``; the span only enters through
    ``embedded()``. Roots ``lambda`` are in index units, ``zeta = exp(-lambda)``.

    Attributes:
        lattice: Analyzed lattice measure matrix.
        verify: Cross-check every pole order against the embedded atom matrix.
    """

    def __init__(
        self,
        lattice: LatticeMeasureMatrix,
        tolerances: Tolerances | None = None,
        threads: int | None = None,
        verify: bool = False,
    ) -> None:
        """Initialize the lattice engine.

        Args:
            lattice: Lattice measure matrix normalised to maximal span.
            tolerances: Numerical tolerances.
            threads: Worker threads; read from ``MRE_THREADS`` when omitted.
            verify: Run the lattice/non-lattice Laurent bridge for every root.
        """
        super().__init__(tolerances, threads)
        self.lattice = lattice
        self.verify = verify
        self._unit = lattice_to_measure_matrix(lattice.model_copy(update={"span": 1.0}))
        self._assumptions: AssumptionReport | None = None
        self._malthusian: MalthusianResult | None = None
        self._roots: dict[float, list[RootRecord]] = {}
        self._coefficients: dict[
            tuple[float, LatticeCharacteristic | None], ExpansionCoefficients
        ] = {}

    def __enter__(self) -> "LatticeRenewalEngine":
        """Enter context manager.

        Returns:
            The engine instance.
        """
        return self

    def __exit__(self, *args: object) -> None:
        """Exit context manager and shut down the worker pool."""
        self.close()

    @property
    def p(self) -> int:
        """Number of types."""
        return self.lattice.p

    def embedded(self) -> MeasureMatrix:
        """The lattice measure as atoms at ``n * h``."""
        return lattice_to_measure_matrix(self.lattice)

    def assumptions(self) -> AssumptionReport:
        """Verdicts for (A1)-(A3) in index units."""
        if self._assumptions is None:
            self._assumptions = check_assumptions(self._unit)
        return self._assumptions

    def malthusian(self) -> MalthusianResult:
        """Malthusian parameter per lattice step.

        Raises:
            AssumptionError: If (A2) fails.
            NoMalthusianError: If (A3) fails.
        """
        if self._malthusian is None:
            with self._timed("malthusian"):
                self._malthusian = find_malthusian(self._unit, self.tolerances.tol_rho)
        return self._malthusian

    def roots(self, theta: float) -> list[RootRecord]:
        """Lattice roots with ``Re lambda > theta``, cached per ``theta``."""
        if theta not in self._roots:
            with self._timed("roots"):
                self._roots[theta] = locate_lattice_roots(self.lattice, theta)
        return self._roots[theta]

    def located_roots(self, spec: RegionSpec) -> list[RootRecord]:
        """Roots right of the configured ``theta``."""
        return self.roots(spec.theta)

    def laurent(self, root: RootRecord) -> LaurentData:
        """Lattice Laurent data ``B_{lambda,1..m}`` at ``zeta``."""
        return lattice_laurent(self.lattice, root, self.tolerances, verify=self.verify)

    def coefficients(
        self, theta: float, f: LatticeCharacteristic | None = None
    ) -> ExpansionCoefficients:
        """Lattice ``B``, renewal-density ``C`` (and ``b`` for ``f``) per root."""
        if f is not None:
            _check_components(self.p, f)
        key = (theta, f)
        if key not in self._coefficients:
            roots = self.roots(theta)
            with self._timed("coefficients"):
                self._coefficients[key] = lattice_expansion_coefficients(
                    self.lattice, roots, self.tolerances, self.executor, f=f, verify=self.verify
                )
        return self._coefficients[key]

    def expansion_coefficients(
        self,
        spec: RegionSpec,
        f: Characteristic | LatticeCharacteristic | None = None,
    ) -> ExpansionCoefficients:
        """Coefficients right of the configured ``theta``."""
        if isinstance(f, Characteristic):
            raise TypeError("a non-lattice characteristic needs a non-lattice model")
        return self.coefficients(spec.theta, f)

    def u_expansion(self, theta: float) -> Expansion:
        """Expansion of the renewal density ``U({n})``."""
        return lattice_f_expansion_from_coefficients(
            self.coefficients(theta), theta, self.p, vectors=False
        )

    def f_expansion(self, f: LatticeCharacteristic, theta: float) -> Expansion:
        """Expansion of ``F(n)`` for a finitely supported characteristic.

        Raises:
            DimensionError: If ``f`` has the wrong number of components.
        """
        return lattice_f_expansion_from_coefficients(
            self.coefficients(theta, f), theta, self.p, vectors=True
        )

    def expand(
        self,
        spec: RegionSpec,
        f: Characteristic | LatticeCharacteristic | None = None,
    ) -> Expansion:
        """``U({n})`` expansion without a characteristic, ``F(n)`` expansion with one."""
        if isinstance(f, Characteristic):
            raise TypeError("a non-lattice characteristic needs a non-lattice model")
        return self.u_expansion(spec.theta) if f is None else self.f_expansion(f, spec.theta)

    def exact(self, N: int, f: LatticeCharacteristic | None = None) -> np.ndarray:
        """Exact ``U({0..N})`` (shape ``(N+1, p, p)``) or ``F(0..N)`` (shape ``(N+1, p)``)."""
        with self._timed("oracle"):
            if f is None:
                return lattice_renewal(self.lattice, N)
            _check_components(self.p, f)
            return lattice_solve(self.lattice, f, N)
