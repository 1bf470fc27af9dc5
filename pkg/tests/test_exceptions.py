"""Tests for markov_renewal.exceptions module.

Tests cover the exception hierarchy, error codes, extra attributes, and the
error-to-exit-code mapping function.
"""

import pytest

from markov_renewal.exceptions import (
    EXIT_ERROR,
    EXIT_OK,
    EXIT_VERDICT,
    AssumptionError,
    BoundaryRootError,
    ConvergenceError,
    DimensionError,
    DomainError,
    LatticeSpanError,
    ModelError,
    NoMalthusianError,
    NumericalError,
    PopulationCapError,
    QuadratureError,
    RenewalError,
    RootOnLineError,
    SchemaError,
    StripRootError,
    VerdictError,
    get_exit_code_for_error,
)


class TestRenewalErrorBase:
    """Tests for the base RenewalError class."""

    def test_instantiation(self) -> None:
        """Test that RenewalError can be instantiated with a message."""
        error = RenewalError("Test error message")
        assert error.message == "Test error message"
        assert str(error) == "Test error message"

    def test_inheritance(self) -> None:
        """Test that RenewalError inherits from Exception."""
        assert isinstance(RenewalError("Base error"), Exception)

    def test_empty_message(self) -> None:
        """Test that empty message is allowed."""
        assert RenewalError("").message == ""

    def test_code(self) -> None:
        """Test that the base error reports a core code."""
        assert RenewalError("x").code == "core.RenewalError"


class TestErrorCodes:
    """Tests for module-qualified error codes."""

    @pytest.mark.parametrize(
        ("error", "code"),
        [
            (DomainError("x"), "transform.DomainError"),
            (NoMalthusianError("x"), "spectral.NoMalthusianError"),
            (BoundaryRootError("x"), "roots.BoundaryRootError"),
            (StripRootError("x"), "expansion.StripRootError"),
            (RootOnLineError("x"), "conditions.RootOnLineError"),
            (SchemaError("x"), "cli_io.SchemaError"),
            (PopulationCapError("x"), "oracle_sim.PopulationCapError"),
            (ConvergenceError("x"), "numerics.ConvergenceError"),
        ],
    )
    def test_codes(self, error: RenewalError, code: str) -> None:
        """Test that each error carries its module-qualified code."""
        assert error.code == code


class TestHierarchy:
    """Tests for the three error groups."""

    def test_model_errors(self) -> None:
        """Test that input errors are ModelErrors."""
        for cls in (DomainError, AssumptionError, SchemaError, DimensionError, LatticeSpanError):
            assert issubclass(cls, ModelError)

    def test_numerical_errors(self) -> None:
        """Test that solver failures are NumericalErrors."""
        for cls in (ConvergenceError, BoundaryRootError, QuadratureError, PopulationCapError):
            assert issubclass(cls, NumericalError)

    def test_verdict_errors(self) -> None:
        """Test that failed hypotheses are VerdictErrors."""
        for cls in (NoMalthusianError, StripRootError, RootOnLineError):
            assert issubclass(cls, VerdictError)

    def test_catch_with_base(self) -> None:
        """Test that specific errors can be caught with the base class."""
        with pytest.raises(RenewalError) as exc_info:
            raise StripRootError("root in strip")
        assert exc_info.value.message == "root in strip"


class TestErrorAttributes:
    """Tests for errors carrying extra data."""

    def test_schema_error_field_path(self) -> None:
        """Test that SchemaError stores the offending field path."""
        error = SchemaError("bad value", field_path="region.theta")
        assert error.field_path == "region.theta"
        assert error.message == "bad value"

    def test_schema_error_default_path(self) -> None:
        """Test that SchemaError has an empty default field path."""
        assert SchemaError("bad").field_path == ""

    def test_lattice_span_gcd(self) -> None:
        """Test that LatticeSpanError stores the support gcd."""
        assert LatticeSpanError("span", gcd=3).gcd == 3

    def test_population_cap_expected(self) -> None:
        """Test that PopulationCapError stores the expected size."""
        assert PopulationCapError("cap", expected=2.5e8).expected == 2.5e8
        assert PopulationCapError("cap").expected is None

    def test_assumption_rho(self) -> None:
        """Test that AssumptionError stores the spectral radius at zero."""
        assert AssumptionError("A2", rho_at_zero=1.0).rho_at_zero == 1.0

    def test_boundary_attempts(self) -> None:
        """Test that BoundaryRootError stores the nudge count."""
        assert BoundaryRootError("edge", attempts=8).attempts == 8

    def test_quadrature_nodes(self) -> None:
        """Test that QuadratureError stores the node count."""
        assert QuadratureError("nodes", nodes=16384).nodes == 16384


class TestGetExitCodeForError:
    """Tests for the get_exit_code_for_error mapping function."""

    def test_constants(self) -> None:
        """Test the exit code values."""
        assert (EXIT_OK, EXIT_ERROR, EXIT_VERDICT) == (0, 1, 2)

    @pytest.mark.parametrize("cls", [NoMalthusianError, StripRootError, RootOnLineError])
    def test_verdict_maps_to_two(self, cls: type[RenewalError]) -> None:
        """Test that verdict failures exit with status 2."""
        assert get_exit_code_for_error(cls("x")) == EXIT_VERDICT

    @pytest.mark.parametrize("cls", [DomainError, ConvergenceError, SchemaError])
    def test_other_errors_map_to_one(self, cls: type[RenewalError]) -> None:
        """Test that model and numerical errors exit with status 1."""
        assert get_exit_code_for_error(cls("x")) == EXIT_ERROR

    def test_foreign_exception(self) -> None:
        """Test that non-library exceptions exit with status 1."""
        assert get_exit_code_for_error(OSError("disk")) == EXIT_ERROR
