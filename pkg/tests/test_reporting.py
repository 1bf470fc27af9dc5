"""Tests for markov_renewal.reporting module.

Tests cover float formatting, comparison and simulation rows, CSV output,
the slope test and run report rows.
"""

import io
import json
from pathlib import Path

import numpy as np
import pytest

from markov_renewal.analysis.laurent import expansion_coefficients
from markov_renewal.analysis.roots import locate_roots
from markov_renewal.models.config import RunReport
from markov_renewal.models.measure import MeasureMatrix
from markov_renewal.models.results import (
    Expansion,
    ExpansionKind,
    ExpansionTerm,
    ScaledValue,
    SearchRegion,
    SimEstimate,
)
from markov_renewal.reporting import (
    COMPARISON_COLUMNS,
    SIMULATION_COLUMNS,
    as_array,
    comparison_rows,
    comparison_table,
    format_float,
    matrix_rows,
    root_rows,
    simulation_rows,
    slope_test,
    term_rows,
    write_csv,
    write_report,
)


class TestFormatting:
    """Tests for format_float and as_array."""

    @pytest.mark.parametrize(
        ("value", "expected"),
        [(0.1, "0.10000000000000001"), (2.0, "2"), (1e20, "1e+20")],
    )
    def test_seventeen_digits(self, value: float, expected: str) -> None:
        """Test the fixed 17-significant-digit form."""
        assert format_float(value) == expected

    def test_round_trip(self) -> None:
        """Test that formatted floats parse back to the same value."""
        for x in np.random.default_rng(0).normal(size=20):
            assert float(format_float(x)) == x

    def test_as_array_scaled(self) -> None:
        """Test that scaled values are multiplied out."""
        value = ScaledValue(mantissa=np.array([2.0]), exponent=1.0)
        assert as_array(value)[0] == pytest.approx(2.0 * np.e)


class TestComparisonRows:
    """Tests for the comparison_rows function."""

    def test_matrix_without_oracle(self) -> None:
        """Test 1-based matrix indices and empty oracle columns."""
        rows = comparison_rows(1.5, np.array([[1.0, 2.0], [3.0, 4.0]]))
        assert len(rows) == 4
        assert rows[1] == ("1.5", "1", "2", "2", "", "", "")

    def test_vector_with_oracle(self) -> None:
        """Test an empty entry_j for vectors and absolute and relative errors."""
        rows = comparison_rows(2.0, np.array([1.5, 0.0]), np.array([1.0, 0.0]))
        assert rows[0] == ("2", "1", "", "1.5", "1", "0.5", "0.5")
        assert rows[1][5:] == ("0", "0")

    def test_zero_oracle_with_error(self) -> None:
        """Test that a nonzero error against a zero oracle is infinitely relative."""
        rows = comparison_rows(0.0, np.array([1.0]), np.array([0.0]))
        assert rows[0][6] == "inf"


class TestComparisonTable:
    """Tests for the comparison_table function."""

    def test_report_rows(self) -> None:
        """Test that CSV rows parse back to report rows without loss."""
        matrix = comparison_rows(0.1, np.array([[1.5, 2.0]]), np.array([[1.0, 2.0]]))
        vector = comparison_rows(3.0, np.array([1.0]), np.array([0.0]))
        first, second, third = comparison_table(matrix + vector)
        assert (first.t, first.entry_i, first.entry_j) == (0.1, 1, 1)
        assert (first.expansion, first.oracle, first.abs_err) == (1.5, 1.0, 0.5)
        assert second.rel_err == 0.0
        assert third.entry_j is None
        assert third.rel_err == float("inf")


class TestSimulationRows:
    """Tests for the simulation_rows function."""

    def test_layout(self) -> None:
        """Test one score row plus one row per type at every time."""
        estimate = SimEstimate(
            initial_type=0,
            t_grid=(1.0, 2.0),
            mean=np.array([3.0, 7.0]),
            std_error=np.array([0.1, 0.2]),
            count_mean=np.array([[2.0, 1.0], [5.0, 2.0]]),
            count_std_error=np.zeros((2, 2)),
            replications=10,
            seed=0,
        )
        rows = simulation_rows([estimate])
        assert len(rows) == 6
        assert rows[0] == ("1", "1", "phi", "3", "0.10000000000000001", "10")
        assert rows[2] == ("1", "1", "2", "1", "0", "10")
        assert rows[3][:4] == ("2", "1", "phi", "7")


class TestWriteCsv:
    """Tests for the write_csv function."""

    def test_stream(self) -> None:
        """Test header and rows written to an open stream."""
        out = io.StringIO()
        write_csv(comparison_rows(1.0, np.array([2.0])), COMPARISON_COLUMNS, out)
        lines = out.getvalue().splitlines()
        assert lines[0] == ",".join(COMPARISON_COLUMNS)
        assert lines[1] == "1,1,,2,,,"

    def test_header_only(self) -> None:
        """Test that no rows still writes the header."""
        out = io.StringIO()
        write_csv([], SIMULATION_COLUMNS, out)
        assert out.getvalue() == ",".join(SIMULATION_COLUMNS) + "\n"

    def test_path(self, tmp_path: Path) -> None:
        """Test writing to a file path."""
        target = tmp_path / "out.csv"
        write_csv([("1", "2")], ("a", "b"), target)
        assert target.read_text(encoding="utf-8") == "a,b\n1,2\n"


class TestSlopeTest:
    """Tests for the slope_test function."""

    def test_decaying_residuals_pass(self) -> None:
        """Test residuals e^{-t} against theta = -0.5."""
        t = np.linspace(1.0, 10.0, 10)
        result = slope_test(t, np.exp(-t), -0.5, 1e-12)
        assert result.passed
        assert result.slope == pytest.approx(-1.0)
        assert result.threshold == pytest.approx(-0.45)
        assert result.points == 10

    def test_growing_residuals_fail(self) -> None:
        """Test residuals e^{t} against theta = 0."""
        t = np.linspace(1.0, 5.0, 5)
        result = slope_test(t, np.exp(t), 0.0, 0.0)
        assert not result.passed
        assert result.slope == pytest.approx(1.0)

    def test_exact(self) -> None:
        """Test that residuals under the floor pass as exact."""
        result = slope_test([1.0, 2.0, 3.0], [1e-15, 0.0, 2e-15], -1.0, 1e-12)
        assert result.exact and result.passed
        assert result.slope is None
        assert result.points == 0

    def test_too_few_points(self) -> None:
        """Test that fewer than three residuals above the floor pass without a fit."""
        result = slope_test([1.0, 2.0, 3.0], [1.0, 1e-20, 5.0], -1.0, 1e-12)
        assert result.passed and not result.exact
        assert result.points == 2

    def test_per_time_floor(self) -> None:
        """Test a floor given per time."""
        result = slope_test([1.0, 2.0, 3.0], [1.0, 1.0, 1.0], 0.0, [2.0, 2.0, 2.0])
        assert result.exact


class TestReportRows:
    """Tests for root, coefficient and term rows and the JSON report."""

    def test_root_and_matrix_rows(self, golden: MeasureMatrix, region: SearchRegion) -> None:
        """Test rows for the double root of the golden model."""
        roots = locate_roots(golden, region)
        coefficients = expansion_coefficients(golden, roots)
        (row,) = root_rows(roots)
        assert row.re == pytest.approx(1.0)
        assert row.det_multiplicity == 2
        rows = matrix_rows(coefficients)
        assert [r.name for r in rows] == ["C", "C", "B", "B"]
        assert rows[0].real[0][1] == pytest.approx(1.0)
        assert rows[0].imag[0][1] == pytest.approx(0.0, abs=1e-9)

    def test_term_rows(self) -> None:
        """Test real and imaginary parts of a term."""
        expansion = Expansion(
            kind=ExpansionKind.F_NONLATTICE,
            terms=(ExpansionTerm(lam=1.0 + 2.0j, power=1, coeff=np.array([1.0 - 1.0j])),),
            remainder_exponent=0.0,
            shape=(1,),
        )
        (row,) = term_rows(expansion)
        assert (row.root_re, row.root_im, row.power) == (1.0, 2.0, 1)
        assert row.real == [1.0] and row.imag == [-1.0]

    def test_write_report(self) -> None:
        """Test that the report is written as JSON."""
        out = io.StringIO()
        write_report(RunReport(verdict="fail"), out)
        assert json.loads(out.getvalue())["verdict"] == "fail"
