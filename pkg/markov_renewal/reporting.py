"""Machine-readable outputs: CSV tables, the slope test and run report rows.

All floats are written with 17 significant digits, so identical runs produce
byte-identical files.
"""

import csv
import logging
import sys
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import TextIO

import numpy as np

from markov_renewal.models.config import ComparisonRow, MatrixRow, RootRow, RunReport, TermRow
from markov_renewal.models.results import (
    Expansion,
    ExpansionCoefficients,
    RootRecord,
    ScaledValue,
    SimEstimate,
    SlopeTestResult,
)

logger = logging.getLogger(__name__)

COMPARISON_COLUMNS = ("t", "entry_i", "entry_j", "expansion", "oracle", "abs_err", "rel_err")
SIMULATION_COLUMNS = ("t", "entry_i", "entry_j", "mean", "std_error", "replications")
SCORE_ENTRY = "phi"
SLOPE_MARGIN = 0.05
MIN_FIT_POINTS = 3

Row = tuple[str, ...]


def format_float(x: float) -> str:
    """Fixed 17-significant-digit representation."""
    return f"{float(x):.17g}"


def as_array(value: np.ndarray | ScaledValue) -> np.ndarray:
    """Plain array from an evaluation result; scaled values may overflow to inf."""
    if isinstance(value, ScaledValue):
        return value.value()
    return np.asarray(value)


def _entries(shape: tuple[int, ...]) -> Iterable[tuple[tuple[int, ...], str, str]]:
    if len(shape) == 1:
        for i in range(shape[0]):
            yield (i,), str(i + 1), ""
    else:
        for i in range(shape[0]):
            for j in range(shape[1]):
                yield (i, j), str(i + 1), str(j + 1)


def _relative(abs_err: float, oracle: float) -> float:
    if oracle != 0.0:
        return abs_err / abs(oracle)
    return 0.0 if abs_err == 0.0 else float("inf")


def comparison_rows(
    t: float, expansion: np.ndarray, oracle: np.ndarray | None = None
) -> list[Row]:
    """Rows ``t, entry_i, entry_j, expansion, oracle, abs_err, rel_err`` for one time.

    Indices are 1-based; ``entry_j`` is empty for vectors. Without an oracle
    the last three columns are empty.
    """
    rows = []
    for idx, i, j in _entries(expansion.shape):
        value = float(expansion[idx])
        if oracle is None:
            rows.append((format_float(t), i, j, format_float(value), "", "", ""))
            continue
        ref = float(oracle[idx])
        abs_err = abs(value - ref)
        rows.append(
            (
                format_float(t),
                i,
                j,
                format_float(value),
                format_float(ref),
                format_float(abs_err),
                format_float(_relative(abs_err, ref)),
            )
        )
    return rows


def simulation_rows(estimates: Sequence[SimEstimate]) -> list[Row]:
    """Rows ``t, entry_i, entry_j, mean, std_error, replications``.

    ``entry_i`` is the ancestor type; ``entry_j`` is ``phi`` for the score
    ``Z_t`` and the type for mean births of that type.
    """
    rows = []
    for est in estimates:
        reps = str(est.replications)
        i = str(est.initial_type + 1)
        for k, t in enumerate(est.t_grid):
            rows.append(
                (
                    format_float(t),
                    i,
                    SCORE_ENTRY,
                    format_float(est.mean[k]),
                    format_float(est.std_error[k]),
                    reps,
                )
            )
            for j in range(est.count_mean.shape[1]):
                rows.append(
                    (
                        format_float(t),
                        i,
                        str(j + 1),
                        format_float(est.count_mean[k, j]),
                        format_float(est.count_std_error[k, j]),
                        reps,
                    )
                )
    return rows


def write_csv(
    rows: Iterable[Row], columns: Sequence[str], out: str | Path | TextIO | None = None
) -> None:
    """Write a header plus rows to a path, an open stream, or standard output."""
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="", encoding="utf-8") as fh:
            _write(fh, rows, columns)
        logger.info("wrote %s", out)
    else:
        _write(out or sys.stdout, rows, columns)


def _write(fh: TextIO, rows: Iterable[Row], columns: Sequence[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)


def slope_test(
    times: Sequence[float],
    residuals: Sequence[float],
    theta: float,
    floor: float | Sequence[float],
    margin: float = SLOPE_MARGIN,
) -> SlopeTestResult:
    """Least-squares slope of ``log residual`` against time.

    Residuals at or below the noise floor count as exact and are left out of
    the fit.

    Args:
        times: Evaluation times (or lattice indices).
        residuals: Nonnegative residual norms.
        theta: Remainder exponent of the expansion.
        floor: Noise floor, scalar or per time.
        margin: Allowed excess of the slope over ``theta``.

    Returns:
        Pass when every residual is below the floor, when fewer than three
        residuals lie above it, or when the slope is at most ``theta + margin``.
    """
    t = np.asarray(times, dtype=float)
    r = np.asarray(residuals, dtype=float)
    above = r > np.broadcast_to(np.asarray(floor, dtype=float), r.shape)
    threshold = theta + margin
    points = int(np.count_nonzero(above))
    if points == 0:
        return SlopeTestResult(slope=None, threshold=threshold, exact=True, passed=True, points=0)
    if points < MIN_FIT_POINTS:
        logger.warning("slope test: only %d residual(s) above the noise floor", points)
        return SlopeTestResult(
            slope=None, threshold=threshold, exact=False, passed=True, points=points
        )
    slope = float(np.polyfit(t[above], np.log(r[above]), 1)[0])
    passed = slope <= threshold
    if not passed:
        logger.warning("slope test: slope %.4g exceeds %.4g", slope, threshold)
    return SlopeTestResult(
        slope=slope, threshold=threshold, exact=False, passed=passed, points=points
    )


def _split(value: np.ndarray) -> tuple[list[object], list[object]]:
    arr = np.asarray(value, dtype=complex)
    return arr.real.tolist(), arr.imag.tolist()


def root_rows(roots: Sequence[RootRecord]) -> list[RootRow]:
    """Root table for a run report."""
    return [
        RootRow(
            re=complex(r.lam).real,
            im=complex(r.lam).imag,
            det_multiplicity=r.det_multiplicity,
            pole_order=r.pole_order,
        )
        for r in roots
    ]


def matrix_rows(coefficients: ExpansionCoefficients) -> list[MatrixRow]:
    """Every ``C``, ``B``, lattice ``B`` and ``b`` coefficient, one row each."""
    rows = []
    for rc in coefficients.roots:
        lam = complex(rc.lam)
        for name, series, offset in (
            ("C", rc.C, 0),
            ("B", rc.B, 0),
            ("lattice_B", rc.lattice_B, 1),
            ("b", rc.b, 0),
        ):
            for k, value in enumerate(series):
                real, imag = _split(value)
                rows.append(
                    MatrixRow(
                        name=name, root_re=lam.real, root_im=lam.imag, k=k + offset,
                        real=real, imag=imag,
                    )
                )
    return rows


def term_rows(expansion: Expansion) -> list[TermRow]:
    """Expansion terms for a run report."""
    rows = []
    for term in expansion.terms:
        lam = complex(term.lam)
        real, imag = _split(term.coeff)
        rows.append(
            TermRow(root_re=lam.real, root_im=lam.imag, power=term.power, real=real, imag=imag)
        )
    return rows


def comparison_table(rows: Sequence[Row]) -> list[ComparisonRow]:
    """Comparison CSV rows with an oracle, parsed back into report rows."""
    return [
        ComparisonRow(
            t=float(t),
            entry_i=int(i),
            entry_j=int(j) if j else None,
            expansion=float(value),
            oracle=float(ref),
            abs_err=float(abs_err),
            rel_err=float(rel_err),
        )
        for t, i, j, value, ref, abs_err, rel_err in rows
    ]


def write_report(report: RunReport, out: str | Path | TextIO | None = None) -> None:
    """Write a run report as indented JSON."""
    text = report.model_dump_json(indent=2) + "\n"
    if isinstance(out, (str, Path)):
        Path(out).write_text(text, encoding="utf-8")
        logger.info("wrote %s", out)
    else:
        (out or sys.stdout).write(text)
