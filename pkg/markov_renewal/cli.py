"""Command line interface ``mre``.

Subcommands:
- analyze: assumptions, Malthusian parameter, roots, coefficients, conditions and the
  oracle comparison (JSON report)
- expand: expansion values at the requested times (CSV)
- validate: expansion against the exact lattice recursion or the grid oracle (CSV)
- simulate: Monte Carlo means of the branching process (CSV)

Exit status is 0 on pass, 2 when a mathematical verdict fails and 1 on errors.
"""

import argparse
import logging
import sys
import time
from collections.abc import Callable, Mapping, Sequence
from math import ceil
from pathlib import Path
from typing import Any

import daiquiri
import numpy as np
from pydantic import ValidationError

from markov_renewal import __version__
from markov_renewal._engine_base import DEFAULT_IM_MAX, ExpansionEngine
from markov_renewal.analysis.expansion import evaluate
from markov_renewal.analysis.laurent import with_pole_orders
from markov_renewal.analysis.measures import lattice_to_measure_matrix
from markov_renewal.analysis.oracle import extrapolate
from markov_renewal.engine import LatticeRenewalEngine, RenewalEngine
from markov_renewal.exceptions import (
    EXIT_ERROR,
    EXIT_OK,
    EXIT_VERDICT,
    DimensionError,
    RenewalError,
    SchemaError,
    get_exit_code_for_error,
)
from markov_renewal.models.config import ErrorRow, OracleKind, RunConfig, RunReport
from markov_renewal.models.measure import (
    Characteristic,
    LatticeCharacteristic,
    LatticeMeasureMatrix,
    MeasureMatrix,
)
from markov_renewal.models.results import ConditionReport, SlopeTestResult, Verdict
from markov_renewal.reporting import (
    COMPARISON_COLUMNS,
    SIMULATION_COLUMNS,
    Row,
    as_array,
    comparison_rows,
    comparison_table,
    matrix_rows,
    root_rows,
    simulation_rows,
    slope_test,
    term_rows,
    write_csv,
    write_report,
)

logger = logging.getLogger(__name__)

# Residuals of an exact oracle below this fraction of ||F(n)|| are rounding noise.
EXACT_FLOOR = 1e-10
GRID_FLOOR_FACTOR = 2.0
GRID_POINTS = 11


def _field_path(loc: Sequence[int | str]) -> str:
    return ".".join(str(part) for part in loc)


def parse_config(document: str | bytes | Mapping[str, Any]) -> RunConfig:
    """Validate a configuration document.

    Args:
        document: JSON text or an already decoded mapping.

    Returns:
        The validated configuration with every default applied.

    Raises:
        SchemaError: If the document violates the schema; ``field_path`` names
            the first offending field.
        DimensionError: If the blocks disagree on the number of types.
    """
    try:
        if isinstance(document, (str, bytes)):
            cfg = RunConfig.model_validate_json(document)
        else:
            cfg = RunConfig.model_validate(document)
    except ValidationError as exc:
        first = exc.errors()[0]
        path = _field_path(first["loc"])
        raise SchemaError(f"{path or 'document'}: {first['msg']}", field_path=path) from exc

    p = cfg.model.p
    if cfg.characteristic is not None:
        if cfg.characteristic.p != p:
            raise DimensionError(
                f"characteristic has {cfg.characteristic.p} components, the model has {p} types"
            )
        lattice_f = isinstance(cfg.characteristic, LatticeCharacteristic)
        if lattice_f != cfg.is_lattice:
            kind = "lattice" if cfg.is_lattice else "non-lattice"
            raise SchemaError(
                f"characteristic must match the {kind} model", field_path="characteristic"
            )
    if cfg.branching is not None and cfg.branching.p != p:
        raise DimensionError(
            f"branching model has {cfg.branching.p} types, the model has {p} types"
        )
    return cfg


def serialize_config(cfg: RunConfig) -> str:
    """JSON document that ``parse_config`` turns back into ``cfg``."""
    return cfg.model_dump_json(by_alias=True, indent=2)


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a configuration file.

    Raises:
        SchemaError: If the file cannot be read or is invalid.
        DimensionError: If the blocks disagree on the number of types.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text)


def make_engine(cfg: RunConfig) -> ExpansionEngine:
    """Engine matching the configured model."""
    if isinstance(cfg.model, LatticeMeasureMatrix):
        return LatticeRenewalEngine(cfg.model, cfg.tolerances)
    return RenewalEngine(cfg.model, cfg.tolerances)


class _Stages:
    """Runs pipeline stages, recording errors instead of raising them."""

    def __init__(self) -> None:
        self.errors: list[ErrorRow] = []
        self.exit_codes: list[int] = []

    def run(self, stage: Callable[[], Any]) -> Any:
        try:
            return stage()
        except RenewalError as exc:
            logger.warning("%s: %s", exc.code, exc.message)
            self.errors.append(ErrorRow(code=exc.code, message=exc.message))
            self.exit_codes.append(get_exit_code_for_error(exc))
            return None


def _conditions(
    engine: RenewalEngine, cfg: RunConfig, stages: _Stages
) -> list[ConditionReport]:
    vartheta = cfg.region.theta
    eta_max = cfg.region.im_max or DEFAULT_IM_MAX
    reports = []
    for check in (
        lambda: engine.check_B(vartheta),
        lambda: engine.check_E(vartheta, eta_max),
    ):
        report = stages.run(check)
        if report is not None:
            reports.append(report)
    return reports


def cmd_analyze(cfg: RunConfig) -> RunReport:
    """Assumptions, Malthusian parameter, roots, coefficients, expansion and conditions.

    With ``oracle.t_values`` configured, the expansion is also compared with
    the oracle ``validate`` uses and the slope test is recorded.

    Errors of individual stages are recorded in the report; its ``verdict``
    is ``error`` if any stage failed numerically, ``fail`` if a mathematical
    verdict or the slope test failed and ``pass`` otherwise.
    """
    stages = _Stages()
    fields: dict[str, Any] = {}
    with make_engine(cfg) as engine:
        assumptions = engine.assumptions()
        fields["assumptions"] = {
            "A1": assumptions.a1,
            "A2": assumptions.a2,
            "A3": assumptions.a3,
        }
        fields["abscissa"] = assumptions.abscissa
        fields["rho_at_zero"] = assumptions.rho_at_zero

        malthusian = stages.run(engine.malthusian)
        if malthusian is not None:
            fields["malthusian"] = malthusian.model_dump()
            coefficients = stages.run(
                lambda: engine.expansion_coefficients(cfg.region, cfg.characteristic)
            )
            if coefficients is not None:
                roots = engine.located_roots(cfg.region)
                fields["roots"] = root_rows(with_pole_orders(roots, coefficients))
                fields["coefficients"] = matrix_rows(coefficients)
                if isinstance(engine, RenewalEngine):
                    region = engine.search_region(cfg.region)
                    fields["region"] = region.model_dump()
            expansion = stages.run(lambda: engine.expand(cfg.region, cfg.characteristic))
            if expansion is not None:
                fields["expansion_kind"] = expansion.kind.value
                fields["remainder_exponent"] = expansion.remainder_exponent
                fields["terms"] = term_rows(expansion)
                if cfg.oracle.t_values:
                    compared = stages.run(lambda: _compare(cfg, engine))
                    if compared is not None:
                        rows, slope_result = compared
                        fields["comparison"] = comparison_table(rows)
                        fields["slope_test"] = slope_result

        conditions: list[ConditionReport] = []
        if isinstance(engine, RenewalEngine):
            conditions = _conditions(engine, cfg, stages)
        fields["conditions"] = conditions
        fields["timings"] = dict(engine.timings)

    failed = any(c.verdict == Verdict.FAIL for c in conditions)
    slope = fields.get("slope_test")
    failed = failed or (slope is not None and not slope.passed)
    if EXIT_ERROR in stages.exit_codes:
        verdict = "error"
    elif EXIT_VERDICT in stages.exit_codes or failed:
        verdict = "fail"
    else:
        verdict = "pass"
    return RunReport(errors=stages.errors, verdict=verdict, **fields)


def report_exit_code(report: RunReport) -> int:
    """Exit status for an analysis report."""
    return {"pass": EXIT_OK, "fail": EXIT_VERDICT}.get(report.verdict, EXIT_ERROR)


def cmd_expand(cfg: RunConfig, t_values: Sequence[float]) -> list[Row]:
    """Expansion values at every time, one CSV row per matrix or vector entry."""
    if not t_values:
        return []
    with make_engine(cfg) as engine:
        expansion = engine.expand(cfg.region, cfg.characteristic)
    rows: list[Row] = []
    for t in t_values:
        rows.extend(comparison_rows(t, as_array(evaluate(expansion, t))))
    return rows


def _oracle_kind(cfg: RunConfig) -> OracleKind:
    kind = cfg.oracle.kind
    if kind == OracleKind.AUTO:
        return OracleKind.LATTICE if cfg.is_lattice else OracleKind.GRID
    if (kind == OracleKind.LATTICE) != cfg.is_lattice:
        raise SchemaError(
            f"oracle '{kind.value}' does not fit the configured model", field_path="oracle.kind"
        )
    return kind


def _validate_lattice(
    cfg: RunConfig, engine: LatticeRenewalEngine
) -> tuple[list[Row], SlopeTestResult]:
    f = cfg.characteristic
    assert f is None or isinstance(f, LatticeCharacteristic)
    N = cfg.oracle.lattice_n
    expansion = engine.expand(cfg.region, f)
    exact = engine.exact(N, f)
    window = range(ceil(N / 3), N + 1)
    indices = [int(t) for t in cfg.oracle.t_values] or list(range(N + 1))
    rows: list[Row] = []
    for n in indices:
        if 0 <= n <= N:
            rows.extend(comparison_rows(n, as_array(evaluate(expansion, n)), exact[n]))
    residuals = [
        float(np.max(np.abs(as_array(evaluate(expansion, n)) - exact[n]))) for n in window
    ]
    floors = [EXACT_FLOOR * max(1.0, float(np.max(np.abs(exact[n])))) for n in window]
    result = slope_test(list(window), residuals, expansion.remainder_exponent, floors)
    return rows, result


def _validate_grid(cfg: RunConfig, engine: RenewalEngine) -> tuple[list[Row], SlopeTestResult]:
    f = cfg.characteristic
    assert f is None or isinstance(f, Characteristic)
    T, h = cfg.oracle.grid_t, cfg.oracle.grid_h
    expansion = engine.expand(cfg.region, f)
    coarse = engine.grid_oracle(T, h, f)
    fine = engine.grid_oracle(T, h / 2.0, f)
    requested = list(cfg.oracle.t_values) or np.linspace(T / 3.0, T, GRID_POINTS).tolist()
    beyond = [t for t in requested if t > T]
    if beyond:
        logger.warning("skipping times %s beyond the grid horizon %g", beyond, T)
    # Snap to the coarse grid, where both oracle solutions are sampled exactly.
    times = [h * round(t / h) for t in requested if t <= T]
    rows: list[Row] = []
    residuals = []
    floors = []
    for t in times:
        value = as_array(evaluate(expansion, t))
        oracle, error = extrapolate(coarse, fine, t)
        rows.extend(comparison_rows(t, value, oracle))
        residuals.append(float(np.max(np.abs(value - oracle))))
        floors.append(GRID_FLOOR_FACTOR * float(np.max(error)))
    result = slope_test(times, residuals, expansion.remainder_exponent, floors)
    return rows, result


def _compare(cfg: RunConfig, engine: ExpansionEngine) -> tuple[list[Row], SlopeTestResult]:
    if _oracle_kind(cfg) == OracleKind.LATTICE:
        assert isinstance(engine, LatticeRenewalEngine)
        return _validate_lattice(cfg, engine)
    assert isinstance(engine, RenewalEngine)
    return _validate_grid(cfg, engine)


def cmd_validate(cfg: RunConfig) -> tuple[list[Row], SlopeTestResult]:
    """Compare the expansion with the exact lattice recursion or the grid oracle.

    Lattice models use the residual window ``n in [N/3, N]``; non-lattice
    models compare against the Richardson combination of grid solutions with
    steps ``h`` and ``h/2``, with twice their difference as the noise floor.

    Returns:
        Comparison rows and the slope-test result.

    Raises:
        SchemaError: If the selected oracle does not fit the model.
    """
    with make_engine(cfg) as engine:
        rows, result = _compare(cfg, engine)
    logger.info("slope test %s (slope %s)", "passed" if result.passed else "failed", result.slope)
    return rows, result


def cmd_simulate(cfg: RunConfig) -> list[Row]:
    """Monte Carlo means with standard errors for every ancestor type.

    Raises:
        SchemaError: If no evaluation times are configured.
        InvalidModelError: If the branching block does not match the model.
        PopulationCapError: If the expected population exceeds the cap.
    """
    if not cfg.oracle.t_values:
        raise SchemaError("simulate needs evaluation times", field_path="oracle.t_values")
    M = cfg.model
    if isinstance(M, LatticeMeasureMatrix):
        M = lattice_to_measure_matrix(M)
    assert isinstance(M, MeasureMatrix)
    with RenewalEngine(M, cfg.tolerances) as engine:
        estimates = engine.simulate(
            sorted(cfg.oracle.t_values),
            cfg.oracle.mc_replications,
            cfg.oracle.seed,
            branching=cfg.branching,
            population_cap=cfg.oracle.population_cap,
        )
    return simulation_rows(estimates)


def _times(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.replace(" ", "").split(",") if part)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid time list {text!r}") from exc


def _log_level(text: str) -> int:
    if text.lstrip("-").isdigit():
        return int(text)
    level = logging.getLevelName(text.upper())
    if not isinstance(level, int):
        raise argparse.ArgumentTypeError(f"unknown log level {text!r}")
    return level


def build_parser() -> argparse.ArgumentParser:
    """Argument parser for ``mre``."""
    parser = argparse.ArgumentParser(
        prog="mre", description="Asymptotic expansions of Markov renewal equations"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("analyze", "roots, coefficients and condition checks as a JSON report"),
        ("expand", "expansion values at the given times"),
        ("validate", "expansion against the exact or grid oracle"),
        ("simulate", "Monte Carlo means of the branching process"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="Configuration document (JSON)")
        cmd.add_argument("--t", type=_times, default=None, help="Comma-separated times")
        cmd.add_argument("--out", default=None, help="Output path; standard output if omitted")
        cmd.add_argument("--seed", type=int, default=None, help="Root seed for simulate")
        cmd.add_argument(
            "-l",
            "--log-level",
            type=_log_level,
            default=logging.WARNING,
            help="Log level as a number or name",
        )
        cmd.add_argument(
            "-v", "--verbose", action="store_true", help="Shortcut for --log-level INFO"
        )
    return parser


def setup_logging(level: int) -> None:
    """Send log records to standard error."""
    output = daiquiri.output.Stream(
        sys.stderr,
        formatter=daiquiri.formatter.ColorFormatter(fmt="[%(levelname)s] %(name)s: %(message)s"),
    )
    daiquiri.setup(level=level, outputs=[output])


def _with_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    updates: dict[str, Any] = {}
    if args.t is not None:
        updates["t_values"] = args.t
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise SchemaError("seed must be an unsigned 64-bit integer", field_path="oracle.seed")
        updates["seed"] = args.seed
    if not updates:
        return cfg
    return cfg.model_copy(update={"oracle": cfg.oracle.model_copy(update=updates)})


def _run(args: argparse.Namespace) -> int:
    cfg = _with_overrides(load_config(args.config), args)
    start = time.perf_counter()
    if args.command == "analyze":
        report = cmd_analyze(cfg)
        write_report(report, args.out or cfg.outputs.report)
        code = report_exit_code(report)
    elif args.command == "expand":
        write_csv(
            cmd_expand(cfg, cfg.oracle.t_values), COMPARISON_COLUMNS, args.out or cfg.outputs.csv
        )
        code = EXIT_OK
    elif args.command == "validate":
        rows, result = cmd_validate(cfg)
        write_csv(rows, COMPARISON_COLUMNS, args.out or cfg.outputs.csv)
        print(f"slope test: {'pass' if result.passed else 'fail'}", file=sys.stderr)
        code = EXIT_OK if result.passed else EXIT_VERDICT
    else:
        write_csv(cmd_simulate(cfg), SIMULATION_COLUMNS, args.out or cfg.outputs.csv)
        code = EXIT_OK
    logger.info("%s finished in %.3fs", args.command, time.perf_counter() - start)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point of ``mre``; returns the exit status."""
    args = build_parser().parse_args(argv)
    setup_logging(logging.INFO if args.verbose else args.log_level)
    try:
        return _run(args)
    except RenewalError as exc:
        print(f"error[{exc.code}]: {exc.message}", file=sys.stderr)
        return get_exit_code_for_error(exc)
    except OSError as exc:
        print(f"error[cli_io.OSError]: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
