"""Run configuration and run report models.

A configuration document has the blocks ``model``, ``characteristic``,
``branching``, ``region``, ``tolerances``, ``oracle`` and ``outputs``. The
``model`` block is either a measure matrix (``{"entries": [[...]]}``) or a
lattice matrix (``{"h": 1, "weights": [[...]]}``).
"""

from enum import Enum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from markov_renewal.models.branching import BranchingModel
from markov_renewal.models.measure import (
    Characteristic,
    LatticeCharacteristic,
    LatticeMeasureMatrix,
    MeasureMatrix,
)
from markov_renewal.models.results import ConditionReport, SlopeTestResult

_CONFIG = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)


class Tolerances(BaseModel):
    """Numerical tolerances shared by every module."""

    model_config = _CONFIG

    tol_det: float = Field(1e-10, gt=0.0, description="Root residual |det| bound")
    tol_laurent: float = Field(1e-9, gt=0.0, description="Relative pole-order threshold")
    tol_rho: float = Field(1e-12, gt=0.0, description="Malthusian |varrho - 1| bound")
    cluster: float = Field(1e-8, gt=0.0, description="Root merge distance (relative)")
    boundary_floor: float = Field(1e-13, gt=0.0, description="Contour |det| floor (relative)")
    max_depth: int = Field(40, ge=1, description="Maximum subdivision depth")
    max_nodes: int = Field(2**14, ge=64, description="Maximum contour nodes per edge")


class RegionSpec(BaseModel):
    """Search region parameters; missing edges are derived from the model."""

    model_config = _CONFIG

    theta: float = Field(..., description="Left edge / remainder exponent")
    re_max: float | None = Field(None, description="Right edge, default alpha + 1")
    im_max: float | None = Field(None, gt=0.0, description="Band half-height, default 50")


class OracleKind(str, Enum):
    """Oracle used by ``validate``."""

    AUTO = "auto"
    LATTICE = "lattice"
    GRID = "grid"


class OracleSpec(BaseModel):
    """Oracle and Monte Carlo settings."""

    model_config = _CONFIG

    kind: OracleKind = Field(OracleKind.AUTO, description="Oracle selection")
    lattice_n: int = Field(60, ge=1, description="Lattice horizon N")
    grid_t: float = Field(3.0, gt=0.0, description="Grid horizon T")
    grid_h: float = Field(1e-3, gt=0.0, description="Grid step h")
    t_values: tuple[float, ...] = Field(default=(), description="Evaluation times")
    mc_replications: int = Field(10_000, ge=1, description="Monte Carlo replications")
    seed: int = Field(0, ge=0, lt=2**64, description="Root seed")
    population_cap: float = Field(1e7, gt=0.0, description="Expected individuals cap")


class OutputSpec(BaseModel):
    """Output file paths; ``None`` writes to standard output."""

    model_config = _CONFIG

    csv: str | None = Field(None, description="CSV output path")
    report: str | None = Field(None, description="JSON report path")


class RunConfig(BaseModel):
    """Validated run configuration."""

    model_config = _CONFIG

    model: MeasureMatrix | LatticeMeasureMatrix = Field(..., description="Analyzed model")
    characteristic: Characteristic | LatticeCharacteristic | None = Field(
        None, description="Characteristic f; U is expanded when absent"
    )
    branching: BranchingModel | None = Field(None, description="Simulated branching model")
    region: RegionSpec = Field(..., description="Search region")
    tolerances: Tolerances = Field(default_factory=Tolerances, description="Tolerances")
    oracle: OracleSpec = Field(default_factory=OracleSpec, description="Oracle settings")
    outputs: OutputSpec = Field(default_factory=OutputSpec, description="Output paths")

    @property
    def is_lattice(self) -> bool:
        return isinstance(self.model, LatticeMeasureMatrix)


class RootRow(BaseModel):
    """Root table row."""

    re: float
    im: float
    det_multiplicity: int
    pole_order: int | None = None


class MatrixRow(BaseModel):
    """Coefficient matrix or vector split into real and imaginary parts."""

    name: str = Field(..., description="C, B, lattice_B or b")
    root_re: float
    root_im: float
    k: int
    real: list[Any]
    imag: list[Any]


class TermRow(BaseModel):
    """Expansion term row."""

    root_re: float
    root_im: float
    power: int
    real: list[Any]
    imag: list[Any]


class ComparisonRow(BaseModel):
    """Expansion value against the oracle at one time and matrix or vector entry."""

    t: float
    entry_i: int
    entry_j: int | None = Field(None, description="Empty for vectors")
    expansion: float
    oracle: float
    abs_err: float
    rel_err: float


class ErrorRow(BaseModel):
    """Error surfaced during a command."""

    code: str
    message: str


class RunReport(BaseModel):
    """Machine-readable outcome of ``mre analyze``."""

    assumptions: dict[str, bool] = Field(default_factory=dict)
    abscissa: float | None = None
    rho_at_zero: float | None = None
    malthusian: dict[str, Any] | None = None
    region: dict[str, float] | None = None
    roots: list[RootRow] = Field(default_factory=list)
    coefficients: list[MatrixRow] = Field(default_factory=list)
    expansion_kind: str | None = None
    remainder_exponent: float | None = None
    terms: list[TermRow] = Field(default_factory=list)
    comparison: list[ComparisonRow] = Field(default_factory=list)
    slope_test: SlopeTestResult | None = None
    conditions: list[ConditionReport] = Field(default_factory=list)
    errors: list[ErrorRow] = Field(default_factory=list)
    timings: dict[str, float] = Field(default_factory=dict)
    verdict: str = "pass"
