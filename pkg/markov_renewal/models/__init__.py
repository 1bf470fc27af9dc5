"""Pydantic models for measures, results, branching models and configuration."""

from markov_renewal.models.branching import (
    BranchingModel,
    LifetimeKind,
    LifetimeLaw,
    ReproductionLaw,
    ScoreKind,
    TypeScore,
)
from markov_renewal.models.config import (
    OracleKind,
    OracleSpec,
    OutputSpec,
    RegionSpec,
    RunConfig,
    RunReport,
    Tolerances,
)
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
    StepTerm,
)
from markov_renewal.models.results import (
    AssumptionReport,
    ConditionId,
    ConditionReport,
    DomainAbscissa,
    Expansion,
    ExpansionCoefficients,
    ExpansionKind,
    ExpansionTerm,
    GridSolution,
    LaurentData,
    MalthusianResult,
    Rectangle,
    RootCoefficients,
    RootRecord,
    ScaledValue,
    SearchRegion,
    SimEstimate,
    SlopeTestResult,
    SpectralProfile,
    TransformValue,
    Verdict,
)

__all__ = [
    "AssumptionReport",
    "AtomTerm",
    "BranchingModel",
    "Characteristic",
    "CharacteristicComponent",
    "ConditionId",
    "ConditionReport",
    "DomainAbscissa",
    "ExpPolyTerm",
    "Expansion",
    "ExpansionCoefficients",
    "ExpansionKind",
    "ExpansionTerm",
    "FunctionTerm",
    "GridSolution",
    "LatticeCharacteristic",
    "LatticeMeasureMatrix",
    "LaurentData",
    "LifetimeKind",
    "LifetimeLaw",
    "MalthusianResult",
    "MeasureMatrix",
    "OracleKind",
    "OracleSpec",
    "OutputSpec",
    "Rectangle",
    "RegionSpec",
    "ReproductionLaw",
    "RootCoefficients",
    "RootRecord",
    "RunConfig",
    "RunReport",
    "ScalarMeasure",
    "ScaledValue",
    "ScoreKind",
    "SearchRegion",
    "SimEstimate",
    "SlopeTestResult",
    "SpectralProfile",
    "StepTerm",
    "Tolerances",
    "TransformValue",
    "TypeScore",
    "Verdict",
]
