"""Multi-type branching (Crump-Mode-Jagers) models for the Monte Carlo oracle.

Each ordered type pair ``(i, j)`` has a reproduction law: a homogeneous
Poisson process of rate ``rate`` on ``[0, inf)``, a fixed set of atoms with
deterministic birth ages, or the superposition of both. Each type has a
lifetime law and a deterministic score of age.
"""

from enum import Enum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from markov_renewal.exceptions import InvalidModelError
from markov_renewal.models.measure import (
    AtomTerm,
    Characteristic,
    CharacteristicComponent,
    ExpPolyTerm,
    FunctionTerm,
    MeasureMatrix,
    ScalarMeasure,
    StepTerm,
)

_CONFIG = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)


class ReproductionLaw(BaseModel):
    """Point process of births of type ``j`` to a parent of type ``i``.

    An atom of weight ``w`` yields ``floor(w)`` children at that age plus one
    more with probability ``w - floor(w)``.
    """

    model_config = _CONFIG

    rate: float = Field(0.0, ge=0.0, description="Poisson rate on [0, inf)")
    atoms: tuple[AtomTerm, ...] = Field(default=(), description="Deterministic birth ages")

    def intensity(self) -> ScalarMeasure:
        """Mean measure of the point process."""
        densities = (ExpPolyTerm(coefficient=self.rate),) if self.rate > 0.0 else ()
        return ScalarMeasure(atoms=self.atoms, densities=densities)


class LifetimeKind(str, Enum):
    """Lifetime distribution family."""

    DETERMINISTIC = "deterministic"
    EXPONENTIAL = "exponential"
    NONE = "none"


class LifetimeLaw(BaseModel):
    """Lifetime of an individual; ``value`` is the age at death or the death rate."""

    model_config = _CONFIG

    kind: LifetimeKind = Field(LifetimeKind.NONE, description="Distribution family")
    value: float = Field(0.0, ge=0.0, description="Lifetime zeta or exponential rate")

    @model_validator(mode="after")
    def check_value(self) -> "LifetimeLaw":
        """Exponential lifetimes need a positive rate."""
        if self.kind == LifetimeKind.EXPONENTIAL and self.value <= 0.0:
            raise ValueError("exponential lifetime needs a positive rate")
        return self


class ScoreKind(str, Enum):
    """Deterministic score phi(age) of an individual."""

    BORN = "born"
    ALIVE = "alive"
    FUNCTION = "function"


class TypeScore(BaseModel):
    """Score of one type; ``function`` is used when ``kind`` is ``function``."""

    model_config = _CONFIG

    kind: ScoreKind = Field(ScoreKind.BORN, description="Score kind")
    function: CharacteristicComponent | None = Field(None, description="Score of age")

    @model_validator(mode="after")
    def check_function(self) -> "TypeScore":
        """Function scores need a function."""
        if self.kind == ScoreKind.FUNCTION and self.function is None:
            raise ValueError("function score needs a 'function' component")
        return self


class BranchingModel(BaseModel):
    """p-type CMJ process with independent reproduction, lifetimes and scores."""

    model_config = _CONFIG

    reproduction: tuple[tuple[ReproductionLaw, ...], ...] = Field(
        ..., description="Row-major grid of reproduction laws"
    )
    lifetimes: tuple[LifetimeLaw, ...] = Field(default=(), description="Per-type lifetime")
    scores: tuple[TypeScore, ...] = Field(default=(), description="Per-type score")

    @field_validator("reproduction")
    @classmethod
    def check_square(
        cls, v: tuple[tuple[ReproductionLaw, ...], ...]
    ) -> tuple[tuple[ReproductionLaw, ...], ...]:
        """Require a non-empty square grid."""
        if not v or any(len(row) != len(v) for row in v):
            raise ValueError("reproduction must form a non-empty square grid")
        return v

    @model_validator(mode="before")
    @classmethod
    def fill_defaults(cls, data: Any) -> Any:
        """Default to immortal individuals scored at birth."""
        if isinstance(data, dict):
            p = len(data.get("reproduction") or ())
            data = dict(data)
            if not data.get("lifetimes"):
                data["lifetimes"] = tuple(LifetimeLaw() for _ in range(p))
            if not data.get("scores"):
                data["scores"] = tuple(TypeScore() for _ in range(p))
        return data

    @model_validator(mode="after")
    def check_lengths(self) -> "BranchingModel":
        """Require one lifetime and one score per type."""
        if len(self.lifetimes) != self.p or len(self.scores) != self.p:
            raise ValueError("lifetimes and scores need one entry per type")
        return self

    @property
    def p(self) -> int:
        """Number of types."""
        return len(self.reproduction)

    def intensity_matrix(self) -> MeasureMatrix:
        """Exact mean measure matrix of the reproduction laws."""
        return MeasureMatrix(
            entries=tuple(tuple(law.intensity() for law in row) for row in self.reproduction)
        )

    def mean_characteristic(self) -> Characteristic:
        """``f_i(t) = E[phi_i(t)]`` for every type."""
        components = []
        for life, score in zip(self.lifetimes, self.scores, strict=True):
            if score.kind == ScoreKind.FUNCTION:
                assert score.function is not None
                components.append(score.function)
            elif score.kind == ScoreKind.BORN or life.kind == LifetimeKind.NONE:
                step = StepTerm(location=0.0, jump=1.0)
                components.append(CharacteristicComponent(steps=(step,)))
            elif life.kind == LifetimeKind.DETERMINISTIC:
                components.append(
                    CharacteristicComponent(
                        steps=(
                            StepTerm(location=0.0, jump=1.0),
                            StepTerm(location=life.value, jump=-1.0),
                        )
                    )
                )
            else:
                components.append(
                    CharacteristicComponent(
                        functions=(FunctionTerm(coefficient=1.0, rate=life.value),)
                    )
                )
        return Characteristic(components=tuple(components))

    @classmethod
    def from_measure_matrix(cls, M: MeasureMatrix) -> "BranchingModel":
        """Build a model whose intensities equal ``M``.

        Only constant densities (``k = 0``, ``beta = 0``) and atoms are representable.

        Raises:
            InvalidModelError: If an entry has another density term.
        """
        rows = []
        for row in M.entries:
            laws = []
            for m in row:
                rate = 0.0
                for d in m.densities:
                    if d.coefficient == 0.0:
                        continue
                    if d.power != 0 or d.rate != 0.0:
                        raise InvalidModelError(
                            "only Poisson (constant) densities can be simulated directly; "
                            "add a 'branching' block"
                        )
                    rate += d.coefficient
                laws.append(ReproductionLaw(rate=rate, atoms=m.atoms))
            rows.append(tuple(laws))
        return cls(reproduction=tuple(rows))
