"""Measure and characteristic models.

This module defines the closed family of measures the engine works with:
- AtomTerm, ExpPolyTerm: point masses and densities ``c * x**k * exp(-beta * x)``
- ScalarMeasure, MeasureMatrix: non-lattice measures and p x p matrices of them
- LatticeMeasureMatrix: finite-support weights on the lattice ``h * N0``
- StepTerm, FunctionTerm, CharacteristicComponent, Characteristic: mean
  characteristics ``f(t)`` built from steps and exponential-polynomial terms
- LatticeCharacteristic: finitely supported characteristic sequences

All models are frozen and hashable. JSON documents use the short aliases
(``loc``, ``w``, ``c``, ``k``, ``beta``, ``exp_poly``, ``h``, ``jump``).
"""

from math import isfinite

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

_MODEL_CONFIG = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)


class AtomTerm(BaseModel):
    """Point mass ``weight * delta_location``."""

    model_config = _MODEL_CONFIG

    location: float = Field(..., ge=0.0, alias="loc", description="Atom location")
    weight: float = Field(..., ge=0.0, alias="w", description="Atom mass")


class ExpPolyTerm(BaseModel):
    """Density term ``coefficient * x**power * exp(-rate * x)`` on ``[0, inf)``.

    Negative rates describe growing densities; they remain locally finite.
    """

    model_config = _MODEL_CONFIG

    coefficient: float = Field(..., ge=0.0, alias="c", description="Nonnegative coefficient")
    power: int = Field(0, ge=0, alias="k", description="Polynomial power k")
    rate: float = Field(0.0, alias="beta", description="Exponential rate beta")

    @field_validator("coefficient", "rate")
    @classmethod
    def check_finite(cls, v: float) -> float:
        """Reject infinities and NaN."""
        if not isfinite(v):
            raise ValueError("must be finite")
        return v


class ScalarMeasure(BaseModel):
    """Locally finite measure on ``[0, inf)``: atoms plus exponential-polynomial densities."""

    model_config = _MODEL_CONFIG

    atoms: tuple[AtomTerm, ...] = Field(default=(), description="Point masses")
    densities: tuple[ExpPolyTerm, ...] = Field(
        default=(), alias="exp_poly", description="Density terms"
    )

    @property
    def is_zero(self) -> bool:
        """True if the measure puts no mass anywhere."""
        return all(a.weight == 0.0 for a in self.atoms) and all(
            d.coefficient == 0.0 for d in self.densities
        )

    def __add__(self, other: "ScalarMeasure") -> "ScalarMeasure":
        return ScalarMeasure(
            atoms=self.atoms + other.atoms, densities=self.densities + other.densities
        )


class MeasureMatrix(BaseModel):
    """A p x p matrix of scalar measures ``mu^{i,j}``."""

    model_config = _MODEL_CONFIG

    entries: tuple[tuple[ScalarMeasure, ...], ...] = Field(
        ..., description="Row-major grid of scalar measures"
    )

    @field_validator("entries")
    @classmethod
    def check_square(
        cls, v: tuple[tuple[ScalarMeasure, ...], ...]
    ) -> tuple[tuple[ScalarMeasure, ...], ...]:
        """Require a non-empty square grid."""
        if not v:
            raise ValueError("at least one type is required")
        if any(len(row) != len(v) for row in v):
            raise ValueError("entries must form a square grid")
        return v

    @property
    def p(self) -> int:
        """Number of types."""
        return len(self.entries)

    @classmethod
    def zeros(cls, p: int) -> "MeasureMatrix":
        """Return the p x p zero measure matrix."""
        return cls(entries=tuple(tuple(ScalarMeasure() for _ in range(p)) for _ in range(p)))

    def __add__(self, other: "MeasureMatrix") -> "MeasureMatrix":
        if other.p != self.p:
            raise ValueError("cannot add measure matrices of different size")
        return MeasureMatrix(
            entries=tuple(
                tuple(a + b for a, b in zip(ra, rb, strict=True))
                for ra, rb in zip(self.entries, other.entries, strict=True)
            )
        )


class LatticeMeasureMatrix(BaseModel):
    """A p x p matrix of finite-support weight vectors on the lattice ``h * N0``.

    ``weights[i][j][n]`` is the mass of ``mu^{i,j}`` at ``n * h``.
    """

    model_config = _MODEL_CONFIG

    span: float = Field(1.0, gt=0.0, alias="h", description="Lattice span h")
    weights: tuple[tuple[tuple[float, ...], ...], ...] = Field(
        ..., description="Row-major grid of weight vectors"
    )

    @field_validator("weights")
    @classmethod
    def check_weights(
        cls, v: tuple[tuple[tuple[float, ...], ...], ...]
    ) -> tuple[tuple[tuple[float, ...], ...], ...]:
        """Require a square grid of finite nonnegative weights."""
        if not v:
            raise ValueError("at least one type is required")
        if any(len(row) != len(v) for row in v):
            raise ValueError("weights must form a square grid")
        for row in v:
            for vec in row:
                if any(w < 0.0 or not isfinite(w) for w in vec):
                    raise ValueError("weights must be finite and nonnegative")
        return v

    @property
    def p(self) -> int:
        """Number of types."""
        return len(self.weights)

    @property
    def max_index(self) -> int:
        """Largest lattice index carrying a weight slot."""
        return max((len(vec) - 1 for row in self.weights for vec in row), default=0)


class StepTerm(BaseModel):
    """Jump of height ``jump`` at ``location``, contributing ``jump * 1[location, inf)``."""

    model_config = _MODEL_CONFIG

    location: float = Field(..., ge=0.0, alias="loc", description="Jump location")
    jump: float = Field(..., description="Jump height, may be negative")


class FunctionTerm(ExpPolyTerm):
    """Function term ``c * t**k * exp(-beta * t)`` for ``t >= 0``; any sign of ``c``."""

    coefficient: float = Field(..., alias="c", description="Coefficient of any sign")


class CharacteristicComponent(BaseModel):
    """One component ``f_i`` of a characteristic: steps plus function terms."""

    model_config = _MODEL_CONFIG

    steps: tuple[StepTerm, ...] = Field(default=(), description="Jump terms")
    functions: tuple[FunctionTerm, ...] = Field(
        default=(), alias="exp_poly", description="Exponential-polynomial terms"
    )

    @property
    def is_zero(self) -> bool:
        """True if every term vanishes."""
        return all(s.jump == 0.0 for s in self.steps) and all(
            g.coefficient == 0.0 for g in self.functions
        )


class Characteristic(BaseModel):
    """Vector characteristic ``f = (f_1, ..., f_p)`` vanishing on the negative half-line."""

    model_config = _MODEL_CONFIG

    components: tuple[CharacteristicComponent, ...] = Field(
        ..., min_length=1, description="One component per type"
    )

    @property
    def p(self) -> int:
        """Number of components."""
        return len(self.components)

    @classmethod
    def indicator(cls, p: int, j: int) -> "Characteristic":
        """Return ``e_j * 1[0, inf)``, which counts births of type ``j``."""
        return cls(
            components=tuple(
                CharacteristicComponent(
                    steps=(StepTerm(location=0.0, jump=1.0),) if i == j else ()
                )
                for i in range(p)
            )
        )


class LatticeCharacteristic(BaseModel):
    """Finitely supported characteristic ``f(n)``, ``values[i][n]`` for component ``i``."""

    model_config = _MODEL_CONFIG

    values: tuple[tuple[float, ...], ...] = Field(
        ..., min_length=1, description="One value sequence per type"
    )

    @model_validator(mode="after")
    def check_finite(self) -> "LatticeCharacteristic":
        """Reject infinities and NaN."""
        if any(not isfinite(x) for row in self.values for x in row):
            raise ValueError("characteristic values must be finite")
        return self

    @property
    def p(self) -> int:
        """Number of components."""
        return len(self.values)

    @classmethod
    def unit(cls, p: int, j: int) -> "LatticeCharacteristic":
        """Return the unit vector ``e_j`` placed at ``n = 0``."""
        return cls(values=tuple((1.0,) if i == j else (0.0,) for i in range(p)))
