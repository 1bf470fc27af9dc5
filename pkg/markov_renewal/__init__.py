"""markov-renewal - asymptotic expansions of Markov renewal equations.

This package computes the Malthusian parameter, every characteristic root in
a search region, the Laurent coefficients of ``(I - L mu(z))^-1`` and the
expansion coefficients of ``F = f + mu * F``, and validates the expansions
against exact lattice recursions, grid convolutions and Monte Carlo
simulation of multi-type branching processes.

Example:
    >>> from markov_renewal import RenewalEngine, SearchRegion, evaluate
    >>> with RenewalEngine(model) as engine:
    ...     region = SearchRegion(re_min=0.5, re_max=2.0, im_max=10.0)
    ...     value = evaluate(engine.u_expansion(region), 3.0)
"""

__version__ = "0.1.0"

from markov_renewal.analysis.expansion import evaluate, evaluate_scaled
from markov_renewal.engine import LatticeRenewalEngine, RenewalEngine
from markov_renewal.exceptions import (
    ModelError,
    NumericalError,
    RenewalError,
    VerdictError,
)
from markov_renewal.models.branching import BranchingModel
from markov_renewal.models.config import RunConfig, Tolerances
from markov_renewal.models.measure import (
    AtomTerm,
    Characteristic,
    ExpPolyTerm,
    LatticeCharacteristic,
    LatticeMeasureMatrix,
    MeasureMatrix,
    ScalarMeasure,
)
from markov_renewal.models.results import Expansion, SearchRegion

__all__ = [
    "AtomTerm",
    "BranchingModel",
    "Characteristic",
    "ExpPolyTerm",
    "Expansion",
    "LatticeCharacteristic",
    "LatticeMeasureMatrix",
    "LatticeRenewalEngine",
    "MeasureMatrix",
    "ModelError",
    "NumericalError",
    "RenewalEngine",
    "RenewalError",
    "RunConfig",
    "ScalarMeasure",
    "SearchRegion",
    "Tolerances",
    "VerdictError",
    "__version__",
    "evaluate",
    "evaluate_scaled",
]
