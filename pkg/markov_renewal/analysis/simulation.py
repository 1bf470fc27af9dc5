"""Monte Carlo oracle for multi-type Crump-Mode-Jagers processes.

Each replication is an event-driven simulation: a heap of ``(birth_time, type)``
pairs is drained in time order, every individual samples its reproduction
point processes on ``[0, T - birth]`` and its lifetime, and its score is added
at every grid time. Replication ``r`` of ancestor type ``i`` draws from its own
Philox stream keyed by ``(i, r)``, so results do not depend on scheduling.
"""

import heapq
import logging
from collections.abc import Sequence
from concurrent.futures import Executor
from math import floor, isfinite

import numpy as np

from markov_renewal.analysis.measures import evaluate_component, total_mass_matrix
from markov_renewal.exceptions import InvalidModelError, PopulationCapError
from markov_renewal.models.branching import BranchingModel, LifetimeKind, ScoreKind
from markov_renewal.models.measure import MeasureMatrix
from markov_renewal.models.results import SimEstimate

logger = logging.getLogger(__name__)

DEFAULT_CAP = 1e7
PILOT_REPLICATIONS = 100
HARD_CAP_FACTOR = 10


def replication_rng(seed: int, initial_type: int, replication: int) -> np.random.Generator:
    """Independent counter-based stream for one replication."""
    sequence = np.random.SeedSequence(seed, spawn_key=(initial_type, replication))
    return np.random.Generator(np.random.Philox(sequence))


def _lifetime(model: BranchingModel, i: int, rng: np.random.Generator) -> float:
    law = model.lifetimes[i]
    if law.kind == LifetimeKind.DETERMINISTIC:
        return law.value
    if law.kind == LifetimeKind.EXPONENTIAL:
        return float(rng.exponential(1.0 / law.value))
    return float("inf")


def _score(model: BranchingModel, i: int, ages: np.ndarray, lifetime: float) -> np.ndarray:
    score = model.scores[i]
    if score.kind == ScoreKind.BORN:
        return np.ones_like(ages)
    if score.kind == ScoreKind.ALIVE:
        return (ages < lifetime).astype(float)
    assert score.function is not None
    return np.array([evaluate_component(score.function, a) for a in ages])


def _replicate(
    model: BranchingModel,
    t_grid: np.ndarray,
    initial_type: int,
    rng: np.random.Generator,
    hard_cap: float,
) -> tuple[np.ndarray, np.ndarray, int]:
    """One replication: score per grid time, births per (grid time, type), population."""
    horizon = float(t_grid[-1]) if t_grid.size else 0.0
    scores = np.zeros(t_grid.size)
    counts = np.zeros((t_grid.size, model.p))
    queue: list[tuple[float, int]] = [(0.0, initial_type)]
    population = 0
    while queue:
        birth, i = heapq.heappop(queue)
        population += 1
        if population > hard_cap:
            raise PopulationCapError(
                f"replication exceeded {hard_cap:.3g} individuals", expected=hard_cap
            )
        seen = t_grid >= birth
        counts[seen, i] += 1.0
        lifetime = _lifetime(model, i, rng)
        scores[seen] += _score(model, i, t_grid[seen] - birth, lifetime)
        remaining = horizon - birth
        for j, law in enumerate(model.reproduction[i]):
            if law.rate > 0.0 and remaining > 0.0:
                n = int(rng.poisson(law.rate * remaining))
                for age in rng.uniform(0.0, remaining, size=n):
                    heapq.heappush(queue, (birth + float(age), j))
            for atom in law.atoms:
                if atom.location > remaining or atom.weight == 0.0:
                    continue
                whole = floor(atom.weight)
                extra = 1 if rng.random() < atom.weight - whole else 0
                for _ in range(whole + extra):
                    heapq.heappush(queue, (birth + atom.location, j))
    return scores, counts, population


def _pilot_size(model: BranchingModel, t_grid: np.ndarray, seed: int, cap: float) -> float:
    """Mean population over a pilot run, using streams disjoint from the main run."""
    sizes = []
    for r in range(PILOT_REPLICATIONS):
        rng = replication_rng(seed, model.p + 1, r)
        for i in range(model.p):
            _, _, n = _replicate(model, t_grid, i, rng, cap)
            sizes.append(n)
    return float(np.mean(sizes))


def cmj_simulate(
    model: BranchingModel,
    t_grid: Sequence[float],
    replications: int,
    seed: int,
    population_cap: float = DEFAULT_CAP,
    expected_size: float | None = None,
    initial_types: Sequence[int] | None = None,
    executor: Executor | None = None,
) -> list[SimEstimate]:
    """Estimate ``E^i[Z_t]`` and mean births per type for each initial type ``i``.

    Args:
        model: Branching model.
        t_grid: Nondecreasing evaluation times.
        replications: Replications per initial type.
        seed: Root seed.
        population_cap: Largest admissible expected population per replication.
        expected_size: Expected population at ``max(t_grid)``, e.g. from the
            expansion's leading term; a pilot run estimates it when omitted.
        initial_types: Ancestor types to simulate; all types by default.
        executor: Optional executor for replications.

    Returns:
        One estimate per initial type.

    Raises:
        PopulationCapError: If the expected population exceeds the cap, or a
            replication exceeds ten times the cap.
    """
    grid = np.asarray(t_grid, dtype=float)
    if grid.size and (np.any(grid < 0.0) or np.any(np.diff(grid) < 0.0)):
        raise ValueError("t_grid must be nonnegative and nondecreasing")
    if replications < 1:
        raise ValueError("replications must be positive")
    expected = expected_size
    if expected is None and grid.size:
        expected = _pilot_size(model, grid, seed, population_cap)
        logger.debug("pilot population estimate %.3g", expected)
    if expected is not None and (not isfinite(expected) or expected > population_cap):
        raise PopulationCapError(
            f"expected population {expected:.3g} exceeds the cap {population_cap:.3g}",
            expected=expected,
        )
    hard_cap = HARD_CAP_FACTOR * population_cap
    types = list(range(model.p)) if initial_types is None else list(initial_types)
    estimates = []
    for i in types:

        def run(r: int, i: int = i) -> tuple[np.ndarray, np.ndarray, int]:
            return _replicate(model, grid, i, replication_rng(seed, i, r), hard_cap)

        reps = range(replications)
        results = list(executor.map(run, reps)) if executor is not None else [run(r) for r in reps]
        scores = np.stack([s for s, _, _ in results])
        counts = np.stack([c for _, c, _ in results])
        estimates.append(
            SimEstimate(
                initial_type=i,
                t_grid=tuple(float(t) for t in grid),
                mean=np.sum(scores, axis=0) / replications,
                std_error=_std_error(scores),
                count_mean=np.sum(counts, axis=0) / replications,
                count_std_error=_std_error(counts),
                replications=replications,
                seed=seed,
            )
        )
    logger.info("simulated %d replication(s) for %d initial type(s)", replications, len(types))
    return estimates


def _std_error(samples: np.ndarray) -> np.ndarray:
    n = samples.shape[0]
    if n < 2:  # noqa: PLR2004
        return np.zeros(samples.shape[1:])
    return np.asarray(np.std(samples, axis=0, ddof=1) / np.sqrt(n))


def validate_model(
    model: BranchingModel, M: MeasureMatrix, horizon: float = 10.0, tol: float = 1e-9
) -> None:
    """Check that the reproduction intensities equal ``M`` on ``[0, horizon]``.

    Raises:
        InvalidModelError: If the sizes differ or a cumulative mass differs by
            more than ``tol`` relative.
    """
    if model.p != M.p:
        raise InvalidModelError(f"branching model has {model.p} types, matrix has {M.p}")
    intensity = model.intensity_matrix()
    for t in np.linspace(0.0, horizon, 21):
        expected = total_mass_matrix(M, float(t))
        actual = total_mass_matrix(intensity, float(t))
        if np.any(np.abs(actual - expected) > tol * np.maximum(1.0, np.abs(expected))):
            raise InvalidModelError(
                f"reproduction intensities differ from the analyzed matrix at t={t:g}"
            )
