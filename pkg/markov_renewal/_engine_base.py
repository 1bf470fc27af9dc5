"""Shared engine plumbing for the renewal engines.

This module provides the logic common to the non-lattice and lattice engines:
- Tolerances shared by every stage
- A worker pool sized by the ``MRE_THREADS`` environment variable
- Per-stage timings collected for run reports
- Resolution of configured search regions into concrete ones
"""

import logging
import os
import time
from collections.abc import Iterator
from concurrent.futures import Executor, ThreadPoolExecutor
from contextlib import contextmanager
from typing import Protocol, runtime_checkable

from markov_renewal.models.config import RegionSpec, Tolerances
from markov_renewal.models.measure import Characteristic, LatticeCharacteristic
from markov_renewal.models.results import (
    AssumptionReport,
    Expansion,
    ExpansionCoefficients,
    MalthusianResult,
    RootRecord,
    SearchRegion,
)

logger = logging.getLogger(__name__)

THREADS_ENV = "MRE_THREADS"
DEFAULT_IM_MAX = 50.0
DEFAULT_RE_MARGIN = 1.0


def thread_count() -> int:
    """Worker threads allowed by ``MRE_THREADS``; 1 when unset or invalid."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        threads = int(raw)
    except ValueError:
        logger.warning("ignoring %s=%r: not an integer", THREADS_ENV, raw)
        return 1
    if threads < 1:
        logger.warning("ignoring %s=%d: must be positive", THREADS_ENV, threads)
        return 1
    return threads


@runtime_checkable
class ExpansionEngine(Protocol):
    """Protocol for engines that expand a renewal equation for a configured region."""

    tolerances: Tolerances
    timings: dict[str, float]

    def __enter__(self) -> "ExpansionEngine": ...

    def __exit__(self, *args: object) -> None: ...

    @property
    def p(self) -> int: ...

    def assumptions(self) -> AssumptionReport: ...

    def malthusian(self) -> MalthusianResult: ...

    def located_roots(self, spec: RegionSpec) -> list[RootRecord]: ...

    def expansion_coefficients(
        self,
        spec: RegionSpec,
        f: Characteristic | LatticeCharacteristic | None = None,
    ) -> ExpansionCoefficients: ...

    def expand(
        self,
        spec: RegionSpec,
        f: Characteristic | LatticeCharacteristic | None = None,
    ) -> Expansion: ...


class BaseEngine:
    """Base engine with tolerances, the worker pool and stage timings.

    Attributes:
        tolerances: Numerical tolerances passed to every stage.
        threads: Worker threads; 1 evaluates sequentially.
        timings: Accumulated seconds per pipeline stage.
    """

    def __init__(
        self,
        tolerances: Tolerances | None = None,
        threads: int | None = None,
    ) -> None:
        """Initialize base engine.

        Args:
            tolerances: Numerical tolerances (defaults when omitted).
            threads: Worker threads; read from ``MRE_THREADS`` when omitted.
        """
        self.tolerances = tolerances or Tolerances()
        self.threads = thread_count() if threads is None else max(1, threads)
        self.timings: dict[str, float] = {}
        self._executor: ThreadPoolExecutor | None = None

    @property
    def executor(self) -> Executor | None:
        """Shared thread pool, created on first use; ``None`` when sequential."""
        if self.threads <= 1:
            return None
        if self._executor is None:
            self._executor = ThreadPoolExecutor(
                max_workers=self.threads, thread_name_prefix="mre"
            )
            logger.debug("started %d worker thread(s)", self.threads)
        return self._executor

    @contextmanager
    def _timed(self, stage: str) -> Iterator[None]:
        """Add the wall time of the enclosed block to ``timings[stage]``."""
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - start
            self.timings[stage] = self.timings.get(stage, 0.0) + elapsed
            logger.debug("%s took %.3fs", stage, elapsed)

    def malthusian(self) -> MalthusianResult:
        """Malthusian parameter of the engine's model."""
        raise NotImplementedError

    def search_region(self, spec: RegionSpec) -> SearchRegion:
        """Concrete search region; ``re_max`` defaults to ``alpha + 1`` and ``im_max`` to 50.

        Args:
            spec: Configured region parameters.

        Returns:
            The region ``(theta, re_max] x [-im_max, im_max]``.

        Raises:
            NoMalthusianError: If ``re_max`` is omitted and no Malthusian parameter exists.
        """
        re_max = spec.re_max
        if re_max is None:
            re_max = max(self.malthusian().alpha, spec.theta) + DEFAULT_RE_MARGIN
        im_max = spec.im_max if spec.im_max is not None else DEFAULT_IM_MAX
        return SearchRegion(re_min=spec.theta, re_max=re_max, im_max=im_max)

    def close(self) -> None:
        """Shut down the worker pool, if one was started."""
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None
