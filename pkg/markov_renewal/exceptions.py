"""Exception hierarchy for the markov-renewal library.

Every error raised by the engine derives from RenewalError. Each class carries
a module-qualified ``code`` (for example ``roots.BoundaryRootError``) that the
command line surfaces next to the message.

Errors fall into three groups:
- ModelError: the input model or configuration is invalid
- NumericalError: a solver could not reach its accuracy contract
- VerdictError: a mathematical hypothesis fails for the given model
"""


class RenewalError(Exception):
    """Base exception for all markov-renewal errors.

    Args:
        message: A human-readable error description.
    """

    module = "core"

    def __init__(self, message: str) -> None:
        self.message = message
        super().__init__(message)

    @property
    def code(self) -> str:
        """Module-qualified error code, e.g. ``spectral.NoMalthusianError``."""
        return f"{self.module}.{type(self).__name__}"


class ModelError(RenewalError):
    """Raised when an input model violates a structural precondition."""

    module = "measure_model"


class NumericalError(RenewalError):
    """Raised when a numerical procedure fails its accuracy contract."""

    module = "numerics"


class VerdictError(RenewalError):
    """Raised when a hypothesis of the expansion theorems fails for the model."""

    module = "verdict"


class DomainError(ModelError):
    """Raised when a point lies outside the domain of the Laplace transform."""

    module = "transform"


class PoleError(ModelError):
    """Raised when a point hits a pole ``z = -beta`` of a density term."""

    module = "transform"


class LatticeSpanError(ModelError):
    """Raised when a declared lattice model is not normalised to maximal span 1.

    Attributes:
        gcd: Greatest common divisor of the support indices.
    """

    module = "measure_model"

    def __init__(self, message: str, gcd: int) -> None:
        """Initializes LatticeSpanError.

        Args:
            message: Human-readable error description.
            gcd: Greatest common divisor of the support indices.
        """
        super().__init__(message)
        self.gcd = gcd


class ConvergenceError(NumericalError):
    """Raised when an iterative solver does not converge."""


class NotPrimitiveError(ModelError):
    """Raised when a Perron vector is requested for a non-primitive matrix."""

    module = "spectral"


class AssumptionError(ModelError):
    """Raised when assumption (A2), ``rho(mu(0)) < 1``, is violated.

    Attributes:
        rho_at_zero: Spectral radius of the instant-mass matrix.
    """

    module = "spectral"

    def __init__(self, message: str, rho_at_zero: float | None = None) -> None:
        """Initializes AssumptionError.

        Args:
            message: Human-readable error description.
            rho_at_zero: Spectral radius of the instant-mass matrix, if computed.
        """
        super().__init__(message)
        self.rho_at_zero = rho_at_zero


class NoMalthusianError(VerdictError):
    """Raised when the spectral radius stays below one on the whole real domain."""

    module = "spectral"


class BoundaryRootError(NumericalError):
    """Raised when a zero of the characteristic determinant lies on a contour.

    Attributes:
        attempts: Number of boundary nudges tried before giving up.
    """

    module = "roots"

    def __init__(self, message: str, attempts: int = 0) -> None:
        """Initializes BoundaryRootError.

        Args:
            message: Human-readable error description.
            attempts: Number of boundary nudges tried before giving up.
        """
        super().__init__(message)
        self.attempts = attempts


class QuadratureError(NumericalError):
    """Raised when contour sampling does not converge within the node budget.

    Attributes:
        nodes: Node count reached when the procedure gave up.
    """

    module = "roots"

    def __init__(self, message: str, nodes: int = 0) -> None:
        """Initializes QuadratureError.

        Args:
            message: Human-readable error description.
            nodes: Node count reached when the procedure gave up.
        """
        super().__init__(message)
        self.nodes = nodes


class MaxDepthError(NumericalError):
    """Raised when root subdivision exceeds its maximum depth."""

    module = "roots"


class DegenerateError(ModelError):
    """Raised when the lattice characteristic polynomial is constant."""

    module = "roots"


class RadiusError(NumericalError):
    """Raised when no admissible contour radius exists around a root."""

    module = "laurent"


class SingularContourError(NumericalError):
    """Raised when ``I - L(z)`` is numerically singular at a contour node."""

    module = "laurent"


class UnsupportedRootError(ModelError):
    """Raised for roots with ``Re(lambda) <= 0``, which have no coefficient formula."""

    module = "laurent"


class DivergentMomentError(ModelError):
    """Raised when a characteristic moment integral diverges."""

    module = "laurent"


class LaurentMismatchError(NumericalError):
    """Raised when lattice and embedded non-lattice pole data disagree."""

    module = "laurent"


class StripRootError(VerdictError):
    """Raised when a root lies in the strip between the search line and ``theta``."""

    module = "expansion"


class RootOnLineError(VerdictError):
    """Raised when a root lies on the vertical line scanned for condition (E)."""

    module = "conditions"


class PopulationCapError(NumericalError):
    """Raised when a simulated population would exceed the configured cap.

    Attributes:
        expected: Expected number of individuals per replication.
    """

    module = "oracle_sim"

    def __init__(self, message: str, expected: float | None = None) -> None:
        """Initializes PopulationCapError.

        Args:
            message: Human-readable error description.
            expected: Expected number of individuals per replication.
        """
        super().__init__(message)
        self.expected = expected


class InvalidModelError(ModelError):
    """Raised when a branching model's intensities differ from the analyzed matrix."""

    module = "oracle_sim"


class SchemaError(ModelError):
    """Raised when a configuration document fails schema validation.

    Attributes:
        field_path: Dotted path of the first offending field.
    """

    module = "cli_io"

    def __init__(self, message: str, field_path: str = "") -> None:
        """Initializes SchemaError.

        Args:
            message: Human-readable error description.
            field_path: Dotted path of the first offending field.
        """
        super().__init__(message)
        self.field_path = field_path


class DimensionError(ModelError):
    """Raised when the number of types differs between configuration blocks."""

    module = "cli_io"


EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VERDICT = 2


def get_exit_code_for_error(error: BaseException) -> int:
    """Maps an exception to the command line exit status.

    Args:
        error: The exception raised by a command.

    Returns:
        2 for mathematical verdict failures, 1 for every other error.
    """
    if isinstance(error, VerdictError):
        return EXIT_VERDICT
    return EXIT_ERROR
