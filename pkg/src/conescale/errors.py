"""Exception taxonomy.

Three families matter to callers: validation problems (bad input data or
grids), numerical failures (overflow, near-singular solves), and violated
mathematical hypotheses (spectrum in the way, non-contractive perturbation).
The CLI maps these onto its exit codes 2 / 3 / 4.
"""


class ConescaleError(Exception):
    """Base class for all package errors."""


class ValidationError(ConescaleError):
    """Malformed problem data; carries the offending field path."""

    def __init__(self, message, field=None):
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field


class ConfigurationError(ValidationError):
    """Grids or parameters violate a precondition (Nyquist, tail decay)."""


class NumericalError(ConescaleError):
    """A computation failed numerically."""


class WeightOverflowError(NumericalError):
    """An exponential weight would overflow at a quadrature node."""

    def __init__(self, node_index, point, log_magnitude):
        super().__init__(
            f"weight overflow at node {node_index} (point {point}): "
            f"log-magnitude {log_magnitude:.3g} exceeds the exp() range"
        )
        self.node_index = node_index
        self.point = point
        self.log_magnitude = log_magnitude


class NearEigenvalueError(NumericalError):
    """A resolvent solve hit a point within tolerance of the spectrum."""

    def __init__(self, lam, residual=None):
        msg = f"pencil is singular to tolerance at lambda = {lam}"
        if residual is not None:
            msg += f" (solve residual {residual:.3g})"
        super().__init__(msg)
        self.lam = lam
        self.residual = residual


class EigenSolverError(NumericalError):
    """The linearized eigenvalue solve failed."""


class IllConditionedKernelError(NumericalError):
    """A reconstruction point sits too close to the integration contour."""


class LocalizationFailureError(NumericalError):
    """No admissible decay rate found for trace localization."""


class HypothesisViolationError(ConescaleError):
    """A mathematical hypothesis of the method fails for this data (exit 4)."""


class SpectralObstructionError(HypothesisViolationError):
    """Eigenvalues sit on (or too near) the line / cone needed for a solve."""

    def __init__(self, message, offenders=()):
        super().__init__(message)
        self.offenders = tuple(offenders)


class ContractionFailureError(HypothesisViolationError):
    """Neumann iteration did not contract.

    The underlying sufficient condition asks for a perturbation that is
    small relative to the base resolvent past the cut point; with a cut of
    insufficient magnitude (or too large a perturbation) the iteration may
    legitimately diverge, and that outcome is reported here with the
    residual trace attached.
    """

    def __init__(self, residuals):
        super().__init__(
            "Neumann iteration is not contracting (residual trace: "
            + ", ".join(f"{r:.3e}" for r in residuals)
            + "); the cut-point magnitude may be too small for this "
            "perturbation, or the perturbation is too large"
        )
        self.residuals = tuple(residuals)
