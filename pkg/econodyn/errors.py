"""
Exception hierarchy for econodyn.

Every error raised by the library derives from :class:`EconodynError` and
carries a stable ``error_code`` plus a ``details`` mapping, so batch
front ends can serialise failures without parsing messages.
"""


class EconodynError(Exception):
    """Base exception for econodyn errors."""

    error_code = "ECONODYN_ERROR"

    def __init__(self, message, error_code=None, details=None):
        super().__init__(message)
        if error_code is not None:
            self.error_code = error_code
        self.details = dict(details or {})

    def to_dict(self):
        payload = {"error": str(self), "code": self.error_code}
        if self.details:
            payload["details"] = self.details
        return payload


class InvalidArgumentError(EconodynError, ValueError):
    """Raised when an operation receives malformed input (grids, lengths, shapes)."""

    error_code = "INVALID_ARGUMENT"


class InvalidParametersError(EconodynError, ValueError):
    """Raised when model parameters violate their invariants."""

    error_code = "INVALID_PARAMETERS"


class SingularMatrixError(EconodynError):
    """Raised when a dense system is singular or numerically singular.

    Attributes:
        pivot: Smallest absolute pivot found during factorisation.
        threshold: Pivot threshold the factorisation was checked against.
    """

    error_code = "SINGULAR_MATRIX"

    def __init__(self, message, pivot=None, threshold=None):
        super().__init__(message, details={"pivot": pivot, "threshold": threshold})
        self.pivot = pivot
        self.threshold = threshold


class NoConvergenceError(EconodynError):
    """Raised when an iteration exhausts its budget.

    Attributes:
        report: The :class:`~econodyn.models.SolverReport` of the failed run
                (``converged`` is False).
        result: The last iterate, or None when the failure happened before
                any iterate existed (e.g. eigen-solver breakdown).
    """

    error_code = "NO_CONVERGENCE"

    def __init__(self, message, report=None, result=None):
        details = report.to_dict() if report is not None else {}
        super().__init__(message, details=details)
        self.report = report
        self.result = result


class DegenerateStepError(EconodynError):
    """Raised when the marching solver meets a vanishing diagonal factor."""

    error_code = "DEGENERATE_STEP"

    def __init__(self, message, node=None, factor=None):
        super().__init__(message, details={"node": node, "factor": factor})
        self.node = node
        self.factor = factor


class CharacteristicLambdaError(EconodynError):
    """Raised when λ is (numerically) a characteristic number of the kernel.

    Attributes:
        condition: Estimated condition number of the discrete operator.
        gap: Smallest relative distance |λ - λ_h| / |λ_h| found, or None
             when the spectral check was not run.
    """

    error_code = "CHARACTERISTIC_LAMBDA"

    def __init__(self, message, condition=None, gap=None):
        super().__init__(message, details={"condition": condition, "gap": gap})
        self.condition = condition
        self.gap = gap


class HorizonExceededError(EconodynError):
    """Raised when the corrected Harrod income is evaluated at or past n/m."""

    error_code = "HORIZON_EXCEEDED"

    def __init__(self, message, horizon=None, t=None):
        super().__init__(message, details={"horizon": horizon, "t": t})
        self.horizon = horizon
        self.t = t


class UndefinedHorizonError(EconodynError):
    """Raised when the forecast horizon is requested for m = 0."""

    error_code = "UNDEFINED_HORIZON"


class NotContractiveError(EconodynError):
    """Raised when the contractive static iteration gets ‖A‖∞ ≥ 1."""

    error_code = "NOT_CONTRACTIVE"

    def __init__(self, message, norm=None):
        super().__init__(message, details={"norm": norm})
        self.norm = norm


class ConfigError(EconodynError, ValueError):
    """Raised when a scenario configuration fails validation.

    Attributes:
        field: Dotted path of the offending field (e.g. ``parameters.m``).
    """

    error_code = "INVALID_CONFIG"

    def __init__(self, message, field=None):
        super().__init__(message, details={"field": field} if field else None)
        self.field = field


class ConfigNotFoundError(EconodynError):
    """Raised when a configuration or variants file does not exist."""

    error_code = "CONFIG_NOT_FOUND"

    def __init__(self, message, path=None):
        super().__init__(message, details={"path": path} if path else None)
        self.path = path
