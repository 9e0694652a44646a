class RescontError(Exception):
    """Base exception for all rescont errors."""


class ConfigError(RescontError, ValueError):
    """Raised when a run configuration violates a solver or model precondition."""

    def __init__(self, message: str, field: str) -> None:
        super().__init__(message)
        self.field = field

    def __str__(self) -> str:
        return f"{self.field}: {self.args[0]}"

    def __reduce__(self) -> tuple[type, tuple]:  # type: ignore[type-arg]
        return (self.__class__, (self.args[0], self.field))


class NumericalError(RescontError):
    """Base for failures signalled by a numerical computation."""


class DomainError(NumericalError, ValueError):
    """Raised when a function is evaluated outside its domain (e.g. n̂_l at z = 0)."""

    def __init__(self, message: str, function: str, argument: complex) -> None:
        super().__init__(message)
        self.function = function
        self.argument = argument

    def __reduce__(self) -> tuple[type, tuple]:  # type: ignore[type-arg]
        return (self.__class__, (self.args[0], self.function, self.argument))


class ArgumentOverflowError(NumericalError, OverflowError):
    """Raised when exponential growth e^{|Im z|} would exceed the float range."""

    def __init__(self, message: str, argument: complex, limit: float) -> None:
        super().__init__(message)
        self.argument = argument
        self.limit = limit

    def __reduce__(self) -> tuple[type, tuple]:  # type: ignore[type-arg]
        return (self.__class__, (self.args[0], self.argument, self.limit))


class SingularPropagationError(NumericalError):
    """Raised when a renormalization step meets a non-invertible matrix."""

    def __init__(self, message: str, k: complex, node: int | None = None) -> None:
        super().__init__(message)
        self.k = k
        self.node = node

    def __reduce__(self) -> tuple[type, tuple]:  # type: ignore[type-arg]
        return (self.__class__, (self.args[0], self.k, self.node))


class SingularMatchingError(NumericalError):
    """Raised when the two-point matching matrix H⁺(r2) - M H⁺(r1) is singular."""

    def __init__(self, message: str, k: complex) -> None:
        super().__init__(message)
        self.k = k

    def __reduce__(self) -> tuple[type, tuple]:  # type: ignore[type-arg]
        return (self.__class__, (self.args[0], self.k))


class DivisionDegenerateError(NumericalError):
    """Raised when det(S - I) vanishes to machine range, i.e. det F is at a pole."""

    def __init__(self, message: str, k: complex, magnitude: float) -> None:
        super().__init__(message)
        self.k = k
        self.magnitude = magnitude

    def __reduce__(self) -> tuple[type, tuple]:  # type: ignore[type-arg]
        return (self.__class__, (self.args[0], self.k, self.magnitude))


class NoConvergenceError(NumericalError):
    """Raised when Newton iterations exhaust their budget."""

    def __init__(
        self,
        message: str,
        k: complex,
        iterations: int,
        residual_norm: float,
    ) -> None:
        super().__init__(message)
        self.k = k
        self.iterations = iterations
        self.residual_norm = residual_norm

    def __str__(self) -> str:
        return (
            f"No convergence after {self.iterations} iterations: "
            f"|det F| = {self.residual_norm:.3e} at k = {self.k:.6g}"
        )

    def __reduce__(self) -> tuple[type, tuple]:  # type: ignore[type-arg]
        return (
            self.__class__,
            (self.args[0], self.k, self.iterations, self.residual_norm),
        )


class DerivativeDegenerateError(NumericalError):
    """Raised when d(det F)/dk vanishes relative to det F (multiple zero or accidental pole)."""

    def __init__(self, message: str, k: complex, derivative: complex) -> None:
        super().__init__(message)
        self.k = k
        self.derivative = derivative

    def __reduce__(self) -> tuple[type, tuple]:  # type: ignore[type-arg]
        return (self.__class__, (self.args[0], self.k, self.derivative))


class CorrectorDivergenceError(NumericalError):
    """Raised when the pseudo-arclength corrector fails to reach the tolerance."""

    def __init__(self, message: str, step: float, residual_norm: float) -> None:
        super().__init__(message)
        self.step = step
        self.residual_norm = residual_norm

    def __reduce__(self) -> tuple[type, tuple]:  # type: ignore[type-arg]
        return (self.__class__, (self.args[0], self.step, self.residual_norm))


class StepUnderflowError(NumericalError):
    """Raised when the adaptive step would fall below h_min."""

    def __init__(self, message: str, step: float, h_min: float) -> None:
        super().__init__(message)
        self.step = step
        self.h_min = h_min

    def __str__(self) -> str:
        return f"Step underflow: h = {self.step:.3e} < h_min = {self.h_min:.3e}"

    def __reduce__(self) -> tuple[type, tuple]:  # type: ignore[type-arg]
        return (self.__class__, (self.args[0], self.step, self.h_min))


class RefinementFailureError(NumericalError):
    """Raised when secant refinement of a branch point does not bracket it in time."""

    def __init__(self, message: str, interval: tuple[float, float]) -> None:
        super().__init__(message)
        self.interval = interval

    def __reduce__(self) -> tuple[type, tuple]:  # type: ignore[type-arg]
        return (self.__class__, (self.args[0], self.interval))


class NullSpaceRankError(NumericalError):
    """Raised when the Jacobian at a presumed branch point has a one-dimensional null space."""

    def __init__(self, message: str, singular_values: tuple[float, ...]) -> None:
        super().__init__(message)
        self.singular_values = singular_values

    def __reduce__(self) -> tuple[type, tuple]:  # type: ignore[type-arg]
        return (self.__class__, (self.args[0], self.singular_values))


class PointBudgetExceededError(NumericalError):
    """Raised when a branch exceeds its allowed number of accepted points."""

    def __init__(
        self,
        message: str,
        branch_id: int,
        max_points: int,
        current_point: int,
    ) -> None:
        super().__init__(message)
        self.branch_id = branch_id
        self.max_points = max_points
        self.current_point = current_point

    def __str__(self) -> str:
        return (
            f"Point budget exceeded: {self.current_point} / {self.max_points} "
            f"on branch {self.branch_id}"
        )

    def __reduce__(self) -> tuple[type, tuple]:  # type: ignore[type-arg]
        return (
            self.__class__,
            (self.args[0], self.branch_id, self.max_points, self.current_point),
        )
