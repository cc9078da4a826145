class LabException(Exception):
    default_message = "Laboratory error."

    def __init__(self, message: str | None = None, **context):
        super().__init__(message or self.default_message)
        self.context = context


class SizeError(LabException):
    default_message = "Hilbert-space dimension exceeds the configured maximum."


class ShapeError(LabException):
    default_message = "Operator dimensions do not match."


class NumericError(LabException):
    default_message = "Numerical routine did not converge."

    def __init__(self, message: str | None = None, *, iterations: int | None = None, **context):
        super().__init__(message, iterations=iterations, **context)
        self.iterations = iterations


class NotPSDError(LabException):
    default_message = "Operator is not positive semidefinite."


class MeasurementSpecError(LabException):
    default_message = "Invalid measurement operator."


class ParameterError(LabException):
    default_message = "Invalid parameter."


class RangeError(LabException):
    default_message = "Index out of range."


class SymbolError(LabException):
    default_message = "Unknown channel symbol."


class BoundViolation(LabException):
    default_message = "Bound violated beyond tolerance."

    def __init__(self, message: str | None = None, *, lhs: float, rhs: float, **context):
        super().__init__(message, lhs=lhs, rhs=rhs, **context)
        self.lhs = lhs
        self.rhs = rhs
        self.slack = rhs - lhs


class NotHermitianError(LabException):
    default_message = "Operator is not Hermitian within tolerance."
