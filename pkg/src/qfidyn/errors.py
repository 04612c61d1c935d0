"""Exception taxonomy shared by all modules.

DomainError marks inputs that violate a documented precondition (bad site
index, non-Hermitian matrix where one is required, negative beta, ...).
NumericError marks computations whose numerical guarantees failed (residuals
above tolerance, indefinite Gram matrices, violated bound checks).
"""


class DomainError(ValueError):
    """An argument violates a documented precondition."""


class NumericError(ArithmeticError):
    """A numerical guarantee failed; message carries the diagnostic."""
