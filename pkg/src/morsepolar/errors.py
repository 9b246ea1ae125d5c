"""Exception hierarchy.

``ScopeError`` subclasses mark inputs that fall outside what the formulas
cover (the CLI maps them to exit code 2); everything else is a plain bug or
I/O problem.
"""


class MorsePolarError(Exception):
    pass


class PolynomialSyntaxError(MorsePolarError, ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ResourceLimitError(MorsePolarError):
    """Groebner computation exceeded its size or degree cap."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class MissingGroebnerBasis(MorsePolarError):
    pass


class ScopeError(MorsePolarError):
    """Mathematical input outside the supported setting."""


class ConstantFunctionError(ScopeError):
    pass


class NonGenericError(ScopeError):
    pass


class NotZeroDimensionalError(ScopeError):
    pass


class NonIsolatedError(ScopeError):
    pass


class IllConditionedError(ScopeError):
    def __init__(self, message: str, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class UnanchoredLimitError(ScopeError):
    pass


class InconclusiveMultiplicityError(ScopeError):
    def __init__(self, message: str, counts=None):
        super().__init__(message)
        self.counts = counts


class InconsistentStrataError(ScopeError):
    pass
