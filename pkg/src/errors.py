class EisError(Exception):
    """Base class for every error raised by the eisflow library."""


class ArithmeticDomainError(EisError):
    """Exact arithmetic asked for something outside its domain (moduli, ramification, division)."""


class PreconditionError(EisError, ValueError):
    """Input parameters violate an operation's precondition."""


class BudgetExceeded(EisError):
    def __init__(self, needed: int, cap: int):
        self.needed = needed
        self.cap = cap
        super().__init__(f"brute-force budget exceeded: {needed} cosets requested, cap is {cap}")


class FactorizationError(ArithmeticDomainError):
    """B_p(X, h) did not factor through the Euler cofactor with integral quotient."""


class InternalInvariantError(EisError):
    """A computed object broke an identity the algorithms rely on."""
