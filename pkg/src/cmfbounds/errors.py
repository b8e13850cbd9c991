class CmfBoundsError(Exception):
    pass


class DomainError(CmfBoundsError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class DivergenceError(DomainError):
    pass


class BoundsError(CmfBoundsError, ValueError):
    """A requested limit exceeds what a table or configuration allows."""


class ConstraintError(CmfBoundsError, ValueError):
    """A named validity condition of a bound is violated."""

    def __init__(self, constraint: str, message: str | None = None):
        self.constraint = constraint
        super().__init__(message or f"constraint violated: {constraint}")


class CapacityError(CmfBoundsError):
    def __init__(self, count: int, cap: int):
        self.count = count
        self.cap = cap
        super().__init__(f"output would hold at least {count} elements (cap {cap})")


class ContractError(CmfBoundsError, ValueError):
    """Input does not satisfy the structural contract (e.g. multiplicativity)."""
