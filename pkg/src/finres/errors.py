"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class ArithmeticOverflow(ArithmeticError):
    """An interval endpoint became infinite or NaN."""


class ContractViolation(RuntimeError):
    """A caller-checked precondition does not hold."""


class OracleScaleError(ValueError):
    """Input too large for a brute-force oracle."""


class MemoryBudgetExceeded(MemoryError):
    """A construction would exceed the configured memory budget."""

    def __init__(self, needed: int, budget: int, what: str = "construction"):
        super().__init__(f"{what} needs ~{needed} bytes, budget is {budget}")
        self.needed = needed
        self.budget = budget
