"""Exceptions raised by the library. Each maps onto a CLI exit code."""


class DomainError(ValueError):
    """Argument outside the admissible range of a formula."""


class ClassSError(ValueError):
    """Weight could not be certified as a member of the summable class."""


class NumericalGuard(RuntimeError):
    """A numerical safeguard tripped (boundary sup, divergent series, bad mesh)."""

    def __init__(self, quantity, message):
        super().__init__(f"{quantity}: {message}")
        self.quantity = quantity


class CapacityInfinite(NumericalGuard):
    """Supremum over scales attained at the grid boundary even after widening."""

    def __init__(self, message):
        super().__init__("capacity", message)
