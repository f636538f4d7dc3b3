"""Exception hierarchy shared by every chainwatch module."""


class ChainwatchError(Exception):
    """Base class for all chainwatch errors."""


class NonHermitian(ChainwatchError, ValueError):
    def __init__(self, deviation: float, tol: float):
        self.deviation = deviation
        self.tol = tol
        super().__init__(
            f"matrix is not Hermitian: max |m - m^H| = {deviation:.3e} exceeds {tol:.1e}"
        )


class NegativeEigenvalue(ChainwatchError, ValueError):
    def __init__(self, value: float, tol: float):
        self.value = value
        self.tol = tol
        super().__init__(f"eigenvalue {value:.3e} is below -{tol:.1e}")


class NotUnitary(ChainwatchError, ValueError):
    pass


class InvalidDistribution(ChainwatchError, ValueError):
    pass


class IndexOutOfRange(ChainwatchError, IndexError):
    pass


class EmptySubset(ChainwatchError, ValueError):
    pass


class SameIndex(ChainwatchError, ValueError):
    pass


class OrderViolation(ChainwatchError, ValueError):
    pass


class DimensionCapExceeded(ChainwatchError, ValueError):
    def __init__(self, dimension: int, cap: int):
        self.dimension = dimension
        self.cap = cap
        super().__init__(f"total Hilbert dimension {dimension} exceeds cap {cap}")


class UnknownLabel(ChainwatchError, KeyError):
    pass


class NotAPartition(ChainwatchError, ValueError):
    pass


class ConfigError(ChainwatchError, ValueError):
    pass


class ToleranceViolation(ChainwatchError):
    def __init__(self, quantity: str, difference: float, tol: float):
        self.quantity = quantity
        self.difference = difference
        self.tol = tol
        super().__init__(
            f"{quantity}: closed form and oracle differ by {difference:.3e} (tol {tol:.1e})"
        )
