"""
Exception types raised by the routing, auction and oracle layers
"""


class CapacityExceededError(ValueError):
    """Subset has more passengers than the vehicle holds"""

    def __init__(self, subset_size: int, capacity: int):
        self.subset_size = subset_size
        self.capacity = capacity
        super().__init__(f"subset of {subset_size} passengers exceeds capacity {capacity}")


class PassengerIndexError(IndexError):
    """Passenger id outside 1..n"""

    def __init__(self, passenger: int, n: int):
        self.passenger = passenger
        self.n = n
        super().__init__(f"passenger {passenger} out of range 1..{n}")


class DuplicateAlternativeError(ValueError):
    """The same member set was declared twice in an abstract family"""

    def __init__(self, members):
        self.members = tuple(members)
        super().__init__(f"duplicate alternative {sorted(self.members)}")


class DivisibilityError(ValueError):
    pass


class MechanismError(RuntimeError):
    """Internal contradiction inside a mechanism run"""
    pass


class NonMonotoneError(AssertionError):
    """Win region of a passenger is not an upper interval of bids"""
    pass
