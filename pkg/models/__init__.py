"""
Data models for RideForge
"""
from .errors import (
    CapacityExceededError,
    DivisibilityError,
    DuplicateAlternativeError,
    MechanismError,
    NonMonotoneError,
    PassengerIndexError,
)
from .schemas import (
    CostMode,
    CostPolicy,
    GeneratorConfig,
    Instance,
    Mechanism,
    PassengerRequest,
)

__all__ = [
    'CapacityExceededError',
    'DivisibilityError',
    'DuplicateAlternativeError',
    'MechanismError',
    'NonMonotoneError',
    'PassengerIndexError',
    'CostMode',
    'CostPolicy',
    'GeneratorConfig',
    'Instance',
    'Mechanism',
    'PassengerRequest',
]
