"""
Independent checks of the auction guarantees
"""
from .critical import NEVER_WINS, measure_critical_value
from .strategyproof import TripDependentCostHarness, check_strategyproofness
from .suites import run_suite

__all__ = [
    'NEVER_WINS',
    'measure_critical_value',
    'TripDependentCostHarness',
    'check_strategyproofness',
    'run_suite',
]
