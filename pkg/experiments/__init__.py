"""
Instance generation, batch experiments and the worked example
"""
from .generator import generate_instance
from .runner import VARIANTS, run_experiment

__all__ = ['generate_instance', 'VARIANTS', 'run_experiment']
