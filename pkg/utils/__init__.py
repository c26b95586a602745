"""
Utility modules for RideForge
"""
from .validators import validate_json_schema, sanitize_for_json
from .rationals import format_rational, harmonic

__all__ = ['validate_json_schema', 'sanitize_for_json', 'format_rational', 'harmonic']
