"""
Pipeline stages: route a subset, build the trip family, run an auction
"""
from .routing import Route, best_route, trip_cost
from .alternatives import (
    Alternative,
    AlternativeFamily,
    assign_costs,
    build_family,
    enumerate_alternatives,
    make_abstract_family,
)
from .auctions import AuctionOutcome, run_ums, run_vcg, run_vcgs, run_wms

__all__ = [
    'Route',
    'best_route',
    'trip_cost',
    'Alternative',
    'AlternativeFamily',
    'assign_costs',
    'build_family',
    'enumerate_alternatives',
    'make_abstract_family',
    'AuctionOutcome',
    'run_ums',
    'run_vcg',
    'run_vcgs',
    'run_wms',
]
