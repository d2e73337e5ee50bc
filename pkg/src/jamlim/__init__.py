"""Perfect simulation of the jamming limit of finite-range parking processes on Z^d."""
__version__ = "0.1.0"

from ._backend import BACKEND
from .armour import Armour, armour, default_budget, perfect_samples, perfect_site, perfect_window
from .errors import BudgetExceeded
from .estimate import (CorrelationReport, Estimate, correlation, density_box, density_ergodic, density_perfect,
                       local_discrepancy, tail_bound)
from .exact1d import SeriesBounds, brute_force_rho_segment, p, rho_bounds, total_mass
from .field import Box, ExplicitField, UniformField, arrival_order, parse_seed, site_value
from .scheme import ParkingScheme, full_table, is_decreasing, load_scheme, nn_exclusion, resolve_scheme
from .simulate import BoundaryCondition, Configuration, park, park_box

__all__ = [
    "BACKEND", "Armour", "armour", "default_budget", "perfect_samples", "perfect_site", "perfect_window",
    "BudgetExceeded", "CorrelationReport", "Estimate", "correlation", "density_box", "density_ergodic",
    "density_perfect", "local_discrepancy", "tail_bound", "SeriesBounds", "brute_force_rho_segment", "p",
    "rho_bounds", "total_mass", "Box", "ExplicitField", "UniformField", "arrival_order", "parse_seed",
    "site_value", "ParkingScheme", "full_table", "is_decreasing", "load_scheme", "nn_exclusion",
    "resolve_scheme", "BoundaryCondition", "Configuration", "park", "park_box",
]
