"""Boundary-integral design and verification of electro-osmotic cloaks."""
from .analytic import annulus_condition, confocal_condition
from .exterior import solve, solve_electric, solve_pressure
from .fields import CloakConfig, HarmonicField, config_from_dict
from .geometry import Curve, make_circle, make_confocal_ellipse, make_named_shape, shrink_conformal
from .kernels import BACKEND
from .optimizer import run_optimization

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CloakConfig", "Curve", "HarmonicField", "annulus_condition", "config_from_dict",
    "confocal_condition", "make_circle", "make_confocal_ellipse", "make_named_shape",
    "run_optimization", "shrink_conformal", "solve", "solve_electric", "solve_pressure",
]
