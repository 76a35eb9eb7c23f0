"""Numerics for the fractional Hardy inequality of the regional fractional Laplacian."""

from frac_hardy.special_constants import (
    FracParams,
    a_ns,
    appendix_cns,
    c_ns,
    cos_moment,
    h_ns,
    kappa_ns,
    sphere_area,
)

__version__ = "0.1.0"

__all__ = [
    "FracParams",
    "a_ns",
    "appendix_cns",
    "c_ns",
    "cos_moment",
    "h_ns",
    "kappa_ns",
    "sphere_area",
]
