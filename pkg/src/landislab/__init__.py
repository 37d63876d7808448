"""Numerical laboratory for quantitative unique continuation in the plane.

Subpackages by theme:

- ``fields``      grids, scalar/complex fields, derivatives, sup norms
- ``elliptic``    coefficient validation, div(A grad) solvers, positive multipliers
- ``quasigeom``   fundamental solutions, quasi-circles and quasi-balls
- ``beltrami``    first-order Beltrami operators and the hat-operator calculus
- ``transforms``  Cauchy and Beurling transforms on a bounded domain
- ``similarity``  the similarity principle for generalized Beltrami equations
- ``landis``      end-to-end vanishing-order and decay-scan experiments
- ``cli``         configuration-driven experiment drivers
"""

from .fields import (
    Ball,
    ComplexField,
    GridSpec,
    Polyline,
    RegionError,
    ScalarField,
    partial_x,
    partial_y,
    sample,
    sup_norm,
    wirtinger,
)

__all__ = [
    "Ball",
    "ComplexField",
    "GridSpec",
    "Polyline",
    "RegionError",
    "ScalarField",
    "partial_x",
    "partial_y",
    "sample",
    "sup_norm",
    "wirtinger",
]

__version__ = "0.1.0"
