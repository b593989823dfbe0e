"""Extremal quasiconformal maps between pentagons.

A pentagon (the upper half-plane with five marked boundary points) is
represented by an axis-parallel hexagon through a Schwarz-Christoffel-type
integral; horizontal stretching of the hexagon and inversion of the
parameter problem realize the extremal map between any two pentagons.
"""

from .core import (
    Arc,
    BoundaryQuintuple,
    Direction,
    ExtremalResult,
    HexagonClass,
    MoebiusMap,
    Pentagon,
    QuadraticDifferential,
    TeichParam,
    boundary_arcs,
    hexagon_equal,
    normalize_pentagon,
    qd_eval,
    qd_zero,
)
from .inverse import pentagon_from_hexagon, residual_function, shape_ratios
from .oracles import OracleReport, agm, brute_side_length, elliptic_K, quad_modulus_oracle
from .quadrature import (
    DEFAULT_SPEC,
    ORACLE_SPEC,
    QuadratureSpec,
    gauss_jacobi_rule,
    integrate_side,
    integrate_side_report,
)
from .scmap import (
    closure_residual,
    evaluate_boundary,
    evaluate_interior,
    hexagon_rep,
)
from .teich import (
    apply_extremal_map,
    dilatation_estimate,
    extremal_map,
    geodesic_ray,
    sector_map_dilatation,
    stretch,
    teich_distance,
    teich_point,
    teich_point_full,
)

__all__ = [
    "Arc",
    "BoundaryQuintuple",
    "Direction",
    "ExtremalResult",
    "HexagonClass",
    "MoebiusMap",
    "Pentagon",
    "QuadraticDifferential",
    "TeichParam",
    "OracleReport",
    "QuadratureSpec",
    "DEFAULT_SPEC",
    "ORACLE_SPEC",
    "agm",
    "apply_extremal_map",
    "boundary_arcs",
    "brute_side_length",
    "closure_residual",
    "dilatation_estimate",
    "elliptic_K",
    "evaluate_boundary",
    "evaluate_interior",
    "extremal_map",
    "gauss_jacobi_rule",
    "geodesic_ray",
    "hexagon_equal",
    "hexagon_rep",
    "integrate_side",
    "integrate_side_report",
    "normalize_pentagon",
    "pentagon_from_hexagon",
    "qd_eval",
    "qd_zero",
    "quad_modulus_oracle",
    "residual_function",
    "sector_map_dilatation",
    "shape_ratios",
    "stretch",
    "teich_distance",
    "teich_point",
    "teich_point_full",
]

__version__ = "0.1.0"
