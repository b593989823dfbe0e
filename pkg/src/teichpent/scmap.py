"""Forward map: from (pentagon, direction) to its axis-parallel hexagon.

The primitive of the square root of the quadratic differential maps the
upper half-plane onto an axis-parallel polygon: each boundary arc goes to a
straight side whose length is the integral of sqrt|qd|, the five marks map
to right-angle corners, and the zero maps to the re-entrant corner (flat
marked point in the rectangular case).  ``hexagon_rep`` assembles the class
representative; ``evaluate_boundary`` and ``evaluate_interior`` evaluate the
mapping itself, the latter by a pole-avoiding path integral with the branch
of the square root calibrated against the first boundary side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import (
    HORIZONTAL,
    INF,
    KIND_FLAT,
    MARK_NAMES,
    TURN_FACTOR,
    TURN_QUARTER,
    VERTICAL,
    Arc,
    ConsistencyError,
    Direction,
    HexagonClass,
    Pentagon,
    PoleError,
    QuadraticDifferential,
    RangeError,
    boundary_arcs,
)
from .quadrature import (
    DEFAULT_SPEC,
    QuadratureSpec,
    arc_partial,
    integrate_side_report,
    integrate_smooth_adaptive,
    side_density,
)

# Raw polygon closure beyond this relative defect signals a quadrature or
# branch bug rather than roundoff.
_CLOSURE_GUARD = 1e-6


@dataclass(frozen=True)
class FlatStructure:
    """Concrete boundary image of one (pentagon, direction) pair.

    Lengths are the raw side integrals (not scale-normalized); vertex i is
    the image of the start point of arc i, with the image of the mark 0
    pinned at the origin and the first side leaving along +1 (H) or +i (V).
    """

    qd: QuadraticDifferential
    arcs: tuple[Arc, ...]
    lengths: tuple[float, ...]
    directions: tuple[complex, ...]
    vertices: tuple[complex, ...]
    turns: tuple[int, ...]
    labels: tuple[int, int, int, int, int]
    closure: float

    @property
    def n(self) -> int:
        return len(self.arcs)

    @property
    def first_axis(self) -> str:
        return self.arcs[0].axis

    def scale(self) -> float:
        return max(self.lengths)


@lru_cache(maxsize=4096)
def _flat_cached(p2: float, p4: float, phi: float, spec: QuadratureSpec) -> FlatStructure:
    qd = QuadraticDifferential(Pentagon(p2, p4), Direction(phi))
    arcs = boundary_arcs(qd)
    n = len(arcs)

    lengths = []
    for arc in arcs:
        value, _ = integrate_side_report(qd, arc, spec)
        lengths.append(value)

    directions = []
    d = 1.0 + 0.0j if arcs[0].axis == HORIZONTAL else 1.0j
    for arc in arcs:
        directions.append(d)
        d = d * TURN_FACTOR[arc.hi_kind]

    vertices = []
    v = 0.0 + 0.0j
    for length, direction in zip(lengths, directions):
        vertices.append(v)
        v = v + length * direction
    defect = v  # should return to the origin
    scale = max(lengths)
    closure = max(abs(defect.real), abs(defect.imag)) / scale
    if closure > _CLOSURE_GUARD:
        raise ConsistencyError(
            f"boundary image fails to close: relative defect {closure:.3g} "
            f"for (p2={p2}, p4={p4}, phi={phi})"
        )

    turns = tuple(TURN_QUARTER[arc.hi_kind] for arc in arcs)
    # Corner i is the end of arc i; the partition starts at the mark 0, so
    # the mark at the end of arc i is the (i+1)-th partition point.
    mark_corner = {}
    mark_values = {name: value for name, value in zip(MARK_NAMES, qd.pentagon.marks)}
    for i, arc in enumerate(arcs):
        end_point = arc.hi if not math.isinf(arc.hi) else INF
        for name, value in mark_values.items():
            if value == end_point or (math.isinf(value) and math.isinf(arc.hi)):
                mark_corner[name] = i
    mark_corner["0"] = n - 1
    labels = tuple(mark_corner[name] for name in MARK_NAMES)

    return FlatStructure(
        qd=qd,
        arcs=arcs,
        lengths=tuple(lengths),
        directions=tuple(directions),
        vertices=tuple(vertices),
        turns=turns,
        labels=labels,
        closure=closure,
    )


def flat_structure(
    p: Pentagon, d: Direction, spec: QuadratureSpec = DEFAULT_SPEC
) -> FlatStructure:
    return _flat_cached(p.p2, p.p4, d.phi, spec)


def hexagon_rep(
    p: Pentagon, d: Direction, spec: QuadratureSpec = DEFAULT_SPEC
) -> HexagonClass:
    """Scale-normalized hexagon class of the boundary image."""
    flat = flat_structure(p, d, spec)
    scale = flat.scale()
    return HexagonClass(
        tuple(length / scale for length in flat.lengths),
        flat.turns,
        flat.first_axis,
        flat.labels,
    )


def closure_residual(h: HexagonClass) -> float:
    """Maximum closure defect of the polygon walk, relative to the largest side."""
    dx, dy = h.closure_defects()
    return max(abs(dx), abs(dy)) / max(h.segments)


def _locate_arc(flat: FlatStructure, x: float) -> int | None:
    """Index of the arc whose interior contains x, or None at a vertex."""
    for i, arc in enumerate(flat.arcs):
        if arc.contains(x):
            return i
    return None


def evaluate_boundary(
    p: Pentagon,
    d: Direction,
    x: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> complex:
    """Image of the boundary point x on the polygon boundary, with the
    image of the mark 0 at the origin."""
    flat = flat_structure(p, d, spec)
    if math.isinf(x):
        return flat.vertices[flat.labels[MARK_NAMES.index("inf")] ]
    for i, arc in enumerate(flat.arcs):
        lo_point = arc.lo if not math.isinf(arc.lo) else None
        if lo_point is not None and x == lo_point:
            return flat.vertices[i]
    i = _locate_arc(flat, x)
    if i is None:
        raise RangeError(f"{x!r} is not on the boundary partition")
    partial = arc_partial(flat.qd, flat.arcs[i], x, spec)
    return flat.vertices[i] + flat.directions[i] * partial


def sqrt_qd(p: Pentagon, d: Direction, spec: QuadratureSpec = DEFAULT_SPEC):
    """Holomorphic branch of sqrt(qd) on the upper half-plane.

    Each linear factor takes its principal square root (smooth off the real
    axis, with the upper-half-plane boundary limit), and a constant unimodular
    phase is calibrated once so that the first boundary side leaves the
    origin along its axis direction.
    """
    flat = flat_structure(p, d, spec)
    const, factors = flat.qd.factors()

    def raw(z):
        z = np.asarray(z, dtype=complex)
        out = np.ones(z.shape, dtype=complex)
        for r, e in factors:
            root = np.sqrt(z - r)
            if e > 0:
                out = out * root
            else:
                out = out / root
        return out

    # Boundary value of the factor product at a first-arc point, using the
    # upper-half-plane limit sqrt(x - r) = i sqrt(r - x) for x < r.
    m = flat.arcs[0].representative()
    g_b = 1.0 + 0.0j
    for r, e in factors:
        root = math.sqrt(abs(m - r)) * (1.0 if m > r else 1.0j)
        g_b = g_b * root if e > 0 else g_b / root
    density = side_density(flat.qd)
    magnitude = float(density.sqrt_abs(np.array([m]))[0])
    c_raw = flat.directions[0] * magnitude / g_b
    # The calibrated constant squares to the factorization constant, so its
    # phase is exactly a fourth root of unity; snap to kill roundoff.
    phase = c_raw / abs(c_raw)
    snapped = min((1, -1, 1j, -1j), key=lambda u: abs(u - phase))
    if abs(snapped - phase) > 1e-9:
        raise ConsistencyError(f"branch phase {phase!r} is not a quarter phase")
    c = snapped * math.sqrt(abs(const))

    def f(z):
        return c * raw(z)

    return f


def _min_pole_gap(p: Pentagon) -> float:
    return min(p.p2, 1.0 - p.p2, p.p4 - 1.0)


def _integrate_segment(f, z0: complex, z1: complex, spec: QuadratureSpec) -> complex:
    """Path integral of f along the straight segment from z0 to z1."""
    if z0 == z1:
        return 0.0 + 0.0j
    dz = z1 - z0

    def g(t):
        return f(z0 + t * dz) * dz

    value, _ = integrate_smooth_adaptive(g, 0.0, 1.0, spec)
    return value


def integrate_path(
    p: Pentagon,
    d: Direction,
    waypoints,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> complex:
    """Integral of the calibrated sqrt(qd) along a polyline from the origin.

    The first waypoint must be the base mark 0; the first leg leaves the
    real axis immediately and is integrated with the substitution that
    absorbs the pole at the base point.  All later legs must stay in the
    open upper half-plane.
    """
    pts = [complex(w) for w in waypoints]
    if pts[0] != 0.0:
        raise RangeError("paths start at the base mark 0")
    f = sqrt_qd(p, d, spec)
    poles = [0.0, p.p2, 1.0, p.p4]

    for z0, z1 in zip(pts[1:], pts[2:]):
        for pole in poles:
            if _segment_pole_distance(z0, z1, pole) < 1e-12:
                raise PoleError(f"path leg passes within 1e-12 of the pole {pole}")

    # First leg: z = z1 * u^2 turns the inverse-square-root start into a
    # smooth integrand.
    z1 = pts[1]
    if z1.imag <= 0.0:
        raise RangeError("the first leg must enter the upper half-plane")

    def g(u):
        z = z1 * u * u
        return f(z) * (2.0 * u * z1)

    total, _ = integrate_smooth_adaptive(g, 0.0, 1.0, spec)
    for z0, z1 in zip(pts[1:], pts[2:]):
        total += _integrate_segment(f, z0, z1, spec)
    return total


def _segment_pole_distance(z0: complex, z1: complex, pole: float) -> float:
    dz = z1 - z0
    if dz == 0.0:
        return abs(z0 - pole)
    t = ((pole - z0) * dz.conjugate()).real / abs(dz) ** 2
    t = min(1.0, max(0.0, t))
    return abs(z0 + t * dz - pole)


def evaluate_interior(
    p: Pentagon,
    d: Direction,
    z: complex,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> complex:
    """Image of an interior point z (Im z > 0) under the polygon map.

    Integrates the calibrated branch from the base mark along a vertical
    ascent, a horizontal pass at a pole-clearing height, and a final vertical
    descent; holomorphy makes the value path-independent.
    """
    z = complex(z)
    if not z.imag > 0.0:
        raise RangeError(f"interior evaluation requires Im z > 0, got {z!r}")
    height = max(z.imag, 0.5 * _min_pole_gap(p))
    waypoints = [0.0, 1j * height, complex(z.real, height)]
    if complex(z.real, height) != z:
        waypoints.append(z)
    return integrate_path(p, d, waypoints, spec)
