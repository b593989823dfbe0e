"""Independent reference computations used to cross-validate the pipeline.

``brute_side_length`` re-integrates boundary sides with its own substitution
and a composite Simpson rule, sharing no code with the quadrature module.
``quad_modulus_oracle`` runs the four-pole specialization (a disc with four
boundary marks maps to a plain rectangle) through the main machinery; the
elliptic-integral closed form used in tests is verified against it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import INF, AccuracyError, Arc, QuadraticDifferential, RangeError
from .quadrature import (
    ORACLE_SPEC,
    Density,
    QuadratureSpec,
    integrate_density_singular,
)


@dataclass(frozen=True)
class OracleReport:
    value: float
    method: str
    est_error: float

    def __post_init__(self):
        if self.est_error < 0.0:
            raise RangeError("error estimate must be nonnegative")


def agm(a: float, b: float) -> float:
    """Common limit of the arithmetic-geometric mean iteration."""
    if a <= 0.0 or b <= 0.0:
        raise RangeError(f"agm requires positive arguments, got {a!r}, {b!r}")
    for _ in range(64):
        if abs(a - b) <= 1e-17 * max(a, b):
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def elliptic_K(k: float) -> float:
    """Complete elliptic integral of the first kind, modulus convention."""
    if not 0.0 <= k < 1.0:
        raise RangeError(f"modulus must satisfy 0 <= k < 1, got {k!r}")
    return math.pi / (2.0 * agm(1.0, math.sqrt(1.0 - k * k)))


def _simpson(g, a: float, b: float, n: int, g_ends: float) -> float:
    h = (b - a) / n
    total = g_ends
    for i in range(1, n):
        total += (4.0 if i % 2 else 2.0) * g(a + i * h)
    return total * h / 3.0


def _refine_simpson(g, a: float, b: float, tol: float, max_levels: int = 60):
    # Endpoint values by quadratic extrapolation from just inside: exactly at
    # the endpoints the substituted integrands are removable 0 * inf forms,
    # and evaluating too close to them loses digits to cancellation.
    d = 1e-3 * (b - a)
    g_ends = (3.0 * g(a + d) - 3.0 * g(a + 2 * d) + g(a + 3 * d)) + (
        3.0 * g(b - d) - 3.0 * g(b - 2 * d) + g(b - 3 * d)
    )
    prev = _simpson(g, a, b, 8, g_ends)
    n = 16
    for _ in range(max_levels):
        cur = _simpson(g, a, b, n, g_ends)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur, abs(cur - prev)
        prev = cur
        n *= 2
    raise AccuracyError(
        f"Simpson refinement did not converge on [{a}, {b}]",
        achieved=abs(cur - prev),
    )


def _brute_finite(f, a: float, b: float, tol: float):
    """Integral of f on (a, b), singular endpoints, by sqrt substitution."""
    m = 0.5 * (a + b)

    def left(t):
        return 2.0 * t * f(a + t * t)

    def right(t):
        return 2.0 * t * f(b - t * t)

    v1, e1 = _refine_simpson(left, 0.0, math.sqrt(m - a), tol)
    v2, e2 = _refine_simpson(right, 0.0, math.sqrt(b - m), tol)
    return v1 + v2, e1 + e2


def brute_side_length(qd: QuadraticDifferential, arc: Arc) -> OracleReport:
    """Side length by naive refinement, independent of the main quadrature."""
    phi = qd.direction.phi
    cphi, sphi = math.cos(phi), math.sin(phi)
    p2, p4 = qd.pentagon.p2, qd.pentagon.p4

    def integrand(x: float) -> float:
        num = cphi + x * sphi
        den = x * (x - p2) * (x - 1.0) * (x - p4)
        return math.sqrt(abs(num / den))

    tol = 1e-11
    if not arc.infinite:
        value, est = _brute_finite(integrand, arc.lo, arc.hi, tol)
        return OracleReport(value, "simpson-sqrt", est)
    if math.isinf(arc.hi):
        base = arc.lo

        def transported(t: float) -> float:
            x = base + t / (1.0 - t)
            return integrand(x) / (1.0 - t) ** 2

    else:
        base = arc.hi

        def transported(t: float) -> float:
            x = base - t / (1.0 - t)
            return integrand(x) / (1.0 - t) ** 2

    value, est = _brute_finite(transported, 0.0, 1.0, tol)
    return OracleReport(value, "simpson-sqrt-moebius", est)


def quad_modulus_oracle(
    p: float, spec: QuadratureSpec = ORACLE_SPEC
) -> OracleReport:
    """Conformal modulus of the quadrilateral with marks (0, p, 1, inf).

    Runs the main side-length machinery on the four-pole density
    1 / (x (x-p) (x-1)); the image is a rectangle and the modulus is the
    ratio of the side over (0, p) to the side over (p, 1).  The opposite
    sides give an internal consistency estimate.
    """
    if not 0.0 < p < 1.0:
        raise RangeError(f"mark must satisfy 0 < p < 1, got {p!r}")
    density = Density(1.0, ((0.0, -1), (p, -1), (1.0, -1)))

    s1, e1 = integrate_density_singular(density, 0.0, p, spec)
    s2, e2 = integrate_density_singular(density, p, 1.0, spec)
    # x = 1 + t/(1-t) for (1, inf); x = -t/(1-t) for (-inf, 0).
    d3 = density.moebius(0.0, 1.0, -1.0, 1.0)
    s3, e3 = integrate_density_singular(d3, 0.0, 1.0, spec)
    d4 = density.moebius(-1.0, 0.0, -1.0, 1.0)
    s4, e4 = integrate_density_singular(d4, 0.0, 1.0, spec)

    closure = abs(s1 - s3) + abs(s2 - s4)
    modulus = s1 / s2
    est = (e1 + e3) / s2 + modulus * (e2 + e4) / s2 + closure / s2
    return OracleReport(modulus, "sc-4pole", est)
