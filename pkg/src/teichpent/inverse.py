"""Parameter problem: recover (pentagon, direction) from a hexagon class.

The forward map is a homeomorphism onto the space of classes, so a class is
pinned down by its combinatorial type (labels, turn pattern, first axis)
together with three scale-invariant shape ratios.  The solver works in
unconstrained coordinates u = logit(p2), v = log(p4 - 1), w = phi and runs a
damped Newton iteration on the ratio mismatch, with a short homotopy in
ratio space as a fallback; the combinatorial type selects the angular
chamber for the initial direction, and rectangular targets pin the direction
to the collision value, leaving a two-variable solve.
"""

from __future__ import annotations

import math

import numpy as np

from .core import (
    HORIZONTAL,
    INF,
    MARK_NAMES,
    ConvergenceError,
    Direction,
    HexagonClass,
    Pentagon,
    QuadraticDifferential,
    RangeError,
    ShapeError,
    boundary_arcs,
)
from .quadrature import DEFAULT_SPEC, QuadratureSpec
from .scmap import closure_residual, hexagon_rep

_U_MAX = 18.420680743952367  # logit(1 - 1e-8)
_V_MIN = math.log(1e-8)
_V_MAX = math.log(1e8 - 1.0)

RESIDUAL_TOL = 1e-10
STEP_TOL = 1e-12
MAX_ITER = 200
HOMOTOPY_STAGES = 8
FD_STEP = 1e-6
OUT_TOL = 1e-6


def solver_coords(p: Pentagon, d: Direction) -> np.ndarray:
    return np.array(
        [math.log(p.p2 / (1.0 - p.p2)), math.log(p.p4 - 1.0), d.phi]
    )


def from_solver_coords(x) -> tuple[Pentagon, Direction]:
    u = min(_U_MAX, max(-_U_MAX, float(x[0])))
    v = min(_V_MAX, max(_V_MIN, float(x[1])))
    p2 = 1.0 / (1.0 + math.exp(-u))
    p4 = 1.0 + math.exp(v)
    return Pentagon(p2, p4), Direction(float(x[2])) if len(x) > 2 else Direction(0.0)


def shape_ratios(h: HexagonClass) -> np.ndarray:
    """Three scale-invariant ratios pinning the class within its type.

    Generic case: reading the sides counterclockwise from the re-entrant
    corner gives (b, a, B+b, A, B, A-a) in the dimensions of the canonical
    L-shape with vertices (0,0), (A,0), (A,B), (a,B), (a,B+b), (0,B+b);
    the ratios are (a/A, b/B, B/A).  Rectangular case: sides from the flat
    mark are (C-t, D, C, D, t); the ratios are (D/C, t/C, (C-t)/C).
    """
    segs = h.segments
    n = h.n
    if n == 6:
        r = h.turns.index(-1)
        s = [segs[(r + 1 + k) % 6] for k in range(6)]
        return np.array([s[1] / s[3], s[0] / s[4], s[4] / s[3]])
    f = h.turns.index(0)
    s = [segs[(f + 1 + k) % 5] for k in range(5)]
    return np.array([s[1] / s[2], s[4] / s[2], s[0] / s[2]])


def l_dimensions(h: HexagonClass) -> tuple[float, float, float, float]:
    """Canonical L-shape dimensions (a, b, A, B) of a generic class."""
    if h.n != 6:
        raise ShapeError("rectangular classes have no re-entrant corner")
    r = h.turns.index(-1)
    s = [h.segments[(r + 1 + k) % 6] for k in range(6)]
    return s[1], s[0], s[3], s[4]


def combinatorial_type(p: Pentagon, d: Direction):
    """(labels, turns, first_axis) of the boundary image, no integration."""
    from .core import TURN_QUARTER

    qd = QuadraticDifferential(p, d)
    arcs = boundary_arcs(qd)
    n = len(arcs)
    turns = tuple(TURN_QUARTER[arc.hi_kind] for arc in arcs)
    mark_corner = {"0": n - 1}
    mark_values = dict(zip(MARK_NAMES, p.marks))
    for i, arc in enumerate(arcs):
        for name, value in mark_values.items():
            if value == arc.hi or (math.isinf(value) and math.isinf(arc.hi)):
                mark_corner[name] = i
    mark_corner["0"] = n - 1
    labels = tuple(mark_corner[name] for name in MARK_NAMES)
    return labels, turns, arcs[0].axis


def _type_of(h: HexagonClass):
    return h.labels, h.turns, h.first_axis


def _phi_for_zero(z0: float, sin_positive: bool) -> float:
    if math.isinf(z0):
        return 0.0 if sin_positive else math.pi
    if sin_positive:
        return math.atan2(1.0, -z0) % (2.0 * math.pi)
    return math.atan2(-1.0, z0) % (2.0 * math.pi)


def _chamber_candidates(p: Pentagon) -> list[float]:
    """Representative zeros, one per angular chamber of the marks."""
    return [
        -(1.0 + p.p4),
        0.5 * p.p2,
        0.5 * (p.p2 + 1.0),
        0.5 * (1.0 + p.p4),
        2.0 * p.p4 + 1.0,
    ]


def _rect_phi(mark: str, p: Pentagon, sin_positive: bool) -> float:
    """Direction at which the zero collides with the given mark."""
    values = {"0": 0.0, "p2": p.p2, "1": 1.0, "p4": p.p4, "inf": INF}
    if mark == "inf":
        # sin(phi) = 0; the two branches differ by the sign of cos(phi).
        return 0.0 if sin_positive else math.pi
    return _phi_for_zero(values[mark], sin_positive)


def initial_guess(h: HexagonClass) -> tuple[Pentagon, Direction]:
    """Starting point matching the combinatorial type of the target."""
    p0 = Pentagon(0.5, 2.0)
    target = _type_of(h)
    if h.n == 6:
        for z0 in _chamber_candidates(p0):
            for sin_positive in (True, False):
                phi = _phi_for_zero(z0, sin_positive)
                if combinatorial_type(p0, Direction(phi)) == target:
                    return p0, Direction(phi)
    else:
        flat = h.flat_mark()
        for sin_positive in (True, False):
            phi = _rect_phi(flat, p0, sin_positive)
            if combinatorial_type(p0, Direction(phi)) == target:
                return p0, Direction(phi)
    raise ShapeError(
        f"no (pentagon, direction) realizes labels={h.labels}, "
        f"turns={h.turns}, first_axis={h.first_axis}"
    )


def _rect_sin_positive(h: HexagonClass) -> bool:
    p0 = Pentagon(0.5, 2.0)
    flat = h.flat_mark()
    for sin_positive in (True, False):
        phi = _rect_phi(flat, p0, sin_positive)
        if combinatorial_type(p0, Direction(phi)) == _type_of(h):
            return sin_positive
    raise ShapeError(f"rectangular pattern {h.turns!r} is not realizable")


def residual_function(
    x, h: HexagonClass, spec: QuadratureSpec = DEFAULT_SPEC
) -> np.ndarray:
    """Ratio mismatch between the class at solver coordinates x and h.

    For a generic target x is (u, v, w); for a rectangular target x is
    (u, v) and the direction is the collision value for the flat mark.
    Raises ShapeError when x falls in a different combinatorial chamber.
    """
    x = np.asarray(x, dtype=float)
    if h.n == 6:
        p, d = from_solver_coords(x)
    else:
        p, _ = from_solver_coords(x[:2])
        d = Direction(_rect_phi(h.flat_mark(), p, _rect_sin_positive(h)))
    if combinatorial_type(p, d) != _type_of(h):
        raise ShapeError("combinatorial type mismatch at this point")
    return shape_ratios(hexagon_rep(p, d, spec)) - shape_ratios(h)


def _newton(F, x0, *, max_iter=MAX_ITER, residual_tol=RESIDUAL_TOL, step_tol=STEP_TOL):
    """Damped quasi-Newton with finite-difference Jacobian and backtracking.

    F returns a residual vector or raises ShapeError outside the valid
    chamber; such steps are treated as failed and shortened.  Returns
    (x, residual_norm, converged).
    """
    x = np.asarray(x0, dtype=float)

    def safe(xt):
        try:
            return F(xt)
        except (ShapeError, RangeError, ArithmeticError):
            return None

    r = safe(x)
    if r is None:
        return x, math.inf, False
    norm = float(np.linalg.norm(r))
    jac = None
    for _ in range(max_iter):
        if norm < residual_tol:
            return x, norm, True
        if jac is None:
            jac = np.empty((len(r), len(x)))
            for j in range(len(x)):
                xp = x.copy()
                xp[j] += FD_STEP
                rp = safe(xp)
                if rp is None:
                    xp[j] = x[j] - FD_STEP
                    rp = safe(xp)
                    if rp is None:
                        return x, norm, False
                    jac[:, j] = (r - rp) / FD_STEP
                else:
                    jac[:, j] = (rp - r) / FD_STEP
        try:
            step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        except np.linalg.LinAlgError:
            return x, norm, False
        if not np.all(np.isfinite(step)):
            return x, norm, False
        alpha = 1.0
        improved = False
        while alpha >= 1e-6:
            xt = x + alpha * step
            rt = safe(xt)
            if rt is not None:
                nt = float(np.linalg.norm(rt))
                if nt < norm * (1.0 - 1e-4 * alpha) or nt < residual_tol:
                    x, r, norm = xt, rt, nt
                    improved = True
                    break
            alpha *= 0.5
        if not improved:
            return x, norm, False
        if float(np.linalg.norm(alpha * step)) < step_tol:
            return x, norm, norm < math.sqrt(residual_tol)
        jac = None
    return x, norm, norm < residual_tol


def pentagon_from_hexagon(
    h: HexagonClass,
    init: tuple[Pentagon, Direction] | None = None,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> tuple[Pentagon, Direction, float]:
    """Invert the forward map: parameters whose class equals h.

    Returns (pentagon, direction, residual) with the residual measured as
    the norm of the three-ratio mismatch.  Solutions are unique, so any
    converged answer is the answer; a homotopy from the initial guess in
    ratio space is used when the direct iteration stalls.
    """
    h = h.normalized()
    if closure_residual(h) >= 1e-6:
        raise ShapeError(
            f"target closure residual {closure_residual(h):.3g} too large"
        )
    if init is None:
        p0, d0 = initial_guess(h)
    else:
        p0, d0 = init
        if combinatorial_type(p0, d0) != _type_of(h):
            p0, d0 = initial_guess(h)

    rect = h.n == 5
    x0 = solver_coords(p0, d0)[:2] if rect else solver_coords(p0, d0)

    def unpack(x):
        if rect:
            p, _ = from_solver_coords(x[:2])
            return p, Direction(_rect_phi(h.flat_mark(), p, _rect_sin_positive(h)))
        return from_solver_coords(x)

    def F(x):
        return residual_function(x, h, spec)

    x, norm, ok = _newton(F, x0)
    if not ok:
        # Homotopy: walk the target from the class at the initial guess to h.
        ratios_target = shape_ratios(h)
        p_cur, d_cur = unpack(x0)
        ratios_start = shape_ratios(hexagon_rep(p_cur, d_cur, spec))
        x = x0
        for k in range(1, HOMOTOPY_STAGES + 1):
            lam = k / HOMOTOPY_STAGES
            blended = (1.0 - lam) * ratios_start + lam * ratios_target

            def F_stage(xt, blended=blended):
                xt = np.asarray(xt, dtype=float)
                p, d = unpack(xt)
                if combinatorial_type(p, d) != _type_of(h):
                    raise ShapeError("left the chamber")
                return shape_ratios(hexagon_rep(p, d, spec)) - blended

            x, norm, ok = _newton(F_stage, x)
            if not ok and k == HOMOTOPY_STAGES:
                raise ConvergenceError(
                    f"parameter solve stalled with residual {norm:.3g}",
                    residual=norm,
                )
        x, norm, ok = _newton(F, x)
        if not ok:
            raise ConvergenceError(
                f"parameter solve stalled with residual {norm:.3g}", residual=norm
            )
    p_sol, d_sol = unpack(x)
    from .core import hexagon_equal

    if not hexagon_equal(hexagon_rep(p_sol, d_sol, spec), h, OUT_TOL):
        raise ConvergenceError(
            f"solution class differs from the target beyond {OUT_TOL}",
            residual=norm,
        )
    return p_sol, d_sol, norm
