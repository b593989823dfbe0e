"""Teichmueller operations: stretch, point maps, extremal maps, distance.

The horizontal stretch zeta -> K Re(zeta) + i Im(zeta) acts on hexagon
classes by scaling the H-flagged sides; pushing a pentagon through its
hexagon representative, stretching, and inverting the parameter problem
yields the pentagon at parameter (K, phi) along the geodesic in direction
phi.  The extremal map between two pentagons is found by solving for the
(K, phi) whose image matches the target; its dilatation never exceeds the
explicit angular-rescaling competitor bound, which is also computed here.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .core import (
    HORIZONTAL,
    INF,
    MARK_NAMES,
    VERTICAL,
    ConvergenceError,
    CornerError,
    Direction,
    ExtremalResult,
    HexagonClass,
    Pentagon,
    RangeError,
    TeichParam,
)
from .inverse import _newton, pentagon_from_hexagon
from .quadrature import DEFAULT_SPEC, QuadratureSpec, integrate_smooth_adaptive
from .scmap import (
    FlatStructure,
    evaluate_boundary,
    evaluate_interior,
    flat_structure,
    hexagon_rep,
    sqrt_qd,
)

EXTREMAL_TOL = 1e-9
_PHI_SCAN = 12


def stretch(h: HexagonClass, K: float) -> HexagonClass:
    """Scale every H-flagged side by K and renormalize; turns and labels
    are unchanged and closure is preserved."""
    if not K > 0.0:
        raise RangeError(f"stretch factor must be positive, got {K!r}")
    axes = h.axes()
    segments = tuple(
        s * K if ax == HORIZONTAL else s for s, ax in zip(h.segments, axes)
    )
    return HexagonClass(segments, h.turns, h.first_axis, h.labels).normalized()


def _coords(p: Pentagon) -> np.ndarray:
    return np.array([math.log(p.p2 / (1.0 - p.p2)), math.log(p.p4 - 1.0)])


def _teich_point_raw(
    p: Pentagon,
    K: float,
    phi: Direction,
    spec: QuadratureSpec,
    init=None,
    _depth: int = 5,
):
    """Image pentagon for any positive stretch factor (internal)."""
    target = stretch(hexagon_rep(p, phi, spec), K)
    guesses = [init, (p, phi)] if init is not None else [(p, phi)]
    last_error = None
    for guess in guesses:
        try:
            return pentagon_from_hexagon(target, init=guess, spec=spec)
        except ConvergenceError as exc:
            last_error = exc
    if _depth <= 0:
        raise last_error
    # Ladder in K: reach the target through intermediate stretches.
    try:
        mid, dmid, _ = _teich_point_raw(
            p, math.sqrt(K), phi, spec, init=init, _depth=_depth - 1
        )
        return pentagon_from_hexagon(target, init=(mid, dmid), spec=spec)
    except ConvergenceError:
        raise last_error


def teich_point_full(
    p: Pentagon, t: TeichParam, spec: QuadratureSpec = DEFAULT_SPEC
) -> tuple[Pentagon, Direction, float]:
    """Image pentagon with the direction of its hexagon representative."""
    return _teich_point_raw(p, t.K, t.phi, spec)


def teich_point(
    p: Pentagon, t: TeichParam, spec: QuadratureSpec = DEFAULT_SPEC
) -> Pentagon:
    """The pentagon at parameter (K, phi) on the geodesic through p."""
    return teich_point_full(p, t, spec)[0]


def sector_map_dilatation(p: Pentagon, q: Pentagon) -> float:
    """Dilatation of the piecewise angular-rescaling competitor map.

    Both pentagons are sent to the unit disc by z -> (z - i)/(z + i); the
    five boundary arcs between marks are matched by maps that fix the radius
    and rescale the angle, so the dilatation is the worst width ratio.  This
    is an upper bound for the extremal dilatation.
    """
    return _dilatation_from_widths(_sector_widths(p), _sector_widths(q))


def _sector_widths(p: Pentagon) -> list[float]:
    angles = []
    for m in p.marks:
        if math.isinf(m):
            angles.append(math.atan2(0.0, 1.0))  # image of infinity is 1
        else:
            w = complex(m, -1.0) / complex(m, 1.0)
            angles.append(math.atan2(w.imag, w.real))
    widths = []
    for a, b in zip(angles, angles[1:] + angles[:1]):
        widths.append((b - a) % (2.0 * math.pi))
    return widths


def _dilatation_from_widths(w1, w2) -> float:
    total1, total2 = sum(w1), sum(w2)
    worst = 1.0
    for a, b in zip(w1, w2):
        ratio = (b / total2) / (a / total1)
        worst = max(worst, ratio, 1.0 / ratio)
    return worst


def extremal_map_full(
    p: Pentagon, q: Pentagon, spec: QuadratureSpec = DEFAULT_SPEC
) -> tuple[ExtremalResult, Direction]:
    """Extremal parameters and the direction logged at the image pentagon."""
    target = _coords(q)
    if float(np.linalg.norm(_coords(p) - target)) < 1e-13:
        return (
            ExtremalResult(1.0, Direction(0.0), 0.0, 0.0, phi_unique=False),
            Direction(0.0),
        )

    warm: dict = {}

    def G(y):
        K = math.exp(float(y[0]))
        phi = Direction(float(y[1]))
        pent, dire, _ = _teich_point_raw(p, K, phi, spec, init=warm.get("sol"))
        warm["sol"] = (pent, dire)
        warm[(float(y[0]), phi.phi)] = dire
        return _coords(pent) - target

    # Scan directions at a modest stretch and pick the one whose displacement
    # in coordinate space aligns best with the target direction; the Newton
    # iteration then starts from that known-good scan point.  The sector-map
    # bound caps the scan stretch for nearby targets.
    k0 = max(sector_map_dilatation(p, q), 1.0 + 1e-6)
    k_scan = min(k0, 1.5)
    u_star = target - _coords(p)
    best = None
    for j in range(_PHI_SCAN):
        phi = 2.0 * math.pi * (j + 0.5) / _PHI_SCAN
        warm.pop("sol", None)
        try:
            r = G(np.array([math.log(k_scan), phi]))
        except (ConvergenceError, RangeError, ArithmeticError):
            continue
        u = r + u_star  # displacement of the scan point from p
        un = float(np.linalg.norm(u))
        if un == 0.0:
            continue
        score = float(np.dot(u, u_star)) / un
        if best is None or score > best[0]:
            best = (score, phi)
    if best is None:
        raise ConvergenceError(
            "no starting direction admits a Teichmueller point solve"
        )

    warm.pop("sol", None)
    y, norm, ok = _newton(
        G,
        np.array([math.log(k_scan), best[1]]),
        residual_tol=EXTREMAL_TOL,
        max_iter=60,
    )
    if not ok:
        # Continuation along the segment from p to q in coordinate space.
        y = np.array([math.log(k_scan), best[1]])
        start = _coords(p)
        for k in range(1, 9):
            lam = k / 8.0
            blended = (1.0 - lam) * start + lam * target

            def G_stage(yt, blended=blended):
                K = math.exp(float(yt[0]))
                phi = Direction(float(yt[1]))
                pent, dire, _ = _teich_point_raw(
                    p, K, phi, spec, init=warm.get("sol")
                )
                warm["sol"] = (pent, dire)
                return _coords(pent) - blended

            y, norm, ok = _newton(G_stage, y, residual_tol=EXTREMAL_TOL, max_iter=60)
        y, norm, ok = _newton(G, y, residual_tol=EXTREMAL_TOL, max_iter=60)
        if not ok:
            raise ConvergenceError(
                f"extremal solve stalled with residual {norm:.3g}", residual=norm
            )

    log_k, phi = float(y[0]), Direction(float(y[1]))
    if log_k < 0.0:
        # A contraction along phi is the stretch exp(-log K) along phi + pi.
        log_k, phi = -log_k, Direction(phi.phi + math.pi)
    K = math.exp(log_k)
    pent, dire, _ = _teich_point_raw(p, K, phi, spec, init=warm.get("sol"))
    norm = float(np.linalg.norm(_coords(pent) - target))
    result = ExtremalResult(K, phi, 0.5 * math.log(K), norm)
    return result, dire


def extremal_map(
    p: Pentagon, q: Pentagon, spec: QuadratureSpec = DEFAULT_SPEC
) -> ExtremalResult:
    """Parameters (K, phi) of the extremal quasiconformal map from p to q."""
    return extremal_map_full(p, q, spec)[0]


def teich_distance(
    p: Pentagon, q: Pentagon, spec: QuadratureSpec = DEFAULT_SPEC
) -> float:
    """Teichmueller distance (1/2) log K between two pentagons."""
    return extremal_map(p, q, spec).distance


def geodesic_ray(
    p: Pentagon,
    d: Direction,
    K_max: float,
    steps: int,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> list[tuple[float, Pentagon]]:
    """Samples of the geodesic through p in direction d.

    Returns [(K_j, pentagon_j)] at K_j = exp(j log(K_max)/steps), j = 1..steps.
    """
    if K_max < 1.0:
        raise RangeError(f"K_max must be at least 1, got {K_max!r}")
    if steps < 1:
        raise RangeError(f"steps must be at least 1, got {steps!r}")
    out = []
    init = None
    for j in range(1, steps + 1):
        K = math.exp(j * math.log(K_max) / steps)
        pent, dire, _ = _teich_point_raw(p, K, d, spec, init=init)
        init = (pent, dire)
        out.append((K, pent))
    return out


# ---------------------------------------------------------------------------
# Realizing the extremal map pointwise.


@lru_cache(maxsize=64)
def _inversion_seeds(p2: float, p4: float, phi: float, spec: QuadratureSpec):
    """Precomputed (w, zeta(w)) samples used to seed Newton inversion."""
    p, d = Pentagon(p2, p4), Direction(phi)
    span = max(p4, 2.0)
    xs = np.linspace(-0.75 * span, 1.75 * span, 21)
    ys = np.geomspace(0.02 * span, 2.5 * span, 11)
    ws, zs = [], []
    for y in ys:
        for x in xs:
            w = complex(x, y)
            ws.append(w)
            zs.append(evaluate_interior(p, d, w, spec))
    return np.array(ws), np.array(zs)


def _invert_interior(
    q: Pentagon, d: Direction, tau: complex, spec: QuadratureSpec
) -> complex:
    """Solve zeta_q(w) = tau for w in the open upper half-plane."""
    f = sqrt_qd(q, d, spec)
    ws, zs = _inversion_seeds(q.p2, q.p4, d.phi, spec)
    k = int(np.argmin(np.abs(zs - tau)))
    w, zeta_w = complex(ws[k]), complex(zs[k])

    def segment(z0, z1):
        dz = z1 - z0
        val, _ = integrate_smooth_adaptive(lambda t: f(z0 + t * dz) * dz, 0.0, 1.0, spec)
        return val

    for _ in range(80):
        err = tau - zeta_w
        if abs(err) < 1e-12 * max(1.0, abs(tau)):
            return w
        deriv = complex(f(np.array([w]))[0])
        if deriv == 0.0 or not np.isfinite(deriv):
            raise CornerError(f"derivative vanished during inversion at {w!r}")
        step = err / deriv
        # Dampen near the boundary and the corners, where the derivative
        # degenerates; never cross the real axis.
        alpha = 1.0
        while alpha >= 1.0 / 1024.0:
            w_new = w + alpha * step
            if w_new.imag > 0.0 and abs(alpha * step) < 0.5 * w.imag + abs(step):
                break
            alpha *= 0.5
        else:
            raise CornerError(f"inversion step pinned at the boundary near {w!r}")
        w_new = w + alpha * step
        zeta_w = zeta_w + segment(w, w_new)
        w = w_new
    raise CornerError(f"inversion did not converge toward {tau!r}")


def _affine_match(
    flat_p: FlatStructure, flat_q: FlatStructure, K: float
) -> tuple[float, complex]:
    """Real scale a and shift b with a * zeta_q + b = stretched zeta_p at
    the five marked corners."""
    rows, rhs = [], []
    n_p, n_q = flat_p.n, flat_q.n
    for k in range(5):
        vp = flat_p.vertices[(flat_p.labels[k] + 1) % n_p]
        wq = flat_q.vertices[(flat_q.labels[k] + 1) % n_q]
        target = complex(K * vp.real, vp.imag)
        rows.append([wq.real, 1.0, 0.0])
        rhs.append(target.real)
        rows.append([wq.imag, 0.0, 1.0])
        rhs.append(target.imag)
    sol, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    a, br, bi = (float(v) for v in sol)
    return a, complex(br, bi)


def _locate_boundary(flat: FlatStructure, x: float, spec: QuadratureSpec):
    """Arc index and partial length along it for a boundary point."""
    from .quadrature import arc_partial

    for i, arc in enumerate(flat.arcs):
        if arc.contains(x):
            return i, arc_partial(flat.qd, arc, x, spec)
    raise RangeError(f"{x!r} is not interior to any boundary arc")


def _arc_point(arc, t: float) -> float:
    """Point at parameter t in (0,1), measured from the traversal start."""
    if math.isinf(arc.hi):
        return arc.lo + t / (1.0 - t)
    if math.isinf(arc.lo):
        return arc.hi - (1.0 - t) / t
    return arc.lo + t * (arc.hi - arc.lo)


def _boundary_image(
    flat_p: FlatStructure,
    flat_q: FlatStructure,
    K: float,
    a: float,
    x: float,
    spec: QuadratureSpec,
) -> float:
    """Image of a boundary point: same arc index, matched scaled arc length."""
    from .quadrature import arc_partial

    i, s_p = _locate_boundary(flat_p, x, spec)
    arc_p, arc_q = flat_p.arcs[i], flat_q.arcs[i]
    factor = K if arc_p.axis == HORIZONTAL else 1.0
    s_q = min(s_p * factor / a, flat_q.lengths[i])

    lo, hi = 1e-15, 1.0 - 1e-15
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if arc_partial(flat_q.qd, arc_q, _arc_point(arc_q, mid), spec) < s_q:
            lo = mid
        else:
            hi = mid
    return _arc_point(arc_q, 0.5 * (lo + hi))


@lru_cache(maxsize=256)
def _extremal_cached(p2, p4, q2, q4, spec):
    return extremal_map_full(Pentagon(p2, p4), Pentagon(q2, q4), spec)


def apply_extremal_map(
    p: Pentagon,
    q: Pentagon,
    z: complex,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> complex:
    """Image of the point z under the extremal map from p to q.

    The map is K Re + i Im read through the polygon coordinates of the two
    pentagons: w = zeta_q^{-1}(K Re zeta_p(z) + i Im zeta_p(z)), with the
    affine normalization between the two polygon representatives fitted at
    the marked corners.  Marks map to marks; other boundary points map by
    arc length along the matched side; interior points by Newton inversion.
    """
    z = complex(z)
    result, dire = _extremal_cached(p.p2, p.p4, q.p2, q.p4, spec)
    K, phi = result.K, result.phi

    if z.imag == 0.0:
        marks_p = [0.0, p.p2, 1.0, p.p4, INF]
        marks_q = [0.0, q.p2, 1.0, q.p4, INF]
        if math.isinf(z.real):
            return complex(INF, 0.0)
        for mp, mq in zip(marks_p, marks_q):
            if z.real == mp:
                return complex(mq, 0.0)
    if z.imag < 0.0:
        raise RangeError(f"the map is defined on the closed upper half-plane, got {z!r}")

    flat_p = flat_structure(p, phi, spec)
    flat_q = flat_structure(q, dire, spec)
    a, b = _affine_match(flat_p, flat_q, K)

    if z.imag == 0.0:
        return complex(_boundary_image(flat_p, flat_q, K, a, z.real, spec), 0.0)

    zeta = evaluate_interior(p, phi, z, spec)
    tau = (complex(K * zeta.real, zeta.imag) - b) / a
    w = _invert_interior(q, dire, tau, spec)
    if w.imag < 0.0:
        w = complex(w.real, 0.0)
    return w


def dilatation_estimate(Z: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Finite-difference dilatation field of a sampled map.

    Z must be a uniform rectangular complex grid; W the mapped values.  At
    each interior node the central-difference derivatives give the quotient
    (|w_z| + |w_zbar|) / (|w_z| - |w_zbar|); border nodes and nodes with
    orientation loss (|w_z| <= |w_zbar|) are flagged as NaN.
    """
    Z = np.asarray(Z, dtype=complex)
    W = np.asarray(W, dtype=complex)
    if Z.shape != W.shape or Z.ndim != 2 or min(Z.shape) < 3:
        raise RangeError("need matching 2-d grids of shape at least 3 x 3")
    hx = Z[0, 1].real - Z[0, 0].real
    hy = Z[1, 0].imag - Z[0, 0].imag
    wobble = 4e-15 * max(1.0, float(np.abs(Z).max()))
    if not (
        np.allclose(np.diff(Z.real, axis=1), hx, rtol=0, atol=wobble)
        and np.allclose(np.diff(Z.imag, axis=0), hy, rtol=0, atol=wobble)
    ):
        raise RangeError("grid must be uniform and axis-aligned")

    wx = (W[1:-1, 2:] - W[1:-1, :-2]) / (2.0 * hx)
    wy = (W[2:, 1:-1] - W[:-2, 1:-1]) / (2.0 * hy)
    w_z = 0.5 * (wx - 1j * wy)
    w_zbar = 0.5 * (wx + 1j * wy)
    num = np.abs(w_z) + np.abs(w_zbar)
    den = np.abs(w_z) - np.abs(w_zbar)
    out = np.full(Z.shape, np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        field = np.where(den > 0.0, num / den, np.nan)
    out[1:-1, 1:-1] = field
    return out
