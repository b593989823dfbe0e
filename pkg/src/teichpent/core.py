"""Domain types: pentagons, quadratic differentials, hexagon classes.

A pentagon is the closed upper half-plane with five marked boundary points,
normalized so the marks sit at 0, p2, 1, p4, infinity with 0 < p2 < 1 < p4.
A direction angle phi selects a quadratic differential that is real on the
boundary, with simple poles at the five marks and a single real zero at
z0 = -cot(phi) (the point at infinity when sin(phi) = 0).  Integrating the
square root of the differential along the boundary produces an axis-parallel
hexagon, or a rectangle when the zero collides with a mark; this module holds
the value types and the purely combinatorial/arithmetic operations on them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

INF = math.inf
TWO_PI = 2.0 * math.pi

# Guard rails for the open parameter domain (0,1) x (1,oo).
P2_MIN, P2_MAX = 1e-8, 1.0 - 1e-8
P4_MIN, P4_MAX = 1.0 + 1e-8, 1e8

# Chordal distance below which the zero of the differential is treated as
# collided with a mark (rectangular configuration).
MERGE_TOL = 1e-9

MARK_NAMES = ("0", "p2", "1", "p4", "inf")

HORIZONTAL = "H"
VERTICAL = "V"


class TeichpentError(Exception):
    """Base class for all errors raised by this package."""


class RangeError(TeichpentError, ValueError):
    """A parameter lies outside the supported numeric range."""


class OrderingError(TeichpentError, ValueError):
    """Boundary points are not strictly cyclically ordered."""


class DegeneracyError(TeichpentError, ValueError):
    """Two boundary points coincide."""


class PoleError(TeichpentError, ValueError):
    """Evaluation requested at (or through) a pole of the differential."""


class ShapeError(TeichpentError, ValueError):
    """Hexagon data does not describe a realizable class."""


class AccuracyError(TeichpentError, ArithmeticError):
    """Quadrature failed to reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ConvergenceError(TeichpentError, ArithmeticError):
    """An iterative solver stopped without converging."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConsistencyError(TeichpentError, ArithmeticError):
    """An internal cross-check failed; indicates a quadrature or branch bug."""


class CornerError(TeichpentError, ArithmeticError):
    """Point mapping failed too close to a hexagon corner."""


def chordal(x: float, y: float) -> float:
    """Chordal distance between two points of the extended real line."""
    xi, yi = math.isinf(x), math.isinf(y)
    if xi and yi:
        return 0.0
    if xi:
        return 1.0 / math.hypot(1.0, y)
    if yi:
        return 1.0 / math.hypot(1.0, x)
    return abs(x - y) / (math.hypot(1.0, x) * math.hypot(1.0, y))


@dataclass(frozen=True)
class Pentagon:
    """Conformal class of a disc with five boundary marks, coded by (p2, p4)."""

    p2: float
    p4: float

    def __post_init__(self):
        if not (P2_MIN <= self.p2 <= P2_MAX):
            raise RangeError(f"p2={self.p2!r} outside [{P2_MIN}, {P2_MAX}]")
        if not (P4_MIN <= self.p4 <= P4_MAX):
            raise RangeError(f"p4={self.p4!r} outside [{P4_MIN}, {P4_MAX}]")

    @property
    def marks(self) -> tuple[float, float, float, float, float]:
        return (0.0, self.p2, 1.0, self.p4, INF)


@dataclass(frozen=True)
class Direction:
    """An angle in radians, stored reduced to [0, 2*pi)."""

    phi: float

    def __post_init__(self):
        phi = math.fmod(float(self.phi), TWO_PI)
        if phi < 0.0:
            phi += TWO_PI
        if phi >= TWO_PI:
            phi = 0.0
        object.__setattr__(self, "phi", phi)

    @property
    def sin(self) -> float:
        return math.sin(self.phi)

    @property
    def cos(self) -> float:
        return math.cos(self.phi)


def qd_zero(d: Direction) -> float:
    """Zero -cot(phi) of the differential; the point at infinity if sin(phi)=0."""
    s = d.sin
    if s == 0.0:
        return INF
    return -d.cos / s


@dataclass(frozen=True)
class BoundaryQuintuple:
    """Five distinct points on the extended real line, counterclockwise."""

    points: tuple[float, float, float, float, float]

    def __post_init__(self):
        pts = tuple(INF if math.isinf(p) else float(p) for p in self.points)
        if len(pts) != 5:
            raise OrderingError("exactly five boundary points are required")
        object.__setattr__(self, "points", pts)
        for i in range(5):
            for j in range(i + 1, 5):
                if chordal(pts[i], pts[j]) < 1e-12:
                    raise DegeneracyError(
                        f"points {pts[i]!r} and {pts[j]!r} coincide"
                    )
        if not _cyclically_increasing(pts):
            raise OrderingError(f"points {pts!r} are not in cyclic order")


def _cyclically_increasing(pts) -> bool:
    # Counterclockwise on the boundary of the upper half-plane = increasing
    # along the real line, wrapping through the point at infinity.
    pts = list(pts)
    if any(math.isinf(p) for p in pts):
        k = next(i for i, p in enumerate(pts) if math.isinf(p))
        rotated = pts[k + 1 :] + pts[:k]
        return all(rotated[i] < rotated[i + 1] for i in range(len(rotated) - 1))
    k = min(range(5), key=lambda i: pts[i])
    rotated = pts[k:] + pts[:k]
    return all(rotated[i] < rotated[i + 1] for i in range(4))


@dataclass(frozen=True)
class MoebiusMap:
    """Real Moebius map z -> (a z + b) / (c z + d)."""

    a: float
    b: float
    c: float
    d: float

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def three_point(cls, z1: float, z2: float, z3: float) -> "MoebiusMap":
        """The map sending z1 -> 0, z2 -> 1, z3 -> infinity."""
        if math.isinf(z1):
            return cls(0.0, z2 - z3, 1.0, -z3)
        if math.isinf(z2):
            return cls(1.0, -z1, 1.0, -z3)
        if math.isinf(z3):
            return cls(1.0, -z1, 0.0, z2 - z1)
        return cls(z2 - z3, -z1 * (z2 - z3), z2 - z1, -z3 * (z2 - z1))

    def __call__(self, z):
        if isinstance(z, (int, float)) and math.isinf(z):
            return self.a / self.c if self.c != 0.0 else INF
        den = self.c * z + self.d
        if isinstance(z, (int, float)) and den == 0.0:
            return INF
        return (self.a * z + self.b) / den

    def is_identity(self, tol: float = 0.0) -> bool:
        scale = max(abs(self.a), abs(self.d))
        return (
            abs(self.b) <= tol * scale
            and abs(self.c) <= tol * scale
            and abs(self.a - self.d) <= tol * scale
        )


def normalize_pentagon(q: BoundaryQuintuple) -> tuple[Pentagon, MoebiusMap]:
    """Send a marked quintuple to the normal form (0, p2, 1, p4, inf).

    Returns the pentagon together with the Moebius map realizing the
    normalization (first mark to 0, third to 1, fifth to infinity).
    """
    q1, q2, q3, q4, q5 = q.points
    t = MoebiusMap.three_point(q1, q3, q5)
    return Pentagon(t(q2), t(q4)), t


@dataclass(frozen=True)
class QuadraticDifferential:
    """The boundary-real differential with simple poles at the five marks.

    Coded by a pentagon and a direction; the derived zero is z0 = -cot(phi).
    The configuration is degenerate (rectangular) exactly when the zero falls
    within ``MERGE_TOL`` chordal distance of one of the marks.
    """

    pentagon: Pentagon
    direction: Direction

    @property
    def zero(self) -> float:
        return qd_zero(self.direction)

    @property
    def poles(self) -> tuple[float, float, float, float, float]:
        return self.pentagon.marks

    @property
    def merged_mark(self) -> str | None:
        z0 = self.zero
        for name, mark in zip(MARK_NAMES, self.poles):
            if chordal(z0, mark) < MERGE_TOL:
                return name
        return None

    @property
    def degenerate(self) -> bool:
        return self.merged_mark is not None

    def factors(self) -> tuple[float, tuple[tuple[float, int], ...]]:
        """Exact factorization const * prod (x - r)^e of the differential.

        In degenerate configurations the zero is snapped onto the merged mark
        and the cancelling pole is dropped, so the factor list is free of
        near-cancellations.  The pole at infinity is implicit.
        """
        p = self.pentagon
        merged = self.merged_mark
        finite_poles = dict(zip(MARK_NAMES[:4], (0.0, p.p2, 1.0, p.p4)))
        if merged == "inf" or self.direction.sin == 0.0:
            const = self.direction.cos
            fac = tuple((r, -1) for r in finite_poles.values())
        elif merged is not None:
            const = self.direction.sin
            fac = tuple(
                (r, -1) for name, r in finite_poles.items() if name != merged
            )
        else:
            const = self.direction.sin
            fac = ((self.zero, 1),) + tuple(
                (r, -1) for r in finite_poles.values()
            )
        return const, fac

    def sign_at(self, x: float) -> int:
        """Sign of the (snapped) differential at a regular boundary point."""
        const, fac = self.factors()
        s = 1 if const > 0 else -1
        for r, _ in fac:
            if x == r:
                raise PoleError(f"x={x!r} is a singular point")
            if x < r:
                s = -s
        return s


def qd_eval(qd: QuadraticDifferential, z: complex) -> complex:
    """Value (cos phi + z sin phi) / (z (z-p2)(z-1)(z-p4)) of the differential."""
    p = qd.pentagon
    z = complex(z)
    for pole in (0.0, p.p2, 1.0, p.p4):
        if z == pole:
            raise PoleError(f"evaluation at the pole z={pole!r}")
    num = qd.direction.cos + z * qd.direction.sin
    den = z * (z - p.p2) * (z - 1.0) * (z - p.p4)
    return num / den


KIND_POLE = "pole"
KIND_ZERO = "zero"
KIND_FLAT = "flat"

# Direction multiplier of the boundary image when crossing a singular point.
TURN_FACTOR = {KIND_POLE: 1j, KIND_ZERO: -1j, KIND_FLAT: 1.0}
TURN_QUARTER = {KIND_POLE: 1, KIND_ZERO: -1, KIND_FLAT: 0}


@dataclass(frozen=True)
class Arc:
    """One boundary arc between consecutive singular points.

    ``lo``/``hi`` are the traversal endpoints in counterclockwise order;
    an arc ending at the point at infinity is stored as (lo, +inf), an arc
    starting there as (-inf, hi).
    """

    lo: float
    hi: float
    axis: str
    lo_kind: str
    hi_kind: str

    @property
    def infinite(self) -> bool:
        return math.isinf(self.lo) or math.isinf(self.hi)

    def representative(self) -> float:
        """A point strictly inside the arc."""
        if math.isinf(self.hi):
            return self.lo + max(1.0, abs(self.lo))
        if math.isinf(self.lo):
            return self.hi - max(1.0, abs(self.hi))
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float) -> bool:
        if math.isinf(x):
            return False
        return self.lo < x < self.hi


def boundary_arcs(qd: QuadraticDifferential) -> tuple[Arc, ...]:
    """Partition of the boundary circle by the marks and the zero.

    Returns the arcs in counterclockwise order starting at the mark 0,
    each flagged H where the differential is positive and V where negative.
    Six arcs in the generic configuration, five in the rectangular one.
    """
    p = qd.pentagon
    merged = qd.merged_mark
    points = [
        (m, KIND_FLAT if MARK_NAMES[i] == merged else KIND_POLE)
        for i, m in enumerate(p.marks)
    ]
    if merged is None:
        points.append((qd.zero, KIND_ZERO))

    finite_pos = sorted(pt for pt in points if 0.0 < pt[0] < INF)
    finite_neg = sorted(pt for pt in points if pt[0] < 0.0)
    at_inf = next(pt for pt in points if math.isinf(pt[0]))
    ordered = [(0.0, points[0][1])] + finite_pos + [at_inf] + finite_neg

    arcs = []
    n = len(ordered)
    for i in range(n):
        (a, ka), (b, kb) = ordered[i], ordered[(i + 1) % n]
        if math.isinf(b):
            lo, hi = a, INF
        elif math.isinf(a):
            lo, hi = -INF, b
        else:
            lo, hi = a, b
        arc_rep = Arc(lo, hi, HORIZONTAL, ka, kb).representative()
        axis = HORIZONTAL if qd.sign_at(arc_rep) > 0 else VERTICAL
        arcs.append(Arc(lo, hi, axis, ka, kb))
    return tuple(arcs)


@dataclass(frozen=True)
class HexagonClass:
    """Axis-parallel hexagon (or rectangle with a flat mark) up to z -> az+b.

    ``segments[i]`` is the i-th side length, counterclockwise starting at the
    image of the mark 0.  ``turns[i]`` is the quarter-turn (+1, -1 or 0) at
    corner i, the corner shared by segments i and i+1; the mark 0 therefore
    sits at corner n-1.  ``labels`` holds the corner index of each mark, in
    the order 0, p2, 1, p4, inf.  A class representative is scale-normalized
    so that the largest segment has length 1.
    """

    segments: tuple[float, ...]
    turns: tuple[int, ...]
    first_axis: str
    labels: tuple[int, int, int, int, int]

    def __post_init__(self):
        segments = tuple(float(s) for s in self.segments)
        turns = tuple(int(t) for t in self.turns)
        labels = tuple(int(i) for i in self.labels)
        object.__setattr__(self, "segments", segments)
        object.__setattr__(self, "turns", turns)
        object.__setattr__(self, "labels", labels)
        n = len(segments)
        if n not in (5, 6) or len(turns) != n:
            raise ShapeError(f"expected 5 or 6 sides, got {n} / {len(turns)}")
        if self.first_axis not in (HORIZONTAL, VERTICAL):
            raise ShapeError(f"first_axis must be H or V, got {self.first_axis!r}")
        if any(s < 0.0 or not math.isfinite(s) for s in segments):
            raise ShapeError("segment lengths must be finite and nonnegative")
        if any(t not in (-1, 0, 1) for t in turns):
            raise ShapeError("turns must be quarter turns -1, 0 or +1")
        counts = {t: turns.count(t) for t in (-1, 0, 1)}
        if n == 6 and (counts[1], counts[-1], counts[0]) != (5, 1, 0):
            raise ShapeError(f"hexagon turn pattern {turns!r} is not realizable")
        if n == 5 and (counts[1], counts[-1], counts[0]) != (4, 0, 1):
            raise ShapeError(f"rectangular turn pattern {turns!r} is not realizable")
        if len(labels) != 5 or sorted(labels) != sorted(set(labels)):
            raise ShapeError("labels must be five distinct corner indices")
        if any(not 0 <= i < n for i in labels):
            raise ShapeError("label index out of range")
        if n == 6:
            unlabeled = set(range(6)) - set(labels)
            if turns[unlabeled.pop()] != -1:
                raise ShapeError("the unlabeled corner must be the re-entrant one")
        else:
            if turns[labels[MARK_NAMES.index(self.flat_mark())]] != 0:
                raise ShapeError("the flat corner must carry a marked point")
        if labels[0] != n - 1:
            # Segment 0 starts at the image of the mark 0 by definition, so
            # that mark is the corner closing the walk.
            raise ShapeError("the mark 0 must sit at the last corner")
        order = sorted(range(5), key=lambda k: labels[k])
        start = order.index(0)
        if [order[(start + j) % 5] for j in range(5)] != [0, 1, 2, 3, 4]:
            raise ShapeError("marks are not in counterclockwise cyclic order")

    @property
    def n(self) -> int:
        return len(self.segments)

    @property
    def degenerate(self) -> bool:
        return self.n == 5

    def label_of(self, mark: str) -> int:
        return self.labels[MARK_NAMES.index(mark)]

    def reentrant_corner(self) -> int | None:
        return self.turns.index(-1) if -1 in self.turns else None

    def flat_corner(self) -> int | None:
        return self.turns.index(0) if 0 in self.turns else None

    def flat_mark(self) -> str:
        flat = self.turns.index(0)
        for name, idx in zip(MARK_NAMES, self.labels):
            if idx == flat:
                return name
        raise ShapeError("no marked point at the flat corner")

    def axes(self) -> tuple[str, ...]:
        ax = [self.first_axis]
        for t in self.turns[:-1]:
            prev = ax[-1]
            if t == 0:
                ax.append(prev)
            else:
                ax.append(VERTICAL if prev == HORIZONTAL else HORIZONTAL)
        return tuple(ax)

    def vertices(self) -> tuple[complex, ...]:
        """Vertex i is the start of segment i; vertex 0 is the image of mark 0."""
        d = 1.0 + 0.0j if self.first_axis == HORIZONTAL else 1.0j
        v = 0.0 + 0.0j
        out = []
        rot = {1: 1j, -1: -1j, 0: 1.0}
        for s, t in zip(self.segments, self.turns):
            out.append(v)
            v = v + s * d
            d = d * rot[t]
        return tuple(out)

    def closure_defects(self) -> tuple[float, float]:
        """Signed horizontal and vertical gaps of the polygon walk."""
        d = 1.0 + 0.0j if self.first_axis == HORIZONTAL else 1.0j
        v = 0.0 + 0.0j
        rot = {1: 1j, -1: -1j, 0: 1.0}
        for s, t in zip(self.segments, self.turns):
            v = v + s * d
            d = d * rot[t]
        return v.real, v.imag

    def normalized(self) -> "HexagonClass":
        m = max(self.segments)
        if m <= 0.0:
            raise ShapeError("cannot normalize an all-zero hexagon")
        if m == 1.0:
            return self
        return HexagonClass(
            tuple(s / m for s in self.segments),
            self.turns,
            self.first_axis,
            self.labels,
        )

    def to_json_dict(self) -> dict:
        turn_char = {1: "+", -1: "-", 0: "0"}
        return {
            "segments": list(self.segments),
            "turns": [turn_char[t] for t in self.turns],
            "first_axis": self.first_axis,
            "labels": {name: self.labels[i] for i, name in enumerate(MARK_NAMES)},
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "HexagonClass":
        turn_val = {"+": 1, "-": -1, "0": 0}
        return cls(
            tuple(data["segments"]),
            tuple(turn_val[t] for t in data["turns"]),
            data["first_axis"],
            tuple(data["labels"][name] for name in MARK_NAMES),
        )


@dataclass(frozen=True)
class TeichParam:
    """Stretch factor and direction parametrizing a Teichmueller map."""

    K: float
    phi: Direction

    def __post_init__(self):
        if not self.K >= 1.0:
            raise RangeError(f"stretch factor must satisfy K >= 1, got {self.K!r}")


@dataclass(frozen=True)
class ExtremalResult:
    """Solution of the extremal-map problem between two pentagons.

    ``distance`` is (1/2) log K; ``residual`` is the parameter mismatch norm
    at the solution.  ``phi_unique`` is False when the two pentagons agree,
    where every direction realizes the identity.
    """

    K: float
    phi: Direction
    distance: float
    residual: float
    phi_unique: bool = True

    def __post_init__(self):
        if not self.K >= 1.0:
            raise RangeError(f"extremal dilatation must satisfy K >= 1, got {self.K!r}")
        if self.residual < 0.0:
            raise RangeError("residual must be nonnegative")
        if abs(self.distance - 0.5 * math.log(self.K)) > 1e-12 * max(1.0, self.distance):
            raise RangeError("distance must equal (1/2) log K")


def hexagon_equal(h1: HexagonClass, h2: HexagonClass, tol: float) -> bool:
    """Equality of classes: same combinatorics, segments within tol.

    Rotation by pi (negative scale factor) leaves all the stored data
    unchanged, so comparing normalized representatives directly suffices.
    """
    if (
        h1.n != h2.n
        or h1.turns != h2.turns
        or h1.first_axis != h2.first_axis
        or h1.labels != h2.labels
    ):
        return False
    a, b = h1.normalized(), h2.normalized()
    return max(abs(x - y) for x, y in zip(a.segments, b.segments)) <= tol
