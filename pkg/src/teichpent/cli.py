"""Command-line front end: JSON/CSV/SVG emission for batch computation.

Subcommands: hexagon (forward map), extremal (dilatation between two
pentagons), geodesic (ray samples), atlas (shape ratios over a parameter
grid), map (point mapping under the extremal map), selftest (oracle and
invariant checks).  All numeric output uses shortest round-trip decimals,
so identical inputs give byte-identical files.  Exit codes: 0 success,
2 argument or range errors, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

from .core import (
    Direction,
    HexagonClass,
    Pentagon,
    RangeError,
    TeichpentError,
    TeichParam,
)
from .quadrature import DEFAULT_SPEC, QuadratureSpec


def _fmt(x: float) -> str:
    return repr(float(x))


def _spec_from_env(tol: float | None = None) -> QuadratureSpec:
    if tol is None:
        env = os.environ.get("TEICHPENT_TOL")
        if env:
            tol = float(env)
    if tol is None:
        return DEFAULT_SPEC
    return QuadratureSpec(rel_tol=tol, abs_tol=min(tol * 1e-4, 1e-14))


def _parse_pentagon(text: str) -> Pentagon:
    parts = text.split(",")
    if len(parts) != 2:
        raise RangeError(f"expected 'p2,p4', got {text!r}")
    return Pentagon(float(parts[0]), float(parts[1]))


def _hexagon_svg(h: HexagonClass, qd_degenerate: bool) -> str:
    vs = list(h.vertices())
    xs = [v.real for v in vs]
    ys = [v.imag for v in vs]
    height = max(ys) - min(ys)
    margin = 0.08 * max(height, max(xs) - min(xs))
    x0, y0 = min(xs) - margin, min(ys) - margin
    w = (max(xs) - min(xs)) + 2 * margin
    ht = height + 2 * margin

    def sx(v):
        return (v.real - x0) / ht

    def sy(v):
        # Flip so the mathematical y axis points up in the drawing.
        return (ht - (v.imag - y0)) / ht

    pts = " ".join(f"{sx(v):.6f},{sy(v):.6f}" for v in vs)
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w / ht:.6f} 1">',
        f'<polygon points="{pts}" fill="none" stroke="black" stroke-width="0.004"/>',
    ]
    n = h.n
    mark_names = ("0", "p2", "1", "p4", "inf")
    for name, corner in zip(mark_names, h.labels):
        v = vs[(corner + 1) % n]
        lines.append(
            f'<circle cx="{sx(v):.6f}" cy="{sy(v):.6f}" r="0.008" fill="black"/>'
        )
        lines.append(
            f'<text x="{sx(v) + 0.012:.6f}" y="{sy(v) - 0.012:.6f}" '
            f'font-size="0.04">{name}</text>'
        )
    if not qd_degenerate:
        r = h.reentrant_corner()
        v = vs[(r + 1) % n]
        lines.append(
            f'<text x="{sx(v) + 0.012:.6f}" y="{sy(v) + 0.03:.6f}" '
            f'font-size="0.04">z0</text>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _hexagon_json(h: HexagonClass, degenerate: bool, residual: float) -> str:
    from .scmap import closure_residual

    data = h.to_json_dict()
    data["degenerate"] = degenerate
    data["closure_residual"] = residual
    return json.dumps(data)


def cmd_hexagon(args) -> int:
    from .scmap import closure_residual, hexagon_rep

    spec = _spec_from_env(args.tol)
    p = Pentagon(args.p2, args.p4)
    d = Direction(args.phi)
    h = hexagon_rep(p, d, spec)
    text = _hexagon_json(h, h.degenerate, closure_residual(h))
    print(text)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(text + "\n")
    if args.svg:
        with open(args.svg, "w") as fh:
            fh.write(_hexagon_svg(h, h.degenerate))
    return 0


def cmd_extremal(args) -> int:
    from .teich import extremal_map

    spec = _spec_from_env(None)
    p = _parse_pentagon(args.p)
    q = _parse_pentagon(args.q)
    res = extremal_map(p, q, spec)
    print(f"K = {_fmt(res.K)}")
    print(f"phi = {_fmt(res.phi.phi)}" + ("" if res.phi_unique else "  (arbitrary)"))
    print(f"distance = {_fmt(res.distance)}")
    print(f"residual = {_fmt(res.residual)}")
    if args.json:
        data = {
            "K": res.K,
            "phi": res.phi.phi,
            "distance": res.distance,
            "residual": res.residual,
            "phi_unique": res.phi_unique,
        }
        with open(args.json, "w") as fh:
            fh.write(json.dumps(data) + "\n")
    return 0 if res.residual <= 1e-6 else 3


def _write_csv(path: str, header: list[str], rows) -> None:
    try:
        with open(path, "w") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
    except BaseException:
        if os.path.exists(path):
            os.remove(path)
        raise


def cmd_geodesic(args) -> int:
    from .teich import geodesic_ray

    spec = _spec_from_env(None)
    p = _parse_pentagon(args.p)
    samples = geodesic_ray(p, Direction(args.phi), args.kmax, args.steps, spec)
    rows = [(K, pent.p2, pent.p4, 0.5 * math.log(K)) for K, pent in samples]
    if args.csv:
        _write_csv(args.csv, ["K", "p2", "p4", "distance"], rows)
    for row in rows:
        print(",".join(_fmt(v) for v in row))
    return 0


def cmd_atlas(args) -> int:
    from .inverse import shape_ratios
    from .scmap import closure_residual, hexagon_rep

    spec = _spec_from_env(None)
    try:
        n2, n4, nphi = (int(v) for v in args.grid.split(","))
    except ValueError:
        raise RangeError(f"expected 'n2,n4,nphi', got {args.grid!r}")
    if min(n2, n4, nphi) < 1:
        raise RangeError("grid sizes must be positive")
    rows = []
    for i in range(n2):
        p2 = (i + 1.0) / (n2 + 1.0)
        for j in range(n4):
            p4 = 1.0 / (1.0 - (j + 1.0) / (n4 + 1.0))
            for k in range(nphi):
                phi = 2.0 * math.pi * (k + 0.5) / nphi
                h = hexagon_rep(Pentagon(p2, p4), Direction(phi), spec)
                r = shape_ratios(h)
                rows.append(
                    (p2, p4, phi, r[0], r[1], r[2], closure_residual(h), float(h.degenerate))
                )
    header = [
        "p2", "p4", "phi", "ratio1", "ratio2", "ratio3", "closure_residual", "degenerate",
    ]
    if args.csv:
        _write_csv(args.csv, header, rows)
    else:
        print(",".join(header))
        for row in rows:
            print(",".join(_fmt(v) for v in row))
    return 0


def cmd_map(args) -> int:
    from .teich import apply_extremal_map

    spec = _spec_from_env(None)
    p = _parse_pentagon(args.p)
    q = _parse_pentagon(args.q)
    points = []
    with open(args.points) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            re_str, im_str = line.split()
            points.append(complex(float(re_str), float(im_str)))
    for z in points:
        w = apply_extremal_map(p, q, z, spec)
        print(f"{_fmt(w.real)} {_fmt(w.imag)}")
    return 0


def _selftest_checks(fast: bool):
    import numpy as np

    from .core import hexagon_equal
    from .inverse import pentagon_from_hexagon
    from .oracles import elliptic_K, quad_modulus_oracle
    from .quadrature import integrate_endpoint_singular
    from .scmap import closure_residual, hexagon_rep
    from .teich import extremal_map, stretch, teich_point

    spec = _spec_from_env(None)

    def check_closure():
        worst = 0.0
        n = 2 if fast else 4
        for i in range(n):
            for j in range(n):
                for k in range(4):
                    p = Pentagon((i + 1.0) / (n + 1.0), 1.0 + (j + 1.0))
                    d = Direction(2.0 * math.pi * (k + 0.35) / 4.0)
                    worst = max(worst, closure_residual(hexagon_rep(p, d, spec)))
        return worst < 1e-8, f"worst residual {worst:.2e}"

    def check_roundtrip():
        rng = np.random.default_rng(11)
        worst = 0.0
        for _ in range(2 if fast else 6):
            p = Pentagon(rng.uniform(0.2, 0.8), rng.uniform(1.3, 4.0))
            d = Direction(rng.uniform(0.3, 1.2))
            ps, ds, _ = pentagon_from_hexagon(hexagon_rep(p, d, spec), spec=spec)
            worst = max(
                worst, abs(ps.p2 - p.p2), abs(ps.p4 - p.p4), abs(ds.phi - d.phi)
            )
        return worst < 1e-6, f"worst coordinate error {worst:.2e}"

    def check_elliptic():
        worst = 0.0
        for k in (0.3, 0.6):
            def f(x, k=k):
                return 1.0 / np.sqrt(np.abs((1.0 - x * x) * (1.0 - k * k * x * x)))

            v, _ = integrate_endpoint_singular(f, 0.0, 1.0, spec)
            worst = max(worst, abs(v - elliptic_K(k)))
        return worst < 1e-11, f"worst deviation {worst:.2e}"

    def check_quadrilateral():
        rep = quad_modulus_oracle(0.5)
        return abs(rep.value - 1.0) < 1e-9, f"modulus(1/2) = {rep.value!r}"

    def check_stretch_composition():
        h = hexagon_rep(Pentagon(0.4, 2.5), Direction(0.9), spec)
        lhs = stretch(stretch(h, 1.7), 2.2)
        rhs = stretch(h, 1.7 * 2.2)
        return hexagon_equal(lhs, rhs, 1e-12), "stretch(K1) o stretch(K2)"

    def check_identity_law():
        p = Pentagon(0.45, 1.9)
        q = teich_point(p, TeichParam(1.0, Direction(0.8)), spec)
        err = max(abs(q.p2 - p.p2), abs(q.p4 - p.p4))
        return err < 1e-8, f"K=1 error {err:.2e}"

    checks = [
        ("closure", check_closure),
        ("round-trip", check_roundtrip),
        ("elliptic-oracle", check_elliptic),
        ("quadrilateral-modulus", check_quadrilateral),
        ("stretch-composition", check_stretch_composition),
        ("identity-law", check_identity_law),
    ]
    if not fast:

        def check_extremal_recovery():
            p = Pentagon(0.5, 2.0)
            q = teich_point(p, TeichParam(2.0, Direction(1.0)), spec)
            res = extremal_map(p, q, spec)
            err = abs(res.K - 2.0) + abs(res.phi.phi - 1.0)
            return err < 1e-5, f"(K, phi) error {err:.2e}"

        checks.append(("extremal-recovery", check_extremal_recovery))
    return checks


def cmd_selftest(args) -> int:
    checks = _selftest_checks(args.fast)
    failures = 0
    width = max(len(name) for name, _ in checks)
    for name, fn in checks:
        start = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # surface the failure, keep the table going
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        status = "PASS" if ok else "FAIL"
        if not ok:
            failures += 1
        print(f"{name:<{width}}  {status}  {detail}  ({time.perf_counter() - start:.1f}s)")
    return 0 if failures == 0 else 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teichpent",
        description="Extremal quasiconformal maps between pentagons",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ph = sub.add_parser("hexagon", help="hexagon class of a pentagon and direction")
    ph.add_argument("--p2", type=float, required=True)
    ph.add_argument("--p4", type=float, required=True)
    ph.add_argument("--phi", type=float, required=True)
    ph.add_argument("--svg", type=str, default=None)
    ph.add_argument("--json", type=str, default=None)
    ph.add_argument("--tol", type=float, default=None)
    ph.set_defaults(func=cmd_hexagon)

    pe = sub.add_parser("extremal", help="extremal dilatation between two pentagons")
    pe.add_argument("--p", type=str, required=True, help="p2,p4")
    pe.add_argument("--q", type=str, required=True, help="p2,p4")
    pe.add_argument("--json", type=str, default=None)
    pe.set_defaults(func=cmd_extremal)

    pg = sub.add_parser("geodesic", help="samples along a geodesic ray")
    pg.add_argument("--p", type=str, required=True, help="p2,p4")
    pg.add_argument("--phi", type=float, required=True)
    pg.add_argument("--kmax", type=float, required=True)
    pg.add_argument("--steps", type=int, required=True)
    pg.add_argument("--csv", type=str, default=None)
    pg.set_defaults(func=cmd_geodesic)

    pa = sub.add_parser("atlas", help="hexagon shape ratios over a parameter grid")
    pa.add_argument("--grid", type=str, required=True, help="n2,n4,nphi")
    pa.add_argument("--csv", type=str, default=None)
    pa.set_defaults(func=cmd_atlas)

    pm = sub.add_parser("map", help="map points under the extremal map")
    pm.add_argument("--p", type=str, required=True, help="p2,p4")
    pm.add_argument("--q", type=str, required=True, help="p2,p4")
    pm.add_argument("--points", type=str, required=True, help="file of 're im' lines")
    pm.set_defaults(func=cmd_map)

    ps = sub.add_parser("selftest", help="run oracle and invariant checks")
    ps.add_argument("--fast", action="store_true")
    ps.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (RangeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TeichpentError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
