import math

import numpy as np
import pytest

from conftest import sample_config
from teichpent.core import (
    Direction,
    HexagonClass,
    Pentagon,
    RangeError,
    TeichParam,
    hexagon_equal,
)
from teichpent.scmap import hexagon_rep
from teichpent.teich import (
    _dilatation_from_widths,
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

L_SHAPE = HexagonClass(
    (2.0, 1.0, 1.0, 1.0, 1.0, 2.0), (1, 1, -1, 1, 1, 1), "H", (5, 0, 1, 3, 4)
)


class TestStretch:
    def test_identity(self):
        h = hexagon_rep(Pentagon(0.4, 2.2), Direction(1.0))
        assert hexagon_equal(stretch(h, 1.0), h, 0.0)

    def test_composition(self):
        h = hexagon_rep(Pentagon(0.3, 1.7), Direction(2.1))
        lhs = stretch(stretch(h, 1.6), 2.5)
        rhs = stretch(h, 1.6 * 2.5)
        assert hexagon_equal(lhs, rhs, 1e-13)

    def test_l_dimensions_scale(self):
        # L with (a, b, A, B) = (1, 1, 2, 1): horizontal stretch by 3 gives
        # (3, 1, 6, 1) before normalization.
        from teichpent.inverse import l_dimensions

        stretched = stretch(L_SHAPE, 3.0)
        a, b, A, B = l_dimensions(stretched)
        scale = 6.0 / A  # normalization factor
        assert (a * scale, b * scale, A * scale, B * scale) == pytest.approx(
            (3.0, 1.0, 6.0, 1.0)
        )

    def test_rejects_nonpositive(self):
        with pytest.raises(RangeError):
            stretch(L_SHAPE, 0.0)

    def test_degenerate_class(self):
        h = hexagon_rep(Pentagon(0.5, 2.0), Direction(0.0))
        s = stretch(h, 2.0)
        assert s.n == 5
        from teichpent.scmap import closure_residual

        assert closure_residual(s) < 1e-12


class TestTeichPoint:
    def test_identity_law(self):
        p = Pentagon(0.5, 2.0)
        q = teich_point(p, TeichParam(1.0, Direction(1.1)))
        assert q.p2 == pytest.approx(p.p2, abs=1e-8)
        assert q.p4 == pytest.approx(p.p4, abs=1e-8)

    def test_identity_law_random(self, rng):
        for _ in range(5):
            p, d = sample_config(rng)
            q = teich_point(p, TeichParam(1.0, d))
            assert q.p2 == pytest.approx(p.p2, abs=1e-8)
            assert q.p4 == pytest.approx(p.p4, abs=1e-8)

    def test_frozen_reference_value(self):
        # Frozen from a run at rel_tol 1e-10; stable under rel_tol 1e-12.
        q = teich_point(Pentagon(0.5, 2.0), TeichParam(2.0, Direction(math.pi / 4)))
        assert q.p2 == pytest.approx(0.14051459690559, abs=1e-9)
        assert q.p4 == pytest.approx(1.0855625587820603, abs=1e-9)

    def test_geodesic_concatenation(self):
        p = Pentagon(0.5, 2.0)
        phi = Direction(1.0)
        q1, d1, _ = teich_point_full(p, TeichParam(1.5, phi))
        q2 = teich_point(q1, TeichParam(1.8, d1))
        direct = teich_point(p, TeichParam(1.5 * 1.8, phi))
        assert q2.p2 == pytest.approx(direct.p2, abs=1e-6)
        assert q2.p4 == pytest.approx(direct.p4, abs=1e-6)


class TestExtremalMap:
    def test_identity_pair(self):
        p = Pentagon(0.5, 2.0)
        res = extremal_map(p, p)
        assert res.K == 1.0
        assert res.distance == 0.0
        assert not res.phi_unique

    def test_recovers_forward_construction(self):
        p = Pentagon(0.5, 2.0)
        q = teich_point(p, TeichParam(2.0, Direction(1.0)))
        res = extremal_map(p, q)
        assert res.K == pytest.approx(2.0, abs=1e-5)
        assert res.phi.phi == pytest.approx(1.0, abs=1e-5)
        assert res.residual < 1e-6

    def test_bounded_by_sector_map(self, rng):
        for _ in range(4):
            p, _ = sample_config(rng)
            q, _ = sample_config(rng)
            res = extremal_map(p, q)
            assert res.K <= sector_map_dilatation(p, q) + 1e-9

    def test_relabel_invariance(self):
        # Cycle the five marks by one on both pentagons; the extremal
        # dilatation is a conformal invariant of the marked pair.
        def relabel(p):
            # (p2, 1, p4, inf, 0) -> send p2 to 0, p4 to 1, 0 to inf
            from teichpent.core import BoundaryQuintuple, normalize_pentagon

            q = BoundaryQuintuple((p.p2, 1.0, p.p4, math.inf, 0.0))
            return normalize_pentagon(q)[0]

        p, q = Pentagon(0.5, 2.0), Pentagon(0.35, 3.1)
        k1 = extremal_map(p, q).K
        k2 = extremal_map(relabel(p), relabel(q)).K
        assert k1 == pytest.approx(k2, abs=1e-6)


class TestDistance:
    def test_zero_on_diagonal(self):
        p = Pentagon(0.4, 1.7)
        assert teich_distance(p, p) == 0.0

    def test_symmetry(self):
        p, q = Pentagon(0.5, 2.0), Pentagon(0.3, 2.8)
        assert teich_distance(p, q) == pytest.approx(teich_distance(q, p), abs=1e-6)

    def test_triangle_inequality(self):
        p, q, r = Pentagon(0.5, 2.0), Pentagon(0.3, 2.8), Pentagon(0.65, 1.5)
        dpq = teich_distance(p, q)
        dqr = teich_distance(q, r)
        dpr = teich_distance(p, r)
        assert dpr <= dpq + dqr + 1e-6


class TestGeodesicRay:
    def test_trivial_ray(self):
        p = Pentagon(0.5, 2.0)
        samples = geodesic_ray(p, Direction(0.7), 1.0, 1)
        assert len(samples) == 1
        K, pent = samples[0]
        assert K == 1.0
        assert pent.p2 == pytest.approx(p.p2, abs=1e-8)

    def test_distance_along_ray(self):
        p = Pentagon(0.5, 2.0)
        samples = geodesic_ray(p, Direction(1.0), 2.0, 2)
        for j, (K, pent) in enumerate(samples, start=1):
            expected = (j / 2.0) * 0.5 * math.log(2.0)
            assert teich_distance(p, pent) == pytest.approx(expected, abs=1e-5)

    def test_concatenated_half_rays(self):
        p = Pentagon(0.5, 2.0)
        full = geodesic_ray(p, Direction(0.9), 4.0, 2)
        half = geodesic_ray(p, Direction(0.9), 2.0, 1)
        assert full[0][1].p2 == pytest.approx(half[0][1].p2, abs=1e-6)
        assert full[0][1].p4 == pytest.approx(half[0][1].p4, abs=1e-6)


class TestApplyExtremalMap:
    def test_identity_map(self):
        p = Pentagon(0.5, 2.0)
        for z in (1j, 0.5 + 0.5j, -1.0 + 2.0j, 3.0 + 0.1j):
            w = apply_extremal_map(p, p, z)
            assert abs(w - z) < 1e-8

    def test_marks_to_marks(self):
        p = Pentagon(0.5, 2.0)
        q = teich_point(p, TeichParam(2.0, Direction(1.0)))
        images = [apply_extremal_map(p, q, complex(m, 0.0)) for m in (0.0, 0.5, 1.0, 2.0)]
        expected = [0.0, q.p2, 1.0, q.p4]
        for w, e in zip(images, expected):
            assert w.imag == 0.0
            assert w.real == pytest.approx(e, abs=1e-12)
        w_inf = apply_extremal_map(p, q, complex(math.inf, 0.0))
        assert math.isinf(w_inf.real)

    def test_boundary_point_between_marks(self):
        p = Pentagon(0.5, 2.0)
        q = teich_point(p, TeichParam(1.5, Direction(0.7)))
        w = apply_extremal_map(p, q, complex(0.25, 0.0))
        assert w.imag == 0.0
        assert 0.0 < w.real < q.p2

    def test_constant_dilatation_spot(self):
        p = Pentagon(0.5, 2.0)
        q = teich_point(p, TeichParam(2.0, Direction(1.0)))
        h = 3e-4
        z0 = 0.3 + 0.8j
        Z = np.array(
            [[z0 + (i - 1) * h + 1j * (j - 1) * h for i in range(3)] for j in range(3)]
        )
        W = np.array([[apply_extremal_map(p, q, z) for z in row] for row in Z])
        D = dilatation_estimate(Z, W)
        assert D[1, 1] == pytest.approx(2.0, abs=1e-4)


class TestDilatationEstimate:
    def grid(self, f, n=9, h=0.05, z0=0.0):
        Z = np.array(
            [[z0 + i * h + 1j * j * h for i in range(n)] for j in range(n)]
        )
        W = np.vectorize(f)(Z)
        return Z, W

    def test_conformal_map_gives_one(self):
        Z, W = self.grid(lambda z: z)
        D = dilatation_estimate(Z, W)
        inner = D[1:-1, 1:-1]
        assert np.allclose(inner, 1.0, atol=1e-12)

    def test_affine_stretch_gives_K(self):
        K = 3.5
        Z, W = self.grid(lambda z: K * z.real + 1j * z.imag)
        D = dilatation_estimate(Z, W)
        assert np.allclose(D[1:-1, 1:-1], K, atol=1e-10)

    def test_sector_map_gives_angle_ratio(self):
        a = 1.8

        def f(z):
            rho, theta = abs(z), math.atan2(z.imag, z.real)
            return rho * complex(math.cos(a * theta), math.sin(a * theta))

        Z, W = self.grid(f, n=9, h=2e-4, z0=1.0 + 1.0j)
        D = dilatation_estimate(Z, W)
        assert np.allclose(D[1:-1, 1:-1], a, atol=1e-5)

    def test_orientation_loss_flagged(self):
        Z, W = self.grid(lambda z: z.conjugate())
        D = dilatation_estimate(Z, W)
        assert np.all(np.isnan(D[1:-1, 1:-1]))


class TestSectorMap:
    def test_identity(self):
        p = Pentagon(0.5, 2.0)
        assert sector_map_dilatation(p, p) == pytest.approx(1.0, abs=1e-12)

    def test_width_ratio_formula(self):
        w1 = [1.0, 1.0, 1.0, 1.0, 1.0]
        w2 = [2.0, 1.0, 1.0, 1.0, 1.0]
        # normalized widths: one arc doubles relative to total
        expected = max(
            (2.0 / 6.0) / (1.0 / 5.0),
            (1.0 / 5.0) / (1.0 / 6.0),
        )
        assert _dilatation_from_widths(w1, w2) == pytest.approx(expected)

    def test_pure_ratio_without_normalization(self):
        w1 = [1.0, 1.0, 1.0, 1.0, 1.0]
        w2 = [2.0, 1.0, 1.0, 1.0, 1.0]
        # with equal totals the formula reduces to max ratio = 2
        assert _dilatation_from_widths([w / 5 for w in w1], [w / 6 for w in w2]) == (
            pytest.approx(max(2.0 * 5 / 6, 6 / 5 / 1.0), rel=1e-12)
        )
