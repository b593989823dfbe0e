import math

import numpy as np
import pytest

from conftest import sample_config
from teichpent.core import Direction, HexagonClass, Pentagon, ShapeError
from teichpent.inverse import (
    initial_guess,
    pentagon_from_hexagon,
    residual_function,
    shape_ratios,
    solver_coords,
)
from teichpent.scmap import hexagon_rep


class TestRoundTrip:
    def test_reference_configuration(self):
        h = hexagon_rep(Pentagon(0.5, 2.0), Direction(math.pi / 4))
        p, d, res = pentagon_from_hexagon(h)
        assert p.p2 == pytest.approx(0.5, abs=1e-6)
        assert p.p4 == pytest.approx(2.0, abs=1e-6)
        assert d.phi == pytest.approx(math.pi / 4, abs=1e-6)
        assert res < 1e-9

    def test_rectangular_branch(self):
        h = hexagon_rep(Pentagon(0.5, 2.0), Direction(0.0))
        p, d, res = pentagon_from_hexagon(h)
        assert p.p2 == pytest.approx(0.5, abs=1e-6)
        assert p.p4 == pytest.approx(2.0, abs=1e-6)
        assert d.phi == pytest.approx(0.0, abs=1e-6)

    def test_mirror_symmetric_data_gives_reciprocal_marks(self):
        # Paired side lengths force the solution onto the symmetric locus.
        h = hexagon_rep(Pentagon(0.35, 1.0 / 0.35), Direction(math.pi / 4))
        p, d, _ = pentagon_from_hexagon(h)
        assert p.p4 == pytest.approx(1.0 / p.p2, abs=1e-6)

    def test_random_round_trips(self, rng):
        for _ in range(15):
            p, d = sample_config(rng)
            ps, ds, _ = pentagon_from_hexagon(hexagon_rep(p, d))
            assert ps.p2 == pytest.approx(p.p2, abs=1e-6)
            assert ps.p4 == pytest.approx(p.p4, abs=1e-6)
            assert ds.phi == pytest.approx(d.phi, abs=1e-6)

    def test_insensitive_to_init(self, rng):
        p, d = Pentagon(0.62, 3.1), Direction(2.4)
        h = hexagon_rep(p, d)
        p1, d1, _ = pentagon_from_hexagon(h)
        p2_, d2, _ = pentagon_from_hexagon(h, init=(Pentagon(0.2, 1.2), d))
        assert p1.p2 == pytest.approx(p2_.p2, abs=1e-8)
        assert p1.p4 == pytest.approx(p2_.p4, abs=1e-8)
        assert d1.phi == pytest.approx(d2.phi, abs=1e-8)


class TestResidualFunction:
    def test_zero_at_preimage(self):
        p, d = Pentagon(0.5, 2.0), Direction(math.pi / 4)
        h = hexagon_rep(p, d)
        r = residual_function(solver_coords(p, d), h)
        assert np.linalg.norm(r) < 1e-12

    def test_invariant_under_target_rescale(self):
        p, d = Pentagon(0.4, 2.6), Direction(1.3)
        h = hexagon_rep(p, d)
        scaled = HexagonClass(
            tuple(0.37 * s for s in h.segments), h.turns, h.first_axis, h.labels
        )
        x = solver_coords(Pentagon(0.5, 2.0), Direction(1.3))
        r1 = residual_function(x, h)
        r2 = residual_function(x, scaled)
        assert r1 == pytest.approx(r2, abs=1e-14)

    def test_jacobian_richardson(self):
        # Finite-difference Jacobian at step h agrees with the step-h/2
        # stencil to first order in h.
        p, d = Pentagon(0.45, 2.2), Direction(0.8)
        h = hexagon_rep(Pentagon(0.5, 2.3), Direction(0.85))
        x0 = solver_coords(p, d)

        def jac(step):
            r0 = residual_function(x0, h)
            cols = []
            for j in range(3):
                xp = x0.copy()
                xp[j] += step
                cols.append((residual_function(xp, h) - r0) / step)
            return np.array(cols).T

        j1 = jac(1e-6)
        j2 = jac(5e-7)
        assert np.max(np.abs(j1 - j2)) < 1e-3 * max(1.0, np.max(np.abs(j1)))


class TestShapeRatios:
    def test_l_dimension_reading(self):
        # L-shape with a=1, b=1, A=2, B=1 gives ratios (1/2, 1, 1/2).
        h = HexagonClass(
            (2.0, 1.0, 1.0, 1.0, 1.0, 2.0),
            (1, 1, -1, 1, 1, 1),
            "H",
            (5, 0, 1, 3, 4),
        )
        assert shape_ratios(h) == pytest.approx([0.5, 1.0, 0.5])

    def test_rect_ratios(self):
        h = hexagon_rep(Pentagon(0.5, 2.0), Direction(0.0))
        r = shape_ratios(h)
        assert np.all(r > 0.0)
        assert r[1] + r[2] == pytest.approx(1.0, abs=1e-10)


class TestShapeErrors:
    def test_unrealizable_labels(self):
        # Label patterns the forward map never produces (the mark 0 not at
        # the walk-closing corner, marks out of cyclic order) are rejected
        # at construction rather than handed to the solver.
        h = hexagon_rep(Pentagon(0.5, 2.0), Direction(math.pi / 4))
        with pytest.raises(ShapeError):
            HexagonClass(
                h.segments,
                (1, 1, 1, -1, 1, 1),
                h.first_axis,
                tuple((i + 4) % 6 for i in h.labels),
            )
        with pytest.raises(ShapeError):
            HexagonClass(
                h.segments,
                h.turns,
                h.first_axis,
                (h.labels[0], h.labels[2], h.labels[1], h.labels[3], h.labels[4]),
            )

    def test_every_constructible_type_has_a_chamber(self):
        # Conversely, all generic types the constructor admits are realized
        # by some chamber, so the initial guess always lands.
        for reentrant in range(5):
            corners = [c for c in range(6) if c != reentrant]
            # cyclic corner list for the marks, starting so mark 0 gets 5
            labels = tuple(corners[(corners.index(5) + k) % 5] for k in range(5))
            turns = tuple(-1 if c == reentrant else 1 for c in range(6))
            for axis in ("H", "V"):
                segs = hexagon_rep(Pentagon(0.5, 2.0), Direction(math.pi / 4)).segments
                try:
                    h = HexagonClass(segs, turns, axis, labels)
                except ShapeError:
                    continue
                p0, d0 = initial_guess(h)
                from teichpent.inverse import combinatorial_type

                assert combinatorial_type(p0, d0) == (labels, turns, axis)

    def test_overlarge_closure_defect_rejected(self):
        h = hexagon_rep(Pentagon(0.5, 2.0), Direction(math.pi / 4))
        broken = HexagonClass(
            tuple(s * (1.0 + 0.001 * i) for i, s in enumerate(h.segments)),
            h.turns,
            h.first_axis,
            h.labels,
        )
        with pytest.raises(ShapeError):
            pentagon_from_hexagon(broken)
