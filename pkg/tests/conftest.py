import math

import numpy as np
import pytest

from teichpent.core import Direction, Pentagon, QuadraticDifferential, qd_zero


def degenerate_phis(p2: float, p4: float) -> list[float]:
    """All phi in [0, 2pi) where the zero collides with one of the marks."""
    out = [0.0, math.pi]
    for m in (0.0, p2, 1.0, p4):
        base = math.atan2(1.0, -m)  # sin > 0 branch of cot(phi) = -m
        out.extend([base % (2 * math.pi), (base + math.pi) % (2 * math.pi)])
    return out


def sample_config(rng: np.random.Generator, margin: float = 1e-2):
    """Random (Pentagon, Direction) at least `margin` from degeneracies."""
    while True:
        p2 = rng.uniform(0.08, 0.92)
        p4 = rng.uniform(1.1, 8.0)
        phi = rng.uniform(0.0, 2 * math.pi)
        if min(abs(phi - d) for d in degenerate_phis(p2, p4)) < margin:
            continue
        if abs(phi - 2 * math.pi) < margin:
            continue
        pent = Pentagon(p2, p4)
        qd = QuadraticDifferential(pent, Direction(phi))
        if qd.degenerate:
            continue
        return pent, Direction(phi)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
