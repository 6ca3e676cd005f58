import math

import numpy as np
import pytest

from hopfeik import CartesianPoint, ToroidalPoint, to_cartesian


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_regular_points(rng, count, eta_range=(0.15, 3.0)):
    """Random points drawn in toroidal ranges, away from the axis and the circle."""
    etas = rng.uniform(*eta_range, size=count)
    xis = rng.uniform(0.0, 2.0 * math.pi, size=count)
    phis = rng.uniform(0.0, 2.0 * math.pi, size=count)
    return [
        to_cartesian(ToroidalPoint(e, x, p)) for e, x, p in zip(etas, xis, phis)
    ]


def random_box_points(rng, count, half=2.5, min_focal=0.04, min_axis=0.02):
    pts = []
    while len(pts) < count:
        x, y, z = rng.uniform(-half, half, size=3)
        p = CartesianPoint(x, y, z)
        if math.hypot(p.rho - 1.0, p.z) < min_focal or p.rho < min_axis:
            continue
        pts.append(p)
    return pts
