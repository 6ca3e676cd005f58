import math

import numpy as np
import pytest

from hopfeik import (
    CartesianPoint,
    ToroidalPoint,
    scale_factor,
    to_cartesian,
    to_toroidal,
    toroidal_frame,
)
from hopfeik.errors import (
    AxisDegeneracyError,
    DegeneratePointError,
    FocalCircleError,
)
from conftest import random_box_points

ASINH1 = math.asinh(1.0)
INV_SQRT2 = 1.0 / math.sqrt(2.0)


def wrapped_diff(a, b):
    d = math.fmod(a - b, 2.0 * math.pi)
    if d > math.pi:
        d -= 2.0 * math.pi
    elif d <= -math.pi:
        d += 2.0 * math.pi
    return d


class TestForwardMap:
    def test_origin(self):
        p = to_cartesian(ToroidalPoint(0.0, math.pi, 0.7))
        assert abs(p.x) == 0.0
        assert abs(p.y) == 0.0
        assert abs(p.z) < 1e-15  # sin(pi) rounds to ~1.2e-16

    def test_special_point(self):
        # cosh(asinh 1) = sqrt(2), so q = sqrt(2) and x = z = 1/sqrt(2)
        p = to_cartesian(ToroidalPoint(ASINH1, math.pi / 2, 0.0))
        assert p.x == pytest.approx(INV_SQRT2, abs=1e-15)
        assert p.y == 0.0
        assert p.z == pytest.approx(INV_SQRT2, abs=1e-15)

    def test_point_at_infinity_rejected(self):
        with pytest.raises(DegeneratePointError):
            to_cartesian(ToroidalPoint(0.0, 0.0, 0.0))

    def test_r2_accessor(self):
        p = CartesianPoint(1.0, -2.0, 3.0)
        assert p.r2 == 14.0


class TestInverseMap:
    def test_origin(self):
        t = to_toroidal(CartesianPoint(0.0, 0.0, 0.0))
        assert t.eta == 0.0
        assert t.xi == pytest.approx(math.pi)
        assert t.phi == 0.0  # canonical azimuth on the z-axis

    def test_special_point_round(self):
        t = to_toroidal(CartesianPoint(INV_SQRT2, 0.0, INV_SQRT2))
        assert t.eta == pytest.approx(ASINH1, abs=1e-12)
        assert t.xi == pytest.approx(math.pi / 2, abs=1e-12)
        assert t.phi == 0.0

    def test_focal_circle_rejected(self):
        with pytest.raises(FocalCircleError):
            to_toroidal(CartesianPoint(1.0 + 1e-13, 0.0, 0.0))

    def test_round_trip_random(self, rng):
        pts = random_box_points(rng, 10_000, min_focal=1e-3, min_axis=0.0)
        worst = 0.0
        for p in pts:
            try:
                t = to_toroidal(p)
            except FocalCircleError:
                continue  # closer than e^-20 to the circle; excluded by contract
            assert t.eta >= 0.0
            assert scale_factor(t) > 0.0
            back = to_cartesian(t)
            worst = max(
                worst,
                abs(back.x - p.x),
                abs(back.y - p.y),
                abs(back.z - p.z),
            )
        assert worst < 1e-10


class TestScaleFactor:
    @pytest.mark.parametrize(
        "eta,xi,expected",
        [(0.0, math.pi, 2.0), (0.0, 0.0, 0.0), (ASINH1, math.pi / 2, math.sqrt(2.0))],
    )
    def test_values(self, eta, xi, expected):
        assert scale_factor(ToroidalPoint(eta, xi, 0.0)) == pytest.approx(
            expected, abs=1e-15
        )


class TestFrame:
    def test_azimuthal_direction(self):
        f = toroidal_frame(ToroidalPoint(ASINH1, math.pi / 2, 0.0))
        np.testing.assert_allclose(f.e_phi, [0.0, 1.0, 0.0], atol=1e-15)

    def test_orthonormality_random(self, rng):
        for p in random_box_points(rng, 500, min_axis=1e-4):
            f = toroidal_frame(to_toroidal(p))
            M = f.as_matrix()
            np.testing.assert_allclose(M @ M.T, np.eye(3), atol=1e-12)

    def test_axis_degeneracy(self):
        with pytest.raises(AxisDegeneracyError):
            toroidal_frame(ToroidalPoint(1e-12, 1.0, 0.0))

    def test_gradient_consistency(self, rng):
        # FD gradients of the scalar charts eta, xi, phi against the frame
        # relations grad eta = q e_eta, grad xi = q e_xi,
        # grad phi = (q/sinh eta) e_phi.
        h = 1e-6
        for p in random_box_points(rng, 200, min_axis=0.05):
            t = to_toroidal(p)
            f = toroidal_frame(t)
            q = scale_factor(t)
            base = p.as_array()
            fd_eta = np.zeros(3)
            fd_xi = np.zeros(3)
            fd_phi = np.zeros(3)
            for k in range(3):
                e = np.zeros(3)
                e[k] = h
                tp = to_toroidal(CartesianPoint.from_array(base + e))
                tm = to_toroidal(CartesianPoint.from_array(base - e))
                fd_eta[k] = (tp.eta - tm.eta) / (2 * h)
                fd_xi[k] = wrapped_diff(tp.xi, tm.xi) / (2 * h)
                fd_phi[k] = wrapped_diff(tp.phi, tm.phi) / (2 * h)
            for fd, grad in [
                (fd_eta, q * f.e_eta),
                (fd_xi, q * f.e_xi),
                (fd_phi, q / math.sinh(t.eta) * f.e_phi),
            ]:
                err = np.linalg.norm(fd - grad) / np.linalg.norm(grad)
                assert err < 1e-6


class TestAngleNormalization:
    def test_angles_reduced(self):
        t = ToroidalPoint(1.0, 7.0, -1.0)
        assert 0.0 <= t.xi < 2.0 * math.pi
        assert 0.0 <= t.phi < 2.0 * math.pi
        assert t.xi == pytest.approx(7.0 - 2.0 * math.pi)
        assert t.phi == pytest.approx(2.0 * math.pi - 1.0)

    def test_negative_eta_rejected(self):
        with pytest.raises(DegeneratePointError):
            ToroidalPoint(-0.5, 0.0, 0.0)
