"""Upper-half-plane geometry: metric axioms, polar coordinates, frames
and ball sampling."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hyplab.geom import (Point, UnitTangent, MobiusElement, mobius_apply,
                         hyp_dist, ball_volume, geodesic_flow, polar_from,
                         polar_to, sample_ball, sample_ball_complex)

# bounded coordinate ranges keep cosh arguments well inside double range
coords = st.floats(-5.0, 5.0)
heights = st.floats(0.05, 20.0)
angles = st.floats(0.0, 2.0 * math.pi - 1e-9)
radii = st.floats(1e-3, 5.0)


def points():
    return st.builds(Point, coords, heights)


def mobius_elements():
    """Random PSL(2, R) elements as translation * dilation * rotation."""

    def build(x, a, phi):
        trans = MobiusElement(1.0, x, 0.0, 1.0)
        dil = MobiusElement(math.exp(a / 2.0), 0.0, 0.0, math.exp(-a / 2.0))
        c, s = math.cos(phi), math.sin(phi)
        rot = MobiusElement(c, -s, s, c) if abs(c) > 1e-6 \
            else MobiusElement(0.0, -1.0, 1.0, 0.0)
        return trans @ dil @ rot

    return st.builds(build, coords, st.floats(-2.0, 2.0), angles)


def test_point_validation():
    with pytest.raises(ValueError):
        Point(0.0, 0.0)
    with pytest.raises(ValueError):
        Point(1.0, -1.0)


def test_known_distance_values():
    # d(i, i e^r) = r along the imaginary axis
    for r in (0.25, 1.0, 3.0):
        assert hyp_dist(Point(0, 1), Point(0, math.exp(r))) == \
            pytest.approx(r, abs=1e-12)
    # d(i, 1 + i): cosh d = 1 + |z - w|^2 / (2 y y') = 3/2
    assert hyp_dist(Point(0, 1), Point(1, 1)) == \
        pytest.approx(math.acosh(1.5), abs=1e-12)


@given(points(), points())
def test_distance_symmetry_and_positivity(z, w):
    d = hyp_dist(z, w)
    assert d >= 0.0
    assert d == pytest.approx(hyp_dist(w, z), abs=1e-10)
    assert hyp_dist(z, z) <= 1e-7


@given(points(), points(), points())
def test_triangle_inequality(z, w, v):
    assert hyp_dist(z, w) <= hyp_dist(z, v) + hyp_dist(v, w) + 1e-8


@given(mobius_elements(), points(), points())
def test_mobius_isometry(g, z, w):
    gz, gw = mobius_apply(g, z), mobius_apply(g, w)
    assert hyp_dist(gz, gw) == pytest.approx(hyp_dist(z, w),
                                             abs=1e-8, rel=1e-8)


@given(mobius_elements(), mobius_elements(), points())
def test_mobius_composition(g, h, z):
    lhs = mobius_apply(g @ h, z)
    rhs = mobius_apply(g, mobius_apply(h, z))
    assert lhs.as_complex == pytest.approx(rhs.as_complex, abs=1e-9)


@given(mobius_elements())
def test_mobius_inverse(g):
    assert (g @ g.inverse()).is_identity(tol=1e-9)


def test_ball_volume_oracle():
    # 2 pi (cosh r - 1); small-r Euclidean limit pi r^2
    assert ball_volume(0.0) == 0.0
    assert ball_volume(1.0) == pytest.approx(
        2.0 * math.pi * (math.cosh(1.0) - 1.0), rel=1e-15)
    r = 1e-4
    assert ball_volume(r) == pytest.approx(math.pi * r * r, rel=1e-7)
    with pytest.raises(ValueError):
        ball_volume(-1.0)


@given(points(), angles, radii)
def test_polar_roundtrip(z0, theta, r):
    z = polar_from(z0, theta, r)
    theta2, r2 = polar_to(z0, z)
    assert r2 == pytest.approx(r, abs=1e-8)
    dtheta = (theta2 - theta) % (2.0 * math.pi)
    assert min(dtheta, 2.0 * math.pi - dtheta) < 1e-6


@given(points(), angles, radii)
def test_polar_distance(z0, theta, r):
    assert hyp_dist(z0, polar_from(z0, theta, r)) == \
        pytest.approx(r, abs=1e-8)


@given(points(), angles, st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
def test_geodesic_flow_additivity(z0, theta, t1, t2):
    v = UnitTangent(Point(z0.x, z0.y), theta)
    a = geodesic_flow(v, t1 + t2)
    b = geodesic_flow(geodesic_flow(v, t1), t2)
    assert a.base.as_complex == pytest.approx(b.base.as_complex, abs=1e-7)
    dtheta = (a.theta - b.theta) % (2.0 * math.pi)
    assert min(dtheta, 2.0 * math.pi - dtheta) < 1e-6


def test_sample_ball_reproducible_and_in_ball():
    z0 = Point(0.3, 2.0)
    a = sample_ball_complex(z0, 2.0, 500, seed=11)
    b = sample_ball_complex(z0, 2.0, 500, seed=11)
    assert np.array_equal(a, b)
    pts = sample_ball(z0, 2.0, 200, seed=4)
    assert all(hyp_dist(z0, p) <= 2.0 + 1e-9 for p in pts)


def test_sample_ball_radial_law():
    # area fraction within radius r of a ball of radius R is
    # (cosh r - 1)/(cosh R - 1)
    z0 = Point(0.0, 1.0)
    R = 2.0
    zc = sample_ball_complex(z0, R, 40_000, seed=9)
    z0c = np.full(zc.shape, z0.as_complex)
    d = np.arccosh(1.0 + np.abs(zc - z0c) ** 2 / (2.0 * zc.imag * z0.y))
    for r in (0.5, 1.0, 1.5):
        frac = float(np.mean(d <= r))
        expect = (math.cosh(r) - 1.0) / (math.cosh(R) - 1.0)
        assert frac == pytest.approx(expect, abs=4.0 * 0.5 / math.sqrt(40_000))
