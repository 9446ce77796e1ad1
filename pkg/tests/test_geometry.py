import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from rimnull.errors import DomainError, EmptyRimError, InfeasibleCalibrationError, SingularDistanceError
from rimnull.geometry import (
    ETA0,
    FeedModel,
    ReflectorModel,
    arc_length,
    calibrate_focal_length,
    incident_field,
    paraboloid_point,
    surface_angle,
    tile_rim,
)


@pytest.fixture(scope="module")
def model():
    return ReflectorModel.from_edge_illumination(18.0, 1.5e9, q=1.0, edge_illumination_db=-11.0)


def test_vertex_point_and_normal(model):
    p, n = paraboloid_point(0.0, 1.234, model)
    np.testing.assert_allclose(p, [0, 0, 0], atol=0)
    np.testing.assert_allclose(n, [0, 0, 1], atol=1e-15)


def test_point_at_rho_equal_f(model):
    F = model.focal_length
    p, n = paraboloid_point(F, 0.0, model)
    np.testing.assert_allclose(p, [F, 0.0, F / 4])
    np.testing.assert_allclose(n, np.array([-0.5, 0.0, 1.0]) / math.sqrt(1.25))


def test_rim_height_18m(model):
    F = 0.3827 * 18.0
    expected = 81.0 / (4.0 * F)
    p, _ = paraboloid_point(9.0, 0.3, model)
    assert expected == pytest.approx(2.940, abs=1e-3)
    assert p[2] == pytest.approx(81.0 / (4.0 * model.focal_length))
    assert p[2] == pytest.approx(expected, rel=2e-3)


def test_point_outside_dish_rejected(model):
    with pytest.raises(DomainError):
        paraboloid_point(9.5, 0.0, model)
    with pytest.raises(DomainError):
        paraboloid_point(-0.1, 0.0, model)


def test_surface_angle_examples(model):
    assert surface_angle(0.0, model) == 0.0
    assert surface_angle(model.focal_length, model) == pytest.approx(2 * math.atan(0.5))
    assert surface_angle(9.0, model) == pytest.approx(model.rim_edge_angle, abs=1e-14)
    assert math.degrees(model.rim_edge_angle) == pytest.approx(66.3, abs=0.05)


def test_calibration_closed_form_q0():
    theta0 = math.radians(60)
    edge = 20 * math.log10((1 + math.cos(theta0)) / 2)
    assert edge == pytest.approx(-2.4988, abs=1e-3)
    assert calibrate_focal_length(0.0, edge) == pytest.approx(1 / (4 * math.tan(math.radians(30))), rel=1e-12)


def _bisect(f, lo, hi, n=200):
    for _ in range(n):
        mid = 0.5 * (lo + hi)
        if f(lo) * f(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_calibration_q1_minus11_against_bisection():
    target = 10 ** (-11 / 20)
    c = _bisect(lambda c: c * (1 + c) / 2 - target, 0.0, 1.0)
    theta0 = math.acos(c)
    fd_oracle = 1 / (4 * math.tan(theta0 / 2))
    assert c == pytest.approx(0.402, abs=1e-3)
    assert math.degrees(theta0) == pytest.approx(66.3, abs=0.05)
    fd = calibrate_focal_length(1.0, -11.0)
    assert fd == pytest.approx(fd_oracle, rel=1e-12)
    assert fd == pytest.approx(0.383, abs=1e-3)


@pytest.mark.parametrize("edge", [0.0, 3.0])
def test_calibration_infeasible(edge):
    with pytest.raises(InfeasibleCalibrationError):
        calibrate_focal_length(1.0, edge)


def test_calibration_infeasible_low_taper_q0():
    # with q = 0 the taper never drops below -6.02 dB
    with pytest.raises(InfeasibleCalibrationError):
        calibrate_focal_length(0.0, -8.0)


@settings(max_examples=40, deadline=None)
@given(q=st.floats(0.5, 4.0), edge=st.floats(-25.0, -6.5))
def test_calibration_round_trip(q, edge):
    fd = calibrate_focal_length(q, edge)
    m = ReflectorModel(diameter=10.0, focal_length=10.0 * fd, frequency=1e9, rim_depth=0.2, feed_exponent=q)
    assert m.edge_illumination_db() == pytest.approx(edge, abs=0.01)


def test_model_invariants(model):
    assert 0 < model.rim_start_angle < model.rim_edge_angle < math.pi / 2
    assert model.wavelength * model.frequency == pytest.approx(299792458.0, rel=1e-9)
    assert model.wavenumber == pytest.approx(2 * math.pi / model.wavelength)
    edge_arc = arc_length(9.0, model.focal_length)
    rho1 = 2 * model.focal_length * math.tan(model.rim_start_angle / 2)
    assert edge_arc - arc_length(rho1, model.focal_length) == pytest.approx(model.rim_depth, rel=1e-10)


def test_tiling_scenario_count(model):
    seg = tile_rim(model, 0.5 * model.wavelength)
    assert seg.n_rings == 5
    assert abs(seg.count - 2756) / 2756 <= 0.02
    assert seg.plate_area == pytest.approx(0.25 * model.wavelength**2)


def test_tiling_single_ring(model):
    seg = tile_rim(ReflectorModel(18.0, model.focal_length, 1.5e9, rim_depth=0.1), 0.1)
    assert seg.n_rings == 1
    assert set(seg.ring_index) == {0}


def test_tiling_too_shallow_is_error(model):
    shallow = ReflectorModel(18.0, model.focal_length, 1.5e9, rim_depth=0.05)
    with pytest.raises(EmptyRimError):
        tile_rim(shallow, 0.1)


def test_tiled_area_matches_annulus_quadrature(model):
    seg = tile_rim(model, 0.5 * model.wavelength)
    F = model.focal_length
    rho1 = 2 * F * math.tan(seg.inner_angle / 2)
    area, _ = integrate.quad(lambda r: 2 * math.pi * r * math.sqrt(1 + (r / (2 * F)) ** 2), rho1, 9.0)
    assert abs(seg.count * seg.plate_area - area) / area <= 0.03


def test_segments_on_surface_and_normals(model):
    seg = tile_rim(model, 0.5 * model.wavelength)
    x, y, z = seg.centers.T
    rho = np.hypot(x, y)
    np.testing.assert_allclose(z, rho**2 / (4 * model.focal_length), atol=1e-9 * model.diameter)
    np.testing.assert_allclose(np.linalg.norm(seg.normals, axis=1), 1.0, atol=1e-12)
    # normals lean toward the axis and point up toward the focus
    to_focus = model.focus - seg.centers
    assert np.all(np.sum(seg.normals * to_focus, axis=1) > 0)
    th = surface_angle(rho, model)
    assert np.all(th >= seg.inner_angle) and np.all(th <= model.rim_edge_angle)


def test_ring_arc_positions(model):
    ps = 0.5 * model.wavelength
    seg = tile_rim(model, ps)
    edge = arc_length(9.0, model.focal_length)
    for i, rho in enumerate(seg.ring_radii):
        assert edge - arc_length(rho, model.focal_length) == pytest.approx((i + 0.5) * ps, rel=1e-10)
        assert np.sum(seg.ring_index == i) == math.floor(2 * math.pi * rho / ps)


@settings(max_examples=50, deadline=None)
@given(rho=st.floats(0.0, 9.0), phi=st.floats(-10, 10), dphi=st.floats(-math.pi, math.pi))
def test_axisymmetry(model, rho, phi, dphi):
    p0, n0 = paraboloid_point(rho, phi, model)
    p1, n1 = paraboloid_point(rho, phi + dphi, model)
    c, s = math.cos(dphi), math.sin(dphi)
    R = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    np.testing.assert_allclose(R @ p0, p1, atol=1e-12 * 18)
    np.testing.assert_allclose(R @ n0, n1, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(rho=st.floats(0.0, 9.0), phi=st.floats(0, 2 * math.pi))
def test_path_length_collimation(model, rho, phi):
    p, _ = paraboloid_point(rho, phi, model)
    r = np.linalg.norm(p - model.focus)
    aperture_z = 10.0
    assert r + (aperture_z - p[2]) == pytest.approx(model.focal_length + aperture_z, abs=1e-9 * model.diameter)


def test_feed_vertex_and_rim_fields(model):
    feed = FeedModel.normalized(1.0)
    E, H = incident_field(feed, np.array([0.0, 0.0, 0.0]), model)
    assert np.linalg.norm(E) == pytest.approx(feed.amplitude_constant / model.focal_length)
    # rim point in the x-z plane, where the dipole factor is 1
    p, _ = paraboloid_point(9.0, 0.0, model)
    Er, _ = incident_field(feed, p, model)
    ratio_db = 20 * math.log10(np.linalg.norm(Er) / np.linalg.norm(E))
    assert ratio_db == pytest.approx(-11.0, abs=0.01)
    # H is transverse and |H| = |E| / eta
    u = (p - model.focus) / np.linalg.norm(p - model.focus)
    _, Hr = incident_field(feed, p, model)
    assert abs(np.dot(Hr, u)) < 1e-15 * np.linalg.norm(Hr)
    assert np.linalg.norm(Hr) == pytest.approx(np.linalg.norm(Er) / ETA0)


def test_feed_zero_at_ninety_degrees(model):
    feed = FeedModel.normalized(1.0)
    E, _ = incident_field(feed, np.array([3.0, 0.0, model.focal_length]), model)
    assert np.linalg.norm(E) == pytest.approx(0.0, abs=1e-15)


def test_feed_at_focus_is_error(model):
    with pytest.raises(SingularDistanceError):
        incident_field(FeedModel.normalized(1.0), model.focus, model)


@pytest.mark.parametrize("q", [0.0, 1.0, 2.5])
def test_feed_normalized_to_one_watt(q):
    feed = FeedModel.normalized(q)

    def intensity(theta, phi):
        # unit-radius sphere around the feed; theta off the -z axis
        u = np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), -math.cos(theta)])
        dip = 1 - u[1] ** 2
        return feed.amplitude_constant**2 * math.cos(theta) ** (2 * q) * dip / (2 * ETA0) * math.sin(theta)

    power, _ = integrate.dblquad(lambda th, ph: intensity(th, ph), 0, 2 * math.pi, 0, math.pi / 2)
    assert power == pytest.approx(1.0, rel=1e-8)
    assert feed.radiated_power() == pytest.approx(1.0)
