import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skyplan.geometry import (
    EcefPoint,
    GeodeticPoint,
    GridIndex,
    GridSpec,
    LocalFrame,
    ecef_to_geodetic,
    elevation_azimuth,
    geo_satellite_position,
    geodetic_to_ecef,
    grid_center,
    off_boresight_angle,
)

ORIGIN = GeodeticPoint(45.4, -75.7, 0.0)
SPEC_25 = GridSpec(area_m=3000.0, cells_per_side=25, uav_altitude_m=150.0, origin=ORIGIN)


# ---------------------------------------------------------------- geodetic
def test_ecef_equator_prime_meridian():
    p = geodetic_to_ecef(GeodeticPoint(0.0, 0.0, 0.0))
    assert p.x == pytest.approx(6378137.0, abs=1e-6)
    assert p.y == pytest.approx(0.0, abs=1e-9)
    assert p.z == pytest.approx(0.0, abs=1e-9)


def test_ecef_north_pole_semi_minor_axis():
    p = geodetic_to_ecef(GeodeticPoint(90.0, 0.0, 0.0))
    assert p.x == pytest.approx(0.0, abs=1e-6)
    assert p.y == pytest.approx(0.0, abs=1e-9)
    assert p.z == pytest.approx(6356752.3142, abs=1e-3)


def test_ecef_reference_city():
    # Frozen from an independent high-precision conversion of the region
    # anchor (45.4 N, 75.7 W, 0 m).
    p = geodetic_to_ecef(ORIGIN)
    assert p.x == pytest.approx(1108049.300912, abs=1e-4)
    assert p.y == pytest.approx(-4347050.589080, abs=1e-4)
    assert p.z == pytest.approx(4518672.346468, abs=1e-4)


@given(
    lat=st.floats(-89.0, 89.0),
    lon=st.floats(-180.0, 180.0),
    alt=st.floats(0.0, 5000.0),
)
@settings(max_examples=60, deadline=None)
def test_geodetic_roundtrip_at_ground_altitudes(lat, lon, alt):
    p = GeodeticPoint(lat, lon, alt)
    back = ecef_to_geodetic(geodetic_to_ecef(p))
    ecef1 = geodetic_to_ecef(p).as_array()
    ecef2 = geodetic_to_ecef(back).as_array()
    assert np.linalg.norm(ecef1 - ecef2) < 1e-6


def test_geodetic_validation():
    with pytest.raises(ValueError):
        GeodeticPoint(91.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        GeodeticPoint(0.0, 181.0, 0.0)
    with pytest.raises(ValueError):
        GeodeticPoint(0.0, 0.0, float("nan"))


def test_ecef_norms_in_working_range(desk_scenario):
    for point in (
        geodetic_to_ecef(ORIGIN),
        geo_satellite_position(-111.1),
    ):
        assert 6.3e6 <= point.norm() <= 4.3e7


# ---------------------------------------------------------------- grid
def test_grid_center_corners_and_middle():
    assert np.allclose(grid_center(GridIndex(0, 0), SPEC_25), [60.0, 60.0, 150.0])
    assert np.allclose(grid_center(GridIndex(24, 24), SPEC_25), [2940.0, 2940.0, 150.0])
    assert np.allclose(grid_center(GridIndex(12, 12), SPEC_25), [1500.0, 1500.0, 150.0])


def test_grid_center_out_of_bounds():
    with pytest.raises(ValueError):
        grid_center(GridIndex(25, 0), SPEC_25)


def test_grid_center_injective_and_interior():
    seen = set()
    n = SPEC_25.cells_per_side
    for r in range(n):
        for c in range(n):
            p = grid_center(GridIndex(r, c), SPEC_25)
            key = (round(p[0], 9), round(p[1], 9))
            assert key not in seen
            seen.add(key)
            assert 0.0 < p[0] < SPEC_25.area_m
            assert 0.0 < p[1] < SPEC_25.area_m


def test_grid_spec_rejects_ceiling_violation():
    with pytest.raises(ValueError):
        GridSpec(area_m=3000.0, cells_per_side=25, uav_altitude_m=300.0, origin=ORIGIN)


# ---------------------------------------------------------------- angles
def test_boresight_target_untilted():
    theta, phi = elevation_azimuth((0, 0, 0), (50.0, 0.0, 0.0), 0.0, 0.0)
    assert theta == pytest.approx(90.0, abs=1e-12)
    assert phi == pytest.approx(0.0, abs=1e-12)


def test_zenith_singularity_returns_zero_azimuth():
    theta, phi = elevation_azimuth((0, 0, 0), (0.0, 0.0, 50.0), 0.0, 0.0)
    assert theta == pytest.approx(0.0, abs=1e-12)
    assert phi == 0.0


def test_tilted_sector_angles_against_rotation_oracle():
    # Frozen from an independent vector-rotation script: UAV at (1000, 0, 150),
    # antenna at (0, 0, 25), boresight +x, 10 deg downtilt.
    theta, phi = elevation_azimuth((0.0, 0.0, 25.0), (1000.0, 0.0, 150.0), 0.0, 10.0)
    assert theta == pytest.approx(72.8749836510982, abs=1e-9)
    assert phi == pytest.approx(0.0, abs=1e-12)


def test_elevation_azimuth_rejects_coincident_points():
    with pytest.raises(ValueError):
        elevation_azimuth((1.0, 2.0, 3.0), (1.0, 2.0, 3.0), 0.0, 0.0)


@given(
    dx=st.floats(-1000, 1000),
    dy=st.floats(-1000, 1000),
    dz=st.floats(-1000, 1000),
    az=st.floats(0, 360),
    tilt=st.floats(0, 20),
    k=st.floats(0.01, 100.0),
)
@settings(max_examples=80, deadline=None)
def test_elevation_azimuth_scale_invariance(dx, dy, dz, az, tilt, k):
    if math.hypot(dx, dy, dz) < 1e-6:
        return
    # Anchored at the origin so scaling the target scales (to - from) exactly.
    origin = np.zeros(3)
    t1 = elevation_azimuth(origin, np.array([dx, dy, dz]), az, tilt)
    t2 = elevation_azimuth(origin, k * np.array([dx, dy, dz]), az, tilt)
    assert t1[0] == pytest.approx(t2[0], abs=1e-8)
    assert t1[1] == pytest.approx(t2[1], abs=1e-8)


# ---------------------------------------------------------------- satellite
SAT = geo_satellite_position(-111.1)
BEAM = geodetic_to_ecef(GeodeticPoint(50.0, -70.0, 0.0))


def test_off_boresight_zero_on_beam_center():
    assert off_boresight_angle(SAT, BEAM, BEAM) == pytest.approx(0.0, abs=1e-12)


def test_off_boresight_scenario_geometry():
    # Frozen from an independent spherical-geometry script; region anchor
    # must sit well inside one beamwidth of the spot center.
    anchor = geodetic_to_ecef(ORIGIN)
    angle = off_boresight_angle(SAT, BEAM, anchor)
    assert angle == pytest.approx(0.411094348, abs=1e-6)
    assert angle < 1.0


def test_off_boresight_nearly_constant_over_region():
    frame = LocalFrame(ORIGIN)
    pts = []
    for e in np.linspace(0, 3000, 7):
        for n in np.linspace(0, 3000, 7):
            pts.append(frame.to_ecef(np.array([e, n, 150.0])))
    angles = off_boresight_angle(SAT, BEAM, np.array(pts))
    assert angles.max() - angles.min() < 0.01


def test_off_boresight_symmetric_targets():
    # Two targets mirrored across the satellite-beam axis subtend equal angles.
    s = SAT.as_array()
    axis = BEAM.as_array() - s
    axis /= np.linalg.norm(axis)
    perp = np.cross(axis, [0.0, 0.0, 1.0])
    perp /= np.linalg.norm(perp)
    base = s + 0.9 * (BEAM.as_array() - s)
    t1 = EcefPoint.from_array(base + 50e3 * perp)
    t2 = EcefPoint.from_array(base - 50e3 * perp)
    a1 = off_boresight_angle(SAT, BEAM, t1)
    a2 = off_boresight_angle(SAT, BEAM, t2)
    assert a1 == pytest.approx(a2, abs=1e-9)


@given(rot=st.floats(0.0, 360.0))
@settings(max_examples=40, deadline=None)
def test_off_boresight_invariant_under_earth_axis_rotation(rot):
    c, s = math.cos(math.radians(rot)), math.sin(math.radians(rot))
    rz = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])

    def rotated(p: EcefPoint) -> EcefPoint:
        return EcefPoint.from_array(rz @ p.as_array())

    target = geodetic_to_ecef(GeodeticPoint(45.0, -80.0, 150.0))
    before = off_boresight_angle(SAT, BEAM, target)
    after = off_boresight_angle(rotated(SAT), rotated(BEAM), rotated(target))
    assert after == pytest.approx(before, abs=1e-9)


def test_off_boresight_degenerate_ray():
    with pytest.raises(ValueError):
        off_boresight_angle(SAT, SAT, BEAM)
