"""Coordinate frames, grid discretization, and antenna/beam angle geometry.

Local navigation uses an east-north-up (ENU) tangent plane anchored at the
southwest corner of the mission region; global satellite geometry uses the
Earth-centered Earth-fixed (ECEF) frame on the WGS-84 ellipsoid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

WGS84_A = 6378137.0
WGS84_F = 1.0 / 298.257223563
WGS84_E2 = WGS84_F * (2.0 - WGS84_F)
WGS84_B = WGS84_A * (1.0 - WGS84_F)

GEO_ALTITUDE_M = 35_786_000.0

# UAV operating ceiling (m); grid specs above this are rejected.
MAX_UAV_ALTITUDE_M = 300.0


@dataclass(frozen=True)
class GeodeticPoint:
    """Latitude/longitude in degrees, altitude in meters above the ellipsoid."""

    latitude_deg: float
    longitude_deg: float
    altitude_m: float = 0.0

    def __post_init__(self) -> None:
        if not -90.0 <= self.latitude_deg <= 90.0:
            raise ValueError(f"latitude out of range: {self.latitude_deg}")
        if not -180.0 <= self.longitude_deg <= 180.0:
            raise ValueError(f"longitude out of range: {self.longitude_deg}")
        if not math.isfinite(self.altitude_m):
            raise ValueError("altitude must be finite")


@dataclass(frozen=True)
class EcefPoint:
    """Cartesian ECEF position in meters."""

    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @staticmethod
    def from_array(v: np.ndarray) -> "EcefPoint":
        return EcefPoint(float(v[0]), float(v[1]), float(v[2]))

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))


def geodetic_to_ecef(p: GeodeticPoint) -> EcefPoint:
    """WGS-84 geodetic to ECEF conversion."""
    lat = math.radians(p.latitude_deg)
    lon = math.radians(p.longitude_deg)
    sin_lat = math.sin(lat)
    cos_lat = math.cos(lat)
    n = WGS84_A / math.sqrt(1.0 - WGS84_E2 * sin_lat * sin_lat)
    x = (n + p.altitude_m) * cos_lat * math.cos(lon)
    y = (n + p.altitude_m) * cos_lat * math.sin(lon)
    z = (n * (1.0 - WGS84_E2) + p.altitude_m) * sin_lat
    return EcefPoint(x, y, z)


def ecef_to_geodetic(p: EcefPoint) -> GeodeticPoint:
    """Inverse of :func:`geodetic_to_ecef` by fixed-point iteration on latitude.

    Converges to sub-micrometer accuracy within a few iterations for points
    from the surface up through GEO altitude.
    """
    x, y, z = p.x, p.y, p.z
    lon = math.atan2(y, x)
    r = math.hypot(x, y)
    if r == 0.0 and z == 0.0:
        raise ValueError("ECEF origin has no geodetic image")
    lat = math.atan2(z, r * (1.0 - WGS84_E2))
    alt = 0.0
    for _ in range(10):
        sin_lat = math.sin(lat)
        n = WGS84_A / math.sqrt(1.0 - WGS84_E2 * sin_lat * sin_lat)
        alt = r / math.cos(lat) - n if abs(math.cos(lat)) > 1e-12 else abs(z) - WGS84_B
        lat = math.atan2(z, r * (1.0 - WGS84_E2 * n / (n + alt)))
    return GeodeticPoint(math.degrees(lat), math.degrees(lon), alt)


def geo_satellite_position(longitude_deg: float, altitude_m: float = GEO_ALTITUDE_M) -> EcefPoint:
    """ECEF position of a geostationary satellite parked over the equator."""
    return geodetic_to_ecef(GeodeticPoint(0.0, longitude_deg, altitude_m))


class LocalFrame:
    """ENU tangent plane anchored at a geodetic origin.

    Local coordinates are (east, north, up) in meters; ``to_ecef`` maps them
    into the global frame for satellite line-of-sight geometry.
    """

    def __init__(self, origin: GeodeticPoint):
        self.origin = origin
        self._origin_ecef = geodetic_to_ecef(origin).as_array()
        lat = math.radians(origin.latitude_deg)
        lon = math.radians(origin.longitude_deg)
        sl, cl = math.sin(lat), math.cos(lat)
        so, co = math.sin(lon), math.cos(lon)
        # Columns are the ENU basis vectors expressed in ECEF.
        self._enu_to_ecef = np.array(
            [
                [-so, -sl * co, cl * co],
                [co, -sl * so, cl * so],
                [0.0, cl, sl],
            ]
        )

    def to_ecef(self, local_xyz: np.ndarray) -> np.ndarray:
        """Map local ENU point(s), shape (..., 3), to ECEF meters."""
        local = np.asarray(local_xyz, dtype=float)
        return self._origin_ecef + local @ self._enu_to_ecef.T


@dataclass(frozen=True)
class GridSpec:
    """Square mission region of side ``area_m`` split into N x N cells."""

    area_m: float
    cells_per_side: int
    uav_altitude_m: float
    origin: GeodeticPoint

    def __post_init__(self) -> None:
        if self.area_m <= 0 or self.cells_per_side <= 0:
            raise ValueError("area and cell count must be positive")
        if not 0.0 < self.uav_altitude_m < MAX_UAV_ALTITUDE_M:
            raise ValueError(
                f"UAV altitude {self.uav_altitude_m} m outside (0, {MAX_UAV_ALTITUDE_M}) m"
            )

    @property
    def cell_size_m(self) -> float:
        return self.area_m / self.cells_per_side


@dataclass(frozen=True, order=True)
class GridIndex:
    """(row, col) cell index; row grows northward, col grows eastward."""

    row: int
    col: int

    def in_bounds(self, spec: GridSpec) -> bool:
        n = spec.cells_per_side
        return 0 <= self.row < n and 0 <= self.col < n

    def flat(self, spec: GridSpec) -> int:
        return self.row * spec.cells_per_side + self.col


def grid_center(g: GridIndex, spec: GridSpec) -> np.ndarray:
    """Local ENU coordinates of a cell center at UAV altitude."""
    if not g.in_bounds(spec):
        raise ValueError(f"grid index {g} out of bounds for N={spec.cells_per_side}")
    cell = spec.cell_size_m
    return np.array(
        [(g.col + 0.5) * cell, (g.row + 0.5) * cell, spec.uav_altitude_m]
    )


def all_grid_centers(spec: GridSpec) -> np.ndarray:
    """Centers of every cell, shape (N, N, 3), indexed [row, col]."""
    n = spec.cells_per_side
    cell = spec.cell_size_m
    cols = (np.arange(n) + 0.5) * cell
    rows = (np.arange(n) + 0.5) * cell
    x, y = np.meshgrid(cols, rows, indexing="xy")
    z = np.full_like(x, spec.uav_altitude_m)
    return np.stack([x, y, z], axis=-1)


def elevation_azimuth(
    from_xyz: np.ndarray,
    to_xyz: np.ndarray,
    boresight_azimuth_deg: float,
    downtilt_deg: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Angles of a target in a down-tilted sector antenna's frame.

    ``theta`` is the zenith angle (0 deg straight up the tilted array axis,
    90 deg on the tilted boresight plane); ``phi`` is azimuth relative to the
    sector boresight, wrapped to (-180, 180]. A target straight along the
    frame's vertical axis has undefined azimuth and returns phi = 0.

    Broadcasts over leading dimensions of ``to_xyz``.
    """
    d = np.asarray(to_xyz, dtype=float) - np.asarray(from_xyz, dtype=float)
    r = np.linalg.norm(d, axis=-1)
    if np.any(r == 0.0):
        raise ValueError("coincident antenna and target positions")
    a = math.radians(boresight_azimuth_deg)
    t = math.radians(downtilt_deg)
    # Rotate boresight azimuth onto +x, then pitch the frame down by the tilt.
    ux = d[..., 0] * math.cos(a) + d[..., 1] * math.sin(a)
    uy = -d[..., 0] * math.sin(a) + d[..., 1] * math.cos(a)
    uz = d[..., 2]
    vx = math.cos(t) * ux - math.sin(t) * uz
    vz = math.sin(t) * ux + math.cos(t) * uz
    theta = np.degrees(np.arccos(np.clip(vz / r, -1.0, 1.0)))
    phi = np.degrees(np.arctan2(uy, vx))
    # atan2 returns -180 at the back lobe; wrap to the (-180, 180] convention.
    phi = np.where(phi <= -180.0, phi + 360.0, phi)
    if theta.ndim == 0:
        return float(theta), float(phi)
    return theta, phi


def off_boresight_angle(
    sat: EcefPoint, beam_center_ground: EcefPoint, target: EcefPoint | np.ndarray
) -> float | np.ndarray:
    """Angle at the satellite between its beam-center ray and a target ray.

    Result in degrees, in [0, 180]. ``target`` may be an (..., 3) array of
    ECEF points.
    """
    s = sat.as_array()
    v1 = beam_center_ground.as_array() - s
    n1 = np.linalg.norm(v1)
    tgt = target.as_array() if isinstance(target, EcefPoint) else np.asarray(target, dtype=float)
    v2 = tgt - s
    n2 = np.linalg.norm(v2, axis=-1)
    if n1 == 0.0 or np.any(n2 == 0.0):
        raise ValueError("degenerate ray of zero length")
    # atan2 of (cross, dot) is exact at 0 and stable near 0/180 degrees,
    # unlike arccos of the normalized dot product.
    cross = np.linalg.norm(np.cross(np.broadcast_to(v1, v2.shape), v2), axis=-1)
    dot = v2 @ v1
    ang = np.degrees(np.arctan2(cross, dot))
    return float(ang) if ang.ndim == 0 else ang
