"""Radio link models for both network tiers.

Terrestrial side: aerial-user line-of-sight pathloss, planar-array sector
antenna gain, and interference-aware SINR. Satellite side: free-space link
budget with a parabolic main-lobe beam pattern. Coverage maps classify each
grid cell by its best server and hole status against the threshold beta.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    EcefPoint,
    GeodeticPoint,
    GridIndex,
    GridSpec,
    LocalFrame,
    all_grid_centers,
    elevation_azimuth,
    geo_satellite_position,
    geodetic_to_ecef,
    grid_center,
    off_boresight_angle,
)

SPEED_OF_LIGHT = 299_792_458.0

URBAN_MACRO = "urban-macro"
RURAL_MACRO = "rural-macro"

# Aerial-user validity band of the LoS pathloss models (m).
MIN_UT_HEIGHT_M = 22.5
MAX_UT_HEIGHT_M = 300.0

# Planar-array element pattern constants: 65 deg beamwidths in both cuts,
# 30 dB side-lobe floor.
ELEMENT_BEAMWIDTH_DEG = 65.0
ELEMENT_FLOOR_DB = 30.0


@dataclass(frozen=True)
class TerrestrialRadioParams:
    """Cellular tier radio configuration shared by every macro site."""

    carrier_freq_hz: float = 2.545e9
    tx_power_dbm: float = 43.0
    bandwidth_hz: float = 10e6
    noise_psd_dbm_hz: float = -173.9
    array_v: int = 8
    array_h: int = 8
    element_spacing_wl: float = 0.5
    downtilt_deg: float = 10.0
    element_max_gain_dbi: float = 8.0
    uav_rx_gain_dbi: float = 0.0

    def __post_init__(self) -> None:
        if self.array_v < 1 or self.array_h < 1:
            raise ValueError("array dimensions must be >= 1")
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth must be positive")

    @property
    def num_elements(self) -> int:
        return self.array_v * self.array_h


@dataclass(frozen=True)
class GeoRadioParams:
    """Satellite tier radio configuration and fixed geometry."""

    carrier_freq_hz: float = 2.1e9
    tx_power_dbm: float = 30.0
    bandwidth_hz: float = 400e3
    max_beam_gain_dbi: float = 51.0
    beam_3db_halfwidth_deg: float = 4.0
    atmospheric_loss_db: float = 0.5
    scintillation_loss_db: float = 0.5
    polarization_loss_db: float = 3.0
    sat_longitude_deg: float = -111.1
    sat_altitude_m: float = 35_786_000.0
    beam_center: GeodeticPoint = field(
        default_factory=lambda: GeodeticPoint(50.0, -70.0, 0.0)
    )

    def __post_init__(self) -> None:
        if min(self.atmospheric_loss_db, self.scintillation_loss_db, self.polarization_loss_db) < 0:
            raise ValueError("losses must be nonnegative")
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth must be positive")

    def sat_position(self) -> EcefPoint:
        return geo_satellite_position(self.sat_longitude_deg, self.sat_altitude_m)


@dataclass(frozen=True)
class MbsSite:
    """Tri-sector macro site in local ENU coordinates."""

    x_m: float
    y_m: float
    height_m: float
    sector_rotation_deg: float
    env_profile: str

    def __post_init__(self) -> None:
        if self.env_profile not in (URBAN_MACRO, RURAL_MACRO):
            raise ValueError(f"unknown env profile: {self.env_profile}")

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x_m, self.y_m, self.height_m])

    @property
    def sector_azimuths_deg(self) -> tuple[float, float, float]:
        r = self.sector_rotation_deg
        return (r % 360.0, (r + 120.0) % 360.0, (r + 240.0) % 360.0)


def element_pattern(theta_deg, phi_deg, max_gain_dbi: float = 8.0) -> np.ndarray | float:
    """Single-element directional gain in dBi.

    theta is the zenith angle in [0, 180], phi the azimuth in (-180, 180].
    Both cuts attenuate as 12*(angle/65)^2 capped at a 30 dB floor, and the
    combined attenuation is capped at the same floor.
    """
    theta = np.asarray(theta_deg, dtype=float)
    phi = np.asarray(phi_deg, dtype=float)
    a_h = -np.minimum(12.0 * (phi / ELEMENT_BEAMWIDTH_DEG) ** 2, ELEMENT_FLOOR_DB)
    a_v = -np.minimum(
        12.0 * ((theta - 90.0) / ELEMENT_BEAMWIDTH_DEG) ** 2, ELEMENT_FLOOR_DB
    )
    g = max_gain_dbi - np.minimum(-(a_h + a_v), ELEMENT_FLOOR_DB)
    return float(g) if g.ndim == 0 else g


def array_factor_linear(theta_deg, phi_deg, n_v: int, n_h: int, spacing_wl: float = 0.5) -> np.ndarray | float:
    """Power array factor of a uniform planar array, linear scale.

    Steering is fixed on the tilted broadside (the angles are already
    expressed in the tilted antenna frame), so the weights reduce to
    1/sqrt(N). Peak value is N = n_v * n_h.
    """
    theta = np.radians(np.asarray(theta_deg, dtype=float))
    phi = np.radians(np.asarray(phi_deg, dtype=float))
    n = np.arange(n_v).reshape((n_v, 1) + (1,) * theta.ndim)
    m = np.arange(n_h).reshape((1, n_h) + (1,) * theta.ndim)
    vert = np.cos(theta)[np.newaxis, np.newaxis, ...]
    horiz = (np.sin(theta) * np.sin(phi))[np.newaxis, np.newaxis, ...]
    psi = 2.0 * np.pi * spacing_wl * (n * vert + m * horiz)
    s = np.exp(1j * psi).sum(axis=(0, 1)) / np.sqrt(n_v * n_h)
    af = np.abs(s) ** 2
    return float(af) if af.ndim == 0 else af


def array_gain(theta_deg, phi_deg, params: TerrestrialRadioParams) -> np.ndarray | float:
    """Composite element + array gain in dBi at angles in the antenna frame."""
    af = array_factor_linear(
        theta_deg, phi_deg, params.array_v, params.array_h, params.element_spacing_wl
    )
    af_db = 10.0 * np.log10(np.maximum(af, 1e-30))
    g = element_pattern(theta_deg, phi_deg, params.element_max_gain_dbi) + af_db
    return float(g) if np.ndim(g) == 0 else g


def uma_av_los_pathloss_db(d3d_m, fc_hz: float) -> np.ndarray | float:
    """Urban-macro aerial LoS pathloss for user heights in (22.5, 300] m."""
    d = np.asarray(d3d_m, dtype=float)
    pl = 28.0 + 22.0 * np.log10(d) + 20.0 * np.log10(fc_hz / 1e9)
    return float(pl) if pl.ndim == 0 else pl


def rma_av_los_pathloss_db(d3d_m, h_ut_m: float, fc_hz: float) -> np.ndarray | float:
    """Rural-macro aerial LoS pathloss; slope flattens to 20 at height."""
    d = np.asarray(d3d_m, dtype=float)
    slope = max(23.9 - 1.8 * np.log10(h_ut_m), 20.0)
    pl = slope * np.log10(d) + 20.0 * np.log10(40.0 * np.pi * fc_hz / 3e9)
    return float(pl) if pl.ndim == 0 else pl


def terrestrial_pathloss_db(
    d2d_m, h_ut_m: float, profile: str, fc_hz: float, bs_height_m: float
) -> np.ndarray | float:
    """LoS pathloss between a macro site and an aerial user.

    Above roughly 100 m the aerial channel is line-of-sight with certainty in
    both environment profiles, so no probabilistic branch is taken.
    """
    if not MIN_UT_HEIGHT_M < h_ut_m <= MAX_UT_HEIGHT_M:
        raise ValueError(
            f"user height {h_ut_m} m outside aerial validity band "
            f"({MIN_UT_HEIGHT_M}, {MAX_UT_HEIGHT_M}] m"
        )
    d2d = np.asarray(d2d_m, dtype=float)
    d3d = np.sqrt(d2d**2 + (h_ut_m - bs_height_m) ** 2)
    if profile == URBAN_MACRO:
        return uma_av_los_pathloss_db(d3d, fc_hz)
    if profile == RURAL_MACRO:
        return rma_av_los_pathloss_db(d3d, h_ut_m, fc_hz)
    raise ValueError(f"unknown env profile: {profile}")


def fspl_db(distance_m, fc_hz: float) -> np.ndarray | float:
    """Free-space path loss, 20*log10(4*pi*d*f/c)."""
    d = np.asarray(distance_m, dtype=float)
    pl = 20.0 * np.log10(4.0 * np.pi * d * fc_hz / SPEED_OF_LIGHT)
    return float(pl) if pl.ndim == 0 else pl


def geo_beam_gain_db(theta_off_deg, params: GeoRadioParams) -> np.ndarray | float:
    """Main-lobe beam gain with parabolic (quadratic-in-angle) roll-off.

    Rolls off by 12 dB at the configured half-width angle.
    """
    t = np.asarray(theta_off_deg, dtype=float)
    g = params.max_beam_gain_dbi - 12.0 * (t / params.beam_3db_halfwidth_deg) ** 2
    return float(g) if g.ndim == 0 else g


def noise_power_dbm(noise_psd_dbm_hz: float, bandwidth_hz: float) -> float:
    return noise_psd_dbm_hz + 10.0 * np.log10(bandwidth_hz)


def best_sector_rx_dbm(
    site: MbsSite, targets_xyz: np.ndarray, params: TerrestrialRadioParams
) -> np.ndarray:
    """Received power (dBm) from a site's best sector at each target point.

    The serving sector of a site is the one with the maximum composite gain
    toward the target; interferers are evaluated the same way.
    """
    targets = np.asarray(targets_xyz, dtype=float)
    d2d = np.hypot(
        targets[..., 0] - site.x_m, targets[..., 1] - site.y_m
    )
    h_ut = float(targets.reshape(-1, 3)[0, 2])
    pl = terrestrial_pathloss_db(
        d2d, h_ut, site.env_profile, params.carrier_freq_hz, site.height_m
    )
    best_gain = None
    for az in site.sector_azimuths_deg:
        theta, phi = elevation_azimuth(site.position, targets, az, params.downtilt_deg)
        g = array_gain(theta, phi, params)
        best_gain = g if best_gain is None else np.maximum(best_gain, g)
    return params.tx_power_dbm + best_gain + params.uav_rx_gain_dbi - pl


def sinr_mbs_db(g: GridIndex, mbs_id: int, scenario) -> float:
    """SINR (dB) from one macro site at a grid cell, all others interfering.

    ``mbs_id`` is 1-based. Every site contributes through its own
    maximum-gain sector; the two tiers share no spectrum so the satellite
    does not interfere.
    """
    sites = scenario.sites
    if not 1 <= mbs_id <= len(sites):
        raise ValueError(f"invalid MBS id {mbs_id}")
    target = grid_center(g, scenario.grid)
    rx = np.array(
        [best_sector_rx_dbm(s, target, scenario.terrestrial) for s in sites]
    )
    lin = 10.0 ** (rx / 10.0)
    noise_mw = 10.0 ** (
        noise_power_dbm(
            scenario.terrestrial.noise_psd_dbm_hz, scenario.terrestrial.bandwidth_hz
        )
        / 10.0
    )
    sig = lin[mbs_id - 1]
    interf = lin.sum() - sig
    return float(10.0 * np.log10(sig / (interf + noise_mw)))


def snr_geo_db(g: GridIndex, scenario) -> float:
    """Satellite SNR (dB) at a grid cell center."""
    frame = LocalFrame(scenario.grid.origin)
    target_ecef = frame.to_ecef(grid_center(g, scenario.grid))
    return _snr_geo_at_ecef(target_ecef, scenario.geo, scenario.terrestrial.noise_psd_dbm_hz)


def _snr_geo_at_ecef(
    target_ecef: np.ndarray, geo: GeoRadioParams, noise_psd_dbm_hz: float
) -> np.ndarray | float:
    sat = geo.sat_position()
    beam = geodetic_to_ecef(geo.beam_center)
    theta_off = off_boresight_angle(sat, beam, target_ecef)
    dist = np.linalg.norm(np.asarray(target_ecef, dtype=float) - sat.as_array(), axis=-1)
    total_loss = (
        fspl_db(dist, geo.carrier_freq_hz)
        + geo.atmospheric_loss_db
        + geo.scintillation_loss_db
        + geo.polarization_loss_db
    )
    snr = (
        geo.tx_power_dbm
        + geo_beam_gain_db(theta_off, geo)
        - total_loss
        - noise_power_dbm(noise_psd_dbm_hz, geo.bandwidth_hz)
    )
    return snr


@dataclass
class CoverageMap:
    """Per-cell link summary: best macro server, its SINR, satellite SNR.

    ``best_mbs`` holds 1-based site ids. A terrestrial hole is a cell whose
    best SINR falls below the threshold; a global hole additionally lacks
    satellite signal.
    """

    threshold_db: float
    best_mbs: np.ndarray  # (N, N) int, 1-based
    best_sinr_db: np.ndarray  # (N, N) float
    geo_snr_db: np.ndarray  # (N, N) float
    terrestrial_hole: np.ndarray  # (N, N) bool
    global_hole: np.ndarray  # (N, N) bool

    def content_hash(self) -> str:
        h = hashlib.sha256()
        for a in (self.best_mbs, self.best_sinr_db, self.geo_snr_db):
            h.update(np.ascontiguousarray(a).tobytes())
        h.update(np.float64(self.threshold_db).tobytes())
        return h.hexdigest()

    def to_records(self) -> list[dict]:
        n = self.best_mbs.shape[0]
        out = []
        for row in range(n):
            for col in range(n):
                out.append(
                    {
                        "row": row,
                        "col": col,
                        "best_mbs": int(self.best_mbs[row, col]),
                        "best_sinr_db": float(self.best_sinr_db[row, col]),
                        "geo_snr_db": float(self.geo_snr_db[row, col]),
                        "terrestrial_hole": bool(self.terrestrial_hole[row, col]),
                        "global_hole": bool(self.global_hole[row, col]),
                    }
                )
        return out

    def to_csv(self, seed: int | None = None, format_version: int = 1) -> str:
        buf = io.StringIO()
        buf.write(f"# format_version={format_version} seed={seed}\n")
        buf.write("row,col,best_mbs,best_sinr_db,geo_snr_db,terrestrial_hole,global_hole\n")
        for r in self.to_records():
            buf.write(
                f"{r['row']},{r['col']},{r['best_mbs']},{r['best_sinr_db']!r},"
                f"{r['geo_snr_db']!r},{int(r['terrestrial_hole'])},{int(r['global_hole'])}\n"
            )
        return buf.getvalue()


def build_coverage_map(
    grid: GridSpec,
    sites: list[MbsSite],
    terrestrial: TerrestrialRadioParams,
    geo: GeoRadioParams,
    threshold_db: float,
) -> CoverageMap:
    """Evaluate every cell's link budget and classify holes.

    Deterministic given its inputs; ties on best SINR break toward the
    lowest site id.
    """
    if not sites:
        raise ValueError("at least one MBS site is required")
    centers = all_grid_centers(grid)  # (N, N, 3)
    rx = np.stack(
        [best_sector_rx_dbm(s, centers, terrestrial) for s in sites]
    )  # (B, N, N)
    lin = 10.0 ** (rx / 10.0)
    noise_mw = 10.0 ** (
        noise_power_dbm(terrestrial.noise_psd_dbm_hz, terrestrial.bandwidth_hz) / 10.0
    )
    total = lin.sum(axis=0)
    sinr_db = 10.0 * np.log10(lin / (total - lin + noise_mw))
    best_idx = np.argmax(sinr_db, axis=0)  # first max wins: lowest id on ties
    n = grid.cells_per_side
    rows, cols = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    best_sinr = sinr_db[best_idx, rows, cols]

    frame = LocalFrame(grid.origin)
    geo_snr = _snr_geo_at_ecef(
        frame.to_ecef(centers), geo, terrestrial.noise_psd_dbm_hz
    )

    terr_hole = best_sinr < threshold_db
    glob_hole = terr_hole & (geo_snr < threshold_db)
    return CoverageMap(
        threshold_db=threshold_db,
        best_mbs=(best_idx + 1).astype(int),
        best_sinr_db=best_sinr,
        geo_snr_db=np.asarray(geo_snr, dtype=float),
        terrestrial_hole=terr_hole,
        global_hole=glob_hole,
    )
