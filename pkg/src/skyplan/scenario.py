"""Frozen world descriptions: random macro-site deployment and serialization.

A Scenario pins everything the planner and simulator need: the grid, the
macro sites, both radio configurations, the mission endpoints, the reward
weights, the energy budget, and the precomputed coverage map. Scenarios are
deterministic functions of a seed and a config.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import (
    RURAL_MACRO,
    URBAN_MACRO,
    CoverageMap,
    GeoRadioParams,
    MbsSite,
    TerrestrialRadioParams,
    build_coverage_map,
)
from .energy import EnergyBudget, PropulsionParams
from .geometry import GeodeticPoint, GridIndex, GridSpec

FORMAT_VERSION = 1

HOLE_SEMANTICS_RESOLVED = "resolved"
HOLE_SEMANTICS_GRID = "grid"

URBAN_BS_HEIGHT_M = 25.0
RURAL_BS_HEIGHT_M = 35.0


class PlacementError(RuntimeError):
    """Site placement failed within the retry budget."""


@dataclass
class Scenario:
    grid: GridSpec
    sites: list[MbsSite]
    terrestrial: TerrestrialRadioParams
    geo: GeoRadioParams
    threshold_db: float
    weights: tuple[float, float, float]
    start: GridIndex
    end: GridIndex
    energy: EnergyBudget
    rotor: PropulsionParams
    geo_enabled: bool
    hole_semantics: str
    seed: int
    coverage: CoverageMap = field(repr=False, default=None)

    def __post_init__(self) -> None:
        if self.start == self.end:
            raise ValueError("start and end grids must differ")
        if not self.start.in_bounds(self.grid) or not self.end.in_bounds(self.grid):
            raise ValueError("start/end out of bounds")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        if not self.sites:
            raise ValueError("need at least one MBS site")
        if self.hole_semantics not in (HOLE_SEMANTICS_RESOLVED, HOLE_SEMANTICS_GRID):
            raise ValueError(f"unknown hole semantics: {self.hole_semantics}")

    @property
    def num_mbs(self) -> int:
        return len(self.sites)

    @property
    def hole_category(self) -> int:
        return self.num_mbs + 1

    @property
    def geo_category(self) -> int:
        return self.num_mbs + 2

    def rebuild_coverage(self) -> CoverageMap:
        return build_coverage_map(
            self.grid, self.sites, self.terrestrial, self.geo, self.threshold_db
        )


def place_sites_ppp(
    rng: np.random.Generator,
    num_sites: int,
    area_m: float,
    min_separation_m: float,
    max_attempts: int = 100_000,
) -> list[MbsSite]:
    """Uniform placement with a hard minimum separation, by rejection.

    Candidates are drawn uniformly over the square; any candidate closer than
    the separation distance to an accepted site is discarded. Heights follow
    the site's environment profile (urban 25 m, rural 35 m, equally likely)
    and each site gets a random sector rotation.
    """
    accepted: list[np.ndarray] = []
    attempts = 0
    while len(accepted) < num_sites:
        attempts += 1
        if attempts > max_attempts:
            raise PlacementError(
                f"placed only {len(accepted)}/{num_sites} sites in "
                f"{max_attempts} attempts (separation {min_separation_m} m)"
            )
        cand = rng.uniform(0.0, area_m, size=2)
        if all(np.hypot(*(cand - p)) >= min_separation_m for p in accepted):
            accepted.append(cand)
    sites = []
    for xy in accepted:
        rural = bool(rng.integers(0, 2))
        rotation = float(rng.uniform(0.0, 360.0))
        sites.append(
            MbsSite(
                x_m=float(xy[0]),
                y_m=float(xy[1]),
                height_m=RURAL_BS_HEIGHT_M if rural else URBAN_BS_HEIGHT_M,
                sector_rotation_deg=rotation,
                env_profile=RURAL_MACRO if rural else URBAN_MACRO,
            )
        )
    return sites


def generate_scenario(seed: int, config: dict) -> Scenario:
    """Build a deterministic Scenario from a seed and a merged config dict.

    See config.DEFAULT_CONFIG for the full key set.
    """
    rng = np.random.default_rng(seed)
    gc = config["grid"]
    origin = GeodeticPoint(**gc["origin"])
    grid = GridSpec(
        area_m=float(gc["area_m"]),
        cells_per_side=int(gc["cells_per_side"]),
        uav_altitude_m=float(gc["uav_altitude_m"]),
        origin=origin,
    )
    dep = config["deployment"]
    sites = place_sites_ppp(
        rng,
        num_sites=int(dep["num_mbs"]),
        area_m=grid.area_m,
        min_separation_m=float(dep["min_separation_m"]),
        max_attempts=int(dep.get("max_attempts", 100_000)),
    )
    terrestrial = TerrestrialRadioParams(**config["terrestrial"])
    geo_cfg = dict(config["geo"])
    geo_cfg["beam_center"] = GeodeticPoint(**geo_cfg["beam_center"])
    geo = GeoRadioParams(**geo_cfg)
    mdp = config["mdp"]
    energy_cfg = dict(config["energy"])
    rotor = PropulsionParams(**energy_cfg.pop("rotor"))
    if "climb_distance_m" not in energy_cfg:
        energy_cfg["climb_distance_m"] = grid.uav_altitude_m
    budget = EnergyBudget(**energy_cfg)
    scenario = Scenario(
        grid=grid,
        sites=sites,
        terrestrial=terrestrial,
        geo=geo,
        threshold_db=float(config["radio"]["sinr_threshold_db"]),
        weights=tuple(float(w) for w in mdp["weights"]),
        start=GridIndex(*mdp["start"]),
        end=GridIndex(*mdp["end"]),
        energy=budget,
        rotor=rotor,
        geo_enabled=bool(mdp["geo_enabled"]),
        hole_semantics=str(mdp.get("hole_semantics", HOLE_SEMANTICS_RESOLVED)),
        seed=int(seed),
        coverage=None,
    )
    scenario.coverage = scenario.rebuild_coverage()
    return scenario


def scenario_to_dict(s: Scenario) -> dict:
    """Lossless JSON-compatible representation, coverage hash included."""
    return {
        "format_version": FORMAT_VERSION,
        "seed": s.seed,
        "grid": {
            "area_m": s.grid.area_m,
            "cells_per_side": s.grid.cells_per_side,
            "uav_altitude_m": s.grid.uav_altitude_m,
            "origin": {
                "latitude_deg": s.grid.origin.latitude_deg,
                "longitude_deg": s.grid.origin.longitude_deg,
                "altitude_m": s.grid.origin.altitude_m,
            },
        },
        "sites": [
            {
                "x_m": site.x_m,
                "y_m": site.y_m,
                "height_m": site.height_m,
                "sector_rotation_deg": site.sector_rotation_deg,
                "env_profile": site.env_profile,
            }
            for site in s.sites
        ],
        "terrestrial": {
            "carrier_freq_hz": s.terrestrial.carrier_freq_hz,
            "tx_power_dbm": s.terrestrial.tx_power_dbm,
            "bandwidth_hz": s.terrestrial.bandwidth_hz,
            "noise_psd_dbm_hz": s.terrestrial.noise_psd_dbm_hz,
            "array_v": s.terrestrial.array_v,
            "array_h": s.terrestrial.array_h,
            "element_spacing_wl": s.terrestrial.element_spacing_wl,
            "downtilt_deg": s.terrestrial.downtilt_deg,
            "element_max_gain_dbi": s.terrestrial.element_max_gain_dbi,
            "uav_rx_gain_dbi": s.terrestrial.uav_rx_gain_dbi,
        },
        "geo": {
            "carrier_freq_hz": s.geo.carrier_freq_hz,
            "tx_power_dbm": s.geo.tx_power_dbm,
            "bandwidth_hz": s.geo.bandwidth_hz,
            "max_beam_gain_dbi": s.geo.max_beam_gain_dbi,
            "beam_3db_halfwidth_deg": s.geo.beam_3db_halfwidth_deg,
            "atmospheric_loss_db": s.geo.atmospheric_loss_db,
            "scintillation_loss_db": s.geo.scintillation_loss_db,
            "polarization_loss_db": s.geo.polarization_loss_db,
            "sat_longitude_deg": s.geo.sat_longitude_deg,
            "sat_altitude_m": s.geo.sat_altitude_m,
            "beam_center": {
                "latitude_deg": s.geo.beam_center.latitude_deg,
                "longitude_deg": s.geo.beam_center.longitude_deg,
                "altitude_m": s.geo.beam_center.altitude_m,
            },
        },
        "radio": {"sinr_threshold_db": s.threshold_db},
        "mdp": {
            "weights": list(s.weights),
            "start": [s.start.row, s.start.col],
            "end": [s.end.row, s.end.col],
            "geo_enabled": s.geo_enabled,
            "hole_semantics": s.hole_semantics,
        },
        "energy": {
            "capacity_j": s.energy.capacity_j,
            "reserve_j": s.energy.reserve_j,
            "cruise_speed_mps": s.energy.cruise_speed_mps,
            "climb_distance_m": s.energy.climb_distance_m,
            "rotor": {
                "blade_profile_power_w": s.rotor.blade_profile_power_w,
                "induced_power_w": s.rotor.induced_power_w,
                "tip_speed_mps": s.rotor.tip_speed_mps,
                "mean_rotor_induced_velocity_mps": s.rotor.mean_rotor_induced_velocity_mps,
                "fuselage_drag_ratio": s.rotor.fuselage_drag_ratio,
                "air_density_kg_m3": s.rotor.air_density_kg_m3,
                "rotor_solidity": s.rotor.rotor_solidity,
                "rotor_disc_area_m2": s.rotor.rotor_disc_area_m2,
            },
        },
        "coverage_hash": s.coverage.content_hash(),
    }


def scenario_from_dict(d: dict) -> Scenario:
    """Rebuild a Scenario; the coverage map is recomputed and hash-checked."""
    if d.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported scenario format version: {d.get('format_version')}")
    gc = d["grid"]
    grid = GridSpec(
        area_m=gc["area_m"],
        cells_per_side=gc["cells_per_side"],
        uav_altitude_m=gc["uav_altitude_m"],
        origin=GeodeticPoint(**gc["origin"]),
    )
    sites = [MbsSite(**site) for site in d["sites"]]
    geo_cfg = dict(d["geo"])
    geo_cfg["beam_center"] = GeodeticPoint(**geo_cfg["beam_center"])
    energy_cfg = dict(d["energy"])
    rotor = PropulsionParams(**energy_cfg.pop("rotor"))
    mdp = d["mdp"]
    scenario = Scenario(
        grid=grid,
        sites=sites,
        terrestrial=TerrestrialRadioParams(**d["terrestrial"]),
        geo=GeoRadioParams(**geo_cfg),
        threshold_db=d["radio"]["sinr_threshold_db"],
        weights=tuple(mdp["weights"]),
        start=GridIndex(*mdp["start"]),
        end=GridIndex(*mdp["end"]),
        energy=EnergyBudget(**energy_cfg),
        rotor=rotor,
        geo_enabled=mdp["geo_enabled"],
        hole_semantics=mdp["hole_semantics"],
        seed=d["seed"],
        coverage=None,
    )
    scenario.coverage = scenario.rebuild_coverage()
    stored = d.get("coverage_hash")
    if stored is not None and stored != scenario.coverage.content_hash():
        raise ValueError(
            "coverage hash mismatch: scenario file is inconsistent with the "
            "rebuilt coverage map"
        )
    return scenario


def scenario_to_json(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2, sort_keys=True)


def scenario_from_json(text: str) -> Scenario:
    return scenario_from_dict(json.loads(text))


def with_geo_enabled(s: Scenario, enabled: bool) -> Scenario:
    """Copy of the scenario with the satellite tier toggled."""
    return replace(s, geo_enabled=enabled)
