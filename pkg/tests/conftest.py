import numpy as np
import pytest

from skyplan.channel import (
    CoverageMap,
    GeoRadioParams,
    MbsSite,
    TerrestrialRadioParams,
    URBAN_MACRO,
)
from skyplan.config import load_config
from skyplan.energy import EnergyBudget, PropulsionParams
from skyplan.geometry import GeodeticPoint, GridIndex, GridSpec
from skyplan.scenario import Scenario, generate_scenario


ORIGIN = GeodeticPoint(45.4, -75.7, 0.0)


def desk_config(cells_per_side: int = 10, **overrides) -> dict:
    merged = {"grid": {"cells_per_side": cells_per_side}}
    merged.update(overrides)
    return load_config(overrides=merged)


@pytest.fixture(scope="session")
def desk_scenario():
    """10x10 grid over the default 3 km region with 10 random sites."""
    return generate_scenario(0, desk_config(10))


def make_toy_scenario(
    n: int = 5,
    weights=(0.4, 0.2, 0.4),
    terrestrial_hole_cells=(),
    geo_snr_db: float = 4.0,
    covered_sinr_db: float = 10.0,
    hole_sinr_db: float = -10.0,
    best_mbs=None,
    num_sites: int = 1,
    threshold_db: float = -1.0,
    geo_enabled: bool = True,
    start=(0, 0),
    end=None,
    hole_semantics: str = "resolved",
    capacity_j: float = 5e5,
    reserve_j: float = 5e4,
) -> Scenario:
    """Scenario with hand-authored coverage, bypassing the radio physics.

    Lets tests pin exact hole layouts and server ids; the coverage map is
    attached directly instead of being rebuilt from site geometry.
    """
    grid = GridSpec(
        area_m=3000.0, cells_per_side=n, uav_altitude_m=150.0, origin=ORIGIN
    )
    end = end if end is not None else (n - 1, n - 1)
    sites = [
        MbsSite(
            x_m=1500.0 + 40.0 * i,
            y_m=1500.0,
            height_m=25.0,
            sector_rotation_deg=0.0,
            env_profile=URBAN_MACRO,
        )
        for i in range(num_sites)
    ]
    best_sinr = np.full((n, n), covered_sinr_db, dtype=float)
    for r, c in terrestrial_hole_cells:
        best_sinr[r, c] = hole_sinr_db
    if best_mbs is None:
        best_mbs_arr = np.ones((n, n), dtype=int)
    else:
        best_mbs_arr = np.asarray(best_mbs, dtype=int)
    geo_arr = np.full((n, n), geo_snr_db, dtype=float)
    terr_hole = best_sinr < threshold_db
    coverage = CoverageMap(
        threshold_db=threshold_db,
        best_mbs=best_mbs_arr,
        best_sinr_db=best_sinr,
        geo_snr_db=geo_arr,
        terrestrial_hole=terr_hole,
        global_hole=terr_hole & (geo_arr < threshold_db),
    )
    return Scenario(
        grid=grid,
        sites=sites,
        terrestrial=TerrestrialRadioParams(),
        geo=GeoRadioParams(),
        threshold_db=threshold_db,
        weights=tuple(weights),
        start=GridIndex(*start),
        end=GridIndex(*end),
        energy=EnergyBudget(capacity_j=capacity_j, reserve_j=reserve_j),
        rotor=PropulsionParams(),
        geo_enabled=geo_enabled,
        hole_semantics=hole_semantics,
        seed=0,
        coverage=coverage,
    )
