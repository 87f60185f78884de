"""Default configuration and merge logic for the command-line tools.

The config is a nested dict with namespaced sections mirroring the domain
types; CLI flags override file values, and the merged effective config is
persisted with every run so any artifact can be regenerated.
"""

from __future__ import annotations

import copy
import json
from pathlib import Path

DEFAULT_CONFIG: dict = {
    "format_version": 1,
    "seed": 0,
    "grid": {
        "area_m": 3000.0,
        "cells_per_side": 25,
        "uav_altitude_m": 150.0,
        "origin": {"latitude_deg": 45.4, "longitude_deg": -75.7, "altitude_m": 0.0},
    },
    "deployment": {
        "num_mbs": 10,
        "min_separation_m": 500.0,
        "max_attempts": 100000,
    },
    "terrestrial": {
        "carrier_freq_hz": 2.545e9,
        "tx_power_dbm": 43.0,
        "bandwidth_hz": 10e6,
        "noise_psd_dbm_hz": -173.9,
        "array_v": 8,
        "array_h": 8,
        "element_spacing_wl": 0.5,
        "downtilt_deg": 10.0,
        "element_max_gain_dbi": 8.0,
        "uav_rx_gain_dbi": 0.0,
    },
    "geo": {
        "carrier_freq_hz": 2.1e9,
        "tx_power_dbm": 30.0,
        "bandwidth_hz": 400e3,
        "max_beam_gain_dbi": 51.0,
        "beam_3db_halfwidth_deg": 4.0,
        "atmospheric_loss_db": 0.5,
        "scintillation_loss_db": 0.5,
        "polarization_loss_db": 3.0,
        "sat_longitude_deg": -111.1,
        "sat_altitude_m": 35786000.0,
        "beam_center": {"latitude_deg": 50.0, "longitude_deg": -70.0, "altitude_m": 0.0},
    },
    "radio": {"sinr_threshold_db": -1.0},
    "mdp": {
        "weights": [0.4, 0.2, 0.4],
        "start": [0, 0],
        "end": [24, 24],
        "geo_enabled": True,
        "hole_semantics": "resolved",
    },
    "energy": {
        "capacity_j": 500e3,
        "reserve_j": 50e3,
        "cruise_speed_mps": 30.0,
        "climb_distance_m": 150.0,
        "rotor": {
            "blade_profile_power_w": 79.86,
            "induced_power_w": 88.63,
            "tip_speed_mps": 120.0,
            "mean_rotor_induced_velocity_mps": 4.03,
            "fuselage_drag_ratio": 0.6,
            "air_density_kg_m3": 1.225,
            "rotor_solidity": 0.05,
            "rotor_disc_area_m2": 0.503,
        },
    },
    "training": {
        "discount": 1.0,
        "soft_update_rate": 0.005,
        "learning_rate": 1e-3,
        "epsilon_start": 1.0,
        "epsilon_min": 0.1,
        "epsilon_decay": 0.999,
        "epsilon_schedule": "episode",
        "episodes": 10000,
        "step_cap": 1000,
        "batch_size": 64,
        "buffer_capacity": 50000,
        "hidden": [128, 128],
        "seed": 0,
    },
}


def deep_merge(base: dict, override: dict) -> dict:
    """Recursive dict merge; override wins, nested dicts merge key-wise."""
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> dict:
    """Defaults <- optional config file <- optional overrides."""
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if path is not None:
        file_cfg = json.loads(Path(path).read_text())
        cfg = deep_merge(cfg, file_cfg)
    if overrides:
        cfg = deep_merge(cfg, overrides)
    # END defaults to the far corner of whatever grid size is configured.
    n = cfg["grid"]["cells_per_side"]
    end = cfg["mdp"]["end"]
    if end[0] >= n or end[1] >= n:
        cfg["mdp"]["end"] = [n - 1, n - 1]
    return cfg
