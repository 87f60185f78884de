"""Rotary-wing propulsion power and mission energy budget."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PropulsionParams:
    """Rotary-wing power model coefficients.

    blade_profile_power_w and induced_power_w are the hover components;
    tip_speed, mean induced velocity, fuselage drag ratio, air density,
    rotor solidity and disc area shape the speed dependence.
    """

    blade_profile_power_w: float = 79.86
    induced_power_w: float = 88.63
    tip_speed_mps: float = 120.0
    mean_rotor_induced_velocity_mps: float = 4.03
    fuselage_drag_ratio: float = 0.6
    air_density_kg_m3: float = 1.225
    rotor_solidity: float = 0.05
    rotor_disc_area_m2: float = 0.503

    def __post_init__(self) -> None:
        for name, v in self.__dict__.items():
            if not v > 0:
                raise ValueError(f"{name} must be strictly positive, got {v}")


REFERENCE_ROTOR = PropulsionParams()


@dataclass(frozen=True)
class EnergyBudget:
    """On-board energy capacity, reserve, and cruise profile."""

    capacity_j: float = 500e3
    reserve_j: float = 50e3
    cruise_speed_mps: float = 30.0
    climb_distance_m: float = 150.0

    def __post_init__(self) -> None:
        if not self.capacity_j > self.reserve_j >= 0:
            raise ValueError("need capacity > reserve >= 0")
        if self.cruise_speed_mps <= 0:
            raise ValueError("cruise speed must be positive")
        if self.climb_distance_m < 0:
            raise ValueError("climb distance must be nonnegative")


class MissionInfeasibleError(ValueError):
    """Raised when the energy budget cannot cover even the vertical legs."""


def propulsion_power_w(v_mps, p: PropulsionParams = REFERENCE_ROTOR) -> np.ndarray | float:
    """Level-flight propulsion power at speed v (W).

    Sum of blade profile, induced, and parasite terms; reduces to the hover
    power (blade + induced) at v = 0. Non-monotonic in v with an interior
    minimum.
    """
    v = np.asarray(v_mps, dtype=float)
    if np.any(v < 0):
        raise ValueError("speed must be nonnegative")
    v0 = p.mean_rotor_induced_velocity_mps
    blade = p.blade_profile_power_w * (1.0 + 3.0 * v**2 / p.tip_speed_mps**2)
    induced = p.induced_power_w * np.sqrt(
        np.sqrt(1.0 + v**4 / (4.0 * v0**4)) - v**2 / (2.0 * v0**2)
    )
    parasite = (
        0.5
        * p.fuselage_drag_ratio
        * p.air_density_kg_m3
        * p.rotor_solidity
        * p.rotor_disc_area_m2
        * v**3
    )
    total = blade + induced + parasite
    return float(total) if total.ndim == 0 else total


def trip_energy_j(
    v_mps: float, distance_m: float, p: PropulsionParams = REFERENCE_ROTOR
) -> float:
    """Energy to fly ``distance_m`` at constant speed v: power times time."""
    if distance_m < 0:
        raise ValueError("distance must be nonnegative")
    if distance_m == 0:
        return 0.0
    if v_mps <= 0:
        raise ValueError("positive speed required to cover a distance")
    return propulsion_power_w(v_mps, p) * distance_m / v_mps


def available_energy_j(
    b: EnergyBudget, p: PropulsionParams = REFERENCE_ROTOR
) -> float:
    """Energy left for the cruise legs after reserve and both vertical legs.

    Raises MissionInfeasibleError when nothing remains.
    """
    e_a = b.capacity_j - b.reserve_j - 2.0 * trip_energy_j(
        b.cruise_speed_mps, b.climb_distance_m, p
    )
    if e_a <= 0:
        raise MissionInfeasibleError(
            f"available energy {e_a:.1f} J is not positive; mission infeasible"
        )
    return e_a
