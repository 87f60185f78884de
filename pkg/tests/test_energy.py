import math

import numpy as np
import pytest

from skyplan.energy import (
    EnergyBudget,
    MissionInfeasibleError,
    PropulsionParams,
    REFERENCE_ROTOR,
    available_energy_j,
    propulsion_power_w,
    trip_energy_j,
)


def independent_power_terms(v: float, p: PropulsionParams = REFERENCE_ROTOR):
    """Term-by-term oracle for the rotary-wing power model."""
    blade = p.blade_profile_power_w * (1.0 + 3.0 * v**2 / p.tip_speed_mps**2)
    v0 = p.mean_rotor_induced_velocity_mps
    induced = p.induced_power_w * math.sqrt(
        math.sqrt(1.0 + v**4 / (4.0 * v0**4)) - v**2 / (2.0 * v0**2)
    )
    parasite = (
        0.5
        * p.fuselage_drag_ratio
        * p.air_density_kg_m3
        * p.rotor_solidity
        * p.rotor_disc_area_m2
        * v**3
    )
    return blade, induced, parasite


def test_hover_power_is_blade_plus_induced():
    assert propulsion_power_w(0.0) == pytest.approx(79.86 + 88.63, abs=1e-9)


def test_power_at_30mps_term_by_term():
    blade, induced, parasite = independent_power_terms(30.0)
    assert blade == pytest.approx(94.8338, abs=1e-3)
    assert parasite == pytest.approx(249.5509, abs=1e-3)
    total = blade + induced + parasite
    assert total == pytest.approx(356.2887, abs=1e-3)
    assert propulsion_power_w(30.0) == pytest.approx(total, abs=1e-9)


def test_power_matches_oracle_across_speeds():
    for v in (0.0, 1.0, 5.0, 10.0, 18.0, 30.0, 45.0, 60.0):
        assert propulsion_power_w(v) == pytest.approx(
            sum(independent_power_terms(v)), abs=1e-9
        )


def test_power_parasite_cubic_asymptote():
    # P(2v)/P(v) -> 8 as the cubic parasite term dominates.
    ratio = propulsion_power_w(400.0) / propulsion_power_w(200.0)
    assert ratio == pytest.approx(8.0, rel=0.01)


def test_power_non_monotone_with_interior_minimum():
    vs = np.linspace(5.0, 25.0, 81)
    powers = propulsion_power_w(vs)
    v_star = vs[int(np.argmin(powers))]
    p_star = powers.min()
    assert 5.0 < v_star < 25.0
    assert p_star < propulsion_power_w(0.0)
    assert p_star < propulsion_power_w(60.0)


def test_power_rejects_negative_speed():
    with pytest.raises(ValueError):
        propulsion_power_w(-1.0)


def test_trip_energy_zero_distance():
    assert trip_energy_j(30.0, 0.0) == 0.0


def test_trip_energy_reference_leg():
    # Power x time for the 24-diagonal corner-to-corner route at 30 m/s.
    e = trip_energy_j(30.0, 4072.94)
    assert e == pytest.approx(356.2887 * 4072.94 / 30.0, rel=1e-6)
    assert e == pytest.approx(4.837e4, rel=1e-3)


def test_trip_energy_additive_in_distance():
    e1 = trip_energy_j(30.0, 1500.0)
    e2 = trip_energy_j(30.0, 2572.94)
    assert e1 + e2 == pytest.approx(trip_energy_j(30.0, 4072.94), rel=1e-12)


def test_trip_energy_per_meter_independent_of_distance():
    r1 = trip_energy_j(20.0, 100.0) / 100.0
    r2 = trip_energy_j(20.0, 9000.0) / 9000.0
    assert r1 == pytest.approx(r2, rel=1e-12)


def test_trip_energy_rejects_zero_speed_with_distance():
    with pytest.raises(ValueError):
        trip_energy_j(0.0, 10.0)


def test_available_energy_reference_budget():
    b = EnergyBudget(capacity_j=500e3, reserve_j=50e3, cruise_speed_mps=30.0,
                     climb_distance_m=150.0)
    expected = 500e3 - 50e3 - 2.0 * 356.2887 * 150.0 / 30.0
    assert available_energy_j(b) == pytest.approx(expected, rel=1e-6)


def test_available_energy_degenerate_no_reserve_no_climb():
    b = EnergyBudget(capacity_j=100e3, reserve_j=0.0, cruise_speed_mps=30.0,
                     climb_distance_m=0.0)
    assert available_energy_j(b) == pytest.approx(100e3, abs=1e-9)


def test_available_energy_boundary_infeasible():
    climb = trip_energy_j(30.0, 150.0)
    b = EnergyBudget(
        capacity_j=2.0 * climb + 50e3,
        reserve_j=50e3,
        cruise_speed_mps=30.0,
        climb_distance_m=150.0,
    )
    with pytest.raises(MissionInfeasibleError):
        available_energy_j(b)


def test_budget_validation():
    with pytest.raises(ValueError):
        EnergyBudget(capacity_j=10.0, reserve_j=10.0)
    with pytest.raises(ValueError):
        EnergyBudget(cruise_speed_mps=0.0)
    with pytest.raises(ValueError):
        PropulsionParams(blade_profile_power_w=0.0)
