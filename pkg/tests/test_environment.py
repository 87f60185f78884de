import math

import numpy as np
import pytest

from skyplan.energy import trip_energy_j
from skyplan.environment import (
    DIRECTION_DELTAS,
    DONE_ENERGY,
    DONE_REACHED_END,
    DONE_STEP_CAP,
    GEO,
    TERRESTRIAL,
    MdpState,
    PlannerAction,
    PlanningEnv,
    energy_shaping,
    handover_cost,
    normalized_distance_to_end,
    resolve_association,
    transition,
    valid_action_mask,
    valid_actions,
)
from skyplan.geometry import GridIndex, GridSpec
from skyplan.scenario import (
    generate_scenario,
    scenario_from_json,
    scenario_to_json,
)

from conftest import ORIGIN, desk_config, make_toy_scenario


# ------------------------------------------------------------ actions
def test_action_encoding_bijective():
    seen = set()
    for m in range(1, 9):
        for c in (0, 1):
            a = PlannerAction(m, c)
            assert 0 <= a.index < 16
            seen.add(a.index)
            back = PlannerAction.from_index(a.index)
            assert back == a
    assert len(seen) == 16


def test_action_validation():
    with pytest.raises(ValueError):
        PlannerAction(0, 0)
    with pytest.raises(ValueError):
        PlannerAction(9, 0)
    with pytest.raises(ValueError):
        PlannerAction(1, 2)
    with pytest.raises(ValueError):
        PlannerAction.from_index(16)


def test_valid_action_counts():
    spec = GridSpec(area_m=3000.0, cells_per_side=5, uav_altitude_m=150.0, origin=ORIGIN)
    interior = valid_actions(MdpState(GridIndex(2, 2), 0), spec)
    corner = valid_actions(MdpState(GridIndex(0, 0), 0), spec)
    edge = valid_actions(MdpState(GridIndex(0, 2), 0), spec)
    assert len(interior) == 16
    assert len(corner) == 6
    assert len(edge) == 10
    assert len(set(a.index for a in interior)) == 16


def test_valid_action_mask_matches_list():
    spec = GridSpec(area_m=3000.0, cells_per_side=4, uav_altitude_m=150.0, origin=ORIGIN)
    for r in range(4):
        for c in range(4):
            mask = valid_action_mask(GridIndex(r, c), spec)
            listed = {a.index for a in valid_actions(MdpState(GridIndex(r, c), 0), spec)}
            assert set(np.flatnonzero(mask)) == listed


# ------------------------------------------------------------ association
def test_resolve_geo_above_threshold():
    scn = make_toy_scenario(geo_snr_db=4.0)
    assert resolve_association(GridIndex(1, 1), GEO, scn) == scn.geo_category


def test_resolve_terrestrial_hole():
    scn = make_toy_scenario(terrestrial_hole_cells=[(1, 1)])
    assert resolve_association(GridIndex(1, 1), TERRESTRIAL, scn) == scn.hole_category


def test_resolve_covered_cell_uses_best_mbs():
    best = np.ones((5, 5), dtype=int)
    best[2, 3] = 4
    scn = make_toy_scenario(best_mbs=best, num_sites=4)
    assert resolve_association(GridIndex(2, 3), TERRESTRIAL, scn) == 4


def test_resolve_geo_below_threshold_is_hole():
    scn = make_toy_scenario(geo_snr_db=-5.0)
    assert resolve_association(GridIndex(0, 1), GEO, scn) == scn.hole_category


def test_resolve_with_geo_disabled_ignores_mode_bit():
    scn = make_toy_scenario(geo_enabled=False, terrestrial_hole_cells=[(1, 1)])
    assert resolve_association(GridIndex(0, 0), GEO, scn) == 1
    assert resolve_association(GridIndex(1, 1), GEO, scn) == scn.hole_category


# ------------------------------------------------------------ handover
@pytest.mark.parametrize(
    "prev,nxt,expected",
    [
        (3, 7, 1.0),     # MBS to different MBS
        (3, 3, 0.0),     # dwell on one MBS
        (12, 3, 1.0),    # GEO to MBS (num_mbs=10 -> geo=12)
        (3, 12, 5.0),    # MBS to GEO
        (12, 12, 0.5),   # stay on GEO
        (11, 12, -0.5),  # reconnect from hole to GEO
        (11, 3, -0.5),   # reconnect from hole to MBS
        (11, 11, 0.0),   # remain disconnected
        (3, 11, 0.0),    # drop into a hole
        (12, 11, 0.0),   # GEO into a hole
    ],
)
def test_handover_cost_table(prev, nxt, expected):
    assert handover_cost(prev, nxt, num_mbs=10) == expected


# ------------------------------------------------------------ shaping
def test_energy_shaping_reaching_end():
    scn = make_toy_scenario(n=5)
    assert energy_shaping(1, scn.end, scn) == pytest.approx(-1.0, abs=0)
    assert energy_shaping(5, scn.end, scn) == pytest.approx(-1.0 / math.sqrt(2.0), abs=0)


def test_energy_shaping_far_corner_is_minus_two():
    scn = make_toy_scenario(n=5, start=(0, 1), end=(4, 4))
    assert normalized_distance_to_end(GridIndex(0, 0), scn) == pytest.approx(1.0, abs=0)
    assert energy_shaping(2, GridIndex(0, 0), scn) == pytest.approx(-2.0, abs=0)


def test_energy_shaping_bounds():
    scn = make_toy_scenario(n=7, end=(3, 3))
    for r in range(7):
        for c in range(7):
            for m in (1, 5):
                xi = energy_shaping(m, GridIndex(r, c), scn)
                assert -2.0 <= xi <= -1.0 / math.sqrt(2.0)


# ------------------------------------------------------------ transitions
def test_step_covered_diagonal_no_handover():
    scn = make_toy_scenario(weights=(0.4, 0.2, 0.4))
    s = MdpState(GridIndex(1, 1), TERRESTRIAL)
    out = transition(s, PlannerAction(5, TERRESTRIAL), scn)
    d_norm = normalized_distance_to_end(GridIndex(2, 2), scn)
    assert out.eta == 0.0 and out.delta == 0.0
    assert out.reward == pytest.approx(0.4 * (-1.0 / math.sqrt(2.0) - d_norm), abs=0)


def test_step_weights_w1_only_ignores_association_bit():
    scn = make_toy_scenario(weights=(1.0, 0.0, 0.0), terrestrial_hole_cells=[(2, 2)])
    s = MdpState(GridIndex(1, 1), TERRESTRIAL)
    r0 = transition(s, PlannerAction(5, TERRESTRIAL), scn).reward
    r1 = transition(s, PlannerAction(5, GEO), scn).reward
    assert r0 == r1


def test_step_decomposition_identity_bitwise():
    scn = make_toy_scenario(weights=(0.4, 0.2, 0.4), terrestrial_hole_cells=[(1, 2), (3, 3)])
    rng = np.random.default_rng(0)
    w1, w2, w3 = scn.weights
    for _ in range(200):
        r, c = rng.integers(0, 5, size=2)
        s = MdpState(GridIndex(int(r), int(c)), int(rng.integers(0, 2)))
        acts = valid_actions(s, scn.grid)
        a = acts[rng.integers(0, len(acts))]
        out = transition(s, a, scn)
        assert out.reward == w1 * out.xi - w2 * out.eta - w3 * out.delta


def test_step_out_of_bounds_action_rejected():
    scn = make_toy_scenario()
    with pytest.raises(ValueError):
        transition(MdpState(GridIndex(0, 0), 0), PlannerAction(4, 0), scn)


def test_step_determinism():
    scn = make_toy_scenario(terrestrial_hole_cells=[(2, 2)])
    s = MdpState(GridIndex(1, 1), TERRESTRIAL)
    a = PlannerAction(5, GEO)
    o1 = transition(s, a, scn)
    o2 = transition(s, a, scn)
    assert o1 == o2


def test_three_step_episode_against_hand_recomputation():
    # Path (0,0)->(1,1)[terr]->(2,2)[geo]->(3,3)[geo] on a map with a hole
    # at (1,1); every component recomputed independently below.
    scn = make_toy_scenario(
        n=5, weights=(0.4, 0.2, 0.4), terrestrial_hole_cells=[(1, 1)]
    )
    env = PlanningEnv(scn)
    env.reset(GridIndex(0, 0), TERRESTRIAL)
    moves = [PlannerAction(5, TERRESTRIAL), PlannerAction(5, GEO), PlannerAction(5, GEO)]
    outs = [env.step(a) for a in moves]
    total = sum(o.reward for o in outs)

    # Independent recomputation from first principles.
    span = 4.0 * math.sqrt(2.0)
    def dn(rc):
        return math.hypot(rc[0] - 4, rc[1] - 4) / span
    xi = [-1.0 / math.sqrt(2.0) - dn(p) for p in [(1, 1), (2, 2), (3, 3)]]
    eta = [0.0, -0.5, 0.5]     # into hole, hole reconnects to GEO, GEO dwell
    delta = [1.0, 0.0, 0.0]
    expected = sum(0.4 * x - 0.2 * e - 0.4 * d for x, e, d in zip(xi, eta, delta))
    assert total == pytest.approx(expected, abs=1e-12)
    assert [o.xi for o in outs] == pytest.approx(xi, abs=1e-12)
    assert [o.eta for o in outs] == eta
    assert [o.delta for o in outs] == delta


def test_grid_hole_semantics_flag():
    # With grid-level semantics, a GEO-resolved step in a terrestrial-only
    # hole is not flagged while a global hole is.
    scn = make_toy_scenario(
        terrestrial_hole_cells=[(1, 1)], geo_snr_db=4.0, hole_semantics="grid"
    )
    out = transition(MdpState(GridIndex(0, 0), 0), PlannerAction(5, GEO), scn)
    assert out.delta == 0.0  # geo keeps the cell out of the global-hole set
    scn2 = make_toy_scenario(
        terrestrial_hole_cells=[(1, 1)], geo_snr_db=-9.0, hole_semantics="grid"
    )
    out2 = transition(MdpState(GridIndex(0, 0), 0), PlannerAction(5, TERRESTRIAL), scn2)
    assert out2.delta == 1.0


def test_standalone_reduction_matches_terrestrial_only():
    # With the satellite tier off, both association bits produce identical
    # rewards everywhere, and delta tracks terrestrial holes.
    scn = make_toy_scenario(geo_enabled=False, terrestrial_hole_cells=[(2, 2)])
    s = MdpState(GridIndex(1, 1), TERRESTRIAL)
    o0 = transition(s, PlannerAction(5, TERRESTRIAL), scn)
    o1 = transition(s, PlannerAction(5, GEO), scn)
    assert o0.reward == o1.reward
    assert o0.delta == 1.0 and o1.delta == 1.0


# ------------------------------------------------------------ energy + caps
def test_step_energy_matches_trip_energy():
    scn = make_toy_scenario()
    cell = scn.grid.cell_size_m
    out_card = transition(MdpState(GridIndex(1, 1), 0), PlannerAction(2, 0), scn)
    out_diag = transition(MdpState(GridIndex(1, 1), 0), PlannerAction(5, 0), scn)
    v = scn.energy.cruise_speed_mps
    assert out_card.energy_spent_j == pytest.approx(trip_energy_j(v, cell, scn.rotor), rel=1e-12)
    assert out_diag.energy_spent_j == pytest.approx(
        trip_energy_j(v, cell * math.sqrt(2.0), scn.rotor), rel=1e-12
    )


def test_env_energy_exhaustion_termination():
    scn = make_toy_scenario(n=5)
    cell_energy = trip_energy_j(scn.energy.cruise_speed_mps, scn.grid.cell_size_m, scn.rotor)
    env = PlanningEnv(scn, step_cap=50, available_energy_j=2.5 * cell_energy)
    env.reset(GridIndex(0, 0), TERRESTRIAL)
    o1 = env.step(PlannerAction(2, 0))
    o2 = env.step(PlannerAction(2, 0))
    assert not o1.done and not o2.done
    o3 = env.step(PlannerAction(2, 0))
    assert o3.done and o3.done_reason == DONE_ENERGY
    assert env.energy_used_j == pytest.approx(3 * cell_energy, rel=1e-12)


def test_env_step_cap_termination():
    scn = make_toy_scenario(n=5)
    env = PlanningEnv(scn, step_cap=2)
    env.reset(GridIndex(0, 0), TERRESTRIAL)
    o1 = env.step(PlannerAction(2, 0))
    o2 = env.step(PlannerAction(1, 0))
    assert not o1.done
    assert o2.done and o2.done_reason == DONE_STEP_CAP


def test_env_reached_end():
    scn = make_toy_scenario(n=5)
    env = PlanningEnv(scn, step_cap=100)
    env.reset(GridIndex(3, 3), TERRESTRIAL)
    out = env.step(PlannerAction(5, TERRESTRIAL))
    assert out.done and out.done_reason == DONE_REACHED_END


def test_env_cumulative_energy_nondecreasing():
    scn = make_toy_scenario(n=5)
    env = PlanningEnv(scn, step_cap=10)
    env.reset(GridIndex(0, 0), TERRESTRIAL)
    last = 0.0
    for a in [PlannerAction(2, 0), PlannerAction(3, 0), PlannerAction(5, 1)]:
        env.step(a)
        assert env.energy_used_j >= last
        last = env.energy_used_j


# ------------------------------------------------------------ generation
def test_generate_scenario_deterministic_bytes():
    cfg = desk_config(10)
    a = scenario_to_json(generate_scenario(21, cfg))
    b = scenario_to_json(generate_scenario(21, cfg))
    assert a == b


def test_generate_scenario_min_separation():
    cfg = desk_config(10)
    scn = generate_scenario(4, cfg)
    pts = [(s.x_m, s.y_m) for s in scn.sites]
    assert len(pts) == 10
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d = math.hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1])
            assert d >= 500.0


def test_generate_scenario_heights_match_profile():
    scn = generate_scenario(4, desk_config(10))
    for s in scn.sites:
        if s.env_profile == "urban-macro":
            assert s.height_m == 25.0
        else:
            assert s.height_m == 35.0


def test_placement_failure_reports():
    from skyplan.scenario import PlacementError

    cfg = desk_config(5, deployment={"num_mbs": 100, "min_separation_m": 500.0,
                                     "max_attempts": 2000})
    with pytest.raises(PlacementError):
        generate_scenario(0, cfg)


# ------------------------------------------------------------ serialization
def test_scenario_roundtrip_lossless(desk_scenario):
    text = scenario_to_json(desk_scenario)
    back = scenario_from_json(text)
    assert scenario_to_json(back) == text
    assert back.coverage.content_hash() == desk_scenario.coverage.content_hash()


def test_scenario_hash_check_detects_tampering(desk_scenario):
    import json

    d = json.loads(scenario_to_json(desk_scenario))
    d["coverage_hash"] = "0" * 64
    with pytest.raises(ValueError):
        scenario_from_json(json.dumps(d))


def test_scenario_format_version_check(desk_scenario):
    import json

    d = json.loads(scenario_to_json(desk_scenario))
    d["format_version"] = 99
    with pytest.raises(ValueError):
        scenario_from_json(json.dumps(d))
