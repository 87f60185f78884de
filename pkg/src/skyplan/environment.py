"""Grid MDP: states, the 16-action space, association, reward, transitions.

The agent state is (grid cell, association mode); an action picks one of
eight motion directions together with the association mode for the next
cell. Rewards combine a motion/progress term, a handover cost, and a
disconnectivity penalty, weighted by the scenario's (w1, w2, w3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .energy import trip_energy_j
from .geometry import GridIndex, GridSpec, grid_center
from .scenario import HOLE_SEMANTICS_GRID, Scenario

TERRESTRIAL = 0
GEO = 1

# Motion directions 1..8: (d_row, d_col) with rows growing northward.
DIRECTION_DELTAS: dict[int, tuple[int, int]] = {
    1: (0, -1),   # left
    2: (0, 1),    # right
    3: (1, 0),    # up
    4: (-1, 0),   # down
    5: (1, 1),    # up-right
    6: (1, -1),   # up-left
    7: (-1, 1),   # down-right
    8: (-1, -1),  # down-left
}

NUM_ACTIONS = 16

DONE_NONE = "none"
DONE_REACHED_END = "reached_end"
DONE_STEP_CAP = "step_cap"
DONE_ENERGY = "energy_exhausted"


@dataclass(frozen=True)
class MdpState:
    grid: GridIndex
    assoc_mode: int  # 0 terrestrial, 1 GEO

    def __post_init__(self) -> None:
        if self.assoc_mode not in (TERRESTRIAL, GEO):
            raise ValueError(f"association mode must be 0 or 1, got {self.assoc_mode}")

    def features(self, spec: GridSpec) -> np.ndarray:
        """Normalized network input [x, y, assoc] with x, y in [0, 1]."""
        span = max(spec.cells_per_side - 1, 1)
        return np.array(
            [self.grid.col / span, self.grid.row / span, float(self.assoc_mode)]
        )


@dataclass(frozen=True)
class PlannerAction:
    direction: int  # 1..8
    next_assoc: int  # 0 or 1

    def __post_init__(self) -> None:
        if self.direction not in DIRECTION_DELTAS:
            raise ValueError(f"direction must be in 1..8, got {self.direction}")
        if self.next_assoc not in (TERRESTRIAL, GEO):
            raise ValueError("next_assoc must be 0 or 1")

    @property
    def index(self) -> int:
        return (self.direction - 1) * 2 + self.next_assoc

    @staticmethod
    def from_index(idx: int) -> "PlannerAction":
        if not 0 <= idx < NUM_ACTIONS:
            raise ValueError(f"action index out of range: {idx}")
        return PlannerAction(direction=idx // 2 + 1, next_assoc=idx % 2)

    @property
    def is_diagonal(self) -> bool:
        return self.direction >= 5


@dataclass(frozen=True)
class StepOutcome:
    next_state: MdpState
    reward: float
    xi: float
    eta: float
    delta: float
    energy_spent_j: float
    done: bool
    done_reason: str


def resolve_association(g: GridIndex, assoc_mode: int, scenario: Scenario) -> int:
    """Category actually serving the UAV at a cell under a chosen mode.

    Returns a 1-based MBS id, scenario.hole_category, or
    scenario.geo_category. With the satellite tier disabled the mode bit is
    ignored and resolution is purely terrestrial, which reduces the world to
    the standalone-cellular ablation.
    """
    cov = scenario.coverage
    if assoc_mode == GEO and scenario.geo_enabled:
        if cov.geo_snr_db[g.row, g.col] >= scenario.threshold_db:
            return scenario.geo_category
        return scenario.hole_category
    if cov.best_sinr_db[g.row, g.col] >= scenario.threshold_db:
        return int(cov.best_mbs[g.row, g.col])
    return scenario.hole_category


def handover_cost(prev_category: int, next_category: int, num_mbs: int) -> float:
    """Cost charged for the serving-node transition between two steps.

    Reconnecting out of a hole is rewarded (-0.5) regardless of the new
    node; transitions into or within holes are free because disconnectivity
    is charged separately.
    """
    hole = num_mbs + 1
    geo = num_mbs + 2
    if prev_category == hole:
        return -0.5 if next_category != hole else 0.0
    if next_category == hole:
        return 0.0
    prev_geo = prev_category == geo
    next_geo = next_category == geo
    if prev_geo and next_geo:
        return 0.5
    if prev_geo and not next_geo:
        return 1.0
    if not prev_geo and next_geo:
        return 5.0
    return 0.0 if prev_category == next_category else 1.0


def normalized_distance_to_end(g: GridIndex, scenario: Scenario) -> float:
    """Grid-center distance to END over the span diagonal; 1 at the far corner."""
    span = max(scenario.grid.cells_per_side - 1, 1)
    dr = g.row - scenario.end.row
    dc = g.col - scenario.end.col
    return math.hypot(dr, dc) / (span * math.sqrt(2.0))


def energy_shaping(direction: int, next_g: GridIndex, scenario: Scenario) -> float:
    """Motion/progress reward component (always negative).

    Cardinal moves cost 1, diagonal moves 1/sqrt(2), plus the normalized
    remaining distance from the arrival cell to END.
    """
    if direction not in DIRECTION_DELTAS:
        raise ValueError(f"invalid direction {direction}")
    base = -1.0 if direction <= 4 else -1.0 / math.sqrt(2.0)
    return base - normalized_distance_to_end(next_g, scenario)


def valid_actions(s: MdpState, spec: GridSpec) -> list[PlannerAction]:
    """All actions whose direction stays in bounds: 16 interior, 10 edge, 6 corner."""
    out = []
    n = spec.cells_per_side
    for direction, (dr, dc) in DIRECTION_DELTAS.items():
        r, c = s.grid.row + dr, s.grid.col + dc
        if 0 <= r < n and 0 <= c < n:
            out.append(PlannerAction(direction, TERRESTRIAL))
            out.append(PlannerAction(direction, GEO))
    return out


def valid_action_mask(g: GridIndex, spec: GridSpec) -> np.ndarray:
    """Boolean mask over the 16 action indices for a grid cell."""
    mask = np.zeros(NUM_ACTIONS, dtype=bool)
    n = spec.cells_per_side
    for direction, (dr, dc) in DIRECTION_DELTAS.items():
        r, c = g.row + dr, g.col + dc
        if 0 <= r < n and 0 <= c < n:
            base = (direction - 1) * 2
            mask[base] = True
            mask[base + 1] = True
    return mask


def transition(s: MdpState, a: PlannerAction, scenario: Scenario) -> StepOutcome:
    """One deterministic MDP step, ignoring episode-level termination.

    The returned ``done``/``done_reason`` only reflect arrival at END;
    step caps and the energy budget are tracked by PlanningEnv.
    """
    dr, dc = DIRECTION_DELTAS[a.direction]
    next_g = GridIndex(s.grid.row + dr, s.grid.col + dc)
    if not next_g.in_bounds(scenario.grid):
        raise ValueError(f"action {a} leaves the grid from {s.grid}")
    next_state = MdpState(next_g, a.next_assoc)

    prev_cat = resolve_association(s.grid, s.assoc_mode, scenario)
    next_cat = resolve_association(next_g, a.next_assoc, scenario)

    xi = energy_shaping(a.direction, next_g, scenario)
    eta = handover_cost(prev_cat, next_cat, scenario.num_mbs)
    if scenario.hole_semantics == HOLE_SEMANTICS_GRID:
        if scenario.geo_enabled:
            in_hole = bool(scenario.coverage.global_hole[next_g.row, next_g.col])
        else:
            in_hole = bool(scenario.coverage.terrestrial_hole[next_g.row, next_g.col])
    else:
        in_hole = next_cat == scenario.hole_category
    delta = 1.0 if in_hole else 0.0

    w1, w2, w3 = scenario.weights
    reward = w1 * xi - w2 * eta - w3 * delta

    cell = scenario.grid.cell_size_m
    displacement = cell * math.sqrt(2.0) if a.is_diagonal else cell
    energy = trip_energy_j(scenario.energy.cruise_speed_mps, displacement, scenario.rotor)

    reached = next_g == scenario.end
    return StepOutcome(
        next_state=next_state,
        reward=reward,
        xi=xi,
        eta=eta,
        delta=delta,
        energy_spent_j=energy,
        done=reached,
        done_reason=DONE_REACHED_END if reached else DONE_NONE,
    )


class PlanningEnv:
    """Stateful episode wrapper adding step-cap and energy-budget termination."""

    def __init__(
        self,
        scenario: Scenario,
        step_cap: int | None = None,
        available_energy_j: float | None = None,
    ):
        self.scenario = scenario
        self.step_cap = step_cap
        self.available_energy_j = available_energy_j
        self.state: MdpState | None = None
        self.steps_taken = 0
        self.energy_used_j = 0.0

    def reset(self, start: GridIndex | None = None, assoc_mode: int = TERRESTRIAL) -> MdpState:
        g = start if start is not None else self.scenario.start
        if not g.in_bounds(self.scenario.grid):
            raise ValueError(f"start {g} out of bounds")
        self.state = MdpState(g, assoc_mode)
        self.steps_taken = 0
        self.energy_used_j = 0.0
        return self.state

    def step(self, a: PlannerAction) -> StepOutcome:
        if self.state is None:
            raise RuntimeError("call reset() before step()")
        out = transition(self.state, a, self.scenario)
        self.steps_taken += 1
        self.energy_used_j += out.energy_spent_j

        done = out.done
        reason = out.done_reason
        if (
            self.available_energy_j is not None
            and self.energy_used_j > self.available_energy_j
        ):
            done, reason = True, DONE_ENERGY
        elif not done and self.step_cap is not None and self.steps_taken >= self.step_cap:
            done, reason = True, DONE_STEP_CAP

        out = StepOutcome(
            next_state=out.next_state,
            reward=out.reward,
            xi=out.xi,
            eta=out.eta,
            delta=out.delta,
            energy_spent_j=out.energy_spent_j,
            done=done,
            done_reason=reason,
        )
        self.state = out.next_state
        return out


def step_displacement_m(a: PlannerAction, spec: GridSpec) -> float:
    cell = spec.cell_size_m
    return cell * math.sqrt(2.0) if a.is_diagonal else cell


def cell_position_m(g: GridIndex, spec: GridSpec) -> tuple[float, float]:
    c = grid_center(g, spec)
    return float(c[0]), float(c[1])
