"""Exact planner: shortest path over the (cell, association-mode) graph.

Each node is a grid cell paired with an association mode; each edge is one
MDP action with cost equal to the negated step reward. Because reconnecting
out of a hole is rewarded, some edges carry negative cost, so the solver is
a label-correcting method with explicit negative-cycle detection rather than
a nonnegative-weights method. The energy constraint is enforced by a
post-check, falling back to an exact budget-constrained search on the same
graph when the unconstrained optimum is infeasible.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from .energy import available_energy_j, trip_energy_j
from .environment import (
    DIRECTION_DELTAS,
    DONE_REACHED_END,
    GEO,
    TERRESTRIAL,
    MdpState,
    PlannerAction,
    cell_position_m,
    resolve_association,
    transition,
)
from .geometry import GridIndex
from .runio import TrajectoryRecord, TrajectoryStep, initial_step
from .scenario import Scenario


class NegativeCycleError(RuntimeError):
    def __init__(self, cycle: list[tuple[int, int, int]]):
        super().__init__(f"negative-cost cycle through nodes {cycle}")
        self.cycle = cycle


@dataclass
class OracleResult:
    """Optimal cost and the path that attains it."""

    cost: float
    path: list[tuple[int, int, int]]  # (row, col, assoc_mode) per visited node
    trajectory: TrajectoryRecord
    sum_xi: float
    sum_eta: float
    sum_delta: float
    length_m: float
    energy_j: float
    energy_feasible: bool
    budget_constrained: bool = False


def _node_id(row: int, col: int, assoc: int, n: int) -> int:
    return (row * n + col) * 2 + assoc


def _node_unpack(node: int, n: int) -> tuple[int, int, int]:
    assoc = node % 2
    cell = node // 2
    return cell // n, cell % n, assoc


def _build_edges(scenario: Scenario) -> list[list[tuple[int, float, int, float]]]:
    """Adjacency: node -> list of (dest, cost, action_index, length_m).

    END nodes are absorbing (no outgoing edges); the episode ends there.
    """
    n = scenario.grid.cells_per_side
    num_nodes = n * n * 2
    adj: list[list[tuple[int, float, int, float]]] = [[] for _ in range(num_nodes)]
    cell = scenario.grid.cell_size_m
    for row in range(n):
        for col in range(n):
            if GridIndex(row, col) == scenario.end:
                continue
            for assoc in (TERRESTRIAL, GEO):
                src = _node_id(row, col, assoc, n)
                state = MdpState(GridIndex(row, col), assoc)
                for direction, (dr, dc) in DIRECTION_DELTAS.items():
                    r2, c2 = row + dr, col + dc
                    if not (0 <= r2 < n and 0 <= c2 < n):
                        continue
                    for nxt_assoc in (TERRESTRIAL, GEO):
                        action = PlannerAction(direction, nxt_assoc)
                        out = transition(state, action, scenario)
                        dst = _node_id(r2, c2, nxt_assoc, n)
                        length = cell * math.sqrt(2.0) if action.is_diagonal else cell
                        adj[src].append((dst, -out.reward, action.index, length))
    return adj


def _shortest_path_spfa(
    adj: list[list[tuple[int, float, int, float]]], source: int, num_nodes: int
) -> tuple[list[float], list[int]]:
    """Label-correcting shortest path tolerant of negative edges.

    Raises NegativeCycleError when any node relaxes more than num_nodes
    times, reporting the offending cycle from the parent chain.
    """
    dist = [math.inf] * num_nodes
    parent = [-1] * num_nodes
    in_queue = [False] * num_nodes
    relax_count = [0] * num_nodes
    dist[source] = 0.0
    queue: deque[int] = deque([source])
    in_queue[source] = True
    while queue:
        u = queue.popleft()
        in_queue[u] = False
        du = dist[u]
        for v, w, _a, _l in adj[u]:
            nd = du + w
            if nd < dist[v] - 1e-12:
                dist[v] = nd
                parent[v] = u
                relax_count[v] += 1
                if relax_count[v] > num_nodes:
                    raise NegativeCycleError(_extract_cycle(parent, v, num_nodes))
                if not in_queue[v]:
                    queue.append(v)
                    in_queue[v] = True
    return dist, parent


def _extract_cycle(parent: list[int], start: int, num_nodes: int) -> list:
    seen = {}
    u = start
    chain = []
    while u != -1 and u not in seen:
        seen[u] = len(chain)
        chain.append(u)
        u = parent[u]
    if u == -1:
        return chain
    return chain[seen[u] :]


def _reconstruct(parent: list[int], goal: int) -> list[int]:
    path = [goal]
    while parent[path[-1]] != -1:
        path.append(parent[path[-1]])
    path.reverse()
    return path


def _path_to_result(
    scenario: Scenario, node_path: list[int], budget_constrained: bool = False
) -> OracleResult:
    n = scenario.grid.cells_per_side
    nodes = [_node_unpack(u, n) for u in node_path]
    state = MdpState(GridIndex(*nodes[0][:2]), nodes[0][2])
    resolved0 = resolve_association(state.grid, state.assoc_mode, scenario)
    steps = [initial_step(scenario, state.grid, state.assoc_mode, resolved0)]
    lengths: list[float] = []
    cost = 0.0
    sum_xi = sum_eta = sum_delta = 0.0
    energy = 0.0
    for t, (row, col, assoc) in enumerate(nodes[1:], start=1):
        dr, dc = row - state.grid.row, col - state.grid.col
        direction = next(
            d for d, delta in DIRECTION_DELTAS.items() if delta == (dr, dc)
        )
        action = PlannerAction(direction, assoc)
        out = transition(state, action, scenario)
        cost -= out.reward
        sum_xi += out.xi
        sum_eta += out.eta
        sum_delta += out.delta
        energy += out.energy_spent_j
        x, y = cell_position_m(GridIndex(row, col), scenario.grid)
        steps.append(
            TrajectoryStep(
                t=t,
                row=row,
                col=col,
                x_m=x,
                y_m=y,
                assoc_mode=assoc,
                resolved=resolve_association(GridIndex(row, col), assoc, scenario),
                xi=out.xi,
                eta=out.eta,
                delta=out.delta,
                reward=out.reward,
                energy_cum_j=energy,
            )
        )
        lengths.append(
            scenario.grid.cell_size_m * (math.sqrt(2.0) if action.is_diagonal else 1.0)
        )
        state = out.next_state
    length_m = sum(lengths)
    budget = available_energy_j(scenario.energy, scenario.rotor)
    trajectory = TrajectoryRecord(
        steps=steps,
        done_reason=DONE_REACHED_END if state.grid == scenario.end else "none",
        step_lengths_m=lengths,
    )
    return OracleResult(
        cost=cost,
        path=nodes,
        trajectory=trajectory,
        sum_xi=sum_xi,
        sum_eta=sum_eta,
        sum_delta=sum_delta,
        length_m=length_m,
        energy_j=energy,
        energy_feasible=energy <= budget,
        budget_constrained=budget_constrained,
    )


def _constrained_search(
    adj, source: int, goals: list[int], num_nodes: int, max_length_m: float
) -> list[int] | None:
    """Cost-optimal path subject to a total-length budget, via Pareto labels.

    Keeps, per node, the (cost, length) labels not dominated by any other.
    Labels reference their predecessor label directly, so pruning never
    breaks path reconstruction. Exact, but intended for desk-scale graphs.
    Every cycle has positive length, so the length budget bounds the search.
    """
    # label: (cost, length, node, parent_label_or_None)
    labels: list[list[tuple]] = [[] for _ in range(num_nodes)]
    start_label = (0.0, 0.0, source, None)
    labels[source].append(start_label)
    queue: deque[tuple] = deque([start_label])
    while queue:
        cu, lu, u, _parent = lab = queue.popleft()
        for v, w, _a, edge_len in adj[u]:
            nc, nl = cu + w, lu + edge_len
            if nl > max_length_m + 1e-9:
                continue
            if any(oc <= nc + 1e-12 and ol <= nl + 1e-9 for oc, ol, _, _ in labels[v]):
                continue
            new_lab = (nc, nl, v, lab)
            labels[v] = [
                x for x in labels[v] if not (nc <= x[0] + 1e-12 and nl <= x[1] + 1e-9)
            ] + [new_lab]
            queue.append(new_lab)
    best = None
    for g in goals:
        for lab in labels[g]:
            if best is None or lab[0] < best[0]:
                best = lab
    if best is None:
        return None
    rev = []
    while best is not None:
        rev.append(best[2])
        best = best[3]
    rev.reverse()
    return rev


def exact_optimum(
    scenario: Scenario,
    max_length_m: float | None = None,
    start: GridIndex | None = None,
) -> OracleResult:
    """Minimal-cost route and association plan from START to END.

    Solves the product graph exactly; verifies the energy budget on the
    returned path and re-solves with a length budget when violated (energy
    is proportional to distance at fixed cruise speed).
    """
    n = scenario.grid.cells_per_side
    num_nodes = n * n * 2
    if start is None:
        start = scenario.start
    if start == scenario.end:
        return _path_to_result(scenario, [_node_id(start.row, start.col, TERRESTRIAL, n)])
    adj = _build_edges(scenario)
    source = _node_id(start.row, start.col, TERRESTRIAL, n)
    goals = [
        _node_id(scenario.end.row, scenario.end.col, a, n) for a in (TERRESTRIAL, GEO)
    ]
    if max_length_m is None:
        dist, parent = _shortest_path_spfa(adj, source, num_nodes)
        goal = min(goals, key=lambda g: dist[g])
        if math.isinf(dist[goal]):
            raise RuntimeError("END unreachable from START")
        result = _path_to_result(scenario, _reconstruct(parent, goal))
        if result.energy_feasible:
            return result
        budget = available_energy_j(scenario.energy, scenario.rotor)
        v = scenario.energy.cruise_speed_mps
        per_meter = trip_energy_j(v, 1.0, scenario.rotor)
        max_length_m = budget / per_meter
    node_path = _constrained_search(adj, source, goals, num_nodes, max_length_m)
    if node_path is None:
        raise RuntimeError(
            f"no START-to-END path within the {max_length_m:.0f} m length budget"
        )
    return _path_to_result(scenario, node_path, budget_constrained=True)
