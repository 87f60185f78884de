"""Replay-buffer Q-learning: the deep trainer and a tabular baseline.

The training loop follows the standard pattern: epsilon-greedy rollouts from
random start cells, uniform replay sampling, one temporal-difference update
per environment step against a slowly tracking target network, and
per-episode exponential decay of the exploration rate.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .energy import available_energy_j
from .environment import (
    DONE_REACHED_END,
    NUM_ACTIONS,
    TERRESTRIAL,
    MdpState,
    PlannerAction,
    PlanningEnv,
    cell_position_m,
    resolve_association,
    step_displacement_m,
    valid_action_mask,
)
from .geometry import GridIndex
from .qnet import AdamOptimizer, QApproximator, td_loss_and_grads
from .runio import RunRecord, TrajectoryRecord, TrajectoryStep, initial_step
from .scenario import Scenario


@dataclass
class TrainerConfig:
    discount: float = 1.0
    soft_update_rate: float = 0.005
    learning_rate: float = 1e-3
    # Optional geometric anneal of the learning rate across episodes; None
    # keeps it constant.
    learning_rate_final: float | None = None
    epsilon_start: float = 1.0
    epsilon_min: float = 0.1
    epsilon_decay: float = 0.999
    epsilon_schedule: str = "episode"  # or "step"
    episodes: int = 10_000
    step_cap: int = 1000
    batch_size: int = 64
    buffer_capacity: int = 50_000
    hidden: tuple[int, ...] = (128, 128)
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.discount <= 1.0:
            raise ValueError("discount must lie in (0, 1]")
        if not 0.0 < self.soft_update_rate <= 1.0:
            raise ValueError("soft update rate must lie in (0, 1]")
        if self.epsilon_min > self.epsilon_start:
            raise ValueError("epsilon_min must not exceed epsilon_start")
        if self.episodes < 0:
            raise ValueError("episodes must be nonnegative")
        if min(self.step_cap, self.batch_size, self.buffer_capacity) <= 0:
            raise ValueError("step cap, batch size, and buffer capacity must be positive")
        if self.epsilon_schedule not in ("episode", "step"):
            raise ValueError("epsilon_schedule must be 'episode' or 'step'")

    def to_dict(self) -> dict:
        return {
            "discount": self.discount,
            "soft_update_rate": self.soft_update_rate,
            "learning_rate": self.learning_rate,
            "learning_rate_final": self.learning_rate_final,
            "epsilon_start": self.epsilon_start,
            "epsilon_min": self.epsilon_min,
            "epsilon_decay": self.epsilon_decay,
            "epsilon_schedule": self.epsilon_schedule,
            "episodes": self.episodes,
            "step_cap": self.step_cap,
            "batch_size": self.batch_size,
            "buffer_capacity": self.buffer_capacity,
            "hidden": list(self.hidden),
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(d: dict) -> "TrainerConfig":
        d = dict(d)
        if "hidden" in d:
            d["hidden"] = tuple(d["hidden"])
        return TrainerConfig(**d)


class ReplayBuffer:
    """Fixed-capacity ring of transitions with uniform batch sampling."""

    def __init__(self, capacity: int, state_dim: int = 3):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.states = np.zeros((capacity, state_dim))
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity)
        self.next_states = np.zeros((capacity, state_dim))
        self.dones = np.zeros(capacity, dtype=bool)
        self.next_masks = np.ones((capacity, NUM_ACTIONS), dtype=bool)
        self._next = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def append(self, state, action, reward, next_state, done, next_mask) -> None:
        i = self._next
        self.states[i] = state
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_states[i] = next_state
        self.dones[i] = done
        self.next_masks[i] = next_mask
        self._next = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator):
        """Uniform sample without replacement within the batch."""
        if batch_size > self._size:
            raise ValueError("not enough stored transitions to sample")
        idx = rng.choice(self._size, size=batch_size, replace=False)
        return (
            self.states[idx],
            self.actions[idx],
            self.rewards[idx],
            self.next_states[idx],
            self.dones[idx],
            self.next_masks[idx],
        )

    def stored_transitions(self) -> list[tuple]:
        """Contents oldest to newest (for inspection)."""
        if self._size < self.capacity:
            order = range(self._size)
        else:
            order = [(self._next + k) % self.capacity for k in range(self.capacity)]
        return [
            (
                tuple(self.states[i]),
                int(self.actions[i]),
                float(self.rewards[i]),
                tuple(self.next_states[i]),
                bool(self.dones[i]),
            )
            for i in order
        ]


def epsilon_at(cfg: TrainerConfig, k: int) -> float:
    """Exploration rate after k decay events: max(eps_min, eps0 * decay^k)."""
    return max(cfg.epsilon_min, cfg.epsilon_start * cfg.epsilon_decay**k)


def select_action_index(
    net: QApproximator,
    state_features: np.ndarray,
    epsilon: float,
    valid_mask: np.ndarray,
    rng: np.random.Generator,
) -> int:
    """Epsilon-greedy action restricted to valid actions.

    Greedy ties break toward the lowest action index.
    """
    valid_idx = np.flatnonzero(valid_mask)
    if valid_idx.size == 0:
        raise ValueError("no valid action available")
    if rng.random() < epsilon:
        return int(rng.choice(valid_idx))
    q = net.q_values(state_features)
    masked = np.where(valid_mask, q, -np.inf)
    return int(np.argmax(masked))


def select_action(
    net: QApproximator,
    state: MdpState,
    epsilon: float,
    scenario: Scenario,
    rng: np.random.Generator,
) -> PlannerAction:
    mask = valid_action_mask(state.grid, scenario.grid)
    idx = select_action_index(net, state.features(scenario.grid), epsilon, mask, rng)
    return PlannerAction.from_index(idx)


def _all_cell_masks(scenario: Scenario) -> np.ndarray:
    n = scenario.grid.cells_per_side
    masks = np.zeros((n, n, NUM_ACTIONS), dtype=bool)
    for r in range(n):
        for c in range(n):
            masks[r, c] = valid_action_mask(GridIndex(r, c), scenario.grid)
    return masks


def train(
    scenario: Scenario, cfg: TrainerConfig
) -> tuple[QApproximator, RunRecord]:
    """Full training loop; deterministic given the config seed.

    Returns the trained network and a record holding the per-episode reward
    series, step counts, the post-episode exploration rates, and the final
    greedy trajectory from the scenario's START.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    net = QApproximator(3, cfg.hidden, NUM_ACTIONS, rng=rng)
    target = net.clone()
    optimizer = AdamOptimizer([p.shape for p in net.parameters()], cfg.learning_rate)
    buffer = ReplayBuffer(cfg.buffer_capacity)
    budget = available_energy_j(scenario.energy, scenario.rotor)
    env = PlanningEnv(scenario, step_cap=cfg.step_cap, available_energy_j=budget)
    masks = _all_cell_masks(scenario)
    n = scenario.grid.cells_per_side

    episode_rewards: list[float] = []
    episode_steps: list[int] = []
    epsilons: list[float] = []
    global_step = 0

    for e in range(1, cfg.episodes + 1):
        if cfg.epsilon_schedule == "episode":
            eps = epsilon_at(cfg, e - 1)
        if cfg.learning_rate_final is not None and cfg.episodes > 1:
            frac = (e - 1) / (cfg.episodes - 1)
            optimizer.learning_rate = cfg.learning_rate * (
                cfg.learning_rate_final / cfg.learning_rate
            ) ** frac
        # Random start anywhere but END so every episode takes at least one step.
        while True:
            r, c = int(rng.integers(n)), int(rng.integers(n))
            if GridIndex(r, c) != scenario.end:
                break
        state = env.reset(GridIndex(r, c), TERRESTRIAL)
        total = 0.0
        for _ in range(cfg.step_cap):
            if cfg.epsilon_schedule == "step":
                eps = epsilon_at(cfg, global_step)
            feats = state.features(scenario.grid)
            mask = masks[state.grid.row, state.grid.col]
            a_idx = select_action_index(net, feats, eps, mask, rng)
            out = env.step(PlannerAction.from_index(a_idx))
            next_g = out.next_state.grid
            buffer.append(
                feats,
                a_idx,
                out.reward,
                out.next_state.features(scenario.grid),
                out.done_reason == DONE_REACHED_END,
                masks[next_g.row, next_g.col],
            )
            global_step += 1
            if len(buffer) >= cfg.batch_size:
                s_b, a_b, r_b, s2_b, d_b, m_b = buffer.sample(cfg.batch_size, rng)
                _, grads = td_loss_and_grads(
                    net, target, s_b, a_b, r_b, s2_b, d_b,
                    gamma=cfg.discount, next_valid_mask=m_b,
                )
                net.set_parameters(optimizer.step(net.parameters(), grads))
                target.soft_update_from(net, cfg.soft_update_rate)
            total += out.reward
            state = out.next_state
            if out.done:
                break
        episode_rewards.append(total)
        episode_steps.append(env.steps_taken)
        epsilons.append(epsilon_at(cfg, e if cfg.epsilon_schedule == "episode" else global_step))

    trajectory = greedy_rollout(net, scenario, max_steps=cfg.step_cap)
    record = RunRecord(
        episode_rewards=episode_rewards,
        episode_steps=episode_steps,
        epsilons=epsilons,
        trajectory=trajectory,
        config=cfg.to_dict(),
        seed=cfg.seed,
        wallclock_s=time.perf_counter() - t0,
    )
    return net, record


def rollout_policy(
    scenario: Scenario,
    policy,
    start: GridIndex | None = None,
    assoc_mode: int = TERRESTRIAL,
    max_steps: int = 1000,
) -> TrajectoryRecord:
    """Roll a deterministic policy (state -> action index) into a step log."""
    budget = available_energy_j(scenario.energy, scenario.rotor)
    env = PlanningEnv(scenario, step_cap=max_steps, available_energy_j=budget)
    state = env.reset(start, assoc_mode)
    resolved0 = resolve_association(state.grid, state.assoc_mode, scenario)
    steps = [initial_step(scenario, state.grid, state.assoc_mode, resolved0)]
    lengths: list[float] = []
    done_reason = "none"
    if state.grid == scenario.end:
        return TrajectoryRecord(steps=steps, done_reason=DONE_REACHED_END, step_lengths_m=lengths)
    energy_cum = 0.0
    for t in range(1, max_steps + 1):
        action = PlannerAction.from_index(policy(state))
        out = env.step(action)
        energy_cum += out.energy_spent_j
        g = out.next_state.grid
        x, y = cell_position_m(g, scenario.grid)
        steps.append(
            TrajectoryStep(
                t=t,
                row=g.row,
                col=g.col,
                x_m=x,
                y_m=y,
                assoc_mode=out.next_state.assoc_mode,
                resolved=resolve_association(g, out.next_state.assoc_mode, scenario),
                xi=out.xi,
                eta=out.eta,
                delta=out.delta,
                reward=out.reward,
                energy_cum_j=energy_cum,
            )
        )
        lengths.append(step_displacement_m(action, scenario.grid))
        state = out.next_state
        done_reason = out.done_reason
        if out.done:
            break
    return TrajectoryRecord(steps=steps, done_reason=done_reason, step_lengths_m=lengths)


def greedy_rollout(
    net: QApproximator,
    scenario: Scenario,
    start: GridIndex | None = None,
    max_steps: int = 1000,
) -> TrajectoryRecord:
    """Zero-exploration rollout of the learned policy from START."""
    masks = _all_cell_masks(scenario)

    def policy(state: MdpState) -> int:
        q = net.q_values(state.features(scenario.grid))
        masked = np.where(masks[state.grid.row, state.grid.col], q, -np.inf)
        return int(np.argmax(masked))

    return rollout_policy(scenario, policy, start=start, max_steps=max_steps)


@dataclass
class TabularConfig:
    learning_rate: float = 0.5
    discount: float = 1.0
    epsilon_start: float = 1.0
    epsilon_min: float = 0.1
    epsilon_decay: float = 0.999
    episodes: int = 3000
    step_cap: int = 200
    seed: int = 0
    max_table_entries: int = 500_000

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def tabular_q_learning(
    scenario: Scenario, cfg: TabularConfig
) -> tuple[np.ndarray, RunRecord]:
    """One-step Q-learning over the exact (cell, association) state table.

    Shares the reward machinery, masking, and exploration schedule with the
    deep trainer; practical only on small grids.
    """
    t0 = time.perf_counter()
    n = scenario.grid.cells_per_side
    entries = n * n * 2 * NUM_ACTIONS
    if entries > cfg.max_table_entries:
        raise ValueError(
            f"Q-table would need {entries} entries (> {cfg.max_table_entries}); "
            "grid too large for the tabular baseline"
        )
    rng = np.random.default_rng(cfg.seed)
    q = np.zeros((n, n, 2, NUM_ACTIONS))
    masks = _all_cell_masks(scenario)
    budget = available_energy_j(scenario.energy, scenario.rotor)
    env = PlanningEnv(scenario, step_cap=cfg.step_cap, available_energy_j=budget)

    episode_rewards: list[float] = []
    episode_steps: list[int] = []
    epsilons: list[float] = []

    for e in range(1, cfg.episodes + 1):
        eps = max(cfg.epsilon_min, cfg.epsilon_start * cfg.epsilon_decay ** (e - 1))
        while True:
            r, c = int(rng.integers(n)), int(rng.integers(n))
            if GridIndex(r, c) != scenario.end:
                break
        state = env.reset(GridIndex(r, c), TERRESTRIAL)
        total = 0.0
        for _ in range(cfg.step_cap):
            mask = masks[state.grid.row, state.grid.col]
            valid_idx = np.flatnonzero(mask)
            if rng.random() < eps:
                a_idx = int(rng.choice(valid_idx))
            else:
                vals = np.where(mask, q[state.grid.row, state.grid.col, state.assoc_mode], -np.inf)
                a_idx = int(np.argmax(vals))
            out = env.step(PlannerAction.from_index(a_idx))
            g2 = out.next_state.grid
            if out.done_reason == DONE_REACHED_END:
                bootstrap = 0.0
            else:
                nxt = np.where(
                    masks[g2.row, g2.col],
                    q[g2.row, g2.col, out.next_state.assoc_mode],
                    -np.inf,
                )
                bootstrap = cfg.discount * float(np.max(nxt))
            sr, sc, sa = state.grid.row, state.grid.col, state.assoc_mode
            td = out.reward + bootstrap - q[sr, sc, sa, a_idx]
            q[sr, sc, sa, a_idx] += cfg.learning_rate * td
            total += out.reward
            state = out.next_state
            if out.done:
                break
        episode_rewards.append(total)
        episode_steps.append(env.steps_taken)
        epsilons.append(max(cfg.epsilon_min, cfg.epsilon_start * cfg.epsilon_decay**e))

    def policy(state: MdpState) -> int:
        vals = np.where(
            masks[state.grid.row, state.grid.col],
            q[state.grid.row, state.grid.col, state.assoc_mode],
            -np.inf,
        )
        return int(np.argmax(vals))

    trajectory = rollout_policy(scenario, policy, max_steps=cfg.step_cap)
    record = RunRecord(
        episode_rewards=episode_rewards,
        episode_steps=episode_steps,
        epsilons=epsilons,
        trajectory=trajectory,
        config=cfg.to_dict(),
        seed=cfg.seed,
        wallclock_s=time.perf_counter() - t0,
    )
    return q, record
