"""Run artifacts: trajectory/reward records, exports, and run directories.

Every exported file carries the seed and a format version (JSON fields, or a
leading ``#`` metadata line for CSV) so a run directory is reproducible and
parseable on its own.
"""

from __future__ import annotations

import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

from .environment import DONE_NONE, cell_position_m, step_displacement_m
from .geometry import GridIndex
from .scenario import FORMAT_VERSION, Scenario

TRAJECTORY_COLUMNS = [
    "t",
    "row",
    "col",
    "x_m",
    "y_m",
    "assoc_mode",
    "resolved",
    "xi",
    "eta",
    "delta",
    "reward",
    "energy_cum_j",
]

REWARD_COLUMNS = ["episode", "total_reward", "steps", "epsilon"]


@dataclass(frozen=True)
class TrajectoryStep:
    t: int
    row: int
    col: int
    x_m: float
    y_m: float
    assoc_mode: int
    resolved: int
    xi: float
    eta: float
    delta: float
    reward: float
    energy_cum_j: float


@dataclass
class TrajectoryRecord:
    """Step log of one rollout; row t=0 is the initial state with zero costs."""

    steps: list[TrajectoryStep]
    done_reason: str = DONE_NONE
    step_lengths_m: list[float] = field(default_factory=list)

    @property
    def num_moves(self) -> int:
        return len(self.steps) - 1

    def grid_path(self) -> list[tuple[int, int]]:
        return [(s.row, s.col) for s in self.steps]

    def assoc_sequence(self) -> list[int]:
        return [s.resolved for s in self.steps]

    def summary(self) -> dict:
        total_reward = sum(s.reward for s in self.steps)
        return {
            "moves": self.num_moves,
            "length_m": sum(self.step_lengths_m),
            "total_reward": total_reward,
            "sum_xi": sum(s.xi for s in self.steps),
            "handover_cost_total": sum(s.eta for s in self.steps),
            "hole_steps": sum(1 for s in self.steps[1:] if s.delta > 0),
            "energy_j": self.steps[-1].energy_cum_j if self.steps else 0.0,
            "done_reason": self.done_reason,
        }

    def verify_summary(self, summary: dict, tol: float = 1e-9) -> bool:
        """Summary fields must be recomputable from the step log."""
        fresh = self.summary()
        for key, val in fresh.items():
            other = summary.get(key)
            if isinstance(val, float):
                if not math.isclose(val, float(other), rel_tol=0.0, abs_tol=tol):
                    return False
            elif val != other:
                return False
        return True


@dataclass
class RunRecord:
    """Persisted training/evaluation artifact."""

    episode_rewards: list[float]
    episode_steps: list[int]
    epsilons: list[float]
    trajectory: TrajectoryRecord | None
    config: dict
    seed: int
    wallclock_s: float = 0.0


def trajectory_to_csv(rec: TrajectoryRecord, seed: int) -> str:
    buf = io.StringIO()
    buf.write(f"# format_version={FORMAT_VERSION} seed={seed}\n")
    buf.write(",".join(TRAJECTORY_COLUMNS) + "\n")
    for s in rec.steps:
        buf.write(
            f"{s.t},{s.row},{s.col},{s.x_m!r},{s.y_m!r},{s.assoc_mode},{s.resolved},"
            f"{s.xi!r},{s.eta!r},{s.delta!r},{s.reward!r},{s.energy_cum_j!r}\n"
        )
    return buf.getvalue()


def trajectory_from_csv(text: str) -> TrajectoryRecord:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    if header != TRAJECTORY_COLUMNS:
        raise ValueError(f"unexpected trajectory columns: {header}")
    steps = []
    for ln in lines[1:]:
        f = ln.split(",")
        steps.append(
            TrajectoryStep(
                t=int(f[0]),
                row=int(f[1]),
                col=int(f[2]),
                x_m=float(f[3]),
                y_m=float(f[4]),
                assoc_mode=int(f[5]),
                resolved=int(f[6]),
                xi=float(f[7]),
                eta=float(f[8]),
                delta=float(f[9]),
                reward=float(f[10]),
                energy_cum_j=float(f[11]),
            )
        )
    return TrajectoryRecord(steps=steps)


def rewards_to_csv(record: RunRecord) -> str:
    buf = io.StringIO()
    buf.write(f"# format_version={FORMAT_VERSION} seed={record.seed}\n")
    buf.write(",".join(REWARD_COLUMNS) + "\n")
    for i, (r, n, e) in enumerate(
        zip(record.episode_rewards, record.episode_steps, record.epsilons), start=1
    ):
        buf.write(f"{i},{r!r},{n},{e!r}\n")
    return buf.getvalue()


def rewards_from_csv(text: str) -> list[float]:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    if lines[0].split(",") != REWARD_COLUMNS:
        raise ValueError("unexpected reward-curve columns")
    return [float(ln.split(",")[1]) for ln in lines[1:]]


class RunDirectoryLockedError(RuntimeError):
    pass


class RunDirectory:
    """On-disk layout of one command's artifacts, guarded by a lock file.

    Files: config.json, scenario.json, coverage.csv/.json, rewards.csv,
    trajectory.csv, summary.json, checkpoint.npz, evaluation/comparison
    documents as applicable.
    """

    LOCK_NAME = ".skyplan.lock"

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def acquire(self, force: bool = False) -> None:
        self.path.mkdir(parents=True, exist_ok=True)
        lock = self.path / self.LOCK_NAME
        if lock.exists() and not force:
            raise RunDirectoryLockedError(
                f"{self.path} is locked by another run (use --force to override)"
            )
        lock.write_text(f"pid={time.time()}\n")

    def release(self) -> None:
        lock = self.path / self.LOCK_NAME
        if lock.exists():
            lock.unlink()

    def write_text(self, name: str, content: str) -> Path:
        p = self.path / name
        p.write_text(content)
        return p

    def write_json(self, name: str, payload: dict) -> Path:
        return self.write_text(name, json.dumps(payload, indent=2, sort_keys=True))

    def read_text(self, name: str) -> str:
        return (self.path / name).read_text()

    def read_json(self, name: str) -> dict:
        return json.loads(self.read_text(name))


def make_summary_payload(
    scenario: Scenario,
    record: TrajectoryRecord,
    seed: int,
    weights: tuple[float, float, float] | None = None,
    extra: dict | None = None,
) -> dict:
    payload = {
        "format_version": FORMAT_VERSION,
        "seed": seed,
        "start": [scenario.start.row, scenario.start.col],
        "end": [scenario.end.row, scenario.end.col],
        "weights": list(weights if weights is not None else scenario.weights),
        "geo_enabled": scenario.geo_enabled,
        "num_mbs": scenario.num_mbs,
        "grid_path": record.grid_path(),
        "assoc_sequence": record.assoc_sequence(),
        **record.summary(),
    }
    if extra:
        payload.update(extra)
    return payload


def initial_step(scenario: Scenario, start: GridIndex, assoc_mode: int, resolved: int) -> TrajectoryStep:
    x, y = cell_position_m(start, scenario.grid)
    return TrajectoryStep(
        t=0,
        row=start.row,
        col=start.col,
        x_m=x,
        y_m=y,
        assoc_mode=assoc_mode,
        resolved=resolved,
        xi=0.0,
        eta=0.0,
        delta=0.0,
        reward=0.0,
        energy_cum_j=0.0,
    )


__all__ = [
    "TrajectoryStep",
    "TrajectoryRecord",
    "RunRecord",
    "RunDirectory",
    "RunDirectoryLockedError",
    "trajectory_to_csv",
    "trajectory_from_csv",
    "rewards_to_csv",
    "rewards_from_csv",
    "make_summary_payload",
    "initial_step",
    "step_displacement_m",
]
