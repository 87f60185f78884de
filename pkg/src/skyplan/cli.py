"""Command-line entry points: generate, train, evaluate, oracle, ablate.

Every command takes --seed / --config / --out, persists the merged effective
config beside its outputs, and exits nonzero with a JSON error record on
stderr when anything fails.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .config import deep_merge, load_config
from .dqn import TrainerConfig, greedy_rollout, train
from .energy import available_energy_j, propulsion_power_w
from .geometry import GridIndex
from .oracle import exact_optimum
from .qnet import load_checkpoint, save_checkpoint
from .runio import (
    RunDirectory,
    make_summary_payload,
    rewards_to_csv,
    trajectory_to_csv,
)
from .scenario import (
    FORMAT_VERSION,
    generate_scenario,
    scenario_from_json,
    scenario_to_json,
    with_geo_enabled,
)


def _write_scenario_artifacts(rundir: RunDirectory, scenario, cfg: dict) -> None:
    rundir.write_text("scenario.json", scenario_to_json(scenario))
    rundir.write_text("coverage.csv", scenario.coverage.to_csv(seed=scenario.seed))
    rundir.write_json(
        "coverage.json",
        {
            "format_version": FORMAT_VERSION,
            "seed": scenario.seed,
            "threshold_db": scenario.threshold_db,
            "cells": scenario.coverage.to_records(),
        },
    )
    rundir.write_json("config.json", cfg)


def _coverage_summary(scenario) -> dict:
    cov = scenario.coverage
    return {
        "num_mbs": scenario.num_mbs,
        "terrestrial_holes": int(cov.terrestrial_hole.sum()),
        "global_holes": int(cov.global_hole.sum()),
        "geo_snr_db_min": float(cov.geo_snr_db.min()),
        "geo_snr_db_max": float(cov.geo_snr_db.max()),
    }


def cmd_generate(args) -> int:
    overrides: dict = {}
    if args.no_geo:
        overrides = {"mdp": {"geo_enabled": False}}
    cfg = load_config(args.config, overrides)
    seed = args.seed if args.seed is not None else cfg["seed"]
    cfg["seed"] = seed
    scenario = generate_scenario(seed, cfg)
    rundir = RunDirectory(args.out)
    rundir.acquire(force=args.force)
    try:
        _write_scenario_artifacts(rundir, scenario, cfg)
        summary = _coverage_summary(scenario)
        rundir.write_json(
            "summary.json",
            {"format_version": FORMAT_VERSION, "seed": seed, **summary},
        )
        print(json.dumps(summary, indent=2))
    finally:
        rundir.release()
    return 0


def _training_config(cfg: dict, args) -> TrainerConfig:
    t = dict(cfg["training"])
    if args.seed is not None:
        t["seed"] = args.seed
    for key in ("episodes", "step_cap", "batch_size"):
        v = getattr(args, key, None)
        if v is not None:
            t[key] = v
    if getattr(args, "learning_rate", None) is not None:
        t["learning_rate"] = args.learning_rate
    if getattr(args, "hidden", None):
        t["hidden"] = tuple(args.hidden)
    return TrainerConfig.from_dict(t)


def _load_scenario_arg(args, cfg: dict):
    path = Path(args.scenario)
    scenario = scenario_from_json(path.read_text())
    if args.weights is not None:
        scenario = dataclasses.replace(scenario, weights=tuple(args.weights))
    if getattr(args, "no_geo", False):
        scenario = with_geo_enabled(scenario, False)
    return scenario


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    scenario = _load_scenario_arg(args, cfg)
    tcfg = _training_config(cfg, args)
    cfg = deep_merge(
        cfg,
        {
            "training": tcfg.to_dict(),
            "mdp": {"weights": list(scenario.weights), "geo_enabled": scenario.geo_enabled},
            "seed": scenario.seed,
        },
    )
    rundir = RunDirectory(args.out)
    rundir.acquire(force=args.force)
    try:
        net, record = train(scenario, tcfg)
        _write_scenario_artifacts(rundir, scenario, cfg)
        rundir.write_text("rewards.csv", rewards_to_csv(record))
        rundir.write_text(
            "trajectory.csv", trajectory_to_csv(record.trajectory, tcfg.seed)
        )
        save_checkpoint(
            rundir.path / "checkpoint.npz",
            net,
            config=cfg["training"],
            seed=tcfg.seed,
        )
        summary = make_summary_payload(
            scenario,
            record.trajectory,
            tcfg.seed,
            extra={
                "episodes": len(record.episode_rewards),
                "wallclock_s": record.wallclock_s,
            },
        )
        rundir.write_json("summary.json", summary)
        print(json.dumps({k: summary[k] for k in (
            "moves", "length_m", "total_reward", "handover_cost_total",
            "hole_steps", "energy_j", "done_reason")}, indent=2))
    finally:
        rundir.release()
    return 0


def _evaluation_payload(scenario, trajectory, seed) -> dict:
    payload = make_summary_payload(scenario, trajectory, seed)
    power = propulsion_power_w(scenario.energy.cruise_speed_mps, scenario.rotor)
    payload["cruise_power_w"] = power
    payload["energy_budget_j"] = available_energy_j(scenario.energy, scenario.rotor)
    payload["energy_feasible"] = payload["energy_j"] <= payload["energy_budget_j"]
    return payload


def _human_summary(title: str, p: dict) -> str:
    lines = [
        title,
        f"  moves:          {p['moves']}",
        f"  length:         {p['length_m']:.2f} m",
        f"  total reward:   {p['total_reward']:.4f}",
        f"  handover cost:  {p['handover_cost_total']:.2f}",
        f"  hole steps:     {p['hole_steps']}",
        f"  energy:         {p['energy_j']:.1f} J",
        f"  done reason:    {p['done_reason']}",
    ]
    return "\n".join(lines) + "\n"


def cmd_evaluate(args) -> int:
    run = RunDirectory(args.run)
    scenario = scenario_from_json(run.read_text("scenario.json"))
    if args.scenario is not None:
        scenario = scenario_from_json(Path(args.scenario).read_text())
    if args.no_geo:
        scenario = with_geo_enabled(scenario, False)
    net, _opt, tcfg = load_checkpoint(run.path / "checkpoint.npz")
    step_cap = int(tcfg.get("step_cap", 1000))
    trajectory = greedy_rollout(net, scenario, max_steps=step_cap)
    seed = int(tcfg.get("seed", scenario.seed))
    payload = _evaluation_payload(scenario, trajectory, seed)
    out = RunDirectory(args.out) if args.out else run
    suffix = "_no_geo" if args.no_geo else ""
    if args.out:
        out.acquire(force=args.force)
    try:
        out.write_json(f"evaluation{suffix}.json", payload)
        out.write_text(
            f"trajectory_eval{suffix}.csv", trajectory_to_csv(trajectory, seed)
        )
        out.write_text(
            f"evaluation{suffix}.txt",
            _human_summary(f"greedy rollout (geo_enabled={scenario.geo_enabled})", payload),
        )
    finally:
        if args.out:
            out.release()
    print(_human_summary(f"greedy rollout (geo_enabled={scenario.geo_enabled})", payload))
    return 0


def _oracle_payload(scenario, result, seed) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "seed": seed,
        "weights": list(scenario.weights),
        "geo_enabled": scenario.geo_enabled,
        "cost": result.cost,
        "sum_xi": result.sum_xi,
        "sum_eta": result.sum_eta,
        "sum_delta": result.sum_delta,
        "length_m": result.length_m,
        "energy_j": result.energy_j,
        "energy_feasible": result.energy_feasible,
        "budget_constrained": result.budget_constrained,
        "path": [list(p) for p in result.path],
    }


def cmd_oracle(args) -> int:
    cfg = load_config(args.config)
    scenario = _load_scenario_arg(args, cfg)
    result = exact_optimum(scenario)
    seed = scenario.seed
    rundir = RunDirectory(args.out)
    rundir.acquire(force=args.force)
    try:
        rundir.write_json("oracle.json", _oracle_payload(scenario, result, seed))
        rundir.write_text(
            "trajectory_oracle.csv", trajectory_to_csv(result.trajectory, seed)
        )
        rundir.write_json("config.json", cfg)
    finally:
        rundir.release()
    print(
        json.dumps(
            {
                "cost": result.cost,
                "length_m": result.length_m,
                "sum_eta": result.sum_eta,
                "hole_steps": result.trajectory.summary()["hole_steps"],
                "energy_feasible": result.energy_feasible,
            },
            indent=2,
        )
    )
    return 0


def cmd_ablate(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else cfg["seed"]
    cfg["seed"] = seed
    if args.weights is not None:
        cfg["mdp"]["weights"] = list(args.weights)
    scenario = generate_scenario(seed, cfg)
    rundir = RunDirectory(args.out)
    rundir.acquire(force=args.force)
    try:
        _write_scenario_artifacts(rundir, scenario, cfg)
        rows = {}
        for label, enabled in (("integrated", True), ("standalone", False)):
            variant = with_geo_enabled(scenario, enabled)
            result = exact_optimum(variant)
            rows[label] = _oracle_payload(variant, result, seed)
            rows[label]["hole_steps"] = result.trajectory.summary()["hole_steps"]
            rundir.write_text(
                f"trajectory_{label}.csv", trajectory_to_csv(result.trajectory, seed)
            )
        comparison = {
            "format_version": FORMAT_VERSION,
            "seed": seed,
            "integrated": rows["integrated"],
            "standalone": rows["standalone"],
        }
        rundir.write_json("comparison.json", comparison)
        table = (
            f"{'':14s}{'length_m':>12s}{'handover':>10s}{'holes':>7s}{'cost':>10s}\n"
        )
        for label in ("integrated", "standalone"):
            r = rows[label]
            table += (
                f"{label:14s}{r['length_m']:12.2f}{r['sum_eta']:10.2f}"
                f"{r['hole_steps']:7d}{r['cost']:10.4f}\n"
            )
        rundir.write_text("comparison.txt", table)
        print(table)
    finally:
        rundir.release()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skyplan",
        description="Plan UAV routes and link associations over an integrated "
        "satellite + cellular network.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario_arg=False):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--config", type=str, default=None, help="JSON config file")
        p.add_argument("--out", type=str, required=True, help="run directory")
        p.add_argument("--force", action="store_true", help="ignore a stale lock")
        if scenario_arg:
            p.add_argument("--scenario", type=str, required=True, help="scenario.json path")
            p.add_argument("--weights", type=float, nargs=3, default=None)
            p.add_argument("--no-geo", action="store_true")

    g = sub.add_parser("generate", help="create a scenario and its coverage map")
    common(g)
    g.add_argument("--no-geo", action="store_true")
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", help="train the value network on a scenario")
    common(t, scenario_arg=True)
    t.add_argument("--episodes", type=int, default=None)
    t.add_argument("--step-cap", dest="step_cap", type=int, default=None)
    t.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    t.add_argument("--learning-rate", dest="learning_rate", type=float, default=None)
    t.add_argument("--hidden", type=int, nargs="*", default=None)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("evaluate", help="greedy rollout from a trained run directory")
    e.add_argument("--run", type=str, required=True)
    e.add_argument("--scenario", type=str, default=None)
    e.add_argument("--out", type=str, default=None)
    e.add_argument("--seed", type=int, default=None)
    e.add_argument("--config", type=str, default=None)
    e.add_argument("--no-geo", action="store_true")
    e.add_argument("--force", action="store_true")
    e.set_defaults(func=cmd_evaluate)

    o = sub.add_parser("oracle", help="exact optimal plan for a scenario")
    common(o, scenario_arg=True)
    o.set_defaults(func=cmd_oracle)

    a = sub.add_parser("ablate", help="integrated vs standalone comparison pair")
    common(a)
    a.add_argument("--weights", type=float, nargs=3, default=None)
    a.set_defaults(func=cmd_ablate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        record = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(record), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
