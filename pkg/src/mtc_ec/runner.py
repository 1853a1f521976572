"""Evaluate configured scenarios and sweeps into rows, and write them as CSV."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .channel import NetworkScenario
from .compensation import (JointPriorities, bystander_sinr, joint_curve, joint_optimize,
                           joint_point, plan_graceful, plan_power_control)
from .config import ScenarioConfig
from .effective_capacity import Method, effective_capacity, max_delay, optimal_epsilon
from .errors import DomainError, InfeasibleError

POINT_COLUMNS = (
    "n_nodes", "snr", "blocklength", "delay_exponent", "sinr", "method", "epsilon", "ec",
    "epsilon_star", "ec_max", "degenerate", "inner_expectation", "error_estimate",
    "outage_probability", "max_delay_at_outage", "outage_at_max_delay",
)
JOINT_COLUMNS = (
    "n_nodes", "snr", "blocklength", "delay_exponent", "bystander_op_sinr",
    "recovering_snr", "loss_factor", "new_theta", "eta_alpha", "eta_theta",
    "objective_value", "feasible",
)
PLAN_COLUMNS = (
    "strategy", "snr", "n_nodes", "theta", "blocklength", "recovering_snr",
    "bystander_sinr", "new_theta", "loss_factor", "objective_value", "target_ec",
)


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(rows: Iterable[dict], path: "str | Path", columns: Sequence[str],
              comments: Sequence[str] = ()) -> Path:
    """Write ``rows`` with a header row; ``comments`` become leading '# ' lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row.get(c)) for c in columns])
    return path


def evaluate_point(n_nodes, snr, blocklength, theta, method: Method, epsilon=None,
                   outage_probability=None, qos_max_delay=None) -> dict:
    """One dataset row: EC at ``epsilon`` (or at the optimum when it is None)."""
    scenario = NetworkScenario(n_nodes, snr, blocklength, theta)
    sinr = scenario.sinr
    opt_method = method if method.kind != "monte_carlo" else Method("direct")
    opt = optimal_epsilon(sinr, theta, blocklength, opt_method)
    eps = opt.epsilon_star if epsilon is None else epsilon
    if epsilon is None and method.kind != "monte_carlo":
        ev = opt.evaluation
    else:
        ev = effective_capacity(sinr, theta, eps, blocklength, method)
    row = {
        "n_nodes": scenario.n_nodes, "snr": snr, "blocklength": scenario.blocklength,
        "delay_exponent": theta, "sinr": sinr, "method": str(method), "epsilon": eps,
        "ec": ev.ec, "epsilon_star": opt.epsilon_star, "ec_max": opt.ec_max,
        "degenerate": opt.degenerate, "inner_expectation": ev.inner_expectation,
        "error_estimate": ev.error_estimate,
    }
    if outage_probability is not None:
        row["outage_probability"] = outage_probability
        if ev.ec > 0:
            row["max_delay_at_outage"] = max_delay(ev.ec, theta, outage_probability)
    if qos_max_delay is not None:
        row["outage_at_max_delay"] = math.exp(-theta * ev.ec * qos_max_delay)
    return row


def _point_task(args):
    return evaluate_point(*args)


def _joint_task(args):
    n_nodes, snr, blocklength, theta, x, priorities = args
    row = {"n_nodes": n_nodes, "snr": snr, "blocklength": blocklength,
           "delay_exponent": theta, "bystander_op_sinr": x}
    if priorities is not None:
        row.update(eta_alpha=priorities.eta_alpha, eta_theta=priorities.eta_theta)
    try:
        plan = joint_point(snr, n_nodes, theta, blocklength, x, priorities)
    except InfeasibleError:
        row["feasible"] = False
        return row
    row.update(recovering_snr=plan.recovering_snr, loss_factor=plan.loss_factor,
               new_theta=plan.new_theta, objective_value=plan.objective_value, feasible=True)
    return row


def _map(fn, tasks, jobs):
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def sweep_values(config: ScenarioConfig) -> list:
    sweep = config.sweep
    lo, hi = sweep.min, sweep.max
    if sweep.variable == "bystander_op_sinr":
        snr, n = config.scenario.snr_linear, config.scenario.n_nodes
        lo = bystander_sinr(snr, n) if lo is None else lo
        hi = snr / (1.0 + snr * (n - 1)) if hi is None else hi
    if sweep.spacing == "log":
        grid = np.geomspace(lo, hi, sweep.points)
    else:
        grid = np.linspace(lo, hi, sweep.points)
    grid[0], grid[-1] = lo, hi
    if sweep.variable in ("n_nodes", "blocklength"):
        return [int(round(v)) for v in grid]
    return [float(v) for v in grid]


def run_scenario(config: ScenarioConfig, jobs: int = 1) -> tuple[list[dict], Sequence[str]]:
    """Evaluate the configured point or sweep; rows come back in grid order."""
    sc = config.scenario
    base = {"n_nodes": sc.n_nodes, "snr": sc.snr_linear, "blocklength": sc.blocklength,
            "theta": sc.delay_exponent, "epsilon": config.epsilon}
    method = config.parsed_method
    p_out = config.qos.outage_probability if config.qos else None
    d_max = config.qos.max_delay if config.qos else None

    if config.sweep is not None and config.sweep.variable == "bystander_op_sinr":
        priorities = (JointPriorities(config.priorities.eta_alpha, config.priorities.eta_theta)
                      if config.priorities else None)
        tasks = [(sc.n_nodes, sc.snr_linear, sc.blocklength, sc.delay_exponent, x, priorities)
                 for x in sweep_values(config)]
        return _map(_joint_task, tasks, jobs), JOINT_COLUMNS

    points = [dict(base)]
    if config.sweep is not None:
        key = "theta" if config.sweep.variable == "theta" else config.sweep.variable
        points = [dict(base, **{key: v}) for v in sweep_values(config)]
    tasks = [(p["n_nodes"], p["snr"], p["blocklength"], p["theta"], method, p["epsilon"],
              p_out, d_max) for p in points]
    return _map(_point_task, tasks, jobs), POINT_COLUMNS


def compensation_plan(config: ScenarioConfig, strategy: str, jobs: int = 1):
    """Plan for ``strategy``; for 'joint' also return the audited eta curve rows."""
    sc = config.scenario
    args = (sc.snr_linear, sc.n_nodes, sc.delay_exponent, sc.blocklength)
    if strategy == "power":
        return plan_power_control(*args), []
    if strategy == "graceful":
        return plan_graceful(*args), []
    if strategy != "joint":
        raise ValueError(f"unknown strategy {strategy!r}")
    if config.priorities is None:
        raise DomainError("priorities: required for joint compensation")
    pr = JointPriorities(config.priorities.eta_alpha, config.priorities.eta_theta)
    curve = joint_curve(*args, jobs=jobs)
    plan = joint_optimize(*args, pr, curve=curve)
    rows = []
    for x, rho_c_o, alpha, theta_2 in curve:
        rows.append({
            "n_nodes": sc.n_nodes, "snr": sc.snr_linear, "blocklength": sc.blocklength,
            "delay_exponent": sc.delay_exponent, "bystander_op_sinr": x,
            "recovering_snr": rho_c_o, "loss_factor": alpha, "new_theta": theta_2,
            "eta_alpha": pr.eta_alpha, "eta_theta": pr.eta_theta,
            "objective_value": (None if theta_2 is None
                                else pr.eta_alpha * alpha + pr.eta_theta * theta_2),
            "feasible": theta_2 is not None,
        })
    return plan, rows
