"""
Plot-ready datasets for the five result figures (fig2 ... fig6).

Each figure is written as one or more CSV files whose leading '#' lines
name the axes and the fixed parameters; the column layout is long format
(one ``series`` column), which gnuplot and pandas both read directly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .compensation import (JointPriorities, bystander_sinr, compensation_loss,
                           graceful_theta, joint_curve, joint_optimize)
from .effective_capacity import ec_direct, ec_series, max_delay, optimal_epsilon
from .errors import DomainError
from .runner import write_csv

FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6")
FIG5_BLOCKLENGTHS = (500, 700, 1000, 2000)
OUTAGE = 1e-3


def _sinr(snr, n):
    return snr / (1.0 + snr * (n - 1))


def _epsilon_grid(lo=0.001, hi=0.2, points=100):
    return [float(e) for e in np.linspace(lo, hi, points)]


def fig2(out_dir: Path, jobs: int = 1) -> list[Path]:
    """Per-node EC against epsilon for N = 1, 5, 10 (series, M = 2)."""
    snr, theta, t_f = 2.0, 0.01, 1000
    rows, optima = [], []
    for n in (1, 5, 10):
        s = _sinr(snr, n)
        for eps in _epsilon_grid():
            rows.append({"series": f"N={n}", "n_nodes": n, "epsilon": eps,
                         "ec": ec_series(s, theta, eps, t_f, 2).ec})
        opt = optimal_epsilon(s, theta, t_f, "series:2")
        optima.append({"n_nodes": n, "sinr": s, "epsilon_star": opt.epsilon_star,
                       "ec_max": opt.ec_max})
    head = [f"fig2: x=epsilon, y=ec [bpcu]; T_f={t_f}, snr={snr}, theta={theta}, method=series(2)"]
    return [
        write_csv(rows, out_dir / "fig2.csv", ("series", "n_nodes", "epsilon", "ec"), head),
        write_csv(optima, out_dir / "fig2_optima.csv",
                  ("n_nodes", "sinr", "epsilon_star", "ec_max"), head),
    ]


def fig3(out_dir: Path, jobs: int = 1, n_values=range(2, 21)) -> list[Path]:
    """Compensation loss factor alpha_c against N for theta = 0.001 and 0.1."""
    snr, t_f = 1.0, 1000
    rows = []
    for theta in (0.001, 0.1):
        for n in n_values:
            rows.append({"series": f"theta={theta}", "theta": theta, "n_nodes": n,
                         "sinr": _sinr(snr, n), "bystander_sinr": bystander_sinr(snr, n),
                         "alpha_c": compensation_loss(snr, n, theta, t_f)})
    head = [f"fig3: x=n_nodes, y=alpha_c; T_f={t_f}, snr={snr}"]
    return [write_csv(rows, out_dir / "fig3.csv",
                      ("series", "theta", "n_nodes", "sinr", "bystander_sinr", "alpha_c"), head)]


def fig4(out_dir: Path, jobs: int = 1) -> list[Path]:
    """EC against epsilon before and after relaxing theta (N = 5, rho = 1, theta = 0.05)."""
    snr, n, theta, t_f = 1.0, 5, 0.05, 1000
    theta_i, ec_target = graceful_theta(snr, n, theta, t_f)
    s = _sinr(snr, n)
    curves = (("no_collision", snr, theta), ("collision", s, theta),
              ("collision_relaxed", s, theta_i))
    rows, summary = [], []
    for label, sinr, th in curves:
        for eps in _epsilon_grid(0.001, 0.1):
            rows.append({"series": label, "sinr": sinr, "theta": th, "epsilon": eps,
                         "ec": ec_direct(sinr, th, eps, t_f).ec})
        opt = optimal_epsilon(sinr, th, t_f)
        summary.append({"series": label, "sinr": sinr, "theta": th,
                        "epsilon_star": opt.epsilon_star, "ec_max": opt.ec_max,
                        "max_delay_at_1e-3": max_delay(opt.ec_max, th, OUTAGE)})
    head = [f"fig4: x=epsilon, y=ec [bpcu]; N={n}, T_f={t_f}, snr={snr}, theta={theta}, "
            f"theta_i={theta_i!r}, ec_target={ec_target!r}, method=direct"]
    return [
        write_csv(rows, out_dir / "fig4.csv", ("series", "sinr", "theta", "epsilon", "ec"), head),
        write_csv(summary, out_dir / "fig4_summary.csv",
                  ("series", "sinr", "theta", "epsilon_star", "ec_max", "max_delay_at_1e-3"),
                  head),
    ]


def fig5(out_dir: Path, jobs: int = 1, blocklengths=FIG5_BLOCKLENGTHS,
         points: int = 16) -> list[Path]:
    """alpha_c_o against theta_2 along [rho_s, rho_i] for several blocklengths."""
    snr, n, theta = 1.0, 5, 0.1
    rows = []
    for t_f in blocklengths:
        ec_target = optimal_epsilon(snr, theta, t_f).ec_max
        ec_collided = optimal_epsilon(_sinr(snr, n), theta, t_f).ec_max
        for x, rho_c_o, alpha, theta_2 in joint_curve(snr, n, theta, t_f, points, jobs):
            rows.append({
                "series": f"T_f={t_f}", "blocklength": t_f, "bystander_op_sinr": x,
                "recovering_snr": rho_c_o, "alpha_c_o": alpha, "theta_2": theta_2,
                "max_delay_before": max_delay(ec_collided, theta, OUTAGE),
                "max_delay_after": (None if theta_2 is None
                                    else max_delay(ec_target, theta_2, OUTAGE)),
            })
    head = [f"fig5: x=alpha_c_o, y=theta_2; N={n}, snr={snr}, theta_1={theta}, "
            f"outage={OUTAGE}"]
    return [write_csv(rows, out_dir / "fig5.csv",
                      ("series", "blocklength", "bystander_op_sinr", "recovering_snr",
                       "alpha_c_o", "theta_2", "max_delay_before", "max_delay_after"), head)]


def fig6(out_dir: Path, jobs: int = 1) -> list[Path]:
    """Bystander EC against epsilon before and after the joint optimum (N = 15)."""
    snr, n, theta, t_f = 2.0, 15, 0.1, 1000
    priorities = JointPriorities(1.0, 4.0)
    plan = joint_optimize(snr, n, theta, t_f, priorities, jobs=jobs)
    before, after = _sinr(snr, n), plan.bystander_sinr
    rows = []
    for label, sinr in (("before", before), ("after", after)):
        for eps in _epsilon_grid(0.001, 0.2):
            rows.append({"series": label, "sinr": sinr, "epsilon": eps,
                         "ec": ec_direct(sinr, theta, eps, t_f).ec})
    summary = [dict(plan.as_row(), bystander_ec_loss=1.0 - plan.loss_factor)]
    head = [f"fig6: x=epsilon, y=ec [bpcu]; N={n}, T_f={t_f}, snr={snr}, theta_1={theta}, "
            f"eta_alpha={priorities.eta_alpha}, eta_theta={priorities.eta_theta}"]
    return [
        write_csv(rows, out_dir / "fig6.csv", ("series", "sinr", "epsilon", "ec"), head),
        write_csv(summary, out_dir / "fig6_plan.csv",
                  ("strategy", "snr", "n_nodes", "theta", "blocklength", "recovering_snr",
                   "bystander_sinr", "new_theta", "loss_factor", "objective_value",
                   "bystander_ec_loss"), head),
    ]


def reproduce_figure(figure_id: str, out_dir: "str | Path", jobs: int = 1) -> list[Path]:
    builders = {"fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5, "fig6": fig6}
    if figure_id not in builders:
        raise DomainError(f"unknown figure {figure_id!r}; valid ids: {', '.join(FIGURES)}")
    return builders[figure_id](Path(out_dir), jobs)
