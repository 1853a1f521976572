"""
Command line entry point.

    mtc-ec ec            --snr 2 --nodes 5 --blocklength 1000 --theta 0.01 [--epsilon 0.02]
    mtc-ec epsilon-opt   --config scenario.json
    mtc-ec sweep         --config sweep.json --out sweep.csv --jobs 4
    mtc-ec compensate    power|graceful|joint --config scenario.json
    mtc-ec figure        fig2|fig3|fig4|fig5|fig6 --out figures/
    mtc-ec mc-validate   --config scenario.json --samples 1000000 --seed 7

Exit codes: 0 success, 2 invalid configuration, 3 infeasible compensation,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from pydantic import ValidationError

from .config import ScenarioConfig, load_config
from .effective_capacity import ec_direct, ec_series, optimal_epsilon
from .errors import DomainError, InfeasibleError, NumericError
from .figures import FIGURES, reproduce_figure
from .montecarlo import ec_monte_carlo
from .runner import JOINT_COLUMNS, PLAN_COLUMNS, compensation_plan, run_scenario, write_csv

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_NUMERIC = 0, 2, 3, 4
# fixed shard count so Monte Carlo output does not depend on --jobs
MC_SHARDS = 8


class ConfigError(Exception):
    pass


def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="JSON scenario config (schema_version 1)")
    p.add_argument("--out", help="output CSV path (directory for `figure`)")
    p.add_argument("--method", help="series:M | direct | mc")
    p.add_argument("--seed", type=int, help="Monte Carlo seed (unsigned 64-bit)")
    p.add_argument("--samples", type=int, help="Monte Carlo sample count")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    g = p.add_argument_group("scenario overrides")
    g.add_argument("--nodes", type=int, dest="n_nodes")
    snr = g.add_mutually_exclusive_group()
    snr.add_argument("--snr", type=float, help="linear SNR")
    snr.add_argument("--snr-db", type=float, help="SNR in dB")
    g.add_argument("--blocklength", type=int)
    g.add_argument("--theta", type=float, dest="delay_exponent")
    g.add_argument("--epsilon", type=float)
    g.add_argument("--outage", type=float, help="delay-outage probability for the QoS columns")
    g.add_argument("--eta-alpha", type=float)
    g.add_argument("--eta-theta", type=float)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="mtc-ec",
        description="Effective capacity of finite-blocklength MTC nodes in Rayleigh "
                    "block fading, and interference compensation planning.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ec", parents=[common], help="EC at one point (epsilon optimized if absent)")
    sub.add_parser("epsilon-opt", parents=[common], help="EC-maximizing error probability")
    sub.add_parser("sweep", parents=[common], help="evaluate the sweep axis in the config")
    comp = sub.add_parser("compensate", parents=[common], help="plan EC restoration")
    comp.add_argument("strategy", choices=("power", "graceful", "joint"))
    fig = sub.add_parser("figure", parents=[common], help="write figure datasets")
    fig.add_argument("figure_id")
    sub.add_parser("mc-validate", parents=[common],
                   help="cross-check Monte Carlo against quadrature and series")
    return parser


def _config_from_args(args) -> ScenarioConfig:
    data = load_config(args.config) if args.config else {}
    scenario = dict(data.get("scenario") or {})
    for key in ("n_nodes", "blocklength", "delay_exponent"):
        if getattr(args, key) is not None:
            scenario[key] = getattr(args, key)
    if args.snr is not None:
        scenario.update(snr=args.snr, snr_unit="linear")
    if args.snr_db is not None:
        scenario.update(snr=args.snr_db, snr_unit="db")
    data["scenario"] = scenario
    if args.epsilon is not None:
        data["epsilon"] = args.epsilon
    if args.method is not None:
        data["method"] = args.method
    if args.seed is not None:
        data["seed"] = args.seed
    if args.samples is not None:
        data["samples"] = args.samples
    if args.outage is not None:
        data["qos"] = dict(data.get("qos") or {}, outage_probability=args.outage)
    if args.eta_alpha is not None or args.eta_theta is not None:
        pr = dict(data.get("priorities") or {})
        if args.eta_alpha is not None:
            pr["eta_alpha"] = args.eta_alpha
        if args.eta_theta is not None:
            pr["eta_theta"] = args.eta_theta
        data["priorities"] = pr
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        lines = []
        for err in exc.errors():
            loc = ".".join(str(p) for p in err["loc"]) or "config"
            lines.append(f"{loc}: {err['msg']}")
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(lines)) from None


def _out_path(args, config, default: str) -> Path:
    return Path(args.out or config.output_path or default)


def _fmt(v) -> str:
    return "-" if v is None else f"{v:.6g}" if isinstance(v, float) else str(v)


def _print_point(row):
    print(f"N={row['n_nodes']} snr={_fmt(row['snr'])} T_f={row['blocklength']} "
          f"theta={_fmt(row['delay_exponent'])} sinr={_fmt(row['sinr'])} [{row['method']}]")
    print(f"  epsilon={_fmt(row['epsilon'])}  EC={_fmt(row['ec'])} bpcu")
    print(f"  epsilon*={_fmt(row['epsilon_star'])}  EC_max={_fmt(row['ec_max'])} bpcu"
          + ("  (minimizer on the search bracket)" if row["degenerate"] else ""))
    if row.get("max_delay_at_outage") is not None:
        print(f"  D_max at outage {_fmt(row['outage_probability'])}: "
              f"{_fmt(row['max_delay_at_outage'])} symbol periods")


def _cmd_point(args, config, optimize: bool):
    if optimize:
        config = config.model_copy(update={"epsilon": None, "sweep": None})
    else:
        config = config.model_copy(update={"sweep": None})
    rows, columns = run_scenario(config, args.jobs)
    _print_point(rows[0])
    path = write_csv(rows, _out_path(args, config, f"{args.command}.csv"), columns)
    print(f"wrote {path}")


def _cmd_sweep(args, config):
    if config.sweep is None:
        raise ConfigError("sweep: a sweep axis is required for the sweep command")
    rows, columns = run_scenario(config, args.jobs)
    if columns == JOINT_COLUMNS:
        feasible = [r for r in rows if r.get("feasible")]
        print(f"{len(rows)} operational points, {len(feasible)} feasible")
    else:
        best = max(rows, key=lambda r: r["ec"])
        print(f"{len(rows)} points over {config.sweep.variable}; largest EC "
              f"{_fmt(best['ec'])} bpcu at {config.sweep.variable}="
              f"{_fmt(best[config.sweep.variable if config.sweep.variable != 'theta' else 'delay_exponent'])}")
    path = write_csv(rows, _out_path(args, config, "sweep.csv"), columns)
    print(f"wrote {path}")


def _cmd_compensate(args, config):
    plan, curve = compensation_plan(config, args.strategy, args.jobs)
    print(f"strategy: {plan.strategy}  (N={plan.n_nodes}, snr={_fmt(plan.snr)}, "
          f"theta={_fmt(plan.theta)}, T_f={plan.blocklength})")
    print(f"  recovering node SNR : {_fmt(plan.recovering_snr)}")
    print(f"  bystander SINR      : {_fmt(plan.bystander_sinr)}")
    print(f"  delay exponent      : {_fmt(plan.theta)} -> {_fmt(plan.new_theta)}")
    print(f"  loss factor         : {_fmt(plan.loss_factor)}")
    if plan.target_ec is not None:
        print(f"  restored EC_max     : {_fmt(plan.target_ec)} bpcu")
    if plan.objective_value is not None:
        print(f"  objective eta       : {_fmt(plan.objective_value)}")
    path = write_csv([plan.as_row()],
                     _out_path(args, config, f"compensate_{args.strategy}.csv"), PLAN_COLUMNS)
    print(f"wrote {path}")
    if curve:
        curve_path = path.with_name(path.stem + "_curve.csv")
        write_csv(curve, curve_path, JOINT_COLUMNS)
        print(f"wrote {curve_path}")


def _cmd_mc_validate(args, config):
    sc = config.scenario
    snr = sc.snr_linear
    sinr = snr / (1.0 + snr * (sc.n_nodes - 1))
    theta, t_f = sc.delay_exponent, sc.blocklength
    eps = config.epsilon
    if eps is None:
        eps = optimal_epsilon(sinr, theta, t_f).epsilon_star
    direct = ec_direct(sinr, theta, eps, t_f)
    series = ec_series(sinr, theta, eps, t_f, 4)
    mc, est = ec_monte_carlo(sinr, theta, eps, t_f, config.samples, config.seed,
                             shards=MC_SHARDS, jobs=args.jobs)
    z = (est.mean - direct.inner_expectation) / est.std_error if est.std_error > 0 else math.inf
    ok = abs(z) <= 3.0
    print(f"sinr={_fmt(sinr)} theta={_fmt(theta)} T_f={t_f} epsilon={_fmt(eps)}")
    print(f"  direct      EC={direct.ec:.10g}  inner={direct.inner_expectation:.10g}")
    print(f"  series(4)   EC={series.ec:.10g}  rel.dev={abs(series.ec - direct.ec) / direct.ec:.3g}")
    print(f"  monte carlo EC={mc.ec:.10g}  inner={est.mean:.10g} +- {est.std_error:.3g} "
          f"({est.samples} samples, seed {est.seed}); z={z:.3g} -> {'PASS' if ok else 'FAIL'}")
    row = {"sinr": sinr, "theta": theta, "blocklength": t_f, "epsilon": eps,
           "ec_direct": direct.ec, "ec_series4": series.ec, "ec_mc": mc.ec,
           "inner_direct": direct.inner_expectation, "inner_mc": est.mean,
           "std_error": est.std_error, "samples": est.samples, "seed": est.seed,
           "z_score": z, "agree_3sigma": ok}
    path = write_csv([row], _out_path(args, config, "mc_validate.csv"), list(row))
    print(f"wrote {path}")
    return EXIT_OK if ok else EXIT_NUMERIC


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        if args.command == "figure":
            if args.figure_id not in FIGURES:
                raise ConfigError(f"unknown figure {args.figure_id!r}; valid ids: "
                                  + ", ".join(FIGURES))
            for path in reproduce_figure(args.figure_id, args.out or "figures", args.jobs):
                print(f"wrote {path}")
            return EXIT_OK
        config = _config_from_args(args)
        if args.command == "ec":
            _cmd_point(args, config, optimize=False)
        elif args.command == "epsilon-opt":
            _cmd_point(args, config, optimize=True)
        elif args.command == "sweep":
            _cmd_sweep(args, config)
        elif args.command == "compensate":
            _cmd_compensate(args, config)
        elif args.command == "mc-validate":
            return _cmd_mc_validate(args, config)
        return EXIT_OK
    except (ConfigError, DomainError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NumericError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
