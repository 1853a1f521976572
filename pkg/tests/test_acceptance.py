"""Numbered acceptance criteria, one test each.

Every test collects all of its checks before asserting, so a failing
criterion reports every violated bound at once.  A PASS/FAIL line per
criterion is printed in the terminal summary.
"""

import itertools
import sys

import numpy as np
import pytest

from mtc_ec.cli import main
from mtc_ec.compensation import (JointPriorities, compensation_loss, ec_sinr_sensitivity,
                                 graceful_theta, joint_curve, joint_optimize, joint_point,
                                 power_control_snr)
from mtc_ec.effective_capacity import ec_direct, ec_series, max_delay, optimal_epsilon
from mtc_ec.montecarlo import ec_monte_carlo

RHO = (0.5, 1.0, 2.0)
NODES = (1, 5, 10)
THETAS = (0.001, 0.01, 0.1)
BLOCKLENGTHS = (500, 1000, 2000)


def _sinr(snr, n):
    return snr / (1 + snr * (n - 1))


def _report(failures, summary):
    print(summary)
    assert not failures, "\n".join(failures)


def _check(failures, ok, message):
    if not ok:
        failures.append(message)


@pytest.mark.criterion(1, "delay-bound arithmetic")
def test_criterion_01_delay_bound_arithmetic():
    f = []
    d1 = max_delay(1.0, 0.01, 1e-3)
    d2 = max_delay(1.0, 0.3, 1e-3)
    _check(f, 690 <= d1 <= 692, f"max_delay(1, 0.01, 1e-3) = {d1} not in [690, 692]")
    _check(f, 22.5 <= d2 <= 23.5, f"max_delay(1, 0.3, 1e-3) = {d2} not in [22.5, 23.5]")
    _report(f, f"D_max = {d1:.4f}, {d2:.4f}")


@pytest.mark.criterion(2, "series truncation accuracy")
def test_criterion_02_series_truncation_accuracy():
    f = []
    s = _sinr(2.0, 5)
    eps = optimal_epsilon(s, 0.01, 1000).epsilon_star
    ref = ec_direct(s, 0.01, eps, 1000).ec
    rel = {m: abs(ec_series(s, 0.01, eps, 1000, m).ec - ref) / ref for m in (0, 1, 2)}
    for m, bound in ((0, 0.08), (1, 0.015), (2, 0.005)):
        _check(f, rel[m] <= bound, f"M={m}: relative error {rel[m]:.4g} > {bound}")

    for rho, n, theta, t_f in itertools.product(RHO, NODES, THETAS, BLOCKLENGTHS):
        si = _sinr(rho, n)
        e = optimal_epsilon(si, theta, t_f).epsilon_star
        r = ec_direct(si, theta, e, t_f).ec
        errs = [abs(ec_series(si, theta, e, t_f, m).ec - r) / r for m in (0, 1, 2, 4)]
        _check(f, all(a > b for a, b in zip(errs, errs[1:])),
               f"not monotone at rho={rho}, N={n}, theta={theta}, T_f={t_f}: {errs}")
    _report(f, "relative errors at eps*: " + ", ".join(f"M={m}: {v:.4g}" for m, v in rel.items()))


@pytest.mark.criterion(3, "EC-vs-epsilon structure over N")
def test_criterion_03_ec_structure_over_n():
    f = []
    ec_max, stars = [], []
    for n in NODES:
        s = _sinr(2.0, n)
        opt = optimal_epsilon(s, 0.01, 1000, "series:2")
        ec_max.append(opt.ec_max)
        stars.append(opt.epsilon_star)
        curve = np.array([ec_series(s, 0.01, e, 1000, 2).ec for e in np.linspace(0.001, 0.2, 100)])
        signs = np.sign(np.diff(curve))
        peak = int(np.argmax(curve))
        unimodal = np.all(signs[:peak] > 0) and np.all(signs[peak:] < 0)
        _check(f, unimodal, f"N={n}: EC-vs-epsilon curve is not unimodal")
    _check(f, ec_max[0] > ec_max[1] > ec_max[2], f"EC_max not decreasing in N: {ec_max}")
    _check(f, stars[0] < stars[1] < stars[2], f"eps* not increasing in N: {stars}")
    _report(f, f"EC_max={ec_max}, eps*={stars}")


@pytest.mark.criterion(4, "graceful degradation example")
def test_criterion_04_graceful_degradation_example():
    f = []
    theta_i, ec = graceful_theta(1.0, 5, 0.05, 1000)
    before = max_delay(optimal_epsilon(0.2, 0.05, 1000).ec_max, 0.05, 1e-3)
    after = max_delay(ec, theta_i, 1e-3)
    _check(f, 0.021 <= theta_i <= 0.025, f"theta_i = {theta_i} not in [0.021, 0.025]")
    _check(f, 0.063 <= ec <= 0.069, f"EC_max = {ec} not in [0.063, 0.069]")
    _check(f, abs(before / 3600 - 1) <= 0.05, f"delay before {before} not within 5% of 3600")
    _check(f, abs(after / 4600 - 1) <= 0.05, f"delay after {after} not within 5% of 4600")
    _report(f, f"theta_i={theta_i:.6f}, EC_max={ec:.6f}, delay {before:.0f} -> {after:.0f}")


@pytest.mark.criterion(5, "joint optimum example")
def test_criterion_05_joint_optimum_example():
    f = []
    plan = joint_optimize(2.0, 15, 0.1, 1000, JointPriorities(1.0, 4.0))
    loss = 100 * (1 - plan.loss_factor)
    _check(f, 0.052 <= plan.bystander_sinr <= 0.062,
           f"rho_s_o = {plan.bystander_sinr} not in [0.052, 0.062]")
    _check(f, 0.93 <= plan.loss_factor <= 0.95, f"alpha_c_o = {plan.loss_factor} not in [0.93, 0.95]")
    _check(f, 0.048 <= plan.new_theta <= 0.058, f"theta_2 = {plan.new_theta} not in [0.048, 0.058]")
    _check(f, 7.8 <= plan.recovering_snr <= 8.4, f"rho_c_o = {plan.recovering_snr} not in [7.8, 8.4]")
    _check(f, abs(loss - 6.0) <= 1.5, f"bystander EC loss {loss:.3f}% not within 6 +- 1.5 points")
    _report(f, f"rho_s_o={plan.bystander_sinr:.5f}, alpha={plan.loss_factor:.4f}, "
               f"theta_2={plan.new_theta:.4f}, rho_c_o={plan.recovering_snr:.4f}, loss={loss:.2f}%")


@pytest.mark.criterion(6, "SINR sensitivity properties")
def test_criterion_06_sinr_sensitivity():
    f = []
    sinrs = sorted({_sinr(rho, n) for rho, n in itertools.product(RHO, NODES)})
    count = 0
    for s, eps, t_f in itertools.product(sinrs, (0.01, 0.05, 0.1), BLOCKLENGTHS):
        strict = ec_sinr_sensitivity(s, 0.1, eps, t_f)
        loose = ec_sinr_sensitivity(s, 0.001, eps, t_f)
        mid = ec_sinr_sensitivity(s, 0.01, eps, t_f)
        for theta, d in ((0.001, loose), (0.01, mid), (0.1, strict)):
            _check(f, d > 0, f"dEC/dsinr = {d} <= 0 at sinr={s}, theta={theta}, eps={eps}, T_f={t_f}")
        _check(f, strict < loose, f"theta=0.1 derivative {strict} >= theta=0.001 derivative {loose} "
                                  f"at sinr={s}, eps={eps}, T_f={t_f}")
        count += 1
    _report(f, f"{count} (sinr, eps, T_f) points checked")


# the 8 (rho, N, theta) corners; each theta sees both blocklengths, plus the grid centre
SPOTS = [(rho, n, theta, 500 if (rho == 0.5) != (theta == 0.1) else 2000)
         for rho, n, theta in itertools.product((0.5, 2.0), (1, 10), (0.001, 0.1))]
SPOTS.append((1.0, 5, 0.01, 1000))


@pytest.mark.criterion(7, "oracle triangle")
def test_criterion_07_oracle_triangle():
    f = []
    worst_series, worst_z = 0.0, 0.0
    for rho, n, theta, t_f in SPOTS:
        s = _sinr(rho, n)
        eps = optimal_epsilon(s, theta, t_f).epsilon_star
        direct = ec_direct(s, theta, eps, t_f)
        series = ec_series(s, theta, eps, t_f, 4)
        _, est = ec_monte_carlo(s, theta, eps, t_f, samples=10 ** 6, seed=2024)
        rel = abs(series.ec - direct.ec) / direct.ec
        z = abs(est.mean - direct.inner_expectation) / est.std_error
        worst_series, worst_z = max(worst_series, rel), max(worst_z, z)
        tag = f"rho={rho}, N={n}, theta={theta}, T_f={t_f}"
        _check(f, rel <= 1e-3, f"{tag}: series(4) vs direct relative gap {rel:.3g} > 1e-3")
        _check(f, z <= 3, f"{tag}: Monte Carlo {z:.2f} standard errors from direct")
    _report(f, f"worst series gap {worst_series:.3g}, worst MC z {worst_z:.2f}")


@pytest.mark.criterion(8, "joint model endpoint consistency")
def test_criterion_08_endpoint_consistency():
    f = []
    for snr, n, theta in ((1.0, 5, 0.1), (2.0, 15, 0.1), (0.5, 3, 0.05)):
        curve = joint_curve(snr, n, theta, 1000, points=2)
        (x_s, _, alpha_s, theta_s), (x_i, _, alpha_i, theta_i) = curve
        alpha_c = compensation_loss(snr, n, theta, 1000)
        th_i = graceful_theta(snr, n, theta, 1000).theta_i
        tag = f"rho={snr}, N={n}, theta={theta}"
        _check(f, abs(theta_s - theta) <= 1e-4, f"{tag}: theta_2 at rho_s = {theta_s}")
        _check(f, abs(alpha_s - alpha_c) <= 1e-4, f"{tag}: alpha at rho_s {alpha_s} vs {alpha_c}")
        _check(f, alpha_i == 1.0, f"{tag}: alpha at rho_i = {alpha_i!r}")
        _check(f, abs(theta_i - th_i) <= 1e-9, f"{tag}: theta_2 at rho_i {theta_i} vs {th_i}")
        point = joint_point(snr, n, theta, 1000, x_i)
        _check(f, point.loss_factor == 1.0, f"{tag}: joint_point alpha {point.loss_factor!r}")
    _report(f, "three scenarios checked at both ends")


@pytest.mark.criterion(9, "power-control exactness")
def test_criterion_09_power_control_exactness():
    f = []
    rng = np.random.default_rng(9)
    worst = 0.0
    for snr, n in zip(rng.uniform(0.01, 100, 20), rng.integers(1, 200, 20)):
        snr, n = float(snr), int(n)
        restored = power_control_snr(snr, n) / (1 + snr * (n - 1))
        err = abs(restored - snr) / snr
        worst = max(worst, err)
        _check(f, err <= 4 * sys.float_info.epsilon, f"rho={snr}, N={n}: relative error {err:.3g}")
    _report(f, f"worst relative error {worst:.3g}")


@pytest.mark.criterion(10, "loss factor ordering in theta")
def test_criterion_10_loss_ordering_in_theta():
    f = []
    for n in range(2, 11):
        lo, hi = compensation_loss(1.0, n, 0.001, 1000), compensation_loss(1.0, n, 0.1, 1000)
        _check(f, lo < hi, f"N={n}: alpha_c(0.001) = {lo} >= alpha_c(0.1) = {hi}")
    _report(f, "N = 2..10 checked")


def _write_config(tmp_path, name, data):
    import json
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


@pytest.mark.criterion(11, "byte-identical reproducibility")
def test_criterion_11_reproducibility(tmp_path):
    f = []
    scenario = {"n_nodes": 5, "snr": 1.0, "blocklength": 1000, "delay_exponent": 0.1}
    configs = {
        "sweep": ["sweep", "--config", _write_config(tmp_path, "sweep.json", {
            "schema_version": 1, "scenario": scenario, "method": "series:2",
            "sweep": {"variable": "epsilon", "min": 0.001, "max": 0.2, "points": 16}})],
        "mc_sweep": ["sweep", "--config", _write_config(tmp_path, "mc.json", {
            "schema_version": 1, "scenario": scenario, "method": "mc", "seed": 17,
            "samples": 20000, "epsilon": 0.05,
            "sweep": {"variable": "n_nodes", "min": 1, "max": 8, "points": 8}})],
        "joint": ["sweep", "--config", _write_config(tmp_path, "joint.json", {
            "schema_version": 1, "scenario": scenario,
            "priorities": {"eta_alpha": 1, "eta_theta": 4},
            "sweep": {"variable": "bystander_op_sinr", "points": 8}})],
        "mc_validate": ["mc-validate", "--config", _write_config(tmp_path, "val.json", {
            "schema_version": 1, "scenario": scenario, "epsilon": 0.05, "seed": 5,
            "samples": 100000})],
    }
    for name, argv in configs.items():
        outputs = []
        for run, jobs in (("a", 1), ("b", 1), ("c", 8)):
            out = tmp_path / f"{name}_{run}.csv"
            code = main(argv + ["--jobs", str(jobs), "--out", str(out)])
            _check(f, code == 0, f"{name} run {run} exited {code}")
            outputs.append(out.read_bytes() if out.exists() else b"")
        _check(f, outputs[0] == outputs[1], f"{name}: two consecutive runs differ")
        _check(f, outputs[0] == outputs[2], f"{name}: --jobs 1 and --jobs 8 differ")
    for run, jobs in (("a", 1), ("c", 8)):
        assert main(["figure", "fig3", "--jobs", str(jobs), "--out", str(tmp_path / run)]) == 0
    _check(f, (tmp_path / "a" / "fig3.csv").read_bytes() == (tmp_path / "c" / "fig3.csv").read_bytes(),
           "fig3: --jobs 1 and --jobs 8 differ")
    _report(f, f"{len(configs)} configs plus fig3 compared")
