import pytest
from hypothesis import given
from hypothesis import strategies as st

from mtc_ec.compensation import (JointPriorities, bystander_sinr, compensation_loss,
                                 ec_sinr_sensitivity, graceful_theta, joint_curve,
                                 joint_operational_snr, joint_optimize, joint_point,
                                 joint_theta2, plan_graceful, plan_power_control,
                                 power_control_snr)
from mtc_ec.effective_capacity import max_delay, optimal_epsilon
from mtc_ec.errors import DomainError, InfeasibleError

# Independent chain: scipy.integrate.quad for the expectation, scipy.optimize
# minimize_scalar (bounded) for epsilon*, ratio of the two maxima.
ALPHA_C_1_5_01_1000 = 0.8029150595768859


# -- power control ------------------------------------------------------------

@pytest.mark.parametrize("snr, n, expected", [(2.0, 1, 2.0), (1.0, 5, 5.0), (2.0, 15, 58.0)])
def test_power_control_snr_hand_values(snr, n, expected):
    assert power_control_snr(snr, n) == expected


@pytest.mark.parametrize("snr, n, expected", [(1.0, 5, 1 / 9), (2.0, 15, 2 / 85)])
def test_bystander_sinr_hand_values(snr, n, expected):
    assert bystander_sinr(snr, n) == pytest.approx(expected, rel=1e-15)


@given(st.floats(min_value=0.01, max_value=100), st.integers(min_value=2, max_value=200))
def test_bystander_sinr_matches_interference_sum(snr, n):
    # one interferer at the raised SNR, n - 2 at the nominal SNR
    direct = snr / (1 + snr * (n - 2) + power_control_snr(snr, n))
    assert bystander_sinr(snr, n) == pytest.approx(direct, rel=1e-13)


def test_bystander_needs_two_nodes():
    with pytest.raises(DomainError):
        bystander_sinr(1.0, 1)


@given(st.floats(min_value=0.01, max_value=100), st.integers(min_value=1, max_value=200))
def test_power_control_restores_snr(snr, n):
    rec = power_control_snr(snr, n)
    assert rec / (1 + snr * (n - 1)) == pytest.approx(snr, rel=1e-14)


def test_compensation_loss_against_scipy_chain():
    assert compensation_loss(1.0, 5, 0.1, 1000) == pytest.approx(ALPHA_C_1_5_01_1000, abs=1e-6)


def test_compensation_loss_single_node():
    assert compensation_loss(1.0, 1, 0.1, 1000) == 1.0


def test_compensation_loss_in_unit_interval():
    for n in (2, 5, 10):
        assert 0 < compensation_loss(1.0, n, 0.01, 1000) < 1


@pytest.mark.parametrize("n", [2, 5, 10])
def test_loss_smaller_for_smaller_theta(n):
    assert compensation_loss(1.0, n, 0.001, 1000) < compensation_loss(1.0, n, 0.1, 1000)


# -- graceful degradation -----------------------------------------------------

def test_graceful_single_node_keeps_theta():
    assert graceful_theta(1.0, 1, 0.05, 1000).theta_i == 0.05


def test_graceful_restores_target_ec():
    theta_i, ec = graceful_theta(1.0, 5, 0.05, 1000)
    assert theta_i < 0.05
    assert ec == pytest.approx(optimal_epsilon(1.0, 0.05, 1000).ec_max, rel=1e-6)


def test_graceful_relaxes_more_for_more_nodes():
    thetas = [graceful_theta(1.0, n, 0.05, 1000).theta_i for n in (2, 4, 6)]
    assert thetas[0] > thetas[1] > thetas[2]


def test_graceful_infeasible_with_high_floor():
    with pytest.raises(InfeasibleError):
        graceful_theta(1.0, 5, 0.05, 1000, theta_min=0.04)


def test_plan_graceful_fields():
    plan = plan_graceful(1.0, 5, 0.05, 1000)
    assert plan.loss_factor == 1.0
    assert plan.recovering_snr == 1.0
    assert plan.bystander_sinr == pytest.approx(0.2, rel=1e-15)
    assert plan.target_ec == pytest.approx(optimal_epsilon(1.0, 0.05, 1000).ec_max, rel=1e-6)


def test_plan_power_control_fields():
    plan = plan_power_control(1.0, 5, 0.1, 1000)
    assert plan.recovering_snr == 5.0
    assert plan.recovering_sinr == pytest.approx(1.0, rel=1e-15)
    assert plan.new_theta == 0.1
    assert plan.loss_factor == pytest.approx(ALPHA_C_1_5_01_1000, abs=1e-6)
    assert set(plan.as_row()) >= {"strategy", "recovering_snr", "loss_factor", "target_ec"}


# -- joint model --------------------------------------------------------------

def test_joint_operational_snr_hand_value():
    assert joint_operational_snr(2.0, 15, 0.057) == pytest.approx(2 / 0.057 - 27, rel=1e-14)


def test_joint_operational_snr_endpoints():
    assert joint_operational_snr(2.0, 15, 2 / 85) == pytest.approx(58.0, rel=1e-13)
    assert joint_operational_snr(2.0, 15, 2 / 29) == pytest.approx(2.0, rel=1e-13)


def test_joint_operational_snr_outside_interval():
    with pytest.raises(DomainError):
        joint_operational_snr(2.0, 15, 0.1)
    with pytest.raises(DomainError):
        joint_operational_snr(2.0, 15, 0.01)


def test_joint_theta2_endpoints():
    assert joint_theta2(1.0, 5, 0.1, 1000, power_control_snr(1.0, 5)) == 0.1
    assert joint_theta2(1.0, 5, 0.1, 1000, 1.0) == pytest.approx(
        graceful_theta(1.0, 5, 0.1, 1000).theta_i, abs=1e-9)


def test_joint_curve_is_a_monotone_trade_off():
    curve = joint_curve(1.0, 5, 0.1, 1000, points=12)
    alphas = [a for _, _, a, _ in curve]
    thetas = [t for _, _, _, t in curve]
    assert all(a < b for a, b in zip(alphas, alphas[1:]))
    assert all(a > b for a, b in zip(thetas, thetas[1:]))
    assert curve[-1][2] == 1.0


def test_joint_curve_rows_identical_across_workers():
    assert joint_curve(1.0, 5, 0.1, 1000, points=8, jobs=1) == \
        joint_curve(1.0, 5, 0.1, 1000, points=8, jobs=4)


def test_joint_point_objective():
    pr = JointPriorities(1.0, 4.0)
    plan = joint_point(1.0, 5, 0.1, 1000, 0.15, pr)
    assert plan.objective_value == pytest.approx(plan.loss_factor + 4 * plan.new_theta, rel=1e-15)
    assert plan.recovering_sinr == pytest.approx(plan.recovering_snr / 5, rel=1e-15)


def test_joint_optimize_alpha_only_picks_graceful_end():
    plan = joint_optimize(1.0, 5, 0.1, 1000, JointPriorities(1.0, 0.0), points=12)
    assert plan.loss_factor == 1.0
    assert plan.bystander_sinr == pytest.approx(0.2, rel=1e-12)


def test_joint_optimize_theta_only_picks_power_control_end():
    plan = joint_optimize(1.0, 5, 0.1, 1000, JointPriorities(0.0, 1.0), points=12)
    assert plan.new_theta == 0.1
    assert plan.bystander_sinr == pytest.approx(1 / 9, rel=1e-12)


def test_priorities_validation():
    with pytest.raises(DomainError):
        JointPriorities(-1.0, 1.0)
    with pytest.raises(DomainError):
        JointPriorities(0.0, 0.0)


def test_delay_before_compensation_at_700():
    # colliding node at N = 5, rho = 1, theta = 0.1 tolerates about 2500 symbols at 1e-3
    ec = optimal_epsilon(0.2, 0.1, 700).ec_max
    assert max_delay(ec, 0.1, 1e-3) == pytest.approx(2500, rel=0.05)


# -- sensitivity --------------------------------------------------------------

def test_sensitivity_positive():
    assert ec_sinr_sensitivity(0.2, 0.01, 0.05, 1000) > 0


def test_sensitivity_smaller_for_stricter_delay():
    loose = ec_sinr_sensitivity(0.2, 0.001, 0.05, 1000)
    mid = ec_sinr_sensitivity(0.2, 0.01, 0.05, 1000)
    strict = ec_sinr_sensitivity(0.2, 0.1, 0.05, 1000)
    assert loose > mid > strict > 0


def test_sensitivity_matches_coarse_difference():
    from mtc_ec.effective_capacity import ec_direct
    h = 1e-3
    coarse = (ec_direct(0.5 + h, 0.01, 0.05, 1000).ec - ec_direct(0.5 - h, 0.01, 0.05, 1000).ec) / (2 * h)
    assert ec_sinr_sensitivity(0.5, 0.01, 0.05, 1000) == pytest.approx(coarse, rel=1e-4)


def test_sensitivity_step_domain():
    with pytest.raises(DomainError):
        ec_sinr_sensitivity(0.2, 0.01, 0.05, 1000, step=0.3)
