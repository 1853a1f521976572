"""
Restoring the EC of one node that collides with N-1 others.

Three strategies are offered:

* power control: the node raises its SNR until its SINR equals the
  collision-free SNR; the other nodes lose EC (loss factor alpha_c),
* graceful degradation: the node keeps its power and relaxes its delay
  exponent theta until its maximal EC equals the collision-free one,
* joint: the bystander SINR is fixed at an operational point inside
  [rho_s, rho_i], the node boosts power accordingly and relaxes theta for
  the rest; the operational point maximizes eta_alpha*alpha + eta_theta*theta_2.

Every EC here is maximized over its own error probability with the
quadrature route (``ec_direct``).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

from .channel import NetworkScenario
from .effective_capacity import ec_direct, optimal_epsilon
from .errors import BracketError, DomainError, InfeasibleError, NumericError
from .numerics import Tolerance, find_root_monotone, minimize_scalar_convex

THETA_MIN = 1e-5
ROOT_TOL = Tolerance(abs_tol=1e-9, rel_tol=1e-9, max_iter=200)
JOINT_GRID_POINTS = 64
_INTERVAL_SLACK = 1e-12


@dataclass(frozen=True)
class JointPriorities:
    eta_alpha: float = 1.0
    eta_theta: float = 1.0

    def __post_init__(self):
        if self.eta_alpha < 0 or self.eta_theta < 0:
            raise DomainError("priorities must be >= 0")
        if self.eta_alpha == 0 and self.eta_theta == 0:
            raise DomainError("eta_alpha and eta_theta cannot both be zero")


@dataclass(frozen=True)
class CompensationPlan:
    strategy: str
    snr: float
    n_nodes: int
    theta: float
    blocklength: int
    recovering_snr: float
    bystander_sinr: float
    new_theta: float
    loss_factor: float
    objective_value: float | None = None
    target_ec: float | None = None

    @property
    def recovering_sinr(self) -> float:
        return self.recovering_snr / (1.0 + self.snr * (self.n_nodes - 1))

    def as_row(self) -> dict:
        return {
            "strategy": self.strategy, "snr": self.snr, "n_nodes": self.n_nodes,
            "theta": self.theta, "blocklength": self.blocklength,
            "recovering_snr": self.recovering_snr, "bystander_sinr": self.bystander_sinr,
            "new_theta": self.new_theta, "loss_factor": self.loss_factor,
            "objective_value": self.objective_value, "target_ec": self.target_ec,
        }


class GracefulResult(NamedTuple):
    theta_i: float
    ec_max: float


def _check(snr, n_nodes, theta=None, blocklength=None):
    # reuse the scenario invariants for the error messages
    NetworkScenario(n_nodes, snr, blocklength or 1000, theta or 1.0)


def _collision_sinr(snr, n_nodes):
    return snr / (1.0 + snr * (n_nodes - 1))


def _ec_max(sinr, theta, blocklength):
    return optimal_epsilon(sinr, theta, blocklength, "direct").ec_max


def power_control_snr(snr: float, n_nodes: int) -> float:
    """SNR at which the colliding node's SINR equals ``snr`` again."""
    _check(snr, n_nodes)
    return snr * (1.0 + snr * (n_nodes - 1))


def bystander_sinr(snr: float, n_nodes: int) -> float:
    """SINR of the other nodes once one node uses :func:`power_control_snr`."""
    _check(snr, n_nodes)
    if n_nodes < 2:
        raise DomainError("bystander SINR needs n_nodes >= 2")
    return snr / (1.0 + snr * (snr + 1.0) * (n_nodes - 1))


def compensation_loss(snr: float, n_nodes: int, theta: float, blocklength: int) -> float:
    """Ratio of the bystanders' maximal EC with and without power control."""
    _check(snr, n_nodes, theta, blocklength)
    if n_nodes == 1:
        return 1.0
    ec_after = _ec_max(bystander_sinr(snr, n_nodes), theta, blocklength)
    ec_before = _ec_max(_collision_sinr(snr, n_nodes), theta, blocklength)
    return ec_after / ec_before


def _theta_for_target(sinr, theta, blocklength, target, theta_min):
    """Largest theta' <= theta with max EC(sinr, theta') = target."""
    def gap(t):
        return _ec_max(sinr, t, blocklength) - target

    at_theta = gap(theta)
    if at_theta >= -ROOT_TOL.abs_tol * max(1.0, target) * 1e-3:
        return theta
    try:
        return find_root_monotone(gap, theta_min, theta, ROOT_TOL)
    except BracketError as exc:
        raise InfeasibleError(
            f"EC target {target:.6g} is not reached for any theta in [{theta_min}, {theta}] "
            f"at SINR {sinr:.6g}") from exc


def graceful_theta(snr: float, n_nodes: int, theta: float, blocklength: int,
                   theta_min: float = THETA_MIN) -> GracefulResult:
    """Relaxed delay exponent giving the collision-free maximal EC under collision."""
    _check(snr, n_nodes, theta, blocklength)
    target = _ec_max(snr, theta, blocklength)
    if n_nodes == 1:
        return GracefulResult(float(theta), target)
    sinr_i = _collision_sinr(snr, n_nodes)
    theta_i = _theta_for_target(sinr_i, theta, blocklength, target, theta_min)
    return GracefulResult(theta_i, _ec_max(sinr_i, theta_i, blocklength))


def _within(x, lo, hi):
    slack = _INTERVAL_SLACK * max(abs(lo), abs(hi))
    return lo - slack <= x <= hi + slack


def joint_operational_snr(snr: float, n_nodes: int, bystander_op_sinr: float) -> float:
    """Recovering node's SNR that leaves the bystanders at ``bystander_op_sinr``."""
    _check(snr, n_nodes)
    if n_nodes < 2:
        raise DomainError("the joint model needs n_nodes >= 2")
    rho_s, rho_i = bystander_sinr(snr, n_nodes), _collision_sinr(snr, n_nodes)
    if not _within(bystander_op_sinr, rho_s, rho_i):
        raise DomainError(
            f"bystander_op_sinr {bystander_op_sinr} outside [{rho_s}, {rho_i}]")
    return snr / bystander_op_sinr - 1.0 - snr * (n_nodes - 2)


def joint_theta2(snr: float, n_nodes: int, theta: float, blocklength: int,
                 rho_c_o: float, theta_min: float = THETA_MIN) -> float:
    """Delay exponent completing the compensation when the node transmits at ``rho_c_o``."""
    _check(snr, n_nodes, theta, blocklength)
    if not _within(rho_c_o, snr, power_control_snr(snr, n_nodes)):
        raise DomainError(
            f"rho_c_o {rho_c_o} outside [{snr}, {power_control_snr(snr, n_nodes)}]")
    target = _ec_max(snr, theta, blocklength)
    sinr = rho_c_o / (1.0 + snr * (n_nodes - 1))
    return _theta_for_target(sinr, theta, blocklength, target, theta_min)


@lru_cache(maxsize=16384)
def _operational_point(snr, n_nodes, theta, blocklength, rho_s_o, theta_min):
    """(rho_c_o, alpha_c_o, theta_2) at one operational point; theta_2 is None if infeasible."""
    rho_c_o = joint_operational_snr(snr, n_nodes, rho_s_o)
    # clip into the admissible interval so endpoint rounding stays legal
    rho_c_o = min(max(rho_c_o, snr), power_control_snr(snr, n_nodes))
    alpha = (_ec_max(rho_s_o, theta, blocklength)
             / _ec_max(_collision_sinr(snr, n_nodes), theta, blocklength))
    try:
        theta_2 = joint_theta2(snr, n_nodes, theta, blocklength, rho_c_o, theta_min)
    except InfeasibleError:
        theta_2 = None
    return rho_c_o, alpha, theta_2


def joint_point(snr: float, n_nodes: int, theta: float, blocklength: int,
                bystander_op_sinr: float, priorities: JointPriorities | None = None,
                theta_min: float = THETA_MIN) -> CompensationPlan:
    """Evaluate the joint model at one operational bystander SINR."""
    _check(snr, n_nodes, theta, blocklength)
    rho_c_o, alpha, theta_2 = _operational_point(
        float(snr), int(n_nodes), float(theta), int(blocklength),
        float(bystander_op_sinr), theta_min)
    if theta_2 is None:
        raise InfeasibleError(
            f"no theta_2 in [{theta_min}, {theta}] at rho_s_o={bystander_op_sinr}")
    eta = None
    if priorities is not None:
        eta = priorities.eta_alpha * alpha + priorities.eta_theta * theta_2
    return CompensationPlan("joint", snr, n_nodes, theta, blocklength, rho_c_o,
                            float(bystander_op_sinr), theta_2, alpha, eta,
                            _ec_max(snr, theta, blocklength))


def _grid_task(args):
    snr, n_nodes, theta, blocklength, x, theta_min = args
    return _operational_point(snr, n_nodes, theta, blocklength, x, theta_min)


def joint_curve(snr: float, n_nodes: int, theta: float, blocklength: int,
                points: int = JOINT_GRID_POINTS, jobs: int = 1,
                theta_min: float = THETA_MIN) -> list[tuple[float, float, float, float | None]]:
    """Trade-off curve: (rho_s_o, rho_c_o, alpha_c_o, theta_2) on a uniform grid over [rho_s, rho_i].

    Rows come back in grid order whatever the number of workers.
    """
    _check(snr, n_nodes, theta, blocklength)
    if n_nodes < 2:
        raise DomainError("the joint model needs n_nodes >= 2")
    if points < 2:
        raise DomainError("the joint grid needs at least 2 points")
    rho_s, rho_i = bystander_sinr(snr, n_nodes), _collision_sinr(snr, n_nodes)
    step = (rho_i - rho_s) / (points - 1)
    grid = [rho_s + k * step for k in range(points - 1)] + [rho_i]
    tasks = [(float(snr), int(n_nodes), float(theta), int(blocklength), x, theta_min)
             for x in grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_grid_task, tasks))
    else:
        results = [_grid_task(t) for t in tasks]
    return [(x, *r) for x, r in zip(grid, results)]


def joint_optimize(snr: float, n_nodes: int, theta: float, blocklength: int,
                   priorities: JointPriorities, points: int = JOINT_GRID_POINTS,
                   jobs: int = 1, theta_min: float = THETA_MIN,
                   curve=None) -> CompensationPlan:
    """Operational point maximizing eta_alpha*alpha_c_o + eta_theta*theta_2.

    A uniform grid locates the best cell (ties go to the smaller rho_s_o),
    then golden-section search refines inside the two neighbouring cells.
    """
    if curve is None:
        curve = joint_curve(snr, n_nodes, theta, blocklength, points, jobs, theta_min)

    def eta(alpha, theta_2):
        return priorities.eta_alpha * alpha + priorities.eta_theta * theta_2

    values = [eta(a, t2) if t2 is not None else -math.inf for _, _, a, t2 in curve]
    best = max(range(len(values)), key=lambda k: (values[k], -k))
    if values[best] == -math.inf:
        raise InfeasibleError("no feasible operational point on [rho_s, rho_i]")

    lo = curve[max(best - 1, 0)][0]
    hi = curve[min(best + 1, len(curve) - 1)][0]
    x_best = curve[best][0]

    def neg_eta(x):
        _, a, t2 = _operational_point(float(snr), int(n_nodes), float(theta),
                                      int(blocklength), float(x), theta_min)
        return -eta(a, t2) if t2 is not None else math.inf

    refine_tol = Tolerance(abs_tol=1e-6 * (curve[-1][0] - curve[0][0]), max_iter=200)
    try:
        x_ref, f_ref = minimize_scalar_convex(neg_eta, lo, hi, refine_tol)
        if -f_ref > values[best]:
            x_best = x_ref
    except NumericError:
        pass
    return joint_point(snr, n_nodes, theta, blocklength, x_best, priorities, theta_min)


def plan_power_control(snr: float, n_nodes: int, theta: float, blocklength: int) -> CompensationPlan:
    _check(snr, n_nodes, theta, blocklength)
    rho_s = bystander_sinr(snr, n_nodes) if n_nodes > 1 else snr
    return CompensationPlan("power_control", snr, n_nodes, theta, blocklength,
                            power_control_snr(snr, n_nodes), rho_s, float(theta),
                            compensation_loss(snr, n_nodes, theta, blocklength),
                            target_ec=_ec_max(snr, theta, blocklength))


def plan_graceful(snr: float, n_nodes: int, theta: float, blocklength: int,
                  theta_min: float = THETA_MIN) -> CompensationPlan:
    _check(snr, n_nodes, theta, blocklength)
    theta_i, ec_max = graceful_theta(snr, n_nodes, theta, blocklength, theta_min)
    return CompensationPlan("graceful_theta", snr, n_nodes, theta, blocklength, float(snr),
                            _collision_sinr(snr, n_nodes), theta_i, 1.0, target_ec=ec_max)


def ec_sinr_sensitivity(sinr: float, theta: float, epsilon: float, blocklength: int,
                        step: float | None = None) -> float:
    """Central-difference dEC/dsinr at fixed epsilon.

    The estimate is repeated with half the step; a sign flip between the two
    means the step cannot resolve the derivative.
    """
    h = 1e-4 * sinr if step is None else step
    if not (0 < h < sinr):
        raise DomainError(f"step must lie in (0, sinr), got {h}")
    tol = Tolerance(abs_tol=1e-14, rel_tol=1e-13, max_iter=200)

    def diff(hh):
        up = ec_direct(sinr + hh, theta, epsilon, blocklength, tol).ec
        down = ec_direct(sinr - hh, theta, epsilon, blocklength, tol).ec
        return (up - down) / (2.0 * hh)

    full, half = diff(h), diff(0.5 * h)
    if full == 0.0 or (full > 0) != (half > 0):
        raise NumericError(
            f"finite-difference sign is unstable at step {h}: {full:.3g} vs {half:.3g}",
            estimate=full)
    return full

