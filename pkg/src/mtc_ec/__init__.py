"""Effective capacity of finite-blocklength MTC nodes in Rayleigh block fading."""

from .channel import FadingRealization, NetworkScenario, fb_rate, sinr_collision, sinr_general
from .compensation import (CompensationPlan, JointPriorities, bystander_sinr, compensation_loss,
                           ec_sinr_sensitivity, graceful_theta, joint_curve,
                           joint_operational_snr, joint_optimize, joint_point, joint_theta2,
                           plan_graceful, plan_power_control, power_control_snr)
from .effective_capacity import (EcEvaluation, Method, QosTarget, SeriesTerms, delay_outage,
                                 ec_direct, ec_series, effective_capacity, max_delay,
                                 optimal_epsilon, series_terms)
from .errors import BracketError, DomainError, EcError, InfeasibleError, NumericError
from .montecarlo import McEstimate, ec_monte_carlo
from .numerics import (Tolerance, find_root_monotone, gaussian_q, gaussian_q_inv,
                       integrate_exp_weighted, minimize_scalar_convex)

__version__ = "0.1.0"
