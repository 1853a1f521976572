"""
Effective capacity of a node in quasi-static Rayleigh fading with
finite-blocklength packets.

Three evaluation routes share one definition,

    EC = -ln E_z[eps + (1 - eps) exp(-theta T_f r(z))] / (theta T_f),   z ~ Exp(1)

* ``ec_direct`` integrates the expectation numerically (ground truth),
* ``ec_series`` uses the truncated power series of exp(c x(z)),
* ``montecarlo.ec_monte_carlo`` samples it.

Internally the inner expectation is carried as ``1 + (1 - eps) K`` with
K = E[expm1(-theta T_f r)], so EC keeps full precision as theta -> 0.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .channel import LOG2_E, dispersion_factor, fb_rate
from .errors import DomainError, NumericError
from .numerics import Tolerance, gaussian_q_inv, integrate_exp_weighted, minimize_scalar_convex

QUAD_TOL = Tolerance(abs_tol=1e-10, rel_tol=1e-10, max_iter=200)
EPSILON_TOL = Tolerance(abs_tol=1e-6, rel_tol=1e-9, max_iter=200)
EPSILON_BRACKET = (1e-7, 0.999)
DEFAULT_ORDER = 2


@dataclass(frozen=True)
class Method:
    """How an EC value is evaluated: ``series`` (order M), ``direct`` or ``monte_carlo``."""

    kind: str = "direct"
    order: int = DEFAULT_ORDER
    samples: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("series", "direct", "monte_carlo"):
            raise DomainError(f"unknown method kind {self.kind!r}")
        if self.kind == "series" and (int(self.order) != self.order or self.order < 0):
            raise DomainError(f"series order must be an integer >= 0, got {self.order}")

    @classmethod
    def parse(cls, text: "str | Method", samples: int = 1_000_000, seed: int = 0) -> "Method":
        """Parse ``series:M``, ``series(M)``, ``direct`` or ``mc``/``monte_carlo``."""
        if isinstance(text, Method):
            return text
        t = text.strip().lower()
        if t == "direct":
            return cls("direct")
        if t in ("mc", "monte_carlo", "montecarlo"):
            return cls("monte_carlo", samples=samples, seed=seed)
        if t == "series":
            return cls("series", DEFAULT_ORDER)
        m = re.fullmatch(r"series\s*[:(]\s*(\d+)\s*\)?", t)
        if m:
            return cls("series", int(m.group(1)))
        raise DomainError(f"cannot parse method {text!r}; use series:M, direct or mc")

    def __str__(self):
        if self.kind == "series":
            return f"series({self.order})"
        if self.kind == "monte_carlo":
            return f"monte_carlo(samples={self.samples},seed={self.seed})"
        return "direct"


@dataclass(frozen=True)
class QosTarget:
    outage_probability: float
    max_delay: float | None = None

    def __post_init__(self):
        if not (0.0 < self.outage_probability < 1.0):
            raise DomainError(
                f"outage_probability must lie in (0, 1), got {self.outage_probability}")
        if self.max_delay is not None and not self.max_delay > 0:
            raise DomainError(f"max_delay must be > 0, got {self.max_delay}")


@dataclass(frozen=True)
class EcEvaluation:
    ec: float
    epsilon: float
    method: str
    inner_expectation: float
    sinr: float
    theta: float
    blocklength: int
    error_estimate: float = 0.0
    diagnostics: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class SeriesTerms:
    """Quantities of the truncated series: c, d, M, the moment integrals and J."""

    c: float
    d: float
    truncation_order: int
    sinr: float
    moments: tuple[float, ...]
    j_value: float

    def x_of_z(self, z):
        return dispersion_factor(np.log1p(np.multiply(self.sinr, z)))


def _check_common(sinr, theta, epsilon, blocklength):
    if not sinr > 0:
        raise DomainError(f"sinr must be > 0, got {sinr}")
    if not theta > 0:
        raise DomainError(f"theta must be > 0, got {theta}")
    if int(blocklength) != blocklength or blocklength < 1:
        raise DomainError(f"blocklength must be a positive integer, got {blocklength}")
    if not (0.0 <= epsilon <= 1.0):
        raise DomainError(f"epsilon must lie in [0, 1], got {epsilon}")
    if epsilon == 0.0:
        raise DomainError("epsilon = 0 makes Q^-1(epsilon) infinite; use epsilon in (0, 1]")


def _dispersion_coefficient(theta, epsilon, blocklength):
    return theta * math.sqrt(blocklength) * gaussian_q_inv(epsilon) * LOG2_E


def _breakpoints(sinr, d):
    # (1 + sinr z)^d drops by 1/e at z_e; geometric points resolve the peak near 0
    # for tiny |d| the peak is flatter than the weight; points past the cutoff are dropped
    z_e = math.expm1(min(1.0 / abs(d), 700.0)) / sinr
    pts = [z_e * 4.0 ** k for k in range(-3, 12)]
    pts.append(1.0 / sinr)
    return sorted(pts)


def _from_inner_minus_one(delta, theta, blocklength):
    """EC from inner - 1; the inner expectation must stay positive."""
    if not delta > -1.0:
        raise NumericError(f"inner expectation {1.0 + delta} is not positive")
    return -math.log1p(delta) / (theta * blocklength)


def _direct_k(sinr, theta, epsilon, blocklength, tol):
    """K = E[expm1(-theta T_f r(z))] and its quadrature result."""
    c = _dispersion_coefficient(theta, epsilon, blocklength)
    d = -theta * blocklength * LOG2_E
    theta_t = theta * blocklength

    def integrand(z):
        return np.expm1(-theta_t * fb_rate(sinr, z, blocklength, epsilon))

    res = integrate_exp_weighted(
        integrand, tol, sup_abs=max(1.0, math.expm1(c)),
        points=_breakpoints(sinr, d), full_output=True)
    return res


def ec_direct(sinr: float, theta: float, epsilon: float, blocklength: int,
              tol: Tolerance = QUAD_TOL) -> EcEvaluation:
    """EC with the fading expectation computed by adaptive quadrature."""
    _check_common(sinr, theta, epsilon, blocklength)
    if epsilon == 1.0:
        return EcEvaluation(0.0, 1.0, "direct", 1.0, sinr, theta, blocklength)
    res = _direct_k(sinr, theta, epsilon, blocklength, tol)
    delta = (1.0 - epsilon) * res.value
    inner = 1.0 + delta
    ec = _from_inner_minus_one(delta, theta, blocklength)
    err = (1.0 - epsilon) * res.error / (inner * theta * blocklength)
    return EcEvaluation(
        ec, epsilon, "direct", inner, sinr, theta, blocklength, err,
        {"quad_error": res.error, "laguerre_check": 1.0 + (1.0 - epsilon) * res.laguerre_value,
         "levels": res.levels, "z_max": res.z_max})


@lru_cache(maxsize=4096)
def _series_moments(sinr, theta, blocklength, order, tol=QUAD_TOL):
    d = -theta * blocklength * LOG2_E
    pts = _breakpoints(sinr, d)
    moments = []
    for m in range(order + 1):
        inv_fact = 1.0 / math.factorial(m)

        def integrand(z, m=m, inv_fact=inv_fact):
            log_gain = np.log1p(sinr * z)
            return np.exp(d * log_gain) * dispersion_factor(log_gain) ** m * inv_fact

        moments.append(integrate_exp_weighted(integrand, tol, sup_abs=inv_fact, points=pts))
    return tuple(moments)


def series_terms(sinr: float, theta: float, epsilon: float, blocklength: int,
                 truncation_order: int = DEFAULT_ORDER) -> SeriesTerms:
    """Build the truncated series J = sum_m c^m int (1+sinr z)^d x(z)^m/m! e^-z dz.

    The moment integrals do not depend on epsilon and are cached.
    """
    _check_common(sinr, theta, epsilon, blocklength)
    if int(truncation_order) != truncation_order or truncation_order < 0:
        raise DomainError(f"truncation_order must be an integer >= 0, got {truncation_order}")
    moments = _series_moments(float(sinr), float(theta), int(blocklength), int(truncation_order))
    c = _dispersion_coefficient(theta, epsilon, blocklength)
    d = -theta * blocklength * LOG2_E
    j = math.fsum(c ** m * moments[m] for m in range(truncation_order + 1))
    return SeriesTerms(c, d, int(truncation_order), float(sinr), moments, j)


def ec_series(sinr: float, theta: float, epsilon: float, blocklength: int,
              truncation_order: int = DEFAULT_ORDER) -> EcEvaluation:
    _check_common(sinr, theta, epsilon, blocklength)
    method = f"series({truncation_order})"
    if epsilon == 1.0:
        return EcEvaluation(0.0, 1.0, method, 1.0, sinr, theta, blocklength)
    terms = series_terms(sinr, theta, epsilon, blocklength, truncation_order)
    delta = (1.0 - epsilon) * (terms.j_value - 1.0)
    ec = _from_inner_minus_one(delta, theta, blocklength)
    return EcEvaluation(ec, epsilon, method, 1.0 + delta, sinr, theta, blocklength, 0.0,
                        {"c": terms.c, "d": terms.d, "j": terms.j_value})


def effective_capacity(sinr: float, theta: float, epsilon: float, blocklength: int,
                       method: "Method | str" = "direct") -> EcEvaluation:
    """Dispatch to the evaluation route named by ``method``."""
    method = Method.parse(method)
    if method.kind == "series":
        return ec_series(sinr, theta, epsilon, blocklength, method.order)
    if method.kind == "monte_carlo":
        from .montecarlo import ec_monte_carlo
        return ec_monte_carlo(sinr, theta, epsilon, blocklength, method.samples, method.seed)[0]
    return ec_direct(sinr, theta, epsilon, blocklength)


@dataclass(frozen=True)
class EpsilonOptimum:
    epsilon_star: float
    ec_max: float
    degenerate: bool
    evaluation: EcEvaluation


@lru_cache(maxsize=8192)
def _optimal_epsilon(sinr, theta, blocklength, method: Method, tol: Tolerance):
    if method.kind == "series":
        def objective(eps):
            return (1.0 - eps) * (series_terms(sinr, theta, eps, blocklength,
                                               method.order).j_value - 1.0)
    elif method.kind == "direct":
        def objective(eps):
            return (1.0 - eps) * _direct_k(sinr, theta, eps, blocklength, QUAD_TOL).value
    else:
        raise DomainError("optimal_epsilon supports the series and direct methods only")

    lo, hi = EPSILON_BRACKET
    eps_star, _ = minimize_scalar_convex(objective, lo, hi, tol)
    evaluation = effective_capacity(sinr, theta, eps_star, blocklength, method)
    degenerate = eps_star - lo <= tol.abs_tol or hi - eps_star <= tol.abs_tol
    return EpsilonOptimum(eps_star, evaluation.ec, degenerate, evaluation)


def optimal_epsilon(sinr: float, theta: float, blocklength: int,
                    method: "Method | str" = "direct",
                    tol: Tolerance = EPSILON_TOL) -> EpsilonOptimum:
    """Error probability maximizing EC, found by golden section on the inner expectation.

    The expectation is convex in epsilon, so minimizing it maximizes EC.
    ``degenerate`` is set when the minimizer sits on the search bracket.
    """
    if not sinr > 0:
        raise DomainError(f"sinr must be > 0, got {sinr}")
    if not theta > 0:
        raise DomainError(f"theta must be > 0, got {theta}")
    if int(blocklength) != blocklength or blocklength < 1:
        raise DomainError(f"blocklength must be a positive integer, got {blocklength}")
    return _optimal_epsilon(float(sinr), float(theta), int(blocklength),
                            Method.parse(method), tol)


def delay_outage(ec: float, theta: float, max_delay: float) -> float:
    """Probability that the delay exceeds ``max_delay`` symbol periods."""
    if not ec > 0 or not theta > 0:
        raise DomainError(f"ec and theta must be > 0, got ec={ec}, theta={theta}")
    if max_delay < 0:
        raise DomainError(f"max_delay must be >= 0, got {max_delay}")
    return math.exp(-theta * ec * max_delay)


def max_delay(ec: float, theta: float, outage_probability: float) -> float:
    """Largest delay bound (symbol periods) met with the given outage probability."""
    if not ec > 0 or not theta > 0:
        raise DomainError(f"ec and theta must be > 0, got ec={ec}, theta={theta}")
    if not (0.0 < outage_probability < 1.0):
        raise DomainError(f"outage_probability must lie in (0, 1), got {outage_probability}")
    return -math.log(outage_probability) / (theta * ec)
