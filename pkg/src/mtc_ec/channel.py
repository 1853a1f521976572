"""Collision-channel SINR and the finite-blocklength achievable rate."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .numerics import gaussian_q_inv

LOG2_E = 1.0 / math.log(2.0)
MIN_RELIABLE_BLOCKLENGTH = 100


@dataclass(frozen=True)
class NetworkScenario:
    """N nodes at per-node SNR ``snr`` (linear), blocklength T_f, delay exponent theta."""

    n_nodes: int
    snr: float
    blocklength: int
    delay_exponent: float

    def __post_init__(self):
        if isinstance(self.n_nodes, bool) or int(self.n_nodes) != self.n_nodes or self.n_nodes < 1:
            raise DomainError(f"n_nodes must be an integer >= 1, got {self.n_nodes}")
        if not (math.isfinite(self.snr) and self.snr > 0):
            raise DomainError(f"snr must be a finite linear ratio > 0, got {self.snr}")
        if int(self.blocklength) != self.blocklength or self.blocklength < 1:
            raise DomainError(f"blocklength must be a positive integer, got {self.blocklength}")
        if not (math.isfinite(self.delay_exponent) and self.delay_exponent > 0):
            raise DomainError(f"delay_exponent must be > 0, got {self.delay_exponent}")
        object.__setattr__(self, "n_nodes", int(self.n_nodes))
        object.__setattr__(self, "blocklength", int(self.blocklength))
        if self.blocklength < MIN_RELIABLE_BLOCKLENGTH:
            warnings.warn(
                f"blocklength {self.blocklength} < {MIN_RELIABLE_BLOCKLENGTH}: "
                "the normal approximation of the achievable rate is unreliable",
                stacklevel=3)

    @property
    def sinr(self) -> float:
        return sinr_collision(self)


@dataclass(frozen=True)
class FadingRealization:
    envelope_sq: float

    def __post_init__(self):
        if not self.envelope_sq >= 0:
            raise DomainError(f"envelope_sq must be >= 0, got {self.envelope_sq}")


def sinr_general(snr: float, interference_envelope_sum: float) -> float:
    if not snr > 0:
        raise DomainError(f"snr must be > 0, got {snr}")
    if interference_envelope_sum < 0:
        raise DomainError(
            f"interference envelope sum must be >= 0, got {interference_envelope_sum}")
    return snr / (1.0 + snr * interference_envelope_sum)


def sinr_collision(scenario: NetworkScenario) -> float:
    """SINR with the N-1 interfering envelopes replaced by their mean, N-1."""
    return sinr_general(scenario.snr, scenario.n_nodes - 1)


def dispersion_factor(log_gain):
    """sqrt(1 - (1+s)^-2) written in terms of log(1+s); exact near s = 0."""
    return np.sqrt(-np.expm1(-2.0 * np.asarray(log_gain)))


def fb_rate(sinr, fading, blocklength: int, epsilon: float):
    """Normal-approximation rate in bits per channel use.

    ``fading`` may be a :class:`FadingRealization`, a scalar z = |h|^2 or a
    numpy array of them. Negative rates for deep fades are returned as is.
    """
    if not (0.0 < epsilon < 1.0):
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not np.all(np.asarray(sinr) > 0):
        raise DomainError(f"sinr must be > 0, got {sinr}")
    if isinstance(fading, FadingRealization):
        fading = fading.envelope_sq
    log_gain = np.log1p(np.multiply(sinr, fading))
    rate = (log_gain - dispersion_factor(log_gain) / math.sqrt(blocklength)
            * gaussian_q_inv(epsilon)) * LOG2_E
    return float(rate) if np.ndim(rate) == 0 else rate
