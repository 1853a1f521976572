"""
Sampling oracle for the EC expectation.

Fading powers are drawn as z = -ln(u) from numpy's PCG64 generator. A run
is split into shards; shard i is seeded with SeedSequence([seed, i]) and
the shard sums are combined in shard order, so the result depends only on
(seed, samples, shards) and never on how many workers ran the shards.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import fb_rate
from .effective_capacity import EcEvaluation, _check_common
from .errors import DomainError

MIN_SAMPLES = 1000
_CHUNK = 1 << 18


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    samples: int
    seed: int
    shards: int = 1
    degenerate: bool = False


def _shard_sizes(samples: int, shards: int) -> list[int]:
    base, extra = divmod(samples, shards)
    return [base + (1 if i < extra else 0) for i in range(shards)]


def _shard_sums(args):
    """Sum and sum of squares of (1 - eps) expm1(-theta T_f r(z)) over one shard."""
    sinr, theta, epsilon, blocklength, n, seed, index = args
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, index])))
    total = 0.0
    total_sq = 0.0
    left = n
    while left > 0:
        k = min(left, _CHUNK)
        u = 1.0 - rng.random(k)  # (0, 1], keeps log finite
        z = -np.log(u)
        w = (1.0 - epsilon) * np.expm1(-theta * blocklength * fb_rate(sinr, z, blocklength, epsilon))
        total += math.fsum(w)
        total_sq += math.fsum(w * w)
        left -= k
    return total, total_sq


def ec_monte_carlo(sinr: float, theta: float, epsilon: float, blocklength: int,
                   samples: int = 1_000_000, seed: int = 0, shards: int = 1,
                   jobs: int = 1) -> tuple[EcEvaluation, McEstimate]:
    """Monte Carlo EC. ``McEstimate`` describes the inner expectation E[eps + (1-eps)e^{-theta T r}]."""
    _check_common(sinr, theta, epsilon, blocklength)
    if not (0.0 < epsilon < 1.0):
        raise DomainError(f"Monte Carlo needs 0 < epsilon < 1, got {epsilon}")
    if int(samples) != samples or samples < MIN_SAMPLES:
        raise DomainError(f"samples must be an integer >= {MIN_SAMPLES}, got {samples}")
    if not (0 <= seed < 2 ** 64):
        raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed}")
    if shards < 1 or shards > samples:
        raise DomainError(f"shards must lie in [1, samples], got {shards}")

    tasks = [(sinr, theta, epsilon, blocklength, n, int(seed), i)
             for i, n in enumerate(_shard_sizes(int(samples), shards))]
    if jobs > 1 and shards > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            sums = list(pool.map(_shard_sums, tasks))
    else:
        sums = [_shard_sums(t) for t in tasks]

    total = math.fsum(s for s, _ in sums)
    total_sq = math.fsum(q for _, q in sums)
    n = int(samples)
    mean_w = total / n
    var = max(total_sq / n - mean_w * mean_w, 0.0) * n / (n - 1)
    std_error = math.sqrt(var / n)

    inner = 1.0 + mean_w
    ec = -math.log1p(mean_w) / (theta * blocklength)
    method = f"monte_carlo(samples={n},seed={seed})"
    estimate = McEstimate(inner, std_error, n, int(seed), shards, std_error == 0.0)
    evaluation = EcEvaluation(
        ec, epsilon, method, inner, sinr, theta, blocklength,
        std_error / (inner * theta * blocklength),
        {"std_error": std_error, "shards": shards, "degenerate": std_error == 0.0})
    return evaluation, estimate
