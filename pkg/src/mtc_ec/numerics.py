"""
Numerical kernels: Gaussian Q and its inverse, integration against the
unit-exponential weight on [0, inf), golden-section minimization and
bracketed root finding.

Everything here is a pure function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from numpy.polynomial.laguerre import laggauss
from scipy import optimize, special

from .errors import BracketError, DomainError, NumericError


@dataclass(frozen=True)
class Tolerance:
    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    max_iter: int = 200

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be > 0, got {self.abs_tol}")
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol must be > 0, got {self.rel_tol}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise DomainError(f"max_iter must be a positive integer, got {self.max_iter}")


DEFAULT_TOL = Tolerance()

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------------------
# Gaussian Q function
# ---------------------------------------------------------------------------

def gaussian_q(t):
    """Upper tail probability of the standard normal, Q(t) = P(X > t).

    Accepts a scalar or an array. erfc keeps full relative accuracy in the
    far tail, where 1 - Phi(t) would cancel.
    """
    if np.ndim(t) == 0:
        t = float(t)
        if not math.isfinite(t):
            raise DomainError(f"gaussian_q needs a finite argument, got {t}")
        return 0.5 * math.erfc(t / _SQRT2)
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise DomainError("gaussian_q needs finite arguments")
    return 0.5 * special.erfc(t / _SQRT2)


# Acklam's rational approximation to the normal quantile, |rel err| < 1.2e-9.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def _normal_quantile_lower(p: float) -> float:
    # valid for 0 < p <= 0.5
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        return num / den
    q = p - 0.5
    r = q * q
    num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
    den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    return num / den


def gaussian_q_inv(p: float) -> float:
    """Inverse of :func:`gaussian_q` on the open interval (0, 1).

    A rational first guess is polished with Newton steps on Q itself, so
    the result is as accurate as ``gaussian_q``.
    """
    p = float(p)
    if not (0.0 < p < 1.0):
        raise DomainError(f"gaussian_q_inv needs 0 < p < 1, got {p}")
    if p == 0.5:
        return 0.0
    if p > 0.5:
        # 1 - p is exact here, so no precision is lost in the reflection
        return -gaussian_q_inv(1.0 - p)
    t = -_normal_quantile_lower(p)
    for _ in range(4):
        phi = math.exp(-0.5 * t * t) / _SQRT2PI
        step = (gaussian_q(t) - p) / phi
        t += step
        if abs(step) <= 1e-15 * max(1.0, abs(t)):
            break
    return t


# ---------------------------------------------------------------------------
# Integration against e^{-z} on [0, inf)
# ---------------------------------------------------------------------------

# 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

_K15_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_K15_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_G7_WEIGHTS = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes, 1, 3, 5 and the centre 7
_G7_WEIGHTS[[1, 3, 5]] = _WG[:3]
_G7_WEIGHTS[[13, 11, 9]] = _WG[:3]
_G7_WEIGHTS[7] = _WG[3]

_LAGUERRE_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _laguerre_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _LAGUERRE_CACHE:
        _LAGUERRE_CACHE[n] = laggauss(n)
    return _LAGUERRE_CACHE[n]


class QuadResult(NamedTuple):
    value: float
    error: float
    laguerre_value: float
    levels: int
    z_max: float


def _evaluate(f, z: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.asarray(f(z), dtype=float), z.shape)


def _adaptive_weighted(f, a: float, b: float, points: Sequence[float], tol: Tolerance):
    """Adaptive Gauss-Kronrod for int_a^b f(z) e^{-z} dz.

    Every refinement level evaluates all unconverged intervals in one
    vectorized call of ``f``.
    """
    edges = np.unique(np.clip(np.concatenate([[a], np.asarray(points, float), [b]]), a, b))
    lo, hi = edges[:-1], edges[1:]
    total_width = b - a
    frozen_value = 0.0
    frozen_error = 0.0
    for level in range(1, tol.max_iter + 1):
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        z = mid[:, None] + half[:, None] * _K15_NODES[None, :]
        fz = _evaluate(f, z) * np.exp(-z)
        if not np.all(np.isfinite(fz)):
            raise NumericError("integrand is not finite on the integration range",
                               estimate=math.nan, error_bound=math.inf)
        kronrod = half * (fz @ _K15_WEIGHTS)
        gauss = half * (fz @ _G7_WEIGHTS)
        err = np.abs(kronrod - gauss)

        value = frozen_value + float(math.fsum(kronrod))
        error = frozen_error + float(err.sum())
        target = max(tol.abs_tol, tol.rel_tol * abs(value))
        if error <= target:
            return value, error, level

        # intervals within their share of the budget are frozen; the rest split
        share = target * (hi - lo) / total_width
        tiny = (hi - lo) <= 1e-14 * max(1.0, b)
        keep = (err <= share) | tiny
        frozen_value += float(math.fsum(kronrod[keep]))
        frozen_error += float(err[keep].sum())
        lo, hi, mid = lo[~keep], hi[~keep], mid[~keep]
        if lo.size == 0:
            # only unsplittable intervals remain
            return value, error, level
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        order = np.argsort(lo, kind="stable")
        lo, hi = lo[order], hi[order]
    raise NumericError(
        f"quadrature did not converge in {tol.max_iter} refinement levels",
        estimate=value, error_bound=error)


def integrate_exp_weighted(
    f: Callable[[np.ndarray], np.ndarray],
    tol: Tolerance = DEFAULT_TOL,
    *,
    sup_abs: float | None = None,
    points: Sequence[float] = (),
    laguerre_nodes: int = 80,
    full_output: bool = False,
):
    """Compute int_0^inf f(z) e^{-z} dz.

    ``f`` must accept a numpy array of abscissae. The range is split at
    ``z_max``: the head [0, z_max] is integrated adaptively. If ``sup_abs``
    (a bound on |f| over the whole half-line) is given, z_max is chosen so
    that the discarded tail is below abs_tol/10 and the bound is added to
    the error; otherwise the tail is integrated with a shifted Gauss-Laguerre
    rule. A plain ``laguerre_nodes``-point Gauss-Laguerre value over the
    whole half-line is reported alongside as a cross-check.
    """
    if sup_abs is not None:
        if not sup_abs > 0:
            raise DomainError(f"sup_abs must be > 0, got {sup_abs}")
        z_max = max(1.0, math.log(10.0 * sup_abs / tol.abs_tol))
    else:
        z_max = math.log(1.0 / tol.abs_tol) + 10.0
    pts = [p for p in points if 0.0 < p < z_max]

    head, error, levels = _adaptive_weighted(f, 0.0, z_max, pts, tol)

    if sup_abs is not None:
        tail = 0.0
        error += sup_abs * math.exp(-z_max)
    else:
        u, w = _laguerre_rule(laguerre_nodes)
        uh, wh = _laguerre_rule(max(2, laguerre_nodes // 2))
        scale = math.exp(-z_max)
        tail = scale * float(w @ _evaluate(f, z_max + u))
        tail_coarse = scale * float(wh @ _evaluate(f, z_max + uh))
        error += abs(tail - tail_coarse)
    value = head + tail

    x, w = _laguerre_rule(laguerre_nodes)
    laguerre_value = float(w @ _evaluate(f, x))

    if full_output:
        return QuadResult(value, error, laguerre_value, levels, z_max)
    return value


# ---------------------------------------------------------------------------
# Scalar search
# ---------------------------------------------------------------------------

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def minimize_scalar_convex(f: Callable[[float], float], lo: float, hi: float,
                           tol: Tolerance = DEFAULT_TOL) -> tuple[float, float]:
    """Golden-section search for the minimizer of a unimodal ``f`` on [lo, hi].

    Returns ``(argmin, f(argmin))``. The endpoints are compared at the end so
    that a minimizer on the boundary is returned exactly.
    """
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    a, b = float(lo), float(hi)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(tol.max_iter):
        if b - a <= tol.abs_tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    else:
        if b - a > tol.abs_tol:
            best = (c, fc) if fc <= fd else (d, fd)
            raise NumericError(
                f"golden-section search did not reach abs_tol={tol.abs_tol} "
                f"in {tol.max_iter} iterations",
                estimate=best[0], error_bound=b - a, bracket=(a, b))

    x_best, f_best = (c, fc) if fc <= fd else (d, fd)
    for x_end in (lo, hi):
        f_end = f(x_end)
        if f_end < f_best:
            x_best, f_best = float(x_end), f_end
    return x_best, f_best


def find_root_monotone(f: Callable[[float], float], lo: float, hi: float,
                       tol: Tolerance = DEFAULT_TOL) -> float:
    """Root of a continuous monotone ``f`` bracketed by [lo, hi] (Brent's method)."""
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    f_lo, f_hi = f(lo), f(hi)
    if not (math.isfinite(f_lo) and math.isfinite(f_hi)):
        raise NumericError("function is not finite at the bracket ends",
                           bracket=(lo, hi))
    if f_lo == 0.0:
        return float(lo)
    if f_hi == 0.0:
        return float(hi)
    if f_lo * f_hi > 0.0:
        raise BracketError(
            f"no sign change on [{lo}, {hi}]: f(lo)={f_lo:.6g}, f(hi)={f_hi:.6g}",
            bracket=(lo, hi))

    ends = {float(lo): f_lo, float(hi): f_hi}

    def cached(x):
        v = ends.get(x)
        return f(x) if v is None else v

    root, info = optimize.brentq(
        cached, lo, hi, xtol=tol.abs_tol, rtol=max(tol.rel_tol, 4 * np.finfo(float).eps),
        maxiter=tol.max_iter, full_output=True, disp=False)
    if not info.converged:
        raise NumericError(f"root search did not converge: {info.flag}",
                           estimate=root, bracket=(lo, hi))
    return float(root)
