"""Exact finite-T moments and Wiener-functional reference samplers.

With ``y_0 = 0`` and unit-variance innovations, ``E[y_{t-1}^2]`` is
``(1 - rho^{2(t-1)}) / (1 - rho^2)`` (or ``t - 1`` at ``rho^2 = 1``), and by
the martingale property ``E[(sum_t y_{t-1} eps_t)^2] = E[sum_t y_{t-1}^2]``.
Both normalized moments therefore reduce to one lag-square sum
``S(rho, T) = sum_{t=1}^T E[y_{t-1}^2]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import streams
from .core import RegimeSpec, limit_moments, log_normalizers, resolve_rho
from .errors import ConfigError

# |rho^2 - 1| below this switches to the rho^2 = 1 branch
UNIT_ROOT_SWITCH = 1e-12


@dataclass(frozen=True)
class MomentReport:
    e_a: float
    var_a: float
    e_b: float
    limit_var_a: float | None = None
    limit_e_b: float | None = None
    numerator_moment: float = math.nan
    denominator_mean: float = math.nan


def _unit_root_sum(T: int) -> float:
    return T * (T - 1) / 2.0


def lag_square_sum(
    rho: float, T: int, scale: float = 1.0, *, log_scale: float | None = None
) -> float:
    """``scale * sum_{t=1}^T (1 - rho^{2(t-1)}) / (1 - rho^2)`` in closed form.

    Evaluated as ``(expm1(T log rho^2) / d - T) / d`` with ``d = rho^2 - 1``.
    For long explosive samples the leading term is formed in log space, so a
    ``log_scale`` (natural log of a positive scale) can bring an otherwise
    unrepresentable sum back into range. Returns ``inf`` when the scaled sum
    itself exceeds the float range.
    """
    if T < 1:
        raise ConfigError(f"T must be >= 1, got {T}")
    if log_scale is None:
        if scale == 0.0:
            return 0.0
        log_scale = math.log(scale) if scale > 0 else None
    else:
        scale = math.exp(log_scale)
    x = rho * rho
    d = (rho - 1.0) * (rho + 1.0)
    if abs(d) < UNIT_ROOT_SWITCH:
        return scale * _unit_root_sum(T)
    if x == 0.0:
        return scale * (T - 1.0)
    L = T * (math.log(x) if x < 0.5 else math.log1p(d))
    if d < 0.0 or L < 600.0 or log_scale is None:
        try:
            return scale * (math.expm1(L) / d - T) / d
        except OverflowError:
            return math.inf
    log_first = log_scale + L + math.log(-math.expm1(-L)) - 2.0 * math.log(d)
    if log_first > 709.0:
        return math.inf
    return math.exp(log_first) - scale * T / d


def pair_count_sum(rho: float, T: int) -> float:
    """``sum_{j=0}^{T-2} (T-1-j) rho^{2j}`` evaluated as
    ``(T - 1 - T x + x^T) / (1 - x)^2`` with ``x = rho^2``.

    Algebraically equal to :func:`lag_square_sum`; kept as an independent
    evaluation for the martingale identity check.
    """
    x = rho * rho
    if abs(x - 1.0) < UNIT_ROOT_SWITCH:
        return _unit_root_sum(T)
    return ((T - 1) - T * x + x**T) / (1.0 - x) ** 2


def exact_second_moment(
    rho: float,
    T: int,
    p_of_t: float = 1.0,
    q_of_t: float = 1.0,
    *,
    log_p: float | None = None,
    log_q: float | None = None,
) -> MomentReport:
    """Exact ``E[(A_1^T)^2]`` and ``E[B_1^T]`` at finite ``T``.

    ``var_a = P^2 S`` and ``e_b = Q S`` with ``S`` the lag-square sum.
    ``log_p`` and ``log_q`` (logs of ``|P|`` and ``Q``) replace the plain
    normalizers when those would underflow. ``numerator_moment`` and
    ``denominator_mean`` carry the unnormalized ``E[(sum y eps)^2]`` and
    ``E[sum y^2]`` through the two closed forms; they are ``inf`` for long
    explosive samples, the normalized fields are not.
    """
    if T < 2:
        raise ConfigError(f"T must be >= 2, got {T}")
    if log_p is None:
        log_p = math.log(abs(p_of_t)) if p_of_t != 0.0 else None
    if log_q is None:
        log_q = math.log(q_of_t) if q_of_t > 0.0 else None
    var_a = 0.0 if log_p is None else lag_square_sum(rho, T, log_scale=2.0 * log_p)
    e_b = lag_square_sum(rho, T, q_of_t) if log_q is None else lag_square_sum(
        rho, T, log_scale=log_q
    )
    num = lag_square_sum(rho, T)
    try:
        den = pair_count_sum(rho, T)
    except OverflowError:
        den = math.inf
    return MomentReport(
        e_a=0.0,
        var_a=var_a,
        e_b=e_b,
        numerator_moment=num,
        denominator_mean=den,
    )


def finite_t_moments(spec: RegimeSpec, T: int) -> MomentReport:
    """Exact moments under the regime's own normalizers, with their limits."""
    rho = resolve_rho(spec, T)
    log_p, log_q = log_normalizers(spec, T)
    rep = exact_second_moment(rho, T, log_p=log_p, log_q=log_q)
    lv, le = limit_moments(spec)
    return MomentReport(
        e_a=rep.e_a,
        var_a=rep.var_a,
        e_b=rep.e_b,
        limit_var_a=lv,
        limit_e_b=le,
        numerator_moment=rep.numerator_moment,
        denominator_mean=rep.denominator_mean,
    )


# ---------------------------------------------------------------------------
# Wiener functionals
# ---------------------------------------------------------------------------

_MAX_CELLS = 4_000_000


def _check_sampler_args(grid_steps: int, R: int) -> None:
    if int(grid_steps) != grid_steps or grid_steps < 100:
        raise ConfigError(f"grid_steps must be an integer >= 100, got {grid_steps}")
    if int(R) != R or R < 1:
        raise ConfigError(f"R must be a positive integer, got {R}")


def brownian_paths(
    grid_steps: int, seed: int, rows: int, row_offset: int = 0, refine: int = 0
) -> np.ndarray:
    """Standard Brownian paths on ``[0, 1]`` at ``grid_steps * 2**refine`` steps.

    Returns shape ``(rows, steps + 1)`` with ``W(0) = 0``. Path ``r`` uses the
    coarse increments of substream ``(seed, 0)``; each refinement level adds
    Brownian-bridge midpoints from substream ``(seed, level)``, so a refined
    path passes through the same coarse nodes.
    """
    n = grid_steps
    dw = streams.normal_rows(seed, (0,), rows, n, row_offset) * math.sqrt(1.0 / n)
    w = np.zeros((rows, n + 1))
    np.cumsum(dw, axis=1, out=w[:, 1:])
    for level in range(1, refine + 1):
        h = 1.0 / n
        z = streams.normal_rows(seed, (level,), rows, n, row_offset)
        fine = np.empty((rows, 2 * n + 1))
        fine[:, 0::2] = w
        fine[:, 1::2] = 0.5 * (w[:, :-1] + w[:, 1:]) + math.sqrt(h / 4.0) * z
        w = fine
        n *= 2
    return w


def _chunks(R: int, width: int):
    step = max(1, _MAX_CELLS // width)
    for start in range(0, R, step):
        yield start, min(step, R - start)


def sample_unit_root_functionals(
    grid_steps: int = 10_000, R: int = 1, seed: int = 0, *, refine: int = 0
) -> np.ndarray:
    """Draws of ``((W(1)^2 - 1)/2, int_0^1 W(t)^2 dt)`` as an ``(R, 2)`` array.

    The integral is the left-endpoint Riemann sum on the grid.
    """
    _check_sampler_args(grid_steps, R)
    steps = grid_steps * 2**refine
    out = np.empty((R, 2))
    for start, rows in _chunks(R, steps + 1):
        w = brownian_paths(grid_steps, seed, rows, start, refine)
        out[start : start + rows, 0] = 0.5 * (w[:, -1] ** 2 - 1.0)
        out[start : start + rows, 1] = np.sum(w[:, :-1] ** 2, axis=1) / steps
    return out


def sample_local_to_unity_functionals(
    c: float, grid_steps: int = 10_000, R: int = 1, seed: int = 0, *, refine: int = 0
) -> np.ndarray:
    """Draws of the local-to-unity pair as an ``(R, 2)`` array.

    With ``b = exp(2c) - 1`` and ``f(t) = 1 / (1 + b t)``: the first
    coordinate is ``(b/2c) int f W dW`` (left-endpoint Ito sum), the second
    ``(b/2c)^2 int f^2 W^2 dt`` (left Riemann sum).
    """
    if c == 0:
        raise ConfigError("c must be nonzero")
    _check_sampler_args(grid_steps, R)
    steps = grid_steps * 2**refine
    b = math.expm1(2.0 * c)
    k = b / (2.0 * c)
    f = 1.0 / (1.0 + b * np.arange(steps) / steps)
    out = np.empty((R, 2))
    for start, rows in _chunks(R, steps + 1):
        w = brownian_paths(grid_steps, seed, rows, start, refine)
        left = w[:, :-1]
        ito = np.sum(f * left * np.diff(w, axis=1), axis=1)
        quad = np.sum((f * left) ** 2, axis=1) / steps
        out[start : start + rows, 0] = k * ito
        out[start : start + rows, 1] = k * k * quad
    return out


def mildly_explosive_limit_sample(c: float, R: int, seed: int = 0) -> np.ndarray:
    """Draws of ``(X Y, Y^2)`` with ``X, Y`` iid ``N(0, 1/(-2c))``; shape ``(R, 2)``."""
    if not c < 0:
        raise ConfigError(f"c must be negative, got {c}")
    if int(R) != R or R < 1:
        raise ConfigError(f"R must be a positive integer, got {R}")
    z = streams.normal_rows(seed, (0,), R, 2) * math.sqrt(-1.0 / (2.0 * c))
    return np.column_stack([z[:, 0] * z[:, 1], z[:, 1] ** 2])
