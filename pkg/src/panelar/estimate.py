"""Pooled least squares and the per-cross-section statistics behind it.

All per-section sums run along contiguous rows, where numpy's reductions
use pairwise summation; cross-section merges are reductions over a fixed
index order, so results do not depend on scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .asymptotics import exact_second_moment
from .core import LimitLaw, RegimeKind
from .errors import (
    ConfigError,
    MissingInnovations,
    WrongRegime,
    ZeroDenominator,
    ZeroVariance,
)
from .simulate import PanelData

TRUE_INNOVATIONS = "true_innovations"
RESIDUALS = "residuals"


@dataclass(frozen=True)
class LseResult:
    """Pooled estimate with its per-section building blocks.

    ``per_section_num`` holds ``sum_t y_{i,t-1} eps_it`` computed from the
    true innovations when the panel carries them, otherwise from residuals
    ``y_it - rho_hat y_{i,t-1}``; ``mode`` records which.
    """

    rho_hat: float
    numerator: float
    denominator: float
    per_section_num: np.ndarray
    per_section_den: np.ndarray
    mode: str

    @property
    def error_from_innovations(self) -> float:
        """``sum_i num_i / denominator``, i.e. ``rho_hat - rho`` without cancellation."""
        if self.mode != TRUE_INNOVATIONS:
            raise MissingInnovations("estimation error needs the true innovations")
        return float(np.sum(self.per_section_num)) / self.denominator


def lse(panel: PanelData) -> LseResult:
    """Least-squares estimate ``sum y_t y_{t-1} / sum y_{t-1}^2`` over the panel."""
    y = panel.y
    lag = y[:, :-1]
    cur = y[:, 1:]
    per_den = np.sum(lag * lag, axis=1)
    per_cross = np.sum(lag * cur, axis=1)
    denominator = float(np.sum(per_den))
    if not denominator > 0.0:
        raise ZeroDenominator(
            "all lagged values are zero; T is too small or the data are degenerate"
        )
    numerator = float(np.sum(per_cross))
    rho_hat = numerator / denominator
    if panel.eps is not None:
        per_num = np.sum(lag * panel.eps, axis=1)
        mode = TRUE_INNOVATIONS
    else:
        per_num = np.sum(lag * (cur - rho_hat * lag), axis=1)
        mode = RESIDUALS
    return LseResult(rho_hat, numerator, denominator, per_num, per_den, mode)


@dataclass(frozen=True)
class CrossSectionStats:
    a: np.ndarray
    b: np.ndarray
    s: float
    r: float
    var_a_used: float
    mean_b_used: float
    standardization: str
    mode: str

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def ratio(self) -> float:
        """``S_N^T / R_N^T``."""
        return self.s / self.r

    @property
    def scaled_error(self) -> float:
        """``sqrt(N) P/Q (rho_hat - rho)`` recombined from ``s`` and ``r``."""
        return self.ratio * math.sqrt(self.var_a_used) / self.mean_b_used


STANDARDIZATIONS = ("exact_finite_t", "asymptotic")


def cross_section_stats(
    panel: PanelData,
    law: LimitLaw,
    standardization: str = "exact_finite_t",
    *,
    accept_residuals: bool = False,
    fit: LseResult | None = None,
) -> CrossSectionStats:
    """Normalized per-section statistics ``A_i^T``, ``B_i^T`` and ``S_N^T``, ``R_N^T``.

    ``exact_finite_t`` standardizes with the exact ``E[(A_1^T)^2]`` and
    ``E[B_1^T]`` at the panel's ``T``; ``asymptotic`` uses their limits.
    """
    if standardization not in STANDARDIZATIONS:
        raise ConfigError(f"unknown standardization {standardization!r}")
    if panel.eps is None and not accept_residuals:
        raise MissingInnovations(
            "panel has no innovations; pass accept_residuals=True to use residuals"
        )
    if panel.t_len != law.t_len or panel.n != law.n:
        raise ConfigError(
            f"law is for N={law.n}, T={law.t_len}; panel is N={panel.n}, T={panel.t_len}"
        )
    fit = fit if fit is not None else lse(panel)
    a = law.p_of_t * fit.per_section_num
    b = law.q_of_t * fit.per_section_den
    if standardization == "exact_finite_t":
        rep = exact_second_moment(law.rho, law.t_len, law.p_of_t, law.q_of_t)
        var_a, mean_b = rep.var_a, rep.e_b
    else:
        var_a, mean_b = law.limit_var_a, law.limit_e_b
    if not var_a > 0.0:
        raise ZeroVariance(f"Var(A_1^T) = {var_a}; T must be at least 2")
    n = a.shape[0]
    s = float(np.sum(a)) / math.sqrt(n) / math.sqrt(var_a)
    r = float(np.sum(b)) / n / mean_b
    return CrossSectionStats(a, b, s, r, var_a, mean_b, standardization, fit.mode)


# ---------------------------------------------------------------------------
# Explosive regime
# ---------------------------------------------------------------------------


def _beta_powers(beta: float, n: int) -> np.ndarray:
    return beta ** np.arange(n, dtype=np.float64)


def explosive_scaled_sums(eps: np.ndarray, rho: float) -> dict[str, np.ndarray]:
    """Per-section sums of the explosive recursion, rescaled by powers of ``beta = 1/rho``.

    Uses ``y_{t-1} = rho^{t-2} u_t`` with ``u_t = sum_{s<t} beta^{s-1} eps_s``
    so nothing of order ``rho^T`` is ever formed. Returns per-section arrays

    * ``num``: ``beta^{T-2} sum_t y_{t-1} eps_t``
    * ``den``: ``beta^{2(T-2)} sum_t y_{t-1}^2``
    * ``u``: ``u_{iT} = sum_{s=1}^{T-1} beta^{s-1} eps_s``
    * ``v``: ``v_{iT} = sum_{s=1}^{T} beta^{T-s} eps_s``
    """
    eps = np.asarray(eps, dtype=np.float64)
    T = eps.shape[-1]
    beta = 1.0 / rho
    fwd = _beta_powers(beta, T)  # beta^{s-1}, s = 1..T
    back = fwd[::-1]  # beta^{T-t}, t = 1..T
    partial = np.cumsum(eps * fwd, axis=-1)
    u_t = np.zeros_like(eps)
    u_t[..., 1:] = partial[..., :-1]
    return {
        "num": np.sum(back * u_t * eps, axis=-1),
        "den": np.sum((back * u_t) ** 2, axis=-1),
        "u": partial[..., -2] if T >= 2 else np.zeros(eps.shape[:-1]),
        "v": np.sum(back * eps, axis=-1),
    }


def explosive_statistic(eps: np.ndarray, rho: float) -> float:
    """``sqrt(N) rho^{T-2} (rho_hat - rho)`` for an ``N x T`` innovation block."""
    sums = explosive_scaled_sums(eps, rho)
    den = float(np.sum(sums["den"]))
    if not den > 0.0:
        raise ZeroDenominator("explosive denominator vanished")
    return math.sqrt(eps.shape[0]) * float(np.sum(sums["num"])) / den


@dataclass(frozen=True)
class ExplosiveUV:
    mean_uv: float
    mean_u2: float
    num_residual: float
    den_residual: float
    den_residual_rescaled: float


def explosive_uv_stats(panel: PanelData) -> ExplosiveUV:
    """Averages of ``u_iT v_iT`` and ``u_iT^2`` and their distance to the rescaled sums.

    ``num_residual`` is ``|beta^{T-2} (1/N) sum y eps - mean(u v)|`` and
    ``den_residual`` is ``|beta^{2(T-2)} (1/N) sum y^2 - mean(u^2)|``. The
    rescaled denominator actually tracks ``mean(u^2) / (1 - beta^2)``, so
    ``den_residual`` settles near ``mean(u^2) beta^2 / (1 - beta^2)``;
    ``den_residual_rescaled`` applies the ``(1 - beta^2)`` factor and is the
    one that vanishes.
    """
    if panel.regime is None or panel.regime.kind is not RegimeKind.EXPLOSIVE:
        raise WrongRegime("explosive_uv_stats needs a panel simulated as explosive")
    if panel.eps is None:
        raise MissingInnovations("explosive_uv_stats needs the true innovations")
    rho = panel.rho_used
    beta = 1.0 / rho
    sums = explosive_scaled_sums(panel.eps, rho)
    mean_uv = float(np.mean(sums["u"] * sums["v"]))
    mean_u2 = float(np.mean(sums["u"] ** 2))
    mean_num = float(np.mean(sums["num"]))
    mean_den = float(np.mean(sums["den"]))
    return ExplosiveUV(
        mean_uv=mean_uv,
        mean_u2=mean_u2,
        num_residual=abs(mean_num - mean_uv),
        den_residual=abs(mean_den - mean_u2),
        den_residual_rescaled=abs((1.0 - beta * beta) * mean_den - mean_u2),
    )
