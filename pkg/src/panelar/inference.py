"""Confidence intervals and the panel unit-root test.

Inference is conditional on a regime the user declares; the rates differ
by orders of magnitude across the regimes and nothing here tries to pick
one from the data.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from scipy import special

from .core import RegimeKind, RegimeSpec, limit_law
from .errors import ConfigError, MissingParameters, RegimeMismatch
from .estimate import lse
from .simulate import PanelData

ALTERNATIVES = ("two_sided", "stationary_side", "explosive_side")


@dataclass
class InferenceResult:
    rho_hat: float
    regime_assumed: str
    rate: float
    limit_variance: float
    ci_low: float
    ci_high: float
    level: float
    test_statistic: float | None = None
    p_value: float | None = None
    alternative: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "InferenceResult":
        return cls(**d)


def _check_level(level: float) -> float:
    level = float(level)
    if not 0.0 < level < 1.0:
        raise ConfigError(f"level must lie in (0, 1), got {level}")
    return level


def _plug_in(
    kind: RegimeKind, rho_hat: float, N: int, T: int, params: dict | None
) -> tuple[float, float]:
    """Rate and limiting variance for the declared regime."""
    params = dict(params or {})
    if kind is RegimeKind.STATIONARY:
        if not abs(rho_hat) < 1.0:
            raise RegimeMismatch(f"stationary declared but rho_hat = {rho_hat}")
        return math.sqrt(N * T / ((1.0 - rho_hat) * (1.0 + rho_hat))), 1.0
    if kind is RegimeKind.EXPLOSIVE:
        if not abs(rho_hat) > 1.0:
            raise RegimeMismatch(f"explosive declared but rho_hat = {rho_hat}")
        law = limit_law(RegimeSpec.explosive(rho_hat), N, T)
        return abs(law.rate), law.limit_variance
    if kind is RegimeKind.UNIT_ROOT:
        law = limit_law(RegimeSpec.unit_root(), N, T)
        return law.rate, law.limit_variance
    try:
        if kind is RegimeKind.LOCAL_TO_UNITY:
            spec = RegimeSpec(kind, c=params["c"])
        else:
            spec = RegimeSpec(kind, c=params["c"], kt_exponent=params["kt_exponent"])
    except KeyError as exc:
        raise MissingParameters(
            f"{kind.value} needs declared parameter {exc.args[0]!r}"
        ) from None
    law = limit_law(spec, N, T)
    return abs(law.rate), law.limit_variance


def confidence_interval(
    panel: PanelData,
    regime_kind: str | RegimeKind,
    level: float = 0.95,
    params: dict | None = None,
) -> InferenceResult:
    """Normal-limit interval for ``rho`` centred at the pooled estimate.

    ``params`` supplies ``c`` (and ``kt_exponent``) for the drifting regimes;
    the stationary and explosive rates plug in ``rho_hat``.
    """
    level = _check_level(level)
    kind = RegimeKind.parse(regime_kind)
    rho_hat = lse(panel).rho_hat
    rate, var = _plug_in(kind, rho_hat, panel.n, panel.t_len, params)
    half = special.ndtri(0.5 + level / 2.0) * math.sqrt(var) / rate
    return InferenceResult(
        rho_hat=rho_hat,
        regime_assumed=kind.value,
        rate=rate,
        limit_variance=var,
        ci_low=rho_hat - half,
        ci_high=rho_hat + half,
        level=level,
    )


def unit_root_test(
    panel: PanelData, alternative: str = "two_sided", level: float = 0.95
) -> InferenceResult:
    """Test ``rho = 1`` with ``Z = sqrt(N) T (rho_hat - 1) / sqrt(2)``.

    ``stationary_side`` rejects for small ``Z``, ``explosive_side`` for large.
    The returned interval is the unit-root interval at ``level``.
    """
    if alternative not in ALTERNATIVES:
        raise ConfigError(f"alternative must be one of {ALTERNATIVES}")
    if panel.n < 2:
        raise ConfigError("unit_root_test needs N >= 2")
    res = confidence_interval(panel, RegimeKind.UNIT_ROOT, level)
    z = res.rate * (res.rho_hat - 1.0) / math.sqrt(res.limit_variance)
    if alternative == "two_sided":
        p = 2.0 * special.ndtr(-abs(z))
    elif alternative == "stationary_side":
        p = special.ndtr(z)
    else:
        p = special.ndtr(-z)
    res.test_statistic = float(z)
    res.p_value = float(min(1.0, p))
    res.alternative = alternative
    return res


def all_regime_intervals(
    panel: PanelData, level: float = 0.95, params: dict | None = None
) -> dict[str, InferenceResult | str]:
    """Interval under every regime that can be evaluated; errors are reported as text."""
    out: dict[str, InferenceResult | str] = {}
    for kind in RegimeKind:
        try:
            out[kind.value] = confidence_interval(panel, kind, level, params)
        except (RegimeMismatch, MissingParameters, ConfigError) as exc:
            out[kind.value] = f"not applicable: {exc}"
    return out
