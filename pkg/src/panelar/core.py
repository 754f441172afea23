"""Regime taxonomy, root resolution, normalizers and the limit catalog.

Each regime fixes a pair of normalizers ``(P(T), Q(T))`` that make the
per-section numerator ``sum_t y_{t-1} eps_t`` and denominator
``sum_t y_{t-1}^2`` bounded in probability, together with the limiting
second moment of the normalized numerator and the limiting mean of the
normalized denominator. The composite rate and limiting variance follow::

    rate = sqrt(N) * P(T) / Q(T)
    limit_variance = Var(A) / E[B]**2

so the whole catalog is driven by four numbers per regime.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import ConfigError, DegenerateT, InvalidRegime, NumericalError


class RegimeKind(str, enum.Enum):
    STATIONARY = "stationary"
    UNIT_ROOT = "unit_root"
    LOCAL_TO_UNITY = "local_to_unity"
    MILDLY_INTEGRATED = "mildly_integrated"
    MILDLY_EXPLOSIVE = "mildly_explosive"
    EXPLOSIVE = "explosive"

    @classmethod
    def parse(cls, value: "str | RegimeKind") -> "RegimeKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {
            "localtounity": "local_to_unity",
            "unitroot": "unit_root",
            "mildlyintegrated": "mildly_integrated",
            "mildlyexplosive": "mildly_explosive",
        }
        key = aliases.get(key.replace("_", ""), key)
        try:
            return cls(key)
        except ValueError:
            raise InvalidRegime(f"unknown regime kind {value!r}") from None


@dataclass(frozen=True)
class RegimeSpec:
    """One of the six root regimes with its parameters.

    ``rho`` is used by the fixed-root regimes (stationary, explosive), ``c`` by
    the drifting ones, and ``kt_exponent`` is the ``alpha`` in ``k_T = T**alpha``
    for the two mildly integrated/explosive regimes.
    """

    kind: RegimeKind
    rho: float | None = None
    c: float | None = None
    kt_exponent: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", RegimeKind.parse(self.kind))
        kind = self.kind
        for name in ("rho", "c", "kt_exponent"):
            v = getattr(self, name)
            if v is not None:
                v = float(v)
                if not math.isfinite(v):
                    raise InvalidRegime(f"{name} must be finite, got {v}")
                object.__setattr__(self, name, v)

        needs = {
            RegimeKind.STATIONARY: {"rho"},
            RegimeKind.UNIT_ROOT: set(),
            RegimeKind.LOCAL_TO_UNITY: {"c"},
            RegimeKind.MILDLY_INTEGRATED: {"c", "kt_exponent"},
            RegimeKind.MILDLY_EXPLOSIVE: {"c", "kt_exponent"},
            RegimeKind.EXPLOSIVE: {"rho"},
        }[kind]
        for name in ("rho", "c", "kt_exponent"):
            present = getattr(self, name) is not None
            if name in needs and not present:
                raise InvalidRegime(f"{kind.value} requires {name}")
            if name not in needs and present:
                raise InvalidRegime(f"{kind.value} does not take {name}")

        if kind is RegimeKind.STATIONARY and not abs(self.rho) < 1:
            raise InvalidRegime(f"stationary requires |rho| < 1, got {self.rho}")
        if kind is RegimeKind.EXPLOSIVE and not abs(self.rho) > 1:
            raise InvalidRegime(f"explosive requires |rho| > 1, got {self.rho}")
        if kind is RegimeKind.LOCAL_TO_UNITY and self.c == 0:
            raise InvalidRegime("local_to_unity requires c != 0")
        if kind is RegimeKind.MILDLY_INTEGRATED and not self.c > 0:
            raise InvalidRegime(f"mildly_integrated requires c > 0, got {self.c}")
        if kind is RegimeKind.MILDLY_EXPLOSIVE and not self.c < 0:
            raise InvalidRegime(f"mildly_explosive requires c < 0, got {self.c}")
        if self.kt_exponent is not None and not 0 < self.kt_exponent < 1:
            raise InvalidRegime(
                f"kt_exponent must lie in (0, 1), got {self.kt_exponent}"
            )

    @classmethod
    def stationary(cls, rho: float) -> "RegimeSpec":
        return cls(RegimeKind.STATIONARY, rho=rho)

    @classmethod
    def unit_root(cls) -> "RegimeSpec":
        return cls(RegimeKind.UNIT_ROOT)

    @classmethod
    def local_to_unity(cls, c: float) -> "RegimeSpec":
        return cls(RegimeKind.LOCAL_TO_UNITY, c=c)

    @classmethod
    def mildly_integrated(cls, c: float, kt_exponent: float) -> "RegimeSpec":
        return cls(RegimeKind.MILDLY_INTEGRATED, c=c, kt_exponent=kt_exponent)

    @classmethod
    def mildly_explosive(cls, c: float, kt_exponent: float) -> "RegimeSpec":
        return cls(RegimeKind.MILDLY_EXPLOSIVE, c=c, kt_exponent=kt_exponent)

    @classmethod
    def explosive(cls, rho: float) -> "RegimeSpec":
        return cls(RegimeKind.EXPLOSIVE, rho=rho)

    @classmethod
    def from_dict(cls, d: dict) -> "RegimeSpec":
        d = dict(d)
        try:
            kind = d.pop("kind")
        except KeyError:
            raise InvalidRegime("regime needs a 'kind'") from None
        extra = set(d) - {"rho", "c", "kt_exponent"}
        if extra:
            raise InvalidRegime(f"unknown regime keys: {sorted(extra)}")
        return cls(kind, **{k: v for k, v in d.items() if v is not None})

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind.value}
        for name in ("rho", "c", "kt_exponent"):
            v = getattr(self, name)
            if v is not None:
                out[name] = v
        return out

    def k_t(self, T: int) -> float:
        """``k_T = T**alpha`` for the mildly integrated/explosive regimes."""
        if self.kt_exponent is None:
            raise InvalidRegime(f"{self.kind.value} has no k_T sequence")
        return float(T) ** self.kt_exponent


@dataclass(frozen=True)
class LimitLaw:
    """Normalizers, composite rate and limiting normal variance.

    ``limit_var_a`` and ``limit_e_b`` are the limits of ``E[(A_1^T)^2]`` and
    ``E[B_1^T]``; ``limit_variance == limit_var_a / limit_e_b**2``.
    """

    kind: RegimeKind
    rho: float
    n: int
    t_len: int
    p_of_t: float
    q_of_t: float
    rate: float
    limit_variance: float
    limit_var_a: float
    limit_e_b: float


def _check_t(T: int, minimum: int = 1) -> int:
    if isinstance(T, bool) or int(T) != T or T < minimum:
        raise ConfigError(f"T must be an integer >= {minimum}, got {T!r}")
    return int(T)


def resolve_rho(spec: RegimeSpec, T: int) -> float:
    """Autoregressive root implied by ``spec`` at sample length ``T``."""
    T = _check_t(T)
    kind = spec.kind
    if kind in (RegimeKind.STATIONARY, RegimeKind.EXPLOSIVE):
        return spec.rho
    if kind is RegimeKind.UNIT_ROOT:
        return 1.0
    if kind is RegimeKind.LOCAL_TO_UNITY:
        return 1.0 - spec.c / T
    rho = 1.0 - spec.c / spec.k_t(T)
    if kind is RegimeKind.MILDLY_INTEGRATED and not 0.0 < rho < 1.0:
        raise DegenerateT(
            f"mildly_integrated root {rho} outside (0, 1) at T={T}; increase T"
        )
    if kind is RegimeKind.MILDLY_EXPLOSIVE and not rho > 1.0:
        raise DegenerateT(f"mildly_explosive root {rho} not above 1 at T={T}")
    return rho


def local_to_unity_moment(c: float) -> float:
    """``(2c - 1 + exp(-2c)) / (4c^2)``, the limiting ``E[B]`` for ``rho_T = 1 - c/T``.

    Tends to 1/2 as ``c -> 0``. For ``|2c| < 1/2`` the closed form cancels,
    so the series ``sum_k (-2c)^k / (k+2)!`` is summed instead.
    """
    x = 2.0 * c
    if abs(x) < 0.5:
        total, term, k = 0.0, 0.5, 0
        while abs(term) > 1e-18 * abs(total) or k < 2:
            total += term
            k += 1
            term *= -x / (k + 2)
        return total
    return (math.expm1(-x) + x) / (x * x)


def local_to_unity_variance(c: float) -> float:
    """``4c^2 / (2c - 1 + exp(-2c))``; equals 2 in the ``c -> 0`` limit."""
    return 1.0 / local_to_unity_moment(c)


def normalizers(spec: RegimeSpec, T: int) -> tuple[float, float]:
    """``(P(T), Q(T))`` for ``spec`` at sample length ``T``.

    For the explosive regime ``P = rho**-(T-2)`` keeps the sign of ``rho``,
    so the composite rate is negative when ``rho < -1`` and ``T`` is odd.
    """
    T = _check_t(T, 2)
    rho = resolve_rho(spec, T)
    kind = spec.kind
    if kind is RegimeKind.STATIONARY:
        one_m = (1.0 - rho) * (1.0 + rho)
        return math.sqrt(one_m / T), one_m / T
    if kind in (RegimeKind.UNIT_ROOT, RegimeKind.LOCAL_TO_UNITY):
        return 1.0 / T, 1.0 / (T * T)
    if kind is RegimeKind.MILDLY_INTEGRATED:
        tk = T * spec.k_t(T)
        return 1.0 / math.sqrt(tk), 1.0 / tk
    if kind is RegimeKind.MILDLY_EXPLOSIVE:
        p = 1.0 / (rho**T * spec.k_t(T))
        return p, p * p
    p = (1.0 / rho) ** (T - 2)
    return p, p * p


def log_normalizers(spec: RegimeSpec, T: int) -> tuple[float, float]:
    """``(log |P(T)|, log Q(T))``, finite even where ``P`` or ``Q`` underflow."""
    T = _check_t(T, 2)
    rho = resolve_rho(spec, T)
    kind = spec.kind
    if kind is RegimeKind.MILDLY_EXPLOSIVE:
        lp = -(T * math.log(rho) + math.log(spec.k_t(T)))
        return lp, 2.0 * lp
    if kind is RegimeKind.EXPLOSIVE:
        lp = -(T - 2) * math.log(abs(rho))
        return lp, 2.0 * lp
    p, q = normalizers(spec, T)
    return math.log(p), math.log(q)


def rate_ratio(spec: RegimeSpec, T: int) -> float:
    """``P(T)/Q(T)`` evaluated in closed form rather than by division."""
    T = _check_t(T, 2)
    rho = resolve_rho(spec, T)
    kind = spec.kind
    if kind is RegimeKind.STATIONARY:
        return math.sqrt(T / ((1.0 - rho) * (1.0 + rho)))
    if kind in (RegimeKind.UNIT_ROOT, RegimeKind.LOCAL_TO_UNITY):
        return float(T)
    if kind is RegimeKind.MILDLY_INTEGRATED:
        return math.sqrt(T * spec.k_t(T))
    if kind is RegimeKind.MILDLY_EXPLOSIVE:
        return rho**T * spec.k_t(T)
    return rho ** (T - 2)


def limit_moments(spec: RegimeSpec) -> tuple[float, float]:
    """Limits of ``E[(A_1^T)^2]`` and ``E[B_1^T]`` under the regime's normalizers.

    Explosive: with ``beta = 1/rho``, ``P = beta**(T-2)`` and ``Q = P**2``
    both moments tend to ``1/(1 - beta^2)^2``.
    """
    kind = spec.kind
    if kind is RegimeKind.STATIONARY:
        return 1.0, 1.0
    if kind is RegimeKind.UNIT_ROOT:
        return 0.5, 0.5
    if kind is RegimeKind.LOCAL_TO_UNITY:
        g = local_to_unity_moment(spec.c)
        return g, g
    if kind is RegimeKind.MILDLY_INTEGRATED:
        return 1.0 / (2.0 * spec.c), 1.0 / (2.0 * spec.c)
    if kind is RegimeKind.MILDLY_EXPLOSIVE:
        m = 1.0 / (4.0 * spec.c * spec.c)
        return m, m
    b2 = 1.0 / (spec.rho * spec.rho)
    m = 1.0 / (1.0 - b2) ** 2
    return m, m


def limit_law(spec: RegimeSpec, N: int, T: int) -> LimitLaw:
    """Composite rate ``sqrt(N) P(T)/Q(T)`` and limiting variance for ``spec``.

    >>> law = limit_law(RegimeSpec.unit_root(), 100, 400)
    >>> law.rate, law.limit_variance
    (4000.0, 2.0)
    """
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise ConfigError(f"N must be a positive integer, got {N!r}")
    N = int(N)
    T = _check_t(T, 2)
    rho = resolve_rho(spec, T)
    try:
        p, q = normalizers(spec, T)
        rate = math.sqrt(N) * rate_ratio(spec, T)
    except OverflowError:
        rate = q = math.inf
    if not math.isfinite(rate) or rate == 0.0 or q == 0.0:
        raise NumericalError(
            f"rate for {spec.kind.value} at T={T} is not representable"
        )
    var_a, e_b = limit_moments(spec)
    return LimitLaw(
        kind=spec.kind,
        rho=rho,
        n=N,
        t_len=T,
        p_of_t=p,
        q_of_t=q,
        rate=rate,
        limit_variance=var_a / (e_b * e_b),
        limit_var_a=var_a,
        limit_e_b=e_b,
    )
