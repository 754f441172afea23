"""Replication engine for the limit laws and the Berry-Esseen rate.

Replication ``r`` draws its panel from the substream ``(seed, r)``, exactly
as :func:`panelar.simulate.simulate_panel` does with ``stream=r``.
Replications are processed in fixed batches whose boundaries depend only on
``(N, T)``; batches may run in separate processes and are reassembled in
index order, so the output is the same for any worker count.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import special

from .asymptotics import exact_second_moment
from .core import RegimeKind, RegimeSpec, limit_law
from .errors import (
    ConfigError,
    EmptySample,
    InsufficientGrid,
    ReplicationFailed,
    ZeroDenominator,
)
from .estimate import STANDARDIZATIONS, explosive_scaled_sums
from .simulate import InnovationSpec, ar1_filter

QUANTILE_PROBS = (0.01, 0.05, 0.10, 0.25, 0.50, 0.75, 0.90, 0.95, 0.99)
STATISTICS = ("scaled", "standardized_ratio")
WORKERS_ENV = "PANELAR_WORKERS"

_BATCH_CELLS = 2_000_000


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class McConfig:
    """One Monte Carlo experiment.

    ``statistic="scaled"`` records ``rate * (rho_hat - rho)``;
    ``"standardized_ratio"`` records ``S_N^T / R_N^T``. ``standardization``
    picks exact finite-T or limiting moments for the ratio, and the
    reference normal for the scaled statistic.
    """

    regime: RegimeSpec
    innovations: InnovationSpec = field(default_factory=InnovationSpec)
    n: int = 100
    t_len: int = 100
    replications: int = 1000
    seed: int = 0
    standardization: str = "asymptotic"
    statistic: str = "scaled"

    def __post_init__(self) -> None:
        for name in ("n", "t_len", "replications", "seed"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v:
                raise ConfigError(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if self.t_len < 2:
            raise ConfigError(f"t_len must be >= 2, got {self.t_len}")
        if self.replications < 1:
            raise ConfigError(f"replications must be >= 1, got {self.replications}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.standardization not in STANDARDIZATIONS:
            raise ConfigError(f"unknown standardization {self.standardization!r}")
        if self.statistic not in STATISTICS:
            raise ConfigError(f"unknown statistic {self.statistic!r}")
        # resolves rho and the rate up front so bad configs fail before any work
        limit_law(self.regime, self.n, self.t_len)

    def to_dict(self) -> dict:
        return {
            "regime": self.regime.to_dict(),
            "innovations": self.innovations.to_dict(),
            "n": self.n,
            "t_len": self.t_len,
            "replications": self.replications,
            "seed": self.seed,
            "standardization": self.standardization,
            "statistic": self.statistic,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "McConfig":
        d = dict(d)
        d["regime"] = RegimeSpec.from_dict(d["regime"])
        d["innovations"] = InnovationSpec.from_dict(d.get("innovations", {}))
        return cls(**d)


@dataclass
class McReport:
    scaled_stats: list[float]
    empirical_mean: float
    empirical_var: float
    ks_to_limit: float
    quantile_pairs: list[tuple[float, float]]
    runtime_seconds: float
    reference_variance: float
    rate: float
    config: dict

    @property
    def probabilities(self) -> tuple[float, ...]:
        return QUANTILE_PROBS

    def to_dict(self) -> dict:
        d = asdict(self)
        d["quantile_pairs"] = [list(p) for p in self.quantile_pairs]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "McReport":
        d = dict(d)
        d["quantile_pairs"] = [tuple(p) for p in d["quantile_pairs"]]
        return cls(**d)


def ks_distance(sample, variance: float = 1.0) -> float:
    """Exact one-sample Kolmogorov-Smirnov distance to ``N(0, variance)``.

    >>> ks_distance([0.0])
    0.5
    """
    x = np.sort(np.asarray(sample, dtype=np.float64).ravel())
    n = x.size
    if n == 0:
        raise EmptySample("KS distance of an empty sample")
    if not variance > 0:
        raise ConfigError(f"variance must be positive, got {variance}")
    cdf = special.ndtr(x / math.sqrt(variance))
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))


def _batch_size(n: int, t_len: int) -> int:
    return max(1, _BATCH_CELLS // (n * t_len))


def _batch_stats(cfg: McConfig, start: int, count: int) -> np.ndarray:
    """Statistics for replications ``start .. start + count - 1``."""
    law = limit_law(cfg.regime, cfg.n, cfg.t_len)
    eps = np.stack(
        [cfg.innovations.draw(cfg.seed, (r,), cfg.n, cfg.t_len) for r in
         range(start, start + count)]
    )
    if cfg.regime.kind is RegimeKind.EXPLOSIVE:
        sums = explosive_scaled_sums(eps, law.rho)
        per_num, per_den = sums["num"], sums["den"]
        # a_i = beta^{T-2} num_i and b_i = beta^{2(T-2)} den_i already
        p_eff, q_eff = 1.0, 1.0
    else:
        y = ar1_filter(eps, law.rho)
        lag = y[..., :-1]
        per_num = np.sum(lag * eps, axis=-1)
        per_den = np.sum(lag * lag, axis=-1)
        p_eff, q_eff = law.p_of_t, law.q_of_t

    den = np.sum(per_den, axis=-1)
    bad = np.flatnonzero(~(den > 0.0))
    if bad.size:
        idx = start + int(bad[0])
        raise ReplicationFailed(idx, ZeroDenominator("all lagged values are zero"))

    if cfg.statistic == "scaled":
        if cfg.regime.kind is RegimeKind.EXPLOSIVE:
            return math.sqrt(cfg.n) * np.sum(per_num, axis=-1) / den
        return law.rate * (np.sum(per_num, axis=-1) / den)

    var_a, mean_b = _standardizers(cfg)
    a_sum = np.sum(p_eff * per_num, axis=-1)
    b_sum = np.sum(q_eff * per_den, axis=-1)
    s = a_sum / math.sqrt(cfg.n) / math.sqrt(var_a)
    r = b_sum / cfg.n / mean_b
    return s / r


def _standardizers(cfg: McConfig) -> tuple[float, float]:
    law = limit_law(cfg.regime, cfg.n, cfg.t_len)
    if cfg.standardization == "asymptotic":
        return law.limit_var_a, law.limit_e_b
    rep = exact_second_moment(law.rho, cfg.t_len, law.p_of_t, law.q_of_t)
    return rep.var_a, rep.e_b


def reference_variance(cfg: McConfig) -> float:
    """Variance of the normal the recorded statistic is compared against."""
    if cfg.statistic == "standardized_ratio":
        return 1.0
    if cfg.standardization == "asymptotic":
        return limit_law(cfg.regime, cfg.n, cfg.t_len).limit_variance
    var_a, mean_b = _standardizers(cfg)
    return var_a / (mean_b * mean_b)


def _run_batch(args: tuple[dict, int, int]) -> np.ndarray:
    cfg_dict, start, count = args
    return _batch_stats(McConfig.from_dict(cfg_dict), start, count)


def simulate_statistics(cfg: McConfig, workers: int | None = None) -> np.ndarray:
    """The ``R`` recorded statistics in replication order."""
    workers = default_workers() if workers is None else max(1, int(workers))
    size = _batch_size(cfg.n, cfg.t_len)
    batches = [
        (start, min(size, cfg.replications - start))
        for start in range(0, cfg.replications, size)
    ]
    if workers > 1 and len(batches) > 1:
        payload = [(cfg.to_dict(), s, c) for s, c in batches]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_batch, payload))
    else:
        parts = [_batch_stats(cfg, s, c) for s, c in batches]
    stats = np.concatenate(parts)
    bad = np.flatnonzero(~np.isfinite(stats))
    if bad.size:
        raise ReplicationFailed(int(bad[0]), ArithmeticError("non-finite statistic"))
    return stats


def summarize(stats: np.ndarray, ref_var: float) -> dict:
    sd = math.sqrt(ref_var)
    emp_q = np.quantile(stats, QUANTILE_PROBS)
    lim_q = sd * special.ndtri(np.asarray(QUANTILE_PROBS))
    return {
        "empirical_mean": float(np.mean(stats)),
        "empirical_var": float(np.var(stats, ddof=1)) if stats.size > 1 else 0.0,
        "ks_to_limit": ks_distance(stats, ref_var),
        "quantile_pairs": [(float(e), float(q)) for e, q in zip(emp_q, lim_q)],
    }


def run_replications(cfg: McConfig, workers: int | None = None) -> McReport:
    """Simulate ``cfg.replications`` panels and summarize the recorded statistic."""
    t0 = time.perf_counter()
    stats = simulate_statistics(cfg, workers)
    ref = reference_variance(cfg)
    law = limit_law(cfg.regime, cfg.n, cfg.t_len)
    return McReport(
        scaled_stats=stats.tolist(),
        runtime_seconds=time.perf_counter() - t0,
        reference_variance=ref,
        rate=law.rate,
        config=cfg.to_dict(),
        **summarize(stats, ref),
    )


def _point_seed(seed: int, index: int) -> int:
    ss = np.random.SeedSequence(seed, spawn_key=(0xBE, index))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class BerryEsseenCurve:
    points: list[tuple[int, float]]
    fitted_slope: float
    fitted_intercept: float
    point_seeds: list[int]
    config: dict

    def to_dict(self) -> dict:
        d = asdict(self)
        d["points"] = [list(p) for p in self.points]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BerryEsseenCurve":
        d = dict(d)
        d["points"] = [(int(n), float(k)) for n, k in d["points"]]
        return cls(**d)


def loglog_fit(ns, ks) -> tuple[float, float]:
    """Least-squares line through ``(log N, log KS)``; returns ``(slope, intercept)``."""
    x = np.log(np.asarray(ns, dtype=np.float64))
    y = np.log(np.asarray(ks, dtype=np.float64))
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def berry_esseen_curve(
    base_cfg: McConfig, n_grid, workers: int | None = None
) -> BerryEsseenCurve:
    """KS distance of ``S_N^T / R_N^T`` to the standard normal across ``n_grid``.

    Each grid point uses exact finite-T standardization and its own seed
    derived from ``base_cfg.seed`` and the point index. The slope of
    ``log KS`` on ``log N`` estimates the decay exponent.
    """
    grid = [int(n) for n in n_grid]
    if len(grid) < 4:
        raise InsufficientGrid(f"need at least 4 grid points, got {len(grid)}")
    if any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 1:
        raise InsufficientGrid(f"n_grid must be strictly increasing positive, got {grid}")
    points, seeds = [], []
    for j, n in enumerate(grid):
        seed = _point_seed(base_cfg.seed, j)
        cfg = McConfig(
            regime=base_cfg.regime,
            innovations=base_cfg.innovations,
            n=n,
            t_len=base_cfg.t_len,
            replications=base_cfg.replications,
            seed=seed,
            standardization="exact_finite_t",
            statistic="standardized_ratio",
        )
        stats = simulate_statistics(cfg, workers)
        points.append((n, ks_distance(stats, 1.0)))
        seeds.append(seed)
    slope, intercept = loglog_fit(*zip(*points))
    return BerryEsseenCurve(points, slope, intercept, seeds, base_cfg.to_dict())


@dataclass
class VarianceCurve:
    points: list[tuple[int, float, float]]
    config: dict

    def to_dict(self) -> dict:
        d = asdict(self)
        d["points"] = [list(p) for p in self.points]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "VarianceCurve":
        d = dict(d)
        d["points"] = [(int(t), float(v), float(l)) for t, v, l in d["points"]]
        return cls(**d)


def variance_convergence(
    spec: RegimeSpec,
    innovations: InnovationSpec,
    t_grid,
    N: int,
    R: int,
    seed: int,
    workers: int | None = None,
) -> VarianceCurve:
    """Empirical variance of the scaled statistic per ``T`` beside the limit variance."""
    grid = [int(t) for t in t_grid]
    if len(grid) < 3:
        raise InsufficientGrid(f"need at least 3 grid points, got {len(grid)}")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InsufficientGrid(f"t_grid must be strictly increasing, got {grid}")
    points = []
    for j, t in enumerate(grid):
        cfg = McConfig(spec, innovations, N, t, R, _point_seed(seed, j))
        stats = simulate_statistics(cfg, workers)
        lim = limit_law(spec, N, t).limit_variance
        points.append((t, float(np.var(stats, ddof=1)), lim))
    conf = {
        "regime": spec.to_dict(),
        "innovations": innovations.to_dict(),
        "t_grid": grid,
        "n": int(N),
        "replications": int(R),
        "seed": int(seed),
    }
    return VarianceCurve(points, conf)
