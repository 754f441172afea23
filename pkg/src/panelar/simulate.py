"""Panel generation and CSV ingestion.

Panels follow ``y_it = rho * y_{i,t-1} + eps_it`` with ``y_i0 = 0``. Storage
is an ``N x (T+1)`` row-major array, one contiguous row per cross section,
with column 0 holding the zero initial value.
"""

from __future__ import annotations

import csv
import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import signal, special

from . import streams
from .core import RegimeSpec, resolve_rho
from .errors import (
    ConfigError,
    IoFailure,
    MalformedRow,
    NonzeroInitial,
    NumericalError,
    UnbalancedPanel,
)


class Family(str, enum.Enum):
    STANDARD_NORMAL = "standard_normal"
    RADEMACHER = "rademacher"
    UNIFORM = "uniform_standardized"
    STUDENT_T = "student_t_standardized"


@dataclass(frozen=True)
class InnovationSpec:
    """Innovation law, standardized analytically to mean 0 and variance 1.

    Each draw is obtained from exactly one raw 64-bit word, by inversion for
    the continuous families and from the top bit for Rademacher.
    """

    family: Family = Family.STANDARD_NORMAL
    df: float | None = None

    def __post_init__(self) -> None:
        try:
            fam = Family(str(getattr(self.family, "value", self.family)).lower())
        except ValueError:
            raise ConfigError(f"unknown innovation family {self.family!r}") from None
        object.__setattr__(self, "family", fam)
        if fam is Family.STUDENT_T:
            if self.df is None or not float(self.df) > 3:
                raise ConfigError("student_t_standardized requires df > 3")
            object.__setattr__(self, "df", float(self.df))
        elif self.df is not None:
            raise ConfigError(f"{fam.value} does not take df")

    @classmethod
    def normal(cls) -> "InnovationSpec":
        return cls(Family.STANDARD_NORMAL)

    @classmethod
    def rademacher(cls) -> "InnovationSpec":
        return cls(Family.RADEMACHER)

    @classmethod
    def uniform(cls) -> "InnovationSpec":
        return cls(Family.UNIFORM)

    @classmethod
    def student_t(cls, df: float) -> "InnovationSpec":
        return cls(Family.STUDENT_T, df=df)

    @classmethod
    def from_dict(cls, d: dict) -> "InnovationSpec":
        d = dict(d)
        extra = set(d) - {"family", "df"}
        if extra:
            raise ConfigError(f"unknown innovation keys: {sorted(extra)}")
        return cls(d.get("family", Family.STANDARD_NORMAL), d.get("df"))

    def to_dict(self) -> dict:
        out: dict = {"family": self.family.value}
        if self.df is not None:
            out["df"] = self.df
        return out

    @property
    def third_abs_moment(self) -> float:
        """``E|eps|^3`` of the standardized law."""
        fam = self.family
        if fam is Family.STANDARD_NORMAL:
            return 2.0 * math.sqrt(2.0 / math.pi)
        if fam is Family.RADEMACHER:
            return 1.0
        if fam is Family.UNIFORM:
            return 3.0 * math.sqrt(3.0) / 4.0
        nu = self.df
        scale = math.sqrt((nu - 2.0) / nu)
        log_m = (
            1.5 * math.log(nu)
            + math.lgamma((nu - 3.0) / 2.0)
            - 0.5 * math.log(math.pi)
            - math.lgamma(nu / 2.0)
        )
        return scale**3 * math.exp(log_m)

    def from_raw(self, raw: np.ndarray) -> np.ndarray:
        fam = self.family
        if fam is Family.RADEMACHER:
            return (raw >> np.uint64(63)).astype(np.float64) * 2.0 - 1.0
        u = streams.raw_to_uniform(raw)
        if fam is Family.STANDARD_NORMAL:
            return special.ndtri(u)
        if fam is Family.UNIFORM:
            return math.sqrt(3.0) * (2.0 * u - 1.0)
        return special.stdtrit(self.df, u) * math.sqrt((self.df - 2.0) / self.df)

    def draw(self, seed, spawn_key, n_rows, row_len, row_offset=0) -> np.ndarray:
        raw = streams.raw_rows(seed, spawn_key, n_rows, row_len, row_offset)
        return self.from_raw(raw)


def _frozen(a: np.ndarray | None) -> np.ndarray | None:
    if a is None:
        return None
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PanelData:
    """Balanced ``N x T`` panel, immutable once built.

    ``y`` has shape ``(N, T+1)`` with ``y[:, 0] == 0``. ``eps`` (shape
    ``(N, T)``, column ``t-1`` holding ``eps_it``) is present only for
    simulated panels generated with ``keep_innovations``.
    """

    y: np.ndarray
    eps: np.ndarray | None = None
    rho_used: float | None = None
    seed: int | None = None
    regime: RegimeSpec | None = None
    innovations: InnovationSpec | None = None
    stream: int = 0
    warnings: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        y = _frozen(self.y)
        if y.ndim != 2 or y.shape[1] < 2 or y.shape[0] < 1:
            raise UnbalancedPanel(f"y must be N x (T+1) with T >= 1, got {y.shape}")
        if np.any(y[:, 0] != 0.0):
            raise NonzeroInitial("initial values y_i0 must all be zero")
        object.__setattr__(self, "y", y)
        eps = _frozen(self.eps)
        if eps is not None and eps.shape != (y.shape[0], y.shape[1] - 1):
            raise UnbalancedPanel(f"eps shape {eps.shape} does not match y {y.shape}")
        object.__setattr__(self, "eps", eps)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def t_len(self) -> int:
        return self.y.shape[1] - 1

    def with_innovations_dropped(self) -> "PanelData":
        return PanelData(
            self.y, None, self.rho_used, self.seed, self.regime,
            self.innovations, self.stream, self.warnings,
        )


def ar1_filter(eps: np.ndarray, rho: float) -> np.ndarray:
    """Run ``y_t = rho * y_{t-1} + eps_t`` along the last axis from ``y_0 = 0``.

    Returns an array with one extra leading column holding ``y_0``.
    """
    eps = np.asarray(eps, dtype=np.float64)
    out = np.zeros(eps.shape[:-1] + (eps.shape[-1] + 1,))
    if rho == 1.0:
        np.cumsum(eps, axis=-1, out=out[..., 1:])
    else:
        out[..., 1:] = signal.lfilter([1.0], [1.0, -rho], eps, axis=-1)
    return out


def simulate_panel(
    spec: RegimeSpec,
    innovations: InnovationSpec,
    N: int,
    T: int,
    seed: int,
    keep_innovations: bool = True,
    *,
    stream: int = 0,
    workers: int = 1,
    block_rows: int = 4096,
) -> PanelData:
    """Simulate a balanced panel under ``spec``.

    Cross section ``i`` draws its innovations from a fixed counter range of
    the substream keyed by ``(seed, stream)``, so the panel is identical for
    any ``workers`` or ``block_rows``.
    """
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise ConfigError(f"N must be a positive integer, got {N!r}")
    if isinstance(T, bool) or int(T) != T or T < 2:
        raise ConfigError(f"T must be an integer >= 2, got {T!r}")
    N, T = int(N), int(T)
    rho = resolve_rho(spec, T)
    block_rows = max(1, int(block_rows))
    starts = range(0, N, block_rows)

    def make(start: int) -> tuple[np.ndarray, np.ndarray]:
        rows = min(block_rows, N - start)
        e = innovations.draw(seed, (stream,), rows, T, row_offset=start)
        return e, ar1_filter(e, rho)

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(make, starts))
    else:
        parts = [make(s) for s in starts]
    eps = np.concatenate([p[0] for p in parts]) if len(parts) > 1 else parts[0][0]
    y = np.concatenate([p[1] for p in parts]) if len(parts) > 1 else parts[0][1]
    if not np.all(np.isfinite(y)):
        raise NumericalError(
            f"simulated panel overflowed at rho={rho}, T={T}; use the scaled "
            "explosive statistics instead"
        )
    return PanelData(
        y=y,
        eps=eps if keep_innovations else None,
        rho_used=rho,
        seed=int(seed),
        regime=spec,
        innovations=innovations,
        stream=int(stream),
    )


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def _read_rows(path: Path) -> list[tuple[int, list[str]]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return [
                (lineno, [c.strip() for c in row])
                for lineno, row in enumerate(csv.reader(fh), start=1)
                if row and any(c.strip() for c in row)
            ]
    except UnicodeDecodeError as exc:
        raise MalformedRow(0, f"not UTF-8: {exc}") from None
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


def _parse_float(lineno: int, s: str) -> float:
    try:
        v = float(s)
    except ValueError:
        raise MalformedRow(lineno, f"not a number: {s!r}") from None
    if not math.isfinite(v):
        raise MalformedRow(lineno, f"non-finite value: {s!r}")
    return v


def _parse_int(lineno: int, s: str) -> int:
    try:
        return int(s)
    except ValueError:
        v = _parse_float(lineno, s)
        if v != int(v):
            raise MalformedRow(lineno, f"not an integer: {s!r}") from None
        return int(v)


def _ingest_long(rows: list[tuple[int, list[str]]]) -> tuple[np.ndarray, list[str]]:
    if rows and not all(_is_number(c) for c in rows[0][1]):
        header = [h.lower() for h in rows[0][1]]
        rows = rows[1:]
        try:
            order = [header.index(k) for k in ("i", "t", "y")]
        except ValueError:
            raise MalformedRow(1, f"long header must name i,t,y, got {header}") from None
    else:
        order = [0, 1, 2]
    width = max(order) + 1
    series: dict[int, dict[int, float]] = {}
    for lineno, cells in rows:
        if len(cells) < width:
            raise MalformedRow(lineno, f"expected at least {width} fields")
        i = _parse_int(lineno, cells[order[0]])
        t = _parse_int(lineno, cells[order[1]])
        v = _parse_float(lineno, cells[order[2]])
        if i < 1:
            raise MalformedRow(lineno, f"cross-section index must be >= 1, got {i}")
        if t < 0:
            raise MalformedRow(lineno, f"time index must be >= 0, got {t}")
        obs = series.setdefault(i, {})
        if t in obs:
            raise MalformedRow(lineno, f"duplicate observation (i={i}, t={t})")
        obs[t] = v
    if not series:
        raise UnbalancedPanel("no observations")

    ranges = {i: (min(obs), max(obs), len(obs)) for i, obs in series.items()}
    first = next(iter(ranges.values()))
    for i, (lo, hi, count) in ranges.items():
        if count != hi - lo + 1:
            raise UnbalancedPanel(f"series i={i} has gaps in t")
        if (lo, hi) != first[:2]:
            raise UnbalancedPanel(
                f"series i={i} spans t={lo}..{hi}, expected {first[0]}..{first[1]}"
            )
    lo, hi = first[0], first[1]
    if lo not in (0, 1):
        raise UnbalancedPanel(f"time index must start at 0 (or 1), got {lo}")
    ids = sorted(series)
    y = np.array([[series[i][t] for t in range(lo, hi + 1)] for i in ids])
    warnings = []
    if lo == 1:
        y = np.hstack([np.zeros((y.shape[0], 1)), y])
        warnings.append("no t=0 observations; prepended y_i0 = 0")
    return y, warnings


def _ingest_wide(rows: list[tuple[int, list[str]]]) -> tuple[np.ndarray, list[str]]:
    has_t0 = True
    if rows and not all(_is_number(c) for c in rows[0][1]):
        header = rows[0][1]
        rows = rows[1:]
        digits = "".join(ch for ch in header[0] if ch.isdigit())
        has_t0 = digits == "" or int(digits) == 0
    if not rows:
        raise UnbalancedPanel("no observations")
    width = len(rows[0][1])
    values = []
    for lineno, cells in rows:
        if len(cells) != width:
            raise UnbalancedPanel(
                f"line {lineno} has {len(cells)} columns, expected {width}"
            )
        values.append([_parse_float(lineno, c) for c in cells])
    y = np.array(values)
    warnings = []
    if not has_t0:
        y = np.hstack([np.zeros((y.shape[0], 1)), y])
        warnings.append("no t=0 column; prepended y_i0 = 0")
    return y, warnings


def ingest_panel(path: str | Path, format: str = "long_csv") -> PanelData:
    """Read a balanced panel from CSV.

    ``long_csv`` has columns ``i, t, y`` (header optional); ``wide_csv`` has
    one row per series with ``T+1`` columns starting at ``t = 0``. A header
    is recognised by a non-numeric first row. When no ``t = 0`` observation
    is present a zero column is prepended and a warning recorded; nonzero
    initial values are rejected.
    """
    fmt = format.lower().removesuffix("_csv")
    rows = _read_rows(Path(path))
    if fmt == "long":
        y, warnings = _ingest_long(rows)
    elif fmt == "wide":
        y, warnings = _ingest_wide(rows)
    else:
        raise ConfigError(f"unknown panel format {format!r}")
    if y.shape[1] < 2:
        raise UnbalancedPanel("panel needs at least one period after t=0")
    nonzero = np.flatnonzero(y[:, 0] != 0.0)
    if nonzero.size:
        raise NonzeroInitial(
            f"{nonzero.size} series have y_i0 != 0 (first: series {nonzero[0] + 1})"
        )
    return PanelData(y=y, warnings=tuple(warnings))
