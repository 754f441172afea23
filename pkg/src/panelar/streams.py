"""Counter-based random substreams.

A stream is a Philox-4x64 generator keyed by ``(seed, *spawn_key)`` through
:class:`numpy.random.SeedSequence`. Rows of a draw matrix occupy fixed,
disjoint counter ranges: row ``r`` of length ``L`` consumes the raw 64-bit
words ``[r * stride, r * stride + L)`` with ``stride = 4 * ceil(L / 4)``.
Every variate is produced from exactly one raw word by inversion, so any
subset of rows can be regenerated independently of the others and the
result never depends on how rows are split among workers.
"""

from __future__ import annotations

import numpy as np
from scipy import special

_TWO_M53 = 2.0**-53
# raw words per Philox counter increment
_BLOCK = 4


def _key(seed: int, spawn_key: tuple[int, ...]) -> np.ndarray:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in spawn_key))
    return ss.generate_state(2, np.uint64)


def row_stride(row_len: int) -> int:
    return _BLOCK * -(-row_len // _BLOCK)


def raw_rows(
    seed: int,
    spawn_key: tuple[int, ...],
    n_rows: int,
    row_len: int,
    row_offset: int = 0,
) -> np.ndarray:
    """Raw ``uint64`` words for rows ``row_offset .. row_offset + n_rows - 1``."""
    stride = row_stride(row_len)
    bg = np.random.Philox(key=_key(seed, spawn_key))
    if row_offset:
        bg.advance(row_offset * (stride // _BLOCK))
    raw = bg.random_raw(n_rows * stride).reshape(n_rows, stride)
    return raw[:, :row_len]


def raw_to_uniform(raw: np.ndarray) -> np.ndarray:
    """Map raw words to the open interval (0, 1) on a 2**-53 lattice."""
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_M53


def uniform_rows(seed, spawn_key, n_rows, row_len, row_offset=0) -> np.ndarray:
    return raw_to_uniform(raw_rows(seed, spawn_key, n_rows, row_len, row_offset))


def normal_rows(seed, spawn_key, n_rows, row_len, row_offset=0) -> np.ndarray:
    """Standard normal rows by inversion of the normal CDF."""
    return special.ndtri(uniform_rows(seed, spawn_key, n_rows, row_len, row_offset))
