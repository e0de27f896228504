"""Half-open level-set indices used to slice functions into subatoms."""
from __future__ import annotations

import numpy as np

SNAP = 1e-10


def harmonic_index(x) -> np.ndarray:
    """Index ``j >= 1`` with ``1/(j+1) < x <= 1/j``; 0 where ``x <= 0``.

    Values within ``SNAP`` of a breakpoint ``1/m`` are snapped onto it first,
    so that numerically clustered eigenvalues land in one bucket.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape, dtype=np.int64)
    pos = x > SNAP
    if not np.any(pos):
        return out
    xp = np.minimum(x[pos], 1.0)
    m = np.maximum(np.rint(1.0 / xp), 1.0)
    snap = np.abs(xp - 1.0 / m) <= SNAP
    xp = np.where(snap, 1.0 / m, xp)
    j = np.floor(1.0 / xp).astype(np.int64)
    j = np.where(snap, m.astype(np.int64), j)
    j = np.maximum(j, 1)
    # guard the half-open interval against rounding in 1/x
    j = np.where(xp > 1.0 / j, j - 1, j)
    j = np.where(xp <= 1.0 / (j + 1), j + 1, j)
    out[pos] = np.maximum(j, 1)
    return out


def dyadic_index(x) -> np.ndarray:
    """Index ``j`` with ``2**(j-1) < x <= 2**j`` for ``x > 0``.

    Entries with ``x <= 0`` get the sentinel ``np.iinfo(np.int64).min``.
    """
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, np.iinfo(np.int64).min, dtype=np.int64)
    pos = x > 0
    if not np.any(pos):
        return out
    xp = x[pos]
    mant, ex = np.frexp(xp)  # xp = mant * 2**ex, mant in [0.5, 1)
    j = np.where(mant == 0.5, ex - 1, ex).astype(np.int64)
    out[pos] = j
    return out


def uniform_index(x, n_slices: int) -> np.ndarray:
    """Index ``j`` in ``1..N`` with ``(j-1)/N < x <= j/N``; 0 where ``x <= 0``."""
    x = np.asarray(x, dtype=float)
    j = np.ceil(x * n_slices - 1e-12).astype(np.int64)
    j = np.clip(j, 0, n_slices)
    return np.where(x > 0, np.maximum(j, 1), 0)
