"""
Finite filtered probability spaces.

A filtration on ``n`` sample points is stored as a ``(K, n)`` integer array of
block labels, one row per level. Level indices are 1-based throughout the
public API, and ``E_0`` is the zero map, so that ``df_1 = E_1 f``.

Random variables are plain 1-D numpy arrays indexed by sample point.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import DomainError, LevelRangeError

ATOL = 1e-10


class WeightedSpace:
    """Finite probability space with strictly positive point masses.

    Weights are normalized on construction.
    """

    def __init__(self, weights: Sequence[float]):
        w = np.asarray(weights, dtype=float).ravel()
        if w.size == 0:
            raise DomainError("a probability space needs at least one point")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise DomainError("weights must be finite and strictly positive")
        w = w / w.sum()
        w.setflags(write=False)
        self.weights = w

    @classmethod
    def uniform(cls, n: int) -> "WeightedSpace":
        return cls(np.full(n, 1.0 / n))

    @property
    def n(self) -> int:
        return self.weights.size

    def measure(self, mask) -> float:
        return float(self.weights[np.asarray(mask, dtype=bool)].sum())

    def integral(self, f) -> float:
        return float(np.dot(self.weights, np.asarray(f, dtype=float)))

    def __repr__(self):
        return f"WeightedSpace(n={self.n})"


def _relabel(row) -> np.ndarray:
    _, inv = np.unique(np.asarray(row), return_inverse=True)
    return inv.astype(np.intp)


class Filtration:
    """A nested chain of partitions of a :class:`WeightedSpace`.

    ``levels[k-1][i]`` is the block id of point ``i`` at level ``k``. Block
    ids are relabelled to ``0..B_k-1`` on construction and level ``k+1``
    must refine level ``k``. The last level need not be discrete.
    """

    def __init__(self, space: WeightedSpace | Sequence[float], levels):
        if not isinstance(space, WeightedSpace):
            space = WeightedSpace(space)
        rows = [np.asarray(r) for r in levels]
        if not rows:
            raise DomainError("a filtration needs at least one level")
        for r in rows:
            if r.shape != (space.n,):
                raise DomainError(
                    f"level has {r.size} labels, expected {space.n}")
        labels = np.vstack([_relabel(r) for r in rows])
        for k in range(1, labels.shape[0]):
            coarse, fine = labels[k - 1], labels[k]
            parent = np.full(fine.max() + 1, -1)
            parent[fine] = coarse
            if np.any(parent[fine] != coarse):
                raise DomainError(f"level {k + 1} does not refine level {k}")
        labels.setflags(write=False)
        self.space = space
        self.labels = labels
        w = space.weights
        self._masses = [np.bincount(r, weights=w) for r in labels]

    @classmethod
    def from_blocks(cls, weights, partitions: Sequence[Sequence[Sequence[int]]]):
        """Build from explicit partitions given as lists of point-index lists."""
        n = len(weights)
        levels = []
        for part in partitions:
            row = np.full(n, -1)
            for b, block in enumerate(part):
                row[list(block)] = b
            if np.any(row < 0):
                raise DomainError("partition does not cover every point")
            levels.append(row)
        return cls(weights, levels)

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def depth(self) -> int:
        return self.labels.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return self.space.weights

    def check_level(self, k: int) -> int:
        if not 1 <= k <= self.depth:
            raise LevelRangeError(f"level {k} outside 1..{self.depth}")
        return k

    def level(self, k: int) -> np.ndarray:
        return self.labels[self.check_level(k) - 1]

    def n_blocks(self, k: int) -> int:
        return int(self.level(k).max()) + 1

    def block_masses(self, k: int) -> np.ndarray:
        return self._masses[self.check_level(k) - 1]

    def blocks(self, k: int) -> list[np.ndarray]:
        """Point indices of each level-``k`` block, in block-id order."""
        lab = self.level(k)
        order = np.argsort(lab, kind="stable")
        cuts = np.cumsum(np.bincount(lab))[:-1]
        return np.split(order, cuts)

    def block_mask(self, k: int, b: int) -> np.ndarray:
        return self.level(k) == b

    def block_of(self, k: int, point: int) -> np.ndarray:
        """Mask of the level-``k`` block containing ``point``."""
        lab = self.level(k)
        return lab == lab[point]

    def is_measurable(self, f, k: int, atol: float = ATOL) -> bool:
        """True if ``f`` is constant on every level-``k`` block."""
        lab = self.level(k)
        f = np.asarray(f, dtype=float)
        nb = lab.max() + 1
        hi = np.full(nb, -np.inf)
        lo = np.full(nb, np.inf)
        np.maximum.at(hi, lab, f)
        np.minimum.at(lo, lab, f)
        return bool(np.all(hi - lo <= atol))

    def is_measurable_set(self, mask, k: int) -> bool:
        mask = np.asarray(mask, dtype=bool)
        lab = self.level(k)
        hits = np.bincount(lab, weights=mask.astype(float), minlength=lab.max() + 1)
        sizes = np.bincount(lab)
        return bool(np.all((hits == 0) | (hits == sizes)))

    def first_measurable_level(self, mask) -> int | None:
        """Smallest ``k`` at which the set is a union of blocks."""
        for k in range(1, self.depth + 1):
            if self.is_measurable_set(mask, k):
                return k
        return None

    def measurable_hull(self, mask, k: int) -> np.ndarray:
        """Union of the level-``k`` blocks meeting ``mask``."""
        lab = self.level(k)
        hit = np.zeros(lab.max() + 1, dtype=bool)
        hit[lab[np.asarray(mask, dtype=bool)]] = True
        return hit[lab]

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist(),
                "levels": self.labels.tolist()}

    def __repr__(self):
        sizes = [self.n_blocks(k) for k in range(1, self.depth + 1)]
        return f"Filtration(n={self.n}, blocks per level={sizes})"


def cond_exp(f, F: Filtration, k: int) -> np.ndarray:
    """Conditional expectation ``E_k f``: block averages at level ``k``.

    ``k = 0`` is accepted and returns zero (``E_0 = 0``).
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (F.n,):
        raise DomainError(f"expected {F.n} values, got shape {f.shape}")
    if k == 0:
        return np.zeros_like(f)
    lab = F.level(k)
    sums = np.bincount(lab, weights=F.weights * f)
    return (sums / F.block_masses(k))[lab]


def mart_diff(f, F: Filtration, k: int) -> np.ndarray:
    """``df_k = E_k f - E_{k-1} f``, with ``df_1 = E_1 f``."""
    F.check_level(k)
    return cond_exp(f, F, k) - cond_exp(f, F, k - 1)


def differences(f, F: Filtration) -> np.ndarray:
    """All martingale differences as a ``(K, n)`` array."""
    ek = np.vstack([cond_exp(f, F, k) for k in range(1, F.depth + 1)])
    out = ek.copy()
    out[1:] -= ek[:-1]
    return out


def square_function(f, F: Filtration) -> np.ndarray:
    d = differences(f, F)
    return np.sqrt(np.sum(d * d, axis=0))


def cond_square_function(f, F: Filtration) -> np.ndarray:
    """Conditioned square function, with ``|f_1|^2`` as the first term."""
    d = differences(f, F)
    total = d[0] ** 2
    for k in range(2, F.depth + 1):
        total = total + cond_exp(d[k - 1] ** 2, F, k - 1)
    return np.sqrt(total)


@dataclass(frozen=True)
class MartingaleView:
    """A random variable together with its cached martingale differences."""
    f: np.ndarray
    filtration: Filtration
    diffs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        f = np.asarray(self.f, dtype=float)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "diffs", differences(f, self.filtration))

    def diff(self, k: int) -> np.ndarray:
        return self.diffs[self.filtration.check_level(k) - 1]

    def partial_sum(self, k: int) -> np.ndarray:
        """``E_k f`` recovered by telescoping the differences."""
        return self.diffs[: self.filtration.check_level(k)].sum(axis=0)


def lp_norm(f, weights, p: float) -> float:
    """``L_p(mu)`` norm for ``p`` in ``(0, inf]``; a quasi-norm when ``p < 1``."""
    a = np.abs(np.asarray(f, dtype=float))
    if np.isinf(p):
        return float(a.max()) if a.size else 0.0
    return float(np.dot(weights, a ** p) ** (1.0 / p))


def load_instance(source) -> tuple[Filtration, np.ndarray | None]:
    """Read ``{"weights", "levels", "values"}`` JSON from a path, file or dict."""
    if isinstance(source, dict):
        data = source
    elif hasattr(source, "read"):
        data = json.load(source)
    else:
        with open(source) as fh:
            data = json.load(fh)
    F = Filtration(data["weights"], data["levels"])
    values = data.get("values")
    if values is not None:
        values = np.asarray(values, dtype=float)
        if values.shape != (F.n,):
            raise DomainError("values length does not match the number of points")
    return F, values


def dump_instance(F: Filtration, values=None) -> dict:
    d = F.to_dict()
    if values is not None:
        d["values"] = np.asarray(values, dtype=float).tolist()
    return d
