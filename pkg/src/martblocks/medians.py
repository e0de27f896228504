"""
Conditional medians, the median form of the BMO norm, and atomic blocks
built from them.

A conditional median of ``f`` at level ``k`` is a level-``k`` measurable
``alpha`` such that on every level-``k`` block ``I`` both
``mu(I & {f > alpha})`` and ``mu(I & {f < alpha})`` are at most ``mu(I)/2``.
Medians are not unique; :func:`cond_median` returns the lowest one.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .blocks import CancelBlock, Subatom, conjugate, merge_blocks, validate_block
from .exceptions import DomainError, LevelRangeError
from .levelsets import dyadic_index, uniform_index
from .probability import ATOL, Filtration, cond_exp, lp_norm

HALF_RTOL = 1e-12


def cond_median(f, F: Filtration, k: int) -> np.ndarray:
    """Lowest conditional median of ``f`` on each level-``k`` block."""
    f = np.asarray(f, dtype=float)
    lab = F.level(k)
    w = F.weights
    nb = F.n_blocks(k)
    masses = F.block_masses(k)
    order = np.lexsort((f, lab))
    ls = lab[order]
    # cumulative weight within each block, blocks being contiguous in `order`
    offsets = np.concatenate([[0.0], np.cumsum(masses)[:-1]])
    cum = np.cumsum(w[order]) - offsets[ls]
    crossing = np.flatnonzero(cum >= 0.5 * masses[ls] * (1 - HALF_RTOL))
    first = np.full(nb, F.n)
    np.minimum.at(first, ls[crossing], crossing)
    return f[order][first][lab]


def median_interval(f, F: Filtration, k: int):
    """Per-point ``(lowest, highest)`` conditional medians at level ``k``."""
    f = np.asarray(f, dtype=float)
    lo = cond_median(f, F, k)
    hi = -cond_median(-f, F, k)
    return lo, hi


def is_cond_median(alpha, f, F: Filtration, k: int, rtol: float = HALF_RTOL) -> bool:
    """Check both defining inequalities on every level-``k`` block."""
    f = np.asarray(f, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if not F.is_measurable(alpha, k):
        return False
    lab = F.level(k)
    w = F.weights
    half = 0.5 * F.block_masses(k) * (1 + rtol)
    above = np.bincount(lab, weights=w * (f > alpha), minlength=half.size)
    below = np.bincount(lab, weights=w * (f < alpha), minlength=half.size)
    return bool(np.all(above <= half) and np.all(below <= half))


@dataclass(frozen=True)
class MedianSequence:
    """Conditional medians ``alpha_1 .. alpha_K`` of ``f``, one row per level."""
    f: np.ndarray
    filtration: Filtration
    alphas: np.ndarray = field(default=None)

    def __post_init__(self):
        f = np.asarray(self.f, dtype=float)
        object.__setattr__(self, "f", f)
        if self.alphas is None:
            rows = [cond_median(f, self.filtration, k)
                    for k in range(1, self.filtration.depth + 1)]
            object.__setattr__(self, "alphas", np.vstack(rows))
        else:
            a = np.asarray(self.alphas, dtype=float)
            if a.shape != (self.filtration.depth, f.size):
                raise DomainError("need one median row per level")
            object.__setattr__(self, "alphas", a)
        self.alphas.setflags(write=False)

    def alpha(self, k: int) -> np.ndarray:
        return self.alphas[self.filtration.check_level(k) - 1]

    def is_valid(self) -> bool:
        return all(is_cond_median(self.alpha(k), self.f, self.filtration, k)
                   for k in range(1, self.filtration.depth + 1))


def _level_set(A, F: Filtration, k: int) -> np.ndarray:
    A = np.asarray(A, dtype=bool)
    if A.shape != (F.n,):
        raise DomainError("set mask has the wrong length")
    if not F.is_measurable_set(A, k):
        raise DomainError(f"set is not measurable at level {k}")
    return A


def cm_lemma_check(f, F: Filtration, k: int, A, alpha=None):
    """``E_k(chi_{A & {f <= alpha_k}}) >= chi_A / 2`` pointwise.

    Returns the left-hand side and whether the inequality holds.
    """
    A = _level_set(A, F, k)
    f = np.asarray(f, dtype=float)
    alpha = cond_median(f, F, k) if alpha is None else np.asarray(alpha, dtype=float)
    lhs = cond_exp((A & (f <= alpha)).astype(float), F, k)
    ok = bool(np.all(lhs >= 0.5 * A - 1e-12))
    return lhs, ok


def bmo_alpha_norm(f, F: Filtration, ms: MedianSequence | None = None,
                   pprime: float = 2.0) -> float:
    """Median form of the BMO norm.

    Maximum of ``||E_1 f||_inf``, ``sup_k ||E_k |f - alpha_k|^p'||_inf^(1/p')``
    and ``sup_{k>=2} ||alpha_k - alpha_{k-1}||_inf``.
    """
    if pprime < 1:
        raise DomainError("pprime must be at least 1")
    f = np.asarray(f, dtype=float)
    ms = MedianSequence(f, F) if ms is None else ms
    first = float(np.abs(cond_exp(f, F, 1)).max())
    second = max(float(cond_exp(np.abs(f - ms.alpha(k)) ** pprime, F, k).max())
                 ** (1.0 / pprime) for k in range(1, F.depth + 1))
    jumps = float(np.abs(np.diff(ms.alphas, axis=0)).max(initial=0.0))
    return max(first, second, jumps)


@dataclass(frozen=True)
class MedianBlock:
    """An atomic block built from medians, with its certified bound.

    ``bound`` is the a priori estimate the block cost must respect and
    ``parts`` holds named intermediate functions of the construction.
    """
    block: CancelBlock
    values: np.ndarray
    bound: float
    parts: dict = field(default_factory=dict)

    @property
    def cost(self) -> float:
        return self.block.cost


def _single_subatom(values, A, F, level, block_level, p):
    """A block made of one subatom on ``A`` saturating its bound."""
    norm = lp_norm(values, F.weights, p)
    if norm <= ATOL * 1e-2:
        return CancelBlock(block_level)
    gap_factor = level - block_level + 1
    lam = gap_factor * norm * F.space.measure(A) ** (1.0 / conjugate(p))
    return CancelBlock(block_level, (lam,), (Subatom(block_level, level, A, values / lam),))


def build_block_power(A, f, F: Filtration, k: int, pprime: float = 2.0) -> MedianBlock:
    """Block pairing against ``f`` like ``int_A |f - alpha_k|^p'``.

    On the heavier side ``P`` of ``A`` (points above the median when that side
    carries more ``|f - alpha_k|^p'`` mass, below it otherwise) the block is
    ``|f - alpha_k|^(p'-1)``; it is balanced on the rest of ``A`` so that
    ``E_k b = 0``. The bound is
    ``(1 + 2^(1/p')) mu(A)^(1/p') (int_A |f - alpha_k|^p')^(1/p)``.
    """
    A = _level_set(A, F, k)
    if not A.any():
        raise DomainError("A must be nonempty")
    if pprime <= 1:
        raise DomainError("pprime must exceed 1")
    f = np.asarray(f, dtype=float)
    p = conjugate(pprime)
    r = f - cond_median(f, F, k)
    w = F.weights
    up = np.sum(w * (A & (r > 0)) * np.abs(r) ** pprime)
    down = np.sum(w * (A & (r < 0)) * np.abs(r) ** pprime)
    sign = 1.0 if up >= down else -1.0
    rs = sign * r
    P = A & (rs > 0)
    Q = A & (rs <= 0)
    head = np.where(P, rs, 0.0) ** (pprime - 1)
    denom = cond_exp(Q.astype(float), F, k)
    ratio = np.divide(cond_exp(head, F, k), denom,
                      out=np.zeros(F.n), where=denom > 0)
    b = sign * (head - ratio * Q)
    block = _single_subatom(b, A, F, k, k, p)
    mass = float(np.sum(w * A * np.abs(r) ** pprime))
    bound = (1 + 2 ** (1 / pprime)) * F.space.measure(A) ** (1 / pprime) * mass ** (1 / p)
    return MedianBlock(block, b, bound, {"side": sign, "mass": mass})


def build_block_mediandiff(A, f, F: Filtration, k: int,
                           pprime: float = 2.0) -> MedianBlock:
    """Block ``h - E_{k-1} h`` with ``h = sgn(r) |r|^(p'-1) chi_A``.

    Here ``r = f - alpha_{k-1}``. The head ``h`` is one level-``k`` subatom and
    the tail ``E_{k-1} h`` is split over the dyadic level sets of
    ``E_{k-1}(|h|)``. Cancellation is at level ``k-1`` and the bound is
    ``4 mu(A)^(1/p') ||h||_p``.
    """
    if k < 2:
        raise LevelRangeError("the median-difference block needs k >= 2")
    A = _level_set(A, F, k)
    if pprime <= 1:
        raise DomainError("pprime must exceed 1")
    f = np.asarray(f, dtype=float)
    p = conjugate(pprime)
    r = f - cond_median(f, F, k - 1)
    h = np.where(A, np.sign(r) * np.abs(r) ** (pprime - 1), 0.0)
    tail = cond_exp(h, F, k - 1)
    head = _single_subatom(h, A, F, k, k - 1, p)
    parts = [head]
    slices = dyadic_index(cond_exp(np.abs(h), F, k - 1))
    valid = slices > np.iinfo(np.int64).min
    for j in np.unique(slices[valid]):
        B = slices == j
        parts.append(_single_subatom(np.where(B, tail, 0.0), B, F,
                                     k - 1, k - 1, p).scaled(-1.0))
    block = merge_blocks(parts, k - 1)
    bound = 4.0 * F.space.measure(A) ** (1 / pprime) * lp_norm(h, F.weights, p)
    return MedianBlock(block, h - tail, bound, {"head": h, "tail": tail})


def build_block_sign(A, f, F: Filtration, k: int) -> MedianBlock:
    """Sign block ``b1 - b2`` for the ``p = inf`` case.

    ``b1`` is ``+1`` above and ``-1`` below the median on ``A``; ``b2``
    spreads ``E_k b1`` over the ties ``A & {f = alpha_k}`` (zero where there
    are none). ``|b2| <= 1`` follows from the median inequalities, so the block
    is a single ``inf``-subatom on ``A`` of cost at most ``mu(A)``.
    """
    A = _level_set(A, F, k)
    if not A.any():
        raise DomainError("A must be nonempty")
    f = np.asarray(f, dtype=float)
    alpha = cond_median(f, F, k)
    b1 = (A & (f > alpha)).astype(float) - (A & (f < alpha))
    ties = A & (f == alpha)
    denom = cond_exp(ties.astype(float), F, k)
    b2 = np.divide(ties * cond_exp(b1, F, k), denom,
                   out=np.zeros(F.n), where=denom > 0)
    b = b1 - b2
    block = _single_subatom(b, A, F, k, k, np.inf)
    return MedianBlock(block, b, F.space.measure(A), {"b1": b1, "b2": b2})


def _indicator_per_parent(A, F, k):
    """Cheapest of two certificates on each level-``(k-1)`` block."""
    w = F.weights
    chi = A.astype(float)
    lab = F.level(k - 1)
    terms = []
    for parent in np.unique(lab):
        P = lab == parent
        r = float(np.sum(w * chi * P) / np.sum(w * P))
        if r <= ATOL or r >= 1 - ATOL:
            continue
        whole = np.where(P, chi - r, 0.0)
        single = _single_subatom(whole, P, F, k - 1, k - 1, np.inf)
        split = merge_blocks([
            _single_subatom(np.where(P, chi, 0.0), A & P, F, k, k - 1, np.inf),
            _single_subatom(np.where(P, r, 0.0), P, F, k - 1, k - 1, np.inf).scaled(-1.0),
        ], k - 1)
        terms.append(single if single.cost <= split.cost else split)
    return merge_blocks(terms, k - 1) if terms else CancelBlock(k - 1)


def _indicator_sliced(A, F, k, n_slices):
    """``chi_A`` as a level-``k`` subatom, ``E_{k-1} chi_A`` cut into slices."""
    e = cond_exp(A.astype(float), F, k - 1)
    parts = [_single_subatom(A.astype(float), A, F, k, k - 1, np.inf)]
    idx = uniform_index(e, n_slices)
    for j in np.unique(idx[idx > 0]):
        B = idx == j
        parts.append(_single_subatom(np.where(B, e, 0.0), B, F,
                                     k - 1, k - 1, np.inf).scaled(-1.0))
    return merge_blocks(parts, k - 1)


def indicator_slice_bound(A, F: Filtration, k: int, n_slices: int = 64) -> float:
    """``mu(A) + sum_j max_{B_j} E_{k-1} chi_A * mu(B_j)`` over uniform slices."""
    A = np.asarray(A, dtype=bool)
    e = cond_exp(A.astype(float), F, k - 1)
    idx = uniform_index(e, n_slices)
    total = F.space.measure(A)
    for j in np.unique(idx[idx > 0]):
        B = idx == j
        total += float(e[B].max()) * F.space.measure(B)
    return total


def build_block_indicator(A, F: Filtration, k: int, n_slices: int = 64) -> MedianBlock:
    """Block ``chi_A - E_{k-1} chi_A`` with cancellation level ``k-1``.

    Two certificates are built: the sliced one (``chi_A`` at level ``k`` and
    ``E_{k-1} chi_A`` over ``n_slices`` uniform level sets) and a per-parent
    one choosing, on every level-``(k-1)`` block, between a single subatom and
    the head/tail split. The cheaper is returned; its cost is at most
    ``3 mu(A)``.
    """
    if k < 2:
        raise LevelRangeError("the indicator block needs k >= 2")
    if n_slices < 1:
        raise DomainError("need at least one slice")
    A = _level_set(A, F, k)
    b = A - cond_exp(A.astype(float), F, k - 1)
    if np.all(np.abs(b) <= ATOL):
        return MedianBlock(CancelBlock(k - 1), np.zeros(F.n), 0.0,
                           {"slice_bound": indicator_slice_bound(A, F, k, n_slices)})
    sliced = _indicator_sliced(A, F, k, n_slices)
    local = _indicator_per_parent(A, F, k)
    block = sliced if sliced.cost <= local.cost else local
    parts = {"slice_bound": indicator_slice_bound(A, F, k, n_slices),
             "sliced_cost": sliced.cost, "per_parent_cost": local.cost}
    return MedianBlock(block, b, 3.0 * F.space.measure(A), parts)


@dataclass(frozen=True)
class WeakAtom:
    """``w = (phi - E_{k-1} phi) / mu(supp phi)``."""
    k: int
    phi: np.ndarray
    support: np.ndarray
    values: np.ndarray


def weak_atom(phi, F: Filtration, k: int) -> WeakAtom:
    """Weak ``inf``-atom of a level-``k`` function bounded by one."""
    if k < 2:
        raise LevelRangeError("weak atoms need k >= 2")
    F.check_level(k)
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (F.n,) or not F.is_measurable(phi, k):
        raise DomainError(f"phi must be measurable at level {k}")
    if np.abs(phi).max() > 1 + 1e-12:
        raise DomainError("phi must be bounded by one")
    A = phi != 0
    if not A.any():
        raise DomainError("phi must have nonempty support")
    w = (phi - cond_exp(phi, F, k - 1)) / F.space.measure(A)
    return WeakAtom(k, phi, A, w)


@dataclass(frozen=True)
class WeakSplit:
    """Two-subatom splitting ``w(xi) = a1 + a2`` with its certificate."""
    a1: np.ndarray
    a2: np.ndarray
    w: np.ndarray
    block: CancelBlock

    @property
    def cost(self) -> float:
        return self.block.cost


def weak_atom_split(xi, A, F: Filtration, k: int) -> WeakSplit:
    """Split ``w(xi) = [E_k(chi_A xi) - E_{k-1}(chi_A xi)] / mu(A)``.

    ``A`` must be a single level-``k`` block and ``B`` its parent at level
    ``k-1``. ``a1`` lives on ``B \\ A`` and ``a2`` on ``A``; both are
    level-``k`` measurable, so as subatoms of a block cancelling at level
    ``k-1`` they cost at most 2 and 4.
    """
    if k < 2:
        raise LevelRangeError("the splitting needs k >= 2")
    xi = np.broadcast_to(np.asarray(xi, dtype=float), (F.n,))
    if np.abs(xi).max() > 1 + 1e-12:
        raise DomainError("xi must be bounded by one")
    A = np.asarray(A, dtype=bool)
    lab = F.level(k)
    if not A.any() or np.unique(lab[A]).size != 1 or not F.is_measurable_set(A, k):
        raise DomainError(f"A must be a single block of level {k}")
    B = F.measurable_hull(A, k - 1)
    mA = F.space.measure(A)
    c = F.space.integral(A * xi) / F.space.measure(B)
    a1 = np.where(B & ~A, -c / mA, 0.0)
    a2 = np.where(A, (cond_exp(xi, F, k) - c) / mA, 0.0)
    w = (cond_exp(A * xi, F, k) - cond_exp(A * xi, F, k - 1)) / mA
    parts = [_single_subatom(a1, B & ~A, F, k, k - 1, np.inf),
             _single_subatom(a2, A, F, k, k - 1, np.inf)]
    return WeakSplit(a1, a2, w, merge_blocks(parts, k - 1))


def check_median_block(mb: MedianBlock, F: Filtration, p: float) -> bool:
    """Validity of the block plus agreement with its declared values."""
    ok, _ = validate_block(mb.block, F, p)
    if not ok:
        return False
    vals = mb.block.values(F.n)
    return bool(np.abs(vals - mb.values).max() <= 1e-9 * max(1.0, np.abs(mb.values).max()))
