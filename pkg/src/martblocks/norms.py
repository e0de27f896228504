"""
Hardy, BMO and Lipschitz-type norms of random variables on a finite filtration.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blocks import block_values, validate_block
from .exceptions import CertificateError, DomainError, ReconstructionError
from .probability import (Filtration, cond_exp, cond_square_function,
                          differences, lp_norm, square_function)


@dataclass(frozen=True)
class NormParams:
    """Exponents ``p`` and ``p'`` with ``1/p + 1/p' = 1``, plus ``(p0, q)``."""
    p: float = 2.0
    p0: float | None = None
    q: float | None = None

    def __post_init__(self):
        if not self.p > 1:
            raise DomainError("p must exceed 1")
        if self.p0 is not None and not 0 < self.p0 < 1:
            raise DomainError("p0 must lie in (0, 1)")
        if self.q is not None and not 1 < self.q < np.inf:
            raise DomainError("q must lie in (1, inf)")

    @property
    def pprime(self) -> float:
        return 1.0 if np.isinf(self.p) else self.p / (self.p - 1.0)


def H1_norm(f, F: Filtration) -> float:
    """``||S(f)||_1`` with ``S(f) = (sum_k |df_k|^2)^{1/2}``."""
    return lp_norm(square_function(f, F), F.weights, 1)


def h1_norm(f, F: Filtration) -> float:
    """L1 norm of the conditioned square function."""
    return lp_norm(cond_square_function(f, F), F.weights, 1)


def diag_norm(f, F: Filtration) -> float:
    """``sum_k ||df_k||_1``."""
    d = np.abs(differences(f, F))
    return float(np.sum(d @ F.weights))


def bmo_norm(f, F: Filtration, moment: float = 2.0) -> float:
    """``sup_k ||(E_k |f - E_k f|^m)^{1/m}||_inf`` for ``m = moment``."""
    if moment < 1:
        raise DomainError("moment must be at least 1")
    f = np.asarray(f, dtype=float)
    best = 0.0
    for k in range(1, F.depth + 1):
        dev = np.abs(f - cond_exp(f, F, k)) ** moment
        best = max(best, float(cond_exp(dev, F, k).max()) ** (1.0 / moment))
    return best


def BMO_norm(f, F: Filtration) -> float:
    """``sup_k ||(E_k |f - E_{k-1} f|^2)^{1/2}||_inf`` with ``E_0 = 0``."""
    f = np.asarray(f, dtype=float)
    best = 0.0
    for k in range(1, F.depth + 1):
        dev = (f - cond_exp(f, F, k - 1)) ** 2
        best = max(best, float(np.sqrt(cond_exp(dev, F, k).max())))
    return best


def bmo_equiv_gap(f, F: Filtration) -> tuple[float, float]:
    """``(||f||_BMO, ||f||_bmo + sup_k ||df_k||_inf)``.

    The first never exceeds the second, and the second is at most twice the
    first.
    """
    jumps = float(np.abs(differences(f, F)).max())
    return BMO_norm(f, F), bmo_norm(f, F, 2.0) + jumps


def lambda_pq_norm(f, F: Filtration, p0: float, q: float) -> float:
    """Lipschitz-type norm with exponents ``0 < p0 < 1 < q``.

    Supremum over levels ``k`` and level-``k`` sets ``A`` of
    ``mu(A)^(1 - 1/p0) [ (avg_A |f - E_k f|^q)^(1/q) + ||df_k||_inf ]``.
    Only blocks are scanned: a union ``U`` of blocks has smaller mass factor
    than each of its blocks and its average is at most the largest block
    average, so unions never increase the supremum.
    """
    if not (0 < p0 < 1 < q < np.inf):
        raise DomainError("need 0 < p0 < 1 < q < inf")
    f = np.asarray(f, dtype=float)
    d = differences(f, F)
    w = F.weights
    best = 0.0
    for k in range(1, F.depth + 1):
        lab = F.level(k)
        mass = F.block_masses(k)
        dev = np.abs(f - cond_exp(f, F, k)) ** q
        avg = np.bincount(lab, weights=w * dev) / mass
        jump = float(np.abs(d[k - 1]).max())
        vals = mass ** (1.0 - 1.0 / p0) * (avg ** (1.0 / q) + jump)
        best = max(best, float(vals.max()))
    return best


def hp_atb_quasinorm_upper(f, F: Filtration, p0: float, q: float,
                           decomposition) -> float:
    """``(sum_i cost(b_i)^p0)^(1/p0)`` for a supplied (p0, q) decomposition.

    Each block is validated with the subatom bound
    ``mu(A)^(1 - 1/p0 - 1/q')``; a level-1 block costs its ``L_p0`` quasi-norm.
    """
    f = np.asarray(f, dtype=float)
    total = np.zeros(F.n)
    costs = []
    for b in decomposition:
        ok, cost = validate_block(b, F, q, p0)
        if not ok:
            raise CertificateError("invalid (p0, q)-atomic block")
        total += block_values(b, F.n)
        costs.append(cost)
    if np.abs(total - f).max(initial=0.0) > 1e-9:
        raise ReconstructionError("blocks do not sum to f")
    return float(np.sum(np.asarray(costs) ** p0) ** (1.0 / p0))
