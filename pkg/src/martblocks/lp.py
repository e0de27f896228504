"""
Exact atomic-block gauge for ``p = inf`` on very small spaces.

For ``p = inf`` the subatoms at cancellation level ``k`` supported in a set
``A`` form an L-infinity ball whose extreme points are the sign patterns on
``A`` scaled by ``mu(A)^{-1} / (k_j - k + 1)``. The gauge is therefore the
value of a finite linear program over those extreme points plus a level-1
measurable part.
"""
from __future__ import annotations

import itertools

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .exceptions import DomainError, SizeError
from .probability import Filtration

MAX_POINTS = 8


def _sign_patterns(size: int) -> np.ndarray:
    return np.array(list(itertools.product((1.0, -1.0), repeat=size)))


def measurable_sets(F: Filtration):
    """All nonempty sets measurable at level ``K`` with their first level."""
    lab = F.level(F.depth)
    nb = int(lab.max()) + 1
    out = []
    for bits in range(1, 2 ** nb):
        chosen = np.array([(bits >> b) & 1 for b in range(nb)], dtype=bool)
        mask = chosen[lab]
        out.append((mask, F.first_measurable_level(mask)))
    return out


def _columns(F: Filtration):
    """Extreme subatoms as sparse columns, with their cancellation levels."""
    w = F.weights
    sets = measurable_sets(F)
    rows, cols, vals, levels = [], [], [], []
    col = 0
    for k in range(1, F.depth + 1):
        for mask, first in sets:
            kj = max(k, first)
            idx = np.flatnonzero(mask)
            bound = 1.0 / (w[idx].sum() * (kj - k + 1))
            pats = _sign_patterns(idx.size) * bound
            m = pats.shape[0]
            rows.append(np.tile(idx, m))
            cols.append(np.repeat(np.arange(col, col + m), idx.size))
            vals.append(pats.ravel())
            levels.append(np.full(m, k))
            col += m
    U = sparse.csc_matrix((np.concatenate(vals),
                           (np.concatenate(rows), np.concatenate(cols))),
                          shape=(F.n, col))
    return U, np.concatenate(levels)


def atb_norm_lp(f, F: Filtration, p: float = np.inf, return_result: bool = False):
    """Exact ``p = inf`` atomic-block norm of ``f`` on at most 8 points.

    Minimizes ``||g||_1 + sum |lam|`` over ``f = g + sum_k b_k`` with ``g``
    level-1 measurable and each ``b_k`` a combination of extreme subatoms
    with ``E_k b_k = 0``. With ``return_result`` the scipy result is
    returned alongside the value.
    """
    if not np.isinf(p):
        raise DomainError("the exact gauge is only available for p = inf")
    if F.n > MAX_POINTS:
        raise SizeError(f"exact gauge limited to {MAX_POINTS} points")
    f = np.asarray(f, dtype=float)
    if f.shape != (F.n,):
        raise DomainError("f has the wrong length")
    if not F.is_measurable(f, F.depth, 1e-9 * max(1.0, np.abs(f).max())):
        raise DomainError("f must be measurable at the last level")
    w = F.weights

    # level-1 part, split into positive and negative block heights
    lab1 = F.level(1)
    nb1 = int(lab1.max()) + 1
    G = sparse.csc_matrix((np.ones(F.n), (np.arange(F.n), lab1)), shape=(F.n, nb1))
    U, levels = _columns(F)

    # E_k b_k = 0: one row per level-k block, integrating only level-k columns
    cancel = []
    for k in range(1, F.depth + 1):
        lab = F.level(k)
        nbk = int(lab.max()) + 1
        integ = sparse.csr_matrix((w, (lab, np.arange(F.n))), shape=(nbk, F.n))
        cancel.append(integ @ U @ sparse.diags((levels == k).astype(float)))
    C = sparse.vstack(cancel)

    zeros_g = sparse.csr_matrix((C.shape[0], nb1))
    A_eq = sparse.vstack([
        sparse.hstack([G, -G, U]),
        sparse.hstack([zeros_g, zeros_g, C]),
    ]).tocsc()
    b_eq = np.concatenate([f, np.zeros(C.shape[0])])
    mass1 = F.block_masses(1)
    c = np.concatenate([mass1, mass1, np.ones(U.shape[1])])
    res = linprog(c, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs",
                  options={"primal_feasibility_tolerance": 1e-10,
                           "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise RuntimeError(f"LP solver failed: {res.message}")
    value = float(res.fun)
    return (value, res) if return_result else value
