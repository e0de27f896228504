"""
Certificates for atoms, subatoms and atomic blocks on a finite filtration.

A cancellation block at level ``k`` is ``b = sum_j lam_j a_j`` with
``E_k b = 0`` and each subatom ``a_j`` supported in a level-``k_j`` measurable
set ``A_j`` (``k_j >= k``) with

    ||a_j||_p <= mu(A_j) ** (1 - 1/p0 - 1/p') / (k_j - k + 1).

``p0 = 1`` gives the usual p-subatoms; ``p0 < 1`` gives the (p0, q) variant
with ``q = p``. A block's cost is ``sum |lam_j|``; a level-1 measurable block
costs its ``L_{p0}`` (quasi-)norm.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import DomainError
from .probability import ATOL, Filtration, cond_exp, lp_norm

NORM_RTOL = 1e-10


def conjugate(p: float) -> float:
    """Hölder conjugate exponent ``p'`` with ``1/p + 1/p' = 1``."""
    if p == 1:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1.0)


def subatom_bound(mass: float, gap: int, p: float, p0: float = 1.0) -> float:
    """Largest admissible ``||a||_p`` for a subatom on a set of measure ``mass``.

    ``gap`` is ``k_j - k``, the distance between the subatom's level and the
    block's cancellation level.
    """
    exponent = 1.0 - 1.0 / p0 - 1.0 / conjugate(p)
    return mass ** exponent / (gap + 1)


def _within(value: float, bound: float) -> bool:
    return value <= bound * (1 + NORM_RTOL) + 1e-12


@dataclass(frozen=True)
class Subatom:
    """Piece of an atomic block: values supported in a level-``level`` set."""
    block_level: int
    level: int
    support: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "support", np.asarray(self.support, dtype=bool))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))


@dataclass(frozen=True)
class PAtom:
    """Martingale p-atom. ``level=None`` marks the level-1 measurable kind."""
    level: int | None
    support: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "support", np.asarray(self.support, dtype=bool))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))


@dataclass(frozen=True)
class CancelBlock:
    level: int
    coefficients: tuple = ()
    subatoms: tuple = ()

    def __post_init__(self):
        if len(self.coefficients) != len(self.subatoms):
            raise DomainError("one coefficient per subatom is required")
        object.__setattr__(self, "coefficients",
                           tuple(float(c) for c in self.coefficients))
        object.__setattr__(self, "subatoms", tuple(self.subatoms))

    @property
    def terms(self):
        return list(zip(self.coefficients, self.subatoms))

    def values(self, n: int | None = None) -> np.ndarray:
        if not self.subatoms:
            if n is None:
                raise DomainError("empty block: pass the number of points")
            return np.zeros(n)
        out = np.zeros_like(self.subatoms[0].values)
        for c, a in self.terms:
            out += c * a.values
        return out

    @property
    def cost(self) -> float:
        return float(sum(abs(c) for c in self.coefficients))

    def scaled(self, c: float) -> "CancelBlock":
        return CancelBlock(self.level, tuple(c * x for x in self.coefficients),
                           self.subatoms)


@dataclass(frozen=True)
class Sigma1Block:
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def scaled(self, c: float) -> "Sigma1Block":
        return Sigma1Block(c * self.values)


def block_values(b, n: int) -> np.ndarray:
    if isinstance(b, Sigma1Block):
        return b.values
    return b.values(n)


def block_cost(b, F: Filtration, p0: float = 1.0) -> float:
    if isinstance(b, Sigma1Block):
        return lp_norm(b.values, F.weights, p0)
    return b.cost


def merge_blocks(blocks: Sequence[CancelBlock], level: int) -> CancelBlock:
    """Concatenate the terms of several blocks sharing a cancellation level."""
    coefs, subs = [], []
    for b in blocks:
        if b.level != level:
            raise DomainError("blocks to merge must share their level")
        coefs.extend(b.coefficients)
        subs.extend(b.subatoms)
    return CancelBlock(level, tuple(coefs), tuple(subs))


def check_subatom(s: Subatom, F: Filtration, p: float, p0: float = 1.0,
                  block_level: int | None = None) -> str | None:
    """Return ``None`` if valid, else the name of the failed condition."""
    k = s.block_level if block_level is None else block_level
    if s.block_level != k:
        return "block level mismatch"
    if not 1 <= s.level <= F.depth or s.level < k:
        return "subatom level"
    if s.values.shape != (F.n,) or s.support.shape != (F.n,):
        return "shape"
    if not s.support.any():
        return "empty support" if np.any(s.values != 0) else None
    if not F.is_measurable_set(s.support, s.level):
        return "support measurability"
    if np.any(np.abs(s.values[~s.support]) > ATOL):
        return "support"
    norm = lp_norm(s.values, F.weights, p)
    bound = subatom_bound(F.space.measure(s.support), s.level - k, p, p0)
    if not _within(norm, bound):
        return "norm bound"
    return None


def validate_atom(a: PAtom, F: Filtration, p: float) -> tuple[bool, str]:
    """Check the three p-atom conditions; the diagnostic names the first failure."""
    w = F.weights
    if a.level is None:
        if not F.is_measurable(a.values, 1):
            return False, "level-1 measurability"
        if abs(lp_norm(a.values, w, 1) - 1.0) > 1e-9:
            return False, "unit L1 norm"
        return True, "ok"
    if not 1 <= a.level <= F.depth:
        return False, "level range"
    if not F.is_measurable_set(a.support, a.level):
        return False, "support measurability"
    if np.any(np.abs(cond_exp(a.values, F, a.level)) > ATOL):
        return False, "cancellation"
    if np.any(np.abs(a.values[~a.support]) > ATOL):
        return False, "support"
    norm = lp_norm(a.values, w, p)
    bound = subatom_bound(F.space.measure(a.support), 0, p)
    if not _within(norm, bound):
        return False, "norm bound"
    return True, "ok"


def validate_block(b, F: Filtration, p: float, p0: float = 1.0):
    """Return ``(valid, cost)``; cost is ``None`` when invalid.

    With ``p0 < 1`` the subatom bound uses the (p0, p) exponent and a level-1
    block costs its ``L_{p0}`` quasi-norm.
    """
    if isinstance(b, Sigma1Block):
        ok = b.values.shape == (F.n,) and F.is_measurable(b.values, 1)
        return (True, lp_norm(b.values, F.weights, p0)) if ok else (False, None)
    if not 1 <= b.level <= F.depth:
        return False, None
    for s in b.subatoms:
        if check_subatom(s, F, p, p0, block_level=b.level) is not None:
            return False, None
    if b.subatoms:
        v = b.values()
        scale = max(1.0, float(np.abs(v).max()))
        if np.any(np.abs(cond_exp(v, F, b.level)) > ATOL * scale):
            return False, None
    return True, b.cost


def block_diagnostic(b, F: Filtration, p: float, p0: float = 1.0) -> str:
    """Human-readable reason a block fails validation, or ``"ok"``."""
    if isinstance(b, Sigma1Block):
        return "ok" if validate_block(b, F, p, p0)[0] else "level-1 measurability"
    for j, s in enumerate(b.subatoms):
        why = check_subatom(s, F, p, p0, block_level=b.level)
        if why is not None:
            return f"subatom {j}: {why}"
    if b.subatoms and np.any(np.abs(cond_exp(b.values(), F, b.level)) > ATOL):
        return "cancellation"
    return "ok"


def subatom_l1_bound_check(s: Subatom, F: Filtration) -> bool:
    """``||a||_1 <= 1/(k_j - k + 1) <= 1`` for a valid subatom."""
    l1 = lp_norm(s.values, F.weights, 1)
    return _within(l1, 1.0 / (s.level - s.block_level + 1))


def normalized_subatom(values, support, level: int, block_level: int,
                       F: Filtration, p: float, p0: float = 1.0):
    """Scale ``values`` to saturate the subatom bound.

    Returns ``(coefficient, Subatom)``, or ``None`` for a zero vector.
    """
    values = np.asarray(values, dtype=float)
    norm = lp_norm(values, F.weights, p)
    if norm == 0:
        return None
    bound = subatom_bound(F.space.measure(support), level - block_level, p, p0)
    lam = norm / bound
    return lam, Subatom(block_level, level, support, values / lam)


@dataclass
class DecompositionReport:
    """Certified atomic-block decomposition of ``target``.

    ``cost`` is the summed block cost, an upper bound for the atomic-block
    norm of ``target - residual``.
    """
    blocks: list
    target: np.ndarray
    p: float
    cost: float
    residual: np.ndarray
    route: str = ""

    @classmethod
    def build(cls, blocks, target, F: Filtration, p: float, route: str = ""):
        target = np.asarray(target, dtype=float)
        total = np.zeros(F.n)
        for b in blocks:
            total += block_values(b, F.n)
        cost = float(sum(block_cost(b, F) for b in blocks))
        return cls(list(blocks), target, p, cost, target - total, route)

    def validate(self, F: Filtration, tol: float = 1e-9) -> bool:
        if np.abs(self.residual).max(initial=0.0) > tol:
            return False
        return all(validate_block(b, F, self.p)[0] for b in self.blocks)

    def to_dict(self, F: Filtration) -> dict:
        return {
            "weights": F.weights.tolist(),
            "levels": F.labels.tolist(),
            "target": self.target.tolist(),
            "p": "inf" if np.isinf(self.p) else self.p,
            "route": self.route,
            "cost": self.cost,
            "residual": self.residual.tolist(),
            "blocks": [block_to_dict(b) for b in self.blocks],
        }


def block_to_dict(b) -> dict:
    if isinstance(b, Sigma1Block):
        return {"kind": "sigma1", "values": b.values.tolist()}
    return {
        "kind": "cancel",
        "level": b.level,
        "terms": [{"coefficient": c,
                   "level": s.level,
                   "support": np.flatnonzero(s.support).tolist(),
                   "values": s.values.tolist()} for c, s in b.terms],
    }


def block_from_dict(d: dict, n: int):
    if d["kind"] == "sigma1":
        return Sigma1Block(np.asarray(d["values"], dtype=float))
    coefs, subs = [], []
    for t in d["terms"]:
        mask = np.zeros(n, dtype=bool)
        mask[t["support"]] = True
        coefs.append(t["coefficient"])
        subs.append(Subatom(d["level"], t["level"], mask, t["values"]))
    return CancelBlock(d["level"], tuple(coefs), tuple(subs))


def report_from_dict(d: dict) -> tuple[DecompositionReport, Filtration]:
    F = Filtration(d["weights"], d["levels"])
    p = np.inf if d["p"] == "inf" else float(d["p"])
    blocks = [block_from_dict(b, F.n) for b in d["blocks"]]
    rep = DecompositionReport.build(blocks, d["target"], F, p, d.get("route", ""))
    return rep, F
