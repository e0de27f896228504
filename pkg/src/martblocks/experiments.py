"""
Random instances and reproducible property experiments.

Every trial draws from its own ``numpy`` PCG64 stream spawned from the
experiment seed, so a report depends only on the experiment settings and not on how trials
are scheduled across threads.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import atoms, medians, nc
from .blocks import Sigma1Block, validate_block
from .exceptions import ConfigurationError, DomainError
from .lp import MAX_POINTS, atb_norm_lp
from .norms import bmo_equiv_gap
from .probability import Filtration, WeightedSpace, cond_exp, lp_norm, mart_diff

KINDS = ("norm-equiv", "step2-constant", "duality-p2", "median-lemma",
         "weak-atom", "lp-oracle", "nc-step2")
MAX_SPACE_POINTS = 64
MAX_DEPTH = 6
MAX_DIM = 8
THREADS_ENV = "MARTBLOCKS_THREADS"
CSV_HEADER = ("instance_id", "lhs", "rhs", "ratio", "pass")


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    trials: int
    seed: int = 0
    points: int = 16
    depth: int = 4
    dim: int = 4
    p: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 0:
            raise ConfigurationError("trials must be nonnegative")
        cap = MAX_POINTS if self.kind == "lp-oracle" else MAX_SPACE_POINTS
        if not 1 <= self.points <= cap:
            raise ConfigurationError(f"points must lie in 1..{cap}")
        if not 1 <= self.depth <= MAX_DEPTH:
            raise ConfigurationError(f"depth must lie in 1..{MAX_DEPTH}")
        if not 1 <= self.dim <= MAX_DIM:
            raise ConfigurationError(f"dim must lie in 1..{MAX_DIM}")
        if self.kind == "duality-p2" and self.p not in (None, 2, 2.0):
            raise ConfigurationError("the duality experiment is exact only for p = 2")
        if self.kind in ("step2-constant", "weak-atom", "nc-step2") and self.depth < 2:
            raise ConfigurationError(f"{self.kind} needs depth >= 2")


@dataclass(frozen=True)
class ReportRow:
    instance_id: int
    lhs: float
    rhs: float
    ratio: float
    passed: bool


def _ratio(lhs: float, rhs: float) -> float:
    return lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)


def gen_filtration(seed, points: int, depth: int, trivial_first: bool = True,
                   uniform: bool = False) -> Filtration:
    """Random refining chain with Dirichlet weights.

    Level 1 is a single block when ``trivial_first``; every later level cuts
    each block of size at least two into up to three random pieces.
    """
    if points < 1 or depth < 1:
        raise DomainError("need at least one point and one level")
    rng = np.random.default_rng(seed)
    if uniform:
        weights = np.full(points, 1.0 / points)
    else:
        weights = rng.dirichlet(np.ones(points))
        weights = np.maximum(weights, 1e-6)
    row = np.zeros(points, dtype=int)
    if not trivial_first:
        row = _split(rng, row)
    levels = [row]
    for _ in range(depth - 1):
        row = _split(rng, row)
        levels.append(row)
    return Filtration(WeightedSpace(weights), levels)


def _split(rng, row: np.ndarray) -> np.ndarray:
    out = np.empty_like(row)
    nxt = 0
    for b in np.unique(row):
        idx = rng.permutation(np.flatnonzero(row == b))
        pieces = int(rng.integers(1, min(3, idx.size) + 1))
        cuts = np.sort(rng.choice(np.arange(1, idx.size), pieces - 1, replace=False)) \
            if pieces > 1 else []
        for part in np.split(idx, cuts):
            out[part] = nxt
            nxt += 1
    return out


def _random_f(rng, n: int) -> np.ndarray:
    """Gaussian, heavy-tailed or tie-heavy integer values."""
    style = rng.integers(0, 3)
    if style == 0:
        return rng.standard_normal(n)
    if style == 1:
        return rng.standard_cauchy(n).clip(-50, 50)
    return rng.integers(-3, 4, n).astype(float)


def _size(rng, cap: int, low: int = 1) -> int:
    return int(rng.integers(low, cap + 1))


def _trial_norm_equiv(rng, spec):
    F = gen_filtration(rng, _size(rng, spec.points), _size(rng, spec.depth))
    lhs, rhs = bmo_equiv_gap(_random_f(rng, F.n), F)
    ok = lhs <= rhs * (1 + 1e-9) + 1e-12 and rhs <= 3 * lhs * (1 + 1e-9) + 1e-12
    return lhs, rhs, _ratio(rhs, lhs), ok


def _trial_step2(rng, spec):
    F = gen_filtration(rng, _size(rng, spec.points, 2), _size(rng, spec.depth, 2))
    k = int(rng.integers(2, F.depth + 1))
    A0 = np.zeros(F.n, dtype=bool)
    while not A0.any():
        A0 = rng.random(F.n) < rng.uniform(0.05, 0.9)
    b = atoms.decompose_delta_indicator(A0, F, k)
    target = mart_diff(A0.astype(float), F, k)
    recon = np.abs(b.values(F.n) - target).max() <= 1e-9
    ok_inf = validate_block(b, F, np.inf)[0]
    mass = F.space.measure(A0)
    cost = b.cost
    ok = recon and ok_inf and cost <= 6 * mass * (1 + 1e-12)
    return cost, mass, _ratio(cost, mass), ok


def _random_phi(rng, n):
    return _random_f(rng, n) * rng.uniform(0.1, 10)


def _trial_duality(rng, spec):
    F = gen_filtration(rng, _size(rng, spec.points), _size(rng, spec.depth))
    phi = _random_phi(rng, F.n)
    if rng.random() < 0.1:
        lab = F.level(1)
        b = Sigma1Block(rng.standard_normal(int(lab.max()) + 1)[lab])
    else:
        k = int(rng.integers(1, F.depth + 1))
        b = atoms.random_block(rng, F, k, int(rng.integers(1, 6)), 2.0)
    lhs, rhs = atoms.duality_bound_check_p2(b, phi, F)
    return lhs, rhs, _ratio(lhs, rhs), lhs <= rhs + 1e-9


def _trial_median(rng, spec):
    F = gen_filtration(rng, _size(rng, spec.points), _size(rng, spec.depth))
    f = _random_f(rng, F.n)
    k = int(rng.integers(1, F.depth + 1))
    alpha = medians.cond_median(f, F, k)
    A = atoms.random_level_set(rng, F, k)
    lhs_fn, ok = medians.cm_lemma_check(f, F, k, A, alpha)
    worst = float(lhs_fn[A].min())
    ok = ok and medians.is_cond_median(alpha, f, F, k)
    return 0.5, worst, _ratio(0.5, worst), ok


def _trial_weak_atom(rng, spec):
    F = gen_filtration(rng, _size(rng, spec.points, 2), _size(rng, spec.depth, 2))
    k = int(rng.integers(2, F.depth + 1))
    lab = F.level(k)
    A = lab == rng.choice(np.unique(lab))
    xi = rng.uniform(-1, 1, F.n)
    if rng.random() < 0.2:
        xi = np.sign(xi)
    split = medians.weak_atom_split(xi, A, F, k)
    B = F.measurable_hull(A, k - 1)
    rest = B & ~A
    mA = F.space.measure(A)
    recon = np.abs(split.a1 + split.a2 - split.w).max() <= 1e-9 * max(1.0, 1 / mA)
    b1 = rest.any() and np.all(np.abs(split.a1[rest]) <= (1 + 1e-12) / F.space.measure(rest))
    b1 = b1 or not rest.any()
    b2 = np.all(np.abs(split.a2) <= 2 * A / mA * (1 + 1e-12) + 1e-15)
    valid = validate_block(split.block, F, np.inf)[0]
    cost = split.cost
    ok = bool(recon and b1 and b2 and valid and cost <= 6 * (1 + 1e-12))
    return cost, 1.0, cost, ok


def _trial_lp(rng, spec):
    F = gen_filtration(rng, _size(rng, spec.points), _size(rng, spec.depth))
    f = cond_exp(_random_f(rng, F.n), F, F.depth)
    value = atb_norm_lp(f, F)
    cert = atoms.decompose_H1_to_blocks(f, F, np.inf).cost
    l1 = lp_norm(f, F.weights, 1)
    ok = l1 <= value * (1 + 1e-7) + 1e-9 and value <= cert * (1 + 1e-7) + 1e-9
    return value, cert, _ratio(value, cert), ok


def _trial_nc_step2(rng, spec):
    n = _size(rng, spec.dim, 2)
    F = nc.random_nc_filtration(rng, n, _size(rng, spec.depth, 2), rotate=rng.random() < 0.7)
    k = int(rng.integers(2, F.depth + 1))
    p = nc.BlockLevel.full(n).random_projection(rng)
    b = nc.decompose_delta_projection(p, F, k)
    target = nc.nc_cond_exp(p, F, k) - nc.nc_cond_exp(p, F, k - 1)
    recon = np.abs(b.values(n) - target).max() <= 1e-9
    valid = nc.validate_nc_block(b, F, np.inf)[0] and nc.validate_nc_block(b, F, 2.0)[0]
    t = float(nc.tau(p).real)
    ok = recon and valid and b.cost <= 6 * t * (1 + 1e-12)
    return b.cost, t, _ratio(b.cost, t), ok


_TRIALS = {
    "norm-equiv": _trial_norm_equiv,
    "step2-constant": _trial_step2,
    "duality-p2": _trial_duality,
    "median-lemma": _trial_median,
    "weak-atom": _trial_weak_atom,
    "lp-oracle": _trial_lp,
    "nc-step2": _trial_nc_step2,
}


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        raise ConfigurationError(f"{THREADS_ENV} must be an integer") from None


def run_experiment(spec: ExperimentSpec):
    """Run all trials; returns ``(rows, summary)`` with rows in id order."""
    body = _TRIALS[spec.kind]
    seeds = np.random.SeedSequence(spec.seed).spawn(spec.trials)

    def one(i):
        rng = np.random.Generator(np.random.PCG64(seeds[i]))
        lhs, rhs, ratio, ok = body(rng, spec)
        return ReportRow(i, float(lhs), float(rhs), float(ratio), bool(ok))

    workers = _threads()
    if workers > 1 and spec.trials > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, range(spec.trials)))
    else:
        rows = [one(i) for i in range(spec.trials)]
    summary = {
        "kind": spec.kind,
        "trials": spec.trials,
        "passes": sum(r.passed for r in rows),
        "max_ratio": max((r.ratio for r in rows), default=0.0),
    }
    return rows, summary


def emit_report(rows, fmt: str = "csv", path=None) -> str:
    """Serialize rows as CSV (fixed header) or JSON; optionally write to ``path``."""
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow([r.instance_id, repr(r.lhs), repr(r.rhs), repr(r.ratio),
                        "true" if r.passed else "false"])
        text = buf.getvalue()
    elif fmt == "json":
        text = json.dumps({"rows": [asdict(r) for r in rows]}, indent=1) + "\n"
    else:
        raise ConfigurationError(f"unknown report format {fmt!r}")
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def parse_report(text: str, fmt: str = "csv") -> list[ReportRow]:
    """Inverse of :func:`emit_report`."""
    if fmt == "json":
        return [ReportRow(**d) for d in json.loads(text)["rows"]]
    reader = csv.DictReader(io.StringIO(text))
    return [ReportRow(int(d["instance_id"]), float(d["lhs"]), float(d["rhs"]),
                      float(d["ratio"]), d["pass"] == "true") for d in reader]
