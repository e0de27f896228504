"""Atomic blocks on a small dyadic filtration.

Builds the indicator-difference block, certifies a decomposition of a random
martingale, and compares its cost with the exact p = inf gauge from the LP.
Run with ``python3 demos/commutative_blocks.py``.
"""
import numpy as np

from martblocks import (Filtration, H1_norm, atb_norm_lp, cond_exp,
                        decompose_delta_indicator, decompose_H1_to_blocks)

# eight equally weighted points, halved three times
F = Filtration(np.full(8, 1 / 8), [np.zeros(8, int), np.repeat([0, 1], 4),
                                   np.repeat([0, 1, 2, 3], 2), np.arange(8)])

A0 = np.zeros(8, bool)
A0[[0, 1, 5]] = True
for k in range(2, F.depth + 1):
    b = decompose_delta_indicator(A0, F, k)
    print(f"Delta_{k} chi_A0: {len(b.terms)} subatoms, cost {b.cost:.4f} "
          f"(limit 6 mu(A0) = {6 * F.space.measure(A0):.4f})")

rng = np.random.default_rng(0)
f = cond_exp(rng.standard_normal(8), F, F.depth)
print(f"\nH1 norm of f          {H1_norm(f, F):.4f}")
for route in ("davis", "atomic", "direct"):
    rep = decompose_H1_to_blocks(f, F, np.inf, route)
    print(f"certificate ({route:6s})  {rep.cost:.4f}  valid={rep.validate(F)}")
print(f"exact gauge (LP)      {atb_norm_lp(f, F):.4f}")
