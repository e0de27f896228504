"""Conditional medians and the blocks built from them.

Run with ``python3 demos/medians_and_weak_atoms.py``.
"""
import numpy as np

from martblocks import (BMO_norm, MedianSequence, bmo_alpha_norm, build_block_indicator,
                        build_block_power, build_block_sign, pairing, weak_atom_split)
from martblocks.experiments import gen_filtration

rng = np.random.default_rng(1)
F = gen_filtration(rng, 24, 4)
f = rng.standard_cauchy(F.n).clip(-20, 20)

ms = MedianSequence(f, F)
print(f"medians valid on every level: {ms.is_valid()}")
print(f"BMO = {BMO_norm(f, F):.4f}, median form = {bmo_alpha_norm(f, F, ms):.4f}")

k = F.depth
lab = F.level(k)
A = lab == lab[0]
r = np.abs(f - ms.alpha(k)) * A
for pprime in (2.0, 3.0):
    mb = build_block_power(A, f, F, k, pprime)
    half = 0.5 * np.sum(F.weights * r ** pprime)
    print(f"power block p'={pprime:g}: pairing {pairing(f, mb.values, F):.4f} >= {half:.4f}, "
          f"cost {mb.cost:.4f} <= {mb.bound:.4f}")
mb = build_block_sign(A, f, F, k)
print(f"sign block: |pairing| {abs(pairing(f, mb.values, F)):.4f}, "
      f"integral {np.sum(F.weights * r):.4f}, cost {mb.cost:.4f}")

k2 = 2
A2 = F.level(k2) == F.level(k2)[0]
ib = build_block_indicator(A2, F, k2, 64)
print(f"indicator block: cost {ib.cost:.4f} <= 3 mu(A) = {3 * F.space.measure(A2):.4f}")
ws = weak_atom_split(rng.uniform(-1, 1, F.n), A2, F, k2)
print(f"weak atom split: certified cost {ws.cost:.4f} <= 6")
