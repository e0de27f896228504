"""Column blocks in a tracial matrix algebra.

Run with ``python3 demos/matrix_filtrations.py``.
"""
import numpy as np

from martblocks import (BlockLevel, NCFiltration, col_BMO_norm, col_H1_norm,
                        decompose_delta_projection, truncate_block)
from martblocks.nc import random_unitary, tau

M2 = NCFiltration.m2chain()
p = 0.5 * np.array([[1, 1], [1, 1]])
b = decompose_delta_projection(p, M2, 3)
print("Delta_3 p =\n", np.round(b.values(2).real, 12))
print(f"cost {b.cost:.4f}, column H1 {col_H1_norm(b.values(2), M2):.4f}, "
      f"column BMO {col_BMO_norm(b.values(2), M2):.4f}")

rng = np.random.default_rng(5)
# rotated chain C < M_2 (x) 1_3 < M_6
V = random_unitary(rng, 6)
F = NCFiltration([BlockLevel(V @ lv.U, lv.dims) for lv in
                  (BlockLevel.scalars(6), BlockLevel.tensor_trace(2, 3), BlockLevel.full(6))])
g = rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2))
u, _ = np.linalg.qr(g)
q = u @ u.conj().T
print(f"\nlevel chain {[lv.dims for lv in F.levels]}, tau(q) = {tau(q).real:.4f}")
for k in range(2, F.depth + 1):
    b = decompose_delta_projection(q, F, k)
    print(f"Delta_{k} q: {len(b.terms)} subatoms, cost {b.cost:.4f} "
          f"<= 6 tau(q) = {6 * tau(q).real:.4f}")
for N in range(len(b.terms) + 1):
    tr = truncate_block(b, N, F)
    print(f"  keep {N} terms: distance {tr.distance:.4f} <= {tr.bound:.4f}")
