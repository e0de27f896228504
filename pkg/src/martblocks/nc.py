"""
Finite-dimensional tracial matrix algebras and their martingales.

Every level of a filtration in ``M_n`` with the normalized trace
``tau = tr / n`` is a unital *-subalgebra of the form

    U (M_{a_1} (x) 1_{b_1}  (+) ... (+)  M_{a_m} (x) 1_{b_m}) U*,

and its trace-preserving conditional expectation compresses each diagonal
block, takes the normalized partial trace over the ``b`` factor and embeds the
result back. Pinchings (``b_i = 1``), partial traces (one block) and
commutative algebras (``a_i = 1``) are special cases.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .blocks import conjugate
from .exceptions import DomainError, LevelRangeError
from .levelsets import harmonic_index

TOL = 1e-10


def _as_matrix(x, n: int | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise DomainError("expected a square matrix")
    if n is not None and x.shape[0] != n:
        raise DomainError(f"expected a {n}x{n} matrix")
    return x


def _scale(x) -> float:
    return max(1.0, float(np.abs(x).max(initial=0.0)))


def tau(x) -> complex:
    """Normalized trace."""
    x = np.asarray(x)
    return np.trace(x) / x.shape[0]


class BlockLevel:
    """The algebra ``U (sum_i M_{a_i} (x) 1_{b_i}) U*`` inside ``M_n``.

    Columns of ``U`` are grouped block by block; inside block ``i`` the
    column ``alpha * b_i + beta`` carries the basis vector
    ``e_alpha (x) e_beta``.
    """

    def __init__(self, U, dims: Sequence[tuple[int, int]]):
        U = _as_matrix(U)
        dims = [(int(a), int(b)) for a, b in dims]
        if any(a < 1 or b < 1 for a, b in dims):
            raise DomainError("block dimensions must be positive")
        if sum(a * b for a, b in dims) != U.shape[0]:
            raise DomainError("block dimensions do not add up to n")
        if np.abs(U.conj().T @ U - np.eye(U.shape[0])).max() > 1e-9:
            raise DomainError("U must be unitary")
        self.U = U
        self.dims = dims
        self.offsets = np.concatenate([[0], np.cumsum([a * b for a, b in dims])])

    @property
    def n(self) -> int:
        return self.U.shape[0]

    @classmethod
    def full(cls, n: int) -> "BlockLevel":
        return cls(np.eye(n), [(n, 1)])

    @classmethod
    def scalars(cls, n: int) -> "BlockLevel":
        return cls(np.eye(n), [(1, n)])

    @classmethod
    def tensor_trace(cls, a: int, b: int) -> "BlockLevel":
        """``M_a (x) 1_b`` in ``M_{ab}``; the expectation is ``id (x) tau_b``."""
        return cls(np.eye(a * b), [(a, b)])

    @classmethod
    def pinch(cls, projections) -> "BlockLevel":
        """Block algebra ``sum_i p_i M p_i`` of an orthogonal partition of unity."""
        projs = [_as_matrix(p) for p in projections]
        n = projs[0].shape[0]
        if np.abs(sum(projs) - np.eye(n)).max() > 1e-9:
            raise DomainError("projections must sum to the identity")
        cols, dims = [], []
        for p in projs:
            if np.abs(p @ p - p).max() > 1e-9 or np.abs(p - p.conj().T).max() > 1e-9:
                raise DomainError("pinching needs orthogonal projections")
            vals, vecs = np.linalg.eigh(p)
            rng = vecs[:, vals > 0.5]
            if rng.shape[1]:
                cols.append(rng)
                dims.append((rng.shape[1], 1))
        return cls(np.hstack(cols), dims)

    @classmethod
    def commutative(cls, labels) -> "BlockLevel":
        """Diagonal matrices constant on each label group (uniform weights)."""
        labels = np.asarray(labels)
        n = labels.size
        order = np.argsort(labels, kind="stable")
        U = np.eye(n)[:, order]
        _, counts = np.unique(labels, return_counts=True)
        return cls(U, [(1, int(c)) for c in counts])

    def compress(self, x) -> list[np.ndarray]:
        """The ``a_i x a_i`` matrices ``(id (x) tau_b)`` of each diagonal block."""
        y = self.U.conj().T @ _as_matrix(x, self.n) @ self.U
        out = []
        for (a, b), s in zip(self.dims, self.offsets):
            blk = y[s:s + a * b, s:s + a * b].reshape(a, b, a, b)
            out.append(np.einsum("ibjb->ij", blk) / b)
        return out

    def embed(self, zs) -> np.ndarray:
        y = np.zeros((self.n, self.n), dtype=complex)
        for z, (a, b), s in zip(zs, self.dims, self.offsets):
            y[s:s + a * b, s:s + a * b] = np.kron(z, np.eye(b))
        return self.U @ y @ self.U.conj().T

    def cond_exp(self, x) -> np.ndarray:
        return self.embed(self.compress(x))

    def contains(self, x, atol: float = TOL) -> bool:
        x = _as_matrix(x, self.n)
        return bool(np.abs(self.cond_exp(x) - x).max() <= atol * _scale(x))

    def matrix_units(self):
        """Spanning family ``U (e_ij (x) 1_b) U*`` of the algebra."""
        for i, (a, _) in enumerate(self.dims):
            for r in range(a):
                for c in range(a):
                    zs = [np.zeros((aa, aa)) for aa, _ in self.dims]
                    zs[i][r, c] = 1.0
                    yield self.embed(zs)

    def spectral_projections(self, y, index) -> dict:
        """Spectral projections of a Hermitian ``y`` in this algebra.

        ``index`` maps eigenvalues to integer labels; label 0 is dropped.
        The eigendecomposition is done block by block, so every projection
        lies in the algebra exactly.
        """
        zs = self.compress(y)
        found: dict[int, list] = {}
        decomp = []
        for z in zs:
            vals, vecs = np.linalg.eigh((z + z.conj().T) / 2)
            decomp.append((index(vals), vecs))
        labels = sorted({int(j) for idx, _ in decomp for j in idx if j != 0})
        for j in labels:
            parts = []
            for idx, vecs in decomp:
                v = vecs[:, idx == j]
                parts.append(v @ v.conj().T)
            found[j] = self.embed(parts)
        return found

    def polar_subatoms(self, x):
        """Split ``x`` in this algebra as ``sum_i s_i tau(e_i) (x e_i / (s_i tau(e_i)))``.

        ``e_i`` are rank-one-per-block spectral projections of ``|x|`` inside
        the algebra and ``s_i`` its singular values, so the weights add up
        to ``tau(|x|)``. Returns ``(weight, piece, projection)`` triples.
        """
        out = []
        zs = self.compress(x)
        for i, z in enumerate(zs):
            _, s, vh = np.linalg.svd(z)
            b = self.dims[i][1]
            for sv, row in zip(s, vh):
                if sv <= TOL * 1e-2:
                    continue
                parts = [np.zeros_like(zz) for zz in zs]
                parts[i] = np.outer(row.conj(), row)
                e = self.embed(parts)
                weight = sv * b / self.n
                out.append((weight, x @ e, e))
        return out

    def random_projection(self, rng: np.random.Generator) -> np.ndarray:
        """A nonzero random projection in this algebra."""
        while True:
            parts = []
            for a, _ in self.dims:
                r = int(rng.integers(0, a + 1))
                g = rng.standard_normal((a, r)) + 1j * rng.standard_normal((a, r))
                q, _ = np.linalg.qr(g) if r else (np.zeros((a, 0)), None)
                parts.append(q @ q.conj().T)
            if any(np.trace(p).real > 0.5 for p in parts):
                return self.embed(parts)

    def __repr__(self):
        return f"BlockLevel(n={self.n}, dims={self.dims})"


class NCFiltration:
    """Increasing chain of :class:`BlockLevel` subalgebras of ``M_n``."""

    def __init__(self, levels: Sequence[BlockLevel], check: bool = True):
        levels = list(levels)
        if not levels:
            raise DomainError("a filtration needs at least one level")
        n = levels[0].n
        if any(lv.n != n for lv in levels):
            raise DomainError("all levels must act on the same space")
        if check:
            for k in range(1, len(levels)):
                if not all(levels[k].contains(m, 1e-9) for m in levels[k - 1].matrix_units()):
                    raise DomainError(f"level {k + 1} does not contain level {k}")
        self.levels = levels
        self.n = n

    @property
    def depth(self) -> int:
        return len(self.levels)

    def check_level(self, k: int) -> int:
        if not 1 <= k <= self.depth:
            raise LevelRangeError(f"level {k} outside 1..{self.depth}")
        return k

    def level(self, k: int) -> BlockLevel:
        return self.levels[self.check_level(k) - 1]

    @classmethod
    def m2chain(cls) -> "NCFiltration":
        """``M_2``: scalars, then the diagonal, then everything."""
        return cls([BlockLevel.scalars(2), BlockLevel.pinch([np.diag([1, 0]), np.diag([0, 1])]),
                    BlockLevel.full(2)])

    def __repr__(self):
        return f"NCFiltration(n={self.n}, dims={[lv.dims for lv in self.levels]})"


def nc_cond_exp(x, F: NCFiltration, k: int) -> np.ndarray:
    """``E_k x``; ``k = 0`` gives zero."""
    x = _as_matrix(x, F.n)
    if k == 0:
        return np.zeros_like(x)
    return F.level(k).cond_exp(x)


def nc_differences(f, F: NCFiltration) -> list[np.ndarray]:
    ek = [nc_cond_exp(f, F, k) for k in range(0, F.depth + 1)]
    return [ek[k] - ek[k - 1] for k in range(1, F.depth + 1)]


def schatten_norm(x, p: float) -> float:
    """``tau(|x|^p)^(1/p)``; operator norm for ``p = inf``."""
    if p < 1:
        raise DomainError("p must be at least 1")
    s = np.linalg.svd(_as_matrix(x), compute_uv=False)
    if np.isinf(p):
        return float(s.max(initial=0.0))
    return float(np.mean(s ** p) ** (1.0 / p))


def psd_sqrt(s) -> np.ndarray:
    """Square root of a PSD matrix; roundoff negatives are clamped to 0."""
    s = _as_matrix(s)
    vals, vecs = np.linalg.eigh((s + s.conj().T) / 2)
    vals = np.where(vals < 0, 0.0, vals)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def _op_norm_psd(s) -> float:
    s = _as_matrix(s)
    return float(max(np.linalg.eigvalsh((s + s.conj().T) / 2).max(), 0.0))


def col_H1_norm(f, F: NCFiltration) -> float:
    """``tau((sum_k df_k* df_k)^(1/2))``."""
    d = nc_differences(f, F)
    s = sum(x.conj().T @ x for x in d)
    return float(tau(psd_sqrt(s)).real)


def col_h1_norm(f, F: NCFiltration) -> float:
    """Conditioned version with ``|f_1|^2`` as the first term."""
    d = nc_differences(f, F)
    s = d[0].conj().T @ d[0]
    for k in range(2, F.depth + 1):
        s = s + nc_cond_exp(d[k - 1].conj().T @ d[k - 1], F, k - 1)
    return float(tau(psd_sqrt(s)).real)


def _col_bmo(f, F: NCFiltration, shift: int) -> float:
    f = _as_matrix(f, F.n)
    best = 0.0
    for k in range(1, F.depth + 1):
        g = f - nc_cond_exp(f, F, k - shift)
        best = max(best, _op_norm_psd(nc_cond_exp(g.conj().T @ g, F, k)))
    return float(np.sqrt(best))


def col_BMO_norm(f, F: NCFiltration) -> float:
    """``sup_k ||E_k((f - E_{k-1} f)*(f - E_{k-1} f))||^(1/2)``."""
    return _col_bmo(f, F, 1)


def col_bmo_norm(f, F: NCFiltration) -> float:
    """``sup_k ||E_k((f - E_k f)*(f - E_k f))||^(1/2)``."""
    return _col_bmo(f, F, 0)


def nc_diag_norm(f, F: NCFiltration) -> float:
    """``sum_k ||df_k||_1``."""
    return float(sum(schatten_norm(x, 1) for x in nc_differences(f, F)))


def _check_hermitian(x) -> np.ndarray:
    x = _as_matrix(x)
    if np.abs(x - x.conj().T).max() > TOL * _scale(x):
        raise DomainError("operator is not self-adjoint")
    return (x + x.conj().T) / 2


def spectral_proj_interval(x, lo: float, hi: float) -> np.ndarray:
    """Spectral projection of a Hermitian ``x`` onto ``(lo, hi]``."""
    x = _check_hermitian(x)
    vals, vecs = np.linalg.eigh(x)
    v = vecs[:, (vals > lo) & (vals <= hi)]
    return v @ v.conj().T


def is_projection(p, atol: float = TOL) -> bool:
    p = _as_matrix(p)
    return bool(np.abs(p @ p - p).max() <= atol and np.abs(p - p.conj().T).max() <= atol)


@dataclass(frozen=True)
class NCSubatom:
    """Column subatom ``a`` with ``a q = a`` for a projection ``q`` at ``level``."""
    block_level: int
    level: int
    projection: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class NCCancelBlock:
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

    @property
    def cost(self) -> float:
        return float(sum(abs(c) for c in self.coefficients))

    def values(self, n: int | None = None) -> np.ndarray:
        if not self.subatoms:
            if n is None:
                raise DomainError("empty block: pass the dimension")
            return np.zeros((n, n), dtype=complex)
        return sum(c * s.values for c, s in self.terms)

    def scaled(self, c: float) -> "NCCancelBlock":
        return NCCancelBlock(self.level, tuple(c * x for x in self.coefficients),
                             self.subatoms)


@dataclass(frozen=True)
class NCSigma1Block:
    values: np.ndarray

    @property
    def cost(self) -> float:
        return schatten_norm(self.values, 1)


def nc_merge(blocks, level: int) -> NCCancelBlock:
    coefs, subs = [], []
    for b in blocks:
        coefs.extend(b.coefficients)
        subs.extend(b.subatoms)
    return NCCancelBlock(level, tuple(coefs), tuple(subs))


def nc_subatom_bound(q, gap: int, p: float) -> float:
    return float(tau(q).real) ** (-1.0 / conjugate(p)) / (gap + 1)


def check_nc_subatom(s: NCSubatom, F: NCFiltration, p: float, block_level: int,
                     row: bool = False) -> str | None:
    """``None`` if valid, else the name of the failed condition."""
    if s.block_level != block_level:
        return "block level mismatch"
    if not block_level <= s.level <= F.depth:
        return "subatom level"
    q, a = s.projection, s.values
    if not is_projection(q, 1e-9):
        return "projection"
    if not F.level(s.level).contains(q, 1e-9):
        return "projection measurability"
    scale = _scale(a)
    if np.abs(a @ q - a).max() > TOL * scale:
        return "column support"
    if row and np.abs(q @ a - a).max() > TOL * scale:
        return "row support"
    norm = schatten_norm(a, p)
    bound = nc_subatom_bound(q, s.level - block_level, p)
    if norm > bound * (1 + TOL) + 1e-12:
        return "norm bound"
    return None


def validate_nc_block(b, F: NCFiltration, p: float, row: bool = False):
    """Return ``(valid, cost)``; cost is ``None`` when invalid."""
    if isinstance(b, NCSigma1Block):
        ok = F.level(1).contains(b.values)
        return (ok, b.cost) if ok else (False, None)
    if not 1 <= b.level <= F.depth:
        return False, None
    for s in b.subatoms:
        if check_nc_subatom(s, F, p, b.level, row) is not None:
            return False, None
    if b.subatoms:
        v = b.values()
        if np.abs(nc_cond_exp(v, F, b.level)).max() > TOL * _scale(v):
            return False, None
    return True, b.cost


def level_subatoms(x, F: NCFiltration, level: int, block_level: int) -> NCCancelBlock:
    """Write an element of ``M_level`` as subatoms with total cost
    ``(level - block_level + 1) ||x||_1``.

    The block is not cancelling by itself; callers merge it into one that is.
    """
    gap = level - block_level + 1
    coefs, subs = [], []
    for weight, piece, e in F.level(level).polar_subatoms(x):
        lam = gap * weight
        coefs.append(lam)
        subs.append(NCSubatom(block_level, level, e, piece / lam))
    return NCCancelBlock(block_level, tuple(coefs), tuple(subs))


def decompose_delta_projection(p, F: NCFiltration, k: int) -> NCCancelBlock:
    """``Delta_k(p)`` as a column block cancelling at level ``k-1``.

    With ``q_j(m)`` the spectral projection of ``E_m p`` for
    ``(1/(j+1), 1/j]``, the coefficients are ``(2/j) tau(q_j(k))`` and
    ``-(1/j) tau(q_j(k-1))``. The cost is at most ``6 tau(p)``.
    """
    if k < 2:
        raise LevelRangeError("Delta_k needs k >= 2")
    F.check_level(k)
    p = _as_matrix(p, F.n)
    if not is_projection(p, 1e-9):
        raise DomainError("input is not a projection")
    d = nc_cond_exp(p, F, k) - nc_cond_exp(p, F, k - 1)
    if np.abs(d).max() <= TOL:
        return NCCancelBlock(k - 1)
    coefs, subs = [], []
    for m, scale, sign in ((k, 2.0, 1.0), (k - 1, 1.0, -1.0)):
        y = nc_cond_exp(p, F, m)
        for j, q in F.level(m).spectral_projections(y, harmonic_index).items():
            lam = scale / j * float(tau(q).real)
            coefs.append(sign * lam)
            subs.append(NCSubatom(k - 1, m, q, q @ y / lam))
    return NCCancelBlock(k - 1, tuple(coefs), tuple(subs))


@dataclass(frozen=True)
class Truncation:
    """``b = block + remainder`` with ``distance = cost(remainder)``."""
    block: NCCancelBlock
    remainder: NCCancelBlock
    distance: float
    bound: float


def truncate_block(b: NCCancelBlock, N: int, F: NCFiltration) -> Truncation:
    """Keep the first ``N`` terms and fold the rest into ``E_1`` of the tail.

    The kept subatoms are reused at cancellation level 1 after rescaling by
    the original level ``k`` (coefficient ``k lam``, subatom ``a / k``). The
    folded term and the remainder's ``E_1`` part are split along the spectral
    projections of their modulus inside ``M_1``. ``bound`` is
    ``2 k sum_{j > N} |lam_j|``.
    """
    if N < 0:
        raise DomainError("N must be nonnegative")
    terms = b.terms
    if N >= len(terms):
        return Truncation(b, NCCancelBlock(1), 0.0, 0.0)
    k = b.level

    def relevel(pairs):
        return NCCancelBlock(1, tuple(k * c for c, _ in pairs),
                             tuple(NCSubatom(1, s.level, s.projection, s.values / k)
                                   for _, s in pairs))

    head, tail = terms[:N], terms[N:]
    tail_sum = sum(c * s.values for c, s in tail)
    folded = nc_cond_exp(tail_sum, F, 1)
    new = nc_merge([relevel(head), level_subatoms(folded, F, 1, 1)], 1)
    rest = nc_merge([relevel(tail), level_subatoms(-folded, F, 1, 1)], 1)
    bound = 2 * k * float(sum(abs(c) for c, _ in tail))
    return Truncation(new, rest, rest.cost, bound)


def nc_pairing(f, phi) -> complex:
    """``tau(f phi*)``."""
    f = _as_matrix(f)
    phi = _as_matrix(phi)
    if f.shape != phi.shape:
        raise DomainError("operators live in different algebras")
    return complex(np.trace(f @ phi.conj().T) / f.shape[0])


def nc_duality_bound_check_p2(b, phi, F: NCFiltration, p: float = 2.0):
    """``(|tau(b phi*)|, rhs)`` for a valid column 2-atomic block.

    ``rhs = cost(b) (||phi||_bmo_c + sup_k ||dphi_k||_inf)``, or
    ``||b||_1 ||E_1 phi||_inf`` for a level-1 block. Only ``p = 2`` is
    supported: other exponents would need a John-Nirenberg constant.
    """
    if p != 2:
        raise DomainError("the duality bound is exact only for p = 2")
    phi = _as_matrix(phi, F.n)
    if isinstance(b, NCSigma1Block):
        lhs = abs(nc_pairing(b.values, phi))
        return lhs, b.cost * schatten_norm(nc_cond_exp(phi, F, 1), np.inf)
    if not b.subatoms:
        return 0.0, 0.0
    ok, cost = validate_nc_block(b, F, 2.0)
    if not ok:
        raise DomainError("block is not a valid column 2-atomic block")
    lhs = abs(nc_pairing(b.values(), phi))
    jumps = max(schatten_norm(x, np.inf) for x in nc_differences(phi, F))
    return lhs, cost * (col_bmo_norm(phi, F) + jumps)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_nc_filtration(rng: np.random.Generator, n: int, depth: int,
                         rotate: bool = True) -> NCFiltration:
    """Random chain starting from the scalars.

    Each new level refines every block of the previous one by a random move:
    absorb a factor of ``b`` into ``a`` (tensor refinement), split the ``b``
    factor, merge with a neighbouring block of equal ``b``, or keep it.
    """
    V = random_unitary(rng, n) if rotate else np.eye(n)
    blocks = [np.arange(n).reshape(1, n)]
    levels = []
    for _ in range(depth):
        U = V[:, np.concatenate([b.ravel() for b in blocks])]
        levels.append(BlockLevel(U, [b.shape for b in blocks]))
        nxt = []
        for blk in blocks:
            a, b = blk.shape
            divisors = [c for c in range(2, b + 1) if b % c == 0]
            move = rng.integers(0, 4)
            if move == 0 and divisors:
                c = int(rng.choice(divisors))
                nxt.append(blk.reshape(a * c, b // c))
            elif move == 1 and b > 1:
                cut = int(rng.integers(1, b))
                nxt.extend([blk[:, :cut], blk[:, cut:]])
            else:
                nxt.append(blk)
        merged = []
        for blk in nxt:
            if merged and merged[-1].shape[1] == blk.shape[1] and rng.random() < 0.3:
                merged[-1] = np.vstack([merged[-1], blk])
            else:
                merged.append(blk)
        blocks = merged
    return NCFiltration(levels, check=False)


def random_nc_block(rng: np.random.Generator, F: NCFiltration, k: int,
                    terms: int, p: float = 2.0) -> NCCancelBlock:
    """Random valid column block cancelling at level ``k``.

    Random subatoms saturating their bounds are followed by a correction
    ``-E_k(sum)`` written as level-``k`` subatoms.
    """
    coefs, subs = [], []
    for _ in range(terms):
        kj = int(rng.integers(k, F.depth + 1))
        q = F.level(kj).random_projection(rng)
        g = rng.standard_normal((F.n, F.n)) + 1j * rng.standard_normal((F.n, F.n))
        a = g @ q
        a *= nc_subatom_bound(q, kj - k, p) / schatten_norm(a, p)
        coefs.append(float(rng.standard_normal()))
        subs.append(NCSubatom(k, kj, q, a))
    b0 = NCCancelBlock(k, tuple(coefs), tuple(subs))
    fix = level_subatoms(-nc_cond_exp(b0.values(F.n), F, k), F, k, k)
    return nc_merge([b0, fix], k)


def matrix_to_json(x) -> list:
    x = np.asarray(x, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in x]


def matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def nc_block_to_dict(b) -> dict:
    if isinstance(b, NCSigma1Block):
        return {"kind": "sigma1", "values": matrix_to_json(b.values)}
    return {"kind": "cancel", "level": b.level,
            "terms": [{"coefficient": c, "level": s.level,
                       "projection": matrix_to_json(s.projection),
                       "values": matrix_to_json(s.values)} for c, s in b.terms]}


def nc_block_from_dict(d: dict):
    if d["kind"] == "sigma1":
        return NCSigma1Block(matrix_from_json(d["values"]))
    return NCCancelBlock(d["level"], tuple(t["coefficient"] for t in d["terms"]),
                         tuple(NCSubatom(d["level"], t["level"],
                                         matrix_from_json(t["projection"]),
                                         matrix_from_json(t["values"]))
                               for t in d["terms"]))
