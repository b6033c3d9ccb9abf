"""Block-Krylov construction and the batch-apply recursions for K and K^T.

K = [G, A G, A^2 G, ..., A^(m-1) G] is never formed by the apply routines;
K B folds backwards through M_(j-1) = G B_(j-1) + A M_j, and K^T B stacks
G^T (A^T)^j B block rows. For symmetric A, K^T A K is block-Hankel.
"""

from dataclasses import dataclass

import numpy as np
from scipy import sparse as _sp

from .core import numeric_rank
from .errors import DimensionError, NumericError, PreconditionError

KRYLOV_CAP = 2048


class SparseMatrix:
    """Triplet-built sparse matrix that counts how often it is applied.

    Duplicate triplets are summed on load. ``stats`` holds the number of
    ``apply`` / ``apply_transpose`` calls; ``reset_stats()`` zeroes it.
    """

    def __init__(self, n_rows, n_cols, rows, cols, vals):
        rows = np.asarray(rows, dtype=int)
        cols = np.asarray(cols, dtype=int)
        vals = np.asarray(vals, dtype=float)
        if not (rows.shape == cols.shape == vals.shape):
            raise DimensionError("triplet arrays must share a shape")
        if rows.size and (rows.min() < 0 or rows.max() >= n_rows
                          or cols.min() < 0 or cols.max() >= n_cols):
            raise DimensionError("triplet indices out of range")
        self.shape = (int(n_rows), int(n_cols))
        self._csr = _sp.csr_array((vals, (rows, cols)), shape=self.shape)
        self._csr.sum_duplicates()
        self.stats = {"apply": 0, "apply_transpose": 0}

    @classmethod
    def from_dense(cls, M):
        M = np.atleast_2d(np.asarray(M, dtype=float))
        r, c = np.nonzero(M)
        return cls(M.shape[0], M.shape[1], r, c, M[r, c])

    @property
    def nnz(self):
        return int(self._csr.nnz)

    def to_dense(self):
        return self._csr.toarray()

    def reset_stats(self):
        self.stats = {"apply": 0, "apply_transpose": 0}

    def apply(self, X):
        X = np.asarray(X)
        if X.shape[0] != self.shape[1]:
            raise DimensionError(f"operand rows {X.shape[0]} != cols {self.shape[1]}")
        self.stats["apply"] += 1
        return self._csr @ X

    def apply_transpose(self, X):
        X = np.asarray(X)
        if X.shape[0] != self.shape[0]:
            raise DimensionError(f"operand rows {X.shape[0]} != rows {self.shape[0]}")
        self.stats["apply_transpose"] += 1
        return self._csr.T @ X

    def symmetry_residual(self):
        if self.shape[0] != self.shape[1]:
            return np.inf
        d = self._csr - self._csr.T
        return float(abs(d).max()) if d.nnz else 0.0


def random_sparse(n_rows, n_cols, nnz=None, seed=None):
    """Uniform random sparse matrix with about ``nnz`` nonzeros (seedable)."""
    rng = np.random.default_rng(seed)
    if nnz is None:
        nnz = 2 * max(n_rows, n_cols)
    nnz = min(int(nnz), n_rows * n_cols)
    flat = rng.choice(n_rows * n_cols, size=nnz, replace=False)
    rows, cols = np.divmod(flat, n_cols)
    vals = rng.uniform(-1.0, 1.0, size=nnz)
    return SparseMatrix(n_rows, n_cols, rows, cols, vals)


@dataclass(eq=False)
class KrylovSpec:
    """A (n x n), G (n x s), and the block count m with m s = n."""

    A: SparseMatrix
    G: SparseMatrix
    m: int

    def __post_init__(self):
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise DimensionError("A must be square")
        s = self.G.shape[1]
        if self.G.shape[0] != n:
            raise DimensionError("G must have n rows")
        if self.m * s != n:
            raise PreconditionError(f"m * s = {self.m * s} != n = {n}")
        self.n = n
        self.s = s


def build_krylov(spec, cap=KRYLOV_CAP):
    """Dense K = [G, A G, ..., A^(m-1) G] by repeated sparse multiplies."""
    if spec.n > cap:
        raise PreconditionError(f"n = {spec.n} exceeds desk-scale cap {cap}")
    blocks = [spec.G.to_dense()]
    for _ in range(spec.m - 1):
        blocks.append(spec.A.apply(blocks[-1]))
    return np.concatenate(blocks, axis=1)


def build_block_hankel(spec, cap=KRYLOV_CAP, tol=1e-10):
    """K^T A K for symmetric A; asserts constancy along block anti-diagonals."""
    res = spec.A.symmetry_residual()
    scale = max(abs(spec.A.to_dense()).max(initial=0.0), 1e-300)
    if res > tol * scale:
        raise PreconditionError(f"A is not symmetric: residual {res:.3e}")
    K = build_krylov(spec, cap)
    T = K.T @ spec.A.apply(K)
    s, m = spec.s, spec.m
    tscale = max(np.abs(T).max(initial=0.0), 1e-300)
    for d in range(1, 2 * m - 1):
        ref = None
        for i in range(max(0, d - m + 1), min(d, m - 1) + 1):
            blk = T[i * s:(i + 1) * s, (d - i) * s:(d - i + 1) * s]
            if ref is None:
                ref = blk
            elif np.abs(blk - ref).max() > tol * tscale:
                raise NumericError(
                    f"block anti-diagonal {d} not constant (A symmetric?)")
    return T


def apply_K(spec, Bmat):
    """K B without forming K: M_m = G B_m, M_(j-1) = G B_(j-1) + A M_j."""
    B = np.atleast_2d(np.asarray(Bmat, dtype=float))
    if B.shape[0] != spec.n:
        raise DimensionError(f"B has {B.shape[0]} rows, expected {spec.n}")
    s, m = spec.s, spec.m
    M = spec.G.apply(B[(m - 1) * s:])
    for j in range(m - 1, 0, -1):
        M = spec.G.apply(B[(j - 1) * s: j * s]) + spec.A.apply(M)
    return M


def apply_K_transpose(spec, Bmat):
    """K^T B: stack G^T (A^T)^j B as block rows."""
    B = np.atleast_2d(np.asarray(Bmat, dtype=float))
    if B.shape[0] != spec.n:
        raise DimensionError(f"B has {B.shape[0]} rows, expected {spec.n}")
    blocks = []
    cur = B
    for j in range(spec.m):
        blocks.append(spec.G.apply_transpose(cur))
        if j + 1 < spec.m:
            cur = spec.A.apply_transpose(cur)
    return np.concatenate(blocks, axis=0)


def block_shift_displacement_rank(T, s, tol=1e-10):
    """Sylvester displacement rank of T w.r.t. the block down-shift of size s."""
    T = np.asarray(T)
    n = T.shape[0]
    if n % s:
        raise DimensionError("block size must divide the matrix order")
    UT = np.zeros_like(T)
    UT[s:] = T[:-s]            # U T
    TU = np.zeros_like(T)
    TU[:, s:] = T[:, :-s]      # T U^T
    return numeric_rank(UT - TU, tol)
