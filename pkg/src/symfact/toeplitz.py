"""Closed-form rank-2 bordered factorization and the Hermitian Toeplitz factorization.

A Hermitian matrix that is nonzero only on one row/column (with a zero at the
crossing) has eigenvalues +lambda and -lambda with explicit eigenvectors; a
Hermitian Toeplitz matrix is a shifted-and-added stack of one such cross plus
a scaled identity for the diagonal.
"""

from dataclasses import dataclass

import numpy as np

from .core import ShiftDown, ToeplitzGen
from .errors import DimensionError, PreconditionError
from .factors import Concat, FactorPair, ScaledIdentity, ShiftExpand


@dataclass(frozen=True, eq=False)
class BorderedCross:
    """Hermitian matrix supported on row j and column j, zero at (j, j).

    Row j holds ``t``; column j holds the conjugates. ``j`` is 0-based.
    """

    n: int
    j: int
    t: np.ndarray

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.t)).copy()
        if t.shape != (self.n,):
            raise DimensionError(f"border length {t.shape} != n {self.n}")
        if not 0 <= self.j < self.n:
            raise DimensionError(f"border index {self.j} out of range")
        if t[self.j] != 0:
            raise PreconditionError("crossing entry t[j] must be zero")
        t.setflags(write=False)
        object.__setattr__(self, "t", t)

    def materialize(self):
        M = np.zeros((self.n, self.n), dtype=complex)
        M[self.j, :] = self.t
        M[:, self.j] = np.conj(self.t)
        M[self.j, self.j] = 0
        return M


def _rank2_raw(n, j, t):
    # t must be owned by the caller with t[j] == 0; no defensive copies
    lam = float(np.linalg.norm(t))
    if lam == 0.0:
        z = np.zeros(n, dtype=complex)
        return z, z.copy()
    v1 = np.conj(t)
    if not np.iscomplexobj(v1):
        v1 = v1.astype(complex)
    v1 *= np.sqrt(lam) / (np.sqrt(2.0) * lam)
    v2 = -v1
    border = np.sqrt(lam / 2.0)
    v1[j] = border
    v2[j] = border
    # frozen so factor nodes can adopt them without copying
    v1.setflags(write=False)
    v2.setflags(write=False)
    return v1, v2


def rank2_factor(cross):
    """(v1, v2) with cross = v1 v1* - v2 v2*, border components real positive.

    lambda = ||t||_2; the scaled eigenvectors are sqrt(lambda) times the unit
    eigenvectors for +/- lambda. A zero border yields two zero vectors.
    """
    return _rank2_raw(cross.n, cross.j, cross.t.copy())


def hermitian_toeplitz_factor(t):
    """Factor a Hermitian Toeplitz matrix as B B* - C C* with Õ(n) structure.

    The zero-diagonal part T~ satisfies T~ - Delta T~ Delta^T = bordered cross
    at index 0 with row (0, t_2, ..., t_n); its rank-2 factors are expanded by
    shifts, and sqrt(|t_1|) I carries the diagonal on the B side when t_1 >= 0,
    on the C side otherwise.
    """
    if not isinstance(t, ToeplitzGen):
        t = ToeplitzGen(len(np.atleast_1d(t)), np.atleast_1d(t))
    n = t.order
    g = np.asarray(t.gen, dtype=complex)
    border = g.copy()
    border[0] = 0.0
    v1, v2 = rank2_factor(BorderedCross(n, 0, border))

    b_children = []
    c_children = []
    if np.any(v1 != 0):
        b_children.append(ShiftExpand(v1, ShiftDown(n), n))
        c_children.append(ShiftExpand(v2, ShiftDown(n), n))
    t1 = float(np.real(g[0]))
    if t1 != 0.0:
        ident = ScaledIdentity(np.sqrt(abs(t1)), n)
        (b_children if t1 > 0 else c_children).append(ident)
    B = Concat(tuple(b_children), nrows_hint=n)
    C = Concat(tuple(c_children), nrows_hint=n)
    return FactorPair(B, C, source_order=n, provenance="hermitian_toeplitz_factor")
