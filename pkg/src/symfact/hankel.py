"""Recursive near-linear symmetric factorization of real Hankel matrices.

The recursion conjugates by block-diagonal fold matrices: each level splits
off a Hermitian Toeplitz layer (factored by a bordered cross plus shifts) and
halves the Hankel block size. Everything is tracked through first-block-row
generators, so a full factorization touches O(n log n) scalars.
"""

from dataclasses import dataclass

import numpy as np

from .core import (BlockShift, BlockShiftUp, HankelGen, MaskE, ShiftDown,
                   SwapF, ToeplitzGen, pad_to_power_of_two)
from .errors import PreconditionError
from .factors import (BaseVector, Concat, FactorPair, PermutedCopy,
                      ScaledIdentity, ShiftExpand, UnitaryPrefix)
from .toeplitz import _rank2_raw


@dataclass(frozen=True, eq=False)
class HLevelState:
    """First-block-row generators of the level-t real Hankel-block matrix.

    ``gens`` has shape (2^t, 2q - 1) with q the block order; the rest of the
    matrix is determined by the centrosymmetric pairing of block rows.
    """

    level: int
    block_order: int
    gens: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gens, dtype=float)
        if g.shape != (1 << self.level, 2 * self.block_order - 1):
            raise PreconditionError(f"bad H-state shape {g.shape}")
        object.__setattr__(self, "gens", g)

    def block(self, i):
        return HankelGen(self.block_order, self.gens[i])

    @property
    def order(self):
        return self.block_order << self.level


@dataclass(frozen=True, eq=False)
class NLevelState:
    """First-block-row generators of the level-t Hermitian Toeplitz layer.

    2^(t-1) blocks of order q = 2^(k-t+1); the leading block has zero diagonal
    and every even-indexed block vanishes.
    """

    level: int
    block_order: int
    gens: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gens, dtype=complex)
        if g.shape != (1 << (self.level - 1), self.block_order):
            raise PreconditionError(f"bad N-state shape {g.shape}")
        object.__setattr__(self, "gens", g)

    def block(self, i):
        return ToeplitzGen(self.block_order, self.gens[i])

    @property
    def order(self):
        return self.block_order << (self.level - 1)


def initial_state(h):
    """Level-0 state of a (power-of-two order, real) Hankel generator."""
    if h.order & (h.order - 1):
        raise PreconditionError("initial state needs a power-of-two order")
    if not h.is_real:
        raise PreconditionError("the recursion applies to real Hankel matrices")
    return HLevelState(0, h.order, np.real(h.gen)[None, :])


def split_level(state):
    """One fold: the level-(t-1) H-state yields the level-t (N, H) states.

    Per parent block generator g of order q: the Toeplitz layer block is
    (i/2)(g[q-1-j] - g[q-1+j]) and the centrosymmetric Hankel remainder
    (g + reversed g)/2 contributes its top-left and top-right half-order
    sub-generators as two consecutive blocks of the next H-state.
    """
    q = state.block_order
    if q < 2:
        raise PreconditionError("cannot split order-1 blocks")
    G = state.gens
    nb = G.shape[0]
    toe = 0.5j * (G[:, q - 1:: -1] - G[:, q - 1:])
    real_g = 0.5 * (G + G[:, ::-1])
    half = q // 2
    children = np.stack([real_g[:, : q - 1], real_g[:, half: half + q - 1]],
                        axis=1).reshape(2 * nb, q - 1)
    n_state = NLevelState(state.level + 1, q, toe)
    h_state = HLevelState(state.level + 1, half, children)
    return n_state, h_state


def _doubling(X, Y, t, k, n):
    """Extend cross factors over the first block row/column to the full layer.

    Step s appends permuted copies covering block rows/columns up to 2^(s-1).
    At s = 2 the paired block enters negated (J Q J = -Q for the purely
    imaginary Hermitian blocks), which swaps the roles of X and Y in the
    appended copies; deeper steps are plain permutations.
    """
    for s in range(2, t + 1):
        tau = k - t + s
        ops = (MaskE(n, tau), SwapF(n, tau))
        if s == 2:
            X, Y = (Concat((X, PermutedCopy(Y, ops))),
                    Concat((Y, PermutedCopy(X, ops))))
        else:
            X = Concat((X, PermutedCopy(X, ops)))
            Y = Concat((Y, PermutedCopy(Y, ops)))
    return X, Y


def factor_nt(nstate, k):
    """(X, Y) with the dense level-t layer equal to X X* - Y Y*."""
    t = nstate.level
    q = nstate.block_order
    gens = nstate.gens
    nb = gens.shape[0]
    n = q * nb

    if t == 1:
        border = gens[0].copy()
        border[0] = 0.0
        v1, v2 = _rank2_raw(n, 0, border)
        if not np.any(v1):
            return Concat((), nrows_hint=n), Concat((), nrows_hint=n)
        return (Concat((ShiftExpand(v1, ShiftDown(n), n),)),
                Concat((ShiftExpand(v2, ShiftDown(n), n),)))

    # borders of the upper/lower triangular split of the first block row/column
    upper = gens.copy()
    upper[0] *= 0.5
    upper[0, 0] = 0.0
    lower = np.zeros_like(gens)
    lower[:, : q - 1] = np.conj(gens[:, 1:])[:, ::-1]
    lower[0] *= 0.5
    v1, v2 = _rank2_raw(n, 0, upper.ravel())
    w1, w2 = _rank2_raw(n, q - 1, lower.ravel())

    down, up = BlockShift(n, q), BlockShiftUp(n, q)
    x_children, y_children = [], []
    if np.any(v1):
        x_children.append(ShiftExpand(v1, down, q))
        y_children.append(ShiftExpand(v2, down, q))
    if np.any(w1):
        x_children.append(ShiftExpand(w1, up, q))
        y_children.append(ShiftExpand(w2, up, q))
    X = Concat(tuple(x_children), nrows_hint=n)
    Y = Concat(tuple(y_children), nrows_hint=n)
    return _doubling(X, Y, t, k, n)


def factor_final(state):
    """(X, Y) for the depth-k residual, whose blocks are single entries.

    Its diagonal is constant; the off-diagonal part doubles up from the rank-2
    cross on the first row/column, and sqrt(|diagonal|) I joins X or Y by sign.
    """
    if state.block_order != 1:
        raise PreconditionError("final stage expects order-1 blocks")
    first_row = state.gens[:, 0].astype(complex)
    n = first_row.shape[0]
    k = state.level
    d = float(np.real(first_row[0]))
    border = first_row.copy()
    border[0] = 0.0
    v1, v2 = _rank2_raw(n, 0, border)
    if np.any(v1):
        X, Y = Concat((BaseVector(v1),)), Concat((BaseVector(v2),))
    else:
        X, Y = Concat((), nrows_hint=n), Concat((), nrows_hint=n)
    for t in range(1, k + 1):
        ops = (MaskE(n, t), SwapF(n, t))
        X = Concat((X, PermutedCopy(X, ops)))
        Y = Concat((Y, PermutedCopy(Y, ops)))
    if d != 0.0:
        ident = ScaledIdentity(np.sqrt(abs(d)), n)
        if d > 0:
            X = Concat((X, ident))
        else:
            Y = Concat((Y, ident))
    return X, Y


def hankel_factor(h, collect_levels=False):
    """Factor a real Hankel matrix as B B* - C C* in near-linear time.

    Pads to a power-of-two order, folds k = log2(n) times, factors each
    Toeplitz layer and the final residual, and wraps every layer in the
    accumulated unitary prefix. The result reconstructs the original matrix
    on its leading source_order block.
    """
    if not isinstance(h, HankelGen):
        g = np.atleast_1d(np.asarray(h))
        h = HankelGen((len(g) + 1) // 2, g)
    if not h.is_real:
        raise PreconditionError("hankel_factor requires a real generator")
    n0 = h.order
    hp = pad_to_power_of_two(HankelGen(n0, np.real(h.gen)))
    n = hp.order
    k = n.bit_length() - 1

    state = initial_state(hp)
    n_states = []
    for _ in range(k):
        nst, state = split_level(state)
        n_states.append(nst)

    b_parts, c_parts = [], []
    for nst in n_states:
        X, Y = factor_nt(nst, k)
        b_parts.append(UnitaryPrefix(X, nst.level))
        c_parts.append(UnitaryPrefix(Y, nst.level))
    Xf, Yf = factor_final(state)
    b_parts.append(UnitaryPrefix(Xf, k))
    c_parts.append(UnitaryPrefix(Yf, k))

    B = Concat(tuple(reversed(b_parts)))
    C = Concat(tuple(reversed(c_parts)))
    pair = FactorPair(B, C, source_order=n0, provenance="hankel_factor")
    pair.stats = {"padded_order": n, "levels": k,
                  "ncols_B": B.ncols, "ncols_C": C.ncols}
    if collect_levels:
        pair.stats["level_states"] = n_states + [state]
    return pair
