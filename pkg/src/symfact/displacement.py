"""Symmetric factorization of matrices with small Sylvester displacement rank.

Covers Hankel inverses. The fold recursion is the same as for Hankel matrices
but the displacement rank of the blocks doubles per level, so it stops at
half depth; each layer's leading block is factored through a dense Hermitian
eigendecomposition of its Stein displacement, and the rest of the layer is
reached by the same masked-swap doubling. Dense, desk-scale arithmetic
throughout: the point here is structure, not asymptotics.
"""

import numpy as np

from .core import (BlockShift, HankelGen, MaskE, ShiftDown, SwapF,
                   hankel_materialize, numeric_rank)
from .errors import DimensionError, NumericError, PreconditionError
from .factors import (Concat, DenseBlock, FactorPair, PermutedCopy,
                      ScaledIdentity, ShiftExpand, UnitaryPrefix)

EIG_DROP_TOL = 1e-12


def _square_real(M, what="matrix"):
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"{what} must be square")
    if np.iscomplexobj(M):
        if np.abs(M.imag).max() > 0:
            raise PreconditionError(f"{what} must be real")
        M = M.real
    return M.astype(float)


def _shift_down(M):
    out = np.zeros_like(M)
    out[1:] = M[:-1]
    return out


def _shift_cols_right(M):
    out = np.zeros_like(M)
    out[:, 1:] = M[:, :-1]
    return out


def _shift_up(M):
    out = np.zeros_like(M)
    out[:-1] = M[1:]
    return out


def _shift_cols_left(M):
    out = np.zeros_like(M)
    out[:, :-1] = M[:, 1:]
    return out


def check_displacement(M, r, tol=1e-10):
    """Measure both Sylvester displacement ranks; True iff each is <= r."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError("square matrix required")
    down = _shift_down(M) - _shift_cols_right(M)   # Delta M - M Delta^T
    up = _shift_up(M) - _shift_cols_left(M)        # Delta^T M - M Delta
    ranks = (numeric_rank(down, tol), numeric_rank(up, tol))
    return max(ranks) <= r, ranks


def _fold_rows(M, b):
    n = M.shape[0]
    return M.reshape(n // b, b, -1)[:, ::-1].reshape(M.shape)


def fold_level(M, t):
    """One fold of the dense symmetric matrix at level t (blocks of n / 2^(t-1)).

    Returns (N_t, M_t): the purely imaginary Hermitian layer (as i * imag)
    and the real bisymmetric-blocks remainder.
    """
    M = np.asarray(M)
    n = M.shape[0]
    b = n >> (t - 1)
    if b < 2 or n % b:
        raise PreconditionError(f"level {t} incompatible with size {n}")
    A = 0.5 * (1 + 1j) * M + 0.5 * (1 - 1j) * _fold_rows(M, b)
    A = 0.5 * (1 - 1j) * A + 0.5 * (1 + 1j) * _fold_rows(A.T, b).T
    return 1j * A.imag, A.real


def _signed_columns(W, rng=None, perturb=False):
    """Eigendecompose a Hermitian matrix; columns scaled by sqrt|lambda|, split by sign."""
    if perturb:
        rng = np.random.default_rng(rng)
        scale = 1e-10 * np.linalg.norm(W, "fro")
        P = rng.standard_normal(W.shape) + 1j * rng.standard_normal(W.shape)
        W = W + scale * 0.5 * (P + P.conj().T)
    try:
        lam, V = np.linalg.eigh(W)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigendecomposition failed: {exc}") from exc
    top = np.abs(lam).max() if lam.size else 0.0
    keep = np.abs(lam) > EIG_DROP_TOL * top if top > 0 else np.zeros_like(lam, bool)
    pos = keep & (lam > 0)
    neg = keep & (lam < 0)
    D = V[:, pos] * np.sqrt(lam[pos])
    E = V[:, neg] * np.sqrt(-lam[neg])
    return D, E


def factor_displacement_block(Q1, rng=None, perturb=False):
    """Factor one Hermitian zero-diagonal block via its Stein displacement.

    W = Q1 - Delta Q1 Delta^T is Hermitian and low rank; its signed
    eigencolumns, expanded by shifts, reconstruct Q1 = sum_j Delta^j W Delta^T^j.
    Returns (D, E) factor nodes with Q1 = D D* - E E*.
    """
    Q1 = np.asarray(Q1)
    q = Q1.shape[0]
    if np.abs(np.diag(Q1)).max(initial=0.0) > 1e-10 * max(np.abs(Q1).max(initial=0.0), 1e-300):
        raise PreconditionError("block diagonal must be zero")
    W = Q1 - _shift_cols_right(_shift_down(Q1))
    Dc, Ec = _signed_columns(W, rng=rng, perturb=perturb)
    make = lambda cols: Concat(tuple(
        ShiftExpand(cols[:, j], ShiftDown(q), q) for j in range(cols.shape[1])),
        nrows_hint=q)
    return make(Dc), make(Ec)


def _doubling(X, Y, t, k, n):
    # identical sign bookkeeping to the Hankel layer doubling
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


def factor_nt_general(N, t, k, rng=None, perturb=False, stats=None):
    """(X, Y) for a dense level-t layer of the general recursion.

    The first block row/column cross is F1 F1* - G1 G1* with the leading
    block's signed eigencolumns plus identity-and-block stacks; the rest of
    the layer follows by masked-swap doubling.
    """
    N = np.asarray(N)
    n = N.shape[0]
    q = n >> (t - 1)
    nb = 1 << (t - 1)
    if stats is not None:
        stats["eig_count"] = stats.get("eig_count", 0) + 1
        W = N[:q, :q] - _shift_cols_right(_shift_down(N[:q, :q]))
        stats.setdefault("block_stein_ranks", []).append(numeric_rank(W))
    if t == 1:
        D, E = factor_displacement_block(N, rng=rng, perturb=perturb)
        return Concat((D,)), Concat((E,))

    Q1 = N[:q, :q]
    W = Q1 - _shift_cols_right(_shift_down(Q1))
    Dc, Ec = _signed_columns(W, rng=rng, perturb=perturb)

    def embedded(cols):
        out = []
        for j in range(cols.shape[1]):
            v = np.zeros(n, dtype=complex)
            v[:q] = cols[:, j]
            out.append(ShiftExpand(v, BlockShift(n, q), q))
        return out

    # stacked column groups: the identity block rides with the leading block,
    # the remaining blocks of the first block column sit below it
    VF = np.zeros((n, q), dtype=complex)
    VF[:q] = np.eye(q)
    VI = VF.copy()
    VQ = np.zeros((n, q), dtype=complex)
    for s in range(1, nb):
        Qs1 = N[s * q:(s + 1) * q, :q]      # block (s+1, 1) = Q_{s+1}*
        VF[s * q:(s + 1) * q] = Qs1
        VQ[s * q:(s + 1) * q] = Qs1
    X = Concat(tuple(embedded(Dc)) + (DenseBlock(VF),), nrows_hint=n)
    Y = Concat(tuple(embedded(Ec)) + (DenseBlock(VI), DenseBlock(VQ)),
               nrows_hint=n)
    return _doubling(X, Y, t, k, n)


def _pad_power_of_four(M):
    n = M.shape[0]
    m = 1
    while m < n:
        m *= 4
    if m == n:
        return M, n
    out = np.zeros((m, m), dtype=M.dtype)
    out[:n, :n] = M
    return out, m


def displacement_factor(M, r=2, tol=1e-10, rng=None, perturb=False):
    """Algorithm for symmetric matrices with small Sylvester displacement rank.

    Folds for half the depth, factors every layer, and finishes the residual
    with one dense eigendecomposition (or a scaled identity when the residual
    is one). Raises if the measured displacement rank exceeds ``r``.
    """
    M = _square_real(M)
    n0 = M.shape[0]
    if np.abs(M - M.T).max(initial=0.0) > 1e-10 * max(np.abs(M).max(initial=0.0), 1e-300):
        raise PreconditionError("input must be symmetric")
    M = 0.5 * (M + M.T)
    ok, ranks = check_displacement(M, r, tol)
    if not ok:
        raise PreconditionError(
            f"displacement rank check failed: measured {ranks}, claimed {r}")

    Mp, m = _pad_power_of_four(M)
    k = m.bit_length() - 1
    depth = k // 2
    stats = {"depth": depth, "padded_order": m, "eig_count": 0,
             "input_ranks": ranks, "block_stein_ranks": []}

    layers = []
    cur = Mp
    for t in range(1, depth + 1):
        N, cur = fold_level(cur, t)
        layers.append(N)

    b_parts, c_parts = [], []
    for t, N in enumerate(layers, start=1):
        X, Y = factor_nt_general(N, t, k, rng=rng, perturb=perturb, stats=stats)
        b_parts.append(UnitaryPrefix(X, t))
        c_parts.append(UnitaryPrefix(Y, t))

    # residual stage
    off = cur - np.diag(np.diag(cur))
    diag = np.diag(cur)
    if np.abs(off).max(initial=0.0) <= 1e-14 * max(np.abs(cur).max(initial=0.0), 1e-300) \
            and np.ptp(diag) <= 1e-14 * max(np.abs(diag).max(initial=0.0), 1e-300):
        c0 = float(diag.mean()) if diag.size else 0.0
        Xr = Concat((ScaledIdentity(np.sqrt(abs(c0)), m),) if c0 > 0 else (),
                    nrows_hint=m)
        Yr = Concat((ScaledIdentity(np.sqrt(abs(c0)), m),) if c0 < 0 else (),
                    nrows_hint=m)
    else:
        stats["eig_count"] += 1
        Dc, Ec = _signed_columns(cur, rng=rng, perturb=perturb)
        Xr = Concat((DenseBlock(Dc),) if Dc.shape[1] else (), nrows_hint=m)
        Yr = Concat((DenseBlock(Ec),) if Ec.shape[1] else (), nrows_hint=m)
    b_parts.append(UnitaryPrefix(Xr, depth))
    c_parts.append(UnitaryPrefix(Yr, depth))

    B = Concat(tuple(reversed(b_parts)))
    C = Concat(tuple(reversed(c_parts)))
    pair = FactorPair(B, C, source_order=n0, provenance="displacement_factor")
    pair.stats = stats
    return pair


def hankel_inverse_factor(h, cond_cap=1e12, tol=1e-10, rng=None, perturb=False):
    """Factor the inverse of a Hankel matrix as B B* - C C*.

    Desk-scale stand-in: the inverse is formed densely, then factored with
    claimed displacement rank 2. Rejects singular or too ill-conditioned
    inputs with the measured condition estimate.
    """
    if not isinstance(h, HankelGen):
        g = np.atleast_1d(np.asarray(h))
        h = HankelGen((len(g) + 1) // 2, g)
    H = hankel_materialize(h)
    H = np.real(H) if not np.iscomplexobj(H) else H
    if np.iscomplexobj(H):
        raise PreconditionError("inverse factorization expects a real Hankel matrix")
    cond = float(np.linalg.cond(H))
    if not np.isfinite(cond) or cond > cond_cap:
        raise NumericError(f"Hankel matrix too ill-conditioned: cond estimate {cond:.3e}")
    Minv = np.linalg.inv(H)
    Minv = 0.5 * (Minv + Minv.T)  # the exact inverse is symmetric
    pair = displacement_factor(Minv, r=2, tol=tol, rng=rng, perturb=perturb)
    pair.provenance = "hankel_inverse_factor"
    pair.stats["cond"] = cond
    return pair
