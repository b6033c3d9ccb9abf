"""Independent dense oracles used across the test suite.

Everything here is built by explicit index arithmetic or scipy reference
constructors, deliberately not sharing code paths with the package.
"""

import numpy as np
import scipy.linalg


def dense_hankel(gen):
    gen = np.asarray(gen)
    n = (gen.size + 1) // 2
    return scipy.linalg.hankel(gen[:n], gen[n - 1:])


def dense_hermitian_toeplitz(gen):
    gen = np.asarray(gen)
    return scipy.linalg.toeplitz(np.conj(gen), gen)


def J(n):
    return np.eye(n)[::-1]


def D(n):
    return np.diag(np.ones(n - 1), -1)


def S(n):
    return 0.5 * (1 + 1j) * np.eye(n) + 0.5 * (1 - 1j) * J(n)


def block_diag_S(n, t):
    return scipy.linalg.block_diag(*([S(n >> (t - 1))] * (1 << (t - 1))))


def E_mat(t, n):
    M = np.eye(n)
    M[: 2 ** (t - 1)] = 0
    return M


def F_mat(t, n):
    ch = 2 ** (t - 1)
    M = np.zeros((n, n))
    for c in range(0, n, 2 * ch):
        M[c: c + ch, c + ch: c + 2 * ch] = np.eye(ch)
        M[c + ch: c + 2 * ch, c: c + ch] = np.eye(ch)
    return M


def fold_levels(H, k):
    """Dense recursion: lists of N_t (t = 1..k) and the final residual."""
    cur = np.asarray(H, dtype=float)
    n = cur.shape[0]
    layers = []
    for t in range(1, k + 1):
        St = block_diag_S(n, t)
        A = St @ cur @ St.conj().T
        layers.append(1j * A.imag)
        cur = A.real
    return layers, cur


def random_hankel_gen(rng, n):
    return rng.standard_normal(2 * n - 1)


def random_hermitian_toeplitz_gen(rng, n):
    g = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    g[0] = rng.standard_normal()
    return g


def random_well_conditioned_hankel(rng, n, cond_cap=1e6):
    """Random real Hankel generator whose matrix has condition <= cond_cap."""
    for _ in range(200):
        g = rng.standard_normal(2 * n - 1)
        if np.linalg.cond(dense_hankel(g)) <= cond_cap:
            return g
    raise AssertionError("could not draw a well-conditioned Hankel matrix")


def moment_hankel_gen(rng, n, n_nodes=None):
    """Positive definite Hankel generator from a random discrete measure."""
    m = n_nodes or 2 * n
    nodes = np.cos(np.pi * (np.arange(m) + 0.5) / m) * rng.uniform(0.95, 1.0)
    weights = rng.uniform(0.5, 1.5, m)
    d = np.arange(2 * n - 1)
    return np.sum(weights[:, None] * nodes[:, None] ** d[None, :], axis=0)


def planted_low_displacement(rng, n, r):
    """Random symmetric matrix with Sylvester displacement rank <= r.

    A sum of r/2 random Hankel matrices (each contributes rank two with
    respect to both shift pairings).
    """
    assert r % 2 == 0
    M = np.zeros((n, n))
    for _ in range(r // 2):
        M += dense_hankel(rng.standard_normal(2 * n - 1))
    return M


def planted_cross(rng, n, j=None, real=False):
    """Random Hermitian bordered cross (row/column j, zero crossing)."""
    j = int(rng.integers(0, n)) if j is None else j
    t = rng.standard_normal(n)
    if not real:
        t = t + 1j * rng.standard_normal(n)
    t[j] = 0
    M = np.zeros((n, n), dtype=complex)
    M[j, :] = t
    M[:, j] = np.conj(t)
    M[j, j] = 0
    return j, t, M


def rel_fro(A, B):
    denom = np.linalg.norm(B)
    return np.linalg.norm(A - B) / (denom if denom > 0 else 1.0)
