import numpy as np
import pytest

import symfact as sf
from symfact.errors import NumericError, PreconditionError

from util import (block_diag_S, dense_hankel, moment_hankel_gen,
                  planted_cross, planted_low_displacement,
                  random_hankel_gen, random_hermitian_toeplitz_gen,
                  random_well_conditioned_hankel, rel_fro)

rng = np.random.default_rng(2024)


class TestCheckDisplacement:
    def test_hankel_inverse_rank_two(self):
        n = 32
        g = random_well_conditioned_hankel(rng, n)
        Minv = np.linalg.inv(dense_hankel(g))
        ok, ranks = sf.check_displacement(Minv, 2)
        assert ok and max(ranks) <= 2

    def test_dense_symmetric_is_full(self):
        A = rng.standard_normal((32, 32))
        M = A + A.T
        ok, ranks = sf.check_displacement(M, 2)
        assert not ok and min(ranks) >= 31 - 1

    def test_hankel_itself(self):
        H = dense_hankel(random_hankel_gen(rng, 32))
        ok, _ = sf.check_displacement(H, 2)
        assert ok

    def test_planted_rank(self):
        for r in (2, 4):
            M = planted_low_displacement(rng, 24, r)
            ok, ranks = sf.check_displacement(M, r)
            assert ok, ranks


class TestFoldLevel:
    def test_consistency_with_key_identity(self):
        n = 16
        g = random_hankel_gen(rng, n)
        H = dense_hankel(g)
        N1, M1 = sf.fold_level(H, 1)
        _, imag_part = sf.key_identity_split(sf.HankelGen(n, g))
        assert np.abs(N1 - sf.toeplitz_materialize(imag_part)).max() <= 1e-12
        real_part, _ = sf.key_identity_split(sf.HankelGen(n, g))
        assert np.abs(M1 - sf.hankel_materialize(real_part)).max() <= 1e-12

    def test_bisymmetric_input_zero_imag(self):
        n = 8
        A = rng.standard_normal((n, n))
        M = A + A.T
        M = 0.5 * (M + M[::-1, ::-1])  # bisymmetric
        N1, _ = sf.fold_level(M, 1)
        assert np.abs(N1).max() <= 1e-14 * np.abs(M).max()

    def test_rank_law(self):
        # real part rank at most doubles; imag part Stein rank <= 2r + 2
        for n, r in ((16, 2), (16, 4), (64, 2), (64, 4)):
            M = planted_low_displacement(rng, n, r)
            N1, M1 = sf.fold_level(M, 1)
            _, ranks = sf.check_displacement(M1, 2 * r)
            assert max(ranks) <= 2 * r
            stein = sf.stein_displacement(N1, sf.ShiftDown(n), sf.ShiftUp(n))
            assert sf.numeric_rank(stein, 1e-10) <= 2 * r + 2
            scale = max(np.abs(N1).max(), 1e-300)
            assert np.abs(np.diag(N1)).max() <= 1e-12 * scale
            assert sf.is_bisymmetric(M1, tol=1e-10 * np.abs(M1).max())
            assert sf.is_persymmetric(N1.imag, tol=1e-10 * scale)
            assert sf.is_hermitian(N1, tol=1e-10 * scale)


class TestFactorDisplacementBlock:
    def test_zero_block(self):
        D, E = sf.factor_displacement_block(np.zeros((4, 4), dtype=complex))
        assert D.ncols == 0 and E.ncols == 0

    def test_matches_toeplitz_path(self):
        # Hermitian Toeplitz with zero diagonal: same target as the bordered route
        n = 16
        g = random_hermitian_toeplitz_gen(rng, n)
        g[0] = 0.0
        from util import dense_hermitian_toeplitz
        Q = dense_hermitian_toeplitz(g)
        D, E = sf.factor_displacement_block(Q)
        Dm, Em = D.materialize(), E.materialize()
        rec = Dm @ Dm.conj().T - Em @ Em.conj().T
        assert rel_fro(rec, Q) <= 1e-10
        pair = sf.hermitian_toeplitz_factor(sf.ToeplitzGen(n, g))
        assert rel_fro(pair.reconstruct(), Q) <= 1e-10

    def test_planted_rank_six(self):
        q = 32
        W = np.zeros((q, q), dtype=complex)
        for _ in range(3):
            _, _, M = planted_cross(rng, q)
            W += M
        Q = np.zeros_like(W)
        shifted = W.copy()
        for _ in range(q):
            Q += shifted
            shifted = np.roll(np.roll(shifted, 1, axis=0), 1, axis=1)
            shifted[0, :] = 0
            shifted[:, 0] = 0
        stein = sf.stein_displacement(Q, sf.ShiftDown(q), sf.ShiftUp(q))
        assert sf.numeric_rank(stein) <= 6
        D, E = sf.factor_displacement_block(Q)
        Dm, Em = D.materialize(), E.materialize()
        rec = Dm @ Dm.conj().T - Em @ Em.conj().T
        assert rel_fro(rec, Q) <= 1e-9

    def test_rejects_nonzero_diagonal(self):
        with pytest.raises(PreconditionError):
            sf.factor_displacement_block(np.eye(4, dtype=complex))


class TestFactorNtGeneral:
    @staticmethod
    def _layers(M, depth):
        layers = []
        cur = M
        for t in range(1, depth + 1):
            N, cur = sf.fold_level(cur, t)
            layers.append(N)
        return layers, cur

    def test_single_block_level(self):
        n = 16
        g = moment_hankel_gen(rng, n)
        M = np.linalg.inv(dense_hankel(g))
        M = 0.5 * (M + M.T)  # the exact inverse is symmetric
        layers, _ = self._layers(M, 2)
        X, Y = sf.factor_nt_general(layers[0], 1, 4)
        Xm, Ym = X.materialize(), Y.materialize()
        rec = Xm @ Xm.conj().T - Ym @ Ym.conj().T
        assert rel_fro(rec, layers[0]) <= 1e-9
        D, E = sf.factor_displacement_block(layers[0])
        Dm, Em = D.materialize(), E.materialize()
        assert np.abs((Dm @ Dm.conj().T - Em @ Em.conj().T) - rec).max() <= 1e-9

    def test_two_level_inverse(self):
        n = 16
        g = moment_hankel_gen(rng, n)
        M = np.linalg.inv(dense_hankel(g))
        M = 0.5 * (M + M.T)
        layers, _ = self._layers(M, 2)
        for t, layer in enumerate(layers, start=1):
            X, Y = sf.factor_nt_general(layer, t, 4)
            Xm, Ym = X.materialize(), Y.materialize()
            rec = Xm @ Xm.conj().T - Ym @ Ym.conj().T
            assert np.linalg.norm(rec - layer) <= 1e-8 * np.linalg.norm(layer)

    def test_off_diagonal_cancellation(self):
        # blocks (i, j) with i, j >= 2 of F1 F1* - G1 G1* are zero: the
        # stacked Q-block columns cancel between the two Gram terms
        n = 16
        g = random_well_conditioned_hankel(rng, n)
        M = np.linalg.inv(dense_hankel(g))
        M = 0.5 * (M + M.T)
        layers, _ = self._layers(M, 2)
        N = layers[1]
        q = n >> 1
        Q1 = N[:q, :q]
        W = Q1 - np.pad(Q1[:-1, :-1], ((1, 0), (1, 0)))
        lam, V = np.linalg.eigh(W)
        keep = np.abs(lam) > 1e-12 * np.abs(lam).max()
        Dc = V[:, keep & (lam > 0)] * np.sqrt(lam[keep & (lam > 0)])
        Ec = V[:, keep & (lam < 0)] * np.sqrt(-lam[keep & (lam < 0)])

        def expand(cols):
            out = []
            for c in range(cols.shape[1]):
                v = cols[:, c].copy()
                for _ in range(q):
                    out.append(np.concatenate([v, np.zeros(n - q)]))
                    v = np.concatenate([[0], v[:-1]])
            return np.stack(out, axis=1) if out else np.zeros((n, 0))

        VF = np.zeros((n, q), dtype=complex)
        VF[:q] = np.eye(q)
        VI = VF.copy()
        VQ = np.zeros((n, q), dtype=complex)
        VF[q:] = N[q:, :q]
        VQ[q:] = N[q:, :q]
        F1 = np.concatenate([expand(Dc), VF], axis=1)
        G1 = np.concatenate([expand(Ec), VI, VQ], axis=1)
        diff = F1 @ F1.conj().T - G1 @ G1.conj().T
        scale = max(np.abs(N).max(), 1e-300)
        assert np.abs(diff[q:, q:]).max() <= 1e-12 * scale
        Z = np.zeros_like(N)
        Z[:q, :] = N[:q, :]
        Z[:, :q] = N[:, :q]
        assert np.abs(diff - Z).max() <= 1e-10 * scale

    def test_even_blocks_not_assumed_zero(self):
        # general layers have nonzero even-indexed blocks, unlike the Hankel case
        n = 16
        g = random_well_conditioned_hankel(rng, n)
        M = np.linalg.inv(dense_hankel(g))
        layers, _ = self._layers(M, 2)
        N = layers[1]
        q = n >> 1
        assert np.abs(N[:q, q:]).max() > 1e-8 * np.abs(N).max()


class TestDisplacementFactor:
    def test_inverse_hankel_16(self):
        g = random_well_conditioned_hankel(rng, 16)
        M = np.linalg.inv(dense_hankel(g))
        pair = sf.displacement_factor(M, r=2)
        assert rel_fro(pair.reconstruct(), M) <= 1e-7
        assert pair.stats["depth"] == 2

    def test_hankel_input_consistency(self):
        g = random_hankel_gen(rng, 16)
        H = dense_hankel(g)
        pair = sf.displacement_factor(H, r=2)
        assert rel_fro(pair.reconstruct(), H) <= 1e-8
        hpair = sf.hankel_factor(sf.HankelGen(16, g))
        assert rel_fro(hpair.reconstruct(), H) <= 1e-8

    def test_identity_residual_shortcut(self):
        # I has full Sylvester displacement rank (Delta - Delta^T), so the
        # honest claimed bound is n; every fold layer vanishes and the
        # residual collapses to a scaled identity
        pair = sf.displacement_factor(np.eye(16), r=16)
        assert rel_fro(pair.reconstruct(), np.eye(16)) <= 1e-12
        assert pair.stats["eig_count"] == pair.stats["depth"]

    def test_rejects_high_rank(self):
        A = rng.standard_normal((16, 16))
        M = A + A.T
        with pytest.raises(PreconditionError) as err:
            sf.displacement_factor(M, r=2)
        assert "measured" in str(err.value)

    def test_padding_to_power_of_four(self):
        # n = 8 pads to 16; reconstruction restricted to the leading block
        g = random_hankel_gen(rng, 8)
        H = dense_hankel(g)
        pair = sf.displacement_factor(H, r=2)
        assert pair.stats["padded_order"] == 16
        assert pair.source_order == 8
        assert rel_fro(pair.reconstruct(), H) <= 1e-8
        # padded zero-extension adds at most two to the displacement rank
        Mp = np.zeros((16, 16))
        Mp[:8, :8] = H
        ok, ranks = sf.check_displacement(Mp, 4)
        assert ok, ranks

    def test_depth_and_eig_counters(self):
        for n, depth in ((16, 2), (64, 3)):
            g = random_well_conditioned_hankel(rng, n)
            M = np.linalg.inv(dense_hankel(g))
            pair = sf.displacement_factor(M, r=2)
            assert pair.stats["depth"] == depth
            assert pair.stats["eig_count"] == depth + 1
            bounds = [2 ** (t + 1) + 2 for t in range(1, depth + 1)]
            assert all(rk <= b for rk, b in zip(pair.stats["block_stein_ranks"],
                                                bounds))


class TestHankelInverseFactor:
    def test_hilbert_like_positive_definite(self):
        # small positive definite moment matrix; kappa-scaled tolerance
        n = 8
        g = moment_hankel_gen(rng, n)
        H = dense_hankel(g)
        kappa = np.linalg.cond(H)
        pair = sf.hankel_inverse_factor(sf.HankelGen(n, g))
        Minv = np.linalg.inv(H)
        assert rel_fro(pair.reconstruct(), Minv) <= kappa * 1e-12

    def test_identity_hankel(self):
        g = np.zeros(2 * 4 - 1)
        g[0] = 1.0  # only (1,1) nonzero: singular, so perturb to invertible
        g = random_well_conditioned_hankel(rng, 4)
        pair = sf.hankel_inverse_factor(sf.HankelGen(4, g))
        H = dense_hankel(g)
        assert rel_fro(pair.reconstruct(), np.linalg.inv(H)) <= 1e-8

    def test_solve_consistency(self):
        n = 32
        g = random_well_conditioned_hankel(rng, n)
        h = sf.HankelGen(n, g)
        pair = sf.hankel_inverse_factor(h)
        kappa = pair.stats["cond"]
        x = rng.standard_normal(n)
        back = pair.apply_gram(sf.hankel_matvec(h, x).real)
        assert np.linalg.norm(back - x) <= kappa * 1e-10 * np.linalg.norm(x)

    def test_rejects_ill_conditioned(self):
        g = np.zeros(2 * 8 - 1)  # the zero matrix is as singular as it gets
        with pytest.raises(NumericError):
            sf.hankel_inverse_factor(sf.HankelGen(8, g))
