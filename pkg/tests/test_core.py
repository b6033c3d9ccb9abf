import json

import numpy as np
import pytest

import symfact as sf
from symfact.errors import (DimensionError, ParseError, PreconditionError,
                            SizeCapError)

from util import (D, J, S, dense_hankel, dense_hermitian_toeplitz, E_mat,
                  F_mat, random_hankel_gen, random_hermitian_toeplitz_gen)

rng = np.random.default_rng(1234)


class TestMatvec:
    def test_hankel_small(self):
        h = sf.HankelGen(2, np.array([1.0, 2.0, 3.0]))
        assert np.allclose(sf.hankel_matvec(h, np.array([1.0, 1.0])), [3.0, 5.0])

    def test_hankel_zero(self):
        h = sf.HankelGen(2, np.zeros(3))
        assert np.allclose(sf.hankel_matvec(h, np.array([7.0, 9.0])), 0.0)

    def test_hankel_matches_dense(self):
        for n in (1, 2, 3, 7, 64):
            g = random_hankel_gen(rng, n)
            x = rng.standard_normal(n)
            want = dense_hankel(g) @ x
            got = sf.hankel_matvec(sf.HankelGen(n, g), x)
            assert np.abs(got - want).max() <= 1e-12 * max(np.abs(want).max(), 1)

    def test_toeplitz_identity_scale(self):
        t = sf.ToeplitzGen(2, np.array([2.0, 0.0]))
        assert np.allclose(sf.toeplitz_matvec(t, np.array([3.0, 4.0])), [6.0, 8.0])

    def test_toeplitz_imaginary(self):
        t = sf.ToeplitzGen(2, np.array([0, 1j]))
        got = sf.toeplitz_matvec(t, np.array([1.0, 0.0]))
        want = dense_hermitian_toeplitz(np.array([0, 1j])) @ np.array([1.0, 0.0])
        assert np.allclose(got, want) and np.allclose(got, [0, -1j])

    def test_toeplitz_matches_dense(self):
        for n in (1, 2, 5, 64):
            g = random_hermitian_toeplitz_gen(rng, n)
            x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            want = dense_hermitian_toeplitz(g) @ x
            got = sf.toeplitz_matvec(sf.ToeplitzGen(n, g), x)
            assert np.abs(got - want).max() <= 1e-12 * np.abs(want).max()

    def test_matvec_agreement_large(self):
        # relative error <= 1e-10 up to n = 1024
        for n in (256, 1024):
            g = random_hankel_gen(rng, n)
            x = rng.standard_normal(n)
            want = dense_hankel(g) @ x
            got = sf.hankel_matvec(sf.HankelGen(n, g), x)
            assert np.linalg.norm(got - want) <= 1e-10 * np.linalg.norm(want)
            tg = random_hermitian_toeplitz_gen(rng, n)
            wantt = dense_hermitian_toeplitz(tg) @ x
            gott = sf.toeplitz_matvec(sf.ToeplitzGen(n, tg), x)
            assert np.linalg.norm(gott - wantt) <= 1e-10 * np.linalg.norm(wantt)

    def test_dimension_mismatch(self):
        h = sf.HankelGen(2, np.ones(3))
        with pytest.raises(DimensionError):
            sf.hankel_matvec(h, np.ones(3))
        t = sf.ToeplitzGen(2, np.array([1.0, 0.0]))
        with pytest.raises(DimensionError):
            sf.toeplitz_matvec(t, np.ones(5))


class TestMaterialize:
    def test_hankel_four_by_four(self):
        h = sf.HankelGen(4, np.arange(1.0, 8.0))
        H = sf.hankel_materialize(h)
        want = np.array([[1, 2, 3, 4], [2, 3, 4, 5], [3, 4, 5, 6], [4, 5, 6, 7]],
                        dtype=float)
        assert np.array_equal(H, want)
        assert np.array_equal(H, H.T)

    def test_toeplitz_first_row_and_conjugates(self):
        g = np.array([1.0, 2 + 1j, 3 - 2j, 4j])
        T = sf.toeplitz_materialize(sf.ToeplitzGen(4, g))
        assert np.array_equal(T[0], g)
        assert T[1, 0] == np.conj(g[1])
        assert sf.is_hermitian(T, tol=0)

    def test_zero(self):
        assert np.array_equal(sf.hankel_materialize(sf.HankelGen(2, np.zeros(3))),
                              np.zeros((2, 2)))

    def test_cap(self):
        h = sf.HankelGen(5, np.ones(9))
        with pytest.raises(SizeCapError):
            sf.hankel_materialize(h, cap=4)


class TestStructuredOps:
    def test_exchange(self):
        out = sf.apply_structured(sf.Exchange(4), np.array([1.0, 2, 3, 4]))
        assert np.array_equal(out, [4, 3, 2, 1])

    def test_shift_down(self):
        out = sf.apply_structured(sf.ShiftDown(4), np.array([1.0, 2, 3, 4]))
        assert np.array_equal(out, [0, 1, 2, 3])

    def test_swap_f(self):
        out = sf.apply_structured(sf.SwapF(4, 1), np.array([1.0, 2, 3, 4]))
        assert np.array_equal(out, [2, 1, 4, 3])

    def test_mask_e(self):
        out = sf.apply_structured(sf.MaskE(8, 2), np.arange(8.0))
        assert np.array_equal(out, [0, 0, 2, 3, 4, 5, 6, 7])

    def test_ops_match_dense(self):
        n = 8
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        cases = [
            (sf.Exchange(n), J(n)),
            (sf.ShiftDown(n), D(n)),
            (sf.ShiftUp(n), D(n).T),
            (sf.FoldUnitary(n), S(n)),
            (sf.MaskE(n, 2), E_mat(2, n)),
            (sf.SwapF(n, 2), F_mat(2, n)),
            (sf.BlockShift(n, 4), np.kron(np.eye(2), D(4))),
            (sf.BlockShiftUp(n, 4), np.kron(np.eye(2), D(4).T)),
            (sf.BlockFoldUnitary(n, 2), np.kron(np.eye(2), S(4))),
        ]
        for op, M in cases:
            assert np.abs(sf.apply_structured(op, x) - M @ x).max() < 1e-14
            assert np.abs(sf.apply_structured(op, x, mode="transpose")
                          - M.T @ x).max() < 1e-14
            assert np.abs(sf.apply_structured(op, x, mode="adjoint")
                          - M.conj().T @ x).max() < 1e-14

    def test_fold_unitary(self):
        n = 16
        op = sf.FoldUnitary(n)
        for _ in range(5):
            x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            back = sf.apply_structured(op, sf.apply_structured(op, x),
                                       mode="adjoint")
            assert np.linalg.norm(back - x) <= 1e-12 * np.linalg.norm(x)

    def test_ef_product_zero_one(self):
        n = 16
        for t in (1, 2, 3):
            EF = E_mat(t, n) @ F_mat(t, n)
            got = sf.apply_structured(
                sf.MaskE(n, t),
                sf.apply_structured(sf.SwapF(n, t), np.eye(n)))
            assert np.array_equal(got, EF)
            P = EF @ EF.T
            assert set(np.unique(P)) <= {0.0, 1.0}

    def test_size_mismatch(self):
        with pytest.raises(DimensionError):
            sf.apply_structured(sf.Exchange(4), np.ones(5))
        with pytest.raises(PreconditionError):
            sf.BlockShift(8, 3)


class TestDisplacement:
    def test_hankel_rank_two(self):
        n = 8
        H = dense_hankel(random_hankel_gen(rng, n))
        disp = sf.sylvester_displacement(H, sf.ShiftDown(n), sf.ShiftUp(n))
        assert np.abs(disp - (D(n) @ H - H @ D(n).T)).max() < 1e-14
        assert sf.numeric_rank(disp, 1e-10) <= 2

    def test_toeplitz_stein_rank_two(self):
        n = 8
        T = dense_hermitian_toeplitz(random_hermitian_toeplitz_gen(rng, n))
        disp = sf.stein_displacement(T, sf.ShiftDown(n), sf.ShiftUp(n))
        assert np.abs(disp - (T - D(n) @ T @ D(n).T)).max() < 1e-14
        assert sf.numeric_rank(disp, 1e-10) == 2

    def test_identity_displacement_rank(self):
        n = 9
        disp = sf.sylvester_displacement(np.eye(n), sf.ShiftDown(n), sf.ShiftUp(n))
        want = np.linalg.matrix_rank(D(n) - D(n).T)
        assert sf.numeric_rank(disp, 1e-10) == want

    def test_random_hankel_rank_property(self):
        for n in (4, 32, 256):
            H = dense_hankel(random_hankel_gen(rng, n))
            disp = sf.sylvester_displacement(H, sf.ShiftDown(n), sf.ShiftUp(n))
            assert sf.numeric_rank(disp, 1e-10) <= 2


class TestKeyIdentity:
    def test_paper_worked_values(self):
        h = sf.HankelGen(4, np.array([1.0, 2, 3, 4, 5, 6, 8]))
        real_part, imag_part = sf.key_identity_split(h)
        assert np.allclose(sf.hankel_materialize(real_part)[0], [4.5, 4, 4, 4])
        # first row of imag(S H S*) is the generator divided by i
        assert np.allclose((imag_part.gen / 1j).real, [0, -1, -2, -3.5])

    def test_reversal_symmetric_gives_zero_imag(self):
        g = rng.standard_normal(2 * 8 - 1)
        g = g + g[::-1]
        _, imag_part = sf.key_identity_split(sf.HankelGen(8, g))
        assert np.abs(imag_part.gen).max() == 0

    def test_matches_dense_transform(self):
        for n in (2, 4, 16):
            g = random_hankel_gen(rng, n)
            H = dense_hankel(g)
            A = S(n) @ H @ S(n).conj().T
            real_part, imag_part = sf.key_identity_split(sf.HankelGen(n, g))
            assert np.abs(sf.hankel_materialize(real_part) - A.real).max() < 1e-12
            assert np.abs(sf.toeplitz_materialize(imag_part)
                          - 1j * A.imag).max() < 1e-12

    def test_reconstruction_identity(self):
        # H = S* (real + i imag) S at n <= 128
        for n in (16, 128):
            g = random_hankel_gen(rng, n)
            H = dense_hankel(g)
            real_part, imag_part = sf.key_identity_split(sf.HankelGen(n, g))
            R = sf.hankel_materialize(real_part)
            N = sf.toeplitz_materialize(imag_part)
            back = S(n).conj().T @ (R + N) @ S(n)
            assert np.linalg.norm(back - H) <= 1e-12 * np.linalg.norm(H)

    def test_structure_predicates(self):
        g = random_hankel_gen(rng, 16)
        real_part, imag_part = sf.key_identity_split(sf.HankelGen(16, g))
        R = sf.hankel_materialize(real_part)
        assert sf.is_bisymmetric(R)
        W = sf.toeplitz_materialize(imag_part) / 1j  # imag(S H S*) itself
        assert sf.is_skew_symmetric(W.real + 0.0)
        assert np.abs(np.diag(W)).max() == 0

    def test_rejects_complex(self):
        with pytest.raises(PreconditionError):
            sf.key_identity_split(sf.HankelGen(2, np.array([1j, 0, 0])))


class TestPadding:
    def test_pad_three(self):
        h = sf.pad_to_power_of_two(sf.HankelGen(3, np.array([1.0, 2, 3, 4, 5])))
        assert h.order == 4
        assert np.array_equal(h.gen, [1, 2, 3, 4, 5, 0, 0])

    def test_idempotent(self):
        h = sf.HankelGen(4, np.arange(7.0))
        assert sf.pad_to_power_of_two(h) is h

    def test_pad_five(self):
        h = sf.pad_to_power_of_two(sf.HankelGen(5, np.arange(1.0, 10.0)))
        assert h.order == 8 and h.gen.shape == (15,)
        assert np.array_equal(h.gen[:9], np.arange(1.0, 10.0))
        assert np.abs(h.gen[9:]).max() == 0

    def test_top_left_block_preserved(self):
        g = random_hankel_gen(rng, 5)
        padded = sf.pad_to_power_of_two(sf.HankelGen(5, g))
        Hp = sf.hankel_materialize(padded)
        assert np.array_equal(Hp[:5, :5], dense_hankel(g))


class TestPredicates:
    def test_exchange_matrix(self):
        Jm = J(5)
        assert sf.is_centrosymmetric(Jm) and sf.is_persymmetric(Jm)

    def test_persymmetric(self):
        n = 6
        T = dense_hermitian_toeplitz(random_hermitian_toeplitz_gen(rng, n))
        assert sf.is_persymmetric(T)

    def test_skew_and_hermitian(self):
        A = rng.standard_normal((5, 5))
        assert sf.is_skew_symmetric(A - A.T)
        C = A + 1j * rng.standard_normal((5, 5))
        assert sf.is_hermitian(C + C.conj().T)
        assert not sf.is_hermitian(C + C.conj().T + 1e-3 * 1j * np.eye(5))


class TestJsonEnvelopes:
    def test_generator_round_trip(self):
        g = random_hermitian_toeplitz_gen(rng, 5)
        doc = sf.generator_to_json(sf.ToeplitzGen(5, g))
        back = sf.generator_from_json(json.loads(json.dumps(doc)))
        assert isinstance(back, sf.ToeplitzGen)
        assert np.array_equal(back.gen, g)

    def test_dense_round_trip(self):
        M = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
        back = sf.dense_from_json(json.loads(json.dumps(sf.dense_to_json(M))))
        assert np.array_equal(back, M)

    def test_parse_errors_carry_location(self):
        with pytest.raises(ParseError) as err:
            sf.generator_from_json({"kind": "hankel", "order": 2, "gen": [[0, 0], "x"]})
        assert "gen[1]" in str(err.value)
        with pytest.raises(ParseError):
            sf.generator_from_json({"kind": "circulant", "order": 2, "gen": []})

    def test_nonfinite_rejected(self):
        with pytest.raises(PreconditionError):
            sf.HankelGen(2, np.array([1.0, np.nan, 0.0]))
