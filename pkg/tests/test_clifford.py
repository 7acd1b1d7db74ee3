import itertools

import numpy as np
import pytest

from wodzicki.algebra import DeformationMatrix, TorusElement
from wodzicki.clifford import CliffordValue, block2x2, gamma_basis
from wodzicki.sampling import irrational_theta, random_element

RNG = np.random.default_rng(7)


@pytest.mark.parametrize("n", [2, 4])
def test_gamma_anticommutation_and_traces(n):
    rep = gamma_basis(n)
    d = 2 ** rep.q
    for a, b in itertools.product(range(n), repeat=2):
        anti = rep.matrices[a] @ rep.matrices[b] + rep.matrices[b] @ rep.matrices[a]
        assert np.allclose(anti, 2.0 * (a == b) * np.eye(d))
    for a in range(n):
        assert abs(np.trace(rep.matrices[a])) == 0.0
        assert np.allclose(rep.matrices[a], rep.matrices[a].conj().T)
    assert np.trace(np.eye(d)) == d


def test_unsupported_dimension():
    with pytest.raises(ValueError):
        gamma_basis(3)


@pytest.mark.parametrize("n", [2, 4])
def test_pairwise_gamma_trace_identity(n):
    rep = gamma_basis(n)
    defm = DeformationMatrix.commutative(n)
    d = 2 ** rep.q
    for a, b in itertools.product(range(n), repeat=2):
        value = (rep.gamma(defm, a) @ rep.gamma(defm, b)).matrix_trace()
        expected = TorusElement.unit(defm) * (d if a == b else 0.0)
        assert (value - expected).norm_l1() < 1e-14


def test_four_gamma_trace_against_dense_oracle():
    n = 4
    rep = gamma_basis(n)
    defm = DeformationMatrix.commutative(n)
    d = 2 ** rep.q
    for idx in itertools.product(range(n), repeat=4):
        a, b, c, e = idx
        dense = np.trace(
            rep.matrices[a] @ rep.matrices[b] @ rep.matrices[c] @ rep.matrices[e]
        )
        kron = d * (
            (a == b) * (c == e) - (a == c) * (b == e) + (a == e) * (b == c)
        )
        assert abs(dense - kron) < 1e-12
        val = rep.gamma(defm, a) @ rep.gamma(defm, b) @ rep.gamma(defm, c) @ rep.gamma(defm, e)
        engine = val.matrix_trace()
        assert abs(engine.coefficient((0,) * n) - kron) < 1e-12


@pytest.mark.parametrize("n", [2, 4])
def test_odd_gamma_products_are_traceless(n):
    rep = gamma_basis(n)
    defm = DeformationMatrix.commutative(n)
    for length in (1, 3):
        for idx in itertools.product(range(n), repeat=length):
            val = rep.identity(defm)
            for a in idx:
                val = val @ rep.gamma(defm, a)
            assert val.matrix_trace().norm_l1() == 0.0


def _dense_matmul(A, B):
    d = len(A)
    defm = A[0][0].defm
    out = [[TorusElement.zero(defm) for _ in range(d)] for _ in range(d)]
    for i in range(d):
        for j in range(d):
            acc = TorusElement.zero(defm)
            for k in range(d):
                acc = acc + A[i][k] * B[k][j]
            out[i][j] = acc
    return out


def _random_clifford(defm, q, rng, strings=3):
    out = CliffordValue.zero(defm, q)
    for _ in range(strings):
        s = tuple(int(x) for x in rng.integers(0, 4, size=q))
        out = out + CliffordValue.from_string(defm, q, s, random_element(defm, rng))
    return out


@pytest.mark.parametrize("q", [1, 2])
def test_string_product_matches_dense_matrix_product(q):
    defm = irrational_theta(2)
    for _ in range(4):
        A = _random_clifford(defm, q, RNG)
        B = _random_clifford(defm, q, RNG)
        engine = (A @ B).to_dense()
        oracle = _dense_matmul(A.to_dense(), B.to_dense())
        for i in range(2**q):
            for j in range(2**q):
                assert (engine[i][j] - oracle[i][j]).norm_l1() < 1e-12


def test_matrix_trace_is_sum_of_diagonal():
    defm = irrational_theta(2)
    A = _random_clifford(defm, 2, RNG, strings=5)
    dense = A.to_dense()
    diag = dense[0][0]
    for i in range(1, 4):
        diag = diag + dense[i][i]
    assert (A.matrix_trace() - diag).norm_l1() < 1e-12


def test_star_matches_conjugate_transpose():
    defm = irrational_theta(2)
    A = _random_clifford(defm, 1, RNG)
    engine = A.star().to_dense()
    dense = A.to_dense()
    for i in range(2):
        for j in range(2):
            assert (engine[i][j] - dense[j][i].star()).norm_l1() < 1e-12


def test_block_assembly():
    defm = irrational_theta(2)
    blocks = [[_random_clifford(defm, 1, RNG) for _ in range(2)] for _ in range(2)]
    M = block2x2(blocks[0][0], blocks[0][1], blocks[1][0], blocks[1][1])
    dense = M.to_dense()
    for bi in range(2):
        for bj in range(2):
            sub = blocks[bi][bj].to_dense()
            for i in range(2):
                for j in range(2):
                    assert (dense[2 * bi + i][2 * bj + j] - sub[i][j]).norm_l1() < 1e-12


def test_constant_decomposition_roundtrip():
    defm = DeformationMatrix.commutative(2)
    M = RNG.normal(size=(4, 4)) + 1j * RNG.normal(size=(4, 4))
    val = CliffordValue.from_constant(defm, M)
    dense = val.to_dense()
    for i in range(4):
        for j in range(4):
            assert abs(dense[i][j].coefficient((0, 0)) - M[i, j]) < 1e-12
