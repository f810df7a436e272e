import math

import numpy as np
import pytest

from orthotucker.errors import DimensionError
from orthotucker.patterns import pattern_V, project
from orthotucker.spectral import (
    HADAMARD_TYPE,
    I2,
    P2,
    basis_census,
    basis_key,
    build_MQ,
    codim_table_check,
    diag222,
    expected_codim,
    four_bases,
    iQ,
    numerical_rank,
    odeco222_tuples,
    orthogonal_pairs,
    rank_MQ,
    reduced_MQ,
    same_basis_set,
    sp_tuple,
    svt_residual,
)
from orthotucker.synthetic import planted
from orthotucker.tensor_core import group_action, haar_orthogonal

E = np.eye(2)


def test_e_basis_is_singular_for_core_in_V():
    rng = np.random.default_rng(0)
    S = project(rng.standard_normal((2, 3, 4)), pattern_V((2, 3, 4)))
    for j in range(2):
        vecs = [np.eye(n)[j] for n in S.shape]
        lam, res = svt_residual(S, vecs)
        assert res == 0.0 and lam == S[j, j, j]


def test_residual_warns_and_normalises():
    with pytest.warns(UserWarning, match="normalised"):
        lam, res = svt_residual(diag222(2, 1), [2 * E[0], E[0], E[0]])
    assert lam == 2.0 and res == 0.0


def test_random_tuple_is_not_singular():
    rng = np.random.default_rng(1)
    T = rng.standard_normal((3, 3, 3))
    vecs = [v / np.linalg.norm(v) for v in rng.standard_normal((3, 3))]
    assert svt_residual(T, vecs)[1] > 0.01


def test_residual_is_equivariant():
    rng = np.random.default_rng(2)
    S = project(rng.standard_normal((2, 3, 3)), pattern_V((2, 3, 3)))
    Q = [haar_orthogonal(n, rng) for n in S.shape]
    T = group_action(Q, S)
    for j in range(2):
        _, res = svt_residual(T, [q[:, j] for q in Q])
        assert res <= 1e-12
    vecs = [v / np.linalg.norm(v) for v in (rng.standard_normal(2), rng.standard_normal(3), rng.standard_normal(3))]
    r0 = svt_residual(S, vecs)[1]
    r1 = svt_residual(T, [q @ v for q, v in zip(Q, vecs)])[1]
    assert abs(r0 - r1) <= 1e-10


def test_six_tuples_of_diagonal_222():
    for l0, l1 in [(1.0, 1.0), (2.0, 1.0), (-0.5, 3.0)]:
        T = diag222(l0, l1)
        tuples = odeco222_tuples(l0, l1)
        assert len(tuples) == 6
        assert all(svt_residual(T, t)[1] <= 1e-12 for t in tuples)
        assert orthogonal_pairs(tuples) == [(0, 1)]
    t = odeco222_tuples(1.0, 1.0)[2]
    assert all(np.allclose(v, [1 / math.sqrt(2)] * 2) for v in t.vectors)


def test_zero_diagonal_rejected():
    with pytest.raises(ValueError):
        odeco222_tuples(0.0, 1.0)


def test_four_bases_from_e_basis():
    bases = four_bases(((E[0],) * 4, (E[1],) * 4))
    want = [
        ((E[0], E[0], E[0], E[0]), (E[1], E[1], E[1], E[1])),
        ((E[0], E[0], E[1], E[1]), (E[1], E[1], E[0], E[0])),
        ((E[0], E[1], E[0], E[1]), (E[1], E[0], E[1], E[0])),
        ((E[0], E[1], E[1], E[0]), (E[1], E[0], E[0], E[1])),
    ]
    assert [basis_key(b) for b in bases] == [basis_key(b) for b in want]


def test_four_bases_closure():
    rng = np.random.default_rng(3)
    Q = [haar_orthogonal(2, rng) for _ in range(4)]
    B = (tuple(q[:, 0] for q in Q), tuple(q[:, 1] for q in Q))
    bases = four_bases(B)
    for b in bases:
        assert same_basis_set(four_bases(b), bases)


def test_four_bases_rejects_non_orthogonal():
    with pytest.raises(ValueError, match="orthogonal"):
        four_bases(((E[0],) * 4, (E[0], E[1], E[1], E[1])))


def test_four_bases_of_generic_tensor():
    rng = np.random.default_rng(4)
    S = project(rng.standard_normal((2,) * 4), pattern_V((2,) * 4))
    Q = [haar_orthogonal(2, rng) for _ in range(4)]
    T = group_action(Q, S)
    B = (tuple(q[:, 0] for q in Q), tuple(q[:, 1] for q in Q))
    for basis in four_bases(B):
        for t in basis:
            assert svt_residual(T, t)[1] <= 1e-10


# -- M_Q ----------------------------------------------------------------------

GOLDEN_ONES = {
    ("0000", "1000"), ("0011", "1011"), ("0101", "1101"), ("0110", "1110"),
    ("1001", "0001"), ("1010", "0010"), ("1100", "0100"), ("1111", "0111"),
}


def test_mq_golden_matrix():
    M = build_MQ((P2, I2, I2, I2))
    assert [M.label(r) for r in M.rows] == ["0000", "0011", "0101", "0110", "1001", "1010", "1100", "1111"]
    assert [M.label(c) for c in M.cols] == ["0001", "0010", "0100", "0111", "1000", "1011", "1101", "1110"]
    want = np.zeros((8, 8))
    for r, c in GOLDEN_ONES:
        want[[M.label(x) for x in M.rows].index(r), [M.label(x) for x in M.cols].index(c)] = 1.0
    assert np.array_equal(M.matrix, want)


def test_mq_zero_for_trivial_tuples():
    for Q in ((I2,) * 4, (P2,) * 4):
        M = build_MQ(Q)
        assert not M.matrix.any() and rank_MQ(M) == 0


def test_mq_generic_full_rank():
    rng = np.random.default_rng(5)
    for d in (4, 5, 6):
        M = build_MQ([haar_orthogonal(2, rng) for _ in range(d)])
        assert M.matrix.shape == (2**d - 2 * d, 2 * d)
        assert rank_MQ(M) == 2 * d


def test_mq_columns_sparse_on_signed_permutations():
    rng = np.random.default_rng(6)
    for _ in range(20):
        bits = rng.integers(0, 2, 6)
        Q = [s * q for s, q in zip(rng.choice([-1, 1], 6), sp_tuple(bits))]
        M = build_MQ(Q)
        assert np.all(np.count_nonzero(M.matrix, axis=0) <= 1)
        assert iQ(Q) == tuple(int(b) for b in bits)


def test_mq_rejects_non_binary():
    with pytest.raises(Exception, match="binary"):
        build_MQ([np.eye(3)] * 4)


def test_iQ_encoding():
    assert iQ((P2, P2, I2, I2)) == (1, 1, 0, 0)
    assert iQ((I2,) * 5) == (0,) * 5
    assert iQ((-P2,) * 3) == (1, 1, 1)
    with pytest.raises(ValueError):
        iQ((HADAMARD_TYPE[0], I2, I2))


def test_codim_values():
    assert expected_codim(5, 2) == 6 == rank_MQ(build_MQ(sp_tuple((1, 1, 0, 0, 0))))
    assert rank_MQ(build_MQ(sp_tuple((1, 1, 0, 0)))) == 0


@pytest.mark.parametrize("d", range(4, 9))
def test_codim_table(d):
    assert codim_table_check(d).ok


def test_reduced_matrix_hadamard():
    H = HADAMARD_TYPE[0]
    assert np.allclose(reduced_MQ(H, 4)[:, 0], [1, 0, -1])
    assert np.allclose(reduced_MQ(H, 6)[:, 0], np.array([3, 1, 0, -1, -3]) / 4)
    assert numerical_rank(reduced_MQ(H, 6)) == 1
    assert numerical_rank(reduced_MQ(H, 8)) == 2


@pytest.mark.parametrize("seed", range(3))
def test_census_finds_exactly_the_four_bases(seed):
    p = planted((2, 2, 2, 2), seed=seed)
    basis = (tuple(q[:, 0] for q in p.Q), tuple(q[:, 1] for q in p.Q))
    census = basis_census(p.T, basis, seed=seed)
    assert census.ok and len(census.found) == 4
    assert same_basis_set(census.found, four_bases(basis))


def test_census_rejects_other_formats():
    with pytest.raises(DimensionError, match="2x2x2x2"):
        basis_census(np.zeros((2, 2, 2)), None)
