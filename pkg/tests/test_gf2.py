"""GF(2) algebra: constructions, elimination, kernels, algebraic laws."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bbqec import gf2


def random_matrix(draw, max_dim: int = 8):
    rows = draw(st.integers(1, max_dim))
    cols = draw(st.integers(1, max_dim))
    bits = draw(
        st.lists(
            st.lists(st.integers(0, 1), min_size=cols, max_size=cols),
            min_size=rows,
            max_size=rows,
        )
    )
    return gf2.from_rows(bits)


matrices = st.composite(random_matrix)()


def test_identity_small():
    assert gf2.identity(2).bits.tolist() == [[1, 0], [0, 1]]
    assert gf2.identity(1).bits.tolist() == [[1]]


def test_identity_rejects_zero_size():
    with pytest.raises(ValueError):
        gf2.identity(0)
    with pytest.raises(ValueError):
        gf2.cyclic_shift(0)


def test_cyclic_shift_4_rows():
    # row i carries its 1 at column (i+1) mod 4
    expected = [
        [0, 1, 0, 0],
        [0, 0, 1, 0],
        [0, 0, 0, 1],
        [1, 0, 0, 0],
    ]
    assert gf2.cyclic_shift(4).bits.tolist() == expected


def test_cyclic_shift_1_is_identity():
    assert gf2.cyclic_shift(1) == gf2.identity(1)


def test_cyclic_shift_order():
    s = gf2.cyclic_shift(3)
    assert gf2.matpow_mod2(s, 3) == gf2.identity(3)
    assert gf2.matmul_mod2(gf2.identity(3), s) == s


def test_kron_identities():
    assert gf2.kron(gf2.identity(2), gf2.identity(3)) == gf2.identity(6)
    m = gf2.from_rows([[1, 0], [1, 1]])
    assert gf2.kron(gf2.from_rows([[1]]), m) == m


def test_kron_shift_blocks():
    # S_3 (x) I_3 laid out block-wise: row block i has I_3 in column block i+1 mod 3
    x = gf2.kron(gf2.cyclic_shift(3), gf2.identity(3))
    expected = np.zeros((9, 9), dtype=np.uint8)
    for i in range(3):
        j = (i + 1) % 3
        expected[3 * i : 3 * i + 3, 3 * j : 3 * j + 3] = np.eye(3, dtype=np.uint8)
    assert np.array_equal(x.bits, expected)


def test_add_mod2_self_cancels():
    m = gf2.from_rows([[1, 0, 1], [0, 1, 1]])
    assert gf2.add_mod2(m, m) == gf2.zeros(2, 3)


def test_shape_mismatch_rejected():
    a = gf2.identity(2)
    b = gf2.identity(3)
    with pytest.raises(ValueError):
        gf2.add_mod2(a, b)
    with pytest.raises(ValueError):
        gf2.matmul_mod2(a, b)


def test_hstack_shape():
    a = gf2.identity(2)
    b = gf2.zeros(2, 3)
    assert gf2.hstack(a, b).cols == 5


def test_rank_basics():
    assert gf2.rank(gf2.zeros(3, 4)) == 0
    assert gf2.rank(gf2.identity(5)) == 5


def test_kernel_of_identity_empty():
    assert gf2.kernel_basis(gf2.identity(4)) == []


def test_kernel_dimension_rank_nullity():
    m = gf2.from_rows([[1, 1, 0, 0], [0, 0, 1, 1], [1, 1, 1, 1]])
    assert gf2.rank(m) == 2
    assert len(gf2.kernel_basis(m)) == 2


def test_row_space_reflexive():
    m = gf2.from_rows([[1, 1, 0], [0, 1, 1]])
    for i in range(m.rows):
        row = gf2.from_rows([m.bits[i].tolist()])
        assert gf2.row_space_contains(m, row)
    assert not gf2.row_space_contains(m, gf2.from_rows([[1, 0, 0]]))


def test_matrix_immutable():
    m = gf2.identity(3)
    with pytest.raises(ValueError):
        m.bits[0, 0] = 0


def test_entries_validated():
    with pytest.raises(ValueError):
        gf2.from_rows([[0, 2]])


@given(matrices)
@settings(max_examples=80)
def test_rank_equals_rank_of_transpose(m):
    assert gf2.rank(m) == gf2.rank(gf2.transpose(m))


@given(matrices)
@settings(max_examples=80)
def test_kernel_vectors_annihilate(m):
    for v in gf2.kernel_basis(m):
        prod = gf2.matmul_mod2(m, gf2.transpose(v))
        assert not prod.bits.any()


@given(matrices)
@settings(max_examples=80)
def test_rank_nullity(m):
    assert gf2.rank(m) + len(gf2.kernel_basis(m)) == m.cols


@given(matrices, matrices)
@settings(max_examples=40)
def test_kron_mixed_product(a, c):
    # (A (x) B)(C (x) D) = AC (x) BD, with B, D chosen to conform
    b = gf2.identity(2)
    d = gf2.identity(2)
    if a.cols != c.rows:
        c = gf2.transpose(a)
    left = gf2.matmul_mod2(gf2.kron(a, b), gf2.kron(c, d))
    right = gf2.kron(gf2.matmul_mod2(a, c), gf2.matmul_mod2(b, d))
    assert left == right


@given(matrices)
@settings(max_examples=40)
def test_elimination_deterministic(m):
    r1, p1 = gf2.row_echelon(m)
    r2, p2 = gf2.row_echelon(m)
    assert p1 == p2
    assert np.array_equal(r1, r2)


@given(matrices)
@settings(max_examples=40)
def test_rref_pivots_are_clean(m):
    rref, pivots = gf2.row_echelon(m)
    for r_idx, pc in enumerate(pivots):
        col = rref[:, pc]
        assert col[r_idx] == 1
        assert col.sum() == 1
