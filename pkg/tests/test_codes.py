"""Code construction oracles: check matrices, parameters, removals, logicals."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bbqec import codes, gf2


def oracle_18_matrices() -> tuple[np.ndarray, np.ndarray]:
    """Hand-rolled 9x18 check matrices for the l=m=3 code, by index chasing.

    Built with plain loops, independently of the package's kron/matpow
    route: cell (i, j) maps to row 3*i+j; the first polynomial hits
    (i+1, j), (i, j), (i, j+2) and the second hits (i, j+1), (i, j), (i+2, j),
    all indices mod 3.
    """
    a = np.zeros((9, 9), dtype=np.uint8)
    b = np.zeros((9, 9), dtype=np.uint8)
    for i in range(3):
        for j in range(3):
            r = 3 * i + j
            a[r, 3 * ((i + 1) % 3) + j] ^= 1
            a[r, 3 * i + j] ^= 1
            a[r, 3 * i + (j + 2) % 3] ^= 1
            b[r, 3 * i + (j + 1) % 3] ^= 1
            b[r, 3 * i + j] ^= 1
            b[r, 3 * ((i + 2) % 3) + j] ^= 1
    h_x = np.hstack([a, b])
    h_z = np.hstack([b.T, a.T])
    return h_x, h_z


# Pairs of X-check indices whose joint removal keeps the code parameters,
# exactly as published; the other nine pairs of the 36 must be rejected.
PERMITTED_X_PAIRS = {
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 6), (0, 8),
    (1, 2), (1, 4), (1, 5), (1, 6), (1, 7),
    (2, 3), (2, 5), (2, 7), (2, 8),
    (3, 4), (3, 5), (3, 6), (3, 7),
    (4, 5), (4, 7), (4, 8),
    (5, 6), (5, 8),
    (6, 7), (6, 8),
    (7, 8),
}


def lr(l_cols=(), r_cols=()):
    return tuple(sorted(list(l_cols) + [9 + c for c in r_cols]))


# Published logical operator supports, transcribed independently of the
# package's copies so a typo in either place fails loudly.
LOGICALS_18_4_4_X = [
    lr((0, 2, 4, 5, 6, 7)),
    lr((1, 2, 3, 4, 6, 8)),
    lr((0, 1, 6), (0,)),
    lr((0, 1, 4, 5, 6), (1,)),
]
LOGICALS_18_4_4_Z = [
    lr((0, 2, 3, 4, 8), (0,)),
    lr((0, 2, 4, 5, 6, 7)),
    lr((1, 2, 7), (1,)),
    lr((0, 1, 6), (0,)),
]
LOGICALS_18_6_3_X = [
    lr((0, 1, 3, 5, 6)),
    lr((1, 2, 3, 4, 7)),
    lr((0, 2, 4, 5, 8)),
    lr((3, 5), (0,)),
    lr((3, 4), (1,)),
    lr((4, 5), (2,)),
]
LOGICALS_18_6_3_Z = [
    lr((0, 3, 4, 5, 8)),
    lr((0, 3, 8), (0, 1)),
    lr((0, 5, 8), (0, 2)),
    lr((1, 4, 6, 8), (0, 1, 2)),
    lr((0, 1, 2, 4, 7, 8), (2,)),
    lr((2, 4), (1,)),
]


@pytest.fixture(scope="module")
def code_18():
    return codes.build_named_code("18-4-4")


@pytest.fixture(scope="module")
def pruned_18(code_18):
    return codes.remove_redundant_checks(code_18, (2, 8), (3, 4))


@pytest.fixture(scope="module")
def code_18_6_3(pruned_18):
    return codes.derive_18_6_3(pruned_18)


def test_check_matrices_match_hand_oracle(code_18):
    h_x, h_z = oracle_18_matrices()
    assert np.array_equal(code_18.h_x.bits, h_x)
    assert np.array_equal(code_18.h_z.bits, h_z)


def test_18_code_self_dual(code_18):
    assert code_18.h_x == code_18.h_z


def test_18_code_parameters(code_18):
    assert code_18.n == 18
    assert code_18.k == 4
    assert gf2.rank(code_18.h_x) == 7
    assert gf2.rank(code_18.h_z) == 7
    dist = codes.compute_distance(code_18)
    assert dist.computed and dist.value == 4


def test_kernel_dimension(code_18):
    assert len(gf2.kernel_basis(code_18.h_x)) == 11


def test_row_and_column_weights(code_18):
    assert (code_18.h_x.bits.sum(axis=1) == 6).all()
    assert (code_18.h_x.bits.sum(axis=0) == 3).all()
    assert (code_18.h_z.bits.sum(axis=0) == 3).all()


def test_data_labels(code_18):
    assert code_18.data_label(0) == "L0"
    assert code_18.data_label(8) == "L8"
    assert code_18.data_label(9) == "R0"
    assert code_18.data_label(17) == "R8"


def test_pruned_code_keeps_parameters(pruned_18):
    assert pruned_18.retained_x == (0, 1, 3, 4, 5, 6, 7)
    assert pruned_18.retained_z == (0, 1, 2, 5, 6, 7, 8)
    assert pruned_18.k == 4
    dist = codes.compute_distance(pruned_18)
    assert dist.computed and dist.value == 4


def test_permitted_removal_pairs_exactly(code_18):
    for i in range(9):
        for j in range(i + 1, 9):
            permitted = (i, j) in PERMITTED_X_PAIRS
            if permitted:
                codes.remove_redundant_checks(code_18, (i, j), ())
            else:
                with pytest.raises(ValueError):
                    codes.remove_redundant_checks(code_18, (i, j), ())


def test_remove_nothing_is_identity(code_18):
    same = codes.remove_redundant_checks(code_18, (), ())
    assert same.retained_x == code_18.retained_x
    assert same.k == code_18.k


def test_removing_missing_check_rejected(pruned_18):
    with pytest.raises(ValueError):
        codes.remove_redundant_checks(pruned_18, (2,), ())


def test_18_6_3_parameters(code_18_6_3):
    assert code_18_6_3.k == 6
    assert code_18_6_3.d == 3
    assert len(code_18_6_3.retained_x) == 6
    assert len(code_18_6_3.retained_z) == 6
    assert 5 not in code_18_6_3.retained_x


def test_named_codes_match_expected_k():
    for code_id, entry in codes.CODE_TABLE.items():
        code = codes.build_named_code(code_id)
        n, k, _ = entry["expected"]
        assert code.n == n
        assert code.k == k


def test_distance_refuses_large_kernels():
    code = codes.build_named_code("54-4-8")
    result = codes.compute_distance(code)
    assert not result.computed
    assert result.value is None
    assert "exceeds limit" in result.reason


def test_trusted_distance_injection():
    code = codes.build_named_code("90-8-10", trust_table_distance=True)
    assert code.d == 10
    assert code.d_trusted


def test_default_logicals_match_transcription():
    set_4 = codes.default_logicals("18-4-4")
    assert list(set_4.x_supports) == LOGICALS_18_4_4_X
    assert list(set_4.z_supports) == LOGICALS_18_4_4_Z
    set_6 = codes.default_logicals("18-6-3")
    assert list(set_6.x_supports) == LOGICALS_18_6_3_X
    assert list(set_6.z_supports) == LOGICALS_18_6_3_Z


def test_verify_logicals_passes(pruned_18, code_18_6_3):
    report = codes.verify_logicals(pruned_18, codes.default_logicals("18-4-4"))
    assert report.ok, report.failures
    report = codes.verify_logicals(code_18_6_3, codes.default_logicals("18-6-3"))
    assert report.ok, report.failures


def test_verify_logicals_catches_stabilizer_swap(pruned_18):
    good = codes.default_logicals("18-4-4")
    stab_row = tuple(int(c) for c in np.nonzero(pruned_18.h_x.bits[0])[0])
    bad = codes.LogicalOperatorSet(
        n=18,
        x_supports=(stab_row,) + good.x_supports[1:],
        z_supports=good.z_supports,
    )
    report = codes.verify_logicals(pruned_18, bad)
    assert not report.ok
    assert any("pairing" in f for f in report.failures)


def test_verify_logicals_weight_check(pruned_18):
    good = codes.default_logicals("18-4-4")
    light = codes.LogicalOperatorSet(
        n=18,
        x_supports=((0,),) + good.x_supports[1:],
        z_supports=good.z_supports,
    )
    report = codes.verify_logicals(pruned_18, light)
    assert not report.ok


def test_export_parse_round_trip(pruned_18):
    logicals = codes.default_logicals("18-4-4")
    text = codes.export_code(pruned_18, logicals)
    parsed, parsed_logicals = codes.parse_code(text)
    assert np.array_equal(parsed.h_x.bits, pruned_18.h_x.bits)
    assert np.array_equal(parsed.h_z.bits, pruned_18.h_z.bits)
    assert parsed.retained_x == pruned_18.retained_x
    assert parsed.retained_z == pruned_18.retained_z
    assert parsed.k == pruned_18.k
    assert parsed_logicals == logicals
    assert codes.export_code(parsed, parsed_logicals) == text


def test_spec_exponents_reduce_cyclically():
    spec = codes.BbCodeSpec(
        l=6,
        m=3,
        a_terms=(("x", 1), ("y", 0), ("y", 1)),
        b_terms=(("x", 2), ("y", 2), ("y", 3)),
    )
    assert ("y", 0) in spec.b_terms


def test_repeated_monomial_rejected():
    with pytest.raises(ValueError):
        codes.build_bb_code(
            codes.BbCodeSpec(
                l=3,
                m=3,
                a_terms=(("x", 1), ("x", 1), ("y", 2)),
                b_terms=(("y", 1), ("x", 0), ("x", 2)),
            )
        )


@st.composite
def small_specs(draw):
    # nonzero x-power and two distinct y-powers make the three monomials
    # pairwise distinct, so the builder never rejects these
    l = draw(st.integers(3, 4))
    m = draw(st.integers(3, 4))
    ax = draw(st.integers(1, l - 1))
    ay = draw(st.lists(st.integers(0, m - 1), min_size=2, max_size=2, unique=True))
    by = draw(st.integers(0, m - 1))
    bx = draw(st.lists(st.integers(1, l - 1), min_size=2, max_size=2, unique=True))
    return codes.BbCodeSpec.from_exponents(l, m, (ax, *ay), (by, *bx))


@given(small_specs())
@settings(max_examples=60, deadline=None)
def test_random_specs_satisfy_css(spec):
    code = codes.build_bb_code(spec)
    prod = gf2.matmul_mod2(code.h_x, gf2.transpose(code.h_z))
    assert not prod.bits.any()
    assert (code.h_x.bits.sum(axis=1) == 6).all()
    assert (code.h_z.bits.sum(axis=1) == 6).all()
    assert (code.h_x.bits.sum(axis=0) == 3).all()
