from __future__ import annotations

from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sdpexact import degrees as dg


@pytest.mark.parametrize("args, value", [((3, 3), 4), ((2, 5), 20), ((1, 6), 6)])
def test_delta_rank_one(args, value):
    assert dg.delta_rank_one(*args) == value


@pytest.mark.parametrize("args, value", [((3, 4), 40), ((2, 3), 4), ((3, 3), 8)])
def test_beta_sdp(args, value):
    assert dg.beta_sdp(*args) == value


@pytest.mark.parametrize("args, value", [((2, 3), 12), ((3, 3), 8), ((0, 4), 1)])
def test_qp_alg_degree(args, value):
    assert dg.qp_alg_degree(*args) == value


@pytest.mark.parametrize("args, value", [((2, 3), 32), ((3, 3), 24), ((1, 2), 6)])
def test_beta_qp(args, value):
    assert dg.beta_qp(*args) == value


def test_ed_degrees():
    assert dg.ed_degree_ci(2, 3) == 12
    assert dg.beta_ed(2, 3) == 24
    assert dg.beta_ed(3, 3) == 24
    assert dg.beta_ed(1, 3) == 3


def test_lin_degrees():
    assert dg.beta_lin(2, 3) == 12
    # 2^2 * 2 * C(0, 0)
    assert dg.beta_lin(2, 2) == 8
    assert dg.lin_alg_degree(2, 3) == 8


def test_misc_degrees():
    assert dg.maxcut_beta(3) == 8
    assert dg.segre_degree(3, 1, 4, 1) == 24
    assert dg.expected_degree(3, 3, 2, 5) == 40
    assert dg.expected_degree(3, 3, 1, 6) == 36
    assert dg.polar_degrees(3) == [3, 6, 4]


@pytest.mark.parametrize(
    "fn, args",
    [(dg.delta_rank_one, (0, 3)), (dg.delta_rank_one, (4, 3)), (dg.beta_sdp, (1, 3)), (dg.qp_alg_degree, (3, 2)),
     (dg.beta_lin, (1, 3)), (dg.maxcut_beta, (1,)), (dg.beta_ed, (2, 3, 5)), (dg.delta_rank_one, (2.0, 3))],
)
def test_domain_errors(fn, args):
    with pytest.raises(dg.DomainError):
        fn(*args)


def test_unknown_delta_star():
    with pytest.raises(dg.UnknownDeltaStar):
        dg.expected_degree(4, 4, 3, 1)


def test_tables_match_formulas_except_annotated_cell():
    for t in dg.TABLES.values():
        mism = t.check()
        assert all(annotated for *_, annotated in mism)
        if t.name == "SdpBoundary":
            assert [(c, p, f) for c, p, f, _ in mism] == [((2, 7), 66, 56)]
        else:
            assert mism == []


def test_table_render_marks_discrepancy():
    text = dg.TABLES["SdpBoundary"].render()
    assert "66*" in text and "56" in text


@given(st.integers(3, 12), st.integers(3, 12))
def test_sdp_boundary_identity(l, d):  # noqa: E741
    if l < d:
        assert dg.beta_sdp(l, d) == (d - 1) * dg.delta_rank_one(l, d) - dg.delta_rank_one(l + 1, d)


@given(st.integers(1, 12), st.integers(1, 12))
def test_qp_and_ed_identities(m, n):
    if m <= n:
        assert dg.beta_qp(m, n) == n * 2**m * comb(n, m) - 2**m * comb(n, m + 1)
        if m >= 2:
            assert dg.beta_ed(m, n) == m * 2**m * comb(n, m)
