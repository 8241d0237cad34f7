from __future__ import annotations

import numpy as np
import pytest

from sdpexact import sdp
from sdpexact.gallery import maxcut_qp
from sdpexact.model import embed_homogeneous, embed_shor
from sdpexact.numkit import Spectrum


def _solution_with_X(X):
    w, V = np.linalg.eigh(X)
    sp = Spectrum(w, V)
    rank = int(np.sum(w > 1e-6 * max(1.0, w[-1])))
    return sdp.SdpSolution(sdp.SdpStatus.OPTIMAL, X, np.zeros_like(X), np.zeros(1), 0.0, 0.0, 0.0, rank, 0, False, 0, sp, sp)


def test_trace_with_fixed_corner():
    E00 = np.diag([1.0, 0.0])
    sol = sdp.solve(sdp.SdpProblem(np.eye(2), [E00], [1.0]))
    assert sol.optimal
    assert sol.primal_value == pytest.approx(1.0, abs=1e-8)
    assert np.allclose(sol.X, E00, atol=1e-6)
    assert sol.rank_X == 1


def test_maxcut_relaxation_is_rank_one():
    qp = maxcut_qp([1, 2, 3])
    sol = sdp.solve(embed_homogeneous(qp))
    assert sol.optimal and sol.rank_X == 1
    assert sol.primal_value == pytest.approx(-4, abs=1e-7)
    z = sdp.rank_one_factor(sol)
    z = z / z[0]
    assert np.allclose(z, [1, 1, -1], atol=1e-6)


def test_maxcut_lifted_relaxation_is_not_rank_one():
    sol = sdp.solve(embed_shor(maxcut_qp([1, 2, 3])))
    assert sol.optimal and sol.rank_X == 2


def test_four_points_ed_at_a_variety_point(four_points):
    sol = sdp.solve(embed_shor(four_points))
    assert sol.optimal and sol.rank_X == 1
    assert abs(sol.primal_value) < 1e-8
    assert np.allclose(sdp.recover_point(sol), 0, atol=1e-6)


def test_optimality_invariants(four_points):
    P = embed_shor(four_points.ed([0.7, 1.9]))
    sol = sdp.solve(P)
    assert sol.optimal
    for Ai, bi in zip(P.A, P.b):
        assert abs(np.sum(Ai * sol.X) - bi) < 1e-8
    Y = P.C - sum(li * Ai for li, Ai in zip(sol.lam, P.A))
    assert np.allclose(Y, sol.Y, atol=1e-8)
    assert np.linalg.eigvalsh(sol.X)[0] > -1e-8 and np.linalg.eigvalsh(sol.Y)[0] > -1e-8
    assert sol.gap <= 1e-9 * (1 + abs(sol.primal_value))


def test_deterministic(four_points):
    P = embed_shor(four_points.ed([0.3, -0.4]))
    a, b = sdp.solve(P), sdp.solve(P)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.lam, b.lam)


def test_recover_point_examples():
    v = np.array([1.0, 2.0, 3.0])
    assert np.allclose(sdp.recover_point(_solution_with_X(np.outer(v, v))), [2, 3])
    assert sdp.recover_point(_solution_with_X(np.eye(3))) is None


def test_infeasible_problem_is_reported():
    # X11 = -1 is impossible for X >= 0
    sol = sdp.solve(sdp.SdpProblem(np.eye(2), [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])], [1.0, -1.0]))
    assert sol.status is sdp.SdpStatus.INFEASIBLE


def test_unbounded_problem_is_reported():
    # min -X01 with only X00 fixed
    C = np.array([[0.0, -1.0], [-1.0, 0.0]])
    sol = sdp.solve(sdp.SdpProblem(C, [np.diag([1.0, 0.0])], [1.0]))
    assert sol.status is sdp.SdpStatus.UNBOUNDED


def test_problem_validation():
    with pytest.raises(ValueError):
        sdp.SdpProblem(np.eye(2), [], [])
    with pytest.raises(ValueError):
        sdp.SdpProblem(np.eye(2), [np.eye(3)], [1.0])
