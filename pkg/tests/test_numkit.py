from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sdpexact.numkit import (
    NotSymmetricError,
    PsdStatus,
    as_sym,
    eig_sym,
    eigvals_sym,
    max_step,
    numeric_rank,
    psd_status,
    solve_least_squares,
)

SINGULAR = [[1, 1, -2], [1, 2, -3], [-2, -3, 5]]


def test_diagonal_eigenvalues_sorted():
    assert np.allclose(eigvals_sym(np.diag([3.0, 1.0, 2.0])), [1, 2, 3])


def test_reflection():
    assert np.allclose(eigvals_sym([[0, 1], [1, 0]]), [-1, 1])


def test_hand_computed_characteristic_polynomial():
    r = math.sqrt(13)
    assert np.allclose(eigvals_sym(SINGULAR), [0, 4 - r, 4 + r], atol=1e-12)


def test_eigenvectors_reconstruct():
    s = eig_sym(SINGULAR)
    V, w = s.eigenvectors, s.eigenvalues
    assert np.allclose(V @ np.diag(w) @ V.T, SINGULAR, atol=1e-12)
    assert np.allclose(V.T @ V, np.eye(3), atol=1e-12)


def test_rejects_asymmetric():
    with pytest.raises(NotSymmetricError):
        as_sym([[0, 1], [0, 0]])


@pytest.mark.parametrize("M, rank", [(np.eye(4), 4), (np.zeros((3, 3)), 0), (SINGULAR, 2)])
def test_numeric_rank(M, rank):
    assert numeric_rank(M) == rank


@pytest.mark.parametrize(
    "M, status",
    [(np.eye(3), PsdStatus.POSITIVE_DEFINITE), (np.diag([1.0, -1.0]), PsdStatus.INDEFINITE), (SINGULAR, PsdStatus.POSITIVE_SEMIDEFINITE)],
)
def test_psd_status(M, status):
    assert psd_status(M) is status


def test_least_squares_examples():
    r = solve_least_squares(np.eye(2), [3, 4])
    assert np.allclose(r.solution, [3, 4]) and r.residual_norm < 1e-14 and r.nullspace.shape[1] == 0
    r = solve_least_squares([[1.0], [0.0]], [2, 5])
    assert np.allclose(r.solution, [2]) and abs(r.residual_norm - 5) < 1e-12
    r = solve_least_squares(np.diag([2.0, 2.0]), [0, -2])
    assert np.allclose(r.solution, [0, -1])


def test_least_squares_minimum_norm_with_nullspace():
    r = solve_least_squares([[1.0, 1.0]], [2.0])
    assert r.rank == 1 and r.nullspace.shape == (2, 1)
    assert np.allclose(r.solution, [1, 1])


def test_max_step():
    X = np.eye(2)
    assert max_step(X, -np.eye(2)) == pytest.approx(1.0)
    assert math.isinf(max_step(X, np.eye(2)))


sym = arrays(np.float64, (5, 5), elements=st.floats(-10, 10, allow_nan=False, width=64))


@settings(max_examples=60, deadline=None)
@given(sym)
def test_jacobi_matches_lapack(M):
    M = M + M.T
    s = eig_sym(M)
    ref = np.linalg.eigvalsh(M)
    scale = 1 + np.abs(ref).max()
    assert np.allclose(s.eigenvalues, ref, atol=1e-10 * scale)
    assert np.allclose(s.eigenvectors @ np.diag(s.eigenvalues) @ s.eigenvectors.T, M, atol=1e-10 * scale)
