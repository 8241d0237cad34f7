"""Dense symmetric linear algebra for small matrices.

Everything here works on plain ``numpy`` arrays.  Symmetric inputs are
symmetrized on entry (``as_sym``) so that downstream code can rely on exact
symmetry of the stored entries.
"""

from __future__ import annotations

import enum
import math
from typing import NamedTuple

import numpy as np
import scipy.linalg


class NotSymmetricError(ValueError):
    pass


def as_sym(M, rtol: float = 1e-8) -> np.ndarray:
    """Return a float copy of ``M`` with exactly symmetric storage.

    Raises ``NotSymmetricError`` when ``M`` is not square or is visibly
    asymmetric (relative to its own scale).
    """
    A = np.array(M, dtype=float)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise NotSymmetricError(f"expected a non-empty square matrix, got shape {A.shape}")
    scale = max(1.0, float(np.abs(A).max()))
    if np.abs(A - A.T).max() > rtol * scale:
        raise NotSymmetricError("matrix is not symmetric")
    return 0.5 * (A + A.T)


class Spectrum(NamedTuple):
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # orthonormal columns, same order

    def reconstruct(self) -> np.ndarray:
        Q = self.eigenvectors
        return (Q * self.eigenvalues) @ Q.T


def eig_sym(M, max_sweeps: int = 60) -> Spectrum:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Eigenvalues come back sorted ascending.  Each eigenvector is sign-fixed so
    that its largest-magnitude entry is positive, which makes the output a
    deterministic function of the input.
    """
    S = as_sym(M)
    n = S.shape[0]
    if n == 1:
        return Spectrum(S.diagonal().copy(), np.eye(1))
    fro = math.sqrt(float(np.sum(S * S)))
    if fro == 0.0:
        return Spectrum(np.zeros(n), np.eye(n))

    # plain Python floats: for the matrix sizes used here this beats numpy
    # slicing by an order of magnitude
    A = S.tolist()
    V = np.eye(n).tolist()
    stop = (1e-17 * fro) ** 2
    skip = 1e-18 * fro
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            row = A[p]
            for q in range(p + 1, n):
                off += row[q] * row[q]
        if off <= stop:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p][q]
                if abs(apq) <= skip:
                    continue
                theta = (A[q][q] - A[p][p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                app, aqq = A[p][p], A[q][q]
                Ap, Aq = A[p], A[q]
                for k in range(n):
                    akp, akq = Ap[k], Aq[k]
                    nkp = c * akp - s * akq
                    nkq = s * akp + c * akq
                    Ap[k] = nkp
                    Aq[k] = nkq
                    A[k][p] = nkp
                    A[k][q] = nkq
                Ap[p] = app - t * apq
                Aq[q] = aqq + t * apq
                Ap[q] = Aq[p] = 0.0
                for row in V:
                    vp, vq = row[p], row[q]
                    row[p] = c * vp - s * vq
                    row[q] = s * vp + c * vq
    else:
        raise RuntimeError("Jacobi eigensolver hit its sweep cap")

    w = np.array([A[i][i] for i in range(n)])
    Q = np.array(V)
    order = np.argsort(w, kind="stable")
    w, Q = w[order], Q[:, order]
    idx = np.argmax(np.abs(Q), axis=0)
    signs = np.sign(Q[idx, np.arange(n)])
    signs[signs == 0] = 1.0
    return Spectrum(w, Q * signs)


def eigvals_sym(M) -> np.ndarray:
    return eig_sym(M).eigenvalues


def numeric_rank(M, rel_tol: float = 1e-6) -> int:
    w = eigvals_sym(M)
    top = np.abs(w).max()
    if top == 0.0:
        return 0
    return int(np.sum(np.abs(w) > rel_tol * top))


class PsdStatus(enum.Enum):
    POSITIVE_DEFINITE = "PositiveDefinite"
    POSITIVE_SEMIDEFINITE = "PositiveSemidefinite"
    INDEFINITE = "Indefinite"


def psd_status(M, rel_tol: float = 1e-6) -> PsdStatus:
    w = eigvals_sym(M)
    band = rel_tol * (1.0 + np.abs(w).max())
    if w[0] > band:
        return PsdStatus.POSITIVE_DEFINITE
    if w[0] >= -band:
        return PsdStatus.POSITIVE_SEMIDEFINITE
    return PsdStatus.INDEFINITE


class LeastSquaresResult(NamedTuple):
    solution: np.ndarray
    residual_norm: float
    nullspace: np.ndarray  # columns, orthonormal; shape (ncols, k)
    rank: int


def solve_least_squares(M, rhs, rel_tol: float = 1e-10) -> LeastSquaresResult:
    """Minimum-norm least-squares solution of ``M @ sol ~= rhs``.

    Uses a column-pivoted QR followed by a second QR of the leading rows of R
    (a complete orthogonal decomposition).  Columns beyond the numerical rank
    (diagonal of R below ``rel_tol * |R[0, 0]|``) span the nullspace.
    """
    A = np.atleast_2d(np.array(M, dtype=float))
    b = np.array(rhs, dtype=float).reshape(-1)
    if A.shape[0] != b.size:
        raise ValueError(f"rhs has length {b.size}, matrix has {A.shape[0]} rows")
    if not np.any(A):
        raise ValueError("least squares on the zero matrix")
    m, n = A.shape
    Q, R, piv = scipy.linalg.qr(A, pivoting=True, mode="economic")
    diag = np.abs(np.diag(R))
    r = int(np.sum(diag > rel_tol * diag[0]))
    # R[:r, :] P^T = T Z^T with Z orthonormal (n x r), T upper-triangular-ish
    R1 = np.zeros((r, n))
    R1[:, piv] = R[:r, :]
    Z, T = np.linalg.qr(R1.T, mode="complete")
    Zr = Z[:, :r]
    c = Q[:, :r].T @ b
    w = scipy.linalg.solve_triangular(T[:r, :r].T, c, lower=True)
    sol = Zr @ w
    null = Z[:, r:]
    residual = float(np.linalg.norm(A @ sol - b))
    return LeastSquaresResult(sol, residual, null, r)


def max_step(X: np.ndarray, dX: np.ndarray) -> float:
    """Largest ``t`` with ``X + t dX`` positive semidefinite (``inf`` if none).

    ``X`` must be positive definite.  Only an eigenvalue is needed here and
    this runs several times per interior-point iteration, so it goes through
    LAPACK rather than ``eig_sym``.
    """
    L = np.linalg.cholesky(X)
    W = scipy.linalg.solve_triangular(L, dX, lower=True)
    W = scipy.linalg.solve_triangular(L, W.T, lower=True)
    wmin = float(np.linalg.eigvalsh(0.5 * (W + W.T))[0])
    if wmin >= 0.0:
        return math.inf
    return -1.0 / wmin
