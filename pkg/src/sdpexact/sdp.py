"""Small dense semidefinite programs in standard form.

Primal::

    min  C . X   s.t.  A_i . X = b_i (i = 1..l),  X >= 0

Dual::

    max  b^T lam  s.t.  Y = C - sum lam_i A_i >= 0

Solved with an infeasible-start primal-dual path-following method (HKM
search direction, Mehrotra predictor-corrector).  Sizes are expected to stay
around ``d <= 12``; everything is dense.
"""

from __future__ import annotations

import enum
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .numkit import Spectrum, as_sym, eig_sym, max_step

log = logging.getLogger(__name__)


class SdpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    UNBOUNDED = "Unbounded"
    INFEASIBLE = "Infeasible"
    ITERATION_LIMIT = "IterationLimit"


@dataclass(frozen=True)
class SdpProblem:
    C: np.ndarray
    A: tuple[np.ndarray, ...]
    b: np.ndarray

    def __post_init__(self):
        C = as_sym(self.C)
        A = tuple(as_sym(Ai) for Ai in self.A)
        b = np.array(self.b, dtype=float).reshape(-1)
        if len(A) < 1:
            raise ValueError("need at least one constraint")
        if any(Ai.shape != C.shape for Ai in A):
            raise ValueError("constraint matrices must match the cost matrix in size")
        if b.size != len(A):
            raise ValueError(f"b has length {b.size} but there are {len(A)} constraints")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def d(self) -> int:
        return self.C.shape[0]

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.A)

    def with_cost(self, C) -> "SdpProblem":
        return SdpProblem(C, self.A, self.b)


@dataclass(frozen=True)
class SdpOptions:
    tol_gap: float = 1e-9
    tol_feas: float = 1e-8
    max_iter: int = 200
    rank_tol: float = 1e-6


@dataclass(frozen=True)
class SdpSolution:
    status: SdpStatus
    X: np.ndarray
    Y: np.ndarray
    lam: np.ndarray
    primal_value: float
    dual_value: float
    gap: float
    rank_X: int
    rank_Y: int
    strictly_complementary: bool
    iterations: int
    spectrum_X: Spectrum = field(repr=False)
    spectrum_Y: Spectrum = field(repr=False)

    @property
    def optimal(self) -> bool:
        return self.status is SdpStatus.OPTIMAL


def _rank(w: np.ndarray, rel_tol: float) -> int:
    top = np.abs(w).max()
    if top == 0.0:
        return 0
    return int(np.sum(w > rel_tol * top))


def _op(A: np.ndarray, X: np.ndarray) -> np.ndarray:
    # A has shape (l, d, d)
    return np.einsum("kij,ij->k", A, X)


def _adj(A: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.einsum("k,kij->ij", y, A)


def _sym(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def _spd_inverse(Z: np.ndarray) -> np.ndarray:
    c, low = scipy.linalg.cho_factor(Z, lower=True)
    return _sym(scipy.linalg.cho_solve((c, low), np.eye(Z.shape[0])))


def _check_independence(A: np.ndarray) -> None:
    G = A.reshape(A.shape[0], -1)
    s = np.linalg.svd(G, compute_uv=False)
    if s[-1] <= 1e-12 * s[0]:
        warnings.warn("SDP constraint matrices are (nearly) linearly dependent", RuntimeWarning, stacklevel=3)


def solve(p: SdpProblem, opts: SdpOptions | None = None, **overrides) -> SdpSolution:
    """Solve the standard-form SDP ``p``.

    Keyword overrides (``tol_gap``, ``tol_feas``, ``max_iter``, ``rank_tol``)
    are merged into ``opts``.  Status detection for infeasible or unbounded
    problems is heuristic; see the module docs.
    """
    opts = opts or SdpOptions()
    if overrides:
        opts = SdpOptions(**{**opts.__dict__, **overrides})
    d, l = p.d, p.l
    A = np.array(p.A)
    b, C = p.b, p.C
    _check_independence(A)

    normA = max(float(np.linalg.norm(Ai)) for Ai in A)
    normC = float(np.linalg.norm(C))
    normb = float(np.linalg.norm(b))
    xi = max(10.0, math.sqrt(d), d * max((abs(bk) / (1.0 + np.linalg.norm(Ak)) for bk, Ak in zip(b, A)), default=0.0))
    eta = max(10.0, math.sqrt(d), normC, normA)
    X = xi * np.eye(d)
    Z = eta * np.eye(d)
    y = np.zeros(l)

    status = SdpStatus.ITERATION_LIMIT
    stalled = False
    best_infeas = math.inf
    stall = 0
    it = 0
    for it in range(1, opts.max_iter + 1):
        rp = b - _op(A, X)
        Rd = _sym(C - Z - _adj(A, y))
        pobj = float(np.sum(C * X))
        dobj = float(b @ y)
        mu = float(np.sum(X * Z)) / d
        pinf = float(np.linalg.norm(rp)) / (1.0 + normb)
        dinf = float(np.linalg.norm(Rd)) / (1.0 + normC)
        gap = abs(pobj - dobj)

        if gap <= opts.tol_gap * (1.0 + abs(pobj)) and pinf <= opts.tol_feas and dinf <= opts.tol_feas and mu * d <= opts.tol_gap * (1.0 + abs(pobj)):
            status = SdpStatus.OPTIMAL
            break

        infeas = max(pinf, dinf)
        if infeas < 0.5 * best_infeas:
            best_infeas = infeas
            stall = 0
        elif infeas > opts.tol_feas:
            stall += 1
        if pobj < -1.0 / opts.tol_feas and pinf < 1e-3:
            status = SdpStatus.UNBOUNDED
            break
        # a diverging dual objective certifies primal infeasibility
        if dobj > 1.0 / opts.tol_feas and dinf < 1e-3:
            status = SdpStatus.INFEASIBLE
            break
        if not (math.isfinite(mu) and math.isfinite(pobj) and math.isfinite(dobj)):
            log.debug("iterates overflowed at iteration %d", it)
            status = SdpStatus.INFEASIBLE if dobj > abs(pobj) else SdpStatus.UNBOUNDED
            break
        if stall >= 30:
            status = SdpStatus.INFEASIBLE
            break

        try:
            Zinv = _spd_inverse(Z)
        except np.linalg.LinAlgError:
            log.debug("dual slack lost definiteness at iteration %d", it)
            stalled = True
            break
        XAZ = np.einsum("ij,kjl,lm->kim", X, A, Zinv)  # X A_k Z^-1
        M = np.einsum("iab,jba->ij", A, XAZ)
        M = _sym(M)
        try:
            Mfac = scipy.linalg.cho_factor(M, lower=True)
            msolve = lambda r: scipy.linalg.cho_solve(Mfac, r)  # noqa: E731
        except np.linalg.LinAlgError:
            msolve = lambda r: np.linalg.lstsq(M, r, rcond=None)[0]  # noqa: E731

        XRdZ = X @ Rd @ Zinv

        def direction(K: np.ndarray):
            dy = msolve(rp - _op(A, K) + _op(A, XRdZ))
            dZ = _sym(Rd - _adj(A, dy))
            dX = _sym(K - X @ dZ @ Zinv)
            return dX, dy, dZ

        def steps(dX, dZ, gamma):
            try:
                ap = min(1.0, gamma * max_step(X, dX))
                ad = min(1.0, gamma * max_step(Z, dZ))
            except np.linalg.LinAlgError:
                return 0.0, 0.0
            return ap, ad

        # predictor
        dXa, dya, dZa = direction(-X)
        apa, ada = steps(dXa, dZa, 1.0)
        mu_aff = float(np.sum((X + apa * dXa) * (Z + ada * dZa))) / d
        sigma = min(1.0, (mu_aff / mu) ** 3) if mu > 0 else 0.0
        # corrector
        K = (sigma * mu * np.eye(d) - dXa @ dZa) @ Zinv - X
        dX, dy, dZ = direction(K)
        gamma = 0.9 + 0.09 * min(apa, ada)
        ap, ad = steps(dX, dZ, gamma)
        if ap == 0.0 and ad == 0.0:
            log.debug("zero step at iteration %d", it)
            stalled = True
            break
        X = _sym(X + ap * dX)
        y = y + ad * dy
        Z = _sym(Z + ad * dZ)

    if stalled:
        # numerical breakdown right at the end of the path: keep the iterate
        # if it is optimal to within a relaxed tolerance
        pinf = float(np.linalg.norm(b - _op(A, X))) / (1.0 + normb)
        dinf = float(np.linalg.norm(_sym(C - Z - _adj(A, y)))) / (1.0 + normC)
        pobj, dobj = float(np.sum(C * X)), float(b @ y)
        loose = 1e3
        if abs(pobj - dobj) <= loose * opts.tol_gap * (1.0 + abs(pobj)) and max(pinf, dinf) <= loose * opts.tol_feas:
            status = SdpStatus.OPTIMAL

    Y = _sym(C - _adj(A, y))
    sX = eig_sym(X)
    sY = eig_sym(Y)
    rX = _rank(sX.eigenvalues, opts.rank_tol)
    rY = _rank(sY.eigenvalues, opts.rank_tol)
    pobj = float(np.sum(C * X))
    dobj = float(b @ y)
    return SdpSolution(
        status=status,
        X=X,
        Y=Y,
        lam=y,
        primal_value=pobj,
        dual_value=dobj,
        gap=abs(pobj - dobj),
        rank_X=rX,
        rank_Y=rY,
        strictly_complementary=(rX + rY == d),
        iterations=it,
        spectrum_X=sX,
        spectrum_Y=sY,
    )


def recover_point(sol: SdpSolution) -> np.ndarray | None:
    """``x`` from a rank-one Shor solution ``X = (1, x)(1, x)^T``, else ``None``."""
    if not sol.optimal or sol.rank_X != 1:
        return None
    w, V = sol.spectrum_X
    v = V[:, -1] * math.sqrt(max(w[-1], 0.0))
    if abs(v[0]) <= 1e-12 * max(1.0, np.abs(v).max()):
        return None
    return v[1:] / v[0]


def dominant_point(sol: SdpSolution) -> np.ndarray | None:
    """``x`` read off the dominant eigenvector of ``X`` regardless of its rank."""
    w, V = sol.spectrum_X
    v = V[:, -1]
    if abs(v[0]) <= 1e-12 * np.abs(v).max():
        return None
    return v[1:] / v[0]


def rank_one_factor(sol: SdpSolution) -> np.ndarray:
    """Dominant factor ``v`` with ``X ~ v v^T`` (sign fixed by ``eig_sym``)."""
    w, V = sol.spectrum_X
    return V[:, -1] * math.sqrt(max(w[-1], 0.0))
