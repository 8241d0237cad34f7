"""Deciding whether the Shor relaxation of a QP is exact.

Two independent routes produce an :class:`ExactnessCertificate`:

* ``check_exact_sdp`` solves the relaxation and reads the ranks of the
  primal/dual pair;
* ``certify_at_point`` starts from a feasible point ``x``, recovers the
  multipliers from stationarity and tests ``H(lam) > 0``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import sdp
from .degrees import qp_alg_degree
from .model import (
    NotOnVariety,
    QuadraticProgram,
    constraint_matrix,
    cost_matrix,
    embed_homogeneous,
    embed_shor,
    eval_constraints,
    hessian,
    jacobian,
    stationarity_residual,
)
from .numkit import eigvals_sym, numeric_rank, solve_least_squares


class Verdict(enum.Enum):
    EXACT = "Exact"
    NOT_EXACT = "NotExact"
    BOUNDARY = "Boundary"
    INCONCLUSIVE = "Inconclusive"


class Route(enum.Enum):
    SDP = "SdpRoute"
    POINT = "PointRoute"


@dataclass(frozen=True)
class ExactnessCertificate:
    verdict: Verdict
    minimizer: np.ndarray | None
    lam: np.ndarray | None
    hessian_min_eig: float
    rank_X: int
    rank_Y: int
    strictly_complementary: bool
    route: Route
    objective_value: float | None = None
    note: str = ""
    solution: sdp.SdpSolution | None = field(default=None, repr=False, compare=False)

    @property
    def exact(self) -> bool:
        return self.verdict is Verdict.EXACT

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "route": self.route.value,
            "minimizer": None if self.minimizer is None else self.minimizer.tolist(),
            "lambda": None if self.lam is None else self.lam.tolist(),
            "hessian_min_eig": self.hessian_min_eig,
            "rank_X": self.rank_X,
            "rank_Y": self.rank_Y,
            "strictly_complementary": self.strictly_complementary,
            "objective_value": self.objective_value,
            "note": self.note,
        }


def _ambiguous(w: np.ndarray, rank_tol: float, band: float = 10.0) -> bool:
    """True when some eigenvalue ratio sits within ``band`` of ``rank_tol``."""
    top = np.abs(w).max()
    if top == 0.0:
        return False
    r = np.abs(w) / top
    return bool(np.any((r >= rank_tol / band) & (r <= rank_tol * band)))


def polish_kkt(qp: QuadraticProgram, x, lam, max_iter: int = 20, max_move: float = 1e-3):
    """Gauss-Newton on ``f(x) = 0`` and stationarity, started at ``(x, lam)``.

    Interior-point minimizers are only accurate to about the square root of
    the duality gap; a few Newton steps on the KKT system of the QP itself
    recover full precision.  The input is returned unchanged if the iteration
    does not converge or wanders further than ``max_move`` (relative).
    """
    x0 = np.array(x, dtype=float)
    l0 = np.array(lam, dtype=float)
    n, m = qp.n, qp.m
    z = np.concatenate([x0, l0])

    def system(z):
        xx, ll = z[:n], z[n:]
        F = np.empty(n + m)
        J = np.zeros((n + m, n + m))
        F[:n] = stationarity_residual(qp, xx, ll)
        J[:n, :n] = hessian(qp, ll)
        for i, f in enumerate(qp.constraints):
            g = f.A @ xx + f.a
            J[:n, n + i] = -g
            J[n + i, :n] = 2.0 * g
            F[n + i] = f(xx)
        return F, J

    for _ in range(max_iter):
        F, J = system(z)
        if np.linalg.norm(F) <= 1e-14 * (1.0 + np.linalg.norm(z)):
            break
        z = z + np.linalg.lstsq(J, -F, rcond=None)[0]
    F, _ = system(z)
    if np.linalg.norm(F) > 1e-11 * (1.0 + np.linalg.norm(z)) or np.linalg.norm(z[:n] - x0) > max_move * (1.0 + np.linalg.norm(x0)):
        return x0, l0
    return z[:n], z[n:]


def check_exact_sdp(
    qp: QuadraticProgram,
    opts: sdp.SdpOptions | None = None,
    homogeneous: bool | None = None,
    polish: bool = True,
) -> ExactnessCertificate:
    """Solve the relaxation of ``qp`` and classify the optimal pair.

    A homogeneous QP with a general objective (Max-Cut style, no linear
    terms) has minimizers in pairs ``+-x``; by default it is relaxed in the
    ``n x n`` form where a rank-one optimum stands for that pair, and the
    reported minimizer is the representative whose largest entry is
    positive.  ED and Lin objectives always use the lifted form, where a
    tied pair ``+-x`` is simply not exact.

    With ``polish`` the minimizer and multipliers of an exact instance are
    refined by ``polish_kkt``; the verdict itself comes from the relaxation.
    """
    opts = opts or sdp.SdpOptions()
    if homogeneous is None:
        homogeneous = qp.is_homogeneous() and qp.objective.kind == "general"
    P = embed_homogeneous(qp) if homogeneous else embed_shor(qp)
    sol = sdp.solve(P, opts)
    d = P.d
    if not sol.optimal:
        return ExactnessCertificate(
            Verdict.INCONCLUSIVE, None, None, math.nan, sol.rank_X, sol.rank_Y,
            sol.strictly_complementary, Route.SDP, note=f"solver status {sol.status.value}", solution=sol,
        )

    lam = sol.lam if homogeneous else sol.lam[1:]
    Hw = eigvals_sym(hessian(qp, lam))
    if homogeneous:
        # H is the dual slack itself and is singular along the minimizer
        hmin = float(Hw[1]) if Hw.size > 1 else math.inf
    else:
        hmin = float(Hw[0])

    minimizer = None
    if sol.rank_X == 1:
        if homogeneous:
            minimizer = sdp.rank_one_factor(sol)
        else:
            minimizer = sdp.recover_point(sol)
            if minimizer is not None and polish:
                minimizer, lam = polish_kkt(qp, minimizer, lam)
                Hw = eigvals_sym(hessian(qp, lam))
                hmin = float(Hw[0])

    ambiguous = _ambiguous(sol.spectrum_X.eigenvalues, opts.rank_tol) or _ambiguous(sol.spectrum_Y.eigenvalues, opts.rank_tol)
    if ambiguous:
        verdict = Verdict.BOUNDARY
    elif sol.rank_X == 1 and sol.rank_Y == d - 1 and minimizer is not None:
        verdict = Verdict.EXACT
    else:
        verdict = Verdict.NOT_EXACT

    value = sol.primal_value + qp.objective.constant
    return ExactnessCertificate(
        verdict, minimizer, lam, hmin, sol.rank_X, sol.rank_Y, sol.strictly_complementary,
        Route.SDP, objective_value=value, solution=sol,
    )


def _maximize_min_eig(H0: np.ndarray, B: list[np.ndarray], cap: float, box: float):
    """max t s.t. H0 - sum mu_k B_k - t I >= 0, t <= cap, |mu_k| <= box.

    Block-diagonal LMI posed in dual form for the SDP solver; returns
    ``(t, mu)``.
    """
    n = H0.shape[0]
    k = len(B)
    size = n + 1 + 2 * k
    C = np.zeros((size, size))
    C[:n, :n] = H0
    C[n, n] = cap
    for j in range(2 * k):
        C[n + 1 + j, n + 1 + j] = box
    At = np.zeros((size, size))
    At[:n, :n] = np.eye(n)
    At[n, n] = 1.0
    mats = [At]
    for j, Bj in enumerate(B):
        Mj = np.zeros((size, size))
        Mj[:n, :n] = Bj
        Mj[n + 1 + 2 * j, n + 1 + 2 * j] = 1.0
        Mj[n + 2 + 2 * j, n + 2 + 2 * j] = -1.0
        mats.append(Mj)
    b = np.zeros(k + 1)
    b[0] = 1.0
    sol = sdp.solve(sdp.SdpProblem(C, mats, b))
    return float(sol.lam[0]), sol.lam[1:], sol


def certify_at_point(
    qp: QuadraticProgram,
    x,
    tol: float = 1e-8,
    tol_pd: float = 1e-9,
    rank_tol: float = 1e-6,
) -> ExactnessCertificate:
    """Certificate that ``x`` is the unique rank-one optimum of the relaxation.

    Multipliers solve ``Jac(x) lam = grad g(x)`` in the least-squares sense.
    When the Jacobian has a nullspace the remaining freedom is used to push
    the smallest eigenvalue of ``H(lam)`` up (an auxiliary SDP).
    """
    x = np.array(x, dtype=float).reshape(-1)
    res = eval_constraints(qp, x)
    scale = 1.0 + float(x @ x)
    if res.size and np.abs(res).max() > tol * scale:
        raise NotOnVariety(f"max |f(x)| = {np.abs(res).max():.3g} exceeds tolerance")

    obj = qp.objective
    grad_g = 2.0 * obj.C @ x + obj.c
    J = jacobian(qp, x)
    value = obj(x) + obj.constant
    if qp.m == 0:
        lam = np.zeros(0)
        null = np.zeros((0, 0))
        ls_res = float(np.linalg.norm(grad_g))
    else:
        ls = solve_least_squares(J, grad_g)
        lam, null, ls_res = ls.solution, ls.nullspace, ls.residual_norm

    gscale = 1.0 + float(np.linalg.norm(grad_g)) + float(np.linalg.norm(J))
    if ls_res > 1e-7 * gscale:
        return ExactnessCertificate(
            Verdict.NOT_EXACT, None, None, math.nan, 1, 0, False, Route.POINT,
            objective_value=value, note=f"x is not a critical point (stationarity residual {ls_res:.3g})",
        )

    if null.shape[1] > 0:
        B = [sum(null[i, k] * f.A for i, f in enumerate(qp.constraints)) for k in range(null.shape[1])]
        keep = [k for k, Bk in enumerate(B) if np.abs(Bk).max() > 1e-12]
        if keep:
            H0 = hessian(qp, lam)
            cap = 1.0 + float(np.abs(eigvals_sym(H0)).max())
            box = 1e3 * (1.0 + float(np.linalg.norm(lam)))
            _, mu, _ = _maximize_min_eig(H0, [B[k] for k in keep], cap, box)
            lam = lam + null[:, keep] @ mu

    H = hessian(qp, lam)
    w = eigvals_sym(H)
    hmin = float(w[0])
    band = tol_pd * (1.0 + float(np.abs(w).max()))
    if hmin > band:
        verdict = Verdict.EXACT
    elif hmin >= -band:
        verdict = Verdict.BOUNDARY
    else:
        verdict = Verdict.NOT_EXACT

    # dual matrix with (1, x) in its kernel
    Y = cost_matrix(obj)
    for li, f in zip(lam, qp.constraints):
        Y = Y - li * constraint_matrix(f)
    z = np.concatenate([[1.0], x])
    Y[0, 0] -= float(z @ Y @ z)
    rank_Y = numeric_rank(Y, rank_tol)
    d = qp.n + 1
    return ExactnessCertificate(
        verdict, x, lam, hmin, 1, rank_Y, rank_Y == d - 1, Route.POINT, objective_value=value,
    )


@dataclass(frozen=True)
class CriticalPoint:
    x: np.ndarray
    lam: np.ndarray
    objective_value: float


@dataclass(frozen=True)
class CriticalPointSet:
    points: tuple[CriticalPoint, ...]
    converged_starts: int
    total_starts: int
    bound: int | None

    def __len__(self) -> int:
        return len(self.points)

    @property
    def within_bound(self) -> bool:
        return self.bound is None or len(self.points) <= self.bound

    def xs(self) -> np.ndarray:
        if not self.points:
            return np.zeros((0, 0))
        return np.array([p.x for p in self.points])


def _ed_system(qp: QuadraticProgram, u: np.ndarray, z: np.ndarray):
    n, m = qp.n, qp.m
    x, lam = z[:n], z[n:]
    F = np.empty(n + m)
    Jm = np.zeros((n + m, n + m))
    H = np.eye(n)
    r = x - u
    for i, f in enumerate(qp.constraints):
        g = f.A @ x + f.a
        F[n + i] = x @ f.A @ x + 2.0 * f.a @ x + f.alpha
        Jm[n + i, :n] = 2.0 * g
        H -= lam[i] * f.A
        r = r - lam[i] * g
        Jm[:n, n + i] = -g
    F[:n] = r
    Jm[:n, :n] = H
    return F, Jm


def _newton(qp, u, z, tol, max_iter=80):
    F, J = _ed_system(qp, u, z)
    nF = float(np.linalg.norm(F))
    for _ in range(max_iter):
        if nF <= tol * (1.0 + float(np.linalg.norm(z))):
            return z, True
        step = np.linalg.lstsq(J, -F, rcond=None)[0]
        t = 1.0
        while t > 1e-6:
            zn = z + t * step
            Fn, Jn = _ed_system(qp, u, zn)
            nFn = float(np.linalg.norm(Fn))
            if nFn < (1.0 - 1e-4 * t) * nF or nFn <= tol:
                break
            t *= 0.5
        else:
            return z, False
        z, F, J, nF = zn, Fn, Jn, nFn
    return z, nF <= tol * (1.0 + float(np.linalg.norm(z)))


def ed_critical_points(
    qp: QuadraticProgram,
    starts: int = 200,
    seed: int = 0,
    tol: float = 1e-11,
) -> CriticalPointSet:
    """Real critical points of ``|x - u|^2`` on the variety, by multistart Newton.

    Starts are uniform in ``[-R, R]^(n+m)`` with ``R = 2 (1 + |u|)``.  Points
    are deduplicated on ``x``.
    """
    if qp.objective.kind != "ed":
        raise ValueError("ed_critical_points needs an ED objective")
    if starts < 1:
        raise ValueError("starts must be positive")
    u = qp.objective.u
    n, m = qp.n, qp.m
    R = 2.0 * (1.0 + float(np.linalg.norm(u)))
    rng = np.random.default_rng(seed)
    Z0 = rng.uniform(-R, R, size=(starts, n + m))
    found = []
    for z0 in Z0:
        z, ok = _newton(qp, u, z0, tol)
        if not ok:
            continue
        # polish to full accuracy
        found.append(z)
    converged = len(found)
    found.sort(key=lambda z: tuple(np.round(z[:n], 8)))
    points: list[CriticalPoint] = []
    for z in found:
        x = z[:n]
        if any(np.linalg.norm(x - p.x) <= 1e-6 * (1.0 + np.linalg.norm(x)) for p in points):
            continue
        points.append(CriticalPoint(x.copy(), z[n:].copy(), float(np.sum((x - u) ** 2))))
    bound = qp_alg_degree(m, n) if m <= n else None
    return CriticalPointSet(tuple(points), converged, starts, bound)


def global_minimizer(points, u, tie_tol: float = 1e-9):
    """Index of the point nearest ``u`` and whether the minimum is tied."""
    P = np.asarray(points, dtype=float)
    dist2 = np.sum((P - np.asarray(u, dtype=float)) ** 2, axis=1)
    order = np.argsort(dist2, kind="stable")
    best = int(order[0])
    tied = len(order) > 1 and dist2[order[1]] - dist2[best] <= tie_tol * (1.0 + dist2[best])
    return best, bool(tied)
