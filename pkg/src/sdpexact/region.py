"""Geometry of the exactness region.

For an ED objective the relaxation is exact at ``u`` exactly when
``u = x - 1/2 Jac(x) lam`` for some ``x`` on the variety and some ``lam`` with
``I - sum lam_i A_i > 0``.  The ``lam``-set is a spectrahedron (the *master*
spectrahedron); its images under the affine maps above are the shadows whose
union is the region.  This module samples shadow boundaries, builds tangency
witnesses between neighbouring shadows, and handles the one-constraint cut
locus in closed form.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from . import sdp
from .model import NotOnVariety, QuadraticProgram, VarietyPoints, embed_shor, eval_constraints, hessian, jacobian
from .numkit import eig_sym, eigvals_sym, solve_least_squares


class Kind(enum.Enum):
    LIN = "Lin"
    ED = "Ed"


class ParametrizationResidual(ValueError):
    pass


class SingularSystem(ValueError):
    pass


class SingularA(ValueError):
    pass


class EmptySpectrahedron(ValueError):
    pass


def _kind(kind) -> Kind:
    if isinstance(kind, Kind):
        return kind
    return Kind(str(kind).capitalize())


@dataclass(frozen=True)
class MasterSpectrahedron:
    """``{lam : B0 - sum lam_i B_i > 0}``."""

    kind: Kind
    B0: np.ndarray
    B: tuple[np.ndarray, ...]

    @property
    def m(self) -> int:
        return len(self.B)

    def pencil(self, lam) -> np.ndarray:
        P = self.B0.copy()
        for li, Bi in zip(np.asarray(lam, dtype=float), self.B):
            P -= li * Bi
        return P

    def contains(self, lam, tol: float = 0.0) -> bool:
        """Strict membership, with ``tol`` as a margin on the smallest eigenvalue."""
        return bool(eigvals_sym(self.pencil(lam))[0] > tol)

    def det(self, lam) -> float:
        return float(np.prod(eigvals_sym(self.pencil(lam))))


def master(qp: QuadraticProgram, kind="Ed") -> MasterSpectrahedron:
    kind = _kind(kind)
    n = qp.n
    B0 = np.eye(n) if kind is Kind.ED else np.zeros((n, n))
    return MasterSpectrahedron(kind, B0, tuple(f.A.copy() for f in qp.constraints))


def _ray_from(P0: np.ndarray, Bv: np.ndarray) -> float:
    """Largest ``t`` with ``P0 - t Bv >= 0`` for ``P0 > 0``; ``inf`` if none."""
    L = np.linalg.cholesky(P0)
    W = scipy.linalg.solve_triangular(L, Bv, lower=True)
    W = scipy.linalg.solve_triangular(L, W.T, lower=True)
    top = eigvals_sym(0.5 * (W + W.T))[-1]
    return math.inf if top <= 0.0 else 1.0 / top


def boundary_ray(S: MasterSpectrahedron, v) -> float:
    """Exit time of the ray ``t v`` from an ED master spectrahedron.

    Returns ``1 / lambda_max(sum v_i B_i)``, or ``math.inf`` when the ray never
    leaves (the spectrahedron is unbounded in direction ``v``).
    """
    if S.kind is not Kind.ED:
        raise ValueError("boundary_ray starts at lam = 0, which is interior only for the ED kind")
    v = np.asarray(v, dtype=float)
    Bv = sum(vi * Bi for vi, Bi in zip(v, S.B))
    top = eigvals_sym(Bv)[-1]
    return math.inf if top <= 0.0 else 1.0 / top


def shadow_point(qp: QuadraticProgram, x, lam, kind=None, tol: float = 1e-8) -> np.ndarray:
    """``x - 1/2 Jac(x) lam`` (ED) or ``1/2 Jac(x) lam`` (Lin)."""
    if kind is None:
        kind = Kind.LIN if qp.objective.kind == "lin" else Kind.ED
    kind = _kind(kind)
    x = np.asarray(x, dtype=float)
    r = eval_constraints(qp, x)
    if r.size and np.abs(r).max() > tol * (1.0 + float(x @ x)):
        raise NotOnVariety(f"max |f(x)| = {np.abs(r).max():.3g}")
    step = 0.5 * jacobian(qp, x) @ np.asarray(lam, dtype=float)
    return x - step if kind is Kind.ED else step


@dataclass(frozen=True)
class BoundarySample:
    index: int
    param: np.ndarray  # curve/surface parameter, or the point index
    x: np.ndarray
    lam: np.ndarray
    u: np.ndarray
    det_residual: float
    min_eig: float


@dataclass(frozen=True)
class Parametrization:
    """Map from a parameter box ``[lower, upper]`` onto the variety."""

    func: Callable[[np.ndarray], np.ndarray]
    lower: Sequence[float]
    upper: Sequence[float]

    def draw(self, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        t = rng.uniform(np.asarray(self.lower, float), np.asarray(self.upper, float))
        return t, np.asarray(self.func(t), dtype=float)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("SDPEXACT_THREADS", "1")))
    except ValueError:
        return 1


def _unit(rng: np.random.Generator, k: int) -> np.ndarray:
    while True:
        v = rng.standard_normal(k)
        nv = np.linalg.norm(v)
        if nv > 1e-12:
            return v / nv


def _lin_center(S: MasterSpectrahedron) -> np.ndarray:
    """A point of the Lin cone of unit norm, as deep inside as possible."""
    m, n = S.m, S.B0.shape[0]
    # max t  s.t.  -sum lam B - t I >= 0,  |lam_k| <= 1
    size = n + 2 * m
    C = np.zeros((size, size))
    for j in range(2 * m):
        C[n + j, n + j] = 1.0
    At = np.zeros((size, size))
    At[:n, :n] = np.eye(n)
    mats = [At]
    for k, Bk in enumerate(S.B):
        M = np.zeros((size, size))
        M[:n, :n] = Bk
        M[n + 2 * k, n + 2 * k] = 1.0
        M[n + 2 * k + 1, n + 2 * k + 1] = -1.0
        mats.append(M)
    b = np.zeros(m + 1)
    b[0] = 1.0
    sol = sdp.solve(sdp.SdpProblem(C, mats, b))
    t, lam = sol.lam[0], sol.lam[1:]
    if not sol.optimal or t <= 1e-9:
        raise EmptySpectrahedron("the Lin master spectrahedron has empty interior")
    return lam / np.linalg.norm(lam)


def _ushadow_ray(qp, x, J, w, t_cap):
    """Largest ``t`` with ``x + t w`` in the closed ED shadow at ``x``.

    Used when ``Jac(x)`` has dependent columns, so that the shadow is a
    projection of the master spectrahedron rather than an affine image.
    Returns ``(t, lam)`` or ``None`` when the cap is reached.
    """
    ls = solve_least_squares(-0.5 * J, w)
    if ls.residual_norm > 1e-9 * (1.0 + np.linalg.norm(w)):
        return None
    lw, N = ls.solution, ls.nullspace
    A = [f.A for f in qp.constraints]
    n = qp.n
    Aw = sum(li * Ai for li, Ai in zip(lw, A))
    Bs = [sum(N[i, k] * A[i] for i in range(len(A))) for k in range(N.shape[1])]
    Bs = [B for B in Bs if np.abs(B).max() > 1e-12]
    k = len(Bs)
    box = 1e3
    size = n + 1 + 2 * k
    C = np.zeros((size, size))
    C[:n, :n] = np.eye(n)
    C[n, n] = t_cap
    for j in range(2 * k):
        C[n + 1 + j, n + 1 + j] = box
    Mt = np.zeros((size, size))
    Mt[:n, :n] = Aw
    Mt[n, n] = 1.0
    mats = [Mt]
    for j, B in enumerate(Bs):
        M = np.zeros((size, size))
        M[:n, :n] = B
        M[n + 1 + 2 * j, n + 1 + 2 * j] = 1.0
        M[n + 2 + 2 * j, n + 2 + 2 * j] = -1.0
        mats.append(M)
    b = np.zeros(k + 1)
    b[0] = 1.0
    sol = sdp.solve(sdp.SdpProblem(C, mats, b), tol_gap=1e-11, tol_feas=1e-10)
    if not sol.optimal:
        return None
    t = float(sol.lam[0])
    if t >= 0.999 * t_cap:
        return None
    # rebuild lam with the same nullspace combination
    keep = [kk for kk in range(N.shape[1]) if np.abs(sum(N[i, kk] * A[i] for i in range(len(A)))).max() > 1e-12]
    lam = t * lw + N[:, keep] @ sol.lam[1:]
    return t, lam


def _one_sample(qp, source, S, lin_center, i, seed, lam_cap, retries):
    rng = np.random.default_rng([seed, i])
    n, m = qp.n, qp.m
    for _ in range(retries):
        if isinstance(source, VarietyPoints):
            j = int(rng.integers(len(source)))
            param, x = np.array([float(j)]), source.points[j]
        else:
            param, x = source.draw(rng)
            r = eval_constraints(qp, x)
            if r.size and np.abs(r).max() > 1e-8 * (1.0 + float(x @ x)):
                raise ParametrizationResidual(f"parametrization at {param.tolist()} is off the variety ({np.abs(r).max():.3g})")
        J = jacobian(qp, x)
        if S.kind is Kind.LIN:
            v = _unit(rng, m)
            t = _ray_from(S.pencil(lin_center), sum(vi * Bi for vi, Bi in zip(v, S.B)))
            if not math.isfinite(t):
                continue
            lam = lin_center + t * v
            lam = lam / np.linalg.norm(lam)
            u = 0.5 * J @ lam
        elif np.linalg.matrix_rank(J) == m:
            v = _unit(rng, m)
            t = boundary_ray(S, v)
            if not math.isfinite(t) or (lam_cap is not None and t > lam_cap):
                continue
            lam = t * v
            u = x - 0.5 * J @ lam
        else:
            w = _unit(rng, n)
            hit = _ushadow_ray(qp, x, J, w, t_cap=1e3 if lam_cap is None else lam_cap)
            if hit is None:
                continue
            t, lam = hit
            u = x + t * w
        w_eig = eigvals_sym(S.pencil(lam))
        return BoundarySample(i, param, x.copy(), lam, u, float(abs(np.prod(w_eig))), float(w_eig[0]))
    return None


def sample_boundary(
    qp: QuadraticProgram,
    source: VarietyPoints | Parametrization,
    count: int,
    seed: int = 0,
    kind="Ed",
    lam_cap: float | None = None,
    retries: int = 50,
) -> list[BoundarySample]:
    """Random points on the boundary of the exactness region.

    Each sample draws ``x`` on the variety and a random direction, then walks
    to the boundary of the shadow at ``x``.  Directions leaving along an
    unbounded ray (or beyond ``lam_cap``) are redrawn, up to ``retries``
    times per sample; samples that exhaust the retries are dropped.
    Sample ``i`` depends only on ``(seed, i)``.
    """
    kind = _kind(kind)
    S = master(qp, kind)
    center = _lin_center(S) if kind is Kind.LIN else None
    if isinstance(source, VarietyPoints):
        source = VarietyPoints.checked(qp, source.points, source.residual_tol)

    def job(i):
        return _one_sample(qp, source, S, center, i, seed, lam_cap, retries)

    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            out = list(pool.map(job, range(count)))
    else:
        out = [job(i) for i in range(count)]
    return [s for s in out if s is not None]


def samples_to_csv(samples: Sequence[BoundarySample]) -> str:
    """CSV with columns ``index, x1..xn, lam1..lamm, u1..un, det_residual``."""
    buf = io.StringIO()
    if not samples:
        return ""
    n, m = samples[0].x.size, samples[0].lam.size
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index"] + [f"x{i + 1}" for i in range(n)] + [f"lam{i + 1}" for i in range(m)] + [f"u{i + 1}" for i in range(n)] + ["det_residual"])
    for s in samples:
        w.writerow([s.index] + [repr(float(v)) for v in (*s.x, *s.lam, *s.u)] + [repr(s.det_residual)])
    return buf.getvalue()


def read_samples_u(text: str) -> np.ndarray:
    """The ``u`` columns of a sample CSV as an array."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        return np.zeros((0, 0))
    head = rows[0]
    cols = [k for k, h in enumerate(head) if h.startswith("u") and h[1:].isdigit()]
    if not cols:
        raise ValueError("CSV has no u columns")
    return np.array([[float(r[k]) for k in cols] for r in rows[1:] if r], dtype=float)


# --- tangency -------------------------------------------------------------------


@dataclass(frozen=True)
class TangencyWitness:
    x: np.ndarray
    x_prime: np.ndarray
    lam: np.ndarray
    u: np.ndarray
    bisector_residual: float
    det_residual: float
    normal_angle_residual: float


def _adjugate(H: np.ndarray) -> np.ndarray:
    w, V = eig_sym(H)
    n = w.size
    co = np.array([np.prod(np.delete(w, j)) for j in range(n)])
    return (V * co) @ V.T


def tangency_witness(qp: QuadraticProgram, x, x_prime, tol: float = 1e-8) -> TangencyWitness:
    """Point where the shadows of ``x`` and ``x_prime`` can touch.

    Solves ``H(lam) (x' - x) = 0`` for ``lam`` (minimum norm) and maps it to
    ``u = x - 1/2 Jac(x) lam``.  The residuals measure how far ``u`` is from
    the bisector of ``x, x'``, from ``det H = 0``, and how far the normal of
    ``{det H = 0}`` at ``u`` is from the direction ``x' - x``.
    """
    if qp.m != qp.n:
        raise ValueError("tangency witnesses need as many constraints as variables")
    x = np.asarray(x, dtype=float)
    xp = np.asarray(x_prime, dtype=float)
    for p in (x, xp):
        r = eval_constraints(qp, p)
        if np.abs(r).max() > tol * (1.0 + float(p @ p)):
            raise NotOnVariety(f"{p.tolist()} is off the variety")
    d = xp - x
    if np.linalg.norm(d) <= tol:
        raise ValueError("x and x_prime coincide")
    M = np.column_stack([f.A @ d for f in qp.constraints])
    if not np.any(M):
        raise SingularSystem("no multiplier moves H(lam) along x' - x")
    ls = solve_least_squares(M, d)
    if ls.residual_norm > 1e-8 * (1.0 + np.linalg.norm(d)):
        raise SingularSystem(f"H(lam)(x' - x) = 0 has no solution (residual {ls.residual_norm:.3g})")
    lam = ls.solution
    J = jacobian(qp, x)
    u = x - 0.5 * J @ lam
    bis = abs(float(np.sum((u - x) ** 2) - np.sum((u - xp) ** 2)))
    H = hessian(qp, lam)
    det = abs(float(np.prod(eigvals_sym(H))))
    adj = _adjugate(H)
    grad_lam = -np.array([np.sum(adj * f.A) for f in qp.constraints])
    try:
        # lam(u) = -2 J^-1 (u - x), so grad_u = -2 J^-T grad_lam
        grad_u = -2.0 * np.linalg.solve(J.T, grad_lam)
        ng = np.linalg.norm(grad_u)
        if ng == 0.0:
            angle = math.nan
        else:
            # sine of the angle, from the component orthogonal to d
            dh = d / np.linalg.norm(d)
            g = grad_u / ng
            angle = float(np.linalg.norm(g - (g @ dh) * dh))
    except np.linalg.LinAlgError:
        angle = math.nan
    return TangencyWitness(x, xp, lam, u, bis, det, angle)


# --- one constraint ----------------------------------------------------------------


@dataclass(frozen=True)
class CutSheet:
    """Affine piece ``{u : V^T (u + lam a) = 0}`` for one eigenvalue ``omega`` of ``A``."""

    omega: float
    lam: float
    basis: np.ndarray  # eigenvectors spanning the eigenspace, as columns
    a: np.ndarray
    A: np.ndarray
    alpha: float
    extreme: bool  # lies on the topological boundary of the region

    @property
    def normal(self) -> np.ndarray:
        return self.basis[:, 0]

    @property
    def offset(self) -> float:
        return float(self.lam * self.basis[:, 0] @ self.a)

    def plane_residual(self, u) -> float:
        return float(np.linalg.norm(self.basis.T @ (np.asarray(u, float) + self.lam * self.a)))

    def discriminant(self, u) -> float:
        """``|V^T a|^2 - omega f(b_u)``; non-negative where ``u`` has two nearest points."""
        u = np.asarray(u, float)
        Mi = np.eye(self.A.shape[0]) - self.lam * self.A
        b = np.linalg.pinv(Mi, rcond=1e-10) @ (u + self.lam * self.a)
        fb = float(b @ self.A @ b + 2.0 * self.a @ b + self.alpha)
        va = self.basis.T @ self.a
        return float(va @ va) - self.omega * fb


@dataclass(frozen=True)
class CutLocus:
    sheets: tuple[CutSheet, ...]

    @property
    def hyperplanes(self) -> list[tuple[np.ndarray, float]]:
        return [(s.normal, s.offset) for s in self.sheets if s.basis.shape[1] == 1]

    def contains(self, u, tol: float = 1e-9) -> bool:
        """``u`` on a boundary sheet with non-negative discriminant."""
        return any(
            s.extreme and s.plane_residual(u) <= tol and s.discriminant(u) >= -tol
            for s in self.sheets
        )


def cut_locus_m1(qp: QuadraticProgram, tol: float = 1e-10) -> CutLocus:
    """Closed-form cut locus of the ED problem for a single quadric."""
    if qp.m != 1:
        raise ValueError("cut_locus_m1 needs exactly one constraint")
    f = qp.constraints[0]
    w, V = eig_sym(f.A)
    scale = max(1.0, float(np.abs(w).max()))
    if np.any(np.abs(w) <= tol * scale):
        raise SingularA("quadratic part has a zero eigenvalue")
    groups: list[list[int]] = []
    for k in range(w.size):
        if groups and abs(w[k] - w[groups[-1][0]]) <= 1e-9 * scale:
            groups[-1].append(k)
        else:
            groups.append([k])
    wmin, wmax = w[0], w[-1]
    sheets = []
    for g in groups:
        om = float(w[g[0]])
        extreme = (om == wmin and om < 0) or (om == wmax and om > 0)
        sheets.append(CutSheet(om, 1.0 / om, V[:, g].copy(), f.a.copy(), f.A.copy(), f.alpha, extreme))
    return CutLocus(tuple(sheets))


# --- locating the cut locus along a segment -----------------------------------------


@dataclass(frozen=True)
class CutPoint:
    u: np.ndarray
    x_a: np.ndarray
    x_b: np.ndarray
    s: float  # position on the segment, in [0, 1]
    polished: bool
    sdp_solves: int


def _jump_residual(qp, ua, w, z):
    """Two ED critical points equidistant from ``ua + s w``; ``z = (s, x1, l1, x2, l2)``."""
    from .exactness import _ed_system

    n, m = qp.n, qp.m
    s = z[0]
    u = ua + s * w
    z1, z2 = z[1 : 1 + n + m], z[1 + n + m :]
    F1, J1 = _ed_system(qp, u, z1)
    F2, J2 = _ed_system(qp, u, z2)
    k = n + m
    F = np.concatenate([F1, F2, [np.sum((u - z1[:n]) ** 2) - np.sum((u - z2[:n]) ** 2)]])
    J = np.zeros((2 * k + 1, 2 * k + 1))
    J[:k, 1 : 1 + k] = J1
    J[k : 2 * k, 1 + k :] = J2
    # d/ds of the stationarity rows is -w
    J[:n, 0] = -w
    J[k : k + n, 0] = -w
    x1, x2 = z1[:n], z2[:n]
    J[2 * k, 0] = 2.0 * (x2 - x1) @ w
    J[2 * k, 1 : 1 + n] = -2.0 * (u - x1)
    J[2 * k, 1 + k : 1 + k + n] = 2.0 * (u - x2)
    return F, J


def locate_cut_point(
    qp: QuadraticProgram,
    ua,
    ub,
    coarse: float = 1e-4,
    polish: bool = True,
    min_jump: float = 1e-3,
    opts=None,
) -> CutPoint | None:
    """Point on the segment ``[ua, ub]`` where the relaxation's minimizer jumps.

    Both endpoints must be exact with different minimizers, otherwise
    ``None``.  The segment is bisected on the point read off the dominant
    eigenvector of the relaxed solution (near the cut the solver returns a
    slightly mixed ``X``, whose heavier component is still the right one).
    Once the bracket is shorter than ``coarse`` a Gauss-Newton solve of
    "two critical points at equal distance" refines the location; if that
    leaves the bracket, bisection continues to full precision.  Brackets
    across which the minimizer moves by less than ``min_jump`` are treated
    as continuous and rejected.
    """

    ua = np.asarray(ua, dtype=float)
    ub = np.asarray(ub, dtype=float)
    w = ub - ua
    n, m = qp.n, qp.m
    solves = 0

    def probe(s):
        nonlocal solves
        solves += 1
        sol = sdp.solve(embed_shor(qp.ed(ua + s * w)), opts)
        if not sol.optimal:
            return None
        x = sdp.dominant_point(sol)
        return None if x is None else (x, sol.lam[1:], sol)

    pa, pb = probe(0.0), probe(1.0)
    if pa is None or pb is None or pa[2].rank_X != 1 or pb[2].rank_X != 1:
        return None
    (xa, la, _), (xb, lb, _) = pa, pb
    if np.linalg.norm(xa - xb) <= min_jump:
        return None
    lo, hi = 0.0, 1.0

    def bisect(lo, hi, xa, xb, la, lb, stop):
        while hi - lo > stop:
            mid = 0.5 * (lo + hi)
            pm = probe(mid)
            if pm is None:
                break
            x, lam, _ = pm
            if np.linalg.norm(x - xa) <= np.linalg.norm(x - xb):
                lo, xa, la = mid, x, lam
            else:
                hi, xb, lb = mid, x, lam
        return lo, hi, xa, xb, la, lb

    lo, hi, xa, xb, la, lb = bisect(lo, hi, xa, xb, la, lb, coarse)
    if np.linalg.norm(xa - xb) <= min_jump:
        return None
    if polish:
        z = np.concatenate([[0.5 * (lo + hi)], xa, la, xb, lb])
        ok = False
        for _ in range(30):
            F, J = _jump_residual(qp, ua, w, z)
            if np.linalg.norm(F) <= 1e-13 * (1.0 + np.linalg.norm(z)):
                ok = True
                break
            z = z + np.linalg.lstsq(J, -F, rcond=None)[0]
        s = float(z[0])
        x1, x2 = z[1 : 1 + n], z[1 + n + m : 1 + 2 * n + m]
        if ok and lo - 1e-9 <= s <= hi + 1e-9 and np.linalg.norm(x1 - x2) > min_jump:
            return CutPoint(ua + s * w, x1, x2, s, True, solves)
    lo, hi, xa, xb, la, lb = bisect(lo, hi, xa, xb, la, lb, 1e-13)
    if np.linalg.norm(xa - xb) <= min_jump:
        return None
    s = 0.5 * (lo + hi)
    return CutPoint(ua + s * w, xa, xb, s, False, solves)
