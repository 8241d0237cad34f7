"""Packaged example instances and their numerical verification routines."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import degrees, implicit
from .exactness import Verdict, certify_at_point, check_exact_sdp, ed_critical_points
from .model import Objective, QuadraticConstraint, QuadraticProgram, VarietyPoints, quadratic_program
from .region import (
    Parametrization,
    cut_locus_m1,
    locate_cut_point,
    master,
    sample_boundary,
    shadow_point,
)


@dataclass
class Report:
    name: str
    checks: list[tuple[str, bool, str]] = field(default_factory=list)

    def add(self, label: str, ok: bool, detail: str = "") -> None:
        self.checks.append((label, bool(ok), detail))

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def render(self) -> str:
        lines = [f"{self.name}: {'PASS' if self.passed else 'FAIL'}"]
        for label, ok, detail in self.checks:
            lines.append(f"  [{'ok' if ok else 'FAIL'}] {label}" + (f"  ({detail})" if detail else ""))
        return "\n".join(lines)


@dataclass(frozen=True)
class ExampleDescriptor:
    name: str
    description: str
    qp: QuadraticProgram
    points: VarietyPoints | None = None
    parametrization: Parametrization | None = None
    golden: tuple[str, ...] = ()
    lam_cap: float | None = None
    verify: Callable[["ExampleDescriptor", int], Report] | None = field(default=None, repr=False, compare=False)
    plot: Callable[["ExampleDescriptor", int], dict] | None = field(default=None, repr=False, compare=False)


# --- Max-Cut ---------------------------------------------------------------------


def maxcut_qp(weights) -> QuadraticProgram:
    """``min sum_{i<j} w_ij x_i x_j`` over ``x_i^2 = 1``; ``weights`` in ``itertools.combinations`` order."""
    weights = np.asarray(weights, dtype=float)
    k = weights.size
    n = int(round((1 + np.sqrt(1 + 8 * k)) / 2))
    if n * (n - 1) // 2 != k:
        raise ValueError(f"{k} weights do not fill the upper triangle of any matrix")
    C = np.zeros((n, n))
    for w, (i, j) in zip(weights, itertools.combinations(range(n), 2)):
        C[i, j] = C[j, i] = 0.5 * w
    cons = tuple(QuadraticConstraint(np.diag(np.eye(n)[i]), np.zeros(n), -1.0) for i in range(n))
    return QuadraticProgram(cons, Objective(C, np.zeros(n)))


def cut_laplacian(C: np.ndarray, s) -> np.ndarray:
    """``L(C') = C' - diag(C' 1)`` with ``C' = D_s C D_s``."""
    s = np.asarray(s, dtype=float)
    Cs = s[:, None] * C * s[None, :]
    return Cs - np.diag(Cs.sum(axis=1))


def maxcut_oracle(weights) -> tuple[bool, float, np.ndarray]:
    """Exactness by the Laplacian test: some cut ``s`` has ``L >= 0`` of corank one.

    ``L 1 = 0`` always, so the test is on the complement of ``1``.  Returns
    ``(exact, margin, s)`` where ``margin`` is the smallest eigenvalue of
    ``L`` on that complement for the best cut (positive iff exact).
    """
    C = maxcut_qp(weights).objective.C
    n = C.shape[0]
    # orthonormal basis of the complement of the all-ones vector
    P = np.linalg.qr(np.column_stack([np.ones(n), np.eye(n)[:, : n - 1]]))[0][:, 1:]
    best = None
    for tail in itertools.product((1.0, -1.0), repeat=n - 1):
        s = np.array((1.0,) + tail)
        margin = np.linalg.eigvalsh(P.T @ cut_laplacian(C, s) @ P)[0]
        if best is None or margin > best[0]:
            best = (margin, s)
    margin, s = best
    return bool(margin > 0), float(margin), s


# --- instances -------------------------------------------------------------------

FOUR_POINTS = ["x1*x2 - 2*x2^2 + 2*x2", "x1^2 - x2^2 - x1 + x2"]
FOUR_POINTS_V = [[0, 0], [0, 1], [1, 0], [2, 2]]
TWISTED_CUBIC = ["x2 - x1^2", "x3 - x1*x2"]
THREE_QUADRICS = TWISTED_CUBIC + ["x1*x3 - x2^2"]
SIX_POINTS = [
    "9*x1*x3 - 5*x2*x3 - x3^2 + x3",
    "6*x2^2 - 13*x2*x3 + x3^2 - 6*x2 - x3",
    "2*x1*x2 - 6*x1*x3 + x2*x3 + x3^2 - x3",
    "6*x1^2 - 5*x2*x3 - x3^2 - 6*x1 + x3",
]
SIX_POINTS_V = [[0, 0, 0], [0, 0, 1], [0, 1, 0], [1, 0, 0], [-2, -3, -2], [-0.5, -0.5, -1]]
FIVE_POINTS = ["x2*x3 - x1", "x1*x3 - x2*x3 + x1 - x2", "x2^2 - x3^2", "x1*x2 - x3", "x1^2 - x3^2"]
FIVE_POINTS_V = [[0, 0, 0], [1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]
EIGHT_POINTS = ["x1^2 - 1", "x2^2 - 1", "x3^2 - 1"]
EIGHT_POINTS_V = [list(p) for p in itertools.product((1, -1), repeat=3)]
TWO_HYPERBOLOIDS = ["x1^2 + x2^2 - x3^2 + 0.3*x1 - 1", "x1^2 - 2*x2^2 + x3^2 + x1*x2 + 0.5*x3 - 2"]
HYPERBOLA = ["x1^2 - x2^2 - 1"]


def twisted_cubic_curve(t) -> np.ndarray:
    t = float(np.asarray(t).reshape(-1)[0])
    return np.array([t, t * t, t**3])


def curve_points(qp: QuadraticProgram, count: int, seed: int = 0, box: float = 3.0) -> VarietyPoints:
    """Points on a curve with no parametrization, found as ED critical points of random ``u``."""
    rng = np.random.default_rng(seed)
    pts: list[np.ndarray] = []
    k = 0
    while len(pts) < count and k < 20 * count:
        cs = ed_critical_points(qp.ed(rng.uniform(-box, box, qp.n)), starts=20, seed=seed * 7919 + k)
        pts.extend(p.x for p in cs.points)
        k += 1
    return VarietyPoints.checked(qp, np.array(pts[:count]), 1e-9)


def quadrics_through(rng: np.random.Generator, x, x_prime, m: int | None = None) -> QuadraticProgram:
    """Random quadrics in ``R^n`` that all vanish at ``x`` and ``x_prime``.

    ``A`` is random; the linear part is shifted along ``x - x'`` so both
    values agree and the constant then makes them zero.
    """
    x = np.asarray(x, dtype=float)
    xp = np.asarray(x_prime, dtype=float)
    n = x.size
    d = x - xp
    cons = []
    for _ in range(m or n):
        G = rng.standard_normal((n, n))
        A = 0.5 * (G + G.T)
        a = rng.standard_normal(n)
        # f(x) - f(x') = x'Ax - x''Ax' + 2 a.(x - x')
        gap = x @ A @ x - xp @ A @ xp + 2 * a @ d
        a = a - gap / (2 * d @ d) * d
        cons.append(QuadraticConstraint(A, a, -(x @ A @ x + 2 * a @ x)))
    return QuadraticProgram(tuple(cons), Objective.ed(np.zeros(n)))


# --- checks reused by several examples ------------------------------------------------


def shadow_consistency(qp: QuadraticProgram, points: VarietyPoints, count: int, seed: int, x_tol: float = 1e-5):
    """Interior shadow points are exact with the right minimizer.

    Returns ``(failures, boundary)``: a list of offending ``(x, u, verdict)``
    and the number of Boundary verdicts (ambiguous, not counted as failures).
    """
    rng = np.random.default_rng(seed)
    S = master(qp)
    fails, boundary = [], 0
    for _ in range(count):
        x = points.points[rng.integers(len(points))]
        while True:
            lam = rng.uniform(-2.0, 2.0, qp.m)
            w = np.linalg.eigvalsh(S.pencil(lam))
            if w[0] > 1e-3:
                break
        u = shadow_point(qp, x, lam)
        c = check_exact_sdp(qp.ed(u))
        if c.verdict is Verdict.BOUNDARY:
            boundary += 1
        elif c.verdict is not Verdict.EXACT or np.abs(c.minimizer - x).max() > x_tol:
            fails.append((x, u, c.verdict))
    return fails, boundary


def voronoi_violations(qp: QuadraticProgram, points: VarietyPoints, grid) -> tuple[int, int, int]:
    """``(violations, exact, boundary)`` over the grid of ``u``."""
    bad = exact = boundary = 0
    for u in grid:
        c = check_exact_sdp(qp.ed(u))
        if c.verdict is Verdict.BOUNDARY:
            boundary += 1
            continue
        if c.verdict is Verdict.EXACT:
            exact += 1
            j, _ = points.nearest(u)
            if np.linalg.norm(c.minimizer - points.points[j]) > 1e-5:
                bad += 1
    return bad, exact, boundary


def on_five_point_facets(U, tol: float = 1e-6) -> np.ndarray:
    """Whether each sample lies on the Steiner quartic or one of the four planes."""
    U = np.atleast_2d(U)
    ok = implicit.relative_residuals(implicit.STEINER_QUARTIC.poly, U) <= tol
    for p in implicit.FIVE_POINT_PLANES:
        ok |= implicit.relative_residuals(p, U) <= tol
    return ok


# --- per-example verification ---------------------------------------------------------


def _verify_four_points(ex: ExampleDescriptor, seed: int) -> Report:
    r = Report(ex.name)
    u0 = np.zeros(2)
    c = check_exact_sdp(ex.qp.ed(u0))
    r.add("u=(0,0) is exact at the origin", c.exact and np.allclose(c.minimizer, 0, atol=1e-6), c.verdict.value)
    c = check_exact_sdp(ex.qp.ed([1.0, 1.0]))
    r.add("u=(1,1) is not exact", c.verdict is Verdict.NOT_EXACT, c.verdict.value)
    g = np.linspace(-1, 3, 15)
    grid = [np.array([a, b]) for a in g for b in g]
    bad, exact, bnd = voronoi_violations(ex.qp, ex.points, grid)
    r.add("exact minimizers are nearest points (15x15 grid)", bad == 0, f"{exact} exact, {bnd} boundary, {bad} violations")
    samples = sample_boundary(ex.qp, ex.points, 60, seed)
    ok = all(ex.points.nearest(s.u)[0] == int(s.param[0]) or abs(np.diff(ex.points.nearest(s.u)[1][:2])[0]) < 1e-9 for s in samples)
    r.add("shadow boundaries stay inside Voronoi cells", ok, f"{len(samples)} samples")
    return r


def _verify_maxcut(ex: ExampleDescriptor, seed: int) -> Report:
    r = Report(ex.name)
    c = check_exact_sdp(ex.qp)
    r.add("weights (1,2,3): exact, value -4", c.exact and abs(c.objective_value + 4) < 1e-6, f"{c.verdict.value}, {c.objective_value:.6g}")
    rng = np.random.default_rng(seed)
    agree = bnd = 0
    trials = 40
    for _ in range(trials):
        w = rng.standard_normal(3)
        cert = check_exact_sdp(maxcut_qp(w))
        if cert.verdict is Verdict.BOUNDARY:
            bnd += 1
        elif cert.exact == maxcut_oracle(w)[0]:
            agree += 1
    r.add("Laplacian oracle agreement", agree + bnd == trials, f"{agree}/{trials} agree, {bnd} boundary")
    r.add("boundary degree (n-1) 2^(n-1) = 8", degrees.maxcut_beta(3) == 8)
    return r


def _verify_eight_points(ex: ExampleDescriptor, seed: int) -> Report:
    r = Report(ex.name)
    fails, bnd = shadow_consistency(ex.qp, ex.points, 60, seed)
    r.add("interior shadow points are exact at their centre", not fails, f"{len(fails)} failures, {bnd} boundary")
    S = master(ex.qp)
    r.add("master spectrahedron is {lam_i < 1}", S.contains([0.99, 0.5, -3]) and not S.contains([1.01, 0, 0]))
    return r


def _verify_twisted_cubic(ex: ExampleDescriptor, seed: int) -> Report:
    r = Report(ex.name)
    samples = sample_boundary(ex.qp, ex.parametrization, 400, seed, lam_cap=ex.lam_cap)
    U = np.array([s.u for s in samples])
    g = implicit.TWISTED_CUBIC_8.poly
    worst = float(np.max(np.abs(g.eval_many(U)) / (1 + np.linalg.norm(U, axis=1)) ** 8))
    r.add("boundary samples vanish on the degree-8 polynomial", worst <= 1e-6, f"max scaled residual {worst:.2e}")
    try:
        d = implicit.minimal_vanishing_degree(U, 8)
    except implicit.NotFound:
        d = None
    r.add("minimal vanishing degree is 8", d == 8, f"found {d}")
    return r


def _verify_three_quadrics(ex: ExampleDescriptor, seed: int) -> Report:
    r = Report(ex.name)
    pts = cut_locus_samples(ex.qp, 25, seed)
    U = np.array([p.u for p in pts])
    worst = float(implicit.relative_residuals(implicit.THREE_QUADRICS_9.poly, U).max())
    r.add("cut-locus samples vanish on the degree-9 polynomial", worst <= 1e-5, f"{len(pts)} samples, max relative residual {worst:.2e}")
    return r


def _verify_two_hyperboloids(ex: ExampleDescriptor, seed: int) -> Report:
    r = Report(ex.name)
    samples = sample_boundary(ex.qp, ex.points, 100, seed, lam_cap=ex.lam_cap)
    f_ok = all(np.abs(ex.qp.constraints[i](s.x)) < 1e-8 for s in samples for i in range(ex.qp.m))
    det_ok = all(s.det_residual < 1e-8 and s.min_eig > -1e-9 for s in samples)
    r.add("boundary samples satisfy f(x)=0, det H=0, H>=0", f_ok and det_ok, f"{len(samples)} samples")
    fails, bnd = shadow_consistency(ex.qp, ex.points, 40, seed)
    r.add("interior shadow points are exact at their centre", not fails, f"{len(fails)} failures, {bnd} boundary")
    r.add("Segre degree of the two elliptic curves is 24", degrees.segre_degree(3, 1, 4, 1) == 24 == degrees.beta_ed(2, 3))
    return r


def _verify_six_points(ex: ExampleDescriptor, seed: int) -> Report:
    r = Report(ex.name)
    samples = sample_boundary(ex.qp, ex.points, 60, seed)
    det_ok = all(s.det_residual < 1e-8 and s.min_eig > -1e-9 for s in samples)
    r.add("boundary samples lie on det H = 0 with H >= 0", det_ok, f"{len(samples)} samples")
    fails, bnd = shadow_consistency(ex.qp, ex.points, 40, seed)
    r.add("interior shadow points are exact at their centre", not fails, f"{len(fails)} failures, {bnd} boundary")
    r.add("expected boundary degree 1*6*6 = 36", degrees.expected_degree(3, 3, 1, 6) == 36)
    return r


def _verify_five_points(ex: ExampleDescriptor, seed: int) -> Report:
    r = Report(ex.name)
    origin = VarietyPoints(ex.points.points[:1])
    samples = sample_boundary(ex.qp, origin, 100, seed)
    U = np.array([s.u for s in samples])
    ok = on_five_point_facets(U)
    r.add("origin shadow boundary lies on the Steiner quartic or a facet plane", ok.all(), f"{ok.sum()}/{len(ok)}")
    c = certify_at_point(ex.qp.ed(np.zeros(3)), np.zeros(3))
    r.add("origin certifies at u=0", c.exact, c.verdict.value)
    r.add("expected boundary degree 1*5*(4+4) = 40", degrees.expected_degree(3, 3, 2, 5) == 40)
    return r


def _verify_hyperbola(ex: ExampleDescriptor, seed: int) -> Report:
    r = Report(ex.name)
    cl = cut_locus_m1(ex.qp)
    planes = sorted((tuple(np.abs(v).round(12)), off) for v, off in cl.hyperplanes)
    r.add("cut-locus hyperplanes are u1=0 and u2=0", planes == [((0.0, 1.0), 0.0), ((1.0, 0.0), 0.0)], str(planes))
    mismatch = 0
    g = -4 + 0.4 * np.arange(20)
    for a in g:
        for b in g:
            u = np.array([a, b])
            c = check_exact_sdp(ex.qp.ed(u))
            if c.verdict is Verdict.BOUNDARY:
                continue
            expect_not = abs(a) < 0.05 or (abs(b) < 0.05 and abs(a) >= 2 - 0.05)
            mismatch += (c.verdict is Verdict.NOT_EXACT) != expect_not
    r.add("SDP verdicts match the cut locus on a 20x20 grid", mismatch == 0, f"{mismatch} mismatches")
    return r


def cut_locus_samples(qp: QuadraticProgram, count: int, seed: int = 0, spread: float = 0.7, half_length: float = 1.5, t_range: float = 1.2):
    """Cut-locus points of a twisted-cubic instance, by segment bisection.

    Segments are centred near random curve points and run in random
    directions; those without a jump in the minimizer are discarded.
    """
    rng = np.random.default_rng(seed)
    out = []
    attempts = 0
    while len(out) < count and attempts < 50 * count:
        attempts += 1
        t = rng.uniform(-t_range, t_range)
        u0 = twisted_cubic_curve(t) + spread * rng.standard_normal(3)
        w = rng.standard_normal(3)
        w /= np.linalg.norm(w)
        cp = locate_cut_point(qp, u0 - half_length * w, u0 + half_length * w)
        if cp is not None:
            out.append(cp)
    return out


# --- plot data -------------------------------------------------------------------------


def _plot_boundary(ex: ExampleDescriptor, seed: int) -> dict:
    source = ex.parametrization if ex.parametrization is not None else ex.points
    samples = sample_boundary(ex.qp, source, 400, seed, lam_cap=ex.lam_cap)
    data = {
        "example": ex.name,
        "boundary_u": [s.u.tolist() for s in samples],
        "boundary_x": [s.x.tolist() for s in samples],
    }
    if ex.points is not None:
        data["variety"] = ex.points.points.tolist()
    elif ex.parametrization is not None:
        ts = np.linspace(ex.parametrization.lower[0], ex.parametrization.upper[0], 200)
        data["variety"] = [ex.parametrization.func(np.array([t])).tolist() for t in ts]
    return data


def _plot_grid(ex: ExampleDescriptor, seed: int) -> dict:
    g = np.linspace(-1, 3, 41) if ex.qp.n == 2 and ex.name != "hyperbola-cutlocus" else np.linspace(-4, 4, 41)
    cells = []
    for a in g:
        for b in g:
            c = check_exact_sdp(ex.qp.ed([a, b]))
            cells.append({"u": [float(a), float(b)], "verdict": c.verdict.value,
                          "minimizer": None if c.minimizer is None else c.minimizer.tolist()})
    data = {"example": ex.name, "grid": cells}
    if ex.points is not None:
        data["variety"] = ex.points.points.tolist()
        data.update({k: v for k, v in _plot_boundary(ex, seed).items() if k.startswith("boundary")})
    return data


def _plot_maxcut(ex: ExampleDescriptor, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(400):
        w = rng.standard_normal(3)
        w /= np.linalg.norm(w)
        rows.append({"weights": w.tolist(), "exact": maxcut_oracle(w)[0]})
    return {"example": ex.name, "unit_sphere_samples": rows}


def _plot_three_quadrics(ex: ExampleDescriptor, seed: int) -> dict:
    pts = cut_locus_samples(ex.qp, 60, seed)
    return {"example": ex.name, "cut_locus_u": [p.u.tolist() for p in pts]}


# --- registry ---------------------------------------------------------------------------


def _build() -> dict[str, ExampleDescriptor]:
    fp = quadratic_program(FOUR_POINTS, 2)
    tc = quadratic_program(TWISTED_CUBIC, 3)
    tq = quadratic_program(THREE_QUADRICS, 3)
    sp = quadratic_program(SIX_POINTS, 3)
    fv = quadratic_program(FIVE_POINTS, 3)
    ep = quadratic_program(EIGHT_POINTS, 3)
    th = quadratic_program(TWO_HYPERBOLOIDS, 3)
    hy = quadratic_program(HYPERBOLA, 2)
    cubic = Parametrization(twisted_cubic_curve, [-1.5], [1.5])
    examples = [
        ExampleDescriptor("voronoi-four-points", "four points cut out by two conics; ED region inside the Voronoi cells",
                          fp, VarietyPoints.checked(fp, FOUR_POINTS_V), verify=_verify_four_points, plot=_plot_grid),
        ExampleDescriptor("maxcut-3", "Max-Cut on a triangle with weights (1, 2, 3)", maxcut_qp([1, 2, 3]),
                          verify=_verify_maxcut, plot=_plot_maxcut),
        ExampleDescriptor("eight-points", "the cube {x_i^2 = 1} in R^3", ep, VarietyPoints.checked(ep, EIGHT_POINTS_V),
                          verify=_verify_eight_points, plot=_plot_boundary),
        ExampleDescriptor("twisted-cubic", "twisted cubic from two quadrics; boundary of degree 8", tc,
                          parametrization=cubic, golden=("TwistedCubic8",), lam_cap=6.0,
                          verify=_verify_twisted_cubic, plot=_plot_boundary),
        ExampleDescriptor("three-quadrics", "twisted cubic from all three quadrics; region dense, boundary = cut locus", tq,
                          parametrization=cubic, golden=("ThreeQuadrics9",), verify=_verify_three_quadrics,
                          plot=_plot_three_quadrics),
        ExampleDescriptor("two-hyperboloids", "space quartic cut out by two hyperboloids", th,
                          curve_points(th, 200, seed=0), lam_cap=20.0, verify=_verify_two_hyperboloids, plot=_plot_boundary),
        ExampleDescriptor("six-points", "six points in R^3 cut out by four quadrics", sp, VarietyPoints.checked(sp, SIX_POINTS_V),
                          verify=_verify_six_points, plot=_plot_boundary),
        ExampleDescriptor("five-points", "five points in R^3 cut out by five quadrics; dual elliptope shadows", fv,
                          VarietyPoints.checked(fv, FIVE_POINTS_V), golden=("SteinerQuartic",),
                          verify=_verify_five_points, plot=_plot_boundary),
        ExampleDescriptor("hyperbola-cutlocus", "one quadric; region is the complement of the cut locus", hy,
                          verify=_verify_hyperbola, plot=_plot_grid),
    ]
    return {e.name: e for e in examples}


ALIASES = {"four-points": "voronoi-four-points", "maxcut": "maxcut-3", "hyperbola": "hyperbola-cutlocus"}

_CACHE: dict[str, ExampleDescriptor] | None = None


def examples() -> dict[str, ExampleDescriptor]:
    global _CACHE
    if _CACHE is None:
        _CACHE = _build()
    return _CACHE


def get(name: str) -> ExampleDescriptor:
    name = ALIASES.get(name, name)
    ex = examples()
    if name not in ex:
        raise KeyError(f"unknown example {name!r}; choose from {', '.join(sorted(ex))}")
    return ex[name]
