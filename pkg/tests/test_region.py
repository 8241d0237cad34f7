from __future__ import annotations

import math

import numpy as np
import pytest

from sdpexact import gallery
from sdpexact.exactness import Verdict, check_exact_sdp
from sdpexact.model import VarietyPoints, eval_constraints, hessian, quadratic_program
from sdpexact.region import (
    Kind,
    Parametrization,
    boundary_ray,
    cut_locus_m1,
    master,
    read_samples_u,
    sample_boundary,
    samples_to_csv,
    shadow_point,
    tangency_witness,
)


def test_master_pencil_twisted_cubic(twisted_cubic):
    S = master(twisted_cubic)
    for lam in [(0, 0), (0.3, -0.8), (-1, 0), (0, 2)]:
        assert S.det(lam) == pytest.approx(1 + lam[0] - lam[1] ** 2 / 4, abs=1e-12)
    assert S.contains((0, 0))


def test_master_cube_is_diagonal():
    qp = quadratic_program(["x1^2 - 1", "x2^2 - 1", "x3^2 - 1"], 3)
    S = master(qp)
    assert S.contains((0.9, -5, 0.99)) and not S.contains((1.01, 0, 0))


def test_lin_master_has_the_origin_on_its_boundary(twisted_cubic):
    S = master(twisted_cubic, Kind.LIN)
    assert not S.contains((0, 0))


def test_boundary_ray(twisted_cubic):
    S = master(twisted_cubic)
    assert boundary_ray(S, (-1, 0)) == pytest.approx(1.0)
    assert math.isinf(boundary_ray(S, (1, 0)))
    cube = master(quadratic_program(["x1^2 - 1", "x2^2 - 1"], 2))
    assert boundary_ray(cube, (1, 0)) == pytest.approx(1.0)


def test_shadow_points(twisted_cubic):
    assert np.allclose(shadow_point(twisted_cubic, [0, 0, 0], [-1, 0]), [0, 0.5, 0])
    x = np.array([0.5, 0.25, 0.125])
    assert np.allclose(shadow_point(twisted_cubic, x, [0, 0]), x)
    qp = quadratic_program(["x1^2 - 1"], 1)
    assert np.allclose(shadow_point(qp, [1.0], [1.0]), [0.0])


def test_twisted_cubic_samples_at_the_origin(twisted_cubic):
    p = Parametrization(lambda t: np.array([0.0, 0.0, 0.0]) * t[0], [0.0], [0.0])
    for s in sample_boundary(twisted_cubic, p, 20, seed=1, lam_cap=50):
        u1, u2, u3 = s.u
        assert abs(u1) < 1e-12
        assert abs(u3 ** 2 + 2 * u2 - 1) < 1e-9


def test_sample_invariants(twisted_cubic):
    p = Parametrization(gallery.twisted_cubic_curve, [-1.5], [1.5])
    samples = sample_boundary(twisted_cubic, p, 40, seed=3, lam_cap=6)
    assert len(samples) == 40
    S = master(twisted_cubic)
    for s in samples:
        assert np.abs(eval_constraints(twisted_cubic, s.x)).max() < 1e-12
        assert abs(S.det(s.lam)) < 1e-9
        assert np.linalg.eigvalsh(hessian(twisted_cubic, s.lam))[0] > -1e-9
        assert np.allclose(s.u, shadow_point(twisted_cubic, s.x, s.lam))


def test_four_point_samples_stay_in_voronoi_cells(four_points):
    V = VarietyPoints.checked(four_points, gallery.FOUR_POINTS_V)
    for s in sample_boundary(four_points, V, 60, seed=2):
        j, dist = V.nearest(s.u)
        own = np.linalg.norm(s.u - s.x)
        assert own <= dist[0] + 1e-9


def test_square_cell_samples():
    qp = quadratic_program(["x1^2 - 1", "x2^2 - 1"], 2)
    V = VarietyPoints.checked(qp, [[1, 1]])
    for s in sample_boundary(qp, V, 30, seed=0):
        # u = (1 - lam1, 1 - lam2) with max(lam) = 1
        assert np.allclose(s.u, 1 - s.lam)
        assert max(s.lam) == pytest.approx(1.0)


def test_sampling_is_seed_stable(twisted_cubic, monkeypatch):
    p = Parametrization(gallery.twisted_cubic_curve, [-1.5], [1.5])
    a = sample_boundary(twisted_cubic, p, 12, seed=7, lam_cap=6)
    monkeypatch.setenv("SDPEXACT_THREADS", "4")
    b = sample_boundary(twisted_cubic, p, 12, seed=7, lam_cap=6)
    assert samples_to_csv(a) == samples_to_csv(b)


def test_csv_round_trip(twisted_cubic):
    p = Parametrization(gallery.twisted_cubic_curve, [-1.5], [1.5])
    samples = sample_boundary(twisted_cubic, p, 5, seed=0, lam_cap=6)
    text = samples_to_csv(samples)
    assert text.splitlines()[0] == "index,x1,x2,x3,lam1,lam2,u1,u2,u3,det_residual"
    assert np.array_equal(read_samples_u(text), np.array([s.u for s in samples]))


def test_tangency_one_variable():
    w = tangency_witness(quadratic_program(["x1^2 - 1"], 1), [1.0], [-1.0])
    assert w.lam == pytest.approx([1.0]) and w.u == pytest.approx([0.0])
    assert w.bisector_residual == 0


def test_tangency_square():
    qp = quadratic_program(["x1^2 - 1", "x2^2 - 1"], 2)
    w = tangency_witness(qp, [1, 1], [-1, 1])
    assert np.allclose(w.lam, [1, 0]) and np.allclose(w.u, [0, 1])
    assert w.bisector_residual < 1e-12


def test_tangency_generic_instances():
    rng = np.random.default_rng(11)
    for _ in range(10):
        x, xp = rng.uniform(-2, 2, 2), rng.uniform(-2, 2, 2)
        w = tangency_witness(gallery.quadrics_through(rng, x, xp), x, xp)
        scale = 1 + np.linalg.norm(w.u) ** 2
        assert max(w.bisector_residual, w.det_residual, w.normal_angle_residual) <= 1e-7 * scale


def test_cut_locus_hyperbola():
    qp = quadratic_program(["x1^2 - x2^2 - 1"], 2)
    cl = cut_locus_m1(qp)
    normals = sorted(tuple(np.abs(v).round(12)) for v, off in cl.hyperplanes)
    assert normals == [(0.0, 1.0), (1.0, 0.0)]
    assert cl.contains([0, 0.7]) and cl.contains([2.5, 0]) and not cl.contains([1.5, 0])


def test_cut_locus_circle_is_the_centre():
    cl = cut_locus_m1(quadratic_program(["x1^2 + x2^2 - 1"], 2))
    assert cl.contains([0, 0]) and not cl.contains([0.3, 0]) and not cl.contains([0, 0.3])


def test_cut_locus_ellipse_medial_segment():
    cl = cut_locus_m1(quadratic_program(["x1^2 + 4*x2^2 - 4"], 2))
    assert cl.contains([1.4, 0]) and cl.contains([-1.4, 0])
    assert not cl.contains([1.6, 0]) and not cl.contains([0, 0.5])


def test_hyperbola_verdicts_follow_the_cut_locus():
    qp = quadratic_program(["x1^2 - x2^2 - 1"], 2)
    assert check_exact_sdp(qp.ed([1.8, 0])).exact
    assert check_exact_sdp(qp.ed([2.2, 0])).verdict is Verdict.NOT_EXACT
    assert check_exact_sdp(qp.ed([0, 1])).verdict is Verdict.NOT_EXACT


def test_locate_cut_point_on_the_three_quadrics():
    qp = quadratic_program(gallery.THREE_QUADRICS, 3)
    (cp,) = gallery.cut_locus_samples(qp, 1, seed=0)
    assert cp.polished
    # equidistant from two distinct variety points
    assert np.linalg.norm(cp.u - cp.x_a) == pytest.approx(np.linalg.norm(cp.u - cp.x_b), abs=1e-9)
    assert np.linalg.norm(cp.x_a - cp.x_b) > 1e-3
    assert np.abs(eval_constraints(qp, cp.x_a)).max() < 1e-10
