from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdpexact.model import (
    DimensionMismatch,
    NotOnVariety,
    Objective,
    ProblemSchemaError,
    QuadraticConstraint,
    VarietyPoints,
    cost_matrix,
    embed_shor,
    eval_constraints,
    hessian,
    jacobian,
    lagrangian,
    parse_quadric,
    problem_from_dict,
    problem_to_dict,
    quadratic_program,
    stationarity_residual,
)


@pytest.mark.parametrize("x, expected", [((2, 2), (0, 0)), ((0, 0), (0, 0)), ((1, 1), (1, 0))])
def test_eval_constraints_four_points(four_points, x, expected):
    assert np.allclose(eval_constraints(four_points, x), expected)


def test_jacobian_twisted_cubic_origin(twisted_cubic):
    J = jacobian(twisted_cubic, [0, 0, 0])
    assert np.allclose(J[:, 0], [0, 1, 0]) and np.allclose(J[:, 1], [0, 0, 1])


def test_jacobian_diagonal():
    qp = quadratic_program(["x1^2 - 1", "x2^2 - 1"], 2)
    assert np.allclose(jacobian(qp, [1, 1]), np.diag([2, 2]))


def test_jacobian_finite_difference(four_points):
    rng = np.random.default_rng(1)
    for _ in range(5):
        x = rng.standard_normal(2)
        h = 1e-6
        fd = np.column_stack([(eval_constraints(four_points, x + h * e) - eval_constraints(four_points, x - h * e)) / (2 * h) for e in np.eye(2)]).T
        assert np.allclose(jacobian(four_points, x), fd, atol=1e-6)


@pytest.mark.parametrize("lam, det", [((0, 0), 1.0), ((-1, 0), 0.0), ((0, 2), 0.0), ((0.5, 1), 1.25)])
def test_hessian_determinant_twisted_cubic(twisted_cubic, lam, det):
    # det(H) = 1 + lam1 - lam2^2 / 4
    assert np.linalg.det(hessian(twisted_cubic, lam)) == pytest.approx(det, abs=1e-12)


def test_hessian_is_half_the_lagrangian_hessian(four_points):
    lam = np.array([0.3, -0.7])
    x = np.array([0.2, 0.4])
    h = 1e-4
    fd = np.empty((2, 2))
    for i, ei in enumerate(np.eye(2)):
        for j, ej in enumerate(np.eye(2)):
            fd[i, j] = (
                lagrangian(four_points, lam, x + h * ei + h * ej) - lagrangian(four_points, lam, x + h * ei - h * ej)
                - lagrangian(four_points, lam, x - h * ei + h * ej) + lagrangian(four_points, lam, x - h * ei - h * ej)
            ) / (4 * h * h)
    assert np.allclose(fd, 2 * hessian(four_points, lam), atol=1e-5)


def test_stationarity_vanishes_at_kkt_point():
    qp = quadratic_program(["x1^2 - 1"], 1, Objective.ed([0.0]))
    assert np.allclose(stationarity_residual(qp, [1.0], [1.0]), 0)


def test_shor_embedding_one_variable():
    qp = quadratic_program(["x1^2 - 1"], 1)
    P = embed_shor(qp)
    assert np.allclose(P.A[1], [[-1, 0], [0, 1]])
    assert np.allclose(P.b, [1, 0])


def test_cost_matrices():
    assert np.allclose(cost_matrix(Objective.ed([0, 0])), np.diag([0, 1, 1]))
    M = cost_matrix(Objective.lin([2.0, -3.0]))
    assert np.allclose(M[0], [0, 2, -3]) and np.allclose(M[1:, 1:], 0)


def test_parse_quadric_coefficients():
    f = parse_quadric("x1*x2 - 2*x2^2 + 2*x2", 2)
    assert np.allclose(f.A, [[0, 0.5], [0.5, -2]])
    assert np.allclose(f.a, [0, 1])  # half the linear part
    assert f.alpha == 0
    assert parse_quadric("3 - x_1**2", 1).alpha == 3


@pytest.mark.parametrize("bad", ["", "x1^3", "x4", "x1 ^ ^2", "(x1)"])
def test_parse_quadric_rejects(bad):
    with pytest.raises(ValueError):
        parse_quadric(bad, 2)


def test_dimension_checks(four_points):
    with pytest.raises(DimensionMismatch):
        eval_constraints(four_points, [1, 2, 3])
    with pytest.raises(DimensionMismatch):
        hessian(four_points, [1.0])


def test_variety_points(four_points):
    V = VarietyPoints.checked(four_points, [[0, 0], [0, 1], [1, 0], [2, 2]])
    assert V.nearest([1.9, 1.7])[0] == 3
    with pytest.raises(NotOnVariety):
        VarietyPoints.checked(four_points, [[1, 1]])


def test_problem_round_trip(four_points):
    d = problem_to_dict(four_points.ed([0.5, 1.0]), [[0, 0]])
    qp, pts = problem_from_dict(d)
    assert qp.objective.kind == "ed" and np.allclose(qp.objective.u, [0.5, 1.0])
    assert np.allclose(pts, [[0, 0]])
    for f, g in zip(qp.constraints, four_points.constraints):
        assert np.allclose(f.A, g.A) and np.allclose(f.a, g.a) and f.alpha == g.alpha


def test_problem_accepts_polynomial_strings():
    qp, pts = problem_from_dict({"n": 2, "constraints": ["x1^2 - 1"], "objective": {"type": "lin", "u": [1, 0]}})
    assert qp.m == 1 and qp.objective.kind == "lin" and pts is None


@pytest.mark.parametrize(
    "data, path",
    [
        ([], "$"),
        ({"constraints": []}, "$.n"),
        ({"n": 2, "constraints": [{"A": [[1, 0], [0, 1]], "a": [0, 0]}]}, "$.constraints[0].alpha"),
        ({"n": 2, "constraints": [{"A": [[1, 2], [0, 1]], "a": [0, 0], "alpha": 0}]}, "$.constraints[0].A"),
        ({"n": 2, "constraints": ["x1^2"], "objective": {"type": "ed", "u": [1]}}, "$.objective.u"),
        ({"n": 2, "constraints": ["x1^2"], "objective": {"type": "foo"}}, "$.objective.type"),
        ({"n": 2, "constraints": ["x1^2"], "points": [[1, 2], [3]]}, "$.points[1]"),
    ],
)
def test_problem_schema_errors(data, path):
    with pytest.raises(ProblemSchemaError) as err:
        problem_from_dict(data)
    assert err.value.path == path


coef = st.floats(-5, 5, allow_nan=False)


@settings(max_examples=50, deadline=None)
@given(st.lists(coef, min_size=6, max_size=6), st.lists(coef, min_size=2, max_size=2))
def test_parsed_polynomial_evaluates_like_the_string(c, x):
    text = f"{c[0]}*x1^2 + {c[1]}*x1*x2 + {c[2]}*x2^2 + {c[3]}*x1 + {c[4]}*x2 + {c[5]}".replace("+ -", "- ")
    f = parse_quadric(text, 2)
    x1, x2 = x
    direct = c[0] * x1 * x1 + c[1] * x1 * x2 + c[2] * x2 * x2 + c[3] * x1 + c[4] * x2 + c[5]
    assert f(np.array(x)) == pytest.approx(direct, abs=1e-9 * (1 + abs(direct)))


def test_constraint_gradient_matches_definition():
    f = QuadraticConstraint.from_coefficients([[1, 2], [2, 0]], [1, -1], 3)
    x = np.array([0.5, -1.5])
    h = 1e-6
    fd = [(f(x + h * e) - f(x - h * e)) / (2 * h) for e in np.eye(2)]
    assert np.allclose(f.gradient(x), fd, atol=1e-6)
