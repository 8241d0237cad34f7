"""Quadratic programs with quadratic equality constraints.

Every constraint is stored as ``f(x) = x^T A x + 2 a^T x + alpha``; the
objective as ``g(x) = x^T C x + c^T x``.  The Shor embedding maps both into
``(n+1) x (n+1)`` symmetric matrices so that ``M . X = value`` whenever
``X = (1, x)(1, x)^T``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .numkit import as_sym
from .sdp import SdpProblem


class DimensionMismatch(ValueError):
    pass


class NotOnVariety(ValueError):
    pass


@dataclass(frozen=True)
class QuadraticConstraint:
    A: np.ndarray
    a: np.ndarray
    alpha: float

    def __post_init__(self):
        A = as_sym(self.A)
        a = np.array(self.a, dtype=float).reshape(-1)
        if a.size != A.shape[0]:
            raise DimensionMismatch(f"linear part has length {a.size}, quadratic part is {A.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "alpha", float(self.alpha))

    @classmethod
    def from_coefficients(cls, quadratic, linear, constant) -> "QuadraticConstraint":
        """Build from ``x^T Q x + l^T x + k`` as written (linear part halved)."""
        return cls(quadratic, 0.5 * np.asarray(linear, dtype=float), constant)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(x @ self.A @ x + 2.0 * self.a @ x + self.alpha)

    def gradient(self, x) -> np.ndarray:
        return 2.0 * (self.A @ np.asarray(x, dtype=float) + self.a)

    def scaled(self, s: float) -> "QuadraticConstraint":
        return QuadraticConstraint(s * self.A, s * self.a, s * self.alpha)


@dataclass(frozen=True)
class Objective:
    """``g(x) = x^T C x + c^T x``; ``kind`` records where it came from.

    ``ed`` objectives drop the constant ``|u|^2``; ``lin`` objectives use
    ``2 u^T x`` so the embedded cost matrix has ``u`` in its first row.
    """

    C: np.ndarray
    c: np.ndarray
    kind: str = "general"
    u: np.ndarray | None = None

    def __post_init__(self):
        C = as_sym(self.C)
        c = np.array(self.c, dtype=float).reshape(-1)
        if c.size != C.shape[0]:
            raise DimensionMismatch("objective C and c disagree in size")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "c", c)
        if self.u is not None:
            object.__setattr__(self, "u", np.array(self.u, dtype=float).reshape(-1))

    @classmethod
    def ed(cls, u) -> "Objective":
        u = np.array(u, dtype=float).reshape(-1)
        return cls(np.eye(u.size), -2.0 * u, "ed", u)

    @classmethod
    def lin(cls, u) -> "Objective":
        u = np.array(u, dtype=float).reshape(-1)
        return cls(np.zeros((u.size, u.size)), 2.0 * u, "lin", u)

    @property
    def constant(self) -> float:
        """Constant dropped from the objective (``|u|^2`` for ED)."""
        if self.kind == "ed":
            return float(self.u @ self.u)
        return 0.0

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(x @ self.C @ x + self.c @ x)


@dataclass(frozen=True)
class QuadraticProgram:
    constraints: tuple[QuadraticConstraint, ...]
    objective: Objective
    n: int = field(init=False)

    def __post_init__(self):
        cons = tuple(self.constraints)
        object.__setattr__(self, "constraints", cons)
        n = self.objective.C.shape[0]
        for i, f in enumerate(cons):
            if f.n != n:
                raise DimensionMismatch(f"constraint {i} lives in R^{f.n}, objective in R^{n}")
        object.__setattr__(self, "n", n)

    @property
    def m(self) -> int:
        return len(self.constraints)

    def with_objective(self, objective: Objective) -> "QuadraticProgram":
        return QuadraticProgram(self.constraints, objective)

    def ed(self, u) -> "QuadraticProgram":
        return self.with_objective(Objective.ed(u))

    def lin(self, u) -> "QuadraticProgram":
        return self.with_objective(Objective.lin(u))

    def is_homogeneous(self) -> bool:
        """No linear terms anywhere and at least one nonzero constant."""
        return (
            not np.any(self.objective.c)
            and all(not np.any(f.a) for f in self.constraints)
            and any(f.alpha != 0.0 for f in self.constraints)
        )


def _check_x(qp: QuadraticProgram, x) -> np.ndarray:
    x = np.array(x, dtype=float).reshape(-1)
    if x.size != qp.n:
        raise DimensionMismatch(f"point has length {x.size}, expected {qp.n}")
    return x


def eval_constraints(qp: QuadraticProgram, x) -> np.ndarray:
    x = _check_x(qp, x)
    return np.array([f(x) for f in qp.constraints])


def jacobian(qp: QuadraticProgram, x) -> np.ndarray:
    """n x m matrix whose column j is the gradient of f_j at x."""
    x = _check_x(qp, x)
    if qp.m == 0:
        return np.zeros((qp.n, 0))
    return np.column_stack([f.gradient(x) for f in qp.constraints])


def hessian(qp: QuadraticProgram, lam) -> np.ndarray:
    """``H(lam) = C - sum lam_i A_i`` (half the x-Hessian of the Lagrangian)."""
    lam = np.array(lam, dtype=float).reshape(-1)
    if lam.size != qp.m:
        raise DimensionMismatch(f"multiplier has length {lam.size}, expected {qp.m}")
    H = qp.objective.C.copy()
    for li, f in zip(lam, qp.constraints):
        H -= li * f.A
    return H


def lagrangian(qp: QuadraticProgram, lam, x) -> float:
    return qp.objective(x) - float(np.dot(lam, eval_constraints(qp, x)))


def stationarity_residual(qp: QuadraticProgram, x, lam) -> np.ndarray:
    """``c/2 - sum lam_i a_i + H(lam) x``; zero at a KKT point."""
    x = _check_x(qp, x)
    lam = np.asarray(lam, dtype=float)
    r = 0.5 * qp.objective.c + hessian(qp, lam) @ x
    for li, f in zip(lam, qp.constraints):
        r -= li * f.a
    return r


def constraint_matrix(f: QuadraticConstraint) -> np.ndarray:
    n = f.n
    M = np.empty((n + 1, n + 1))
    M[0, 0] = f.alpha
    M[0, 1:] = M[1:, 0] = f.a
    M[1:, 1:] = f.A
    return M


def cost_matrix(obj: Objective) -> np.ndarray:
    n = obj.C.shape[0]
    M = np.empty((n + 1, n + 1))
    M[0, 0] = 0.0
    M[0, 1:] = M[1:, 0] = 0.5 * obj.c
    M[1:, 1:] = obj.C
    return M


def embed_shor(qp: QuadraticProgram) -> SdpProblem:
    """Shor relaxation: constraint 0 is ``X[0,0] = 1``, then ``A_i . X = 0``."""
    d = qp.n + 1
    E00 = np.zeros((d, d))
    E00[0, 0] = 1.0
    A = [E00] + [constraint_matrix(f) for f in qp.constraints]
    b = np.zeros(qp.m + 1)
    b[0] = 1.0
    return SdpProblem(cost_matrix(qp.objective), A, b)


def embed_homogeneous(qp: QuadraticProgram) -> SdpProblem:
    """``n x n`` relaxation ``min C . Z, A_i . Z = -alpha_i`` of a homogeneous QP.

    A rank-one optimum ``z z^T`` represents the minimizer pair ``+-z``.
    """
    if not qp.is_homogeneous():
        raise ValueError("QP has linear terms or only zero constants")
    return SdpProblem(
        qp.objective.C,
        [f.A for f in qp.constraints],
        np.array([-f.alpha for f in qp.constraints]),
    )


@dataclass(frozen=True)
class VarietyPoints:
    points: np.ndarray  # shape (k, n)
    residual_tol: float = 1e-8

    @classmethod
    def checked(cls, qp: QuadraticProgram, points, residual_tol: float = 1e-8) -> "VarietyPoints":
        P = np.array(points, dtype=float).reshape(-1, qp.n)
        for i, x in enumerate(P):
            r = np.abs(eval_constraints(qp, x)).max(initial=0.0)
            if r > residual_tol:
                raise NotOnVariety(f"point {i} = {x.tolist()} has residual {r:.3g}")
        return cls(P, residual_tol)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def nearest(self, u) -> tuple[int, np.ndarray]:
        """Index of the nearest point and the sorted distances."""
        dist = np.linalg.norm(self.points - np.asarray(u, dtype=float), axis=1)
        return int(np.argmin(dist)), np.sort(dist)


# --- polynomial strings --------------------------------------------------------

# a signed exponent such as 1e-5 belongs to its number, not a new term
_TERM = re.compile(r"([+-]?)((?:[0-9.]+[eE][+-]?\d+|[^+-])+)")
_FACTOR = re.compile(r"^(?:(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+)|x_?(\d+)(?:(?:\^|\*\*)(\d+))?)$")


def parse_quadric(text: str, n: int) -> QuadraticConstraint:
    """Parse a quadratic polynomial such as ``"x1*x2 - 2*x2^2 + 2*x2"``.

    Variables are ``x1..xn`` (``x_1`` also accepted); factors are joined by
    ``*``; powers use ``^`` or ``**``.  No parentheses.
    """
    src = text.replace(" ", "").replace("**", "^")
    if not src:
        raise ValueError("empty polynomial")
    Q = np.zeros((n, n))
    lin = np.zeros(n)
    const = 0.0
    pos = 0
    for match in _TERM.finditer(src):
        if match.start() != pos:
            raise ValueError(f"cannot parse {text!r} near position {pos}")
        pos = match.end()
        sign = -1.0 if match.group(1) == "-" else 1.0
        coef = sign
        exps: list[int] = []
        for factor in match.group(2).split("*"):
            fm = _FACTOR.match(factor)
            if fm is None:
                raise ValueError(f"bad factor {factor!r} in {text!r}")
            if fm.group(1) is not None:
                coef *= float(fm.group(1))
            else:
                var = int(fm.group(2)) - 1
                if not 0 <= var < n:
                    raise ValueError(f"variable x{var + 1} out of range for n={n}")
                exps.extend([var] * int(fm.group(3) or 1))
        if len(exps) == 0:
            const += coef
        elif len(exps) == 1:
            lin[exps[0]] += coef
        elif len(exps) == 2:
            i, j = exps
            if i == j:
                Q[i, i] += coef
            else:
                Q[i, j] += 0.5 * coef
                Q[j, i] += 0.5 * coef
        else:
            raise ValueError(f"term of degree {len(exps)} in {text!r}")
    if pos != len(src):
        raise ValueError(f"trailing input in {text!r}")
    return QuadraticConstraint.from_coefficients(Q, lin, const)


def quadratic_program(polys: Sequence[str], n: int, objective: Objective | None = None) -> QuadraticProgram:
    cons = tuple(parse_quadric(p, n) for p in polys)
    return QuadraticProgram(cons, objective if objective is not None else Objective.ed(np.zeros(n)))


# --- problem files ------------------------------------------------------------------


class ProblemSchemaError(ValueError):
    """Malformed problem data; ``path`` points at the offending JSON node."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _matrix(node, path: str, n: int) -> np.ndarray:
    try:
        M = np.array(node, dtype=float)
    except (TypeError, ValueError):
        raise ProblemSchemaError(path, "expected a numeric matrix") from None
    if M.shape != (n, n):
        raise ProblemSchemaError(path, f"expected shape ({n}, {n}), got {M.shape}")
    if not np.allclose(M, M.T, rtol=0, atol=1e-12 * max(1.0, np.abs(M).max())):
        raise ProblemSchemaError(path, "matrix is not symmetric")
    return M


def _vector(node, path: str, n: int) -> np.ndarray:
    try:
        v = np.array(node, dtype=float)
    except (TypeError, ValueError):
        raise ProblemSchemaError(path, "expected a numeric vector") from None
    if v.shape != (n,):
        raise ProblemSchemaError(path, f"expected length {n}, got shape {v.shape}")
    return v


def problem_from_dict(data) -> tuple[QuadraticProgram, np.ndarray | None]:
    """Build a QP (and optional variety points) from decoded problem JSON.

    Constraints are given either as ``{"A", "a", "alpha"}`` blocks (``a`` is
    half the linear part) or as polynomial strings such as ``"x1^2 - 1"``.
    """
    if not isinstance(data, dict):
        raise ProblemSchemaError("$", "expected an object")
    n = data.get("n")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ProblemSchemaError("$.n", "expected a positive integer")
    cons_node = data.get("constraints")
    if not isinstance(cons_node, list):
        raise ProblemSchemaError("$.constraints", "expected a list")
    cons = []
    for i, c in enumerate(cons_node):
        path = f"$.constraints[{i}]"
        if isinstance(c, str):
            try:
                cons.append(parse_quadric(c, n))
            except ValueError as exc:
                raise ProblemSchemaError(path, str(exc)) from None
            continue
        if not isinstance(c, dict):
            raise ProblemSchemaError(path, "expected an object or a polynomial string")
        for key in ("A", "a", "alpha"):
            if key not in c:
                raise ProblemSchemaError(f"{path}.{key}", "missing")
        try:
            alpha = float(c["alpha"])
        except (TypeError, ValueError):
            raise ProblemSchemaError(f"{path}.alpha", "expected a number") from None
        cons.append(QuadraticConstraint(_matrix(c["A"], f"{path}.A", n), _vector(c["a"], f"{path}.a", n), alpha))

    obj = data.get("objective", {"type": "ed", "u": [0.0] * n})
    if not isinstance(obj, dict):
        raise ProblemSchemaError("$.objective", "expected an object")
    kind = obj.get("type")
    if kind in ("ed", "lin"):
        u = _vector(obj.get("u"), "$.objective.u", n)
        objective = Objective.ed(u) if kind == "ed" else Objective.lin(u)
    elif kind == "general":
        objective = Objective(_matrix(obj.get("C"), "$.objective.C", n), _vector(obj.get("c", [0.0] * n), "$.objective.c", n))
    else:
        raise ProblemSchemaError("$.objective.type", "expected 'ed', 'lin' or 'general'")
    qp = QuadraticProgram(tuple(cons), objective)

    points = None
    if "points" in data:
        node = data["points"]
        if not isinstance(node, list):
            raise ProblemSchemaError("$.points", "expected a list of points")
        points = np.array([_vector(p, f"$.points[{k}]", n) for k, p in enumerate(node)]).reshape(-1, n)
    return qp, points


def problem_to_dict(qp: QuadraticProgram, points=None) -> dict:
    obj = qp.objective
    if obj.kind in ("ed", "lin"):
        objective = {"type": obj.kind, "u": obj.u.tolist()}
    else:
        objective = {"type": "general", "C": obj.C.tolist(), "c": obj.c.tolist()}
    out = {
        "n": qp.n,
        "constraints": [{"A": f.A.tolist(), "a": f.a.tolist(), "alpha": f.alpha} for f in qp.constraints],
        "objective": objective,
    }
    if points is not None:
        out["points"] = np.asarray(points, dtype=float).tolist()
    return out
