"""Dense multivariate polynomials and numerical implicitization.

``vanishing_dimension`` looks for polynomials of a given degree that vanish
on a point cloud by computing the nullspace of the monomial evaluation
matrix.  Reference boundary polynomials for the packaged examples live at
the bottom of the module.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from numbers import Rational
from typing import NamedTuple

import numpy as np


class InsufficientSamples(ValueError):
    pass


class NotFound(LookupError):
    pass


Exponent = tuple[int, ...]


def monomials(nvars: int, degree: int) -> list[Exponent]:
    """Exponents of total degree ``<= degree``, graded, then reverse-lex inside a degree."""
    out: list[Exponent] = []
    for d in range(degree + 1):
        block = [
            e for e in itertools.product(range(d + 1), repeat=nvars) if sum(e) == d
        ]
        block.sort(reverse=True)
        out.extend(block)
    return out


@dataclass(frozen=True)
class DensePolynomial:
    nvars: int
    terms: dict[Exponent, object]  # coefficients: int, Fraction or float

    def __post_init__(self):
        clean = {}
        for e, c in self.terms.items():
            e = tuple(int(k) for k in e)
            if len(e) != self.nvars or min(e, default=0) < 0:
                raise ValueError(f"bad exponent {e} for {self.nvars} variables")
            if c != 0:
                clean[e] = c
        object.__setattr__(self, "terms", clean)

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def __call__(self, u):
        u = list(u)
        if len(u) != self.nvars:
            raise ValueError(f"expected {self.nvars} coordinates, got {len(u)}")
        if all(isinstance(v, Rational) for v in u) and all(isinstance(c, Rational) for c in self.terms.values()):
            total = Fraction(0)
            for e, c in self.terms.items():
                term = Fraction(c)
                for v, k in zip(u, e):
                    term *= Fraction(v) ** k
                total += term
            return total
        return float(self.eval_many(np.array([u], dtype=float))[0])

    def eval_many(self, U) -> np.ndarray:
        U = np.atleast_2d(np.asarray(U, dtype=float))
        if U.shape[1] != self.nvars:
            raise ValueError(f"expected {self.nvars} columns, got {U.shape[1]}")
        out = np.zeros(U.shape[0])
        for e, c in self.terms.items():
            out += float(c) * np.prod(U ** np.array(e), axis=1)
        return out

    def abs_scale(self, U) -> np.ndarray:
        """``sum |c_a| |u^a|`` per row; the natural size of the evaluation."""
        U = np.abs(np.atleast_2d(np.asarray(U, dtype=float)))
        out = np.zeros(U.shape[0])
        for e, c in self.terms.items():
            out += abs(float(c)) * np.prod(U ** np.array(e), axis=1)
        return out

    def __mul__(self, other: "DensePolynomial") -> "DensePolynomial":
        if other.nvars != self.nvars:
            raise ValueError("variable count mismatch")
        out: dict[Exponent, object] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return DensePolynomial(self.nvars, out)

    def __add__(self, other: "DensePolynomial") -> "DensePolynomial":
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return DensePolynomial(self.nvars, out)

    def scaled(self, s) -> "DensePolynomial":
        return DensePolynomial(self.nvars, {e: s * c for e, c in self.terms.items()})

    def normalized(self) -> "DensePolynomial":
        """Float copy whose largest-magnitude coefficient is exactly 1."""
        if not self.terms:
            return self
        big = max(self.terms, key=lambda e: (abs(float(self.terms[e])), sum(e), e))
        top = float(self.terms[big])
        return DensePolynomial(self.nvars, {e: float(c) / top for e, c in self.terms.items()})

    def rationalized(self, max_den: int = 10**6) -> "DensePolynomial":
        """Coefficients replaced by nearby fractions (display only)."""
        return DensePolynomial(
            self.nvars, {e: Fraction(float(c)).limit_denominator(max_den) for e, c in self.terms.items()}
        )

    def to_json(self) -> str:
        terms = []
        for e in sorted(self.terms, key=lambda e: (-sum(e), tuple(-k for k in e))):
            c = self.terms[e]
            if isinstance(c, Fraction):
                c = c.numerator if c.denominator == 1 else str(c)
            elif isinstance(c, (int, np.integer)):
                c = int(c)
            else:
                c = float(c)
            terms.append({"exp": list(e), "coef": c})
        return json.dumps({"nvars": self.nvars, "terms": terms})

    @classmethod
    def from_json(cls, text: str) -> "DensePolynomial":
        data = json.loads(text)
        terms = {}
        for t in data["terms"]:
            c = t["coef"]
            if isinstance(c, str):
                c = Fraction(c)
            terms[tuple(t["exp"])] = c
        return cls(int(data["nvars"]), terms)

    def __str__(self) -> str:
        parts = []
        for e in sorted(self.terms, key=lambda e: (-sum(e), tuple(-k for k in e))):
            c = self.terms[e]
            mono = "*".join(f"u{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k)
            parts.append(f"{c}" if not mono else f"{c}*{mono}")
        return " + ".join(parts) if parts else "0"


_TEX_TERM = re.compile(r"([+-]?)(\d*)((?:u_?\d+(?:\^\{?\d+\}?)?)*)")
_TEX_VAR = re.compile(r"u_?(\d+)(?:\^\{?(\d+)\}?)?")


def parse_polynomial(text: str, nvars: int) -> DensePolynomial:
    """Parse integer polynomials written like ``64u_2^6u_3^2 - 3u_1 + 4``."""
    src = re.sub(r"\\\\|\s+|\*", "", text).rstrip(".")
    terms: dict[Exponent, int] = {}
    pos = 0
    while pos < len(src):
        m = _TEX_TERM.match(src, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"cannot parse polynomial near {src[pos:pos + 20]!r}")
        pos = m.end()
        sign, coef, mono = m.groups()
        if not coef and not mono:
            raise ValueError(f"empty term near position {pos}")
        c = int(coef) if coef else 1
        if sign == "-":
            c = -c
        e = [0] * nvars
        for v, p in _TEX_VAR.findall(mono):
            k = int(v) - 1
            if not 0 <= k < nvars:
                raise ValueError(f"variable u_{v} out of range")
            e[k] += int(p) if p else 1
        terms[tuple(e)] = terms.get(tuple(e), 0) + c
    return DensePolynomial(nvars, terms)


def poly_eval(p: DensePolynomial, u):
    return p(u)


# --- interpolation -------------------------------------------------------------


class VanishingResult(NamedTuple):
    nullity: int
    smallest_singular_values: np.ndarray  # relative to the largest, ascending
    candidate: DensePolynomial | None


def _box(U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = U.min(axis=0), U.max(axis=0)
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    half[half == 0.0] = 1.0
    return center, half


def _unscale(coef: np.ndarray, monos: list[Exponent], center, half) -> DensePolynomial:
    """Rewrite ``sum c_a s^a`` with ``s = (u - center) / half`` in the variables ``u``."""
    n = len(center)
    lin = []
    for i in range(n):
        e1 = tuple(1 if k == i else 0 for k in range(n))
        lin.append(DensePolynomial(n, {e1: 1.0 / half[i], (0,) * n: -center[i] / half[i]}))
    powers = [[DensePolynomial(n, {(0,) * n: 1.0})] for _ in range(n)]
    out = DensePolynomial(n, {})
    for c, e in zip(coef, monos):
        if c == 0.0:
            continue
        term = DensePolynomial(n, {(0,) * n: float(c)})
        for i, k in enumerate(e):
            while len(powers[i]) <= k:
                powers[i].append(powers[i][-1] * lin[i])
            if k:
                term = term * powers[i][k]
        out = out + term
    return out


def vanishing_dimension(samples, degree: int, threshold: float = 1e-8) -> VanishingResult:
    """Dimension of the space of degree-``degree`` polynomials vanishing on ``samples``.

    Samples are mapped affinely into ``[-1, 1]^n`` and the columns of the
    evaluation matrix are normalized before the singular value decomposition.
    The nullity counts singular values below ``threshold`` times the largest.
    When it is positive, the right singular vector of the smallest singular
    value, mapped back to the original coordinates, is returned as the
    candidate.
    """
    U = np.atleast_2d(np.asarray(samples, dtype=float))
    k, n = U.shape
    ncols = comb(n + degree, degree)
    if k < 2 * ncols:
        raise InsufficientSamples(f"degree {degree} in {n} variables needs {2 * ncols} samples, got {k}")
    center, half = _box(U)
    S = (U - center) / half
    monos = monomials(n, degree)
    E = np.array(monos)
    M = np.prod(S[:, None, :] ** E[None, :, :], axis=2)
    norms = np.linalg.norm(M, axis=0)
    norms[norms == 0.0] = 1.0
    _, sv, Vt = np.linalg.svd(M / norms, full_matrices=False)
    rel = sv / sv[0]
    nullity = int(np.sum(rel < threshold))
    candidate = None
    if nullity >= 1:
        coef = Vt[-1] / norms
        candidate = _unscale(coef, monos, center, half).normalized()
    return VanishingResult(nullity, rel[::-1][: min(8, rel.size)], candidate)


def minimal_vanishing_degree(samples, d_max: int, threshold: float = 1e-8) -> int:
    """Smallest degree ``<= d_max`` with a vanishing polynomial; ``NotFound`` otherwise."""
    if d_max > 10:
        raise ValueError("d_max is capped at 10")
    for d in range(1, d_max + 1):
        if vanishing_dimension(samples, d, threshold).nullity >= 1:
            return d
    raise NotFound(f"no vanishing polynomial of degree <= {d_max}")


# --- reference polynomials -------------------------------------------------------


@dataclass(frozen=True)
class GoldenPolynomial:
    name: str
    poly: DensePolynomial
    degree: int


_TWISTED_CUBIC_8 = r"""
64u_2^6u_3^2+16u_1^3u_2^3u_3+408u_1^2u_2^3u_3^2-64u_1u_2^5u_3-96u_1u_2^3u_3^3+128u_2^7-256u_2^5u_3^2
-56u_2^3u_3^4+u_1^6-30u_1^5u_3-80u_1^4u_2^2+294u_1^4u_3^2 -416u_1^3u_2^2u_3 -880u_1^3u_3^3
+880u_1^2u_2^4-876u_1^2u_2^2u_3^2-588u_1^2u_3^4+32u_1u_2^4u_3+256u_1u_2^2u_3^3-120u_1u_3^5-
576u_2^6+304u_2^4u_3^2+148u_2^2u_3^4-8u_3^6 +1140u_1^4u_2 -1092u_1^3u_2u_3-2544u_1^2u_2^3-
558 u_1^2u_2u_3^2+192u_1u_2^3u_3-408u_1u_2u_3^3+1088u_2^5-138u_2u_3^4-2670u_1^4-600u_1^3u_3+2832
u_1^2u_2^2+207u_1^2u_3^2 +39u_3^4 -96u_1u_2^2u_3 +120u_1u_3^3-1120u_2^4-228u_2^2u_3^2 -1332u_1^2
u_2-108u_1u_2u_3+680u_2^3+144u_2u_3^2+189u_1^2+54u_1u_3-244u_2^2-27u_3^2+48u_2-4
"""

_THREE_QUADRICS_9 = r"""
5832 u_2^3 u_3^6+27648 u_2^6 u_3^2-62208 u_1 u_2^4 u_3^3-2916 u_1^2 u_2^2 u_3^4+15552 u_2^4 u_3^4
-5832 u_1^3 u_3^5+8748 u_1^2 u_3^6-5832 u_2^2 u_3^6-4374 u_1 u_3^7+729 u_3^8-41472 u_1^2 u_2^5
+86400 u_1^3 u_2^3 u_3+27648 u_1 u_2^5 u_3+60750 u_1^4 u_2 u_3^2-41472 u_1^2 u_2^3 u_3^2
-62208 u_2^5 u_3^2-106920 u_1^3 u_2 u_3^3+85536 u_1 u_2^3 u_3^3+71442 u_1^2 u_2 u_3^4-19656 u_2^3 u_3^4
-19440 u_1 u_2 u_3^5+3888 u_2 u_3^6-84375 u_1^6-54000 u_1^4 u_2^2+72576 u_1^2 u_2^4+202500 u_1^5 u_3
-19440 u_1^3 u_2^2 u_3-48384 u_1 u_2^4 u_3-220725 u_1^4 u_3^2+6912 u_1^2 u_2^2 u_3^2
+58032 u_2^4 u_3^2+140454 u_1^3 u_3^3-35424 u_1 u_2^2 u_3^3-54027 u_1^2 u_3^4+8424 u_2^2 u_3^4
+11178 u_1 u_3^5-1161 u_3^6+40050 u_1^4 u_2-50760 u_1^2 u_2^3-21132 u_1^3 u_2 u_3
+33840 u_1 u_2^3 u_3+11880 u_1^2 u_2 u_3^2-28744 u_2^3 u_3^2+3708 u_1 u_2 u_3^3-1314 u_2 u_3^4
-7431 u_1^4+17736 u_1^2 u_2^2+6112 u_1^3 u_3-11824 u_1 u_2^2 u_3-3246 u_1^2 u_3^2
+7976 u_2^2 u_3^2+312 u_1 u_3^3+37 u_3^4-3096 u_1^2 u_2+2064 u_1 u_2 u_3-1176 u_2 u_3^2
+216 u_1^2-144 u_1 u_3+72 u_3^2
"""

_STEINER = "u_1^2u_2^2+u_1^2u_3^2+u_2^2u_3^2+3u_1u_2u_3"

# facets of the region around the origin for the five-point instance, as p(u) = 0
_FIVE_POINT_PLANES = (
    "2u_1+2u_2-2u_3+3",
    "2u_1-2u_2+2u_3+3",
    "2u_1-2u_2-2u_3-3",
    "2u_1+2u_2+2u_3-3",
)

TWISTED_CUBIC_8 = GoldenPolynomial("TwistedCubic8", parse_polynomial(_TWISTED_CUBIC_8, 3), 8)
THREE_QUADRICS_9 = GoldenPolynomial("ThreeQuadrics9", parse_polynomial(_THREE_QUADRICS_9, 3), 9)
STEINER_QUARTIC = GoldenPolynomial("SteinerQuartic", parse_polynomial(_STEINER, 3), 4)
FIVE_POINT_PLANES = tuple(parse_polynomial(p, 3) for p in _FIVE_POINT_PLANES)

GOLDEN = {g.name: g for g in (TWISTED_CUBIC_8, THREE_QUADRICS_9, STEINER_QUARTIC)}


def relative_residuals(p: DensePolynomial, U) -> np.ndarray:
    """``|p(u)| / sum |c_a u^a|`` per sample (0 where the scale vanishes)."""
    val = np.abs(p.eval_many(U))
    scale = p.abs_scale(U)
    return np.divide(val, scale, out=np.zeros_like(val), where=scale > 0)
