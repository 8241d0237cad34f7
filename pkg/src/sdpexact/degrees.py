"""Closed-form degree formulas and reference tables.

All functions return exact Python integers and raise ``DomainError`` outside
their stated ranges.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb


class DomainError(ValueError):
    pass


class UnknownDeltaStar(LookupError):
    pass


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise DomainError(msg)


def _ints(*vals) -> None:
    for v in vals:
        if isinstance(v, bool) or not isinstance(v, int):
            raise DomainError(f"expected integers, got {v!r}")


def delta_rank_one(l: int, d: int) -> int:  # noqa: E741
    """Algebraic degree of rank-one SDP optima: ``2^(l-1) C(d, l)``."""
    _ints(l, d)
    _need(1 <= l <= d, f"need 1 <= l <= d, got l={l}, d={d}")
    return 2 ** (l - 1) * comb(d, l)


def beta_sdp(l: int, d: int) -> int:  # noqa: E741
    """Degree of the boundary hypersurface of the rank-one region."""
    _ints(l, d)
    _need(2 <= l <= d, f"need 2 <= l <= d, got l={l}, d={d}")
    if l == 2:
        return comb(d + 1, 3)
    return 2 ** (l - 1) * (d - 1) * comb(d, l) - 2**l * comb(d, l + 1)


def qp_alg_degree(m: int, n: int) -> int:
    """``2^m C(n, m)``."""
    _ints(m, n)
    _need(0 <= m <= n, f"need 0 <= m <= n, got m={m}, n={n}")
    return 2**m * comb(n, m)


def beta_qp(m: int, n: int) -> int:
    """``2^m (n C(n, m) - C(n, m+1))``."""
    _ints(m, n)
    _need(1 <= m <= n, f"need 1 <= m <= n, got m={m}, n={n}")
    return 2**m * (n * comb(n, m) - comb(n, m + 1))


def ed_degree_ci(m: int, n: int) -> int:
    """ED degree bound of a complete intersection of ``m`` quadrics in ``R^n``."""
    _ints(m, n)
    _need(1 <= m <= n, f"need 1 <= m <= n, got m={m}, n={n}")
    return 2**m * comb(n, m)


def beta_ed(m: int, n: int, deg_pi: int = 1) -> int:
    """Boundary degree of the ED-exact region, ``m 2^m C(n, m) / deg_pi``.

    ``deg_pi`` is the degree of the projection onto the boundary.  The
    default of 1 is conjectural for ``m >= 2``; for ``m == 1`` the value is
    known to be 2 and is forced.
    """
    _ints(m, n, deg_pi)
    _need(1 <= m <= n, f"need 1 <= m <= n, got m={m}, n={n}")
    if m == 1:
        deg_pi = 2
    _need(deg_pi >= 1, "deg_pi must be positive")
    num = m * 2**m * comb(n, m)
    _need(num % deg_pi == 0, f"deg_pi={deg_pi} does not divide {num}")
    return num // deg_pi


def beta_lin(m: int, n: int, deg_pi: int = 1) -> int:
    """Boundary degree for linear objectives, ``2^m n C(n-2, m-2) / deg_pi``."""
    _ints(m, n, deg_pi)
    _need(2 <= m <= n, f"need 2 <= m <= n, got m={m}, n={n}")
    _need(deg_pi >= 1, "deg_pi must be positive")
    num = 2**m * n * comb(n - 2, m - 2)
    _need(num % deg_pi == 0, f"deg_pi={deg_pi} does not divide {num}")
    return num // deg_pi


def lin_alg_degree(m: int, n: int) -> int:
    """Algebraic degree for linear objectives, ``2^m C(n-1, m-1)``."""
    _ints(m, n)
    _need(1 <= m <= n, f"need 1 <= m <= n, got m={m}, n={n}")
    return 2**m * comb(n - 1, m - 1)


def maxcut_beta(n: int) -> int:
    """Degree of the boundary of the Max-Cut exact region, ``(n-1) 2^(n-1)``."""
    _ints(n)
    _need(n >= 2, f"need n >= 2, got {n}")
    return (n - 1) * 2 ** (n - 1)


def polar_degrees(d: int) -> list[int]:
    """``[2^(l-1) C(d, l) for l = 1..d]``."""
    _ints(d)
    _need(d >= 1, f"need d >= 1, got {d}")
    return [delta_rank_one(l, d) for l in range(1, d + 1)]


def segre_degree(degV: int, dimV: int, degW: int, dimW: int) -> int:
    """Degree of the Segre product of two projective varieties."""
    _ints(degV, dimV, degW, dimW)
    _need(min(degV, degW) >= 1 and min(dimV, dimW) >= 0, "degrees must be positive, dimensions non-negative")
    return degV * degW * comb(dimV + dimW, dimW)


# delta(l, d, *) summed over the Pataki range; only values needed here
_DELTA_STAR = {(2, 3): 6, (3, 3): 8}


def delta_star(l: int, d: int) -> int:  # noqa: E741
    _ints(l, d)
    if (l, d) in _DELTA_STAR:
        return _DELTA_STAR[(l, d)]
    if 1 <= l <= 2 and l <= d:
        # a single attainable rank (d - 1)
        return delta_rank_one(l, d)
    raise UnknownDeltaStar(f"delta*({l}, {d}) is not tabulated")


def expected_degree(n: int, c: int, p: int, degV: int) -> int:
    """``C(n-1, n-c) degV delta*(p+1, n)``; a heuristic estimate, not a bound."""
    _ints(n, c, p, degV)
    _need(1 <= c <= n and p >= 0 and degV >= 1, "need 1 <= c <= n, p >= 0, degV >= 1")
    return comb(n - 1, n - c) * degV * delta_star(p + 1, n)


# --- reference tables ----------------------------------------------------------


@dataclass(frozen=True)
class DegreeTable:
    name: str
    title: str
    row_label: str
    col_label: str
    rows: tuple[int, ...]
    cols: tuple[int, ...]
    entries: dict[tuple[int, int], int]
    formula: object = field(repr=False)
    discrepancies: dict[tuple[int, int], str] = field(default_factory=dict)

    def check(self) -> list[tuple[tuple[int, int], int, int, bool]]:
        """``(cell, printed, formula, annotated)`` for every mismatching cell."""
        out = []
        for cell, printed in sorted(self.entries.items()):
            value = self.formula(*cell)
            if value != printed:
                out.append((cell, printed, value, cell in self.discrepancies))
        return out

    def render(self) -> str:
        width = max(len(str(v)) for v in self.entries.values()) + 2
        head = f"{self.row_label}\\{self.col_label}".ljust(6) + "".join(str(c).rjust(width) for c in self.cols)
        lines = [self.title, head]
        for r in self.rows:
            cells = []
            for c in self.cols:
                v = self.entries.get((r, c))
                mark = "*" if (r, c) in self.discrepancies else ""
                cells.append(("" if v is None else f"{v}{mark}").rjust(width))
            lines.append(str(r).ljust(6) + "".join(cells))
        for cell, note in sorted(self.discrepancies.items()):
            lines.append(f"* ({self.row_label}={cell[0]}, {self.col_label}={cell[1]}): {note}")
        return "\n".join(lines)


def _grid(rows, cols, data) -> dict[tuple[int, int], int]:
    out = {}
    for r, vals in zip(rows, data):
        for c, v in zip(cols, vals):
            if v is not None:
                out[(r, c)] = v
    return out


_ = None
_SDP_ALG = _grid(range(2, 8), range(3, 8), [
    [6, 12, 20, 30, 42],
    [4, 16, 40, 80, 140],
    [_, 8, 40, 120, 280],
    [_, _, 16, 96, 336],
    [_, _, _, 32, 224],
    [_, _, _, _, 64],
])
_SDP_BOUNDARY = _grid(range(2, 8), range(3, 8), [
    [4, 10, 20, 35, 66],
    [8, 40, 120, 280, 560],
    [_, 24, 144, 504, 1344],
    [_, _, 64, 448, 1792],
    [_, _, _, 160, 1280],
    [_, _, _, _, 384],
])
_QP_ALG = _grid(range(1, 7), range(2, 7), [
    [4, 6, 8, 10, 12],
    [4, 12, 24, 40, 60],
    [_, 8, 32, 80, 160],
    [_, _, 16, 80, 240],
    [_, _, _, 32, 192],
    [_, _, _, _, 64],
])
_QP_BOUNDARY = _grid(range(1, 7), range(2, 7), [
    [6, 12, 20, 30, 42],
    [8, 32, 80, 160, 280],
    [_, 24, 120, 360, 840],
    [_, _, 64, 384, 1344],
    [_, _, _, 160, 1120],
    [_, _, _, _, 384],
])
_ED_ALG = _grid(range(2, 7), range(2, 7), [
    [4, 12, 24, 40, 60],
    [_, 8, 32, 80, 160],
    [_, _, 16, 80, 240],
    [_, _, _, 32, 192],
    [_, _, _, _, 64],
])
_ED_BOUNDARY = _grid(range(2, 7), range(2, 7), [
    [8, 24, 48, 80, 120],
    [_, 24, 96, 240, 480],
    [_, _, 64, 320, 960],
    [_, _, _, 160, 960],
    [_, _, _, _, 384],
])

TABLES: dict[str, DegreeTable] = {
    "SdpAlgebraic": DegreeTable(
        "SdpAlgebraic", "Algebraic degrees delta(l,d,d-1)", "l", "d",
        tuple(range(2, 8)), tuple(range(3, 8)), _SDP_ALG, delta_rank_one,
    ),
    "SdpBoundary": DegreeTable(
        "SdpBoundary", "Rank-one boundary degrees beta(l,d)", "l", "d",
        tuple(range(2, 8)), tuple(range(3, 8)), _SDP_BOUNDARY, beta_sdp,
        {(2, 7): "printed 66, formula C(8,3) gives 56; formula value is used"},
    ),
    "QpAlgebraic": DegreeTable(
        "QpAlgebraic", "Algebraic degrees of QP", "m", "n",
        tuple(range(1, 7)), tuple(range(2, 7)), _QP_ALG, qp_alg_degree,
    ),
    "QpBoundary": DegreeTable(
        "QpBoundary", "Boundary degrees beta_QP(m,n)", "m", "n",
        tuple(range(1, 7)), tuple(range(2, 7)), _QP_BOUNDARY, beta_qp,
    ),
    "EdDegree": DegreeTable(
        "EdDegree", "ED degrees of complete intersections", "m", "n",
        tuple(range(2, 7)), tuple(range(2, 7)), _ED_ALG, ed_degree_ci,
    ),
    "EdBoundary": DegreeTable(
        "EdBoundary", "Boundary degrees beta_ED(m,n)", "m", "n",
        tuple(range(2, 7)), tuple(range(2, 7)), _ED_BOUNDARY, beta_ed,
    ),
}

TABLE_GROUPS = {
    "sdp": ("SdpAlgebraic", "SdpBoundary"),
    "qp": ("QpAlgebraic", "QpBoundary"),
    "ed": ("EdDegree", "EdBoundary"),
}

FORMULAS = {
    "delta": delta_rank_one,
    "beta_sdp": beta_sdp,
    "qp_alg": qp_alg_degree,
    "beta_qp": beta_qp,
    "ed_degree": ed_degree_ci,
    "beta_ed": beta_ed,
    "beta_lin": beta_lin,
    "lin_alg": lin_alg_degree,
    "maxcut_beta": maxcut_beta,
    "polar": polar_degrees,
    "segre": segre_degree,
    "expected": expected_degree,
}
