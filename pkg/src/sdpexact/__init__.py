"""Exactness of semidefinite relaxations for quadratic programs.

Submodules: ``numkit`` (small dense linear algebra), ``model`` (quadratic
programs and their relaxations), ``sdp`` (interior-point solver),
``exactness`` (verdicts and certificates), ``region`` (spectrahedral shadows
and boundary sampling), ``degrees`` (degree formulas), ``implicit``
(numerical implicitization), ``gallery`` and ``cli``.
"""

from __future__ import annotations

from .exactness import ExactnessCertificate, Verdict, certify_at_point, check_exact_sdp, ed_critical_points
from .model import Objective, QuadraticConstraint, QuadraticProgram, VarietyPoints, quadratic_program
from .region import master, sample_boundary, shadow_point, tangency_witness
from .sdp import SdpOptions, solve

__version__ = "0.1.0"

__all__ = [
    "ExactnessCertificate",
    "Objective",
    "QuadraticConstraint",
    "QuadraticProgram",
    "SdpOptions",
    "VarietyPoints",
    "Verdict",
    "certify_at_point",
    "check_exact_sdp",
    "ed_critical_points",
    "master",
    "quadratic_program",
    "sample_boundary",
    "shadow_point",
    "solve",
    "tangency_witness",
]
