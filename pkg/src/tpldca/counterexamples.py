"""Executable counterexamples for relaxed inner-loop tests on ``g = |.|``.

``ap_solution_set_abs`` classifies the solution set of the relaxed condition
``dist(0, d|z|) <= eps``. ``run_example_32`` replays the halving inner
sequence ``z_i = x_k / 2**i`` against the baseline's exact-subdifferential
test and against the eps-relaxed tests, reporting where (if ever) each one
accepts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .core import registry_get
from .dca import descent_gap, strict_gap
from .inner import halving_point
from .subdiff import abs_eps_subdiff, dist_to_strict_subdiff

__all__ = [
    "ApSolutionSet",
    "NonTerminationReport",
    "ap_solution_set_abs",
    "run_example_32",
    "subsample_indices",
]


class ApSolutionSet(str, Enum):
    SINGLETON_ZERO = "singleton_zero"
    ALL_REALS = "all_reals"


def ap_solution_set_abs(eps: float) -> ApSolutionSet:
    """Solution set of ``dist(0, d|z|) <= eps`` over ``z`` in R.

    ``dist(0, d|z|)`` is 1 away from the origin and 0 at it, so the relaxation
    is exact for ``eps < 1`` and vacuous from ``eps = 1`` on.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    return ApSolutionSet.SINGLETON_ZERO if eps < 1 else ApSolutionSet.ALL_REALS


@dataclass
class NonTerminationReport:
    """Outcome of the halving-sequence scan.

    ``rows`` holds ``(i, z_i, dist_exact, rhs)`` with ``rhs = theta |z_i - x_k|``,
    complete up to ``i = 100`` and geometrically subsampled beyond.
    ``tpldca_accept_index`` uses the closed-form zeta-subdifferential of
    ``|.|``; ``strict_accept_index`` uses the zeta-strict subdifferential,
    which is smaller and so accepts no earlier.
    """

    theta: float
    lam: float
    x_k: float
    i_max: int
    zeta_used: float
    sigma: float
    rows: list[tuple[int, float, float, float]] = field(default_factory=list)
    baseline_failed_all: bool = False
    chain_holds: bool = False
    tpldca_accept_index: Optional[int] = None
    strict_accept_index: Optional[int] = None

    def as_dict(self) -> dict:
        return {
            "theta": self.theta,
            "lambda": self.lam,
            "x_k": self.x_k,
            "i_max": self.i_max,
            "zeta_used": self.zeta_used,
            "sigma": self.sigma,
            "baseline_failed_all": self.baseline_failed_all,
            "chain_holds": self.chain_holds,
            "tpldca_accept_index": self.tpldca_accept_index,
            "strict_accept_index": self.strict_accept_index,
            "rows_recorded": len(self.rows),
        }


def subsample_indices(i_max: int, dense: int = 100, ratio: float = 1.05) -> list[int]:
    """``0..dense`` followed by a geometric grid up to and including ``i_max``."""
    idx = list(range(min(i_max, dense) + 1))
    x = float(max(dense, 1))
    while idx[-1] < i_max:
        x *= ratio
        nxt = min(i_max, int(math.ceil(x)))
        if nxt > idx[-1]:
            idx.append(nxt)
    return idx


def run_example_32(theta: float, lam: float, i_max: int, zeta: float, sigma: float = 0.01) -> NonTerminationReport:
    """Scan the halving inner sequence for ``g = |.|``, ``u_k = 0``, ``x_k = min(1/(2 theta), lam)``."""
    if i_max < 1:
        raise ValueError("i_max must be >= 1")
    if not (theta > 0 and lam > 0 and zeta > 0):
        raise ValueError("theta, lam and zeta must be positive")
    problem = registry_get("abs1d")
    g = problem.g
    x_k = min(1.0 / (2.0 * theta), lam)
    xk = np.array([x_k])
    u = np.zeros(1)
    keep = set(subsample_indices(i_max))

    report = NonTerminationReport(theta, lam, x_k, i_max, zeta, sigma)
    failed_all = True
    chain = True
    # the exact subdifferential of |.| only depends on sign(z): one oracle call per sign class
    dist_by_sign: dict[float, float] = {}
    for i in range(i_max + 1):
        z = halving_point(x_k, i)
        rhs = theta * (x_k - z)
        key = math.copysign(1.0, z) if z else 0.0
        if key not in dist_by_sign:
            dist_by_sign[key] = dist_to_strict_subdiff(g, [z], 0.0, u)
        dist = dist_by_sign[key]
        if not dist > rhs:
            failed_all = False
        if not (dist == 1.0 and rhs <= 0.5 * (1 + 1e-15)):
            chain = False
        if i in keep:
            report.rows.append((i, z, dist, rhs))
    report.baseline_failed_all = failed_all
    report.chain_holds = chain

    # relaxed tests, scanned from z_{-1} = x_k
    for i in range(-1, i_max + 1):
        z = halving_point(x_k, max(i, 0))
        step = x_k - z
        if descent_gap(g, xk, u, [z], sigma, lam) < 0.0:
            continue
        if report.tpldca_accept_index is None and abs_eps_subdiff(z, zeta).dist(0.0) <= theta * step:
            report.tpldca_accept_index = i
        if report.strict_accept_index is None and strict_gap(g, xk, u, [z], zeta, theta) >= 0.0:
            report.strict_accept_index = i
        if report.tpldca_accept_index is not None and report.strict_accept_index is not None:
            break
    return report
