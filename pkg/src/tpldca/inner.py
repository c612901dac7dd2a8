"""Proximal-point subproblems and the inner solvers that approximate them.

At outer iterate ``x_k`` with linearization ``u_k`` the subproblem is

    f_k(z) = g(z) - <u_k, z - x_k> + ||z - x_k||^2 / (2 lam),

which is ``1/lam``-strongly convex. An inner solver is an iterator factory:
given a subproblem it yields ``z_{-1} = x_k`` followed by ``z_0, z_1, ...``
converging to the unique minimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Union

import numpy as np

from .core import DcError, DcProblem, GSplit, as_vector

__all__ = [
    "Subproblem",
    "SubproblemSplit",
    "build_subproblem",
    "InnerSolver",
    "IstaSolver",
    "SubgradientSolver",
    "ScriptedSolver",
    "ista_solver",
    "subgradient_solver",
    "scripted_solver",
    "halving_solver",
    "halving_point",
]

_TINY = math.ulp(0.0)


@dataclass(frozen=True)
class SubproblemSplit:
    """``f_k = smooth + nonsmooth`` with the linear and proximal terms in ``smooth``.

    ``lipschitz`` is the gradient Lipschitz bound of the smooth part of ``g``
    alone; the full smooth part has constant ``lipschitz + 1/lam``.
    """

    smooth_value: Callable[[np.ndarray], float]
    smooth_gradient: Callable[[np.ndarray], np.ndarray]
    lipschitz: float
    nonsmooth_value: Callable[[np.ndarray], float]
    prox: Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Subproblem:
    base: DcProblem
    x_k: np.ndarray
    u_k: np.ndarray
    lam: float
    split: Optional[SubproblemSplit] = None

    @property
    def strong_convexity(self) -> float:
        return 1.0 / self.lam

    @property
    def dim(self) -> int:
        return self.base.dim

    def value(self, z) -> float:
        z = as_vector(z, self.dim)
        d = z - self.x_k
        return self.base.g.value(z) - float(self.u_k @ d) + float(d @ d) / (2 * self.lam)

    __call__ = value

    def subgradient(self, z) -> np.ndarray:
        z = as_vector(z, self.dim)
        return self.base.g.subgradient(z) - self.u_k + (z - self.x_k) / self.lam


def _split_for(g_split: GSplit, x_k: np.ndarray, u_k: np.ndarray, lam: float) -> SubproblemSplit:
    def smooth_value(z):
        d = z - x_k
        return float(g_split.smooth_value(z)) - float(u_k @ d) + float(d @ d) / (2 * lam)

    def smooth_gradient(z):
        return np.asarray(g_split.smooth_gradient(z), dtype=float) - u_k + (z - x_k) / lam

    return SubproblemSplit(
        smooth_value=smooth_value,
        smooth_gradient=smooth_gradient,
        lipschitz=float(g_split.lipschitz),
        nonsmooth_value=g_split.nonsmooth_value,
        prox=g_split.prox,
    )


def build_subproblem(problem: DcProblem, x_k, u_k, lam: float) -> Subproblem:
    """Proximal-point model at ``(x_k, u_k)``; attaches an ISTA split when the problem has one."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    x_k = as_vector(x_k, problem.dim)
    u_k = as_vector(u_k, problem.dim)
    split = _split_for(problem.split, x_k, u_k, lam) if problem.split is not None else None
    return Subproblem(base=problem, x_k=x_k, u_k=u_k, lam=float(lam), split=split)


class InnerSolver:
    """Base class: ``iterate(sub)`` yields ``x_k`` and then the inner iterates."""

    name = "inner"

    def iterate(self, sub: Subproblem) -> Iterator[np.ndarray]:
        raise NotImplementedError

    def warnings(self, sub: Subproblem) -> list[str]:
        return []

    def __call__(self, sub: Subproblem) -> Iterator[np.ndarray]:
        return self.iterate(sub)


class IstaSolver(InnerSolver):
    """Proximal gradient (ISTA) on the subproblem split.

    ``step="auto"`` uses ``1 / (L + 1/lam)``, the reciprocal of the Lipschitz
    constant of the full smooth part, which makes the subproblem value
    monotonically non-increasing.
    """

    name = "ista"

    def __init__(self, step: Union[str, float] = "auto"):
        if step != "auto" and not float(step) > 0:
            raise ValueError("ISTA step must be 'auto' or a positive number")
        self.step = step

    def step_size(self, sub: Subproblem) -> float:
        if sub.split is None:
            raise DcError(
                f"ISTA needs a smooth/prox split; problem {sub.base.name!r} has none"
            )
        if self.step == "auto":
            return 1.0 / (sub.split.lipschitz + 1.0 / sub.lam)
        return float(self.step)

    def warnings(self, sub: Subproblem) -> list[str]:
        tau = self.step_size(sub)
        L_total = sub.split.lipschitz + 1.0 / sub.lam
        if tau * L_total > 1.0 + 1e-12:
            return [f"ISTA step {tau:g} exceeds 1/L_total = {1.0 / L_total:g}; descent not guaranteed"]
        return []

    def iterate(self, sub: Subproblem) -> Iterator[np.ndarray]:
        tau = self.step_size(sub)
        split = sub.split
        z = sub.x_k.copy()
        yield z
        while True:
            z = np.asarray(split.prox(tau, z - tau * split.smooth_gradient(z)), dtype=float)
            yield z


class SubgradientSolver(InnerSolver):
    """Subgradient method with steps ``c * 2 / (mu (i + 2))``, yielding the best iterate so far.

    Needs no split, only a subgradient of ``g``. For a ``mu``-strongly convex
    objective this step rule drives the best value to the minimum.
    """

    name = "subgradient"

    def __init__(self, step_c: float = 1.0):
        if not step_c > 0:
            raise ValueError("step_c must be positive")
        self.step_c = float(step_c)

    def iterate(self, sub: Subproblem) -> Iterator[np.ndarray]:
        mu = sub.strong_convexity
        if not mu > 0:
            raise ValueError("subgradient solver needs a strongly convex subproblem")
        z = sub.x_k.copy()
        best, best_val = z, sub.value(z)
        yield best
        i = 0
        while True:
            t = self.step_c * 2.0 / (mu * (i + 2))
            z = z - t * sub.subgradient(z)
            val = sub.value(z)
            if val < best_val:
                best, best_val = z, val
            yield best
            i += 1


class ScriptedSolver(InnerSolver):
    """Replays ``rule(i)`` for ``i = 0, 1, ...`` after ``z_{-1} = x_k``.

    The rule may take ``(i)`` or ``(i, subproblem)``. When the solver is used
    to study termination, the caller is responsible for the rule converging to
    the subproblem minimizer.
    """

    name = "scripted"

    def __init__(self, rule: Callable, with_subproblem: bool = False):
        self.rule = rule
        self.with_subproblem = with_subproblem

    def iterate(self, sub: Subproblem) -> Iterator[np.ndarray]:
        yield sub.x_k.copy()
        i = 0
        while True:
            z = self.rule(i, sub) if self.with_subproblem else self.rule(i)
            yield as_vector(z, sub.dim)
            i += 1


def ista_solver(step: Union[str, float] = "auto") -> IstaSolver:
    return IstaSolver(step)


def subgradient_solver(step_c: float = 1.0) -> SubgradientSolver:
    return SubgradientSolver(step_c)


def scripted_solver(rule: Callable, with_subproblem: bool = False) -> ScriptedSolver:
    return ScriptedSolver(rule, with_subproblem)


def halving_point(c: float, i: int) -> float:
    """``c / 2**i`` computed exactly, held at the smallest subnormal of the same sign.

    Without the floor the sequence reaches 0 after about 1075 halvings, which
    is the limit itself and not an iterate of the idealized sequence.
    """
    z = math.ldexp(c, -i)
    if z == 0.0 and c != 0.0:
        return math.copysign(_TINY, c)
    return z


def halving_solver() -> ScriptedSolver:
    """``z_i = x_k / 2**i`` componentwise (see ``halving_point``)."""
    return ScriptedSolver(
        lambda i, sub: np.array([halving_point(float(c), i) for c in sub.x_k]),
        with_subproblem=True,
    )
