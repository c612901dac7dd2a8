"""Outer loops of the inexact proximal linearized DC algorithms.

``tpldca_solve`` is the terminating variant: Step 1 accepts any ``u_k`` within
``gamma ||x_k - x_{k-1}||`` of an ``rho ||x_k - x_{k-1}||^2``-subgradient of
``h``, and Step 2 accepts the first inner iterate ``z_i`` (``i >= -1``) with

    descent:  g(x_k) - g(z) - <u_k, x_k - z> >= (1 - sigma)/lam ||z - x_k||^2
    strict:   dist(u_k, D_zeta g(z)) <= theta ||z - x_k||

where ``D_zeta g`` is the zeta-strict subdifferential by default, or any
injected distance oracle (e.g. the exact eps-subdifferential of ``|.|``).

``souza_solve`` is the baseline: exact subgradient of ``h``, half the descent
requirement, and the exact subdifferential of ``g`` in the second test. Its
inner loop can run forever, which surfaces here as ``inner_cap_hit``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import DcError, DcProblem, MaxSmoothFunction, OracleFault, as_vector, dc_value
from .inner import InnerSolver, build_subproblem
from .subdiff import dist_to_strict_subdiff

__all__ = [
    "InverseSquare",
    "ConstantZeta",
    "SolverConfig",
    "IterateRecord",
    "SolveTrace",
    "select_u",
    "descent_gap",
    "souza_descent_gap",
    "strict_gap",
    "tpldca_solve",
    "souza_solve",
    "criticality_residual",
]

log = logging.getLogger(__name__)

# Acceptance allowance for rounding, in ulps of the magnitudes entering each test.
# Once ||z - x_k|| drops near 1e-8 the quadratic terms sink below the
# cancellation error of g(x_k) - g(z); never larger than 1e-12.
ROUNDING_ULPS = 16
MAX_ROUNDING = 1e-12

CONVERGED = "converged"
MAX_OUTER = "max_outer_reached"
INNER_CAP = "inner_cap_hit"
ORACLE_FAULT = "oracle_fault"


@dataclass(frozen=True)
class InverseSquare:
    """``zeta_k = scale / (k + 1)**2``."""

    scale: float = 1.0

    def __call__(self, k: int) -> float:
        return self.scale / (k + 1) ** 2

    def describe(self) -> str:
        return f"inv_square({self.scale:g})"


@dataclass(frozen=True)
class ConstantZeta:
    value: float

    def __call__(self, k: int) -> float:
        return self.value

    def describe(self) -> str:
        return f"const({self.value:g})"


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of both outer loops.

    With ``variant="tpldca"`` (default) the constructor enforces
    ``sigma in (0,1)``, ``theta > 1/lam``, ``rho in [0, (1-sigma)/lam)`` and
    ``gamma in [0, (1-sigma)/lam - rho)``. ``variant="souza"`` checks the
    baseline's looser ranges (``sigma in [0,1)``, ``theta > 0``) and ignores
    ``rho``, ``gamma``, the zeta schedule and the noise radius.
    """

    sigma: float = 0.01
    lam: float = 1.0
    theta: float = 1.1
    rho: float = 0.0
    gamma: float = 0.0
    zeta_schedule: Callable[[int], float] = InverseSquare()
    outer_tol: float = 1e-10
    crit_tol: float = 1e-6
    max_outer: int = 1000
    inner_cap: int = 10**6
    noise_radius: float = 0.0
    seed: int = 0
    record_inner: bool = False
    variant: str = "tpldca"

    def __post_init__(self):
        s, lam = self.sigma, self.lam
        if self.variant not in ("tpldca", "souza"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if not lam > 0:
            raise ValueError("lam must be positive")
        if self.variant == "souza":
            if not (0 <= s < 1):
                raise ValueError("sigma must lie in [0, 1)")
            if not self.theta > 0:
                raise ValueError("theta must be positive")
        else:
            if not (0 < s < 1):
                raise ValueError("sigma must lie in (0, 1)")
            if not self.theta > 1 / lam:
                raise ValueError(f"theta must exceed 1/lam = {1 / lam:g}")
            cap = (1 - s) / lam
            if not (0 <= self.rho < cap):
                raise ValueError(f"rho must lie in [0, {cap:g})")
            if not (0 <= self.gamma < cap - self.rho):
                raise ValueError(f"gamma must lie in [0, {cap - self.rho:g})")
            prev = np.inf
            for k in range(101):
                z = float(self.zeta_schedule(k))
                if not (0 < z <= prev) or not np.isfinite(z):
                    raise ValueError("zeta schedule must be positive and non-increasing")
                prev = z
        if not (self.outer_tol > 0 and self.crit_tol > 0):
            raise ValueError("outer_tol and crit_tol must be positive")
        if self.max_outer < 1 or self.inner_cap < 1:
            raise ValueError("max_outer and inner_cap must be positive")
        if not self.noise_radius >= 0:
            raise ValueError("noise_radius must be nonnegative")

    @property
    def merit_weight(self) -> float:
        return self.gamma / 2 + self.rho

    def echo(self) -> dict:
        """Flat, JSON-friendly description of the configuration."""
        sched = self.zeta_schedule
        return {
            "sigma": self.sigma,
            "lambda": self.lam,
            "theta": self.theta,
            "rho": self.rho,
            "gamma": self.gamma,
            "zeta": sched.describe() if hasattr(sched, "describe") else repr(sched),
            "outer_tol": self.outer_tol,
            "crit_tol": self.crit_tol,
            "max_outer": self.max_outer,
            "inner_cap": self.inner_cap,
            "noise_radius": self.noise_radius,
            "seed": self.seed,
            "variant": self.variant,
        }


@dataclass
class IterateRecord:
    """Outer iteration ``k``: the point ``x_k``, its linearization and how ``x_{k+1}`` was accepted.

    ``step_norm`` is ``||x_{k+1} - x_k||`` and ``inner_iterations`` the accepted
    inner index ``N_k`` (``-1`` means ``x_k`` itself was accepted). When the
    inner cap is hit the gaps are those of the last inner iterate tried.
    """

    k: int
    x: np.ndarray
    u: np.ndarray
    f_value: float
    merit: float
    step_norm: float
    inner_iterations: int
    gap_descent: float
    gap_strict: float
    zeta: float
    inner_series: Optional[list[tuple[int, float, float]]] = None


@dataclass
class SolveTrace:
    records: list[IterateRecord]
    status: str
    x_final: np.ndarray
    f_final: float
    algorithm: str
    cap_info: Optional[dict] = None
    fault: Optional[str] = None
    warnings: list[str] = field(default_factory=list)

    @property
    def merits(self) -> np.ndarray:
        return np.array([r.merit for r in self.records])

    @property
    def f_values(self) -> np.ndarray:
        return np.array([r.f_value for r in self.records])

    @property
    def iterates(self) -> np.ndarray:
        """``x_0, ..., x_K`` including the final point."""
        return np.array([r.x for r in self.records] + [self.x_final])


def select_u(h, x_k, x_prev, rho: float, gamma: float, noise_radius: float = 0.0, rng_seed: int = 0) -> np.ndarray:
    """Step 1: an ``eps_k``-subgradient of ``h`` plus an optional bounded perturbation.

    ``eps_k = rho ||x_k - x_prev||^2`` and the perturbation has norm at most
    ``min(noise_radius, gamma ||x_k - x_prev||)``, so the returned vector is
    always within the admissible distance of the eps-subdifferential.
    """
    x_k = as_vector(x_k, h.dim)
    step = float(np.linalg.norm(x_k - as_vector(x_prev, h.dim)))
    s = h.subgradient(x_k, rho * step**2)
    radius = min(noise_radius, gamma * step)
    if radius <= 0.0:
        return s
    rng = np.random.default_rng(rng_seed)
    d = rng.standard_normal(h.dim)
    d /= np.linalg.norm(d)
    return s + radius * rng.uniform(0.0, 1.0) * d


def _linear_descent(g: MaxSmoothFunction, x_k, u_k, z, coef: float, g_xk: Optional[float] = None) -> float:
    x_k = as_vector(x_k, g.dim)
    z = as_vector(z, g.dim)
    if g_xk is None:
        g_xk = g.value(x_k)
    d = z - x_k
    return g_xk - g.value(z) + float(np.asarray(u_k) @ d) - coef * float(d @ d)


def _allowance(*magnitudes: float) -> float:
    scale = 1.0 + sum(abs(m) for m in magnitudes)
    return min(ROUNDING_ULPS * np.finfo(float).eps * scale, MAX_ROUNDING)


def descent_gap(g: MaxSmoothFunction, x_k, u_k, z, sigma: float, lam: float) -> float:
    """``g(x_k) - g(z) - <u_k, x_k - z> - (1-sigma)/lam ||z - x_k||^2``; the test passes iff ``>= 0``."""
    return _linear_descent(g, x_k, u_k, z, (1 - sigma) / lam)


def souza_descent_gap(g: MaxSmoothFunction, x_k, u_k, z, sigma: float, lam: float) -> float:
    """Baseline descent gap, with ``(1-sigma)/(2 lam)`` in place of ``(1-sigma)/lam``."""
    return _linear_descent(g, x_k, u_k, z, (1 - sigma) / (2 * lam))


def strict_gap(g: MaxSmoothFunction, x_k, u_k, z, zeta: float, theta: float, distance=None) -> float:
    """``theta ||z - x_k|| - dist(u_k, D_zeta g(z))``; passes iff ``>= 0``.

    ``zeta = 0`` gives the exact subdifferential of ``g``.
    """
    if zeta < 0:
        raise ValueError("zeta must be nonnegative")
    if distance is None:
        distance = dist_to_strict_subdiff
    z = as_vector(z, g.dim)
    step = float(np.linalg.norm(z - as_vector(x_k, g.dim)))
    return theta * step - float(distance(g, z, zeta, u_k))


def criticality_residual(problem: DcProblem, x) -> float:
    """Distance from the ``h``-subgradient at ``x`` to the subdifferential of ``g`` at ``x``."""
    x = as_vector(x, problem.dim)
    return dist_to_strict_subdiff(problem.g, x, 0.0, problem.h.subgradient(x, 0.0))


def _run(problem: DcProblem, config: SolverConfig, inner: InnerSolver, x0, x_minus1, distance, algorithm: str) -> SolveTrace:
    g = problem.g
    x = as_vector(x0, problem.dim)
    x_prev = x.copy() if x_minus1 is None else as_vector(x_minus1, problem.dim)
    baseline = algorithm == "souza"
    coef = (1 - config.sigma) / (2 * config.lam if baseline else config.lam)
    records: list[IterateRecord] = []
    warnings: list[str] = []
    status = MAX_OUTER
    cap_info = None
    fault = None

    try:
        for k in range(config.max_outer):
            if baseline:
                u = problem.h.subgradient(x, 0.0)
                zeta = 0.0
            else:
                u = select_u(problem.h, x, x_prev, config.rho, config.gamma, config.noise_radius, config.seed + k)
                zeta = float(config.zeta_schedule(k))
            sub = build_subproblem(problem, x, u, config.lam)
            for w in inner.warnings(sub):
                if w not in warnings:
                    warnings.append(w)
                    log.warning(w)

            g_x = g.value(x)
            grad_scale = float(np.abs(g.gradients(x)).max())
            f_x = dc_value(problem, x)
            merit = f_x + config.merit_weight * float(np.sum((x - x_prev) ** 2))
            series = [] if config.record_inner else None

            accepted = None
            gd = gs = np.nan
            ok_d = ok_s = False
            z = x
            last = None
            for idx, z in enumerate(inner.iterate(sub)):
                i = idx - 1
                if i >= config.inner_cap:
                    break
                if z is last:
                    # solvers that re-yield an unchanged iterate get the same verdict
                    if series is not None:
                        series.append((i, gd, gs))
                    continue
                last = z
                gd = _linear_descent(g, x, u, z, coef, g_x)
                ok_d = gd >= -_allowance(g_x, g.value(z), float(u @ (x - z)))
                gs = np.nan
                if ok_d or series is not None:
                    gs = strict_gap(g, x, u, z, zeta, config.theta, distance)
                if series is not None:
                    series.append((i, gd, gs))
                ok_s = gs >= -_allowance(float(np.abs(u).max()), grad_scale)
                if ok_d and ok_s:
                    accepted = (i, z)
                    break

            if accepted is None:
                if np.isnan(gs):
                    gs = strict_gap(g, x, u, z, zeta, config.theta, distance)
                    ok_s = gs >= -_allowance(float(np.abs(u).max()), grad_scale)
                status = INNER_CAP
                cap_info = {
                    "k": k,
                    "inner_cap": config.inner_cap,
                    "descent_unmet": not bool(ok_d),
                    "strict_unmet": not bool(ok_s),
                }
                records.append(
                    IterateRecord(k, x, u, f_x, merit, 0.0, config.inner_cap, gd, gs, zeta, series)
                )
                break

            i, z = accepted
            step = float(np.linalg.norm(z - x))
            records.append(IterateRecord(k, x, u, f_x, merit, step, i, gd, gs, zeta, series))
            x_prev, x = x, np.array(z, dtype=float)
            # a vanishing step only certifies zeta_k-criticality; stop once it is exact
            if step <= config.outer_tol and float((distance or dist_to_strict_subdiff)(g, x, 0.0, u)) <= config.crit_tol:
                status = CONVERGED
                break
    except OracleFault as exc:
        status = ORACLE_FAULT
        fault = f"{exc} (x={None if exc.x is None else exc.x.tolist()})"
        if not records:
            records.append(IterateRecord(0, x, np.zeros_like(x), np.nan, np.nan, 0.0, 0, np.nan, np.nan, 0.0))

    f_final = dc_value(problem, x) if status != ORACLE_FAULT else np.nan
    return SolveTrace(
        records=records,
        status=status,
        x_final=x,
        f_final=f_final,
        algorithm=algorithm,
        cap_info=cap_info,
        fault=fault,
        warnings=warnings,
    )


def tpldca_solve(
    problem: DcProblem,
    config: SolverConfig,
    inner: InnerSolver,
    x0,
    x_minus1=None,
    distance: Optional[Callable] = None,
) -> SolveTrace:
    """Run the terminating inexact proximal linearized DC algorithm.

    Parameters
    ----------
    problem : DcProblem
    config : SolverConfig
        Must have ``variant="tpldca"``.
    inner : InnerSolver
        Any solver whose iterates converge to the subproblem minimizer.
    x0, x_minus1 : array_like
        Starting points; ``x_minus1`` defaults to ``x0`` so ``eps_0 = d_0 = 0``.
    distance : callable, optional
        ``distance(g, z, zeta, u)``. Defaults to the distance to the
        zeta-strict subdifferential; pass an exact eps-subdifferential
        distance to run the conceptual variant.

    Returns
    -------
    SolveTrace
        Converged when ``||x_{k+1} - x_k|| <= outer_tol`` and
        ``dist(u_k, dg(x_{k+1})) <= crit_tol``; a null step at a point that
        is only zeta_k-critical continues with the next, smaller zeta.
        Otherwise stops after ``max_outer`` outer iterations or when an inner
        loop exceeds ``inner_cap``.
    """
    if config.variant != "tpldca":
        raise ValueError("tpldca_solve needs a config with variant='tpldca'")
    return _run(problem, config, inner, x0, x_minus1, distance, "tpldca")


def souza_solve(problem: DcProblem, config: SolverConfig, inner: InnerSolver, x0) -> SolveTrace:
    """Baseline inexact proximal linearized DC algorithm (exact-subdifferential test)."""
    return _run(problem, config, inner, x0, None, None, "souza")
