"""Epsilon-strict subdifferentials of max-type functions and polytope projection.

For ``g = max_i g_i`` the epsilon-strict subdifferential at ``x`` is the convex
hull of the gradients of the pieces that are within ``eps`` of the max. It sits
between the exact subdifferential and the epsilon-subdifferential, and unlike
the latter it is a polytope, so distances to it reduce to a min-norm-point
problem.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .core import DcError, MaxSmoothFunction, as_vector

__all__ = [
    "ACTIVE_SLACK",
    "Polytope",
    "Interval",
    "MinNormPoint",
    "active_set",
    "strict_subdiff",
    "min_norm_point",
    "dist_to_strict_subdiff",
    "abs_eps_subdiff",
    "abs_eps_distance",
    "check_eps_subgradient",
    "probe_points",
]

# relative to max_i |g_i(x)|; see active_set
ACTIVE_SLACK = 1e-12


@dataclass(frozen=True)
class Polytope:
    """Convex hull of a finite, nonempty list of vertices (rows of ``vertices``)."""

    vertices: np.ndarray

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if V.shape[0] == 0:
            raise ValueError("a polytope needs at least one vertex")
        if not np.all(np.isfinite(V)):
            raise DcError("polytope vertices must be finite")
        V.setflags(write=False)
        object.__setattr__(self, "vertices", V)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def __len__(self) -> int:
        return self.vertices.shape[0]

    def shifted(self, u) -> "Polytope":
        return Polytope(self.vertices - np.asarray(u, dtype=float))

    def certifies(self, point, weights, tol: float = 1e-10) -> bool:
        """Check that ``weights`` are convex weights reproducing ``point``."""
        w = np.asarray(weights, dtype=float)
        return bool(
            w.shape == (len(self),)
            and np.all(w >= 0.0)
            and abs(w.sum() - 1.0) <= tol
            and np.allclose(w @ self.vertices, point, rtol=0.0, atol=tol * (1 + np.abs(self.vertices).max()))
        )


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    def __contains__(self, s) -> bool:
        return self.lo <= float(s) <= self.hi

    def dist(self, s: float) -> float:
        return float(max(self.lo - s, 0.0, s - self.hi))


@dataclass(frozen=True)
class MinNormPoint:
    point: np.ndarray
    weights: np.ndarray
    norm: float


def active_set(g: MaxSmoothFunction, x, eps: float) -> tuple[int, ...]:
    """Indices ``i`` (0-based) with ``g_i(x) >= g(x) - eps``.

    The comparison carries a slack of ``ACTIVE_SLACK * max_i |g_i(x)|`` to absorb
    rounding at ties. The slack is relative so that exact sign information near
    the origin survives (a kink of ``|.|`` is not reported at ``x = 1e-13``).
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    vals = g.piece_values(x)
    top = float(np.max(vals))
    slack = ACTIVE_SLACK * float(np.max(np.abs(vals)))
    return tuple(int(i) for i in np.flatnonzero(vals >= top - eps - slack))


def strict_subdiff(g: MaxSmoothFunction, x, eps: float) -> Polytope:
    """Epsilon-strict subdifferential of ``g`` at ``x`` as a vertex list."""
    x = as_vector(x, g.dim)
    return Polytope(g.gradients(x, active_set(g, x, eps)))


def min_norm_point(P: Polytope, tol: float = 1e-12, max_iter: Optional[int] = None) -> MinNormPoint:
    """Point of minimum Euclidean norm in ``conv(P.vertices)`` by Wolfe's method.

    Returns the point, convex weights over the vertices (a membership
    certificate), and the norm. The result is deterministic for a fixed vertex
    order. ``tol`` scales the stopping test
    ``||x||^2 - min_j <x, v_j> <= tol * max_j ||v_j||^2``.
    """
    V = P.vertices
    m, n = V.shape
    sq = np.einsum("ij,ij->i", V, V)
    scale = max(float(sq.max()), 1e-300)
    if max_iter is None:
        max_iter = 50 * (m + n) + 100

    j0 = int(np.argmin(sq))
    S = [j0]
    lam = np.array([1.0])
    x = V[j0].copy()

    for _ in range(max_iter):
        xx = float(x @ x)
        dots = V @ x
        j = int(np.argmin(dots))
        if xx - dots[j] <= tol * scale or xx <= tol * tol * scale:
            break
        if j in S:
            break
        S.append(j)
        lam = np.append(lam, 0.0)

        # minor cycle: move to the affine minimizer of the corral, clipping at the boundary
        while True:
            alpha = _affine_minimizer(V[S])
            if alpha is None:
                # affinely dependent corral: drop the lightest vertex other than the newcomer
                k = int(np.argmin(lam[:-1]))
                del S[k]
                lam = np.delete(lam, k)
                lam /= lam.sum()
                continue
            if np.all(alpha > tol):
                lam = alpha
                break
            neg = alpha <= tol
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(neg, lam / (lam - alpha), np.inf)
            theta = float(min(1.0, np.min(ratios)))
            lam = lam + theta * (alpha - lam)
            drop = lam <= tol
            drop[int(np.argmin(np.where(neg, ratios, np.inf)))] = True
            S = [s for s, d in zip(S, drop) if not d]
            lam = lam[~drop]
            lam = np.maximum(lam, 0.0)
            lam /= lam.sum()
            if len(S) == 1:
                lam = np.array([1.0])
                break
        x = lam @ V[S]

    weights = np.zeros(m)
    weights[S] = lam
    weights /= weights.sum()
    x = weights @ V
    return MinNormPoint(point=x, weights=weights, norm=float(np.linalg.norm(x)))


def _affine_minimizer(W: np.ndarray) -> Optional[np.ndarray]:
    """Coefficients ``a`` (summing to 1) of the min-norm point of ``aff(rows of W)``.

    Returns ``None`` when the rows are affinely dependent.
    """
    k = W.shape[0]
    if k == 1:
        return np.ones(1)
    # min ||a @ W||^2 s.t. sum(a) = 1, via differences to the first row
    D = W[1:] - W[0]
    if np.linalg.matrix_rank(D, tol=1e-10 * max(1.0, float(np.abs(W).max()))) < k - 1:
        return None
    G = W @ W.T
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = G
    kkt[:k, k] = 1.0
    kkt[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    try:
        sol = np.linalg.solve(kkt, rhs)
    except np.linalg.LinAlgError:
        return None
    return sol[:k]


def dist_to_strict_subdiff(g: MaxSmoothFunction, x, eps: float, u) -> float:
    """Distance from ``u`` to the epsilon-strict subdifferential of ``g`` at ``x``."""
    u = as_vector(u, g.dim)
    x = as_vector(x, g.dim)
    active = active_set(g, x, eps)
    if len(active) == 1:
        return float(np.linalg.norm(g.piece_gradient(active[0], x) - u))
    return min_norm_point(Polytope(g.gradients(x, active)).shifted(u)).norm


def abs_eps_subdiff(z: float, eps: float) -> Interval:
    """Closed-form epsilon-subdifferential of ``|.|`` at ``z`` for ``eps > 0``.

    For ``z < -eps/2`` the interval is ``[-1, -1 - eps/z]``; this is the form
    consistent with the defining inequality (the upper end is
    ``-1 + eps/|z|``).
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    z = float(z)
    if abs(z) <= eps / 2:
        return Interval(-1.0, 1.0)
    if z > 0:
        return Interval(1.0 - eps / z, 1.0)
    return Interval(-1.0, -1.0 - eps / z)


def abs_eps_distance(g, x, eps: float, u) -> float:
    """Distance from ``u`` to the eps-subdifferential of ``|.|`` at scalar ``x``.

    Signature matches ``dist_to_strict_subdiff`` so it can be injected into
    the outer solver for one-dimensional absolute-value problems (``g`` is
    ignored). ``eps = 0`` falls back to the exact subdifferential.
    """
    z = float(np.asarray(x, dtype=float).reshape(-1)[0])
    s = float(np.asarray(u, dtype=float).reshape(-1)[0])
    if eps > 0:
        return abs_eps_subdiff(z, eps).dist(s)
    if z == 0.0:
        return Interval(-1.0, 1.0).dist(s)
    return abs(s - np.sign(z))


def probe_points(x, count: int, seed: int = 0) -> np.ndarray:
    """Deterministic probe points around ``x``: origin, axis rays over many scales, random fill."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    radii = np.logspace(-4, 6, 21)
    # interleave small and large radii so a short budget still spans scales
    order = np.argsort(np.abs(np.log10(radii) - 1.0), kind="stable")
    grid = [np.zeros(n), x.copy()]
    for r in radii[order]:
        for j in range(n):
            e = np.zeros(n)
            e[j] = r
            grid.extend([x + e, x - e, e, -e])
    pts = grid[:count]
    rng = np.random.default_rng(seed)
    while len(pts) < count:
        d = rng.standard_normal(n)
        d /= np.linalg.norm(d)
        r = 10.0 ** rng.uniform(-4, 4)
        pts.append(x + r * d if rng.random() < 0.5 else r * d)
    return np.array(pts).reshape(count, n)


def check_eps_subgradient(phi, x, s, eps: float, sample_count: int = 400, seed: int = 0) -> bool:
    """Sampled test of ``phi(y) >= phi(x) + <s, y - x> - eps`` on deterministic probes.

    ``phi`` is any object with a ``value`` method or a plain callable. A
    ``False`` answer is a genuine counterexample; ``True`` is only a necessary
    condition for membership. The comparison allows a rounding tolerance of
    ``1e-9 * (1 + |phi(x)| + |phi(y)| + |<s, y - x>|)``.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    value: Callable = getattr(phi, "value", phi)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    s = np.atleast_1d(np.asarray(s, dtype=float))
    fx = np.asarray(value(x), dtype=float).item()
    for y in probe_points(x, sample_count, seed):
        fy = np.asarray(value(y), dtype=float).item()
        lin = float(s @ (y - x))
        tol = 1e-9 * (1.0 + abs(fx) + abs(fy) + abs(lin))
        if fy < fx + lin - eps - tol:
            return False
    return True
