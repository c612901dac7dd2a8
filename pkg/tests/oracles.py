"""Independent reference computations used by the tests.

None of these call into the package's numerical kernels; they are brute force
or closed form so that agreement is meaningful.
"""

from __future__ import annotations

import numpy as np


def paper2d_optimum_analytic():
    # branch x_a > 0: g = quad, grad g = grad h  =>  2a + b = 0, a + 2b = b - 1
    A = np.array([[2.0, 1.0], [1.0, 1.0]])
    x = np.linalg.solve(A, np.array([0.0, -1.0]))
    a, b = x
    f = a * a + b * b + a * b - 0.5 * (b - 1.0) ** 2
    return x, float(f)


def paper2d_f(a, b):
    quad = a * a + b * b + a * b
    return quad + np.maximum(-a, 0.0) - 0.5 * (b - 1.0) ** 2


def paper2d_grid_min(step=1e-3, lo=-5.0, hi=5.0):
    """Grid search over [lo, hi]^2, processed in row blocks to bound memory."""
    grid = np.arange(lo, hi + step / 2, step)
    best = (np.inf, None)
    for start in range(0, grid.size, 500):
        a = grid[start : start + 500, None]
        vals = paper2d_f(a, grid[None, :])
        idx = np.unravel_index(np.argmin(vals), vals.shape)
        if vals[idx] < best[0]:
            best = (float(vals[idx]), (float(a[idx[0], 0]), float(grid[idx[1]])))
    return best


def _simplex_grid(center, step, radius, m):
    """Points ``center + step * k`` (|k| <= radius per coordinate) that are valid barycentric weights."""
    offs = np.arange(-radius, radius + 1) * step
    axes = [c + offs for c in center]
    W = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, m - 1)
    last = 1.0 - W.sum(axis=1)
    tol = 1e-12
    keep = np.all(W >= -tol, axis=1) & (last >= -tol)
    W = np.clip(W[keep], 0.0, None)
    return np.hstack([W, np.clip(last[keep], 0.0, None)[:, None]])


def barycentric_grid_min_norm(V, resolution=40, levels=4, refine=4):
    """Brute-force min norm over barycentric grids, refined around the incumbent.

    Level 0 enumerates every weight vector with spacing ``1/resolution``. Each
    further level divides the spacing by ``refine`` and enumerates a box of
    two old spacings around the incumbent. Grid-aligned, so faces of the
    simplex stay on the grid.
    """
    V = np.asarray(V, dtype=float)
    m = V.shape[0]
    if m == 1:
        return float(np.linalg.norm(V[0]))
    step = 1.0 / resolution
    W = _simplex_grid(np.full(m - 1, 0.5), step, int(np.ceil(0.5 / step)), m)
    norms = np.linalg.norm(W @ V, axis=1)
    best = W[np.argmin(norms)]
    best_norm = float(norms.min())
    for _ in range(levels):
        step /= refine
        W = _simplex_grid(best[:-1], step, 2 * refine, m)
        norms = np.linalg.norm(W @ V, axis=1)
        if norms.min() <= best_norm:
            best, best_norm = W[np.argmin(norms)], float(norms.min())
    return best_norm


def triangle_dense_grid_min_norm(V, step=1e-4):
    """Exhaustive search over all barycentric weights of a triangle with the given spacing."""
    V = np.asarray(V, dtype=float)
    n = int(round(1.0 / step))
    b = np.arange(n + 1) * step
    best = np.inf
    for i in range(n + 1):
        a = i * step
        bb = b[: n + 1 - i]
        P = a * V[0] + bb[:, None] * V[1] + (1.0 - a - bb)[:, None] * V[2]
        best = min(best, float(np.sqrt((P * P).sum(axis=1)).min()))
    return best


def min_norm_qp(V):
    """Min-norm point of conv(V) via scipy's SLSQP, as a second opinion."""
    from scipy.optimize import minimize

    V = np.asarray(V, dtype=float)
    m = V.shape[0]
    res = minimize(
        lambda w: float((w @ V) @ (w @ V)),
        np.full(m, 1.0 / m),
        jac=lambda w: 2.0 * V @ (w @ V),
        bounds=[(0.0, 1.0)] * m,
        constraints=[{"type": "eq", "fun": lambda w: w.sum() - 1.0}],
        method="SLSQP",
        options={"ftol": 1e-15, "maxiter": 500},
    )
    return float(np.linalg.norm(res.x @ V))


def abs_eps_interval(z, eps):
    """eps-subdifferential of |.| at z from its defining inequality, sampled on a fine s-grid.

    s belongs iff |y| >= |z| + s (y - z) - eps for all y, i.e. iff both
    1 - s >= 0, 1 + s >= 0 (y -> +/-inf) and the y = 0 case |z| - s z <= eps hold.
    """
    lo, hi = -1.0, 1.0
    # |z| - s z <= eps  <=>  s z >= |z| - eps
    if z > 0:
        lo = max(lo, (abs(z) - eps) / z)
    elif z < 0:
        hi = min(hi, (abs(z) - eps) / z)
    return lo, hi


def example32_interval_scan(theta, lam, zeta, sigma, i_max=60):
    """First i >= -1 where the halving iterate passes descent and the interval-based relaxed test."""
    x_k = min(1.0 / (2.0 * theta), lam)
    for i in range(-1, i_max + 1):
        z = x_k / 2.0 ** max(i, 0)
        step = abs(x_k - z)
        descent = abs(x_k) - abs(z) - (1 - sigma) / lam * step**2
        lo, hi = abs_eps_interval(z, zeta)
        dist = max(lo - 0.0, 0.0, 0.0 - hi)
        if descent >= 0 and dist <= theta * step:
            return i
    return None


def central_difference(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        out[j] = (f(x + e) - f(x - e)) / (2 * h)
    return out
