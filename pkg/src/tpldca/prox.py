"""Closed-form and small-scale proximal maps used by the registry splits.

All maps take the step ``t > 0`` first and the point ``v`` second, and return
``argmin_z  t * phi(z) + 0.5 * ||z - v||^2``.
"""

from __future__ import annotations

import numpy as np

__all__ = ["soft_threshold", "prox_neg_part_first", "prox_max_quadratic"]


def soft_threshold(t: float, v) -> np.ndarray:
    """Prox of ``t * |.|_1``: ``sign(v) * max(|v| - t, 0)``."""
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def prox_neg_part_first(t: float, v) -> np.ndarray:
    """Prox of ``t * max(-v[0], 0)``; all other coordinates pass through."""
    z = np.array(v, dtype=float)
    a = z[0]
    if a < -t:
        z[0] = a + t
    elif a <= 0.0:
        z[0] = 0.0
    return z


def prox_max_quadratic(t: float, v, Ms, bs, max_iter: int = 200) -> np.ndarray:
    """Prox of ``t * max_i (0.5 z'M_i z + b_i'z)`` with every ``M_i`` PSD.

    Solved through the dual over the simplex,

        max_w  D(w) = min_z  sum_i w_i q_i(z) + ||z - v||^2 / (2t),

    whose inner minimizer is ``z(w) = K(w)^{-1} (v/t - B w)`` with
    ``K(w) = sum_i w_i M_i + I/t``. ``D`` is smooth and concave with gradient
    ``q(z(w))`` and Hessian ``-G K^{-1} G'`` (rows of ``G`` are piece
    gradients), so an active-set Newton method on the faces of the simplex
    reaches machine precision in a handful of steps. On exit the pieces in the
    support agree to rounding, which keeps iterates exactly on kinks.
    """
    v = np.asarray(v, dtype=float)
    Ms = np.asarray(Ms, dtype=float)
    bs = np.asarray(bs, dtype=float)
    p, n = bs.shape
    eye_t = np.eye(n) / t

    def primal(w):
        K = eye_t + np.tensordot(w, Ms, axes=1)
        return np.linalg.solve(K, v / t - w @ bs), K

    def pieces(z):
        return 0.5 * np.einsum("i,kij,j->k", z, Ms, z) + bs @ z

    def dual(w):
        z, _ = primal(w)
        return float(w @ pieces(z) + (z - v) @ (z - v) / (2 * t))

    if p == 1:
        return primal(np.ones(1))[0]

    def slope(w, d):
        return float(pieces(primal(w)[0]) @ d)

    def line_max(w, d, amax):
        # concave along the segment: bisect on the directional derivative
        if slope(w + amax * d, d) >= 0.0:
            return amax
        lo, hi = 0.0, amax
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if slope(w + mid * d, d) > 0.0:
                lo = mid
            else:
                hi = mid
        return lo

    duals = [dual(np.eye(p)[i]) for i in range(p)]
    w = np.eye(p)[int(np.argmax(duals))]

    for _ in range(max_iter):
        z, K = primal(w)
        q = pieces(z)
        F = np.flatnonzero(w > 0.0)
        mu = float(w @ q)
        scale = 1.0 + abs(mu)

        # Newton step restricted to the current face
        d = np.zeros(p)
        if len(F) > 1:
            G = np.einsum("kij,j->ki", Ms[F], z) + bs[F]
            H = -G @ np.linalg.solve(K, G.T)
            m = len(F)
            kkt = np.zeros((m + 1, m + 1))
            kkt[:m, :m] = H
            kkt[:m, m] = -1.0
            kkt[m, :m] = 1.0
            rhs = np.concatenate([-q[F], [0.0]])
            sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
            d[F] = sol[:m]
            d[F] -= d[F].mean()

        face_gap = float(np.max(q[F]) - np.min(q[F]))
        if np.max(np.abs(d)) <= 1e-14 or face_gap <= 1e-15 * scale:
            out = np.setdiff1d(np.arange(p), F)
            if out.size == 0:
                break
            j = out[int(np.argmax(q[out]))]
            if q[j] <= mu + 1e-14 * scale:
                break
            # move mass towards the most violated vertex
            d = np.eye(p)[j] - w
            w = w + line_max(w, d, 1.0) * d
            w[w < 1e-300] = 0.0
            w /= w.sum()
            continue

        neg = d < 0.0
        ratios = np.where(neg, -w / np.where(neg, d, -1.0), np.inf)
        amax = float(np.min(ratios))
        alpha = min(1.0, amax)
        if slope(w, d) <= 0.0:
            # Newton direction failed to ascend; fall back to the projected gradient
            d = np.zeros(p)
            d[F] = q[F] - q[F].mean()
            neg = d < 0.0
            ratios = np.where(neg, -w / np.where(neg, d, -1.0), np.inf)
            amax = min(float(np.min(ratios)), 1e6)
            alpha = line_max(w, d, amax)
        elif dual(w + alpha * d) < dual(w) - 1e-15 * scale:
            alpha = line_max(w, d, alpha)
        w = w + alpha * d
        if alpha >= amax:
            w[int(np.argmin(ratios))] = 0.0
        w = np.maximum(w, 0.0)
        w /= w.sum()

    return primal(w)[0]
