"""Problem model for DC programs ``f = g - h``.

``g`` is the pointwise maximum of finitely many smooth convex pieces and ``h``
is a finite convex function exposed through a value / epsilon-subgradient
oracle. The module also hosts the built-in problem registry.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import prox

__all__ = [
    "DcError",
    "DimensionError",
    "OracleFault",
    "SmoothConvexPiece",
    "MaxSmoothFunction",
    "ConvexOracle",
    "GSplit",
    "DcProblem",
    "as_vector",
    "dc_value",
    "registry_get",
    "registry_names",
]


class DcError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(DcError, ValueError):
    """A vector does not have the dimension a problem expects."""


class OracleFault(DcError, FloatingPointError):
    """A user oracle returned NaN or Inf.

    The offending point is kept on ``x`` so traces can report it.
    """

    def __init__(self, message: str, x=None):
        super().__init__(message)
        self.x = None if x is None else np.array(x, dtype=float)


def as_vector(x, dim: Optional[int] = None) -> np.ndarray:
    """Return ``x`` as a finite 1-D float array, checking ``dim`` if given."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        v = np.atleast_1d(v)
        if v.ndim != 1:
            raise DimensionError(f"expected a 1-D vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionError(f"expected dimension {dim}, got {v.shape[0]}")
    if not np.isfinite(v).all():
        raise DcError(f"vector has non-finite entries: {v}")
    return v


def _finite_scalar(val, what: str, x) -> float:
    val = float(val)
    if not np.isfinite(val):
        raise OracleFault(f"{what} returned {val} at x={np.asarray(x).tolist()}", x)
    return val


def _finite_array(val, what: str, x, dim: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(val, dtype=float))
    if arr.shape != (dim,):
        raise DimensionError(f"{what} returned shape {arr.shape}, expected ({dim},)")
    if not np.all(np.isfinite(arr)):
        raise OracleFault(f"{what} returned {arr} at x={np.asarray(x).tolist()}", x)
    return arr


@dataclass(frozen=True)
class SmoothConvexPiece:
    """One smooth convex piece ``g_i`` of a max-type function.

    ``lipschitz`` bounds the Lipschitz constant of the gradient when known.
    """

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    lipschitz: Optional[float] = None


class MaxSmoothFunction:
    """``g(x) = max_i g_i(x)`` over an ordered tuple of smooth convex pieces."""

    def __init__(self, pieces: Sequence[SmoothConvexPiece], dim: int):
        if len(pieces) < 1:
            raise ValueError("a max-type function needs at least one piece")
        if dim < 1:
            raise ValueError("dimension must be positive")
        self._pieces = tuple(pieces)
        self._dim = int(dim)

    @property
    def pieces(self) -> tuple[SmoothConvexPiece, ...]:
        return self._pieces

    @property
    def dim(self) -> int:
        return self._dim

    def __len__(self) -> int:
        return len(self._pieces)

    def piece_values(self, x) -> np.ndarray:
        x = as_vector(x, self._dim)
        return np.array(
            [_finite_scalar(p.value(x), f"piece {i} value", x) for i, p in enumerate(self._pieces)]
        )

    def value(self, x) -> float:
        return float(np.max(self.piece_values(x)))

    __call__ = value

    def piece_gradient(self, i: int, x) -> np.ndarray:
        x = as_vector(x, self._dim)
        return _finite_array(self._pieces[i].gradient(x), f"piece {i} gradient", x, self._dim)

    def gradients(self, x, indices: Optional[Sequence[int]] = None) -> np.ndarray:
        """Stack piece gradients at ``x`` as rows, for ``indices`` or all pieces."""
        if indices is None:
            indices = range(len(self._pieces))
        return np.array([self.piece_gradient(i, x) for i in indices]).reshape(-1, self._dim)

    def subgradient(self, x) -> np.ndarray:
        """Gradient of the first maximizing piece, an element of the subdifferential."""
        vals = self.piece_values(x)
        return self.piece_gradient(int(np.argmax(vals)), x)


@dataclass(frozen=True)
class ConvexOracle:
    """Finite convex function given by its value and an epsilon-subgradient map.

    ``eps_subgradient(x, eps)`` must return one element of the
    ``eps``-subdifferential at ``x``. For differentiable functions this is
    just the gradient.
    """

    value: Callable[[np.ndarray], float]
    eps_subgradient: Callable[[np.ndarray, float], np.ndarray]
    dim: int

    def __call__(self, x) -> float:
        x = as_vector(x, self.dim)
        return _finite_scalar(self.value(x), "h value", x)

    def subgradient(self, x, eps: float = 0.0) -> np.ndarray:
        x = as_vector(x, self.dim)
        return _finite_array(self.eps_subgradient(x, eps), "h eps-subgradient", x, self.dim)

    @classmethod
    def differentiable(cls, value, gradient, dim: int) -> "ConvexOracle":
        return cls(value=value, eps_subgradient=lambda x, eps: gradient(x), dim=dim)


@dataclass(frozen=True)
class GSplit:
    """Decomposition ``g = smooth + nonsmooth`` used to build ISTA subproblems.

    ``prox(t, v)`` evaluates the proximal map of ``t * nonsmooth`` at ``v`` and
    ``lipschitz`` bounds the Lipschitz constant of ``smooth_gradient``.
    """

    smooth_value: Callable[[np.ndarray], float]
    smooth_gradient: Callable[[np.ndarray], np.ndarray]
    lipschitz: float
    nonsmooth_value: Callable[[np.ndarray], float]
    prox: Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class DcProblem:
    """A DC program ``min g(x) - h(x)`` over the whole space."""

    name: str
    g: MaxSmoothFunction
    h: ConvexOracle
    known_optimum: Optional[tuple[np.ndarray, float]] = None
    split: Optional[GSplit] = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.g.dim != self.h.dim:
            raise DimensionError(f"g has dimension {self.g.dim} but h has {self.h.dim}")

    @property
    def dim(self) -> int:
        return self.g.dim

    def value(self, x) -> float:
        return dc_value(self, x)


def dc_value(problem: DcProblem, x) -> float:
    """Evaluate ``f(x) = g(x) - h(x)``."""
    x = as_vector(x, problem.dim)
    val = problem.g.value(x) - problem.h(x)
    return _finite_scalar(val, "f", x)


# -- registry ---------------------------------------------------------------


def _paper2d() -> DcProblem:
    # g(x) = xa^2 + xb^2 + xa*xb + max(-xa, 0), h(x) = (xb - 1)^2 / 2
    A = np.array([[2.0, 1.0], [1.0, 2.0]])

    def quad(x):
        return x[0] ** 2 + x[1] ** 2 + x[0] * x[1]

    g1 = SmoothConvexPiece(
        value=lambda x: quad(x) - x[0],
        gradient=lambda x: A @ x - np.array([1.0, 0.0]),
        lipschitz=3.0,
    )
    g2 = SmoothConvexPiece(value=quad, gradient=lambda x: A @ x, lipschitz=3.0)
    h = ConvexOracle.differentiable(
        value=lambda x: 0.5 * (x[1] - 1.0) ** 2,
        gradient=lambda x: np.array([0.0, x[1] - 1.0]),
        dim=2,
    )
    split = GSplit(
        smooth_value=quad,
        smooth_gradient=lambda x: A @ x,
        lipschitz=3.0,
        nonsmooth_value=lambda x: max(-x[0], 0.0),
        prox=prox.prox_neg_part_first,
    )
    # stationarity on the xa > 0 branch: 2xa + xb = 0, xa + xb + 1 = 0
    return DcProblem(
        name="paper2d",
        g=MaxSmoothFunction([g1, g2], 2),
        h=h,
        known_optimum=(np.array([1.0, -2.0]), -1.5),
        split=split,
    )


def _abs1d() -> DcProblem:
    g = MaxSmoothFunction(
        [
            SmoothConvexPiece(lambda x: x[0], lambda x: np.array([1.0]), 0.0),
            SmoothConvexPiece(lambda x: -x[0], lambda x: np.array([-1.0]), 0.0),
        ],
        1,
    )
    h = ConvexOracle.differentiable(lambda x: 0.0, lambda x: np.zeros(1), 1)
    split = GSplit(
        smooth_value=lambda x: 0.0,
        smooth_gradient=lambda x: np.zeros_like(x),
        lipschitz=0.0,
        nonsmooth_value=lambda x: abs(x[0]),
        prox=prox.soft_threshold,
    )
    return DcProblem(
        name="abs1d", g=g, h=h, known_optimum=(np.zeros(1), 0.0), split=split
    )


RAND_MAXQUAD_RIDGE = 1.1


def _rand_maxquad(n: int, p: int, seed: int) -> DcProblem:
    if n < 1 or p < 1:
        raise ValueError(f"rand_maxquad needs n >= 1 and p >= 1, got n={n}, p={p}")
    rng = np.random.default_rng([seed, n, p])
    As = rng.standard_normal((p, n, n))
    Ms = np.einsum("kji,kjl->kil", As, As)  # A_i^T A_i
    bs = rng.standard_normal((p, n))
    c = rng.standard_normal(n)
    r = RAND_MAXQUAD_RIDGE
    Qs = Ms + r * np.eye(n)

    def make_piece(Q, b):
        lip = float(np.linalg.eigvalsh(Q)[-1])
        return SmoothConvexPiece(
            value=lambda x: 0.5 * x @ Q @ x + b @ x,
            gradient=lambda x: Q @ x + b,
            lipschitz=lip,
        )

    pieces = [make_piece(Qs[i], bs[i]) for i in range(p)]
    h = ConvexOracle.differentiable(
        value=lambda x: 0.5 * float((x - c) @ (x - c)),
        gradient=lambda x: x - c,
        dim=n,
    )
    split = GSplit(
        smooth_value=lambda x: 0.5 * r * float(x @ x),
        smooth_gradient=lambda x: r * x,
        lipschitz=r,
        nonsmooth_value=lambda x: float(
            max(0.5 * x @ Ms[i] @ x + bs[i] @ x for i in range(p))
        ),
        prox=lambda t, v: prox.prox_max_quadratic(t, v, Ms, bs),
    )
    return DcProblem(
        name=f"rand_maxquad({n}, {p})",
        g=MaxSmoothFunction(pieces, n),
        h=h,
        split=split,
        meta={"seed": seed, "n": n, "p": p, "Q": Qs, "b": bs, "c": c},
    )


_RAND_RE = re.compile(r"^rand_maxquad\s*(?:\(\s*(\d+)\s*,\s*(\d+)\s*\))?$")


def registry_names() -> list[str]:
    return ["paper2d", "abs1d", "rand_maxquad(n, p)"]


def registry_get(
    name: str, seed: Optional[int] = None, n: Optional[int] = None, p: Optional[int] = None
) -> DcProblem:
    """Build a registry problem by name.

    ``rand_maxquad`` accepts its shape either inline, ``"rand_maxquad(4, 3)"``,
    or through ``n`` and ``p``. It is deterministic in ``(seed, n, p)``.
    """
    key = name.strip()
    if key == "paper2d":
        return _paper2d()
    if key == "abs1d":
        return _abs1d()
    m = _RAND_RE.match(key)
    if m:
        if m.group(1) is not None:
            n, p = int(m.group(1)), int(m.group(2))
        if n is None or p is None:
            raise ValueError("rand_maxquad needs n and p")
        return _rand_maxquad(int(n), int(p), 0 if seed is None else int(seed))
    raise KeyError(f"unknown problem {name!r}; known: {', '.join(registry_names())}")
