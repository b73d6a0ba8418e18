"""Closed-form operators, proximal maps and projections."""
from __future__ import annotations

import numpy as np
import scipy.linalg
from scipy.linalg.lapack import dgesv

from .core import MonotoneOperator, ProxFunction, as_operator, as_vector

MONOTONE_EIG_TOL = 1e-12


# -- linear operators -------------------------------------------------------

class LinearMonotoneOperator(MonotoneOperator):
    """``A(x) = Mx`` with ``M + M^T`` positive semidefinite."""

    __slots__ = ("matrix", "_eye")

    def __init__(self, matrix, label: str = "M"):
        M = np.array(matrix, dtype=float, ndmin=2)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError(f"matrix must be square, got shape {M.shape}")
        if not np.all(np.isfinite(M)):
            raise ValueError("matrix has non-finite entries")
        sym_min = np.linalg.eigvalsh(0.5 * (M + M.T)).min()
        if sym_min < -MONOTONE_EIG_TOL:
            raise ValueError(
                f"matrix is not monotone: symmetric part has eigenvalue {sym_min:.3e}")
        M = np.asfortranarray(M)  # LAPACK layout, so dgesv does not copy
        M.setflags(write=False)
        self.matrix = M
        self._eye = np.asfortranarray(np.eye(M.shape[0]))
        super().__init__(self._resolvent_linear, label, M.dot)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def _resolvent_linear(self, r, x):
        return resolvent_linear(self, r, x)


def resolvent_linear(M: LinearMonotoneOperator, r: float, x) -> np.ndarray:
    """Solve ``(I + rM) w = x``."""
    if not r > 0:
        raise ValueError(f"r must be positive, got {r}")
    _, _, w, info = dgesv(M._eye + r * M.matrix, np.asarray(x, dtype=float), overwrite_a=1)
    if info != 0:  # pragma: no cover - excluded by monotonicity
        raise RuntimeError("singular resolvent system for a monotone matrix")
    return w


def zero_operator(label: str = "0") -> MonotoneOperator:
    return MonotoneOperator(lambda r, x: np.array(x, dtype=float), label,
                            lambda x: np.zeros_like(x, dtype=float))


def random_monotone_matrix(rng: np.random.Generator, n: int, *,
                           skew: float = 0.0, scale: float = 1.0) -> np.ndarray:
    """Random PSD matrix ``G G^T / n`` plus an optional skew-symmetric part."""
    G = rng.standard_normal((n, n))
    M = scale * (G @ G.T) / n
    if skew:
        K = rng.standard_normal((n, n))
        M = M + skew * (K - K.T) / np.sqrt(n)
    return M


# -- proximal maps ----------------------------------------------------------

def prox_l1(t: float, x) -> np.ndarray:
    """Soft thresholding, the prox of ``t * |.|_1``."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def l1_norm(weight: float = 1.0) -> ProxFunction:
    return ProxFunction(lambda t, x: prox_l1(weight * t, x),
                        lambda x: weight * float(np.abs(x).sum()),
                        f"{weight:g}*|.|_1")


def zero_function() -> ProxFunction:
    return ProxFunction(lambda t, x: np.array(x, dtype=float), lambda x: 0.0,
                        "0", lambda x: np.zeros_like(x, dtype=float))


def squared_norm(weight: float = 1.0) -> ProxFunction:
    """``(weight/2) |x|^2``."""
    return ProxFunction(lambda t, x: np.asarray(x, dtype=float) / (1.0 + t * weight),
                        lambda x: 0.5 * weight * float(np.dot(x, x)),
                        f"{weight:g}/2*|.|^2",
                        lambda x: weight * np.asarray(x, dtype=float))


def linear_function(c) -> ProxFunction:
    """``<c, x>``."""
    c = as_vector(c)
    return ProxFunction(lambda t, x: np.asarray(x, dtype=float) - t * c,
                        lambda x: float(c @ x), "<c,.>",
                        lambda x: c.copy())


def indicator(S: "ConvexSet") -> ProxFunction:
    """Indicator of ``S``; every prox parameter gives the projection."""
    def value(x):
        return 0.0 if S.distance(x) <= 1e-9 else np.inf
    return ProxFunction(lambda t, x: S.project(x), value, f"i_{S.kind}")


def normal_cone(S: "ConvexSet") -> MonotoneOperator:
    return as_operator(indicator(S))


def prox_scaled_plus_quadratic(h: ProxFunction, a: float, b: float, t: float,
                               x) -> np.ndarray:
    """Prox with parameter ``t`` of ``y -> a h(y) + (b/2)|y|^2`` at ``x``."""
    if a < 0 or b < 0 or a + b <= 0:
        raise ValueError("need a >= 0, b >= 0 and a + b > 0")
    if not t > 0:
        raise ValueError("t must be positive")
    x = np.asarray(x, dtype=float)
    d = 1.0 + t * b
    if a == 0:
        return x / d
    return h.prox(t * a / d, x / d)


def scaled_plus_quadratic(h: ProxFunction, a: float, b: float) -> ProxFunction:
    """The function ``a h + (b/2)|.|^2`` as a :class:`ProxFunction`."""
    def value(x):
        q = 0.5 * b * float(np.dot(x, x))
        return q + a * h.value(x) if a else q

    grad = None
    if h.gradient is not None:
        grad = lambda x: a * h.gradient(x) + b * np.asarray(x, dtype=float)
    return ProxFunction(lambda t, x: prox_scaled_plus_quadratic(h, a, b, t, x),
                        value if h.value is not None else None,
                        f"{a:g}*{h.label}+{b:g}/2*|.|^2", grad)


# -- convex sets ------------------------------------------------------------

class ConvexSet:
    """Nonempty closed convex set with a closed-form projection."""

    kind = "abstract"

    def project(self, x) -> np.ndarray:
        raise NotImplementedError

    def distance(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(np.linalg.norm(x - self.project(x)))

    def constraints(self):
        """``(N, c)`` with ``S = {x : N x = c}`` for affine sets, else ``None``."""
        return None

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """``n`` points of the set (used by tests)."""
        pts = rng.standard_normal((n, self.dim)) * 3.0
        return np.array([self.project(p) for p in pts])


class Box(ConvexSet):
    kind = "box"

    def __init__(self, lower, upper):
        lo = np.asarray(lower, dtype=float)
        hi = np.asarray(upper, dtype=float)
        lo, hi = np.broadcast_arrays(np.atleast_1d(lo), np.atleast_1d(hi))
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo > hi):
            raise ValueError("box needs lower <= upper componentwise")
        self.lower, self.upper = lo.astype(float), hi.astype(float)
        self.dim = self.lower.shape[0]

    def project(self, x):
        return np.clip(np.asarray(x, dtype=float), self.lower, self.upper)


class Ball(ConvexSet):
    kind = "ball"

    def __init__(self, center, radius: float):
        self.center = as_vector(center)
        if not radius > 0:
            raise ValueError("ball radius must be positive")
        self.radius = float(radius)
        self.dim = self.center.shape[0]

    def project(self, x):
        x = np.asarray(x, dtype=float)
        d = x - self.center
        nd = np.linalg.norm(d)
        if nd <= self.radius:
            return x.copy()
        return self.center + (self.radius / nd) * d


class Halfspace(ConvexSet):
    """``{x : <a, x> <= b}``."""

    kind = "halfspace"

    def __init__(self, normal, offset: float):
        self.normal = as_vector(normal)
        nn = float(self.normal @ self.normal)
        if nn == 0:
            raise ValueError("halfspace normal must be nonzero")
        self._nn = nn
        self.offset = float(offset)
        self.dim = self.normal.shape[0]

    def project(self, x):
        x = np.asarray(x, dtype=float)
        excess = self.normal @ x - self.offset
        if excess <= 0:
            return x.copy()
        return x - (excess / self._nn) * self.normal


class Hyperplane(ConvexSet):
    """``{x : <a, x> = b}``."""

    kind = "hyperplane"

    def __init__(self, normal, offset: float):
        self.normal = as_vector(normal)
        nn = float(self.normal @ self.normal)
        if nn == 0:
            raise ValueError("hyperplane normal must be nonzero")
        self._nn = nn
        self.offset = float(offset)
        self.dim = self.normal.shape[0]

    def project(self, x):
        x = np.asarray(x, dtype=float)
        return x - ((self.normal @ x - self.offset) / self._nn) * self.normal

    def constraints(self):
        return self.normal[None, :], np.array([self.offset])


class AffineSubspace(ConvexSet):
    """``offset + span(basis columns)``."""

    kind = "affine-subspace"

    def __init__(self, basis, offset=None):
        B = np.array(basis, dtype=float, ndmin=2)
        if B.ndim != 2 or not np.all(np.isfinite(B)):
            raise ValueError("basis must be a finite 2-D array (columns span)")
        n = B.shape[0]
        self.dim = n
        self.offset = np.zeros(n) if offset is None else as_vector(offset, n)
        # orthonormal basis of the column span
        Q = scipy.linalg.orth(B) if B.shape[1] else np.zeros((n, 0))
        self.basis = Q

    def project(self, x):
        x = np.asarray(x, dtype=float)
        d = x - self.offset
        return self.offset + self.basis @ (self.basis.T @ d)

    def constraints(self):
        N = scipy.linalg.null_space(self.basis.T) if self.basis.shape[1] else np.eye(self.dim)
        N = N.T
        return N, N @ self.offset


class Singleton(ConvexSet):
    kind = "singleton"

    def __init__(self, point):
        self.point = as_vector(point)
        self.dim = self.point.shape[0]

    def project(self, x):
        return self.point.copy()

    def constraints(self):
        return np.eye(self.dim), self.point.copy()


def random_subspace(rng: np.random.Generator, n: int, k: int) -> AffineSubspace:
    """Uniformly random ``k``-dimensional linear subspace of ``R^n``."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    return AffineSubspace(rng.standard_normal((n, k)))


def project(S: ConvexSet, x) -> np.ndarray:
    """Nearest point of ``S`` to ``x``."""
    return S.project(x)
