"""Finite-dimensional Hilbert space model and the operator/prox interfaces.

Vectors are 1-D float64 numpy arrays. A maximal monotone operator is carried
around only through its resolvent ``(r, x) -> (I + rA)^{-1}(x)``; a convex
function only through its proximal map ``(t, x) -> argmin f(y) + |y-x|^2/2t``.
"""
from __future__ import annotations

from typing import Callable, Optional

import numpy as np

ResolventMap = Callable[[float, np.ndarray], np.ndarray]


class DimensionError(ValueError):
    """Operands of one computation do not share a dimension."""


def as_vector(x, dim: Optional[int] = None) -> np.ndarray:
    """Coerce ``x`` to a finite 1-D float array, optionally checking its size."""
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionError(f"expected dimension {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def inner(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.dot(a, b))


def norm(a) -> float:
    return float(np.sqrt(inner(a, a)))


class MonotoneOperator:
    """A maximal monotone operator known through its resolvent.

    Parameters
    ----------
    resolvent : callable
        ``resolvent(r, x)`` returns ``J_{rA}(x)`` for every ``r > 0``.
    label : str
        Human-readable name used in reports.
    forward : callable, optional
        ``forward(x)`` evaluates ``A(x)`` when the operator is single-valued
        and everywhere defined. Only used to build certificates and tests.
    """

    __slots__ = ("_resolvent", "label", "forward")

    def __init__(self, resolvent: ResolventMap, label: str = "A",
                 forward: Optional[Callable[[np.ndarray], np.ndarray]] = None):
        self._resolvent = resolvent
        self.label = label
        self.forward = forward

    def resolvent(self, r: float, x: np.ndarray) -> np.ndarray:
        if not r > 0:
            raise ValueError(f"resolvent parameter must be positive, got {r}")
        return self._resolvent(r, x)

    def scaled(self, c: float) -> "MonotoneOperator":
        """Return the operator ``cA`` (``c > 0``)."""
        if not c > 0:
            raise ValueError("scale must be positive")
        fwd = None
        if self.forward is not None:
            fwd = lambda x, f=self.forward: c * f(x)
        return MonotoneOperator(lambda r, x: self._resolvent(c * r, x),
                                f"{c:g}*{self.label}", fwd)

    def __repr__(self):
        return f"MonotoneOperator({self.label!r})"


class ProxFunction:
    """A proper lsc convex function given by its proximal map.

    ``value`` may return ``np.inf`` outside the domain. ``gradient`` is an
    optional single-valued subgradient map for differentiable functions.
    """

    __slots__ = ("_prox", "value", "label", "gradient")

    def __init__(self, prox: ResolventMap, value=None, label: str = "f",
                 gradient=None):
        self._prox = prox
        self.value = value
        self.label = label
        self.gradient = gradient

    def prox(self, t: float, x: np.ndarray) -> np.ndarray:
        if not t > 0:
            raise ValueError(f"prox parameter must be positive, got {t}")
        return self._prox(t, x)

    def __repr__(self):
        return f"ProxFunction({self.label!r})"


def as_operator(f: ProxFunction) -> MonotoneOperator:
    """The subdifferential of ``f``; its resolvent is ``prox_{rf}``."""
    return MonotoneOperator(f.prox, f"d{f.label}", f.gradient)


def firm_nonexpansive_violation(J: Callable[[np.ndarray], np.ndarray],
                                xs: np.ndarray, ys: np.ndarray) -> float:
    """Largest ``|Jx-Jy|^2 - <x-y, Jx-Jy>`` over the row pairs of ``xs, ys``.

    A non-positive return value (up to rounding) means no sampled pair
    violates firm nonexpansiveness.
    """
    worst = -np.inf
    for x, y in zip(xs, ys):
        d = J(x) - J(y)
        worst = max(worst, float(d @ d - (x - y) @ d))
    return worst
