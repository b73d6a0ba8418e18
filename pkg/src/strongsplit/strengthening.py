"""The strengthened, perturbed operator and the reflector built from it.

For ``beta`` in (0, 1) and an anchor ``z`` the strengthening of ``A`` is

    G = 2(1-beta) A(x/beta + z) + ((1-beta)/beta) x,

a ((1-beta)/beta)-strongly monotone operator. Zeros ``v`` of ``G_A + G_B``
correspond to the resolvent ``J_{A+B}(z) = v/beta + z``, and the resolvent of
``rG`` is available in closed form from the resolvent of ``A`` alone.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np

from .core import MonotoneOperator, as_vector

DEFAULT_BLOWUP = 1e12
DEFAULT_PROBE_ITER = 100_000
PLATEAU_WINDOW = 100
PLATEAU_RTOL = 1e-9


@dataclass(frozen=True)
class StrengthenedOperator:
    base: MonotoneOperator
    beta: float
    anchor: np.ndarray

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta out of (0,1): {self.beta}")
        object.__setattr__(self, "anchor", as_vector(self.anchor))

    @property
    def modulus(self) -> float:
        """Strong monotonicity constant ``(1-beta)/beta``."""
        return (1.0 - self.beta) / self.beta

    def forward(self, x) -> np.ndarray:
        """Evaluate the operator itself; needs a single-valued base."""
        if self.base.forward is None:
            raise TypeError(f"{self.base.label} has no single-valued evaluation")
        b = self.beta
        x = np.asarray(x, dtype=float)
        return 2 * (1 - b) * self.base.forward(x / b + self.anchor) + ((1 - b) / b) * x


def base_step(beta: float, r: float) -> float:
    """Resolvent parameter of the base operator matching ``r`` on the strengthening."""
    return 2.0 * r * (1.0 - beta) / (beta + r * (1.0 - beta))


def strengthened_resolvent(S: StrengthenedOperator, r: float, x) -> np.ndarray:
    """``J_{rG}(x) = beta J_{sA}(x/(beta + r(1-beta)) + z) - beta z``."""
    if not r > 0:
        raise ValueError(f"r must be positive, got {r}")
    b = S.beta
    d = b + r * (1.0 - b)
    s = 2.0 * r * (1.0 - b) / d
    x = np.asarray(x, dtype=float)
    return b * (S.base.resolvent(s, x / d + S.anchor) - S.anchor)


def reflected_resolvent(S: StrengthenedOperator, r: float, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return 2.0 * strengthened_resolvent(S, r, x) - x


@dataclass(frozen=True)
class ComposedReflector:
    """``T = R_B o R_A`` with ``R = 2J_{rG} - I`` for both strengthenings."""

    first: StrengthenedOperator
    second: StrengthenedOperator
    r: float

    def __post_init__(self):
        if self.first.beta != self.second.beta:
            raise ValueError("both strengthenings must share beta")
        if not np.array_equal(self.first.anchor, self.second.anchor):
            raise ValueError("both strengthenings must share the anchor")
        if not self.r > 0:
            raise ValueError("r must be positive")

    def __call__(self, x) -> np.ndarray:
        return apply_T(self, x)


def apply_T(T: ComposedReflector, x) -> np.ndarray:
    return reflected_resolvent(T.second, T.r, reflected_resolvent(T.first, T.r, x))


def reflector(A: MonotoneOperator, B: MonotoneOperator, beta: float, z,
              r: float) -> ComposedReflector:
    z = as_vector(z)
    return ComposedReflector(StrengthenedOperator(A, beta, z),
                             StrengthenedOperator(B, beta, z), r)


@dataclass
class ProbeReport:
    verdict: str
    iterates_norm_trace: List[float] = field(default_factory=list)
    iterations: int = 0
    reason: str = ""


def trajectory_probe(T: ComposedReflector, x0, max_iter: int = DEFAULT_PROBE_ITER,
                     blowup: float = DEFAULT_BLOWUP,
                     window: int = PLATEAU_WINDOW,
                     rtol: float = PLATEAU_RTOL) -> ProbeReport:
    """Iterate ``x <- T(x)`` and classify the orbit as bounded or diverging.

    ``T`` has a bounded orbit iff the underlying inclusion is solvable, but
    boundedness is not finitely decidable, so the verdict is evidence only:

    * ``diverging``: the norm passes ``blowup``, or the displacement
      ``T^{k+1}x - T^k x`` has settled on a nonzero vector ``d`` (then
      ``T^k x / k -> d`` and the orbit is unbounded).
    * ``bounded``: the norm changes by less than ``rtol * max(1, |x|)`` over
      a window, or the per-window maxima never grow over the second half
      of the run.
    * ``inconclusive``: neither.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    x = as_vector(x0)
    norms = [float(np.linalg.norm(x))]
    steps = []  # displacement history, only the last `window + 1` kept
    for k in range(1, max_iter + 1):
        x_new = apply_T(T, x)
        if not np.all(np.isfinite(x_new)):
            return ProbeReport("diverging", norms, k, "non-finite iterate")
        steps.append(x_new - x)
        if len(steps) > window + 1:
            steps.pop(0)
        x = x_new
        nx = float(np.linalg.norm(x))
        norms.append(nx)
        if nx > blowup:
            return ProbeReport("diverging", norms, k, f"norm exceeded {blowup:g}")
        if k < window:
            continue
        if abs(nx - norms[-1 - window]) <= rtol * max(1.0, nx):
            return ProbeReport("bounded", norms, k, "norm plateau")
        if len(steps) == window + 1 and nx > norms[-1 - window]:
            d, d_old = steps[-1], steps[0]
            nd = np.linalg.norm(d)
            if nd > rtol * max(1.0, nx) and np.linalg.norm(d - d_old) <= rtol * nd:
                return ProbeReport("diverging", norms, k,
                                   f"constant drift of norm {nd:.3e} per step")
    if _window_maxima_nonincreasing(norms, window):
        return ProbeReport("bounded", norms, max_iter, "window maxima nonincreasing")
    return ProbeReport("inconclusive", norms, max_iter, "no plateau, no blow-up")


def _window_maxima_nonincreasing(norms, window) -> bool:
    half = norms[len(norms) // 2:]
    if len(half) < 2 * window:
        return False
    maxima = [max(half[i:i + window]) for i in range(0, len(half) - window + 1, window)]
    return all(b <= a * (1 + PLATEAU_RTOL) + PLATEAU_RTOL for a, b in zip(maxima, maxima[1:]))
