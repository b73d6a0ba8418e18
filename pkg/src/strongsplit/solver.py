"""Splitting iteration with a shrinking step schedule, plus DR/AAMR baselines.

The proposed method runs a three-sequence recursion on the strengthened pair
(``G_A``, ``G_B``) with steps ``r_k`` driven by

    r_{k+1} = r_k / sqrt(1 + 2 r_k (1-beta)/beta),   0 < r_0 < 2(1-beta)/beta,

and recovers ``J_{A+B}(z)`` as ``x_k / beta + z`` at rate O(1/k).
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.linalg.blas import daxpy, dnrm2

from .core import MonotoneOperator, as_vector
from .strengthening import (ComposedReflector, StrengthenedOperator, apply_T,
                            strengthened_resolvent)

log = logging.getLogger(__name__)

DEFAULT_BETA = 0.5
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 100_000
R0_FRACTION = 0.99


class ConfigurationError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


class StopReason(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"


def r_cap(beta: float) -> float:
    """Exclusive upper bound ``2(1-beta)/beta`` on the initial step."""
    return 2.0 * (1.0 - beta) / beta


def default_r0(beta: float) -> float:
    return R0_FRACTION * r_cap(beta)


def check_parameters(beta: float, r0: float) -> None:
    if not 0.0 < beta < 1.0:
        raise ConfigurationError(f"beta out of (0,1): {beta}")
    if not 0.0 < r0 < r_cap(beta):
        raise ConfigurationError(
            f"r0 violates (C1) bound: need 0 < r0 < {r_cap(beta):g}, got {r0}")


# -- step schedule ----------------------------------------------------------

@dataclass(frozen=True)
class StepSchedule:
    beta: float
    r0: float
    current_r: float
    k: int = 0

    @classmethod
    def start(cls, beta: float, r0: float) -> "StepSchedule":
        check_parameters(beta, r0)
        return cls(beta, r0, r0, 0)


def next_r(s: StepSchedule) -> StepSchedule:
    r = s.current_r
    return StepSchedule(s.beta, s.r0,
                        r / math.sqrt(1.0 + 2.0 * r * (1.0 - s.beta) / s.beta), s.k + 1)


def schedule_values(beta: float, r0: float, n: int) -> np.ndarray:
    """``r_0, ..., r_n`` as an array."""
    out = np.empty(n + 1)
    s = StepSchedule.start(beta, r0)
    out[0] = s.current_r
    for i in range(1, n + 1):
        s = next_r(s)
        out[i] = s.current_r
    return out


# -- state and iteration ----------------------------------------------------

@dataclass(frozen=True)
class SolverState:
    x: np.ndarray
    y: np.ndarray
    zv: Optional[np.ndarray]
    schedule: StepSchedule
    k: int = 0

    @property
    def r(self) -> float:
        return self.schedule.current_r

    @property
    def beta(self) -> float:
        return self.schedule.beta


def init_state(A: MonotoneOperator, beta: float, r0: float, z, z0=None) -> SolverState:
    """``x_0 = J_{r_0 G_A}(z_0)`` and ``y_0 = (z_0 - x_0)/r_0``.

    The third sequence is left unset; :func:`step` fills it in at ``k = 0``
    from the B-update so that every ``z_k`` is a genuine B-resolvent output.
    """
    sched = StepSchedule.start(beta, r0)
    z = as_vector(z)
    z0 = np.zeros_like(z) if z0 is None else as_vector(z0, z.shape[0])
    x0 = strengthened_resolvent(StrengthenedOperator(A, beta, z), r0, z0)
    y0 = (z0 - x0) / r0
    return SolverState(x0, y0, None, sched, 0)


def _b_update(B_s: StrengthenedOperator, r: float, x, y):
    return strengthened_resolvent(B_s, r, x - r * y)


def step(state: SolverState, A: MonotoneOperator, B: MonotoneOperator, z) -> SolverState:
    """One ``(x, y, z)`` update; ``x``/``y`` use the current step, ``z`` the next."""
    z = as_vector(z)
    return _step(state, StrengthenedOperator(A, state.beta, z),
                 StrengthenedOperator(B, state.beta, z))


def _step(state: SolverState, A_s: StrengthenedOperator,
          B_s: StrengthenedOperator) -> SolverState:
    r = state.r
    zv = state.zv
    if zv is None:
        zv = _b_update(B_s, r, state.x, state.y)
    w = zv + r * state.y
    x = strengthened_resolvent(A_s, r, w)
    y = (w - x) / r
    sched = next_r(state.schedule)
    zv_new = _b_update(B_s, sched.current_r, x, y)
    return SolverState(x, y, zv_new, sched, state.k + 1)


def recover(state: SolverState, z) -> np.ndarray:
    return state.x / state.beta + as_vector(z)


# -- Lyapunov certificate ---------------------------------------------------

@dataclass(frozen=True)
class LyapunovWitness:
    """Limit ``v`` and a selection ``v_A in G_A(v)`` with ``-v_A in G_B(v)``."""

    v: np.ndarray
    v_A: np.ndarray
    r: float = 1.0

    @property
    def v_B(self) -> np.ndarray:
        return -self.v_A


def lyapunov(state: SolverState, w: LyapunovWitness) -> float:
    dx = state.x - w.v
    dy = state.y - w.v_A
    return float(dx @ dx) / state.r ** 2 + float(dy @ dy)


def witness_from_solution(A: MonotoneOperator, beta: float, z, u_star) -> LyapunovWitness:
    """Witness for a known solution when ``A`` is single-valued."""
    z = as_vector(z)
    v = beta * (as_vector(u_star, z.shape[0]) - z)
    return LyapunovWitness(v, StrengthenedOperator(A, beta, z).forward(v))


def witness_from_normals(beta: float, z, u_star, normal_A) -> LyapunovWitness:
    """Witness from ``n_A in A(u*)`` with ``z - u* - n_A in B(u*)``."""
    z = as_vector(z)
    u_star = as_vector(u_star, z.shape[0])
    v = beta * (u_star - z)
    v_A = 2 * (1 - beta) * as_vector(normal_A, z.shape[0]) + ((1 - beta) / beta) * v
    return LyapunovWitness(v, v_A)


def witness_from_fixed_point(T: ComposedReflector, u) -> LyapunovWitness:
    v = strengthened_resolvent(T.first, T.r, u)
    return LyapunovWitness(v, (np.asarray(u, dtype=float) - v) / T.r, T.r)


def find_fixed_point(T: ComposedReflector, u0, tol: float = 1e-13,
                     max_iter: int = 1_000_000) -> np.ndarray:
    """Averaged iteration ``u <- (u + T u)/2`` until ``|Tu - u|`` is below ``tol``."""
    u = as_vector(u0)
    for _ in range(max_iter):
        Tu = apply_T(T, u)
        if np.linalg.norm(Tu - u) <= tol * max(1.0, np.linalg.norm(u)):
            return Tu
        u = 0.5 * (u + Tu)
    raise NumericalFailure("no fixed point located; the inclusion may be unsolvable")


# -- driver -----------------------------------------------------------------

@dataclass
class SolveReport:
    solution: np.ndarray
    iterations: int
    residual_trace: List[float]
    r_trace: List[float]
    stop_reason: StopReason
    error_trace: Optional[List[float]] = None
    lyapunov_trace: Optional[List[float]] = None
    bound_trace: Optional[List[float]] = None
    method: str = "strengthened"
    notes: List[str] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.stop_reason is StopReason.CONVERGED


def _norm(v) -> float:
    return math.sqrt(float(v @ v))


def _checked_norm(v, k) -> float:
    nv = _norm(v)
    if not math.isfinite(nv):
        raise NumericalFailure(f"non-finite iterate at iteration {k}")
    return nv


def solve(A: MonotoneOperator, B: MonotoneOperator, z, *, beta: float = DEFAULT_BETA,
          r0: Optional[float] = None, z0=None, tol: float = DEFAULT_TOL,
          max_iter: int = DEFAULT_MAX_ITER, witness: Optional[LyapunovWitness] = None,
          known_solution=None) -> SolveReport:
    """Approximate ``J_{A+B}(z)`` with the shrinking-step splitting method.

    Stops once both ``|x_k - x_{k-1}|`` and the gap ``|x_k - z_{k-1}|`` are at
    most ``tol * max(1, |x_k|)``, or after ``max_iter`` steps. The gap keeps
    an empty solution set (where ``x_k`` can stall while ``y_k`` drifts) from
    passing as convergence. With a ``witness`` the report carries the Lyapunov
    values and the a-priori bound ``b_k = r_k sqrt(V_0)`` on ``|x_k - v|``.
    ``tol = 0`` always runs the full ``max_iter`` steps.
    """
    z = as_vector(z)
    if r0 is None:
        r0 = default_r0(beta) if 0 < beta < 1 else float("nan")
    if max_iter < 0:
        raise ConfigurationError("max_iter must be nonnegative")
    state = init_state(A, beta, r0, z, z0)
    u_star = None if known_solution is None else as_vector(known_solution, z.shape[0])

    residuals = [math.nan]
    rs = [state.r]
    errors = v_star = None
    if u_star is not None:
        v_star = beta * (u_star - z)
        errors = [_norm(state.x - v_star) / beta]
    lyap = bounds = None
    if witness is not None:
        V0 = lyapunov(state, witness)
        lyap, bounds = [V0], [state.r * math.sqrt(V0)]

    # Same recursion as repeated step(), unrolled on local variables. At
    # desk-scale dimensions the per-call overhead dominates, so the vector
    # updates go through BLAS axpy/nrm2 (``daxpy(u, v, a)`` overwrites ``v``
    # with ``v + a u``; every ``v`` passed is a fresh copy).
    b, c = beta, 1.0 - beta
    neg_bz = -b * z
    JA, JB = A.resolvent, B.resolvent
    sched = state.schedule
    r, k = state.r, 0
    x, y = state.x, state.y
    d = b + r * c
    zv = daxpy(JB(2.0 * r * c / d, daxpy(daxpy(y, x.copy(), a=-r), z.copy(), a=1.0 / d)),
               neg_bz.copy(), a=b)
    if witness is not None:
        wv, wa = witness.v, witness.v_A
        sqV0 = math.sqrt(V0)
        same_v = v_star is not None and np.array_equal(wv, v_star)
    reason = StopReason.MAX_ITER
    while k < max_iter:
        d = b + r * c
        w = daxpy(y, zv.copy(), a=r)  # z_{k-1} + r y_{k-1}
        x_new = daxpy(JA(2.0 * r * c / d, daxpy(w, z.copy(), a=1.0 / d)), neg_bz.copy(), a=b)
        # the A/B gap z_{k-1} - x_k equals r_{k-1}(y_k - y_{k-1})
        gap = zv - x_new
        y_new = daxpy(gap, y.copy(), a=1.0 / r)
        nx = dnrm2(x_new)
        if not math.isfinite(nx):
            raise NumericalFailure(f"non-finite iterate at iteration {k + 1}")
        res = max(dnrm2(x_new - x), dnrm2(gap)) / max(1.0, nx)
        r = r / math.sqrt(1.0 + 2.0 * r * c / b)
        k += 1
        x, y = x_new, y_new
        d = b + r * c
        zv = daxpy(JB(2.0 * r * c / d, daxpy(daxpy(y, x.copy(), a=-r), z.copy(), a=1.0 / d)),
                   neg_bz.copy(), a=b)
        residuals.append(res)
        rs.append(r)
        if errors is not None:
            ex = dnrm2(x - v_star)
            errors.append(ex / b)
        if witness is not None:
            if not same_v:
                ex = dnrm2(x - wv)
            ey = dnrm2(y - wa)
            lyap.append((ex / r) ** 2 + ey * ey)
            bounds.append(r * sqV0)
        if tol > 0 and res <= tol:
            reason = StopReason.CONVERGED
            break
    state = SolverState(x, y, zv, StepSchedule(sched.beta, sched.r0, r, k), k)
    log.debug("solve: %s after %d iterations", reason.value, state.k)
    return SolveReport(recover(state, z), state.k, residuals, rs, reason, errors, lyap,
                       bounds, "strengthened")


# -- baselines on the strengthened pair -------------------------------------

def dr_step(A_s: StrengthenedOperator, B_s: StrengthenedOperator, gamma: float,
            lam: float, w) -> np.ndarray:
    """``w + lam (J_{gB}(2 J_{gA} w - w) - J_{gA} w)`` with strengthened resolvents."""
    if not gamma > 0:
        raise ConfigurationError("gamma must be positive")
    if not 0 < lam <= 2:
        raise ConfigurationError("lambda must lie in (0, 2]")
    w = np.asarray(w, dtype=float)
    ja = strengthened_resolvent(A_s, gamma, w)
    return w + lam * (strengthened_resolvent(B_s, gamma, 2 * ja - w) - ja)


def aamr_operators(A_s: StrengthenedOperator, B_s: StrengthenedOperator,
                   gamma: float):
    """Strengthenings of ``cA`` and ``cB`` with ``c = gamma / (2(1-beta))``.

    Their resolvents at unit step are ``beta J_{gamma A}(x + z) - beta z``.
    """
    c = gamma / (2.0 * (1.0 - A_s.beta))
    return (StrengthenedOperator(A_s.base.scaled(c), A_s.beta, A_s.anchor),
            StrengthenedOperator(B_s.base.scaled(c), B_s.beta, B_s.anchor))


def aamr_step(A_s: StrengthenedOperator, B_s: StrengthenedOperator, gamma: float,
              lam: float, v) -> np.ndarray:
    """Averaged modified reflections: ``(1-lam) v + lam R_B R_A v``."""
    if not gamma > 0:
        raise ConfigurationError("gamma must be positive")
    if not 0 <= lam <= 1:
        raise ConfigurationError("lambda must lie in [0, 1]")
    Ac, Bc = aamr_operators(A_s, B_s, gamma)
    v = np.asarray(v, dtype=float)
    Tv = apply_T(ComposedReflector(Ac, Bc, 1.0), v)
    return (1 - lam) * v + lam * Tv


def _fixed_r_loop(update, shadow, z, beta, w0, tol, max_iter, u_star, r, method):
    w = w0
    s = shadow(w)
    residuals, rs = [math.nan], [r]
    errors = None
    if u_star is not None:
        errors = [_norm(s / beta + z - u_star)]
    reason = StopReason.MAX_ITER
    k = 0
    while k < max_iter:
        w_new = update(w)
        k += 1
        res = _norm(w_new - w) / max(1.0, _checked_norm(w_new, k))
        w = w_new
        s = shadow(w)
        residuals.append(res)
        rs.append(r)
        if errors is not None:
            errors.append(_norm(s / beta + z - u_star))
        if tol > 0 and res <= tol:
            reason = StopReason.CONVERGED
            break
    return SolveReport(s / beta + z, k, residuals, rs, reason, errors, method=method)


def solve_dr(A: MonotoneOperator, B: MonotoneOperator, z, *, beta: float = DEFAULT_BETA,
             gamma: float = 1.0, lam: float = 1.0, w0=None, tol: float = DEFAULT_TOL,
             max_iter: int = DEFAULT_MAX_ITER, known_solution=None) -> SolveReport:
    """Douglas-Rachford on the strengthened pair; the shadow ``J_{gA}(w)`` gives ``v``."""
    z = as_vector(z)
    A_s, B_s = StrengthenedOperator(A, beta, z), StrengthenedOperator(B, beta, z)
    dr_step(A_s, B_s, gamma, lam, z)  # validates gamma/lam
    w0 = np.zeros_like(z) if w0 is None else as_vector(w0, z.shape[0])
    u_star = None if known_solution is None else as_vector(known_solution, z.shape[0])
    return _fixed_r_loop(lambda w: dr_step(A_s, B_s, gamma, lam, w),
                         lambda w: strengthened_resolvent(A_s, gamma, w),
                         z, beta, w0, tol, max_iter, u_star, gamma, "dr")


def solve_aamr(A: MonotoneOperator, B: MonotoneOperator, z, *, beta: float = DEFAULT_BETA,
               gamma: Optional[float] = None, lam: float = 0.5, v0=None,
               tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
               known_solution=None) -> SolveReport:
    """AAMR; the recovered point tends to ``J_{c(A+B)}(z)``, ``c = gamma/(2(1-beta))``.

    The default ``gamma = 2(1-beta)`` makes ``c = 1``.
    """
    z = as_vector(z)
    if not 0 < beta < 1:
        raise ConfigurationError(f"beta out of (0,1): {beta}")
    if gamma is None:
        gamma = 2.0 * (1.0 - beta)
    A_s, B_s = StrengthenedOperator(A, beta, z), StrengthenedOperator(B, beta, z)
    aamr_step(A_s, B_s, gamma, lam, z)  # validates gamma/lam
    Ac, _ = aamr_operators(A_s, B_s, gamma)
    v0 = np.zeros_like(z) if v0 is None else as_vector(v0, z.shape[0])
    u_star = None if known_solution is None else as_vector(known_solution, z.shape[0])
    return _fixed_r_loop(lambda v: aamr_step(A_s, B_s, gamma, lam, v),
                         lambda v: strengthened_resolvent(Ac, 1.0, v),
                         z, beta, v0, tol, max_iter, u_star, gamma, "aamr")
