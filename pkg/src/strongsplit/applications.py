"""Prox of a sum, strong-plus-weak minimization and best approximation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import ProxFunction, as_operator, as_vector
from .operators import ConvexSet, Halfspace, normal_cone, scaled_plus_quadratic
from .solver import (ConfigurationError, DEFAULT_BETA, LyapunovWitness, SolveReport,
                     solve, solve_aamr, solve_dr, witness_from_normals)
from .strengthening import reflector, trajectory_probe

METHODS = ("strengthened", "dr", "aamr")


def _dispatch(A, B, z, method: str, config: dict) -> SolveReport:
    cfg = dict(config)
    if method == "strengthened":
        return solve(A, B, z, **cfg)
    cfg.pop("witness", None)
    cfg.pop("r0", None)
    z0 = cfg.pop("z0", None)
    if method == "dr":
        return solve_dr(A, B, z, w0=z0, **cfg)
    if method == "aamr":
        return solve_aamr(A, B, z, v0=z0, **cfg)
    raise ConfigurationError(f"unknown method {method!r}; choose from {METHODS}")


def _attach_probe(report: SolveReport, A, B, z, beta, r):
    """On non-convergence, look for evidence that no solution exists."""
    if report.converged:
        return report
    probe = trajectory_probe(reflector(A, B, beta, z, r), np.zeros_like(z))
    report.notes.append(f"probe: {probe.verdict} ({probe.reason})")
    if probe.verdict == "diverging":
        report.notes.append("the resolvent of the sum may not exist at z")
    return report


def prox_of_sum(f: ProxFunction, g: ProxFunction, z, method: str = "strengthened",
                **config) -> SolveReport:
    """Approximate ``prox_{f+g}(z)`` using only ``prox_f`` and ``prox_g``."""
    z = as_vector(z)
    A, B = as_operator(f), as_operator(g)
    report = _dispatch(A, B, z, method, config)
    beta = config.get("beta", DEFAULT_BETA)
    return _attach_probe(report, A, B, z, beta, config.get("r0") or 1.0)


def prox_sum_objective(f: ProxFunction, g: ProxFunction, z, u) -> float:
    """``|u - z|^2 / 2 + f(u) + g(u)``; needs both ``value`` callables."""
    d = np.asarray(u, dtype=float) - np.asarray(z, dtype=float)
    return 0.5 * float(d @ d) + f.value(u) + g.value(u)


@dataclass
class StrongWeakProblem:
    """Minimize ``f~ + g~`` with ``f~`` gamma-strongly and ``g~`` omega-weakly convex.

    ``f~ = h_f + (q_f/2)|.|^2`` and ``g~ = h_g + (q_g/2)|.|^2`` for convex
    cores ``h_f``, ``h_g``. The defaults ``q_f = gamma`` and ``q_g = -omega``
    are the tight splits; larger values are allowed.
    """

    f_core: ProxFunction
    g_core: ProxFunction
    gamma: float
    omega: float
    f_quadratic: Optional[float] = None
    g_quadratic: Optional[float] = None
    known_solution: Optional[np.ndarray] = None

    def __post_init__(self):
        if not (self.gamma > 0 and self.omega > 0):
            raise ConfigurationError("gamma and omega must be positive")
        if not self.gamma > self.omega:
            raise ConfigurationError(
                f"need gamma > omega, got gamma={self.gamma}, omega={self.omega}")
        if self.f_quadratic is None:
            self.f_quadratic = self.gamma
        if self.g_quadratic is None:
            self.g_quadratic = -self.omega
        if self.f_quadratic < self.gamma or self.g_quadratic < -self.omega:
            raise ConfigurationError("quadratic split must leave convex remainders")

    def convex_pair(self):
        """``f = (f~ - gamma/2|.|^2)/(gamma-omega)``, ``g = (g~ + omega/2|.|^2)/(gamma-omega)``."""
        c = 1.0 / (self.gamma - self.omega)
        f = scaled_plus_quadratic(self.f_core, c, c * (self.f_quadratic - self.gamma))
        g = scaled_plus_quadratic(self.g_core, c, c * (self.g_quadratic + self.omega))
        return f, g


def strong_weak_minimize(p: StrongWeakProblem, method: str = "strengthened",
                         **config) -> SolveReport:
    """The minimizer of ``f~ + g~`` equals ``prox_{f+g}(0)`` for the convex pair."""
    f, g = p.convex_pair()
    if config.get("known_solution") is None:
        config["known_solution"] = p.known_solution
    dim = config.pop("dimension", None)
    z = config.pop("z", None)
    if z is None:
        if dim is None:
            known = config["known_solution"]
            dim = 1 if known is None else np.size(known)
        z = np.zeros(dim)
    return prox_of_sum(f, g, z, method, **config)


@dataclass
class BestApproxProblem:
    C: ConvexSet
    D: ConvexSet
    z: np.ndarray

    def __post_init__(self):
        self.z = as_vector(self.z)
        if not self.C.dim == self.D.dim == self.z.shape[0]:
            raise ConfigurationError("C, D and z must share a dimension")


def affine_constraints(C: ConvexSet, D: ConvexSet):
    """Stacked ``(N, c)`` describing ``C cap D`` for two affine sets, else None."""
    kc, kd = C.constraints(), D.constraints()
    if kc is None or kd is None:
        return None
    return np.vstack([kc[0], kd[0]]), np.concatenate([kc[1], kd[1]]), kc[0].shape[0]


def affine_intersection_projection(C: ConvexSet, D: ConvexSet, z, atol: float = 1e-9):
    """``P_{C cap D}(z)`` for affine sets via the stacked equality constraints."""
    data = affine_constraints(C, D)
    if data is None:
        raise ValueError("both sets must be affine")
    N, c, _ = data
    z = as_vector(z)
    x = z - np.linalg.lstsq(N, N @ z - c, rcond=None)[0]
    if np.linalg.norm(N @ x - c) > atol * max(1.0, np.linalg.norm(c)):
        raise ValueError("affine sets do not intersect")
    return x


def halfspace_pair_projection(C: Halfspace, D: Halfspace, z, atol: float = 1e-12):
    """``P_{C cap D}(z)`` for two halfspaces by enumerating active constraints.

    The candidate with nonnegative multipliers that lies in both sets is the
    KKT point; ``ValueError`` if there is none (the sets are disjoint).
    """
    z = as_vector(z)
    N = np.vstack([C.normal, D.normal])
    b = np.array([C.offset, D.offset])
    scale = atol * max(1.0, np.linalg.norm(z), np.abs(b).max())
    for active in ((), (0,), (1,), (0, 1)):
        idx = list(active)
        lam = np.zeros(2)
        if idx:
            Na = N[idx]
            sol, *_ = np.linalg.lstsq(Na @ Na.T, Na @ z - b[idx], rcond=None)
            lam[idx] = sol
        x = z - N.T @ lam
        if np.all(lam >= -scale) and np.all(N @ x - b <= scale) \
                and np.all(np.abs(N[idx] @ x - b[idx]) <= scale):
            return x
    raise ValueError("halfspaces do not intersect")


def affine_witness(p: BestApproxProblem, beta: float, u_star=None) -> LyapunovWitness:
    """Lyapunov witness for affine sets: split ``z - u*`` into normal parts."""
    data = affine_constraints(p.C, p.D)
    if data is None:
        raise ValueError("both sets must be affine")
    N, _, m = data
    if u_star is None:
        u_star = affine_intersection_projection(p.C, p.D, p.z)
    coef = np.linalg.lstsq(N.T, p.z - u_star, rcond=None)[0]
    normal_C = N[:m].T @ coef[:m]
    return witness_from_normals(beta, p.z, u_star, normal_C)


def best_approximation(p: BestApproxProblem, method: str = "strengthened",
                       **config) -> SolveReport:
    """Approximate ``P_{C cap D}(z)`` using only ``P_C`` and ``P_D``."""
    A, B = normal_cone(p.C), normal_cone(p.D)
    report = _dispatch(A, B, p.z, method, config)
    beta = config.get("beta", DEFAULT_BETA)
    return _attach_probe(report, A, B, p.z, beta, config.get("r0") or 1.0)
