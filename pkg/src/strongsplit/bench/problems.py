"""Turn a :class:`ProblemSpec` into operators, an oracle solution and a witness."""
from __future__ import annotations

import importlib
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..applications import (BestApproxProblem, StrongWeakProblem, affine_constraints,
                            affine_intersection_projection, affine_witness,
                            halfspace_pair_projection)
from ..core import MonotoneOperator, as_operator
from ..operators import (AffineSubspace, Ball, Box, Halfspace, Hyperplane,
                         LinearMonotoneOperator, Singleton, indicator, l1_norm,
                         linear_function, normal_cone, random_monotone_matrix,
                         random_subspace, squared_norm, zero_function, zero_operator)
from ..solver import (LyapunovWitness, find_fixed_point, witness_from_fixed_point,
                      witness_from_solution)
from ..strengthening import reflector
from .config import ConfigError, ProblemSpec, _float, _int, parse_matrix, parse_vector


@dataclass
class Instance:
    A: MonotoneOperator
    B: MonotoneOperator
    z: np.ndarray
    known_solution: Optional[np.ndarray] = None
    witness: Optional[LyapunovWitness] = None
    best_approx: Optional[BestApproxProblem] = None


def _vec(sec, key, dim, name):
    if key not in sec:
        raise ConfigError(f"{name}.{key}: required")
    v = parse_vector(sec[key], f"{name}.{key}")
    if v.shape[0] == 1 and dim > 1:
        v = np.full(dim, v[0])
    if v.shape[0] != dim:
        raise ConfigError(f"{name}.{key}: expected {dim} entries, got {v.shape[0]}")
    return v


def build_set(sec, dim, rng, name):
    kind = sec.get("type", "").strip()
    try:
        if kind == "box":
            return Box(_vec(sec, "lower", dim, name), _vec(sec, "upper", dim, name))
        if kind == "ball":
            radius = _float(sec, "radius", 1.0, f"{name}.radius")
            return Ball(_vec(sec, "center", dim, name), radius)
        if kind in ("halfspace", "hyperplane"):
            cls = Halfspace if kind == "halfspace" else Hyperplane
            return cls(_vec(sec, "normal", dim, name), _float(sec, "offset", 0.0, f"{name}.offset"))
        if kind == "affine-subspace":
            basis = parse_matrix(sec["basis"], f"{name}.basis") if "basis" in sec \
                else np.zeros((0, dim))
            if basis.shape[1] != dim:
                raise ConfigError(f"{name}.basis: vectors need {dim} entries")
            offset = _vec(sec, "offset", dim, name) if "offset" in sec else None
            return AffineSubspace(basis.T, offset)
        if kind == "singleton":
            return Singleton(_vec(sec, "point", dim, name))
        if kind == "random-subspace":
            rank = _int(sec, "rank")
            if rank is None or not 0 <= rank <= dim:
                raise ConfigError(f"{name}.rank: need 0 <= rank <= {dim}")
            return random_subspace(rng, dim, rank)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from None
    raise ConfigError(f"{name}.type: unknown set type {kind!r}")


def build_operator(sec, dim, rng, name) -> MonotoneOperator:
    kind = sec.get("type", "linear").strip()
    if kind == "zero":
        return zero_operator(name)
    if kind == "normal-cone":
        return normal_cone(build_set({**sec, "type": sec.get("set", "")}, dim, rng, name))
    if kind != "linear":
        raise ConfigError(f"{name}.type: unknown operator type {kind!r}")
    if "matrix" in sec:
        M = parse_matrix(sec["matrix"], f"{name}.matrix")
    else:
        rand = sec.get("random", "psd").strip()
        if rand not in ("psd", "monotone"):
            raise ConfigError(f"{name}.random: must be psd or monotone")
        skew = _float(sec, "skew", 0.5 if rand == "monotone" else 0.0, f"{name}.skew")
        M = random_monotone_matrix(rng, dim, skew=skew,
                                   scale=_float(sec, "scale", 1.0, f"{name}.scale"))
    if M.shape != (dim, dim):
        raise ConfigError(f"{name}.matrix: expected {dim}x{dim}, got {M.shape}")
    try:
        return LinearMonotoneOperator(M, name)
    except ValueError as exc:
        raise ConfigError(f"{name}.matrix: {exc}") from None


def build_function(sec, dim, rng, name):
    kind = sec.get("type", "").strip()
    weight = _float(sec, "weight", 1.0, f"{name}.weight")
    if kind == "zero":
        return zero_function()
    if kind == "l1":
        return l1_norm(weight)
    if kind == "squared_norm":
        return squared_norm(weight)
    if kind == "linear":
        return linear_function(_vec(sec, "c", dim, name))
    if kind == "indicator":
        return indicator(build_set({**sec, "type": sec.get("set", "")}, dim, rng, name))
    raise ConfigError(f"{name}.type: unknown function type {kind!r}")


def _set_pair_oracle(C, D, z):
    """Closed-form ``P_{C cap D}(z)`` where one is available, else None."""
    try:
        if affine_constraints(C, D) is not None:
            return affine_intersection_projection(C, D, z)
        if isinstance(C, Halfspace) and isinstance(D, Halfspace):
            return halfspace_pair_projection(C, D, z)
    except ValueError:
        pass
    return None


def _auto_witness(spec, A, z, u_star):
    if u_star is None or spec.witness == "none":
        return None
    if A.forward is not None:
        return witness_from_solution(A, spec.beta, z, u_star)
    return None


def build_instance(spec: ProblemSpec) -> Instance:
    rng = np.random.default_rng(spec.seed)
    dim = spec.dimension
    z = spec.z if spec.z is not None else np.zeros(dim)
    c = spec.components
    known = spec.known_solution
    ba = None

    if spec.kind == "linear_pair":
        A = build_operator(c["A"], dim, rng, "A")
        B = build_operator(c["B"], dim, rng, "B")
        if known is None and hasattr(A, "matrix") and hasattr(B, "matrix"):
            known = np.linalg.solve(np.eye(dim) + A.matrix + B.matrix, z)
    elif spec.kind == "best_approx":
        C = build_set(c["C"], dim, rng, "C")
        D = build_set(c["D"], dim, rng, "D")
        if spec.z is None:
            z = rng.standard_normal(dim)
        ba = BestApproxProblem(C, D, z)
        A, B = normal_cone(C), normal_cone(D)
        if known is None:
            known = _set_pair_oracle(C, D, z)
    elif spec.kind == "prox_sum":
        A = as_operator(build_function(c["f"], dim, rng, "f"))
        B = as_operator(build_function(c["g"], dim, rng, "g"))
    elif spec.kind == "strong_weak":
        gamma = _float(spec.problem, "gamma", name="gamma")
        omega = _float(spec.problem, "omega", name="omega")
        if gamma is None or omega is None:
            raise ConfigError("gamma, omega: required for kind strong_weak")
        if not gamma > omega:
            raise ConfigError(f"gamma must exceed omega, got gamma={gamma}, omega={omega}")
        try:
            swp = StrongWeakProblem(build_function(c["f_core"], dim, rng, "f_core"),
                                    build_function(c["g_core"], dim, rng, "g_core"),
                                    gamma, omega,
                                    _float(spec.problem, "f_quadratic", name="f_quadratic"),
                                    _float(spec.problem, "g_quadratic", name="g_quadratic"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        f, g = swp.convex_pair()
        A, B = as_operator(f), as_operator(g)
        z = np.zeros(dim)
    else:
        mod_name, _, fn_name = spec.problem["factory"].partition(":")
        try:
            factory = getattr(importlib.import_module(mod_name), fn_name)
        except (ImportError, AttributeError) as exc:
            raise ConfigError(f"factory: cannot load {spec.problem['factory']!r}: {exc}") from None
        out = factory(spec, rng)
        A, B = out["A"], out["B"]
        z = np.asarray(out.get("z", z), dtype=float)
        if known is None and out.get("known_solution") is not None:
            known = np.asarray(out["known_solution"], dtype=float)

    witness = None
    if spec.method == "strengthened":
        if spec.witness == "fixed_point":
            T = reflector(A, B, spec.beta, z, 1.0)
            witness = witness_from_fixed_point(T, find_fixed_point(T, np.zeros(dim)))
        elif ba is not None and known is not None and spec.witness == "auto":
            try:
                witness = affine_witness(ba, spec.beta, known)
            except ValueError:
                witness = None
        else:
            witness = _auto_witness(spec, A, z, known)
    return Instance(A, B, z, known, witness, ba)
