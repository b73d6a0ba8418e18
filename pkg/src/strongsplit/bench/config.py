"""Problem files: INI-style ``key = value`` text with one section per component.

Example::

    [problem]
    kind = best_approx
    z = 3, 1
    beta = 0.5

    [C]
    type = halfspace
    normal = 1, 0
    offset = 0

    [D]
    type = halfspace
    normal = 0, 1
    offset = 0

Vectors are comma separated; matrix rows are separated by ``;``. See the
README for every key.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional

import numpy as np

from ..solver import DEFAULT_BETA, DEFAULT_MAX_ITER, DEFAULT_TOL, default_r0, r_cap

KINDS = ("prox_sum", "strong_weak", "best_approx", "linear_pair", "custom")
METHODS = ("strengthened", "dr", "aamr")
COMPONENTS = {
    "best_approx": ("C", "D"),
    "linear_pair": ("A", "B"),
    "prox_sum": ("f", "g"),
    "strong_weak": ("f_core", "g_core"),
    "custom": (),
}


class ConfigError(ValueError):
    """Malformed or invalid problem file."""


@dataclass
class ProblemSpec:
    kind: str
    z: Optional[np.ndarray]
    dimension: int
    beta: float = DEFAULT_BETA
    r0: float = field(default=float("nan"))
    z0: Optional[np.ndarray] = None
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    method: str = "strengthened"
    gamma: Optional[float] = None
    lam: Optional[float] = None
    seed: int = 0
    known_solution: Optional[np.ndarray] = None
    witness: str = "auto"
    components: Dict[str, Dict[str, str]] = field(default_factory=dict)
    problem: Dict[str, str] = field(default_factory=dict)
    probe: Dict[str, str] = field(default_factory=dict)
    fit_from: Optional[int] = None
    fit_to: Optional[int] = None


def parse_vector(text: str, name: str) -> np.ndarray:
    try:
        v = np.array([float(t) for t in text.replace(",", " ").split()], dtype=float)
    except ValueError:
        raise ConfigError(f"{name}: expected comma separated numbers, got {text!r}") from None
    if v.size == 0:
        raise ConfigError(f"{name}: empty vector")
    if not np.all(np.isfinite(v)):
        raise ConfigError(f"{name}: entries must be finite")
    return v


def parse_matrix(text: str, name: str) -> np.ndarray:
    rows = [parse_vector(r, name) for r in text.split(";") if r.strip()]
    if not rows or len({len(r) for r in rows}) != 1:
        raise ConfigError(f"{name}: rows must be nonempty and of equal length")
    return np.vstack(rows)


def _float(sec, key, default=None, name=None):
    name = name or key
    if key not in sec:
        return default
    try:
        return float(sec[key])
    except ValueError:
        raise ConfigError(f"{name}: expected a number, got {sec[key]!r}") from None


def _int(sec, key, default=None):
    if key not in sec:
        return default
    try:
        return int(sec[key])
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {sec[key]!r}") from None


def parse_text(text: str, source: str = "<string>") -> ProblemSpec:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"{source}: line {exc.lineno}: missing [section] header") from None
    except configparser.ParsingError as exc:
        lines = ", ".join(str(ln) for ln, _ in exc.errors)
        raise ConfigError(f"{source}: parse error at line {lines}") from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"{source}: line {exc.lineno}: duplicate key {exc.option!r}") from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"{source}: line {exc.lineno}: duplicate section {exc.section!r}") from None
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None

    if "problem" not in cp:
        raise ConfigError("missing [problem] section")
    p = dict(cp["problem"])
    kind = p.get("kind", "").strip()
    if kind not in KINDS:
        raise ConfigError(f"kind: must be one of {', '.join(KINDS)}, got {kind!r}")

    z = parse_vector(p["z"], "z") if "z" in p else None
    dim = _int(p, "dimension")
    if dim is None:
        if z is None and kind != "strong_weak":
            raise ConfigError("z: required (or give dimension)")
        dim = 1 if z is None else z.shape[0]
    if dim < 1:
        raise ConfigError("dimension: must be >= 1")
    if z is not None and z.shape[0] != dim:
        raise ConfigError(f"z: expected {dim} entries, got {z.shape[0]}")

    beta = _float(p, "beta", DEFAULT_BETA)
    if not 0.0 < beta < 1.0:
        raise ConfigError(f"beta out of (0,1): {beta}")
    r0 = _float(p, "r0", default_r0(beta))
    if not 0.0 < r0 < r_cap(beta):
        raise ConfigError(f"r0 violates (C1) bound: need 0 < r0 < {r_cap(beta):g}, got {r0}")
    tol = _float(p, "tol", DEFAULT_TOL)
    if not tol >= 0 or math.isnan(tol):
        raise ConfigError("tol: must be nonnegative")
    max_iter = _int(p, "max_iter", DEFAULT_MAX_ITER)
    if max_iter < 0:
        raise ConfigError("max_iter: must be nonnegative")
    method = p.get("method", "strengthened").strip()
    if method not in METHODS:
        raise ConfigError(f"method: must be one of {', '.join(METHODS)}, got {method!r}")

    z0 = None
    if "z0" in p:
        z0 = parse_vector(p["z0"], "z0")
        if z0.shape[0] != dim:
            raise ConfigError(f"z0: expected {dim} entries, got {z0.shape[0]}")
    known = None
    if "known_solution" in p:
        known = parse_vector(p["known_solution"], "known_solution")
        if known.shape[0] != dim:
            raise ConfigError(f"known_solution: expected {dim} entries")
    witness = p.get("witness", "auto").strip()
    if witness not in ("auto", "none", "fixed_point"):
        raise ConfigError("witness: must be auto, none or fixed_point")

    base = dict(cp["baseline"]) if "baseline" in cp else {}
    gamma = _float(base, "gamma")
    if gamma is not None and not gamma > 0:
        raise ConfigError("gamma: must be positive")
    lam = _float(base, "lambda", name="lambda")

    comps = {}
    for name in COMPONENTS[kind]:
        if name not in cp:
            raise ConfigError(f"missing [{name}] section for kind {kind}")
        comps[name] = dict(cp[name])
    if kind == "custom" and "factory" not in p:
        raise ConfigError("factory: required for kind custom (module:function)")

    fit = dict(cp["fit"]) if "fit" in cp else {}
    return ProblemSpec(
        kind=kind, z=z, dimension=dim, beta=beta, r0=r0, z0=z0, tol=tol,
        max_iter=max_iter, method=method, gamma=gamma, lam=lam,
        seed=_int(p, "seed", 0), known_solution=known, witness=witness,
        components=comps, problem=p,
        probe=dict(cp["probe"]) if "probe" in cp else {},
        fit_from=_int(fit, "from"), fit_to=_int(fit, "to"))


def parse_config(path) -> ProblemSpec:
    path = Path(path)
    return parse_text(path.read_text(), source=str(path))
