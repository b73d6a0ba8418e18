"""Experiment execution, empirical rate fitting and CSV persistence."""
from __future__ import annotations

import csv
import io
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..solver import NumericalFailure, SolveReport, StopReason, solve, solve_aamr, solve_dr
from ..strengthening import (DEFAULT_BLOWUP, DEFAULT_PROBE_ITER, ProbeReport, reflector,
                             trajectory_probe)
from .config import ProblemSpec, _float, _int
from .problems import Instance, build_instance

log = logging.getLogger(__name__)

COLUMNS = ("k", "r", "residual", "error", "lyapunov", "bound")
NUMERICAL_FLOOR = 1e-14


class RateFloorError(ValueError):
    """Every error in the fit window is at or below the numerical floor."""


@dataclass
class ExperimentResult:
    columns: Dict[str, List[float]]
    summary: Dict[str, object] = field(default_factory=dict)
    report: Optional[SolveReport] = None
    probe: Optional[ProbeReport] = None
    instance: Optional[Instance] = None

    def __len__(self):
        return len(self.columns["k"])

    @property
    def records(self) -> List[Tuple[float, ...]]:
        return list(zip(*(self.columns[c] for c in COLUMNS)))

    @property
    def diverging(self) -> bool:
        return self.probe is not None and self.probe.verdict == "diverging"


def _nan_list(n):
    return [math.nan] * n


def _columns_from_report(rep: SolveReport) -> Dict[str, List[float]]:
    n = rep.iterations + 1
    return {
        "k": list(range(n)),
        "r": list(rep.r_trace),
        "residual": list(rep.residual_trace),
        "error": list(rep.error_trace) if rep.error_trace is not None else _nan_list(n),
        "lyapunov": list(rep.lyapunov_trace) if rep.lyapunov_trace is not None else _nan_list(n),
        "bound": list(rep.bound_trace) if rep.bound_trace is not None else _nan_list(n),
    }


def _probe(spec: ProblemSpec, inst: Instance) -> ProbeReport:
    pr = spec.probe
    T = reflector(inst.A, inst.B, spec.beta, inst.z, _float(pr, "r", spec.r0))
    x0 = np.zeros(spec.dimension)
    return trajectory_probe(T, x0, max_iter=_int(pr, "max_iter", DEFAULT_PROBE_ITER),
                            blowup=_float(pr, "blowup", DEFAULT_BLOWUP))


def probe(spec: ProblemSpec) -> ProbeReport:
    """Existence evidence: iterate the reflector from the origin."""
    return _probe(spec, build_instance(spec))


def run(spec: ProblemSpec) -> ExperimentResult:
    """Solve the problem described by ``spec`` and record full traces.

    When the solve does not converge (or fails numerically) the orbit probe
    runs as well, so that an empty solution set shows up as a ``diverging``
    verdict instead of a silent iteration cap.
    """
    inst = build_instance(spec)
    common = dict(beta=spec.beta, tol=spec.tol, max_iter=spec.max_iter,
                  known_solution=inst.known_solution)
    try:
        if spec.method == "strengthened":
            rep = solve(inst.A, inst.B, inst.z, r0=spec.r0, z0=spec.z0,
                        witness=inst.witness, **common)
        elif spec.method == "dr":
            rep = solve_dr(inst.A, inst.B, inst.z, gamma=spec.gamma or 1.0,
                           lam=1.0 if spec.lam is None else spec.lam, w0=spec.z0, **common)
        else:
            rep = solve_aamr(inst.A, inst.B, inst.z, gamma=spec.gamma,
                             lam=0.5 if spec.lam is None else spec.lam, v0=spec.z0, **common)
    except NumericalFailure as exc:
        pr = _probe(spec, inst)
        err = NumericalFailure(f"{exc}; probe verdict: {pr.verdict} ({pr.reason})")
        err.probe = pr
        raise err from exc

    result = ExperimentResult(_columns_from_report(rep), report=rep, instance=inst)
    err = rep.error_trace[-1] if rep.error_trace else None
    result.summary = {
        "method": rep.method,
        "stop_reason": rep.stop_reason.value,
        "iterations": rep.iterations,
        "solution": rep.solution.tolist(),
        "final_error": err,
        "rate_exponent": None,
    }
    if rep.error_trace is not None and rep.iterations >= 2:
        k_to = spec.fit_to or rep.iterations
        k_from = spec.fit_from or max(1, k_to // 100)
        try:
            result.summary["rate_exponent"] = fit_rate(result, (k_from, k_to))
        except RateFloorError:
            result.summary["rate_exponent"] = "at numerical floor"
        except ValueError as exc:
            log.debug("rate fit skipped: %s", exc)
    if rep.stop_reason is not StopReason.CONVERGED:
        result.probe = _probe(spec, inst)
        result.summary["probe"] = result.probe.verdict
    return result


def fit_loglog_slope(ks: Sequence[float], errors: Sequence[float],
                     window: Tuple[int, int]) -> float:
    """Least-squares slope of ``log(error)`` against ``log(k)`` for ``k`` in ``window``."""
    k1, k2 = window
    ks = np.asarray(ks, dtype=float)
    errors = np.asarray(errors, dtype=float)
    sel = (ks >= k1) & (ks <= k2) & (ks > 0) & np.isfinite(errors)
    if sel.sum() < 2:
        raise ValueError(f"window [{k1}, {k2}] holds fewer than two usable points")
    e = errors[sel]
    if np.all(e <= NUMERICAL_FLOOR):
        raise RateFloorError("at numerical floor")
    keep = e > NUMERICAL_FLOOR
    if keep.sum() < 2:
        raise RateFloorError("at numerical floor")
    return float(np.polyfit(np.log(ks[sel][keep]), np.log(e[keep]), 1)[0])


def fit_rate(result: ExperimentResult, window: Tuple[int, int]) -> float:
    return fit_loglog_slope(result.columns["k"], result.columns["error"], window)


# -- CSV --------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "" if math.isnan(v) else repr(v)


def csv_text(result: ExperimentResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for rec in result.records:
        w.writerow([_fmt(v) for v in rec])
    return buf.getvalue()


def emit_csv(result: ExperimentResult, path) -> None:
    """Write ``result`` atomically: temp file in the target directory, then rename."""
    path = Path(path)
    text = csv_text(result)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_csv(path) -> ExperimentResult:
    cols: Dict[str, List[float]] = {c: [] for c in COLUMNS}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != COLUMNS:
            raise ValueError(f"{path}: expected header {','.join(COLUMNS)}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(COLUMNS):
                raise ValueError(f"{path}: line {lineno}: expected {len(COLUMNS)} fields")
            cols["k"].append(int(row[0]))
            for c, v in zip(COLUMNS[1:], row[1:]):
                cols[c].append(float(v) if v else math.nan)
    return ExperimentResult(cols)
