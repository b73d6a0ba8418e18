"""Command line entry point: ``strongsplit solve|probe|rate``.

Exit status: 0 converged/completed, 2 evidence that no solution exists,
1 error. Set ``STRONGSPLIT_LOG`` (e.g. ``DEBUG``) for log output.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from .bench.config import ConfigError, parse_config
from .bench.runner import RateFloorError, emit_csv, fit_rate, probe, read_csv, run
from .solver import NumericalFailure

EXIT_OK, EXIT_ERROR, EXIT_DIVERGING = 0, 1, 2


def _parser():
    ap = argparse.ArgumentParser(prog="strongsplit",
                                 description="Resolvent-of-a-sum splitting benchmarks")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run a problem file and write per-iteration CSV")
    s.add_argument("--config", required=True)
    s.add_argument("--method", choices=("strengthened", "dr", "aamr"))
    s.add_argument("--out", help="CSV output path")

    p = sub.add_parser("probe", help="orbit-boundedness evidence for solvability")
    p.add_argument("--config", required=True)

    r = sub.add_parser("rate", help="fit the log-log error slope from a CSV")
    r.add_argument("--in", dest="inp", required=True)
    r.add_argument("--from", dest="k1", type=int, required=True)
    r.add_argument("--to", dest="k2", type=int, required=True)
    return ap


def _solve(args) -> int:
    spec = parse_config(args.config)
    if args.method:
        spec.method = args.method
    result = run(spec)
    if args.out:
        emit_csv(result, args.out)
    sm = result.summary
    print(f"method={sm['method']} stop={sm['stop_reason']} iterations={sm['iterations']}")
    print("solution=" + ",".join(repr(v) for v in sm["solution"]))
    if sm["final_error"] is not None:
        print(f"final_error={sm['final_error']!r} rate_exponent={sm['rate_exponent']}")
    if result.probe is not None:
        print(f"probe={result.probe.verdict} ({result.probe.reason})")
        if result.diverging:
            return EXIT_DIVERGING
    return EXIT_OK


def _probe(args) -> int:
    rep = probe(parse_config(args.config))
    print(f"verdict={rep.verdict} iterations={rep.iterations} ({rep.reason})")
    return EXIT_DIVERGING if rep.verdict == "diverging" else EXIT_OK


def _rate(args) -> int:
    try:
        slope = fit_rate(read_csv(args.inp), (args.k1, args.k2))
    except RateFloorError:
        print("at numerical floor")
        return EXIT_OK
    print(f"slope={slope!r}")
    return EXIT_OK


def main(argv=None) -> int:
    level = os.environ.get("STRONGSPLIT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = _parser().parse_args(argv)
    handler = {"solve": _solve, "probe": _probe, "rate": _rate}[args.command]
    try:
        return handler(args)
    except NumericalFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        pr = getattr(exc, "probe", None)
        return EXIT_DIVERGING if pr is not None and pr.verdict == "diverging" else EXIT_ERROR
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
