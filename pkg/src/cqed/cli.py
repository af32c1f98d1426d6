"""Command-line front end: scenario presets or flat key=value config files.

Exit codes: 0 success, 2 configuration error, 3 convergence/numerics error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import (
    ConvergenceError,
    CqedError,
    DegenerateSteadyStateError,
    ParameterError,
    StepSizeError,
    TailDecayError,
)
from .scenarios import PRESETS, get_scenario, run


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cqed",
        description="Conditional field dynamics and spectrum of squeezing "
        "for a driven atom-cavity system.",
    )
    ap.add_argument(
        "--scenario",
        required=True,
        help=f"preset name ({', '.join(sorted(PRESETS))}) or a key=value config file",
    )
    ap.add_argument("--seed", type=int, default=None, help="base seed (overrides scenario)")
    ap.add_argument("--workers", type=int, default=1, help="threads for trajectory blocks")
    ap.add_argument("--out", default="out", help="output directory")
    ap.add_argument("--starts", type=int, default=None, help="trigger windows / start clicks")
    ap.add_argument("--duration", type=float, default=None, help="record length, us")
    ap.add_argument("--nmax", type=int, default=None, help="photon-number truncation override")
    ap.add_argument("--force", action="store_true", help="overwrite existing outputs")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scen = get_scenario(args.scenario)
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.starts is not None:
            overrides["n_starts"] = args.starts
        if args.duration is not None:
            overrides["duration"] = args.duration
        if args.nmax is not None:
            overrides["n_max"] = args.nmax
        if overrides:
            scen = scen.with_overrides(**overrides)
    except (ParameterError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        manifest = run(scen, args.out, force=args.force, workers=args.workers)
    except ParameterError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, TailDecayError, StepSizeError, DegenerateSteadyStateError) as exc:
        print(
            f"convergence error: {exc}\n"
            "hints: raise --nmax, extend the tau grid (n_env), or shrink dt",
            file=sys.stderr,
        )
        return 3
    except CqedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(json.dumps({k: manifest[k] for k in ("scenario", "mode", "seed")}))
    print(f"outputs written to {args.out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
