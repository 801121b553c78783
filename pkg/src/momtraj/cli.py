"""Command-line entry point.

Subcommands:
  run <scenario|config.ini> [flags]   execute one scenario, write artifacts
  validate [--n N] [--threads K]      reduced-size invariant suite
  list-scenarios                      catalog with parameters and claims

Exit codes: 0 all assertions passed, 1 assertion failure, 2 configuration
error. Diagnostics go to stderr; the human-readable report goes to stdout.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .errors import SimulationError
from .output import read_config_ini, utc_now, write_run_outputs
from .scenarios import (
    SCENARIOS,
    RunResult,
    ScenarioConfig,
    coverage_manifest,
    default_config,
    run_scenario,
)

_FLAG_TO_FIELD = {
    "n": "n_samples",
    "seed": "seed",
    "dt": "dt",
    "grid_points": "grid_points",
    "grid_extent": "grid_extent",
    "current": "current",
    "model": "model",
    "a": "a",
    "sigma": "sigma",
    "dpe": "dpe",
    "c1sq": "c1_sq",
    "delta_p": "delta_p",
    "displacement": "displacement",
    "linear_c": "linear_coeff",
    "t_final": "t_final",
}


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="momtraj",
                                 description="momentum-space quantum trajectory engine")
    ap.add_argument("--version", action="version", version=f"momtraj {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run a built-in scenario or a config file")
    runp.add_argument("target", help="scenario name or path to a config .ini")
    runp.add_argument("--n", type=int, help="ensemble size")
    runp.add_argument("--seed", type=int, help="sampling seed (default 0)")
    runp.add_argument("--dt", type=float, help="propagator step")
    runp.add_argument("--frames", type=int, help="number of output frames over the run")
    runp.add_argument("--grid-points", type=int, dest="grid_points")
    runp.add_argument("--grid-extent", type=float, dest="grid_extent")
    runp.add_argument("--current", choices=["closed", "poisson"])
    runp.add_argument("--model", choices=["epstein", "dbb", "both"])
    runp.add_argument("--out", type=str, help="output directory (default run_<scenario>)")
    runp.add_argument("--threads", type=int, default=1, help="worker cap (scenario jobs)")
    runp.add_argument("--a", type=float, help="packet shift")
    runp.add_argument("--sigma", type=float, help="packet width")
    runp.add_argument("--dpe", type=float, help="environment momentum separation")
    runp.add_argument("--c1sq", type=float, help="first outcome weight |c1|^2")
    runp.add_argument("--delta-p", type=float, dest="delta_p", help="packet momentum separation")
    runp.add_argument("--displacement", type=float, help="coherent-state displacement")
    runp.add_argument("--linear-c", type=float, dest="linear_c", help="linear potential slope")
    runp.add_argument("--t-final", type=float, dest="t_final", help="run end time")

    valp = sub.add_parser("validate", help="run the invariant suite at reduced size")
    valp.add_argument("--n", type=int, default=2000, help="ensemble size (default 2000)")
    valp.add_argument("--threads", type=int, default=1, help="parallel scenario jobs")
    valp.add_argument("--seed", type=int, default=0)

    sub.add_parser("list-scenarios", help="list scenarios, parameters, and claims")
    return ap


def _config_from_args(args) -> ScenarioConfig:
    target = args.target
    if Path(target).suffix == ".ini" or Path(target).is_file():
        config = read_config_ini(target)
    else:
        config = default_config(target)
    for flag, fieldname in _FLAG_TO_FIELD.items():
        val = getattr(args, flag, None)
        if val is not None:
            setattr(config, fieldname, val)
    if args.frames is not None:
        steps = config.n_steps()
        config.steps_per_frame = max(1, steps // max(1, args.frames))
    return config


def _print_verdicts(result: RunResult) -> None:
    width = max(len(v.name) for v in result.verdicts)
    print(f"scenario {result.config.name} (seed {result.config.seed}, "
          f"N {result.config.n_samples})")
    for v in result.verdicts:
        mark = "PASS" if v.passed else "FAIL"
        print(f"  [{mark}] {v.name:<{width}}  measured {v.measured:.3e}  "
              f"tolerance {v.tolerance:.3e}")
        if not v.passed:
            print(f"         {v.note}")
    print(f"result: {'PASS' if result.passed else 'FAIL'}")


def _cmd_run(args) -> int:
    started = utc_now()
    config = _config_from_args(args)
    result = run_scenario(config)
    finished = utc_now()
    out_dir = args.out or f"run_{config.name}"
    manifest = write_run_outputs(result, out_dir, __version__, started, finished)
    _print_verdicts(result)
    print(f"artifacts: {Path(out_dir).resolve()} (manifest {manifest.name})")
    return 0 if result.passed else 1


def _cmd_validate(args) -> int:
    jobs = []
    for name in sorted(SCENARIOS):
        cfg = default_config(name, n_samples=args.n, seed=args.seed)
        jobs.append((name, cfg))

    def work(item):
        name, cfg = item
        return name, run_scenario(cfg)

    results: dict[str, RunResult] = {}
    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            for name, res in pool.map(work, jobs):
                results[name] = res
    else:
        for item in jobs:
            name, res = work(item)
            results[name] = res

    all_ok = True
    print(f"validation suite (N={args.n}, seed={args.seed})")
    for name in sorted(results):
        res = results[name]
        for v in res.verdicts:
            all_ok &= v.passed
            mark = "PASS" if v.passed else "FAIL"
            print(f"  [{mark}] {name}: {v.name}  measured {v.measured:.3e}  "
                  f"tol {v.tolerance:.3e}")
    print(f"result: {'PASS' if all_ok else 'FAIL'}")
    return 0 if all_ok else 1


def _cmd_list(_args) -> int:
    manifest = coverage_manifest()
    for name in sorted(SCENARIOS):
        d = SCENARIOS[name]
        print(name)
        print(f"  {d.summary}")
        for pname, doc in d.params:
            print(f"    {pname}: {doc}")
        defaults = ", ".join(f"{k}={v}" for k, v in sorted(d.defaults.items()))
        print(f"  defaults: {defaults or '(none)'}")
        print(f"  claims: {', '.join(manifest[name]['claims'])}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "validate":
            return _cmd_validate(args)
        return _cmd_list(args)
    except SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
