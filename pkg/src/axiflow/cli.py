"""Command line front end: ``axiflow run|sweep|validate``."""
from __future__ import annotations

import argparse
import glob
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import ConfigError, load_config
from .driver import RunConfig, RunResult, Termination, run
from .outputs import curve_filename, write_curve, write_diagnostics
from .plotting import plot_curves, plot_diagnostics

log = logging.getLogger("axiflow")

OUT_ENV = "AXIFLOW_OUT"


def emit_outputs(result: RunResult, out_dir: str | Path) -> list[Path]:
    """Write diagnostics.csv, one curve file per snapshot and the SVG figures."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written = [write_diagnostics(out / "diagnostics.csv", result.diagnostics)]
    for t, curve in result.snapshots.items():
        written.append(write_curve(out / curve_filename(t), curve))
    flow = result.config.flow
    title = f"{flow.kind} ({flow.scheme}), {result.termination.value} at t = {result.t_event:.4g}"
    written.append(plot_curves(result.snapshots, out / "curves.svg", title))
    written.append(plot_diagnostics(result.diagnostics, out / "diagnostics.svg"))
    return written


def _out_dir(config: RunConfig, override: str | None = None) -> Path:
    return Path(override or os.environ.get(OUT_ENV) or config.out_dir)


def _execute(config: RunConfig, out_dir: Path) -> int:
    log.info("running %s/%s on %s, J = %d, dt = %g, t_final = %g", config.flow.kind,
             config.flow.scheme, config.shape.kind, config.shape.J, config.dt, config.t_final)
    result = run(config)
    emit_outputs(result, out_dir)
    status = result.termination.value
    if result.termination is not Termination.COMPLETED:
        status += f" at t = {result.t_event:.6g}"
    print(f"{status}; {len(result.diagnostics) - 1} steps; output in {out_dir}")
    if result.message and result.termination is not Termination.PINCH_OFF:
        log.warning("%s", result.message)
    return result.exit_code


def _sweep_one(path: str, out_root: str | None) -> tuple[str, int]:
    config = load_config(path)
    base = _out_dir(config, out_root)
    return path, _execute(config, base / Path(path).stem)


def cmd_run(args) -> int:
    config = load_config(args.config)
    return _execute(config, _out_dir(config, args.out))


def cmd_validate(args) -> int:
    config = load_config(args.config)
    curve, bspec = config.initial_curve()
    print(f"ok: {config.flow.kind}/{config.flow.scheme}, {config.shape.kind} with "
          f"{curve.n_nodes} nodes, {config.n_steps} steps")
    return 0


def cmd_sweep(args) -> int:
    paths = sorted(glob.glob(args.pattern))
    if not paths:
        print(f"no configs match {args.pattern!r}", file=sys.stderr)
        return 1
    codes = {}
    if args.jobs == 1:
        for p in paths:
            codes[p] = _sweep_one(p, args.out)[1]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            for p, code in pool.map(_sweep_one, paths, [args.out] * len(paths)):
                codes[p] = code
    for p, code in codes.items():
        print(f"{code}  {p}")
    if any(c == 1 for c in codes.values()):
        return 1
    return 2 if any(c == 2 for c in codes.values()) else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="axiflow",
                                     description="Axisymmetric geometric flows of surfaces.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one configuration")
    p.add_argument("config")
    p.add_argument("-o", "--out", help=f"output directory (overrides ${OUT_ENV} and out_dir)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run every configuration matching a glob")
    p.add_argument("pattern")
    p.add_argument("-o", "--out", help="root directory; each run writes to <root>/<config stem>")
    p.add_argument("-j", "--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="check a configuration without running it")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"error: {err}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
