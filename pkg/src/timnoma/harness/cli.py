"""Command-line interface: ``timnoma simulate`` and ``timnoma report``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from ..topology import PRESETS
from .config import ConfigError, config_from_mapping, load_config
from .engine import run_simulation
from .export import FIGURES, FigureKindError, export_results, read_results, write_figure

log = logging.getLogger("timnoma")


def _floats(text: str) -> list[float]:
    return [float(s) for s in text.replace(";", ",").split(",") if s.strip()]


def _legs(text: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in text.split(",") if s.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="timnoma", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte-Carlo SNR sweep")
    sim.add_argument("--config", type=Path, help="YAML or JSON file mirroring SimConfig")
    sim.add_argument("--preset", choices=sorted(PRESETS), help="use a built-in scenario")
    sim.add_argument("--snr", type=_floats, help="comma-separated SNR points in dB")
    sim.add_argument("--frames", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--out", type=Path, help="output directory")
    sim.add_argument("--legs", type=_legs, help="subset of hybrid,tdma")
    sim.add_argument("--workers", type=int)

    rep = sub.add_parser("report", help="regenerate one figure's plot-data file")
    rep.add_argument("--in", dest="inp", type=Path, required=True, help="directory from simulate")
    rep.add_argument("--figure", type=int, required=True, choices=sorted(FIGURES))
    rep.add_argument("--out", type=Path, help="directory for the figure file (default: --in)")
    return parser


def _simulate(args) -> int:
    overrides = dict(snr_grid_db=args.snr, frames=args.frames, master_seed=args.seed,
                     legs=args.legs, workers=args.workers)
    if args.preset:
        overrides["scenario"] = args.preset
    if args.config is None and not args.preset:
        raise ConfigError("give --config and/or --preset")
    if args.config is not None:
        cfg = load_config(args.config, **overrides)
    else:
        cfg = config_from_mapping({}, **overrides)
    out = args.out or (Path(cfg.output_path) if cfg.output_path else Path("results"))
    if args.preset and args.config is not None and cfg.scenario.name != args.preset:
        log.info("--preset %s overrides the config scenario", args.preset)
    start = time.perf_counter()
    table = run_simulation(cfg)
    files = export_results(table, out)
    log.info("%d frames x %d SNR points in %.1f s", cfg.frames, len(cfg.snr_grid_db),
             time.perf_counter() - start)
    for f in files:
        print(f)
    return 0


def _report(args) -> int:
    table = read_results(args.inp)
    print(write_figure(table, args.figure, args.out or args.inp))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "simulate":
            return _simulate(args)
        return _report(args)
    except (ConfigError, FigureKindError, FileNotFoundError, ValueError) as exc:
        print(f"timnoma: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
