"""Command-line entry point: ``floorflow validate|navgraph|simulate|version``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time

from . import __version__
from .engine import prepare, run_simulation
from .errors import FloorflowError
from .outputs import write_graph, write_outputs
from .scenario import load_scenario

log = logging.getLogger("floorflow")


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("FLOORFLOW_THREADS", "1")))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="floorflow", description="Indoor airborne infection-risk simulator.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a scenario file")
    v.add_argument("scenario")

    g = sub.add_parser("navgraph", help="build the navigation graph and write graph.csv")
    g.add_argument("scenario")
    g.add_argument("--out", required=True)
    g.add_argument("--threads", type=int, default=_default_threads())

    s = sub.add_parser("simulate", help="run a scenario")
    s.add_argument("scenario")
    s.add_argument("--out", required=True)
    s.add_argument("--frame-every", type=int, default=None, metavar="N")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--threads", type=int, default=_default_threads())
    s.add_argument("--pgm", action="store_true", help="also write 8-bit PGM heatmaps")

    sub.add_parser("version")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "version":
        print(f"floorflow {__version__}")
        return 0

    for name in ("threads", "frame_every"):
        val = getattr(args, name, None)
        if val is not None and val < 1:
            parser.error(f"--{name.replace('_', '-')} must be >= 1")

    try:
        config = load_scenario(args.scenario)
        if args.command == "validate":
            prep = prepare(config)
            print(f"ok: {args.scenario} ({len(config.agents)} agents, {len(prep.graph)} vertices, "
                  f"{len(prep.graph.edges)} edges)")
            return 0
        if args.command == "navgraph":
            graph = prepare(config, args.threads).graph
            path = write_graph(graph, args.out)
            print(f"wrote {path} ({len(graph.edges)} edges)")
            return 0
        if args.seed is not None:
            config.seed = args.seed
        if args.frame_every is not None:
            config.outputs.frame_every = args.frame_every
        t0 = time.perf_counter()
        result = run_simulation(config, threads=args.threads)
        write_outputs(result, args.out, pgm=args.pgm or config.outputs.pgm)
        final = result.frames[-1]
        log.info("simulated %s in %.1f s", config.name, time.perf_counter() - t0)
        print(f"done: {len(result.frames)} frames, final average risk {final.average_risk:.6f}, "
              f"counts {result.final_counts()}")
        return 0
    except FloorflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
