"""Command-line entry point: ``courantred --scene hopf --command severa``.

Exit codes: 0 everything as expected, 1 a check failed, 2 a precondition or
missing-object error, 3 the scene could not be parsed.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import SceneParseError
from .report import emit
from .scene import exit_code, load_scene, run_scene, select, shipped_scenes

EXIT_OK, EXIT_FAIL, EXIT_PRECONDITION, EXIT_PARSE = 0, 1, 2, 3


def _env_int(name):
    v = os.environ.get(name)
    return int(v) if v not in (None, "") else None


def build_parser():
    p = argparse.ArgumentParser(prog="courantred", description="Run checks and reductions from a scene file.")
    p.add_argument("--scene", default=os.environ.get("COURANTRED_SCENE"),
                   help="scene file path or shipped scene name")
    p.add_argument("--command", default=os.environ.get("COURANTRED_COMMAND") or None,
                   help="command type or entry name to run (default: all entries)")
    p.add_argument("--seed", type=int, default=_env_int("COURANTRED_SEED"))
    p.add_argument("--samples", type=int, default=_env_int("COURANTRED_SAMPLES"),
                   help="random chart sample points per patch")
    p.add_argument("--format", choices=("text", "structured"),
                   default=os.environ.get("COURANTRED_FORMAT", "text"))
    p.add_argument("--list", action="store_true", help="list shipped scenes and exit")
    return p


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    if args.list:
        out.write("\n".join(shipped_scenes()) + "\n")
        return EXIT_OK
    if not args.scene:
        err.write("courantred: --scene is required\n")
        return EXIT_PRECONDITION
    try:
        sc = load_scene(args.scene, seed=args.seed, samples=args.samples)
    except FileNotFoundError as exc:
        err.write(f"courantred: {exc}\n")
        return EXIT_PRECONDITION
    except SceneParseError as exc:
        err.write(f"courantred: parse error: {exc}\n")
        return EXIT_PARSE
    header = {"scene": sc.name, "seed": sc.seed, "samples": sc.samples, "command": args.command or "all"}
    if args.command and not select(sc, args.command):
        out.write(emit([], args.format, header))
        err.write(f"courantred: scene {sc.name!r} has no command {args.command!r}\n")
        return EXIT_PRECONDITION
    reports = run_scene(sc, args.command)
    out.write(emit(reports, args.format, header))
    return exit_code(reports)


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
