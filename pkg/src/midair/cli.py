"""Command-line front end: script replay, meshing, recognition stats,
and the live session service.

Exit codes: 0 success, 2 parse/usage errors (bad scene, bad CSV, bad
flags), 3 script errors (malformed script line, unreadable script).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .commands import EmptyInputError, ZeroTotalError, read_records_csv, recognition_stats
from .mesher import RESOLUTION_RANGE, GridSpec, OutOfMemoryError, export_mesh, mesh_volume, polygonize
from .sceneio import SceneSyntaxError, SchemaError, parse_scene, serialize_scene
from .session import ScriptError, parse_script, render_effects, run_script

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SCRIPT = 3

log = logging.getLogger("midair")


def _setup_logging() -> None:
    level_name = os.environ.get("MIDAIR_LOG", "warn").lower()
    level = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}.get(
        level_name, logging.WARNING
    )
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _load_scene(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read scene {path}: {exc}", file=sys.stderr)
        return None
    try:
        return parse_scene(text)
    except (SceneSyntaxError, SchemaError, ValueError) as exc:
        print(f"error: invalid scene {path}: {exc}", file=sys.stderr)
        return None


def _cmd_replay(args: argparse.Namespace) -> int:
    scene = _load_scene(args.scene)
    if scene is None:
        return EXIT_PARSE
    try:
        with open(args.script, "r", encoding="utf-8") as fh:
            script_text = fh.read()
    except OSError as exc:
        print(f"error: cannot read script {args.script}: {exc}", file=sys.stderr)
        return EXIT_SCRIPT
    try:
        events = parse_script(script_text)
    except ScriptError as exc:
        print(f"error: script {args.script}: {exc}", file=sys.stderr)
        return EXIT_SCRIPT
    state, effects = run_script(scene, events)
    with open(args.out_scene, "w", encoding="utf-8") as fh:
        fh.write(serialize_scene(state.scene))
    with open(args.out_effects, "w", encoding="utf-8") as fh:
        fh.write(render_effects(effects))
    log.info("replayed %d events, %d effects", len(events), len(effects))
    return EXIT_OK


def _cmd_mesh(args: argparse.Namespace) -> int:
    lo, hi = RESOLUTION_RANGE
    if not (lo <= args.resolution <= hi):
        print(f"error: resolution {args.resolution} out of range [{lo}, {hi}]", file=sys.stderr)
        return EXIT_PARSE
    scene = _load_scene(args.scene)
    if scene is None:
        return EXIT_PARSE
    try:
        mesh = polygonize(scene, GridSpec(resolution=args.resolution))
    except OutOfMemoryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    data = export_mesh(mesh, args.format)
    with open(args.out, "wb") as fh:
        fh.write(data)
    print(f"triangles: {mesh.triangle_count}")
    print(f"volume: {mesh_volume(mesh):.9g}")
    return EXIT_OK


def _cmd_stats(args: argparse.Namespace) -> int:
    try:
        with open(args.csv, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read {args.csv}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        records = read_records_csv(text)
        report = recognition_stats(records)
    except (ValueError, EmptyInputError, ZeroTotalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    for label, rate in zip(report.user_labels, report.per_user_rate):
        print(f"{label}: {rate:.1f}%")
    print(f"total recognized: {report.total_recognized}")
    print(f"total unrecognized: {report.total_unrecognized}")
    print(f"mean: {report.mean_rate:.1f}%")
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    scene = _load_scene(args.scene)
    if scene is None:
        return EXIT_PARSE
    host, _, port_text = args.bind.rpartition(":")
    if not host or not port_text.isdigit():
        print(f"error: --bind must be HOST:PORT, got {args.bind!r}", file=sys.stderr)
        return EXIT_PARSE
    from .service import serve  # deferred: pulls in the web stack

    serve(scene, host, int(port_text), resolution=args.resolution)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="midair", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_replay = sub.add_parser("replay", help="run an event script against a scene")
    p_replay.add_argument("--scene", required=True)
    p_replay.add_argument("--script", required=True)
    p_replay.add_argument("--out-scene", required=True)
    p_replay.add_argument("--out-effects", required=True)
    p_replay.set_defaults(func=_cmd_replay)

    p_mesh = sub.add_parser("mesh", help="polygonize a scene to OBJ or STL")
    p_mesh.add_argument("--scene", required=True)
    p_mesh.add_argument("--resolution", type=int, default=64)
    p_mesh.add_argument("--format", choices=("obj", "stl"), default="obj")
    p_mesh.add_argument("--out", required=True)
    p_mesh.set_defaults(func=_cmd_mesh)

    p_stats = sub.add_parser("stats", help="recognition-rate report from a CSV")
    p_stats.add_argument("--csv", required=True)
    p_stats.set_defaults(func=_cmd_stats)

    p_serve = sub.add_parser("serve", help="run the live session service")
    p_serve.add_argument("--scene", required=True)
    p_serve.add_argument("--bind", default="127.0.0.1:8765")
    p_serve.add_argument("--resolution", type=int, default=48)
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, which matches EXIT_PARSE
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
