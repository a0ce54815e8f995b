"""Command line entry point: ``shotnoise run|validate|presets``."""
from __future__ import annotations

import argparse
import json
import sys

from . import config as _config
from . import presets
from .runner import EXIT_INVALID, EXIT_OK, run


def _load(source: str) -> dict:
    """A JSON file path, or ``preset:<name>``."""
    if source.startswith("preset:"):
        return presets.get(source.split(":", 1)[1])
    return _config.load(source)


def _resolve(args) -> tuple[dict | None, list[str]]:
    try:
        raw = _load(args.config)
    except (OSError, ValueError, KeyError) as exc:
        return None, [f"config: cannot read {args.config!r}: {exc}"]
    if isinstance(raw, dict):
        if getattr(args, "engine", None):
            raw["engine"] = args.engine
        if getattr(args, "output_dir", None):
            raw["output_dir"] = args.output_dir
    return raw, _config.validate(raw)


def cmd_validate(args) -> int:
    _, diags = _resolve(args)
    for d in diags:
        print(d, file=sys.stderr)
    if not diags and not args.quiet:
        print("ok")
    return EXIT_INVALID if diags else EXIT_OK


def cmd_run(args) -> int:
    raw, diags = _resolve(args)
    if diags:
        for d in diags:
            print(f"invalid config: {d}", file=sys.stderr)
        return EXIT_INVALID
    cfg = _config.from_dict(raw)
    log = None if args.quiet else (lambda m: print(m, file=sys.stderr))
    res = run(cfg, threads=args.threads, log=log)
    if not args.quiet:
        for p in res.files:
            print(p)
    return res.exit_code


def cmd_presets(args) -> int:
    if args.action == "list":
        width = max(len(n) for n in presets.names())
        for name in presets.names():
            print(f"{name:<{width}}  {presets.describe(name)}")
        return EXIT_OK
    if not args.name:
        print("presets show needs a preset name", file=sys.stderr)
        return EXIT_INVALID
    try:
        print(json.dumps(presets.get(args.name), indent=2))
    except KeyError as exc:
        print(exc.args[0], file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shotnoise", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="JSON config path or preset:<name>")
    common.add_argument("--output-dir", help="override output_dir from the config")
    common.add_argument("--engine", choices=[e.value for e in _config.Engine], help="override engine")
    common.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    common.add_argument("--quiet", action="store_true")

    r = sub.add_parser("run", parents=[common], help="run an experiment")
    r.set_defaults(func=cmd_run)
    v = sub.add_parser("validate", parents=[common], help="check a config without running it")
    v.set_defaults(func=cmd_validate)
    ps = sub.add_parser("presets", help="built-in figure configs")
    ps.add_argument("action", choices=["list", "show"])
    ps.add_argument("name", nargs="?")
    ps.set_defaults(func=cmd_presets)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        print("--threads must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
