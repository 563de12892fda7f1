"""Command-line entry point.

Every subcommand accepts the global flags ``--seed``, ``--config``, ``--out``
and ``--threads`` plus one ``--<key>`` option per config key. Config values
resolve as defaults < config file < command-line options. A config file may
be a plain JSON object or a previously written ``manifest.json``, which
replays that run.

Exit codes: 0 success, 2 configuration error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import subprocess
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .experiments import COMMANDS, ConfigError

EXIT_CONFIG = 2
EXIT_IO = 3


def _parse_value(text: str):
    if "," in text and not text.lstrip().startswith("["):
        return [_parse_value(t) for t in text.split(",") if t.strip()]
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _common(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=d, help="master seed")
    parser.add_argument("--config", default=d, help="JSON config or manifest to replay")
    parser.add_argument("--out", default=d, help="output directory (default out/<command>)")
    parser.add_argument("--threads", type=int, default=argparse.SUPPRESS if suppress else 1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slhz", description="SLHZ decoding and sampling experiments")
    parser.add_argument("--version", action="version", version=f"slhz {__version__}")
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, cmd in COMMANDS.items():
        p = sub.add_parser(name, help=cmd.help, description=cmd.help)
        _common(p, suppress=True)
        for key, default in cmd.defaults.items():
            p.add_argument(
                "--" + key.replace("_", "-"),
                dest="opt_" + key,
                type=_parse_value,
                default=argparse.SUPPRESS,
                help=f"(default: {json.dumps(default)})",
            )
    return parser


def _git_describe() -> str | None:
    try:
        res = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
    except (OSError, subprocess.SubprocessError):
        return None
    return res.stdout.strip() or None if res.returncode == 0 else None


def resolve(args: argparse.Namespace) -> tuple[dict, int]:
    cmd = COMMANDS[args.command]
    cfg = dict(cmd.defaults)
    seed = 0
    if args.config:
        loaded = json.loads(Path(args.config).read_text())
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        if "manifest_version" in loaded:
            if loaded.get("command") != args.command:
                raise ConfigError(f"manifest is for '{loaded.get('command')}', not '{args.command}'")
            seed = int(loaded["seed"])
            loaded = loaded["config"]
        unknown = set(loaded) - set(cfg) - {"seed"}
        if unknown:
            raise ConfigError(f"unknown config keys for {args.command}: {sorted(unknown)}")
        if "seed" in loaded:
            seed = int(loaded.pop("seed"))
        cfg.update(loaded)
    for key, default in cmd.defaults.items():
        if hasattr(args, "opt_" + key):
            value = getattr(args, "opt_" + key)
            if isinstance(default, list) and not isinstance(value, list):
                value = [value]
            cfg[key] = value
    if args.seed is not None:
        seed = args.seed
    return cfg, seed


def run(args: argparse.Namespace) -> Path:
    cfg, seed = resolve(args)
    cmd = COMMANDS[args.command]
    threads = max(1, int(args.threads))
    out_dir = Path(args.out or Path("out") / args.command)
    started = time.perf_counter()
    outputs = cmd.run(cfg, seed, threads)
    elapsed = time.perf_counter() - started
    out_dir.mkdir(parents=True, exist_ok=True)
    hashes = {}
    for name, content in sorted(outputs.items()):
        data = content.encode() if isinstance(content, str) else content
        (out_dir / name).write_bytes(data)
        hashes[name] = hashlib.sha256(data).hexdigest()
    manifest = {
        "manifest_version": 1,
        "tool": "slhz",
        "version": __version__,
        "git_describe": _git_describe(),
        "command": args.command,
        "seed": seed,
        "config": cfg,
        "outputs": hashes,
        "wall_clock_s": round(elapsed, 3),
        "finished_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return out_dir


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out_dir = run(args)
    except (ConfigError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        print(f"slhz: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"slhz: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
