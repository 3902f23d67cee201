"""Command-line front end.

Subcommands: ``saw-run``, ``sle-run``, ``exact-table``, ``analyze``.
``--config FILE`` reads ``key=value`` lines whose keys are flag names
(``steps=50000``, ``n-increments=2000``); flags on the command line win.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import runner

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _common(p):
    p.add_argument("--config", help="key=value file mirroring the flags")
    p.add_argument("--seed", type=int, help="base seed (default 0)")
    p.add_argument("--out", help="output directory (default ./out)")
    p.add_argument("--batches", type=int, help="batches for batch-means error bars (default 20)")
    p.add_argument("--workers", type=int, help="worker processes (default 1)")
    p.add_argument("--points", type=int, help="t-grid size (default 1000)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sawsle", description=__doc__.splitlines()[0] if __doc__ else None)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("saw-run", help="pivot-chain simulation of half-plane SAWs")
    _common(p)
    p.add_argument("--steps", type=int, help="walk length N")
    p.add_argument("--iters", type=int, help="pivot iterations per chain after warmup")
    p.add_argument("--warmup", type=int, help="warmup iterations per chain (default 20 N)")
    p.add_argument("--stride", type=int, help="iterations between measurements (default N/10)")
    p.add_argument("--s", type=float, help="X scale factor, c = s N^(3/4) (default 0.1)")
    p.add_argument("--s-y", dest="s_y", type=float, help="Y scale factor (default s/10)")
    p.add_argument("--chains", type=int, help="independent chains (default 1)")
    p.set_defaults(mode="saw")

    p = sub.add_parser("sle-run", help="discretized Loewner traces")
    _common(p)
    p.add_argument("--kappa", type=float, help="SLE parameter (default 8/3)")
    p.add_argument("--dt", type=float, help="mean time step (default 25 / n-increments)")
    p.add_argument("--n-increments", dest="n_increments", type=int, help="driving increments (default 2000)")
    p.add_argument("--grid-exponent", dest="grid_exponent", type=float, help="time grid t_k = T (k/n)^p (default 3)")
    p.add_argument("--samples", type=int, help="number of traces (default 1000)")
    p.add_argument("--refine", action="store_const", const=True, help="also estimate X at half the time step")
    p.set_defaults(mode="sle")

    p = sub.add_parser("exact-table", help="exact SLE(8/3) CDF table as CSV t,cdf")
    _common(p)
    p.add_argument("--which", choices=["x", "y"], help="observable (default x)")
    p.add_argument("--t-max", dest="t_max", type=float, help="grid end (default 1 for x, 20 for y)")
    p.set_defaults(mode="exact")

    p = sub.add_parser("analyze", help="compare a stored CDF dump with the exact law")
    _common(p)
    p.add_argument("--which", choices=["x", "y"], help="observable (default x)")
    p.add_argument("--cdf", help="CDF dump (t,count,n_samples,n_undefined)")
    p.add_argument("--samples", dest="sample_file", help="matching sample stream CSV")
    p.set_defaults(mode="analyze")
    return parser


_NON_CONFIG = {"config", "command", "verbose", "mode"}


def _read_config_file(path) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key.lstrip("-").replace("-", "_")] = value
    return values


def resolve_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> runner.RunConfig:
    cli = {k: v for k, v in vars(args).items() if v is not None and k not in _NON_CONFIG}
    fields = runner.RunConfig.__dataclass_fields__
    merged = {}
    if args.config:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        types = {a.dest: a.type for a in sub._actions if a.dest in fields}
        for key, raw in _read_config_file(args.config).items():
            if key not in types:
                raise ConfigError(f"{args.config}: unknown key {key!r} for {args.command}")
            convert = types[key]
            if convert is None:
                convert = str if key not in ("refine",) else (lambda v: v.lower() in ("1", "true", "yes"))
            try:
                merged[key] = convert(raw)
            except ValueError as exc:
                raise ConfigError(f"{args.config}: bad value for {key}: {raw!r}") from exc
    merged.update(cli)
    try:
        return runner.RunConfig(mode=args.mode, **merged)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
        cfg = resolve_config(args, parser)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if cfg.mode == "saw":
            meta = runner.run_saw(cfg)["metadata"]
            summary = {k: meta[k] for k in ("acceptance_fraction", "x", "y")}
        elif cfg.mode == "sle":
            meta = runner.run_sle(cfg)["metadata"]
            summary = {k: meta[k] for k in ("truncation_fraction", "x", "y")}
        elif cfg.mode == "exact":
            summary = {"table": str(runner.run_exact(cfg))}
        else:
            summary = runner.run_analyze(cfg)
            summary.pop("config")
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RuntimeError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(json.dumps(summary, indent=2, sort_keys=True, default=str))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
