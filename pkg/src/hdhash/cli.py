"""Benchmark command line: run experiments, write CSV, render figures.

Subcommands map one-to-one onto the emulator drivers plus a basis
profile dump. Every run is reproducible from its config and seeds; CSV
output is byte-identical across runs except for latency rows.
"""

from __future__ import annotations

import argparse
import os
import sys
from statistics import median

from .basis import circular_set, level_set, random_set, similarity_profile
from .emulator import (
    CSV_HEADER,
    ExperimentConfig,
    InvariantViolation,
    ReportRow,
    rows_to_csv,
    run_remap,
    run_robustness,
    run_timing,
    run_uniformity,
)
from .hypervector import Rng
from .strategy import STRATEGY_NAMES

__all__ = ["main", "parse_config"]

_TIMING_SERVERS = tuple(2**i for i in range(1, 12))  # 2 .. 2048

_COMMAND_DEFAULTS = {
    "bench-time": {
        "strategies": ("modular", "consistent", "rendezvous", "hd"),
        "server_counts": _TIMING_SERVERS,
        "noise_bits": (0,),
    },
    "bench-robustness": {
        "strategies": ("consistent", "rendezvous", "hd"),
        "server_counts": (64, 128, 256, 512),
    },
    "bench-uniformity": {
        "strategies": ("consistent", "rendezvous", "hd"),
        "server_counts": (64,),
    },
    "bench-remap": {
        "strategies": ("modular", "consistent", "rendezvous", "hd"),
        "server_counts": (8, 64, 256),
    },
}

_RUNNERS = {
    "bench-time": run_timing,
    "bench-robustness": run_robustness,
    "bench-uniformity": run_uniformity,
    "bench-remap": run_remap,
}

_SUMMARY_METRIC = {
    "bench-time": "latency_ns",
    "bench-robustness": "mismatch",
    "bench-uniformity": "chi_squared",
    "bench-remap": "remap_leave",
}

_INT_KEYS = ("requests", "d", "n", "burst", "batch")
_LIST_KEYS = ("servers", "noise", "seeds")
_CONFIG_KEYS = _INT_KEYS + _LIST_KEYS + ("strategies",)


def _parse_int_list(text: str, key: str) -> tuple[int, ...]:
    """Comma lists ("2,4,8") and inclusive ranges ("0..10")."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ValueError(f"config key {key!r} has no values")
    return tuple(out)


def parse_config(path: str, defaults: ExperimentConfig | None = None) -> ExperimentConfig:
    """Read ``key = value`` lines; unknown keys and bad values are errors."""
    config = defaults or ExperimentConfig()
    overrides = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw.rstrip()!r}")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in _CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            if key in _INT_KEYS:
                overrides[key] = int(value)
            elif key == "strategies":
                names = tuple(s.strip() for s in value.split(",") if s.strip())
                unknown = [s for s in names if s not in STRATEGY_NAMES]
                if unknown:
                    raise ValueError(f"{path}:{lineno}: unknown strategies {unknown}")
                overrides[key] = names
            elif key == "servers":
                overrides["server_counts"] = _parse_int_list(value, key)
            elif key == "noise":
                overrides["noise_bits"] = _parse_int_list(value, key)
            elif key == "seeds":
                overrides[key] = _parse_int_list(value, key)
    return config.with_overrides(**overrides)


def _add_common(parser: argparse.ArgumentParser, default_output: str) -> None:
    parser.add_argument("--config", help="experiment config file (key = value lines)")
    parser.add_argument("--output", default=default_output, help="CSV output path")
    parser.add_argument("--figure", help="figure output path (default: CSV path with .png)")
    parser.add_argument("--no-figure", action="store_true", help="skip figure rendering")
    parser.add_argument("--seed", type=int, help="replace the seed list with one seed")
    parser.add_argument(
        "--strategy",
        help="comma-separated strategy filter (modular, consistent, rendezvous, hd)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hdhash",
        description="Benchmarks for dynamic hash tables over a hyperdimensional ring.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("bench-time", help="lookup latency vs. pool size"), "timing.csv")
    _add_common(
        sub.add_parser("bench-robustness", help="mismatch under injected bit errors"),
        "robustness.csv",
    )
    _add_common(
        sub.add_parser("bench-uniformity", help="per-server load chi-squared"), "uniformity.csv"
    )
    _add_common(
        sub.add_parser("bench-remap", help="request remapping across resizes"), "remap.csv"
    )

    profile = sub.add_parser("profile-basis", help="dump a basis-set similarity profile")
    profile.add_argument("--kind", choices=("random", "level", "circular"), required=True)
    profile.add_argument("--n", type=int, default=12)
    profile.add_argument("--d", type=int, default=10_000)
    profile.add_argument("--seed", type=int, default=1)
    profile.add_argument("--output", default="profile.csv")
    profile.add_argument("--figure", help="figure output path (default: CSV path with .png)")
    profile.add_argument("--no-figure", action="store_true")
    return parser


def _figure_path(args) -> str:
    if args.figure:
        return args.figure
    root, _ = os.path.splitext(args.output)
    return root + ".png"


def _build_config(args) -> ExperimentConfig:
    defaults = ExperimentConfig().with_overrides(**_COMMAND_DEFAULTS[args.command])
    if args.config:
        if not os.path.exists(args.config):
            raise FileNotFoundError(f"config file not found: {args.config}")
        config = parse_config(args.config, defaults)
    else:
        config = defaults
    if args.seed is not None:
        config = config.with_overrides(seeds=(args.seed,))
    if args.strategy:
        names = tuple(s.strip() for s in args.strategy.split(",") if s.strip())
        unknown = [s for s in names if s not in STRATEGY_NAMES]
        if unknown:
            raise ValueError(f"unknown strategies {unknown}")
        config = config.with_overrides(strategies=names)
    return config


def _print_summaries(command: str, config: ExperimentConfig, rows: list[ReportRow]) -> None:
    metric = _SUMMARY_METRIC[command]
    at_noise = max(config.noise_bits) if command in ("bench-robustness", "bench-uniformity") else None
    for strategy in config.strategies:
        for k in config.server_counts:
            values = [
                r.value for r in rows
                if r.strategy == strategy and r.servers == k and r.metric == metric
                and (at_noise is None or r.noise_bits == at_noise)
            ]
            if not values:
                continue
            if metric == "latency_ns":
                print(f"{command} {strategy} k={k}: median latency {median(values) / 1e3:.2f} us")
            elif metric == "mismatch":
                print(
                    f"{command} {strategy} k={k}: median mismatch "
                    f"{100 * median(values):.3f}% at {max(config.noise_bits)} bit errors"
                )
            elif metric == "chi_squared":
                print(
                    f"{command} {strategy} k={k}: median chi-squared "
                    f"{median(values):.2f} at {max(config.noise_bits)} bit errors"
                )
            else:
                print(f"{command} {strategy} k={k}: median leave remap {100 * median(values):.3f}%")


def _run_benchmark(args) -> int:
    config = _build_config(args)
    rows = _RUNNERS[args.command](config)
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(rows_to_csv(rows))
    _print_summaries(args.command, config, rows)
    if not args.no_figure:
        from . import plotting

        renderer = {
            "bench-time": plotting.render_timing,
            "bench-robustness": plotting.render_robustness,
            "bench-uniformity": plotting.render_uniformity,
            "bench-remap": plotting.render_remap,
        }[args.command]
        renderer(rows, _figure_path(args))
        print(f"wrote {args.output} and {_figure_path(args)}")
    else:
        print(f"wrote {args.output}")
    return 0


def _run_profile(args) -> int:
    make = {"random": random_set, "level": level_set, "circular": circular_set}[args.kind]
    basis = make(args.n, args.d, Rng(args.seed))
    profile = similarity_profile(basis)
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write("i,j,value\n")
        for i in range(basis.n):
            for j in range(basis.n):
                fh.write(f"{i},{j},{profile[i, j]:.12g}\n")
    print(
        f"profile-basis {args.kind} n={basis.n} d={basis.d}: "
        f"adjacent similarity {profile[0, 1 % basis.n]:.4f}"
    )
    if not args.no_figure:
        from . import plotting

        plotting.render_profile(profile, args.kind, _figure_path(args))
        print(f"wrote {args.output} and {_figure_path(args)}")
    else:
        print(f"wrote {args.output}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "profile-basis":
            return _run_profile(args)
        return _run_benchmark(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
