"""Command-line entry point for batch scenario runs and validation.

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 numerical-integrity error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import ConfigurationError, IntegrityError, ResourceError, SpinBathError
from .scenarios import (
    DEFAULT_FIG2B_SEED,
    scenario_fig1,
    scenario_fig2b,
    scenario_fig3,
)
from .validation import validate

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_INTEGRITY = 3

_KNOWN_KEYS = {
    "scenario",
    "out",
    "seed",
    "cycles",
    "n",
    "range_ratio",
    "alphas",
    "nmax_exact",
    "nmax_formula",
}


def _load_config(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            config = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as err:
        raise ConfigurationError(f"config file {path} is not valid TOML: {err}")
    unknown = set(config) - _KNOWN_KEYS
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    if "scenario" not in config:
        raise ConfigurationError("config must name a scenario")
    return config


def _run_scenario(config: dict, out_override: str | None) -> None:
    name = config["scenario"]
    if name == "fig1":
        table = scenario_fig1(
            n_max_exact=config.get("nmax_exact", 8),
            n_max_formula=config.get("nmax_formula", 40),
        )
        default_out = "fig1.csv"
    elif name == "fig2b":
        table = scenario_fig2b(
            n=config.get("n", 8),
            seed=config.get("seed", DEFAULT_FIG2B_SEED),
            cycles=config.get("cycles", 2000),
            range_ratio=config.get("range_ratio", 1e-2),
        )
        default_out = "fig2b.csv"
    elif name == "fig3":
        table = scenario_fig3(
            alphas=config.get("alphas", (0.1, 1.0, 10.0)),
            cycles=config.get("cycles", 2000),
        )
        default_out = "fig3.csv"
    else:
        raise ConfigurationError(f"unknown scenario {name!r}")
    out = Path(out_override or config.get("out", default_out))
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    table.write(out)
    print(f"wrote {out} ({len(table.rows)} rows)")


def _parse_alphas(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigurationError(f"cannot parse alpha list {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinbath",
        description="Spin-bath cooling simulator: scenario runs and validation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario described by a TOML config")
    p_run.add_argument("--config", required=True, help="path to the TOML config file")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--out", default=None, help="override the output path")

    p1 = sub.add_parser("fig1", help="closed-form purity vs bath size, with exact checks")
    p1.add_argument("--nmax-exact", type=int, default=8)
    p1.add_argument("--nmax-formula", type=int, default=40)
    p1.add_argument("--out", default="fig1.csv")

    p2 = sub.add_parser("fig2b", help="resonant-only vs alternating transfer, one draw")
    p2.add_argument("--seed", type=int, default=DEFAULT_FIG2B_SEED)
    p2.add_argument("--cycles", type=int, default=2000)
    p2.add_argument("--out", default="fig2b.csv")

    p3 = sub.add_parser("fig3", help="interacting-bath cooling for several strengths")
    p3.add_argument("--alphas", default="0.1,1,10")
    p3.add_argument("--cycles", type=int, default=2000)
    p3.add_argument("--out", default="fig3.csv")

    sub.add_parser("validate", help="run the cross-module invariant suite")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = _load_config(args.config)
            if args.seed is not None:
                config["seed"] = args.seed
            _run_scenario(config, args.out)
        elif args.command == "fig1":
            _run_scenario(
                {
                    "scenario": "fig1",
                    "nmax_exact": args.nmax_exact,
                    "nmax_formula": args.nmax_formula,
                },
                args.out,
            )
        elif args.command == "fig2b":
            _run_scenario(
                {"scenario": "fig2b", "seed": args.seed, "cycles": args.cycles},
                args.out,
            )
        elif args.command == "fig3":
            _run_scenario(
                {
                    "scenario": "fig3",
                    "alphas": _parse_alphas(args.alphas),
                    "cycles": args.cycles,
                },
                args.out,
            )
        elif args.command == "validate":
            return EXIT_OK if validate() else EXIT_VALIDATION
    except IntegrityError as err:
        print(f"integrity error: {err}", file=sys.stderr)
        return EXIT_INTEGRITY
    except (ConfigurationError, ResourceError, ValueError) as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except SpinBathError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
