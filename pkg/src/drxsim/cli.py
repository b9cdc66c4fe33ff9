"""Command-line entry point: ``drxsim [options]``.

Config layering, lowest to highest precedence: band preset, ``--config``
file, explicit flags (``--set KEY=VALUE`` reaches any config field).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Sequence

from .config import BANDS, ConfigError, ScenarioConfig, band_config, read_config_file
from .power import DEFAULT_FOM_GRID, fom_sweep, power_preset, write_fom_sweep
from .sweep import emit_results, run_sweep

log = logging.getLogger("drxsim")

RUN_KEYS = ("bands", "k_values")


def parse_k(text: str) -> list[int]:
    """``"4"``, ``"1,2,4"``, ``"1-9"`` or ``"1:9"`` (inclusive ranges)."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        sep = "-" if "-" in part else (":" if ":" in part else None)
        try:
            if sep:
                lo, hi = (int(x) for x in part.split(sep, 1))
                if hi < lo:
                    raise ConfigError(f"empty K range {part!r}")
                out.extend(range(lo, hi + 1))
            else:
                out.append(int(part))
        except ValueError as exc:
            raise ConfigError(f"cannot parse K list {text!r}") from exc
    if not out:
        raise ConfigError(f"empty K list {text!r}")
    return out


def _parse_set(items: Sequence[str]) -> dict[str, Any]:
    out = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        out[key.strip()] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="drxsim",
        description="Monte Carlo DRX listening-set sweeps for 28/140 GHz links under blockage.",
    )
    p.add_argument("--config", help="JSON config file (flat keys) or a previous run manifest")
    p.add_argument("--band", choices=(*BANDS, "both"), help="carrier band preset (default: both)")
    p.add_argument("--k", help="listening-set sizes: 4, 1,2,4 or 1-9 (default: 1-N)")
    p.add_argument("--trajectories", type=int, help="number of channel trajectories")
    p.add_argument("--steps", type=int, help="monitoring instances per trajectory")
    p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    p.add_argument("--out", default="results", help="output directory (default: ./results)")
    p.add_argument("--trace", action="store_true", help="write per-step SNR, event and blocker traces")
    p.add_argument("--fom-sweep", action="store_true", help="write RFFE power vs LNA FoM curves")
    p.add_argument("--workers", type=int, default=1, help="trajectory worker processes")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config field, repeatable")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve(args: argparse.Namespace) -> tuple[dict[str, Any], list[str], list[int] | None]:
    """Merge config file and flags into one override dict."""
    overrides: dict[str, Any] = {}
    if args.config:
        overrides.update(read_config_file(args.config))
    overrides.update(_parse_set(args.set))
    if args.trajectories is not None:
        overrides["n_trajectories"] = args.trajectories
    if args.steps is not None:
        overrides["n_steps"] = args.steps
    if args.seed is not None:
        overrides["rng_seed"] = args.seed
    if args.k is not None:
        overrides["k_values"] = parse_k(args.k)
    if args.band is not None:
        overrides["bands"] = list(BANDS) if args.band == "both" else [args.band]
    overrides.pop("band", None)

    bands = overrides.get("bands", list(BANDS))
    if isinstance(bands, str):
        bands = list(BANDS) if bands == "both" else [bands]
    for b in bands:
        if b not in BANDS:
            raise ConfigError(f"unknown band {b!r}")
    overrides["bands"] = list(bands)
    k_values = overrides.get("k_values")
    if isinstance(k_values, str):
        k_values = parse_k(k_values)
    if k_values is not None:
        overrides["k_values"] = [int(k) for k in k_values]
    return overrides, list(bands), k_values


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _run(args)
    except (ConfigError, OSError) as exc:
        print(f"drxsim: error: {exc}", file=sys.stderr)
        return 2


def _run(args: argparse.Namespace) -> int:
    overrides, bands, k_values = resolve(args)
    scenario_overrides = {k: v for k, v in overrides.items() if k not in RUN_KEYS}
    out = Path(args.out)
    configs: dict[str, ScenarioConfig] = {}
    metrics = []
    for band in bands:
        cfg = band_config(band, **scenario_overrides)
        ks = k_values if k_values is not None else list(range(1, cfg.n_cells + 1))
        if k_values is None:
            overrides["k_values"] = ks
        configs[band] = cfg
        overrides.setdefault("rng_seed", cfg.rng_seed)
        started = time.perf_counter()
        trace_dir = out / "traces" if args.trace else None
        metrics.extend(run_sweep(cfg, ks, cfg.rng_seed, workers=args.workers, trace_dir=trace_dir))
        log.info("band %s: %d trajectories x %d steps in %.1f s",
                 band, cfg.n_trajectories, cfg.n_steps, time.perf_counter() - started)
    if args.fom_sweep:
        out.mkdir(parents=True, exist_ok=True)
        for band in bands:
            write_fom_sweep(out / f"fom_sweep_{band}.csv", fom_sweep(power_preset(band), DEFAULT_FOM_GRID))
    csv_path, _ = emit_results(metrics, out, overrides, configs, seed=overrides["rng_seed"])
    print(csv_path.read_text(), end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())
