"""Monte Carlo execution over trajectories, K-sweeps and result files."""
from __future__ import annotations

import csv
import datetime as _dt
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from . import __version__, kernels
from .blockage import write_blocker_trace
from .channel import write_snr_trace
from .config import ConfigError, ScenarioConfig
from .drx import TrajectoryStats, run_drx, snr_trace, write_event_log
from .power import PowerConfig, mean_drx_power_w, power_preset
from .scenario import build_deployment

CSV_HEADER = (
    "band", "k", "p_b", "p_b_ci95", "beta_awake", "beta_sleep", "beta_sleep_ci95",
    "handover_rate", "sweep_rate", "mean_power_mw",
)

AVERAGING = "per-instance within each trajectory, then mean over trajectories; CI = 1.96*sd/sqrt(n)"

_WORLD_STREAM = 0
_DRX_STREAM = 1


@dataclass
class RunMetrics:
    band: str
    k_listen: int
    n_trajectories: int
    p_b: float
    p_b_ci95: float
    beta_awake: float
    beta_awake_ci95: float
    beta_sleep: float
    beta_sleep_ci95: float
    handover_rate: float
    sweep_rate: float
    mean_power_mw: float
    per_trajectory: list[TrajectoryStats] = field(default_factory=list, repr=False)

    def csv_row(self) -> list[str]:
        return [
            self.band, str(self.k_listen),
            f"{self.p_b:.8f}", f"{self.p_b_ci95:.8f}",
            f"{self.beta_awake:.8f}", f"{self.beta_sleep:.8f}", f"{self.beta_sleep_ci95:.8f}",
            f"{self.handover_rate:.8f}", f"{self.sweep_rate:.8f}", f"{self.mean_power_mw:.6f}",
        ]


def world_rng(seed: int, traj: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(traj, _WORLD_STREAM)))


def drx_rng(seed: int, traj: int, k: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(traj, _DRX_STREAM, k)))


@dataclass
class TrajectoryResult:
    traj: int
    stats: dict[int, TrajectoryStats]
    trace: np.ndarray | None = None


def simulate_trajectory(cfg: ScenarioConfig, k_values: Sequence[int], seed: int, traj: int,
                        keep_trace: bool = False, record_events: bool = False,
                        blocker_trace_path: str | os.PathLike | None = None) -> TrajectoryResult:
    """One channel trajectory evaluated at every K in ``k_values``.

    The deployment, LOS states and blocker motion come from a stream that
    depends only on (seed, traj), so every K (and every band) sees the
    same world; listening-set draws use a separate stream per K.
    """
    rng = world_rng(seed, traj)
    deployment = build_deployment(cfg, rng)
    fields = [] if blocker_trace_path is not None else None
    on_step = (lambda n, f: fields.append((n, f))) if fields is not None else None
    trace = snr_trace(deployment, cfg, rng, on_step=on_step)
    if blocker_trace_path is not None:
        write_blocker_trace(blocker_trace_path, fields)
    stats = {k: run_drx(trace, cfg, k, drx_rng(seed, traj, k), record_events) for k in k_values}
    return TrajectoryResult(traj, stats, trace if keep_trace else None)


def _worker(args):
    cfg, k_values, seed, traj, keep_trace, record_events = args
    return simulate_trajectory(cfg, k_values, seed, traj, keep_trace, record_events)


def _ci95(values: np.ndarray) -> float:
    if len(values) < 2:
        return 0.0
    return float(1.96 * values.std(ddof=1) / math.sqrt(len(values)))


def aggregate(band: str, k: int, stats: Sequence[TrajectoryStats], power: PowerConfig,
              sleep_power_w: float = 0.0) -> RunMetrics:
    p_b = np.array([s.p_b for s in stats])
    awake = np.array([s.beta_awake for s in stats])
    ho = np.array([s.n_handovers / s.n_cycles for s in stats])
    sw = np.array([s.n_sweeps / s.n_cycles for s in stats])
    beta_awake = float(awake.mean())
    return RunMetrics(
        band=band,
        k_listen=k,
        n_trajectories=len(stats),
        p_b=float(p_b.mean()),
        p_b_ci95=_ci95(p_b),
        beta_awake=beta_awake,
        beta_awake_ci95=_ci95(awake),
        beta_sleep=1.0 - beta_awake,
        beta_sleep_ci95=_ci95(awake),
        handover_rate=float(ho.mean()),
        sweep_rate=float(sw.mean()),
        mean_power_mw=mean_drx_power_w(min(max(beta_awake, 0.0), 1.0), power, sleep_power_w) * 1e3,
        per_trajectory=list(stats),
    )


def validate_k_values(k_values: Iterable[int], n_cells: int) -> list[int]:
    ks = list(k_values)
    if not ks:
        raise ConfigError("no K values given")
    for k in ks:
        if not 1 <= k <= n_cells:
            raise ConfigError(f"invalid K={k}: must lie in [1, {n_cells}]")
    return ks


def run_sweep(cfg: ScenarioConfig, k_values: Sequence[int], rng_seed: int | None = None,
              workers: int = 1, power: PowerConfig | None = None,
              trace_dir: str | os.PathLike | None = None) -> list[RunMetrics]:
    """Run ``cfg.n_trajectories`` trajectories and aggregate one
    :class:`RunMetrics` per K, in the order of ``k_values``.

    Results depend only on (cfg, k_values, seed): ``workers`` changes the
    schedule, never the numbers.
    """
    ks = validate_k_values(k_values, cfg.n_cells)
    seed = cfg.rng_seed if rng_seed is None else int(rng_seed)
    if not 0 <= seed < 2**64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed}")
    power = power if power is not None else power_preset(cfg.band)
    tracing = trace_dir is not None
    tasks = [(cfg, ks, seed, t, tracing, tracing) for t in range(cfg.n_trajectories)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_worker, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = [_worker(t) for t in tasks]
    if tracing:
        _write_traces(Path(trace_dir), cfg, ks, seed, results)
    return [aggregate(cfg.band, k, [r.stats[k] for r in results], power, cfg.sleep_power_w) for k in ks]


def _write_traces(trace_dir: Path, cfg: ScenarioConfig, ks, seed, results) -> None:
    trace_dir.mkdir(parents=True, exist_ok=True)
    band = cfg.band
    write_snr_trace(
        trace_dir / f"snr_{band}.csv",
        ((r.traj, n, row, cfg.gamma_min_db) for r in results for n, row in enumerate(r.trace)),
    )
    for k in ks:
        write_event_log(
            trace_dir / f"events_{band}_k{k}.csv",
            ((r.traj, o) for r in results for o in r.stats[k].events),
        )
    # full blocker populations are large; trace the first trajectory only
    simulate_trajectory(cfg, ks[:1], seed, 0, blocker_trace_path=trace_dir / f"blockers_{band}_traj0.csv")


def write_results_csv(metrics: Sequence[RunMetrics], path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for m in metrics:
            writer.writerow(m.csv_row())


def emit_results(metrics: Sequence[RunMetrics], path: str | os.PathLike,
                 run_config: dict[str, Any] | None = None,
                 resolved: dict[str, ScenarioConfig] | None = None,
                 seed: int | None = None) -> tuple[Path, Path]:
    """Write ``results.csv`` and ``manifest.json`` into directory ``path``.

    ``run_config`` is the override layer (config file plus CLI flags,
    including seed, bands and K values); feeding the manifest back in as
    ``--config`` reproduces the run.
    """
    if not metrics:
        raise ValueError("no metrics to write")
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / "results.csv"
        write_results_csv(metrics, csv_path)
        manifest = {
            "tool": "drxsim",
            "version": __version__,
            "kernel_backend": kernels.BACKEND,
            "created_utc": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            "averaging": AVERAGING,
            "seed": seed,
            "config": run_config or {},
            "resolved": {b: c.to_dict() for b, c in (resolved or {}).items()},
        }
        manifest_path = out / "manifest.json"
        with open(manifest_path, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write results to {out}: {exc.strerror}") from exc
    return csv_path, manifest_path
