"""Connected-mode DRX cell tracking and awake/sleep bookkeeping.

The UE keeps a listening set of K cells that always contains its serving
cell. Each DRX cycle it measures the listening set; it stays on the serving
cell while that link is usable, hands over to the best usable member
otherwise, and falls back to a full beam sweep of ``sweep_len_cycles``
awake cycles when every listened link is below threshold.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .blockage import BlockerField, init_blockers, step_blockers
from .channel import LinkBudget, LinkSample, draw_link_states
from .config import ConfigError, ScenarioConfig
from .scenario import Deployment


class Mode(enum.Enum):
    TRACKING = "tracking"
    SWEEPING = "sweeping"


class Event(enum.Enum):
    SERVED = "served"
    HANDOVER = "handover"
    SWEEP_TRIGGERED = "sweep_triggered"
    SWEEPING = "sweeping"


class DrxConsistencyError(RuntimeError):
    """Measurements do not match the state they are applied to."""


@dataclass(frozen=True)
class DrxState:
    serving_cell: int
    listening_set: tuple[int, ...]
    mode: Mode = Mode.TRACKING
    sweep_remaining: int = 0


@dataclass(frozen=True)
class CycleOutcome:
    instance_n: int
    awake_time_s: float
    slept_time_s: float
    event: Event
    all_blocked: bool
    serving_cell: int
    # serving cell and its SNR as measured at the start of the cycle;
    # NaN while sweeping
    prev_serving_cell: int = -1
    serving_snr_db: float = math.nan
    listening_snrs_db: tuple[float, ...] = ()


def _argmax_low_index(values: Sequence[float]) -> int:
    # np.argmax returns the first maximum, i.e. the lowest index on ties
    return int(np.argmax(np.asarray(values, dtype=np.float64)))


def _draw_listening_set(serving: int, n_cells: int, k: int, rng: np.random.Generator) -> tuple[int, ...]:
    others = [c for c in range(n_cells) if c != serving]
    if k - 1 >= len(others):
        companions = others
    else:
        picks = rng.choice(len(others), size=k - 1, replace=False)
        companions = sorted(others[i] for i in picks)
    return (serving, *companions)


def _snr_vector(samples_all_cells) -> np.ndarray:
    if len(samples_all_cells) and isinstance(samples_all_cells[0], LinkSample):
        ordered = sorted(samples_all_cells, key=lambda s: s.cell_k)
        if [s.cell_k for s in ordered] != list(range(len(ordered))):
            raise DrxConsistencyError("samples must cover cells 0..N-1 exactly once")
        return np.array([s.snr_db for s in ordered])
    return np.asarray(samples_all_cells, dtype=np.float64)


def init_association(samples_all_cells, k_listen: int, rng: np.random.Generator) -> DrxState:
    """Serve the strongest cell and listen to it plus K-1 random others.

    ``samples_all_cells`` is either a list of :class:`LinkSample` or a
    plain SNR vector indexed by cell.
    """
    snr = _snr_vector(samples_all_cells)
    n_cells = len(snr)
    if k_listen > n_cells:
        raise ConfigError(f"k_listen={k_listen} exceeds the number of cells {n_cells}")
    if k_listen < 1:
        raise ConfigError(f"k_listen must be >= 1, got {k_listen}")
    serving = _argmax_low_index(snr)
    return DrxState(serving, _draw_listening_set(serving, n_cells, k_listen, rng))


def _track(state: DrxState, snr: Mapping[int, float] | np.ndarray, n_cells: int, n: int,
           cfg: ScenarioConfig, rng: np.random.Generator) -> tuple[DrxState, CycleOutcome]:
    k = len(state.listening_set)
    gmin = cfg.gamma_min_db
    listen_snr = [float(snr[c]) for c in state.listening_set]
    serving_snr = listen_snr[0]
    monitor = k * cfg.t_ss0_s
    common = dict(prev_serving_cell=state.serving_cell, serving_snr_db=serving_snr,
                  listening_snrs_db=tuple(listen_snr))
    if serving_snr >= gmin:
        outcome = CycleOutcome(n, monitor, cfg.t_ss_per_s - monitor, Event.SERVED, False,
                               state.serving_cell, **common)
        return state, outcome
    best = _argmax_low_index(listen_snr)
    if listen_snr[best] >= gmin:
        new_serving = state.listening_set[best]
        new_state = DrxState(new_serving, _draw_listening_set(new_serving, n_cells, k, rng))
        outcome = CycleOutcome(n, monitor, cfg.t_ss_per_s - monitor, Event.HANDOVER, False,
                               new_serving, **common)
        return new_state, outcome
    new_state = DrxState(state.serving_cell, state.listening_set, Mode.SWEEPING, cfg.sweep_len_cycles)
    outcome = CycleOutcome(n, cfg.t_ss_per_s, 0.0, Event.SWEEP_TRIGGERED, True,
                           state.serving_cell, **common)
    return new_state, outcome


def drx_step(state: DrxState, samples: Sequence[LinkSample], cfg: ScenarioConfig,
             rng: np.random.Generator, n_cells: int | None = None) -> tuple[DrxState, CycleOutcome]:
    """One tracking-mode DRX cycle on measurements of the listening set.

    ``rng`` is only consumed when a handover re-draws the listening set.
    """
    if state.mode is not Mode.TRACKING:
        raise DrxConsistencyError("drx_step called while sweeping")
    by_cell = {s.cell_k: s.snr_db for s in samples}
    if len(by_cell) != len(samples) or set(by_cell) != set(state.listening_set):
        raise DrxConsistencyError(
            f"samples cover cells {sorted(by_cell)} but listening set is {sorted(state.listening_set)}"
        )
    n = samples[0].instance_n if samples else 0
    return _track(state, by_cell, n_cells or cfg.n_cells, n, cfg, rng)


def sweep_step(state: DrxState, samples_all_cells, cfg: ScenarioConfig,
               rng: np.random.Generator, n: int = 0) -> tuple[DrxState, CycleOutcome]:
    """One fully awake beam-sweep cycle; re-associates on the last one."""
    if state.mode is not Mode.SWEEPING:
        raise DrxConsistencyError("sweep_step called while tracking")
    remaining = state.sweep_remaining - 1
    if remaining > 0:
        new_state = DrxState(state.serving_cell, state.listening_set, Mode.SWEEPING, remaining)
    else:
        new_state = init_association(samples_all_cells, len(state.listening_set), rng)
    outcome = CycleOutcome(n, cfg.t_ss_per_s, 0.0, Event.SWEEPING, False, new_state.serving_cell)
    return new_state, outcome


def blocking_probability(marginals: Iterable[float]) -> float:
    """Probability that every link of the set is blocked, assuming
    independence. The empty set has no usable link, so it gives 1."""
    p = 1.0
    for m in marginals:
        if not 0.0 <= m <= 1.0:
            raise ValueError(f"marginal {m} outside [0, 1]")
        p *= m
    return p


def awake_fraction_bound(p_b: float, k: int, cfg: ScenarioConfig) -> tuple[float, float]:
    """Lower bound on the awake fraction and the matching sleep fraction."""
    if not 0.0 <= p_b <= 1.0:
        raise ValueError(f"p_b={p_b} outside [0, 1]")
    duty = k * cfg.t_ss0_s / cfg.t_ss_per_s
    awake = (1.0 - p_b) * duty + p_b
    return awake, 1.0 - awake


@dataclass
class TrajectoryStats:
    """Counters accumulated over one trajectory for one listening-set size.

    Awake time is kept as integer cycle counts so that the fractions are
    exact at both extremes (pure monitoring and pure sweeping).
    """

    k_listen: int
    n_cycles: int = 0
    n_tracking: int = 0
    n_all_blocked: int = 0
    n_handovers: int = 0
    n_sweeps: int = 0
    n_full_awake: int = 0
    t_ss_per_s: float = 0.02
    t_ss0_s: float = 0.7e-3
    events: list[CycleOutcome] | None = None

    @property
    def duty(self) -> float:
        return self.k_listen * self.t_ss0_s / self.t_ss_per_s

    @property
    def awake_time_s(self) -> float:
        monitor = self.n_cycles - self.n_full_awake
        return self.n_full_awake * self.t_ss_per_s + monitor * self.k_listen * self.t_ss0_s

    @property
    def p_b(self) -> float:
        return self.n_all_blocked / self.n_tracking if self.n_tracking else 1.0

    @property
    def beta_awake(self) -> float:
        if self.n_full_awake == self.n_cycles:
            return 1.0
        d = self.duty
        return d + self.n_full_awake * (1.0 - d) / self.n_cycles

    @property
    def beta_sleep(self) -> float:
        return 1.0 - self.beta_awake

    def add(self, outcome: CycleOutcome) -> None:
        self.n_cycles += 1
        if outcome.slept_time_s == 0.0:
            self.n_full_awake += 1
        if outcome.event is Event.SWEEPING:
            return
        self.n_tracking += 1
        if outcome.event is Event.HANDOVER:
            self.n_handovers += 1
        elif outcome.event is Event.SWEEP_TRIGGERED:
            self.n_sweeps += 1
            self.n_all_blocked += 1


def run_drx(snr_trace: np.ndarray, cfg: ScenarioConfig, k_listen: int, rng: np.random.Generator,
            record_events: bool = False) -> TrajectoryStats:
    """Drive the state machine over a precomputed SNR trace.

    ``snr_trace`` has shape (n_steps + 1, N); row 0 is the pre-DRX
    measurement of all cells used for the initial association, rows 1..
    are the monitoring instances.
    """
    snr_trace = np.asarray(snr_trace, dtype=np.float64)
    n_cells = snr_trace.shape[1]
    stats = TrajectoryStats(k_listen=k_listen, t_ss_per_s=cfg.t_ss_per_s, t_ss0_s=cfg.t_ss0_s,
                            events=[] if record_events else None)
    state = init_association(snr_trace[0], k_listen, rng)
    for n in range(1, len(snr_trace)):
        row = snr_trace[n]
        if state.mode is Mode.TRACKING:
            state, outcome = _track(state, row, n_cells, n, cfg, rng)
        else:
            state, outcome = sweep_step(state, row, cfg, rng, n)
        stats.add(outcome)
        if record_events:
            stats.events.append(outcome)
    return stats


def snr_trace(deployment: Deployment, cfg: ScenarioConfig, rng: np.random.Generator,
              on_step: Callable[[int, BlockerField], None] | None = None) -> np.ndarray:
    """Link states, blocker field and per-instance SNRs for one trajectory.

    Returns an (n_steps + 1, N) array; row 0 is instance 0 (initial blocker
    drop), row n follows n blocker steps. ``on_step`` sees every field.
    """
    states = draw_link_states(deployment, cfg, rng)
    budget = LinkBudget(deployment, states, cfg)
    blockers = init_blockers(cfg, deployment.ue_xy, rng)
    out = np.empty((cfg.n_steps + 1, deployment.n_cells))
    out[0] = budget.snr(blockers)[0]
    if on_step is not None:
        on_step(0, blockers)
    for n in range(1, cfg.n_steps + 1):
        blockers = step_blockers(blockers, rng)
        out[n] = budget.snr(blockers)[0]
        if on_step is not None:
            on_step(n, blockers)
    return out


def run_trajectory(deployment: Deployment, cfg: ScenarioConfig, rng: np.random.Generator,
                   record_events: bool = False) -> TrajectoryStats:
    """Generate one channel trajectory and run DRX at ``cfg.k_listen``."""
    trace = snr_trace(deployment, cfg, rng)
    return run_drx(trace, cfg, cfg.k_listen, rng, record_events)


def write_event_log(path, rows: Iterable[tuple[int, CycleOutcome]]) -> None:
    """CSV with columns traj_id, n, event, serving_cell, awake_s."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["traj_id", "n", "event", "serving_cell", "awake_s"])
        for traj, o in rows:
            writer.writerow([traj, o.instance_n, o.event.value, o.serving_cell, f"{o.awake_time_s:.6g}"])
