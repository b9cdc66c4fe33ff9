"""Scalar link budget: UMi path loss, LOS state, array gain and noise."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .blockage import BlockerField, links_blockage_loss_db
from .config import ScenarioConfig
from .scenario import Deployment

BOLTZMANN = 1.380649e-23


@dataclass(frozen=True)
class LinkState:
    cell_k: int
    los: bool
    shadow_db: float = 0.0


@dataclass(frozen=True)
class LinkSample:
    instance_n: int
    cell_k: int
    path_loss_db: float
    blockage_loss_db: float
    bf_gain_db: float
    snr_db: float
    blocked: bool


def path_loss_db(d3_m, fc_hz, los, h_ue_m: float = 1.5):
    """UMi street-canyon path loss; NLOS never drops below the LOS value."""
    d3 = np.asarray(d3_m, dtype=np.float64)
    if np.any(d3 <= 0):
        raise ValueError("3-D distance must be positive")
    f_ghz = fc_hz / 1e9
    pl_los = 32.4 + 21.0 * np.log10(d3) + 20.0 * math.log10(f_ghz)
    pl_nlos = 22.4 + 35.3 * np.log10(d3) + 21.3 * math.log10(f_ghz) - 0.3 * (h_ue_m - 1.5)
    out = np.where(los, pl_los, np.maximum(pl_los, pl_nlos))
    return float(out) if out.ndim == 0 else out


def los_probability(d2_m):
    d2 = np.asarray(d2_m, dtype=np.float64)
    if np.any(d2 < 0):
        raise ValueError("2-D distance must be non-negative")
    with np.errstate(divide="ignore"):
        near = np.where(d2 > 0, np.minimum(18.0 / np.where(d2 > 0, d2, 1.0), 1.0), 1.0)
    e = np.exp(-d2 / 36.0)
    p = np.clip(near * (1 - e) + e, 0.0, 1.0)
    return float(p) if p.ndim == 0 else p


def bf_gain_db(m_ue: int, m_bs: int) -> float:
    if m_ue < 1 or m_bs < 1:
        raise ValueError("antenna counts must be >= 1")
    return 10.0 * math.log10(m_ue * m_bs)


def noise_power_dbm(bandwidth_hz: float, temperature_k: float, nf_db: float) -> float:
    return 10.0 * math.log10(BOLTZMANN * temperature_k * bandwidth_hz * 1e3) + nf_db


def draw_link_states(deployment: Deployment, cfg: ScenarioConfig,
                     rng: np.random.Generator) -> list[LinkState]:
    """One LOS draw (and optional shadowing) per cell, fixed for a trajectory."""
    d2 = np.hypot(*(deployment.bs_positions[:, :2] - deployment.ue_xy).T)
    p = np.atleast_1d(los_probability(d2))
    u = rng.random(len(p))
    z = rng.standard_normal(len(p))
    states = []
    for k in range(len(p)):
        los = bool(u[k] < p[k])
        sigma = cfg.shadow_sigma_los_db if los else cfg.shadow_sigma_nlos_db
        states.append(LinkState(cell_k=k, los=los, shadow_db=float(sigma * z[k])))
    return states


class LinkBudget:
    """Per-trajectory static part of the link budget.

    Everything except blockage is fixed once the deployment and LOS states
    are known, so it is computed here once and reused every instance.
    """

    def __init__(self, deployment: Deployment, link_states: Sequence[LinkState], cfg: ScenarioConfig):
        if len(link_states) != deployment.n_cells:
            raise ValueError("need one LinkState per cell")
        self.cfg = cfg
        self.bs = deployment.bs_positions
        self.ue = deployment.ue_position
        self.ue_rep = np.broadcast_to(self.ue, self.bs.shape)
        d3 = np.linalg.norm(self.bs - self.ue, axis=1)
        los = np.array([s.los for s in link_states], dtype=bool)
        self.path_loss = np.atleast_1d(path_loss_db(d3, cfg.carrier_freq_hz, los, cfg.ue_height_m))
        self.path_loss = self.path_loss + np.array([s.shadow_db for s in link_states])
        self.gain = bf_gain_db(cfg.m_ue, cfg.m_bs)
        self.noise = noise_power_dbm(cfg.bandwidth_hz, cfg.temperature_k, cfg.noise_figure_db)
        self.static_snr = cfg.tx_power_dbm + self.gain - self.path_loss - self.noise

    def blockage(self, field: BlockerField) -> np.ndarray:
        if len(field) == 0 or len(self.bs) == 0:
            return np.zeros(len(self.bs))
        return links_blockage_loss_db(self.bs, self.ue_rep, field, self.cfg.wavelength_m,
                                      self.cfg.relevance_radius_m)

    def snr(self, field: BlockerField) -> tuple[np.ndarray, np.ndarray]:
        """(snr_db, blockage_db) arrays over all cells."""
        blk = self.blockage(field)
        return self.static_snr - blk, blk

    def samples(self, field: BlockerField, n: int) -> list[LinkSample]:
        snr, blk = self.snr(field)
        gmin = self.cfg.gamma_min_db
        return [
            LinkSample(n, k, float(self.path_loss[k]), float(blk[k]), self.gain, float(snr[k]),
                       bool(snr[k] < gmin))
            for k in range(len(snr))
        ]


def sample_links(deployment: Deployment, link_states: Sequence[LinkState], field: BlockerField,
                 cfg: ScenarioConfig, n: int) -> list[LinkSample]:
    return LinkBudget(deployment, link_states, cfg).samples(field, n)


def write_snr_trace(path, rows: Iterable[tuple[int, int, np.ndarray, float]]) -> None:
    """CSV with columns traj_id, n, cell_k, snr_db, blocked.

    ``rows`` yields (traj_id, n, snr_vector, gamma_min_db).
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["traj_id", "n", "cell_k", "snr_db", "blocked"])
        for traj, n, snr, gmin in rows:
            for k, v in enumerate(snr):
                writer.writerow([traj, n, k, f"{v:.6f}", int(v < gmin)])
