"""Receiver front-end power: ADC pair, analog-beamforming RFFE, DRX average.

The RFFE follows a passive-combining analog beamformer: every antenna
branch has one LNA whose gain must make up for the phase-shifter,
combiner and mixer insertion loss, so per-branch LNA power scales as
``insertion_loss / lna_fom``. A single calibration constant absorbs the
remaining circuit details and is fitted to published anchor totals.
"""
from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .config import load_preset


@dataclass(frozen=True)
class PowerConfig:
    adc_fom_j_per_step: float = 65e-15
    adc_bits: int = 8
    adc_count: int = 2
    f_s_hz: float = 2e9
    n_rx: int = 8
    lna_fom_per_mw: float = 5.0
    ps_insertion_loss_db: float = 4.0
    lo_power_dbm: float = 10.0
    rffe_cal_constant: float = 1.0

    def __post_init__(self) -> None:
        if self.adc_bits < 1:
            raise ValueError("adc_bits must be >= 1")
        for name in ("adc_fom_j_per_step", "lna_fom_per_mw"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        for name in ("f_s_hz", "n_rx", "adc_count", "rffe_cal_constant"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def replace(self, **changes: Any) -> "PowerConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PowerConfig":
        return cls(**data)


def power_preset(band: str) -> PowerConfig:
    return PowerConfig.from_dict(load_preset(band)["power"])


def adc_power_w(cfg: PowerConfig) -> float:
    """Walden-style ADC power: count * FoM * 2**bits * f_s."""
    return cfg.adc_count * cfg.adc_fom_j_per_step * 2.0**cfg.adc_bits * cfg.f_s_hz


def _lna_branch_mw(cfg: PowerConfig) -> float:
    return cfg.rffe_cal_constant * 10.0 ** (cfg.ps_insertion_loss_db / 10.0) / cfg.lna_fom_per_mw


def rffe_power_w(cfg: PowerConfig) -> float:
    mw = cfg.n_rx * _lna_branch_mw(cfg) + 10.0 ** (cfg.lo_power_dbm / 10.0)
    return mw * 1e-3


def total_rx_power_w(cfg: PowerConfig) -> float:
    return adc_power_w(cfg) + rffe_power_w(cfg)


def mean_drx_power_w(beta_awake: float, cfg: PowerConfig, sleep_power_w: float = 0.0) -> float:
    if not 0.0 <= beta_awake <= 1.0:
        raise ValueError(f"beta_awake={beta_awake} outside [0, 1]")
    return beta_awake * total_rx_power_w(cfg) + (1.0 - beta_awake) * sleep_power_w


def calibrate_rffe(anchors: Sequence[tuple[PowerConfig, float]]) -> float:
    """Least-squares (relative error) fit of ``rffe_cal_constant``.

    ``anchors`` pairs a config with its target RFFE power in watts. The
    model is linear in the constant, so the fit is closed form.
    """
    num = den = 0.0
    for cfg, target_w in anchors:
        unit = cfg.replace(rffe_cal_constant=1.0)
        lo_w = 10.0 ** (unit.lo_power_dbm / 10.0) * 1e-3
        slope = (rffe_power_w(unit) - lo_w) / target_w
        num += slope * (1.0 - lo_w / target_w)
        den += slope * slope
    if den == 0.0:
        raise ValueError("anchors carry no antenna-dependent power")
    return num / den


def fom_sweep(cfg: PowerConfig, fom_grid: Iterable[float]) -> list[tuple[float, float]]:
    """RFFE power across LNA figures of merit, as (fom, watts) pairs."""
    out = []
    for fom in fom_grid:
        if not fom > 0:
            raise ValueError(f"FoM values must be positive, got {fom}")
        out.append((float(fom), rffe_power_w(cfg.replace(lna_fom_per_mw=float(fom)))))
    return out


def write_fom_sweep(path, rows: Iterable[tuple[float, float]]) -> None:
    """CSV with columns fom_inv_mw, power_mw from (fom, watts) pairs."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fom_inv_mw", "power_mw"])
        for fom, watts in rows:
            writer.writerow([f"{fom:.6g}", f"{watts * 1e3:.6f}"])


DEFAULT_FOM_GRID = tuple(float(x) for x in np.linspace(1.0, 20.0, 39))
