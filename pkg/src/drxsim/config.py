"""Scenario configuration, band presets and config-file I/O."""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

SPEED_OF_LIGHT = 299_792_458.0


class ConfigError(ValueError):
    """Raised for invalid or inconsistent configuration values."""


@dataclass(frozen=True)
class ScenarioConfig:
    carrier_freq_hz: float = 28e9
    bandwidth_hz: float = 400e6
    n_cells: int = 9
    cell_grid_side_m: float = 200.0
    bs_height_m: float = 10.0
    ue_height_m: float = 1.8
    m_ue: int = 8
    m_bs: int = 64
    tx_power_dbm: float = 23.0
    temperature_k: float = 298.0
    noise_figure_db: float = 7.0
    gamma_min_db: float = -6.5
    t_ss_per_s: float = 0.020
    t_ss0_s: float = 7e-4
    sweep_len_cycles: int = 1
    k_listen: int = 4
    blocker_density_per_m2: float = 0.01
    blocker_disc_radius_m: float = 200.0
    n_trajectories: int = 100
    n_steps: int = 500
    rng_seed: int = 0
    # off unless > 0; dB standard deviations, drawn once per trajectory
    shadow_sigma_los_db: float = 0.0
    shadow_sigma_nlos_db: float = 0.0
    # None keeps every blocker in the loss sum
    relevance_radius_m: float | None = None
    sleep_power_w: float = 0.0
    band: str = "28ghz"

    def __post_init__(self) -> None:
        self.validate()

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq_hz

    def validate(self) -> None:
        if not self.carrier_freq_hz > 0:
            raise ConfigError(f"carrier_freq_hz must be > 0, got {self.carrier_freq_hz}")
        if self.n_cells < 1:
            raise ConfigError(f"n_cells must be >= 1, got {self.n_cells}")
        if not 1 <= self.k_listen <= self.n_cells:
            raise ConfigError(f"k_listen must lie in [1, {self.n_cells}], got {self.k_listen}")
        if self.sweep_len_cycles < 1:
            raise ConfigError(f"sweep_len_cycles must be >= 1, got {self.sweep_len_cycles}")
        positive = (
            "bandwidth_hz", "cell_grid_side_m", "bs_height_m", "ue_height_m",
            "temperature_k", "t_ss_per_s", "t_ss0_s", "blocker_disc_radius_m",
        )
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.blocker_density_per_m2 < 0:
            raise ConfigError("blocker_density_per_m2 must be >= 0")
        if self.m_ue < 1 or self.m_bs < 1:
            raise ConfigError("antenna counts must be >= 1")
        if self.t_ss0_s * self.n_cells > self.t_ss_per_s * (1 + 1e-12):
            raise ConfigError(
                f"t_ss0_s * n_cells = {self.t_ss0_s * self.n_cells} exceeds t_ss_per_s = {self.t_ss_per_s}"
            )
        if self.n_trajectories < 1 or self.n_steps < 1:
            raise ConfigError("n_trajectories and n_steps must be >= 1")
        if not 0 <= self.rng_seed < 2**64:
            raise ConfigError(f"rng_seed must be an unsigned 64-bit integer, got {self.rng_seed}")
        if self.shadow_sigma_los_db < 0 or self.shadow_sigma_nlos_db < 0:
            raise ConfigError("shadow fading sigmas must be >= 0")
        if self.relevance_radius_m is not None and self.relevance_radius_m <= 0:
            raise ConfigError("relevance_radius_m must be > 0 when set")
        if self.sleep_power_w < 0:
            raise ConfigError("sleep_power_w must be >= 0")

    def replace(self, **changes: Any) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ScenarioConfig":
        known = {f.name: f for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        kwargs: dict[str, Any] = {}
        for key, value in data.items():
            kwargs[key] = _coerce(known[key], value)
        return cls(**kwargs)


def _coerce(f: dataclasses.Field, value: Any) -> Any:
    if value is None:
        return None
    kind = f.type if isinstance(f.type, str) else getattr(f.type, "__name__", "")
    try:
        if kind == "int":
            if isinstance(value, float) and not value.is_integer():
                raise ConfigError(f"{f.name} must be an integer, got {value}")
            return int(value)
        if kind.startswith("float"):
            return float(value)
        if kind == "str":
            return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {f.name}: {value!r}") from exc
    return value


BANDS = ("28ghz", "140ghz")

_PRESET_DIR = Path(__file__).parent / "presets"


def load_preset(band: str) -> dict[str, Any]:
    """Raw preset dictionary for a band (scenario + power sections)."""
    band = band.lower()
    if band not in BANDS:
        raise ConfigError(f"unknown band {band!r}; expected one of {BANDS}")
    with open(_PRESET_DIR / f"{band}.json") as fh:
        return json.load(fh)


def band_config(band: str, **overrides: Any) -> ScenarioConfig:
    """Table-II scenario for ``band`` with optional field overrides."""
    data = dict(load_preset(band)["scenario"])
    data.update(overrides)
    return ScenarioConfig.from_dict(data)


def read_config_file(path: str | Path) -> dict[str, Any]:
    """Read a flat key/value config file (JSON).

    A run manifest written by :func:`drxsim.sweep.emit_results` is also
    accepted; its ``config`` section is used.
    """
    path = Path(path)
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    if "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    return data


def is_perfect_square(n: int) -> bool:
    r = math.isqrt(n)
    return r * r == n
