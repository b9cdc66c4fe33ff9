"""Static world construction: base-station grid and UE drop."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ConfigError, ScenarioConfig, is_perfect_square


@dataclass(frozen=True)
class Deployment:
    bs_positions: np.ndarray  # (n_cells, 3)
    ue_position: np.ndarray  # (3,)

    @property
    def n_cells(self) -> int:
        return len(self.bs_positions)

    @property
    def ue_xy(self) -> np.ndarray:
        return self.ue_position[:2]


def grid_positions(n_cells: int, side_m: float, height_m: float) -> np.ndarray:
    """Regular sqrt(N) x sqrt(N) grid spanning a square centred at the origin."""
    if not is_perfect_square(n_cells):
        raise ConfigError(f"n_cells={n_cells} is not a perfect square; BS grid undefined")
    per_side = math.isqrt(n_cells)
    if per_side == 1:
        coords = np.zeros(1)
    else:
        coords = np.linspace(-side_m / 2, side_m / 2, per_side)
    xs, ys = np.meshgrid(coords, coords, indexing="xy")
    pos = np.empty((n_cells, 3))
    pos[:, 0] = xs.ravel()
    pos[:, 1] = ys.ravel()
    pos[:, 2] = height_m
    return pos


def build_deployment(cfg: ScenarioConfig, rng: np.random.Generator) -> Deployment:
    """Place the BS grid and drop the UE uniformly over the grid square.

    The grid is deterministic; only the UE drop consumes ``rng`` (two
    uniform draws), so the result is a pure function of the config and
    the generator state.
    """
    bs = grid_positions(cfg.n_cells, cfg.cell_grid_side_m, cfg.bs_height_m)
    half = cfg.cell_grid_side_m / 2
    xy = rng.uniform(-half, half, size=2)
    ue = np.array([xy[0], xy[1], cfg.ue_height_m])
    return Deployment(bs_positions=bs, ue_position=ue)
