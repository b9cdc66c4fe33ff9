"""Moving blocker population and knife-edge blockage loss.

Blockers are vertical rectangular screens standing on the ground, always
turned to face the link under evaluation. Loss through one screen uses the
four-edge diffraction form: each of the two side edges and the top/bottom
edges contributes

    F = atan(+-(pi/2) * sqrt((pi/lambda) * (D1 + D2 - d))) / pi

with ``+`` when the edge shadows the direct ray, and the screen loss is
``-20 log10(1 - (F_top + F_bottom) * (F_left + F_right))`` floored at 0 dB.
Losses of several screens add in dB.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .config import ScenarioConfig

DEFAULT_STEP_S = 0.020


class BlockerClass(enum.IntEnum):
    HUMAN = 0
    VEHICULAR = 1


# (height, width) in metres and the upper bound of the initial speed in m/s
BLOCKER_DIMENSIONS = {
    BlockerClass.HUMAN: (1.7, 0.3),
    BlockerClass.VEHICULAR: (1.4, 4.8),
}
MAX_INITIAL_SPEED = {
    BlockerClass.HUMAN: 1.0,
    BlockerClass.VEHICULAR: 28.0,
}

_HEIGHTS = np.array([BLOCKER_DIMENSIONS[c][0] for c in BlockerClass])
_WIDTHS = np.array([BLOCKER_DIMENSIONS[c][1] for c in BlockerClass])
_VMAX = np.array([MAX_INITIAL_SPEED[c] for c in BlockerClass])


@dataclass(frozen=True)
class Blocker:
    position_xy: tuple[float, float]
    velocity_xy: tuple[float, float]
    width_m: float
    height_m: float
    kind: BlockerClass

    @classmethod
    def of_class(cls, kind: BlockerClass, position_xy, velocity_xy=(0.0, 0.0)) -> "Blocker":
        height, width = BLOCKER_DIMENSIONS[BlockerClass(kind)]
        return cls(
            position_xy=(float(position_xy[0]), float(position_xy[1])),
            velocity_xy=(float(velocity_xy[0]), float(velocity_xy[1])),
            width_m=width,
            height_m=height,
            kind=BlockerClass(kind),
        )


@dataclass
class BlockerField:
    """Structure-of-arrays store for a blocker population."""

    position: np.ndarray  # (B, 2)
    velocity: np.ndarray  # (B, 2)
    kind: np.ndarray  # (B,) int8 of BlockerClass values
    step_s: float = DEFAULT_STEP_S
    width: np.ndarray = field(init=False)
    height: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.position = np.asarray(self.position, dtype=np.float64).reshape(-1, 2)
        self.velocity = np.asarray(self.velocity, dtype=np.float64).reshape(-1, 2)
        self.kind = np.asarray(self.kind, dtype=np.int8).reshape(-1)
        if not (len(self.position) == len(self.velocity) == len(self.kind)):
            raise ValueError("position, velocity and kind must have equal length")
        self.width = _WIDTHS[self.kind]
        self.height = _HEIGHTS[self.kind]

    def __len__(self) -> int:
        return len(self.kind)

    @classmethod
    def empty(cls, step_s: float = DEFAULT_STEP_S) -> "BlockerField":
        return cls(np.empty((0, 2)), np.empty((0, 2)), np.empty(0, dtype=np.int8), step_s)

    @classmethod
    def from_blockers(cls, blockers: Sequence[Blocker], step_s: float = DEFAULT_STEP_S) -> "BlockerField":
        if not blockers:
            return cls.empty(step_s)
        return cls(
            np.array([b.position_xy for b in blockers]),
            np.array([b.velocity_xy for b in blockers]),
            np.array([int(b.kind) for b in blockers], dtype=np.int8),
            step_s,
        )

    @property
    def blockers(self) -> list[Blocker]:
        return [
            Blocker(
                position_xy=(float(p[0]), float(p[1])),
                velocity_xy=(float(v[0]), float(v[1])),
                width_m=float(w),
                height_m=float(h),
                kind=BlockerClass(int(c)),
            )
            for p, v, w, h, c in zip(self.position, self.velocity, self.width, self.height, self.kind)
        ]

    def copy(self) -> "BlockerField":
        return BlockerField(self.position.copy(), self.velocity.copy(), self.kind.copy(), self.step_s)


def init_blockers(cfg: ScenarioConfig, ue_xy, rng: np.random.Generator) -> BlockerField:
    """Drop a homogeneous Poisson population on the disc around the UE.

    Class is human or vehicular with equal probability, speed is uniform up
    to the class maximum and the heading is uniform.
    """
    radius = cfg.blocker_disc_radius_m
    mean = cfg.blocker_density_per_m2 * math.pi * radius**2
    n = int(rng.poisson(mean)) if mean > 0 else 0
    step = cfg.t_ss_per_s
    if n == 0:
        return BlockerField.empty(step)
    r = radius * np.sqrt(rng.random(n))
    phi = rng.uniform(0.0, 2 * math.pi, n)
    pos = np.column_stack((ue_xy[0] + r * np.cos(phi), ue_xy[1] + r * np.sin(phi)))
    kind = (rng.random(n) < 0.5).astype(np.int8)
    speed = rng.random(n) * _VMAX[kind]
    heading = rng.uniform(0.0, 2 * math.pi, n)
    vel = np.column_stack((speed * np.cos(heading), speed * np.sin(heading)))
    return BlockerField(pos, vel, kind, step)


def step_blockers(field: BlockerField, rng: np.random.Generator | None = None,
                  increments: np.ndarray | None = None) -> BlockerField:
    """Advance one sampling period: velocity random walk, then position.

    ``increments`` overrides the standard-normal velocity kicks, which is
    mainly useful in tests. The input field is not modified.
    """
    if increments is None:
        if rng is None:
            raise ValueError("need rng or explicit increments")
        increments = rng.standard_normal((len(field), 2))
    vel = field.velocity + np.asarray(increments, dtype=np.float64).reshape(-1, 2)
    pos = field.position + vel * field.step_s
    return BlockerField(pos, vel, field.kind, field.step_s)


def knife_edge_loss_db(tx, rx, blocker: Blocker, wavelength_m: float) -> float:
    """Loss in dB (>= 0) of a single screen on the tx-rx path.

    Screens whose centre projects outside the horizontal span of the link
    do not obstruct it and give 0 dB.
    """
    if wavelength_m <= 0:
        raise ValueError("wavelength must be positive")
    tx = np.asarray(tx, dtype=np.float64)
    rx = np.asarray(rx, dtype=np.float64)
    if np.array_equal(tx, rx):
        raise ValueError("tx and rx coincide")
    out = kernels.link_blockage_loss_db(
        tx, rx,
        np.array([blocker.position_xy[0]]), np.array([blocker.position_xy[1]]),
        np.array([blocker.width_m]), np.array([blocker.height_m]),
        wavelength_m,
    )
    return float(out[0])


def total_blockage_loss_db(tx, rx, field: BlockerField, wavelength_m: float,
                           relevance_radius_m: float | None = None) -> float:
    """dB sum of screen losses over ``field``, optionally only within
    ``relevance_radius_m`` of the link's ground track."""
    return float(links_blockage_loss_db(np.asarray(tx)[None, :], np.asarray(rx)[None, :],
                                        field, wavelength_m, relevance_radius_m)[0])


def links_blockage_loss_db(tx: np.ndarray, rx: np.ndarray, field: BlockerField,
                           wavelength_m: float, relevance_radius_m: float | None = None) -> np.ndarray:
    radius = -1.0 if relevance_radius_m is None else float(relevance_radius_m)
    return kernels.link_blockage_loss_db(
        tx, rx, field.position[:, 0], field.position[:, 1],
        field.width, field.height, wavelength_m, radius,
    )


def write_blocker_trace(path, rows: Iterable[tuple[int, BlockerField]]) -> None:
    """CSV with columns n, blocker_id, x, y, vx, vy."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "blocker_id", "x", "y", "vx", "vy"])
        for n, fld in rows:
            for j in range(len(fld)):
                writer.writerow([n, j, *(f"{v:.6f}" for v in (*fld.position[j], *fld.velocity[j]))])
