"""Synthetic benchmark: jittered cubic lattices with class-specific constants."""

from __future__ import annotations

import itertools

import numpy as np

from .ingest import PointCloud, TrajectorySet

DEFAULT_CONSTANTS = (2.8, 3.0, 3.2)


def cubic_lattice(a: float, size: int = 3) -> np.ndarray:
    grid = np.array(list(itertools.product(range(size), repeat=3)), dtype=float)
    return a * grid


def class_tag(a: float) -> str:
    return f"a{a:g}"


def synthetic_lattice(constants=DEFAULT_CONSTANTS, frames: int = 30, size: int = 3,
                      sigma: float = 0.05, seed: int = 0) -> list[TrajectorySet]:
    """One TrajectorySet per lattice constant, ``frames`` jittered copies each.

    Every frame draws its noise from its own seeded stream, so a frame does
    not depend on how many frames or classes were requested before it.
    """
    out = []
    for c, a in enumerate(constants):
        base = cubic_lattice(a, size)
        tag = class_tag(a)
        clouds = []
        for f in range(frames):
            rng = np.random.default_rng([seed, c, f])
            pts = base + rng.normal(0.0, sigma, base.shape)
            clouds.append(PointCloud(pts, [], f, tag))
        out.append(TrajectorySet(clouds, tag))
    return out


def flatten(sets: list[TrajectorySet]) -> list[PointCloud]:
    return [cloud for s in sets for cloud in s.frames]
