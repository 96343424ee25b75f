"""Multi-frame XYZ trajectories -> validated point clouds."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .errors import DegeneracyError, ParseError

DUPLICATE_TOL = 1e-9


@dataclass
class PointCloud:
    points: np.ndarray
    elements: list[str] = field(default_factory=list)
    frame_id: int = 0
    source_tag: str = ""

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)

    def __len__(self):
        return len(self.points)

    def scaled(self, c: float) -> "PointCloud":
        return PointCloud(self.points * c, list(self.elements), self.frame_id, self.source_tag)


@dataclass
class TrajectorySet:
    frames: list[PointCloud]
    group_label: str

    def __len__(self):
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)


def validate_cloud(cloud: PointCloud) -> PointCloud:
    """Return ``cloud`` unchanged, or raise if it breaks a PointCloud invariant."""
    pts = cloud.points
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise DegeneracyError(f"expected an (n, 3) coordinate array, got shape {pts.shape}")
    if len(pts) == 0:
        raise DegeneracyError("point cloud is empty")
    bad = np.flatnonzero(~np.isfinite(pts).all(axis=1))
    if len(bad):
        raise DegeneracyError(f"non-finite coordinate at point(s) {bad.tolist()}", indices=bad.tolist())
    if cloud.elements and len(cloud.elements) != len(pts):
        raise DegeneracyError(
            f"{len(cloud.elements)} element symbols for {len(pts)} points"
        )
    pairs = sorted(cKDTree(pts).query_pairs(DUPLICATE_TOL))
    if pairs:
        raise DegeneracyError(
            f"duplicate points (within {DUPLICATE_TOL} Å) at indices {pairs}", indices=pairs
        )
    return cloud


def jitter(cloud: PointCloud, sigma: float, seed: int) -> PointCloud:
    """Seeded isotropic Gaussian perturbation, for degenerate lattices."""
    rng = np.random.default_rng(seed)
    pts = cloud.points + rng.normal(0.0, sigma, cloud.points.shape)
    return PointCloud(pts, list(cloud.elements), cloud.frame_id, cloud.source_tag)


def parse_xyz(text: str, group_label: str = "", path=None) -> TrajectorySet:
    lines = text.splitlines()
    # trailing blank lines are not frames
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise ParseError("empty XYZ file", path=path)

    frames = []
    i = 0
    while i < len(lines):
        head = lines[i].strip()
        try:
            n = int(head)
        except ValueError:
            raise ParseError(f"expected atom count, got {head!r}", line=i + 1, path=path) from None
        if n < 0:
            raise ParseError(f"negative atom count {n}", line=i + 1, path=path)
        if i + 1 >= len(lines):
            raise ParseError("missing comment line after atom count", line=i + 2, path=path)
        start = i + 2
        stop = start + n
        if stop > len(lines):
            raise ParseError(
                f"declared {n} atoms but only {len(lines) - start} lines follow",
                line=i + 1,
                path=path,
            )
        elements = []
        pts = np.empty((n, 3))
        for k in range(n):
            lineno = start + k + 1
            tok = lines[start + k].split()
            if len(tok) < 4:
                raise ParseError(
                    f"atom line needs 'element x y z', got {lines[start + k]!r}"
                    f" (declared count {n} may not match)",
                    line=lineno,
                    path=path,
                )
            try:
                pts[k] = [float(t) for t in tok[1:4]]
            except ValueError:
                raise ParseError(f"non-numeric coordinate in {tok[1:4]}", line=lineno, path=path) from None
            elements.append(tok[0])
        frames.append(PointCloud(pts, elements, frame_id=len(frames), source_tag=group_label))
        i = stop
    return TrajectorySet(frames, group_label)


def load_xyz(path) -> TrajectorySet:
    path = Path(path)
    text = path.read_text()
    return parse_xyz(text, group_label=path.stem, path=str(path))


def format_xyz(traj: TrajectorySet) -> str:
    out = []
    for frame in traj.frames:
        out.append(str(len(frame)))
        out.append(f"frame={frame.frame_id} tag={frame.source_tag}")
        elements = frame.elements or ["X"] * len(frame)
        for el, (x, y, z) in zip(elements, frame.points):
            out.append(f"{el} {float(x)!r} {float(y)!r} {float(z)!r}")
    return "\n".join(out) + "\n"


def write_xyz(traj: TrajectorySet, path) -> None:
    Path(path).write_text(format_xyz(traj))


def load_inputs(path) -> list[TrajectorySet]:
    """A single .xyz file, or every *.xyz in a directory sorted by name."""
    path = Path(path)
    if path.is_dir():
        files = sorted(path.glob("*.xyz"))
        if not files:
            raise ParseError(f"no *.xyz files in directory {path}")
        return [load_xyz(f) for f in files]
    return [load_xyz(path)]
