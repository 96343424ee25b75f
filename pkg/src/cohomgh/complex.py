"""Vietoris-Rips and Alpha complexes over a point cloud.

Simplices are vertex tuples in ascending order; that order is the
orientation. Within each dimension simplices are kept in lexicographic
order, and that index is what every boundary matrix and generator vector
downstream is aligned to.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay, QhullError
from scipy.spatial.distance import pdist, squareform

from . import predicates
from .errors import ConfigError, DegeneracyError, DataError
from .ingest import PointCloud, validate_cloud

VR = "vr"
ALPHA = "alpha"
DELAUNAY = "delaunay"


@dataclass(frozen=True)
class Simplex:
    vertices: tuple
    filtration: float = 0.0

    def __post_init__(self):
        v = tuple(int(x) for x in self.vertices)
        if any(a >= b for a, b in zip(v, v[1:])):
            raise ValueError(f"simplex vertices must be strictly increasing, got {v}")
        object.__setattr__(self, "vertices", v)

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


def faces(vertices: tuple) -> list[tuple]:
    """Codimension-1 faces; the k-th entry drops vertex k (sign (-1)**k)."""
    return [vertices[:k] + vertices[k + 1:] for k in range(len(vertices))]


class SimplicialComplex:
    """Filtered simplicial complex with per-dimension lexicographic order."""

    def __init__(self, simplices, filtration=None, coords=None, kind="custom",
                 threshold=None, filtration_scale="length"):
        self.simplices: dict[int, list[tuple]] = {}
        self.filtration: dict[int, np.ndarray] = {}
        for d in sorted(simplices):
            items = [tuple(int(v) for v in s) for s in simplices[d]]
            vals = (np.zeros(len(items)) if filtration is None
                    else np.asarray(filtration[d], dtype=float))
            if len(items) == 0:
                continue
            order = sorted(range(len(items)), key=lambda i: items[i])
            self.simplices[d] = [items[i] for i in order]
            self.filtration[d] = vals[order] if len(vals) else vals
        self.coords = None if coords is None else np.asarray(coords, dtype=float)
        self.kind = kind
        self.threshold = threshold
        self.filtration_scale = filtration_scale
        self._index = {}
        self._cofaces = {}

    @classmethod
    def from_simplices(cls, maximal, coords=None, kind="custom") -> "SimplicialComplex":
        """Downward closure of the given simplices, zero filtration."""
        found: dict[int, set] = {}
        for s in maximal:
            s = tuple(sorted(int(v) for v in s))
            for k in range(1, len(s) + 1):
                for f in itertools.combinations(s, k):
                    found.setdefault(k - 1, set()).add(f)
        return cls({d: sorted(v) for d, v in found.items()}, coords=coords, kind=kind)

    @property
    def p_max(self) -> int:
        return max(self.simplices) if self.simplices else -1

    def n(self, p: int) -> int:
        return len(self.simplices.get(p, ()))

    def simplex_list(self, p: int) -> list[tuple]:
        return self.simplices.get(p, [])

    def index(self, p: int) -> dict:
        if p not in self._index:
            self._index[p] = {s: i for i, s in enumerate(self.simplex_list(p))}
        return self._index[p]

    def __contains__(self, vertices) -> bool:
        vertices = tuple(vertices)
        return vertices in self.index(len(vertices) - 1)

    def simplex(self, p: int, i: int) -> Simplex:
        return Simplex(self.simplices[p][i], float(self.filtration[p][i]))

    def cofaces(self, vertices) -> list[tuple]:
        """The (p+1)-simplices having ``vertices`` as a face."""
        p = len(vertices) - 1
        if p not in self._cofaces:
            table: dict[tuple, list] = {s: [] for s in self.simplex_list(p)}
            for t in self.simplex_list(p + 1):
                for f in faces(t):
                    table[f].append(t)
            self._cofaces[p] = table
        return self._cofaces[p][tuple(vertices)]

    def filtration_of(self, vertices) -> float:
        vertices = tuple(vertices)
        p = len(vertices) - 1
        return float(self.filtration[p][self.index(p)[vertices]])

    def subcomplex(self, threshold: float) -> "SimplicialComplex":
        """All simplices with filtration <= threshold (closed sublevel set)."""
        simp, filt = {}, {}
        for d, items in self.simplices.items():
            keep = np.flatnonzero(self.filtration[d] <= threshold)
            if len(keep):
                simp[d] = [items[i] for i in keep]
                filt[d] = self.filtration[d][keep]
        return SimplicialComplex(simp, filt, self.coords, self.kind, threshold,
                                 self.filtration_scale)

    def skeleton(self, p_max: int) -> "SimplicialComplex":
        simp = {d: v for d, v in self.simplices.items() if d <= p_max}
        filt = {d: self.filtration[d] for d in simp}
        return SimplicialComplex(simp, filt, self.coords, self.kind, self.threshold,
                                 self.filtration_scale)

    def num_simplices(self) -> int:
        return sum(len(v) for v in self.simplices.values())

    def check(self) -> None:
        """Assert downward closure and filtration monotonicity."""
        for d in range(1, self.p_max + 1):
            idx = self.index(d - 1)
            for j, s in enumerate(self.simplex_list(d)):
                for f in faces(s):
                    if f not in idx:
                        raise DataError(f"face {f} of {s} missing from complex")
                    if self.filtration[d - 1][idx[f]] > self.filtration[d][j]:
                        raise DataError(f"filtration of face {f} exceeds that of {s}")

    def to_json(self) -> dict:
        dims = {str(d): [list(s) for s in v] for d, v in self.simplices.items()}
        filt = [float(x) for d in sorted(self.simplices) for x in self.filtration[d]]
        thr = self.threshold
        return {
            "dims": dims,
            "filtration": filt,
            "kind": self.kind,
            "threshold": None if thr is None or not math.isfinite(thr) else float(thr),
            "filtration_scale": self.filtration_scale,
        }

    @classmethod
    def from_json(cls, data, coords=None) -> "SimplicialComplex":
        if isinstance(data, str):
            data = json.loads(data)
        simp, filt = {}, {}
        flat = list(data.get("filtration", []))
        pos = 0
        for d in sorted(data["dims"], key=int):
            items = [tuple(s) for s in data["dims"][d]]
            simp[int(d)] = items
            filt[int(d)] = flat[pos:pos + len(items)] if flat else np.zeros(len(items))
            pos += len(items)
        return cls(simp, filt, coords, data.get("kind", "custom"), data.get("threshold"),
                   data.get("filtration_scale", "length"))

    def __repr__(self):
        counts = ", ".join(f"{d}:{len(v)}" for d, v in self.simplices.items())
        return f"SimplicialComplex(kind={self.kind}, threshold={self.threshold}, counts={{{counts}}})"


def upper_degree(K: SimplicialComplex, simplex) -> int:
    vertices = simplex.vertices if isinstance(simplex, Simplex) else tuple(simplex)
    if vertices not in K:
        raise KeyError(f"simplex {vertices} is not in the complex")
    return len(K.cofaces(vertices))


def _check_pmax(p_max):
    if not isinstance(p_max, (int, np.integer)) or not 1 <= p_max <= 3:
        raise ConfigError(f"p_max must be an integer in [1, 3], got {p_max!r}")


def build_vr(cloud: PointCloud, threshold: float, p_max: int = 2) -> SimplicialComplex:
    """Vietoris-Rips complex: a vertex set is a simplex iff every pairwise
    distance is <= threshold. Filtration is the longest edge."""
    _check_pmax(p_max)
    if not threshold > 0:
        raise ConfigError(f"threshold must be positive, got {threshold}")
    validate_cloud(cloud)
    pts = cloud.points
    n = len(pts)
    D = squareform(pdist(pts)) if n > 1 else np.zeros((1, 1))
    adj = D <= threshold
    higher = [set(np.flatnonzero(adj[i, i + 1:]) + i + 1) for i in range(n)]

    simp = {0: [(i,) for i in range(n)]}
    filt = {0: [0.0] * n}
    level = [((i,), higher[i], 0.0) for i in range(n)]
    for d in range(1, p_max + 1):
        nxt = []
        for verts, cand, val in level:
            for v in sorted(cand):
                f = max(val, max(D[u, v] for u in verts))
                nxt.append((verts + (v,), cand & higher[v], f))
        if not nxt:
            break
        simp[d] = [s for s, _, _ in nxt]
        filt[d] = [f for _, _, f in nxt]
        level = nxt
    return SimplicialComplex(simp, filt, pts, VR, threshold, "length")


def delaunay3d(cloud: PointCloud) -> SimplicialComplex:
    """Delaunay tetrahedralisation with all faces (zero filtration).

    The combinatorics come from Qhull; every tetrahedron is then checked
    with exact predicates (non-zero volume, local empty-circumsphere across
    each interior triangle). Any failure is reported as degenerate input.
    """
    validate_cloud(cloud)
    pts = cloud.points
    if len(pts) < 5:
        raise DegeneracyError(
            f"Delaunay tetrahedralisation needs at least 5 points, got {len(pts)}; use VR mode"
        )
    if predicates.all_coplanar(pts):
        raise DegeneracyError("all points are coplanar or collinear; use VR mode")
    try:
        tri = Delaunay(pts)
    except QhullError as exc:
        raise DegeneracyError(f"Qhull failed: {exc}; try --jitter or VR mode") from None
    if len(tri.coplanar):
        missing = sorted(int(i) for i in tri.coplanar[:, 0])
        raise DegeneracyError(
            f"points {missing} were dropped by the triangulation; try --jitter", indices=missing
        )
    tets = sorted(tuple(sorted(int(v) for v in t)) for t in tri.simplices)
    _verify_delaunay(pts, tets)

    simp = {3: tets}
    for d in (2, 1, 0):
        simp[d] = sorted({f for t in simp[d + 1] for f in faces(t)})
    return SimplicialComplex(simp, None, pts, DELAUNAY, None, "length")


def _verify_delaunay(pts, tets):
    owners: dict[tuple, list] = {}
    for t in tets:
        if predicates.orient3d(*pts[list(t)]) == 0:
            raise DegeneracyError(
                f"flat tetrahedron {t} (cospherical/coplanar configuration); rerun with --jitter",
                indices=list(t),
            )
        for f in faces(t):
            owners.setdefault(f, []).append(t)
    for f, ts in owners.items():
        if len(ts) > 2:
            raise DegeneracyError(f"triangle {f} shared by {len(ts)} tetrahedra; rerun with --jitter")
        if len(ts) == 2:
            t1, t2 = ts
            opp = (set(t2) - set(f)).pop()
            if predicates.insphere(*pts[list(t1)], pts[opp]) > 0:
                raise DegeneracyError(
                    f"tetrahedra {t1} and {t2} are not locally Delaunay; rerun with --jitter"
                )


def alpha_filtration(cloud: PointCloud, scale: str = "radius") -> SimplicialComplex:
    """Full Delaunay complex carrying alpha filtration values.

    A simplex is valued by its smallest circumsphere radius when that
    sphere is empty of the other vertices of every coface (Gabriel), and
    otherwise by the minimum value among its cofaces. Edges of Gabriel type
    get half their length. ``scale="squared"`` reports radius**2 instead.
    """
    if scale not in ("radius", "squared"):
        raise ConfigError(f"alpha scale must be 'radius' or 'squared', got {scale!r}")
    K = delaunay3d(cloud)
    pts = K.coords
    values: dict[int, np.ndarray] = {}
    values[3] = np.array([predicates.circumsphere(pts[list(t)])[0] for t in K.simplex_list(3)])
    for d in (2, 1):
        upper_idx = K.index(d + 1)
        out = np.empty(K.n(d))
        for i, s in enumerate(K.simplex_list(d)):
            cof = K.cofaces(s)
            sp = pts[list(s)]
            gabriel = True
            for t in cof:
                (extra,) = set(t) - set(s)
                if predicates.in_diametral_ball(sp, pts[extra]) > 0:
                    gabriel = False
                    break
            if gabriel:
                out[i] = predicates.circumsphere(sp)[0]
            else:
                out[i] = min(values[d + 1][upper_idx[t]] for t in cof)
        values[d] = out
    values[0] = np.zeros(K.n(0))
    # enforce monotonicity against round-off (mathematically a no-op)
    for d in (2, 1):
        upper_idx = K.index(d + 1)
        for i, s in enumerate(K.simplex_list(d)):
            cof = K.cofaces(s)
            if cof:
                values[d][i] = min(values[d][i], min(values[d + 1][upper_idx[t]] for t in cof))
    if scale == "squared":
        values = {d: v * v for d, v in values.items()}
    return SimplicialComplex(K.simplices, values, pts, ALPHA, math.inf, scale)


def build_alpha(cloud: PointCloud, threshold: float, scale: str = "radius") -> SimplicialComplex:
    """Alpha complex: the Delaunay simplices with alpha value <= threshold."""
    if not threshold >= 0:
        raise ConfigError(f"threshold must be non-negative, got {threshold}")
    return alpha_filtration(cloud, scale).subcomplex(threshold)
