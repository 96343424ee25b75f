"""Pairwise distances between harmonic generators of a single complex."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .complex import Simplex, SimplicialComplex
from .errors import ConfigError, DataError
from .hodge import GeneratorSet, sign_fix
from .transport import transport

L1 = "l1"
COCYCLE = "cocycle"
WASSERSTEIN = "wasserstein"
METRIC_KINDS = (L1, COCYCLE, WASSERSTEIN)
MASS_EPS = 1e-12


@dataclass
class MetricSpace:
    dmatrix: np.ndarray
    metric_kind: str
    provenance: dict = field(default_factory=dict)
    report: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.dmatrix)


@dataclass
class TransportPlan:
    flows: np.ndarray  # (len(source_support), len(target_support))
    source_support: np.ndarray  # simplex indices
    target_support: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    cost: float


def _pair(v, w):
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if v.shape != w.shape or v.ndim != 1:
        raise DataError(f"generators must be vectors of equal length, got {v.shape} and {w.shape}")
    return sign_fix(v), sign_fix(w)


def dist_l1(v, w) -> float:
    v, w = _pair(v, w)
    return float(np.abs(v - w).sum())


def dist_cocycle(v, w) -> float:
    v, w = _pair(v, w)
    return float(abs(np.abs(v).sum() - np.abs(w).sum()))


def _vertices(s):
    return s.vertices if isinstance(s, Simplex) else tuple(s)


def ground_distance(s1, s2, cloud) -> float:
    """Smallest Euclidean distance between a vertex of ``s1`` and one of ``s2``."""
    pts = cloud.points if hasattr(cloud, "points") else np.asarray(cloud, dtype=float)
    a, b = list(_vertices(s1)), list(_vertices(s2))
    n = len(pts)
    if any(not 0 <= i < n for i in a + b):
        raise IndexError(f"simplex vertex out of range for a cloud of {n} points")
    if set(a) & set(b):
        return 0.0
    return float(cdist(pts[a], pts[b]).min())


def _ground_matrix(simplices_a, simplices_b, D):
    out = np.empty((len(simplices_a), len(simplices_b)))
    for i, s in enumerate(simplices_a):
        rows = D[list(s)]
        for j, t in enumerate(simplices_b):
            out[i, j] = rows[:, list(t)].min()
    return out


def dist_wasserstein(v, w, K: SimplicialComplex, p: int | None = None, return_plan: bool = False):
    """1-Wasserstein distance between the squared-entry measures of ``v`` and ``w``.

    Ground cost between p-simplices is :func:`ground_distance`; entries with
    squared mass <= 1e-12 are dropped and the rest renormalised. ``p`` is
    inferred from the vector length when omitted.
    """
    v, w = _pair(v, w)
    if p is None:
        p = _dim_of(K, len(v))
    order = K.simplex_list(p)
    if len(order) != len(v):
        raise DataError(f"generator length {len(v)} != number of {p}-simplices {len(order)}")
    pts = K.coords
    cost, plan = _wasserstein_ordered(v, w, order, cdist(pts, pts))
    return (cost, plan) if return_plan else cost


def _dim_of(K: SimplicialComplex, n: int) -> int:
    dims = [d for d in K.simplices if K.n(d) == n]
    if len(dims) != 1:
        raise DataError(f"cannot infer generator dimension from length {n}; pass p")
    return dims[0]


def generator_metric_space(G: GeneratorSet, kind: str = L1, K: SimplicialComplex | None = None,
                           provenance: dict | None = None) -> MetricSpace:
    """k x k distance matrix over the generators of ``G``."""
    if kind not in METRIC_KINDS:
        raise ConfigError(f"metric must be one of {METRIC_KINDS}, got {kind!r}")
    if kind == WASSERSTEIN and K is None:
        raise ConfigError("Wasserstein distance needs the simplicial complex")
    if K is not None and list(K.simplex_list(G.p)) != list(G.simplex_order):
        raise DataError("generator simplex order does not match the complex")
    k = len(G)
    vecs = np.array([sign_fix(v) for v in G.vectors]) if k else G.vectors
    D = np.zeros((k, k))
    report = {"count": k}
    if kind == L1 and k:
        for i in range(k):
            D[i, i + 1:] = np.abs(vecs[i + 1:] - vecs[i]).sum(axis=1)
    elif kind == COCYCLE and k:
        norms = np.abs(vecs).sum(axis=1)
        D = np.abs(norms[:, None] - norms[None, :])
    elif kind == WASSERSTEIN and k:
        pts = K.coords
        Dv = cdist(pts, pts)
        order = G.simplex_order
        supports = []
        for i in range(k):
            for j in range(i + 1, k):
                try:
                    D[i, j] = _wasserstein_ordered(vecs[i], vecs[j], order, Dv)[0]
                except Exception as exc:
                    raise type(exc)(f"generators ({i}, {j}): {exc}") from exc
        for x in vecs:
            supports.append(int(np.sum(x * x > MASS_EPS)))
        report["support_sizes"] = supports
        report["mass_eps"] = MASS_EPS
    D = np.triu(D, 1)
    D = D + D.T
    return MetricSpace(D, kind, dict(provenance or {}), report)


def _wasserstein_ordered(v, w, order, Dv):
    for x in (v, w):
        if abs(np.linalg.norm(x) - 1.0) > 1e-8:
            raise DataError(f"generator is not unit norm (|v| = {np.linalg.norm(x):.12g})")
    m1, m2 = v * v, w * w
    src = np.flatnonzero(m1 > MASS_EPS)
    dst = np.flatnonzero(m2 > MASS_EPS)
    a = m1[src] / m1[src].sum()
    b = m2[dst] / m2[dst].sum()
    C = _ground_matrix([order[i] for i in src], [order[j] for j in dst], Dv)
    res = transport(a, b, C)
    return res.cost, TransportPlan(res.flow, src, dst, a, b, res.cost)
