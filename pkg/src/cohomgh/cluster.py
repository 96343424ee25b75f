"""k-means (k-means++ seeding, best of several restarts) and the adjusted Rand index."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

MAX_ITER = 300


@dataclass
class Clustering:
    labels: np.ndarray
    k: int
    inertia: float
    seed: int
    restarts: int
    iterations: int = 0


def _sqdist(X, C):
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)


def _plusplus(X, k, rng):
    n = len(X)
    centers = [int(rng.integers(n))]
    d2 = ((X - X[centers[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            # every point coincides with a centre already
            unused = [i for i in range(n) if i not in centers]
            idx = unused[0]
        centers.append(idx)
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    return X[centers].copy()


def _lloyd(X, C):
    labels = None
    k = len(C)
    it = 0
    for it in range(1, MAX_ITER + 1):
        d2 = _sqdist(X, C)
        new = np.argmin(d2, axis=1)
        # empty cluster: move its centroid to the point farthest from its own centroid
        for c in range(k):
            if not np.any(new == c):
                far = int(np.argmax(d2[np.arange(len(X)), new]))
                C[c] = X[far]
                d2 = _sqdist(X, C)
                new = np.argmin(d2, axis=1)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for c in range(k):
            members = X[labels == c]
            if len(members):
                C[c] = members.mean(axis=0)
    inertia = float(((X - C[labels]) ** 2).sum())
    return labels, inertia, it


def _relabel(labels):
    seen = {}
    return np.array([seen.setdefault(int(x), len(seen)) for x in labels])


def kmeans(F, k: int, seed: int = 0, restarts: int = 10) -> Clustering:
    X = np.asarray(getattr(F, "values", F), dtype=float)
    n = len(X)
    if not 1 <= k <= n:
        raise ConfigError(f"k must be in [1, n={n}], got {k}")
    if restarts < 1:
        raise ConfigError(f"restarts must be >= 1, got {restarts}")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        C = _plusplus(X, k, rng)
        labels, inertia, it = _lloyd(X, C)
        if best is None or inertia < best[1]:
            best = (labels, inertia, it)
    labels, inertia, it = best
    return Clustering(_relabel(labels), k, inertia, seed, restarts, it)


def _comb2(x):
    x = np.asarray(x, dtype=float)
    return x * (x - 1) / 2


def ari(a, b) -> float:
    """Adjusted Rand index (permutation model) from the contingency table."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise ConfigError(f"label arrays must have equal length, got {a.shape} and {b.shape}")
    if len(a) < 2:
        raise ConfigError("ARI needs at least two items")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1))
    np.add.at(table, (ia, ib), 1)
    index = _comb2(table).sum()
    sa = _comb2(table.sum(axis=1)).sum()
    sb = _comb2(table.sum(axis=0)).sum()
    expected = sa * sb / _comb2(len(a))
    top = (sa + sb) / 2
    if top == expected:
        return 1.0
    return float((index - expected) / (top - expected))
