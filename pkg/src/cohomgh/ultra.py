"""Ultrametric spaces, dendrograms and the Gromov-Hausdorff ultrametric.

u_GH between finite ultrametric spaces X and Y equals the smallest t >= 0
for which the closed quotients X_t and Y_t (points at distance <= t glued)
are isometric. Isometry of finite ultrametric spaces is decided by
comparing canonical codes of their dendrograms, so the scan over the
finite candidate set {0} U spec(X) U spec(Y) is exact. ``ugh_bruteforce``
evaluates the correspondence-distortion definition directly and serves as
the reference for small spaces.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, UndefinedDistanceError

REL_TOL = 1e-9
STRONG_TOL = 1e-12


@dataclass
class Ultrametric:
    dmatrix: np.ndarray
    spectrum_values: np.ndarray = None
    provenance: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    def __post_init__(self):
        self.dmatrix = np.asarray(self.dmatrix, dtype=float)
        if self.spectrum_values is None:
            self.spectrum_values = _distinct(self.dmatrix)

    def __len__(self):
        return len(self.dmatrix)

    @property
    def diameter(self) -> float:
        return float(self.dmatrix.max()) if self.dmatrix.size else 0.0


@dataclass
class Node:
    height: float
    children: list = field(default_factory=list)
    leaf: int | None = None  # point index for leaves
    size: int = 1


@dataclass
class Dendrogram:
    root: Node
    n: int

    def leaves(self):
        out = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.leaf is not None:
                out.append(node.leaf)
            stack.extend(node.children)
        return sorted(out)


def _distinct(M) -> np.ndarray:
    iu = np.triu_indices(len(M), 1)
    vals = np.unique(M[iu])
    return vals[vals > 0]


def snap_values(values, rel_tol: float = REL_TOL) -> dict:
    """Map each value to a representative, merging runs of sorted values
    whose consecutive gaps are within ``rel_tol`` relative tolerance."""
    vals = np.unique(np.asarray(values, dtype=float))
    table = {}
    rep = None
    prev = None
    for x in vals:
        if rep is None or abs(x - prev) > rel_tol * max(abs(x), abs(prev), 1e-300):
            rep = x
        table[float(x)] = float(rep)
        prev = x
    return table


def _apply_snap(M, table) -> np.ndarray:
    out = np.array(M, dtype=float, copy=True)
    flat = out.ravel()
    for k, x in enumerate(flat):
        flat[k] = table.get(float(x), x)
    return out


def snap_matrix(M, rel_tol: float = REL_TOL) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    return _apply_snap(M, snap_values(M.ravel(), rel_tol))


def _check_dissimilarity(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ConfigError(f"expected a square matrix, got shape {M.shape}")
    if M.size == 0:
        return M
    scale = max(1.0, float(np.abs(M).max()))
    if np.abs(M - M.T).max() > 1e-12 * scale:
        raise ConfigError("dissimilarity matrix is not symmetric")
    if (M < 0).any() or not np.isfinite(M).all():
        raise ConfigError("dissimilarity matrix must be finite and non-negative")
    M = (M + M.T) / 2
    np.fill_diagonal(M, 0.0)
    return M


def minimum_spanning_tree(M) -> list[tuple[int, int, float]]:
    """Prim's algorithm on a dense matrix; zero-weight edges are real edges.

    Ties resolve to the lowest index, so the tree is deterministic."""
    n = len(M)
    if n <= 1:
        return []
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = M[0].copy()
    parent = np.zeros(n, dtype=int)
    edges = []
    for _ in range(n - 1):
        cand = np.where(in_tree, np.inf, best)
        j = int(np.argmin(cand))
        edges.append((int(parent[j]), j, float(best[j])))
        in_tree[j] = True
        closer = (~in_tree) & (M[j] < best)
        best[closer] = M[j][closer]
        parent[closer] = j
    return edges


def subdominant_ultrametric(M, provenance=None) -> Ultrametric:
    """Largest ultrametric below ``M``: the minimax path distance.

    Computed from a minimum spanning tree with per-source path maxima."""
    M = _check_dissimilarity(getattr(M, "dmatrix", M))
    prov = dict(provenance or getattr(M, "provenance", {}) or {})
    n = len(M)
    if n == 0:
        return Ultrametric(np.zeros((0, 0)), np.zeros(0), prov, ["empty"])
    adj = [[] for _ in range(n)]
    for i, j, w in minimum_spanning_tree(M):
        adj[i].append((j, w))
        adj[j].append((i, w))
    U = np.zeros((n, n))
    for s in range(n):
        seen = np.zeros(n, dtype=bool)
        seen[s] = True
        stack = [(s, 0.0)]
        while stack:
            x, mx = stack.pop()
            U[s, x] = mx
            for y, w in adj[x]:
                if not seen[y]:
                    seen[y] = True
                    stack.append((y, max(mx, w)))
    U = np.maximum(U, U.T)
    return Ultrametric(U, None, prov)


def is_ultrametric(M, tol: float = STRONG_TOL) -> bool:
    M = np.asarray(M, dtype=float)
    # d(x,z) <= max(d(x,y), d(y,z)) for all triples
    for y in range(len(M)):
        bound = np.maximum(M[:, y][:, None], M[y, :][None, :])
        if (M > bound + tol).any():
            return False
    return True


def dendrogram(U) -> Dendrogram:
    """Merge tree whose lowest-common-ancestor heights reproduce ``U``.

    Clusters that join at the same height are merged into a single node, so
    heights strictly increase toward the root."""
    D = getattr(U, "dmatrix", U)
    D = np.asarray(D, dtype=float)
    n = len(D)
    if n == 0:
        raise ConfigError("cannot build a dendrogram of an empty space")
    nodes = [Node(0.0, [], i, 1) for i in range(n)]
    comp = list(range(n))  # union-find parent
    top = {i: nodes[i] for i in range(n)}

    def find(x):
        while comp[x] != x:
            comp[x] = comp[comp[x]]
            x = comp[x]
        return x

    edges = sorted(minimum_spanning_tree(D), key=lambda e: e[2])
    k = 0
    while k < len(edges):
        h = edges[k][2]
        group = []
        while k < len(edges) and edges[k][2] == h:
            group.append(edges[k])
            k += 1
        # merge components joined at height h into one node each
        roots_before = {}
        for i, j, _ in group:
            for x in (i, j):
                r = find(x)
                roots_before.setdefault(r, top[r])
        for i, j, _ in group:
            ri, rj = find(i), find(j)
            if ri != rj:
                comp[max(ri, rj)] = min(ri, rj)
        clusters: dict[int, list] = {}
        for r, node in roots_before.items():
            clusters.setdefault(find(r), []).append(node)
        for r, members in clusters.items():
            children = []
            for m in members:
                if m.leaf is None and m.height == h:
                    children.extend(m.children)
                else:
                    children.append(m)
            top[r] = Node(h, children, None, sum(c.size for c in children))
    root = top[find(0)]
    return Dendrogram(root, n)


def _code(node: Node, below: float | None) -> str:
    if node.leaf is not None or (below is not None and node.height <= below):
        return "*"
    kids = sorted(_code(c, below) for c in node.children)
    return f"({float(node.height).hex()}:{','.join(kids)})"


def canonical_code(D, below: float | None = None) -> str:
    """Relabelling- and reordering-invariant string for a dendrogram.

    With ``below=t`` the tree is cut at t first, giving the code of the
    closed quotient at scale t."""
    if isinstance(D, Ultrametric) or isinstance(D, np.ndarray):
        D = dendrogram(D)
    return _code(D.root, below)


def quotient(U: Ultrametric, t: float) -> Ultrametric:
    """Glue points at distance <= t; distances between classes are inherited."""
    if t < 0:
        raise ConfigError(f"quotient scale must be non-negative, got {t}")
    D = U.dmatrix
    n = len(D)
    label = -np.ones(n, dtype=int)
    reps = []
    for i in range(n):
        if label[i] < 0:
            members = np.flatnonzero((D[i] <= t) & (label < 0))
            label[members] = len(reps)
            label[i] = len(reps)
            reps.append(i)
    Q = D[np.ix_(reps, reps)].copy()
    np.fill_diagonal(Q, 0.0)
    return Ultrametric(Q, None, dict(U.provenance))


class _CodeCache:
    """Quotient codes of one space at each of its own distinct levels."""

    def __init__(self, U: Ultrametric):
        self.levels = np.concatenate([[0.0], _distinct(U.dmatrix)])
        self.tree = dendrogram(U.dmatrix) if len(U) else None
        self._codes = {}

    def at(self, t: float) -> str:
        # quotient only changes at the space's own levels
        k = int(np.searchsorted(self.levels, t, side="right")) - 1
        if k not in self._codes:
            self._codes[k] = _code(self.tree.root, float(self.levels[k]))
        return self._codes[k]


def _ugh_cached(cx: _CodeCache, cy: _CodeCache) -> float:
    cands = np.unique(np.concatenate([cx.levels, cy.levels]))
    for t in cands:
        if cx.at(t) == cy.at(t):
            return float(t)
    raise AssertionError("quotients at the largest scale must both be single points")


def _as_ultrametric(X) -> Ultrametric:
    return X if isinstance(X, Ultrametric) else Ultrametric(np.asarray(X, dtype=float))


def ugh(X, Y) -> float:
    """Gromov-Hausdorff ultrametric distance between two finite ultrametric spaces."""
    X, Y = _as_ultrametric(X), _as_ultrametric(Y)
    if len(X) == 0 or len(Y) == 0:
        raise UndefinedDistanceError("u_GH is undefined against an empty space")
    table = snap_values(np.concatenate([X.dmatrix.ravel(), Y.dmatrix.ravel()]))
    Xs = Ultrametric(_apply_snap(X.dmatrix, table))
    Ys = Ultrametric(_apply_snap(Y.dmatrix, table))
    return _ugh_cached(_CodeCache(Xs), _CodeCache(Ys))


def ugh_many(spaces) -> np.ndarray:
    """Pairwise u_GH over non-empty spaces, sharing one snapping table."""
    spaces = [_as_ultrametric(S) for S in spaces]
    if any(len(S) == 0 for S in spaces):
        raise UndefinedDistanceError("u_GH is undefined against an empty space")
    allvals = np.concatenate([S.dmatrix.ravel() for S in spaces]) if spaces else np.zeros(0)
    table = snap_values(allvals)
    caches = [_CodeCache(Ultrametric(_apply_snap(S.dmatrix, table))) for S in spaces]
    n = len(spaces)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = _ugh_cached(caches[i], caches[j])
    return out


def _lam(a: float, b: float) -> float:
    return 0.0 if a == b else max(a, b)


def ugh_bruteforce(X, Y) -> float:
    """min over correspondences R of max over (x,y),(x',y') in R of
    Lambda(d_X(x,x'), d_Y(y,y')), with Lambda(a,b) = 0 if a == b else max(a,b).

    Exhaustive: for each candidate value t in increasing order, backtracking
    decides whether a correspondence of distortion <= t exists."""
    X, Y = _as_ultrametric(X), _as_ultrametric(Y)
    nx, ny = len(X), len(Y)
    if nx > 5 or ny > 5:
        raise ConfigError("brute-force u_GH is limited to spaces of at most 5 points")
    if nx == 0 or ny == 0:
        raise UndefinedDistanceError("u_GH is undefined against an empty space")
    dx, dy = X.dmatrix, Y.dmatrix
    pairs = [(x, y) for x in range(nx) for y in range(ny)]
    lam = {}
    for p in pairs:
        for q in pairs:
            lam[p, q] = _lam(dx[p[0], q[0]], dy[p[1], q[1]])
    cands = sorted({0.0} | set(dx.ravel().tolist()) | set(dy.ravel().tolist()))

    def feasible(t):
        def rec(chosen, cov_x, cov_y):
            if len(cov_x) == nx and len(cov_y) == ny:
                return True
            if len(cov_x) < nx:
                x = min(set(range(nx)) - cov_x)
                options = [(x, y) for y in range(ny)]
            else:
                y = min(set(range(ny)) - cov_y)
                options = [(x, y) for x in range(nx)]
            for p in options:
                if all(lam[p, q] <= t for q in chosen):
                    if rec(chosen + [p], cov_x | {p[0]}, cov_y | {p[1]}):
                        return True
            return False

        return rec([], set(), set())

    for t in cands:
        if feasible(t):
            return float(t)
    raise AssertionError("the full relation is always feasible at the largest value")


def isometry(U, V) -> list[int] | None:
    """A bijection phi with V[phi[i], phi[j]] == U[i, j], or None."""
    U, V = _as_ultrametric(U), _as_ultrametric(V)
    if len(U) != len(V):
        return None
    if len(U) == 0:
        return []
    tu, tv = dendrogram(U), dendrogram(V)
    if _code(tu.root, None) != _code(tv.root, None):
        return None
    phi = [-1] * len(U)

    def match(a: Node, b: Node):
        if a.leaf is not None:
            phi[a.leaf] = b.leaf
            return
        pool = list(b.children)
        for c in a.children:
            code = _code(c, None)
            k = next(i for i, d in enumerate(pool) if _code(d, None) == code)
            match(c, pool.pop(k))

    match(tu.root, tv.root)
    return phi


def to_newick(D, labels=None) -> str:
    """Newick string; branch lengths are height differences to the parent."""
    if not isinstance(D, Dendrogram):
        D = dendrogram(D)
    labels = labels or [str(i) for i in range(D.n)]

    def rec(node, parent_h):
        length = parent_h - node.height
        if node.leaf is not None:
            return f"{labels[node.leaf]}:{length:.12g}"
        inner = ",".join(rec(c, node.height) for c in node.children)
        return f"({inner}):{length:.12g}"

    root = D.root
    if root.leaf is not None:
        return f"{labels[root.leaf]};"
    inner = ",".join(rec(c, root.height) for c in root.children)
    return f"({inner}){root.height:.12g};"
