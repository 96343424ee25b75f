"""Exact discrete optimal transport by the transportation (network) simplex.

The basis is a spanning tree of the bipartite supply/demand graph with
m + n - 1 cells; potentials are propagated along the tree, the entering
cell is the most negative reduced cost (Dantzig), and after a run of
degenerate pivots the rule switches to Bland's lowest-index choice to rule
out cycling.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError

DEGENERATE_RUN = 50


@dataclass
class OTResult:
    cost: float
    flow: np.ndarray  # (m, n)
    u: np.ndarray
    v: np.ndarray
    iterations: int
    slackness_residual: float
    marginal_residual: float


def _northwest(a, b):
    m, n = len(a), len(b)
    a = a.astype(float).copy()
    b = b.astype(float).copy()
    flow = np.zeros((m, n))
    basis = []
    i = j = 0
    while True:
        x = min(a[i], b[j])
        flow[i, j] = x
        basis.append((i, j))
        a[i] -= x
        b[j] -= x
        if i == m - 1 and j == n - 1:
            break
        if i == m - 1:
            j += 1
        elif j == n - 1:
            i += 1
        elif a[i] <= b[j]:
            i += 1
        else:
            j += 1
    return flow, basis


def _potentials(C, basis, m, n):
    rows_adj = [[] for _ in range(m)]
    cols_adj = [[] for _ in range(n)]
    for i, j in basis:
        rows_adj[i].append(j)
        cols_adj[j].append(i)
    u = np.full(m, np.nan)
    v = np.full(n, np.nan)
    u[0] = 0.0
    queue = deque([("r", 0)])
    while queue:
        side, k = queue.popleft()
        if side == "r":
            for j in rows_adj[k]:
                if np.isnan(v[j]):
                    v[j] = C[k, j] - u[k]
                    queue.append(("c", j))
        else:
            for i in cols_adj[k]:
                if np.isnan(u[i]):
                    u[i] = C[i, k] - v[k]
                    queue.append(("r", i))
    return u, v, rows_adj, cols_adj


def _tree_path(rows_adj, cols_adj, start_col, goal_row, m, n):
    """Alternating path col -> row -> col ... -> goal_row in the basis tree."""
    parent = {("c", start_col): None}
    queue = deque([("c", start_col)])
    while queue:
        node = queue.popleft()
        side, k = node
        if node == ("r", goal_row):
            break
        nbrs = [("r", i) for i in cols_adj[k]] if side == "c" else [("c", j) for j in rows_adj[k]]
        for nb in nbrs:
            if nb not in parent:
                parent[nb] = node
                queue.append(nb)
    path = []
    node = ("r", goal_row)
    while node is not None:
        path.append(node)
        node = parent[node]
    return path[::-1]  # starts at ("c", start_col)


def transport(a, b, C, tol: float = 1e-9, max_iter: int | None = None) -> OTResult:
    """Minimise <C, flow> subject to row sums a and column sums b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    C = np.asarray(C, dtype=float)
    m, n = C.shape
    if len(a) != m or len(b) != n:
        raise ValueError(f"marginals {len(a)}, {len(b)} do not match cost shape {C.shape}")
    if max_iter is None:
        max_iter = 50 * (m + n) ** 2 + 100

    flow, basis = _northwest(a, b)
    in_basis = np.zeros((m, n), dtype=bool)
    for cell in basis:
        in_basis[cell] = True
    scale = max(1.0, float(np.abs(C).max())) if C.size else 1.0
    rc_tol = 1e-12 * scale

    degenerate_run = 0
    it = 0
    while True:
        u, v, rows_adj, cols_adj = _potentials(C, basis, m, n)
        reduced = C - u[:, None] - v[None, :]
        reduced[in_basis] = 0.0
        if reduced.min() >= -rc_tol:
            break
        it += 1
        if it > max_iter:
            raise ConvergenceError(
                "transportation simplex did not converge",
                {"iterations": it, "min_reduced_cost": float(reduced.min()), "shape": (m, n)},
            )
        if degenerate_run >= DEGENERATE_RUN:
            cand = np.flatnonzero(reduced.ravel() < -rc_tol)
            ei, ej = divmod(int(cand[0]), n)
        else:
            ei, ej = np.unravel_index(int(np.argmin(reduced)), reduced.shape)
        ei, ej = int(ei), int(ej)

        # cycle: (ei,ej)+, then alternate along the tree path from column ej to row ei
        path = _tree_path(rows_adj, cols_adj, ej, ei, m, n)
        cells = []
        for x, y in zip(path, path[1:]):
            if x[0] == "c":
                cells.append((y[1], x[1]))
            else:
                cells.append((x[1], y[1]))
        minus = cells[0::2]
        plus = cells[1::2]
        theta = min(flow[c] for c in minus)
        leaving = min(c for c in minus if flow[c] == theta)
        degenerate_run = degenerate_run + 1 if theta == 0 else 0

        flow[ei, ej] += theta
        for c in plus:
            flow[c] += theta
        for c in minus:
            flow[c] -= theta
        flow[leaving] = 0.0
        basis.remove(leaving)
        in_basis[leaving] = False
        basis.append((ei, ej))
        in_basis[ei, ej] = True

    slack = max(0.0, -float(reduced.min())) if reduced.size else 0.0
    marg = max(
        float(np.abs(flow.sum(axis=1) - a).max(initial=0.0)),
        float(np.abs(flow.sum(axis=0) - b).max(initial=0.0)),
    )
    if slack > tol or marg > tol:
        raise ConvergenceError(
            "optimality certificate failed",
            {"slackness_residual": slack, "marginal_residual": marg, "iterations": it},
        )
    return OTResult(float((C * flow).sum()), flow, u, v, it, slack, marg)
