"""Boundary matrices, combinatorial Hodge Laplacians and harmonic generators."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .complex import SimplicialComplex, faces
from .errors import ConfigError, ConsistencyError, DataError, SizeError

MAX_DENSE = 4000
PRIME = 2**31 - 1
SIGN_EPS = 1e-12
# Gram-Schmidt acceptance threshold for projected basis vectors
PIVOT_TOL = 1e-6


class DegenerateFiedlerWarning(UserWarning):
    pass


@dataclass
class BoundaryMatrix:
    p: int
    entries: sp.csr_matrix  # n_{p-1} x n_p, values in {-1, 0, 1}

    @property
    def shape(self):
        return self.entries.shape

    def toarray(self) -> np.ndarray:
        return self.entries.toarray()


@dataclass
class Laplacian:
    p: int
    matrix: np.ndarray
    complex: SimplicialComplex | None = None


@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns


@dataclass
class GeneratorSet:
    p: int
    vectors: np.ndarray  # (k, n_p), one generator per row
    simplex_order: list
    tolerance: float
    eigenvalues: np.ndarray = field(default_factory=lambda: np.zeros(0))
    warnings: list = field(default_factory=list)

    def __len__(self):
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "count": len(self),
            "tolerance": self.tolerance,
            "simplex_order": [list(s) for s in self.simplex_order],
            "vectors": self.vectors.tolist(),
            "smallest_eigenvalues": self.eigenvalues[: len(self) + 5].tolist(),
            "warnings": list(self.warnings),
        }


def _check_p(K: SimplicialComplex, p: int, lo: int):
    top = max(K.p_max, 0)
    if not lo <= p <= top:
        raise ConfigError(f"p={p} outside [{lo}, {top}] for this complex")


def boundary_matrix(K: SimplicialComplex, p: int) -> BoundaryMatrix:
    """Signed incidence matrix of p-simplices onto their (p-1)-faces."""
    _check_p(K, p, 1)
    return _boundary(K, p)


def _boundary(K, p):
    rows_n, cols_n = K.n(p - 1), K.n(p)
    rows, cols, vals = [], [], []
    if p >= 1:
        idx = K.index(p - 1)
        for j, s in enumerate(K.simplex_list(p)):
            for k, f in enumerate(faces(s)):
                rows.append(idx[f])
                cols.append(j)
                vals.append(-1 if k % 2 else 1)
    M = sp.csr_matrix((np.array(vals, dtype=np.int64), (rows, cols)), shape=(rows_n, cols_n))
    return BoundaryMatrix(p, M)


def hodge_laplacian(K: SimplicialComplex, p: int) -> Laplacian:
    """L_p = B_p^T B_p + B_{p+1} B_{p+1}^T, with the missing term dropped at
    p = 0 and at the top dimension."""
    _check_p(K, p, 0)
    n = K.n(p)
    L = sp.csr_matrix((n, n), dtype=np.int64)
    if p >= 1:
        B = _boundary(K, p).entries
        L = L + B.T @ B
    if K.n(p + 1):
        B = _boundary(K, p + 1).entries
        L = L + B @ B.T
    return Laplacian(p, L.toarray().astype(float), K)


def adjacency_laplacian(K: SimplicialComplex, p: int) -> Laplacian:
    """Laplacian assembled from upper degree and adjacency relations.

    Independent of :func:`hodge_laplacian`; kept as a cross-check.
    """
    _check_p(K, p, 0)
    items = K.simplex_list(p)
    n = len(items)
    L = np.zeros((n, n))
    upper = {s: set() for s in items}
    for t in K.simplex_list(p + 1):
        for f in faces(t):
            upper[f].add(t)
    for i, s in enumerate(items):
        L[i, i] = len(upper[s]) + (p + 1 if p > 0 else 0)

    if p == 0:
        for t in K.simplex_list(1):
            i, j = K.index(0)[(t[0],)], K.index(0)[(t[1],)]
            L[i, j] = L[j, i] = -1.0
        return Laplacian(p, L, K)

    # lower adjacency: group p-simplices by shared (p-1)-face
    by_face: dict[tuple, list] = {}
    for i, s in enumerate(items):
        for k in range(p + 1):
            by_face.setdefault(s[:k] + s[k + 1:], []).append((i, k))
    for members in by_face.values():
        for a in range(len(members)):
            i, ki = members[a]
            for b in range(a + 1, len(members)):
                j, kj = members[b]
                si, sj = items[i], items[j]
                if upper[si] & upper[sj]:
                    continue  # upper adjacent -> 0
                # similar orientation w.r.t. the common face iff the face
                # carries the same incidence sign in both boundaries
                similar = (ki % 2) == (kj % 2)
                L[i, j] = L[j, i] = 1.0 if similar else -1.0
    return Laplacian(p, L, K)


def spectrum(L) -> Spectrum:
    M = L.matrix if isinstance(L, Laplacian) else np.asarray(L, dtype=float)
    if M.shape[0] != M.shape[1]:
        raise ConfigError(f"Laplacian must be square, got {M.shape}")
    if M.shape[0] > MAX_DENSE:
        raise SizeError(f"{M.shape[0]} simplices exceeds the dense eigensolver limit {MAX_DENSE}")
    if M.size == 0:
        return Spectrum(np.zeros(0), np.zeros((0, 0)))
    scale = max(1.0, float(np.abs(M).max()))
    if np.abs(M - M.T).max() > 1e-12 * scale:
        raise ConfigError("Laplacian is not symmetric")
    w, V = np.linalg.eigh(M)
    return Spectrum(w, V)


def default_tolerance(eigenvalues) -> float:
    lam_max = float(eigenvalues[-1]) if len(eigenvalues) else 0.0
    return 1e-8 * max(1.0, lam_max)


def rank_mod_prime(M, prime: int = PRIME) -> int:
    """Rank over GF(prime) by Gaussian elimination on int64 arrays."""
    A = np.asarray(M.toarray() if sp.issparse(M) else M, dtype=np.int64) % prime
    if A.size == 0:
        return 0
    rows, cols = A.shape
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        nz = np.flatnonzero(A[rank:, c])
        if len(nz) == 0:
            continue
        piv = rank + nz[0]
        if piv != rank:
            A[[rank, piv]] = A[[piv, rank]]
        inv = pow(int(A[rank, c]), prime - 2, prime)
        A[rank] = (A[rank] * inv) % prime
        below = rank + 1 + np.flatnonzero(A[rank + 1:, c])
        if len(below):
            f = A[below, c][:, None]
            A[below] = (A[below] - (f * A[rank][None, :]) % prime) % prime
        rank += 1
    return rank


def exact_betti(K: SimplicialComplex, p: int) -> int:
    n = K.n(p)
    r_p = rank_mod_prime(_boundary(K, p).entries) if p >= 1 and n else 0
    r_up = rank_mod_prime(_boundary(K, p + 1).entries) if K.n(p + 1) and n else 0
    return n - r_p - r_up


def betti(K: SimplicialComplex, p: int, tol: float | None = None) -> int:
    """Betti number from the Laplacian kernel, checked against exact ranks."""
    if p < 0:
        raise ConfigError(f"p must be non-negative, got {p}")
    if p > K.p_max:
        return 0
    exact = exact_betti(K, p)
    spec = spectrum(hodge_laplacian(K, p))
    tau = default_tolerance(spec.eigenvalues) if tol is None else tol
    kernel = int(np.sum(spec.eigenvalues < tau))
    if kernel != exact:
        raise ConsistencyError(
            f"beta_{p}: kernel dimension {kernel} at tol {tau:g} but rank formula gives {exact}"
        )
    return exact


def sign_fix(v: np.ndarray) -> np.ndarray:
    """Flip ``v`` so its first entry of magnitude > 1e-12 is positive."""
    nz = np.flatnonzero(np.abs(v) > SIGN_EPS)
    if len(nz) and v[nz[0]] < 0:
        return -v
    return v


def _canonical_basis(Q: np.ndarray) -> np.ndarray:
    """Orthonormal basis of span(Q) that depends only on the subspace.

    Standard basis vectors (in simplex order) are projected onto the
    subspace and Gram-Schmidt-ed in that order, keeping those whose
    residual exceeds PIVOT_TOL.
    """
    n, k = Q.shape
    out = []
    for i in range(n):
        if len(out) == k:
            break
        v = Q @ Q[i]  # projection of e_i
        for _ in range(2):
            for u in out:
                v = v - (u @ v) * u
        norm = np.linalg.norm(v)
        if norm > PIVOT_TOL:
            out.append(v / norm)
    if len(out) < k:
        raise ConsistencyError(f"could only extract {len(out)} of {k} kernel basis vectors")
    return np.array(out)


def harmonic_generators(K: SimplicialComplex, p: int, tol: float | None = None) -> GeneratorSet:
    """Orthonormal, sign-fixed basis of ker L_p aligned to the p-simplices.

    The count always equals the exact rank-based Betti number; disagreement
    with the eigenvalue count at ``tol``, or eigenvalues near ``tol``, is
    recorded in ``warnings``.
    """
    if p < 0:
        raise ConfigError(f"p must be non-negative, got {p}")
    order = list(K.simplex_list(p))
    n = len(order)
    if n == 0 or p > K.p_max:
        return GeneratorSet(p, np.zeros((0, n)), order, tol or 1e-8)
    if tol is not None and not tol > 0:
        raise ConfigError(f"tolerance must be positive, got {tol}")

    L = hodge_laplacian(K, p)
    spec = spectrum(L)
    w = spec.eigenvalues
    tau = default_tolerance(w) if tol is None else tol
    notes = []

    beta = exact_betti(K, p)
    kernel = int(np.sum(w < tau))
    if kernel != beta:
        notes.append(f"kernel dimension {kernel} at tol {tau:g} disagrees with exact beta_{p}={beta}; using {beta}")
    near = w[(w >= tau / 10) & (w <= 10 * tau)]
    if len(near):
        notes.append(f"eigenvalue gap ambiguity: {len(near)} eigenvalue(s) within [tol/10, 10 tol]")

    if beta == 0:
        return GeneratorSet(p, np.zeros((0, n)), order, tau, w, notes)

    basis = _canonical_basis(spec.eigenvectors[:, :beta])
    vectors = np.array([sign_fix(v) for v in basis])
    resid = np.linalg.norm(L.matrix @ vectors.T, axis=0)
    if resid.max() > tau:
        notes.append(f"max kernel residual {resid.max():.3g} exceeds tol {tau:g}")
    return GeneratorSet(p, vectors, order, tau, w, notes)


def fiedler_vector(K: SimplicialComplex, tol: float | None = None) -> np.ndarray:
    """Sign-fixed unit eigenvector of L_0 for its smallest non-zero eigenvalue.

    Vertex signs give the spectral bipartition. Emits
    DegenerateFiedlerWarning when that eigenvalue is repeated (the vector
    is then one arbitrary member of the eigenspace).
    """
    b0 = exact_betti(K, 0)
    if b0 != 1:
        raise DataError(f"Fiedler vector needs a connected complex, beta_0 = {b0}")
    spec = spectrum(hodge_laplacian(K, 0))
    w = spec.eigenvalues
    tau = default_tolerance(w) if tol is None else tol
    nonzero = np.flatnonzero(w >= tau)
    if len(nonzero) == 0:
        raise DataError("L_0 has no non-zero eigenvalue (single vertex)")
    i = nonzero[0]
    if i + 1 < len(w) and abs(w[i + 1] - w[i]) < tau:
        warnings.warn(
            f"Fiedler eigenvalue {w[i]:.6g} is repeated; vector is not unique",
            DegenerateFiedlerWarning,
            stacklevel=2,
        )
    return sign_fix(spec.eigenvectors[:, i])
