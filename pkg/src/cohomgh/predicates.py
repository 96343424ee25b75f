"""Adaptive geometric predicates.

Each predicate is evaluated in double precision first; when the result is
within a forward error bound of zero it is recomputed with exact rational
arithmetic (floats convert to ``Fraction`` without loss), so the returned
sign is always exact.

The orient3d/insphere formulas and their static error bounds follow
Shewchuk's "Adaptive Precision Floating-Point Arithmetic and Fast Robust
Geometric Predicates" (stage A bounds only; the exact stage replaces his
expansion arithmetic).
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

_EPS = np.finfo(float).eps / 2  # 2**-53
O3D_ERRBOUND = (7.0 + 56.0 * _EPS) * _EPS
ISP_ERRBOUND = (16.0 + 224.0 * _EPS) * _EPS
# diametral-ball test has no tight static bound; this is deliberately loose
BALL_RELTOL = 1e-9

exact_fallbacks = {"orient3d": 0, "insphere": 0, "ball": 0}


def _sign(x) -> int:
    return int(x > 0) - int(x < 0)


def _orient3d_terms(a, b, c, d):
    adx, ady, adz = a[0] - d[0], a[1] - d[1], a[2] - d[2]
    bdx, bdy, bdz = b[0] - d[0], b[1] - d[1], b[2] - d[2]
    cdx, cdy, cdz = c[0] - d[0], c[1] - d[1], c[2] - d[2]
    bdxcdy, cdxbdy = bdx * cdy, cdx * bdy
    cdxady, adxcdy = cdx * ady, adx * cdy
    adxbdy, bdxady = adx * bdy, bdx * ady
    det = adz * (bdxcdy - cdxbdy) + bdz * (cdxady - adxcdy) + cdz * (adxbdy - bdxady)
    perm = (
        abs(adz) * (abs(bdxcdy) + abs(cdxbdy))
        + abs(bdz) * (abs(cdxady) + abs(adxcdy))
        + abs(cdz) * (abs(adxbdy) + abs(bdxady))
    )
    return det, perm


def _insphere_terms(a, b, c, d, e):
    aex, aey, aez = a[0] - e[0], a[1] - e[1], a[2] - e[2]
    bex, bey, bez = b[0] - e[0], b[1] - e[1], b[2] - e[2]
    cex, cey, cez = c[0] - e[0], c[1] - e[1], c[2] - e[2]
    dex, dey, dez = d[0] - e[0], d[1] - e[1], d[2] - e[2]

    ab = aex * bey - bex * aey
    bc = bex * cey - cex * bey
    cd = cex * dey - dex * cey
    da = dex * aey - aex * dey
    ac = aex * cey - cex * aey
    bd = bex * dey - dex * bey

    abc = aez * bc - bez * ac + cez * ab
    bcd = bez * cd - cez * bd + dez * bc
    cda = cez * da + dez * ac + aez * cd
    dab = dez * ab + aez * bd + bez * da

    alift = aex * aex + aey * aey + aez * aez
    blift = bex * bex + bey * bey + bez * bez
    clift = cex * cex + cey * cey + cez * cez
    dlift = dex * dex + dey * dey + dez * dez

    det = (dlift * abc - clift * dab) + (blift * cda - alift * bcd)

    A = abs
    perm = (
        (A(cex * dey) + A(dex * cey)) * A(bez)
        + (A(dex * bey) + A(bex * dey)) * A(cez)
        + (A(bex * cey) + A(cex * bey)) * A(dez)
    ) * alift
    perm += (
        (A(dex * aey) + A(aex * dey)) * A(cez)
        + (A(aex * cey) + A(cex * aey)) * A(dez)
        + (A(cex * dey) + A(dex * cey)) * A(aez)
    ) * blift
    perm += (
        (A(aex * bey) + A(bex * aey)) * A(dez)
        + (A(bex * dey) + A(dex * bey)) * A(aez)
        + (A(dex * aey) + A(aex * dey)) * A(bez)
    ) * clift
    perm += (
        (A(bex * cey) + A(cex * bey)) * A(aez)
        + (A(cex * aey) + A(aex * cey)) * A(bez)
        + (A(aex * bey) + A(bex * aey)) * A(cez)
    ) * dlift
    return det, perm


def _exact(p):
    return [Fraction(float(x)) for x in p]


def _floats(p):
    return [float(x) for x in p]


def orient3d(a, b, c, d) -> int:
    """Sign of the orientation determinant; positive when ``d`` lies below
    the plane through ``a, b, c`` (those appearing counterclockwise from
    above). Zero iff the four points are exactly coplanar."""
    a, b, c, d = _floats(a), _floats(b), _floats(c), _floats(d)
    det, perm = _orient3d_terms(a, b, c, d)
    if abs(det) > O3D_ERRBOUND * perm:
        return _sign(det)
    exact_fallbacks["orient3d"] += 1
    det, _ = _orient3d_terms(_exact(a), _exact(b), _exact(c), _exact(d))
    return _sign(det)


def _insphere_raw(a, b, c, d, e) -> int:
    a, b, c, d, e = _floats(a), _floats(b), _floats(c), _floats(d), _floats(e)
    det, perm = _insphere_terms(a, b, c, d, e)
    if abs(det) > ISP_ERRBOUND * perm:
        return _sign(det)
    exact_fallbacks["insphere"] += 1
    det, _ = _insphere_terms(_exact(a), _exact(b), _exact(c), _exact(d), _exact(e))
    return _sign(det)


def insphere(a, b, c, d, e) -> int:
    """+1 if ``e`` is strictly inside the circumsphere of tetrahedron
    ``abcd``, 0 if on it, -1 if outside. Independent of vertex order.

    Raises ValueError for a flat tetrahedron (no circumsphere)."""
    o = orient3d(a, b, c, d)
    if o == 0:
        raise ValueError("insphere on a flat tetrahedron")
    return _insphere_raw(a, b, c, d, e) * o


def _ball_float(P, q):
    p0 = P[0]
    A = P[1:] - p0
    G = A @ A.T
    lam = np.linalg.solve(G, 0.5 * np.diag(G))
    w = lam @ A
    u = q - p0
    f = u @ u - 2.0 * (u @ w)
    scale = u @ u + 2.0 * np.linalg.norm(u) * np.linalg.norm(w)
    return f, scale


def _ball_exact(P, q):
    P = [_exact(p) for p in P]
    q = _exact(q)
    p0 = P[0]
    A = [[x - y for x, y in zip(p, p0)] for p in P[1:]]
    k = len(A)

    def dot(x, y):
        return sum(s * t for s, t in zip(x, y))

    G = [[dot(A[i], A[j]) for j in range(k)] for i in range(k)]
    rhs = [G[i][i] / 2 for i in range(k)]
    lam = _solve_exact(G, rhs)
    w = [sum(lam[i] * A[i][c] for i in range(k)) for c in range(3)]
    u = [x - y for x, y in zip(q, p0)]
    return dot(u, u) - 2 * dot(u, w)


def _solve_exact(G, rhs):
    n = len(G)
    M = [row[:] + [r] for row, r in zip(G, rhs)]
    for col in range(n):
        piv = next(r for r in range(col, n) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col] / M[col][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [M[i][n] / M[i][i] for i in range(n)]


def in_diametral_ball(simplex_points, q) -> int:
    """+1 if ``q`` is strictly inside the smallest circumsphere of the
    simplex (centre in the simplex's affine hull), 0 if on it, -1 outside.

    Works for edges, triangles and tetrahedra embedded in R^3."""
    P = np.asarray(simplex_points, dtype=float)
    q = np.asarray(q, dtype=float)
    if len(P) == 4:
        return insphere(*P, q)
    f, scale = _ball_float(P, q)
    if abs(f) > BALL_RELTOL * scale:
        return -_sign(f)
    exact_fallbacks["ball"] += 1
    return -_sign(_ball_exact(P, q))


def circumsphere(simplex_points) -> tuple[float, np.ndarray]:
    """Radius and centre of the smallest sphere through the simplex vertices."""
    P = np.asarray(simplex_points, dtype=float)
    if len(P) == 1:
        return 0.0, P[0].copy()
    p0 = P[0]
    A = P[1:] - p0
    G = A @ A.T
    lam = np.linalg.solve(G, 0.5 * np.diag(G))
    w = lam @ A
    return float(np.linalg.norm(w)), p0 + w


def affinely_independent_triple(points) -> tuple[int, int, int] | None:
    """Indices of three exactly non-collinear points, or None."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n < 3:
        return None
    a = 0
    b = next((i for i in range(1, n) if not np.array_equal(pts[i], pts[a])), None)
    if b is None:
        return None
    ea, eb = _exact(pts[a]), _exact(pts[b])
    ab = [y - x for x, y in zip(ea, eb)]
    for c in range(1, n):
        if c == b:
            continue
        ec = _exact(pts[c])
        ac = [y - x for x, y in zip(ea, ec)]
        cross = (
            ab[1] * ac[2] - ab[2] * ac[1],
            ab[2] * ac[0] - ab[0] * ac[2],
            ab[0] * ac[1] - ab[1] * ac[0],
        )
        if any(x != 0 for x in cross):
            return a, b, c
    return None


def all_coplanar(points) -> bool:
    pts = np.asarray(points, dtype=float)
    tri = affinely_independent_triple(pts)
    if tri is None:
        return True
    a, b, c = (pts[i] for i in tri)
    return all(orient3d(a, b, c, d) == 0 for d in pts)
