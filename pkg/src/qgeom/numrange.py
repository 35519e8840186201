"""Joint numerical ranges: support sweeps, convex approximations, spectrahedra,
qutrit boundary classification, and one-shot unitary distinguishability.

The support function of W(X_1,...,X_k) in direction n is the largest
eigenvalue of n.X, attained by the top eigenvector; sweeping directions
yields an inner vertex cloud and outer supporting half-spaces that bracket
the true range.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import schur
from scipy.optimize import linprog, minimize

from .core import as_hermitian, expectation

DEGENERACY_GAP = 1e-10
FLAT_GAP = 1e-8
FACE_MERGE_TOL = 1e-6
SEGMENT_PC_RATIO = 1e-6


def unit(v):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n < 1e-300:
        raise ValueError("zero direction")
    return v / n


def sphere_directions(k, n, seed=0, extras=None):
    """Deterministic direction set on S^{k-1}.

    k=2 uses equally spaced circle angles, k=3 a Fibonacci lattice, higher k
    a seeded Gaussian sample; user extras are appended after normalization.
    """
    if k < 1:
        raise ValueError("need at least one coordinate")
    if k == 1:
        dirs = np.array([[1.0], [-1.0]])
    elif k == 2:
        th = 2 * np.pi * np.arange(n) / max(n, 1)
        dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
    elif k == 3:
        i = np.arange(n) + 0.5
        phi = np.arccos(1 - 2 * i / n)
        theta = np.pi * (1 + 5**0.5) * i
        dirs = np.stack(
            [np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta), np.cos(phi)],
            axis=1,
        )
    else:
        rng = np.random.default_rng(seed)
        g = rng.normal(size=(n, k))
        dirs = g / np.linalg.norm(g, axis=1, keepdims=True)
    if extras is not None and len(extras):
        ex = np.array([unit(e) for e in extras])
        dirs = np.vstack([dirs, ex])
    return dirs


@dataclass
class SupportSample:
    """One support evaluation: h_W(n), the attaining point, and its state."""

    direction: np.ndarray
    value: float
    point: np.ndarray
    witness: np.ndarray
    degenerate: bool = False
    gap: float = np.inf


@dataclass
class ConvexBodyApprox:
    """Inner vertex cloud plus outer supporting half-spaces for a convex body."""

    inner_vertices: np.ndarray  # (m, k)
    outer_normals: np.ndarray  # (h, k) unit rows
    outer_offsets: np.ndarray  # (h,)
    unbounded: bool = False
    meta: dict = field(default_factory=dict)

    def outer_contains(self, point, tol=1e-9):
        p = np.asarray(point, dtype=float)
        return bool(np.all(self.outer_normals @ p <= self.outer_offsets + tol))

    def inner_in_outer(self, tol=1e-9):
        if len(self.inner_vertices) == 0:
            return True
        s = self.outer_normals @ self.inner_vertices.T - self.outer_offsets[:, None]
        return bool(s.max() <= tol)

    def support_inner(self, n):
        return float((self.inner_vertices @ unit(n)).max())


def support(ops, n, degeneracy_gap=DEGENERACY_GAP):
    """Support sample of W(ops) along unit direction n.

    value = lambda_max(sum n_i X_i); point = expectation tuple over the top
    eigenvector.  The sample is flagged degenerate when the relative gap of
    the two top eigenvalues falls below `degeneracy_gap`.
    """
    ops = [as_hermitian(x) for x in ops]
    d = ops[0].shape[0]
    if any(x.shape[0] != d for x in ops):
        raise ValueError("operators must share one dimension")
    n = unit(n)
    if len(n) != len(ops):
        raise ValueError(f"direction length {len(n)} != number of operators {len(ops)}")
    m = sum(ni * xi for ni, xi in zip(n, ops))
    w, v = np.linalg.eigh(m)
    top = v[:, -1]
    scale = max(abs(w[-1]), abs(w[0]), 1e-30)
    gap = (w[-1] - w[-2]) / scale if d > 1 else np.inf
    point = np.array([expectation(x, np.outer(top, top.conj())) for x in ops])
    return SupportSample(
        direction=n,
        value=float(w[-1]),
        point=point,
        witness=top,
        degenerate=bool(gap < degeneracy_gap),
        gap=float(gap),
    )


def _top_eigenspace(ops, n, rel_tol=1e-9):
    m = sum(ni * xi for ni, xi in zip(n, ops))
    w, v = np.linalg.eigh(m)
    scale = max(abs(w[-1]), abs(w[0]), 1e-30)
    mask = w >= w[-1] - rel_tol * scale
    return v[:, mask]


def _face_points(ops, basis, n_dirs=60, seed=1):
    """Inner points on the face spanned by a degenerate top eigenspace.

    Realizes the one-level recursion of reduced operators: the face is the
    joint numerical range of the eigenspace-restricted operators.
    """
    k = len(ops)
    reduced = [basis.conj().T @ x @ basis for x in ops]
    dirs = sphere_directions(k, n_dirs, seed=seed)
    pts = []
    for nn in dirs:
        m = sum(ni * xi for ni, xi in zip(nn, reduced))
        _, v = np.linalg.eigh(m)
        top = v[:, -1]
        pts.append([float(np.real(top.conj() @ y @ top)) for y in reduced])
    return np.array(pts)


def jnr_approximate(ops, directions, enrich_degenerate=True):
    """Direction-sweep approximation of W(ops): inner vertices and outer half-spaces.

    Degenerate support directions contribute extreme points of the flat face
    (sampled through the reduced eigenspace operators) so flat parts do not
    collapse to single inner points.
    """
    ops = [as_hermitian(x) for x in ops]
    k = len(ops)
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    inner = []
    normals = []
    offsets = []
    for n in directions:
        s = support(ops, n)
        inner.append(s.point)
        normals.append(s.direction)
        offsets.append(s.value)
        if enrich_degenerate and s.degenerate:
            basis = _top_eigenspace(ops, s.direction)
            if basis.shape[1] > 1:
                inner.extend(_face_points(ops, basis))
    body = ConvexBodyApprox(
        inner_vertices=np.array(inner),
        outer_normals=np.array(normals),
        outer_offsets=np.array(offsets),
    )
    body.unbounded = not _positively_spanning(body.outer_normals)
    return body


def _positively_spanning(normals):
    """True iff no direction u has n_i . u <= 0 for all i (outer set bounded)."""
    k = normals.shape[1]
    if len(normals) < k + 1:
        return False
    res = linprog(
        c=np.zeros(k),
        A_ub=normals,
        b_ub=-np.ones(len(normals)),
        bounds=[(None, None)] * k,
        method="highs",
    )
    return not res.success


def spectrahedron_contains(center, gens, y, tol=1e-9):
    """Membership y in Spec(center; gens): lambda_min(center + sum y_i G_i) >= -tol."""
    m = as_hermitian(center).astype(complex)
    for yi, g in zip(np.asarray(y, dtype=float), gens):
        m = m + yi * as_hermitian(g)
    return bool(np.linalg.eigvalsh(m)[0] >= -tol)


# ---------------------------------------------------------------------------
# qutrit classification (numeric realization of the e/s face census)


class DegenerateTripleError(ValueError):
    """The triple is linearly dependent with the identity (flat range)."""


class CommonEigenvectorError(ValueError):
    """All three operators share an eigenvector; the range is a convex hull
    of a point and a qubit numerical range (block decomposition), and the
    e/s classification does not apply."""

    def __init__(self, vector, point):
        self.vector = vector
        self.point = np.asarray(point)
        super().__init__(
            "common eigenvector detected: W = conv({x} u W(Y1,Y2,Y3)) with "
            f"x = {np.round(self.point, 6).tolist()}; classification refused"
        )


@dataclass
class FlatFace:
    normal: np.ndarray
    dim: int  # 0 point, 1 segment, 2 ellipse
    shape: str  # "point" | "segment" | "ellipse"
    gap: float  # polished relative eigenvalue gap (confidence margin)
    points: np.ndarray  # sampled face point cloud


@dataclass
class JNRClassification:
    e: int
    s: int
    faces: list
    min_unpolished_gap: float  # smallest sweep gap outside accepted faces


def _common_eigenvector(ops, tol=1e-8):
    rng = np.random.default_rng(12345)
    scale = max(max(np.abs(x).max() for x in ops), 1e-30)
    for _ in range(4):
        c = rng.normal(size=len(ops))
        m = sum(ci * xi for ci, xi in zip(c, ops))
        _, v = np.linalg.eigh(m)
        for i in range(v.shape[1]):
            vec = v[:, i]
            if all(
                np.linalg.norm(x @ vec - (vec.conj() @ x @ vec) * vec) < tol * scale
                for x in ops
            ):
                return vec
    return None


def _polish_flat_direction(ops, n0, maxiter=400):
    n0 = unit(n0)
    a = np.eye(3)[np.argmin(np.abs(n0))]
    t1 = np.cross(n0, a)
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(n0, t1)

    def gap_at(u):
        n = unit(n0 + u[0] * t1 + u[1] * t2)
        m = sum(ni * xi for ni, xi in zip(n, ops))
        w = np.linalg.eigvalsh(m)
        scale = max(abs(w[-1]), abs(w[0]), 1e-30)
        return (w[-1] - w[-2]) / scale

    r = minimize(
        gap_at,
        np.zeros(2),
        method="Nelder-Mead",
        options={"xatol": 1e-14, "fatol": 1e-16, "maxiter": maxiter},
    )
    return unit(n0 + r.x[0] * t1 + r.x[1] * t2), float(r.fun)


def _face_rank(ops, n, rank_tol=1e-6):
    """Geometric rank of the face at a doubly degenerate direction.

    The face is the image of the Bloch ball of the top eigenspace; its
    affine rank is the rank of the matrix of traceless Bloch components of
    the reduced operators.
    """
    basis = _top_eigenspace(ops, n, rel_tol=1e-7)
    if basis.shape[1] < 2:
        return 0, np.zeros((0, 3))
    basis = basis[:, -2:]
    rows = []
    for x in ops:
        y = basis.conj().T @ x @ basis
        rows.append(
            [
                np.trace(y @ np.array([[0, 1], [1, 0]])).real / 2,
                np.trace(y @ np.array([[0, -1j], [1j, 0]])).real / 2,
                np.trace(y @ np.array([[1, 0], [0, -1]])).real / 2,
            ]
        )
    r = np.array(rows)
    sv = np.linalg.svd(r, compute_uv=False)
    rank = int((sv > rank_tol * max(sv[0], 1e-30)).sum())
    return rank, r


def _fit_face_shape(points, rank):
    """Sanity filter: PCA segment test, conic discriminant for ellipses."""
    c = points - points.mean(axis=0)
    sv = np.linalg.svd(c, compute_uv=False)
    if rank <= 0 or sv[0] < 1e-12:
        return "point", 0
    if rank == 1 or sv[1] < SEGMENT_PC_RATIO * sv[0]:
        return "segment", 1
    # project onto the top-two principal axes and least-squares fit a conic;
    # the affine image of a Bloch ball is always an ellipse, so a bad
    # discriminant can only mean a nearly collapsed cloud
    _, _, vt = np.linalg.svd(c, full_matrices=False)
    xy = c @ vt[:2].T
    x, y = xy[:, 0], xy[:, 1]
    m = np.stack([x * x, x * y, y * y, x, y, np.ones_like(x)], axis=1)
    _, _, vvt = np.linalg.svd(m)
    a, b, cc = vvt[-1][0], vvt[-1][1], vvt[-1][2]
    if b * b - 4 * a * cc >= 0 and sv[1] < 1e-3 * sv[0]:
        return "segment", 1
    return "ellipse", 2


def classify_qutrit_jnr(x1, x2, x3, sweep=2000, candidate_gap=0.2):
    """Count elliptic (e) and segment (s) flat faces of a qutrit triple's range.

    Flat directions are located by sweeping the sphere for small top-two
    eigenvalue gaps and polishing local candidates to the FLAT_GAP
    threshold; nearby polished normals are merged within FACE_MERGE_TOL.
    """
    ops = [as_hermitian(x) for x in (x1, x2, x3)]
    if any(x.shape != (3, 3) for x in ops):
        raise ValueError("classification requires 3x3 operators")
    vec = _common_eigenvector(ops)
    if vec is not None:
        point = [float(np.real(vec.conj() @ x @ vec)) for x in ops]
        raise CommonEigenvectorError(vec, point)
    stack = np.stack([np.eye(3).flatten()] + [x.flatten() for x in ops])
    sv = np.linalg.svd(stack, compute_uv=False)
    if sv[-1] < 1e-10 * sv[0]:
        raise DegenerateTripleError(
            "triple is linearly dependent with the identity; the range is flat"
        )

    dirs = sphere_directions(3, sweep)
    mats = np.einsum("nk,kij->nij", dirs, np.stack(ops))
    w = np.linalg.eigvalsh(mats)
    scale = np.maximum(np.abs(w[:, -1]), np.abs(w[:, 0]))
    gaps = (w[:, -1] - w[:, -2]) / np.maximum(scale, 1e-30)

    faces = []
    rejected_gaps = []
    order = np.argsort(gaps)
    for idx in order:
        if gaps[idx] > candidate_gap:
            break
        n, g = _polish_flat_direction(ops, dirs[idx])
        if g >= FLAT_GAP:
            rejected_gaps.append(gaps[idx])
            continue
        if any(np.linalg.norm(n - f.normal) < FACE_MERGE_TOL for f in faces):
            continue
        rank, _ = _face_rank(ops, n)
        basis = _top_eigenspace(ops, n, rel_tol=1e-7)
        pts = _face_points(ops, basis) if basis.shape[1] > 1 else np.zeros((0, 3))
        shape, dim = _fit_face_shape(pts, rank) if len(pts) else ("point", 0)
        faces.append(FlatFace(normal=n, dim=dim, shape=shape, gap=g, points=pts))
    e = sum(1 for f in faces if f.shape == "ellipse")
    s = sum(1 for f in faces if f.shape == "segment")
    min_rej = float(min(rejected_gaps)) if rejected_gaps else float(gaps.max(initial=np.inf))
    return JNRClassification(e=e, s=s, faces=faces, min_unpolished_gap=min_rej)


# ---------------------------------------------------------------------------
# one-shot unitary distinguishability (normal-operator polytope test)


def _hull_2d(points):
    """Andrew monotone chain; returns hull vertices counterclockwise."""
    pts = sorted(set((float(p[0]), float(p[1])) for p in points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lo, hi = [], []
    for p in pts:
        while len(lo) >= 2 and cross(lo[-2], lo[-1], p) <= 0:
            lo.pop()
        lo.append(p)
    for p in reversed(pts):
        while len(hi) >= 2 and cross(hi[-2], hi[-1], p) <= 0:
            hi.pop()
        hi.append(p)
    return lo[:-1] + hi[:-1]


def _closest_point_on_hull(hull, p=(0.0, 0.0)):
    p = np.asarray(p)
    best = None
    for i in range(len(hull)):
        a = np.asarray(hull[i])
        b = np.asarray(hull[(i + 1) % len(hull)])
        ab = b - a
        t = 0.0 if ab @ ab < 1e-300 else np.clip((p - a) @ ab / (ab @ ab), 0, 1)
        q = a + t * ab
        d = np.linalg.norm(q - p)
        if best is None or d < best[0]:
            best = (d, q)
    return best[1]


def _origin_in_hull(points, tol=1e-9):
    """Exact-ish point-in-polygon via the hull's half-plane description."""
    hull = _hull_2d(points)
    if len(hull) == 0:
        return False
    if len(hull) == 1:
        return bool(np.hypot(*hull[0]) <= tol)
    if len(hull) == 2:
        a, b = np.asarray(hull[0]), np.asarray(hull[1])
        ab = b - a
        t = np.clip(-(a @ ab) / (ab @ ab), 0, 1)
        return bool(np.linalg.norm(a + t * ab) <= tol)
    for i in range(len(hull)):
        a = np.asarray(hull[i])
        b = np.asarray(hull[(i + 1) % len(hull)])
        edge = b - a
        # ccw hull: the interior lies to the left of every edge
        if edge[0] * (0 - a[1]) - edge[1] * (0 - a[0]) < -tol * max(np.linalg.norm(edge), 1e-30):
            return False
    return True


def one_shot_distinguishable(u, v, tol=1e-9):
    """Single-shot discrimination of unitaries U, V.

    Decomposes U^dag V = X + iY (a normal operator), so W(X, Y) is the
    convex hull of the eigenvalues of U^dag V in the complex plane;
    discrimination is possible iff that polygon contains the origin.
    Returns (True, |psi>) with <psi|U^dag V|psi> = 0, or (False, n) with a
    separating unit direction n.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    d = u.shape[0]
    for name, m in (("U", u), ("V", v)):
        if m.shape != (d, d) or np.abs(m @ m.conj().T - np.eye(d)).max() > 1e-9:
            raise ValueError(f"{name} is not unitary")
    m = u.conj().T @ v
    # Schur of a normal matrix: unitary Q of orthonormal eigenvectors
    t, q = schur(m, output="complex")
    lam = np.diag(t)
    pts = np.stack([lam.real, lam.imag], axis=1)
    if not _origin_in_hull(pts, tol=tol):
        hull = _hull_2d(pts)
        c = _closest_point_on_hull(hull)
        return False, unit(c)
    # Caratheodory in the plane: <= 3 eigenvalues whose hull covers 0
    weights, chosen = _zero_combination(lam, tol)
    psi = np.zeros(d, dtype=complex)
    for w, i in zip(weights, chosen):
        psi += np.sqrt(w) * q[:, i]
    psi /= np.linalg.norm(psi)
    return True, psi


def _zero_combination(lam, tol):
    """Convex weights over <= 3 eigenvalues combining to 0 in the complex plane."""
    n = len(lam)
    for i in range(n):
        if abs(lam[i]) <= tol:
            return [1.0], [i]
    for i in range(n):
        for j in range(i + 1, n):
            a, b = lam[i], lam[j]
            den = abs(a - b) ** 2
            if den < 1e-30:
                continue
            t = np.real((-b) * np.conj(a - b)) / den
            if -1e-12 <= t <= 1 + 1e-12 and abs(t * a + (1 - t) * b) <= 10 * tol:
                t = float(np.clip(t, 0, 1))
                return [t, 1 - t], [i, j]
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                m = np.array(
                    [
                        [lam[i].real, lam[j].real, lam[k].real],
                        [lam[i].imag, lam[j].imag, lam[k].imag],
                        [1.0, 1.0, 1.0],
                    ]
                )
                try:
                    w = np.linalg.solve(m, np.array([0.0, 0.0, 1.0]))
                except np.linalg.LinAlgError:
                    continue
                if w.min() >= -1e-10:
                    w = np.clip(w, 0, None)
                    return list(w / w.sum()), [i, j, k]
    raise RuntimeError("origin reported inside hull but no convex combination found")
