"""Tight additive uncertainty bounds and the uncertainty-range cover.

The minimum of Delta^2 X + Delta^2 Y over all states equals the minimum
over real (x, y) of lambda_min((X - x)^2 + (Y - y)^2); linear sector
approximants of variance turn the nonconvex uncertainty range into a
union of ordinary numerical ranges with a certified padding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .core import as_density, as_hermitian, expectation
from .numrange import ConvexBodyApprox, jnr_approximate, sphere_directions, support


def variance(x, rho):
    """<X^2> - <X>^2 over rho, clipped at zero against rounding."""
    x = as_hermitian(x)
    rho = np.asarray(rho, dtype=complex)
    v = expectation(x @ x, rho) - expectation(x, rho) ** 2
    if v < -1e-12:
        raise ValueError(f"variance evaluated to {v}")
    return max(v, 0.0)


@dataclass
class VarianceBound:
    """Tight lower bound for Delta^2 X + Delta^2 Y with its certificate."""

    value: float
    minimizer: tuple  # (x*, y*)
    certificate_state: np.ndarray

    def __post_init__(self):
        self.certificate_state = as_density(self.certificate_state)


def _lambda_min_shifted(x, y, x2, y2, eye, pt):
    a, b = pt
    m = x2 - 2 * a * x + a * a * eye + y2 - 2 * b * y + b * b * eye
    return np.linalg.eigvalsh(m)[0]


def min_sum_variances(x, y, grid=41, refine_from=5):
    """Minimize lambda_min((X-x)^2 + (Y-y)^2) over the spectral box.

    Deterministic coarse grid over the eigenvalue ranges of X and Y
    followed by Nelder-Mead refinement from the best cells; the
    certificate state is the minimizing eigenvector's projector, whose
    expectation values reproduce (x*, y*) at an interior optimum.
    """
    x = as_hermitian(x)
    y = as_hermitian(y)
    if x.shape != y.shape:
        raise ValueError("operators must have equal dimensions")
    x2, y2 = x @ x, y @ y
    eye = np.eye(x.shape[0])
    wx = np.linalg.eigvalsh(x)
    wy = np.linalg.eigvalsh(y)

    def f(pt):
        return _lambda_min_shifted(x, y, x2, y2, eye, pt)

    xs = np.linspace(wx[0], wx[-1], grid)
    ys = np.linspace(wy[0], wy[-1], grid)
    coarse = sorted(((f((a, b)), a, b) for a in xs for b in ys), key=lambda t: t[0])
    best_val, best_pt = coarse[0][0], np.array(coarse[0][1:])
    for v0, a, b in coarse[:refine_from]:
        r = minimize(
            f,
            [a, b],
            method="Nelder-Mead",
            options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000},
        )
        if r.fun < best_val:
            best_val, best_pt = float(r.fun), np.asarray(r.x)
    m = (
        x2
        - 2 * best_pt[0] * x
        + best_pt[0] ** 2 * eye
        + y2
        - 2 * best_pt[1] * y
        + best_pt[1] ** 2 * eye
    )
    _, v = np.linalg.eigh(m)
    state = np.outer(v[:, 0], v[:, 0].conj())
    return VarianceBound(
        value=max(best_val, 0.0),
        minimizer=(float(best_pt[0]), float(best_pt[1])),
        certificate_state=state,
    )


def sector_bound_operator(x, a, b):
    """A_(a,b) = X^2 - (a+b) X + ab; <A> <= Delta^2 X whenever a <= <X> <= b."""
    if a > b:
        raise ValueError(f"sector requires a <= b, got ({a}, {b})")
    x = as_hermitian(x)
    return x @ x - (a + b) * x + a * b * np.eye(x.shape[0])


@dataclass(frozen=True)
class SectorPartition:
    """Increasing breakpoints that contain every eigenvalue of the bound operator."""

    breakpoints: tuple

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        if len(bp) < 2 or any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be strictly increasing, length >= 2")
        object.__setattr__(self, "breakpoints", bp)

    @property
    def delta(self):
        """(max sector width / 2)^2, the one-operator approximation error."""
        gaps = np.diff(self.breakpoints)
        return float((gaps.max() / 2) ** 2)

    def covers(self, x, tol=1e-10):
        w = np.linalg.eigvalsh(as_hermitian(x))
        bp = np.array(self.breakpoints)
        return bool(
            np.all(np.min(np.abs(w[:, None] - bp[None, :]), axis=1) <= tol)
            and bp[0] <= w[0] + tol
            and w[-1] <= bp[-1] + tol
        )

    def sectors(self):
        return list(zip(self.breakpoints[:-1], self.breakpoints[1:]))


def default_partition(x, tol=1e-4):
    """Eigenvalues of X, midpoint-refined until delta falls below tol."""
    w = np.linalg.eigvalsh(as_hermitian(x))
    bp = sorted(set(np.round(w, 12)))
    if len(bp) == 1:
        bp = [bp[0] - 1e-8, bp[0] + 1e-8]
    bp = np.array(bp, dtype=float)
    while (np.diff(bp).max() / 2) ** 2 > tol:
        mids = (bp[:-1] + bp[1:]) / 2
        bp = np.sort(np.concatenate([bp, mids]))
    return SectorPartition(tuple(bp))


def sector_sum_bound(x, y, px: SectorPartition, py: SectorPartition):
    """(c, delta): c = min over sector pairs of lambda_min(X_i + Y_j).

    Guarantees c <= min_rho (Delta^2 X + Delta^2 Y) <= c + delta with
    delta = delta_X + delta_Y.
    """
    x = as_hermitian(x)
    y = as_hermitian(y)
    if not px.covers(x):
        raise ValueError("X partition does not contain the spectrum of X")
    if not py.covers(y):
        raise ValueError("Y partition does not contain the spectrum of Y")
    xs = [sector_bound_operator(x, a, b) for a, b in px.sectors()]
    ys = [sector_bound_operator(y, a, b) for a, b in py.sectors()]
    c = min(np.linalg.eigvalsh(xi + yj)[0] for xi in xs for yj in ys)
    return float(c), px.delta + py.delta


@dataclass
class UncertaintyCover:
    """Union of sector numerical ranges covering the uncertainty range V(X, Y)."""

    bodies: list  # ConvexBodyApprox per sector pair
    delta_x: float
    delta_y: float

    def contains(self, point, tol=1e-9):
        """Membership of a (Delta^2 X, Delta^2 Y) pair in the padded union.

        Uses the outer half-space description padded by the Minkowski
        rectangle [0, delta_x] x [0, delta_y]: h_{W + R}(n) = h_W(n) + h_R(n).
        """
        p = np.asarray(point, dtype=float)
        for body in self.bodies:
            pad = self.delta_x * np.clip(body.outer_normals[:, 0], 0, None)
            pad = pad + self.delta_y * np.clip(body.outer_normals[:, 1], 0, None)
            if np.all(body.outer_normals @ p <= body.outer_offsets + pad + tol):
                return True
        return False


def uncertainty_range_cover(x, y, px: SectorPartition, py: SectorPartition, directions=None):
    """The family {W(X_i, Y_j)} whose padded union covers V(X, Y)."""
    x = as_hermitian(x)
    y = as_hermitian(y)
    if directions is None:
        directions = sphere_directions(2, 180)
    bodies = []
    for a, b in px.sectors():
        xi = sector_bound_operator(x, a, b)
        for c, d in py.sectors():
            yj = sector_bound_operator(y, c, d)
            bodies.append(jnr_approximate([xi, yj], directions))
    return UncertaintyCover(bodies=bodies, delta_x=px.delta, delta_y=py.delta)


def paraboloid_certificate(x, y, bound: VarianceBound, directions=None, tol=1e-6):
    """Tangency check of the bound against W(X, Y, X^2 + Y^2).

    Over sampled boundary states, <X^2 + Y^2> - <X>^2 - <Y>^2 must stay
    above the bound, and the certificate state must attain it.
    """
    x = as_hermitian(x)
    y = as_hermitian(y)
    ssq = x @ x + y @ y
    if directions is None:
        directions = sphere_directions(3, 600)
    lo = np.inf
    for n in np.atleast_2d(directions):
        s = support([x, y, ssq], n)
        lo = min(lo, s.point[2] - s.point[0] ** 2 - s.point[1] ** 2)
    if lo < bound.value - tol:
        return False
    attained = variance(x, bound.certificate_state) + variance(y, bound.certificate_state)
    return bool(abs(attained - bound.value) <= tol)
