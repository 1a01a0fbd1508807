"""Numerical support-function tests, terminal points of geodesics and the
lift of planar fields to S^2.

Planar test: h is the support of a convex body iff h + h'' >= 0 weakly.  On
a uniform grid the exact discrete analogue is

    f_i + (f_{i+1} + f_{i-1} - 2 f_i) / (2 (1 - cos d)) >= 0,

which vanishes identically for the support of a point (a sampled cosine),
so translations never create violations.

Spherical test: the contact points p_i = f_i u_i + grad_i span a polytope
whose support at u_i is max_j <u_i, p_j>; the field is valid iff this
resampled hull support equals f_i.  Without gradients the body is the
intersection of the half-spaces <u_i, x> <= f_i instead.
"""

from dataclasses import dataclass
import math

import numpy as np
from numpy.polynomial import legendre
from scipy.optimize import linprog
from scipy.spatial import HalfspaceIntersection, QhullError

from .bodies import Embedded, unit_circle
from .errors import BoundaryShapeError, InvalidDimensionError, NumericalConsistencyError
from .forms import center, is_interior, planar_eval, v1, v2
from .hyperbolic import BOUNDARY_THRESH
from .sphere import SphereGrid, SupportField, build_grid, combine, sample_body, tangent_gradient

SEARCH_BOUNDS = (-8.0, 9.0)
RESOLUTION = 1e-4


@dataclass(frozen=True)
class ValidityVerdict:
    valid: bool
    worst_violation: float
    witness: np.ndarray
    tol: float

    def to_dict(self):
        return {"valid": self.valid, "worst_violation": self.worst_violation,
                "witness": [float(x) for x in self.witness], "tol": self.tol}


def default_tol(f):
    """1e-6 times the largest support value (scale invariant)."""
    m = float(np.max(np.abs(f.values)))
    return 1e-6 * m if m > 0 else 1e-12


def planar_curvature(f):
    """Discrete h + h'' at the nodes of a uniform planar grid."""
    d = f.grid.step
    v = f.values
    return v + (np.roll(v, -1) + np.roll(v, 1) - 2 * v) / (2 * (1 - math.cos(d)))


def _uniform(grid):
    if grid.n != 2 or grid.size < 3:
        return False
    return bool(np.allclose(grid.nodes, unit_circle(grid.theta), atol=1e-12)
                and np.allclose(grid.weights, grid.step, rtol=1e-12))


def _hull_excess(U, P, values, chunk=2048):
    excess = np.empty(len(U))
    for i in range(0, len(U), chunk):
        excess[i:i + chunk] = (U[i:i + chunk] @ P.T).max(axis=1) - values[i:i + chunk]
    return excess


def _halfspace_points(U, values):
    """Vertices of {x : <u_i, x> <= f_i}, for fields without gradients."""
    A = np.hstack([U, np.linalg.norm(U, axis=1, keepdims=True)])
    res = linprog(np.r_[np.zeros(U.shape[1]), -1.0], A_ub=A, b_ub=values,
                  bounds=[(None, None)] * U.shape[1] + [(0, None)])
    if res.status != 0 or not res.x[-1] > 1e-12:
        raise NumericalConsistencyError("half-space intersection has empty interior")
    try:
        hs = HalfspaceIntersection(np.hstack([U, -values[:, None]]), res.x[:-1])
    except QhullError as e:
        raise NumericalConsistencyError(f"half-space intersection failed: {e}") from None
    return hs.intersections


def is_support_function(f, tol=None):
    """Decide, up to ``tol``, whether a sampled field is a support function."""
    tol = default_tol(f) if tol is None else float(tol)
    if not tol > 0:
        raise ValueError("tol must be > 0")
    U = f.grid.nodes
    if f.n == 2:
        if not _uniform(f.grid):
            raise ValueError("the planar test needs a uniform grid")
        viol = -planar_curvature(f)
    else:
        if f.gradients is not None:
            P = f.values[:, None] * U + f.gradients
        else:
            P = _halfspace_points(U, f.values)
        # the contact hull reaches f at every node; the half-space body never exceeds it
        viol = np.abs(_hull_excess(U, P, f.values))
    i = int(np.argmax(viol))
    worst = max(float(viol[i]), 0.0)
    return ValidityVerdict(bool(worst <= tol), worst, U[i].copy(), tol)


# ------------------------------------------------------------ terminal points


@dataclass(frozen=True)
class TerminalInterval:
    t_min: float
    t_max: float
    capped_low: bool
    capped_high: bool
    tol: float
    resolution: float

    def to_dict(self):
        return {"t_min": self.t_min, "t_max": self.t_max, "capped_low": self.capped_low,
                "capped_high": self.capped_high, "tol": self.tol, "resolution": self.resolution,
                "label": f"at tol {self.tol:.3g}, resolution {self.resolution:.3g}"}


def _endpoint(f, allow_boundary):
    f = center(f)
    if is_interior(f, BOUNDARY_THRESH):
        return f.scaled(1 / math.sqrt(v2(f)))
    if not allow_boundary:
        raise BoundaryShapeError("endpoint is a point or a segment; pass allow_boundary")
    a = v1(f)
    if not a > 0:
        raise BoundaryShapeError("endpoint is a point")
    return f.scaled(1 / a)


def terminal_extension(K1, K2, grid=None, tol=None, allow_boundary=False,
                       bounds=SEARCH_BOUNDS, resolution=RESOLUTION):
    """Largest [t_min, t_max] containing [0, 1] on which (1 - t) h1 + t h2
    passes ``is_support_function``, located by bisection."""
    f = K1 if isinstance(K1, SupportField) else sample_body(K1, grid or build_grid(K1.dim))
    g = K2 if isinstance(K2, SupportField) else sample_body(K2, f.grid)
    h1, h2 = _endpoint(f, allow_boundary), _endpoint(g, allow_boundary)
    if tol is None:
        tol = 1e-6 * max(float(np.max(np.abs(h1.values))), float(np.max(np.abs(h2.values))))

    def ok(t):
        return is_support_function(combine([1 - t, t], [h1, h2]), tol).valid

    for name, h in (("first", h1), ("second", h2)):
        if not is_support_function(h, tol).valid:
            raise NumericalConsistencyError(f"{name} endpoint is not a support function at tol {tol:.3g}")

    def search(inside, outside):
        if ok(outside):
            return outside, True
        while abs(outside - inside) > resolution:
            mid = 0.5 * (inside + outside)
            if ok(mid):
                inside = mid
            else:
                outside = mid
        return inside, False

    lo, cap_lo = search(0.0, bounds[0])
    hi, cap_hi = search(1.0, bounds[1])
    return TerminalInterval(lo, hi, cap_lo, cap_hi, float(tol), resolution)


# ------------------------------------------------------------ lift to S^2


def lift_polar_rule(m=16):
    """Positive rule on [-1, 1] in z that integrates z^j (j < m, j != m - 2)
    and sqrt(1 - z^2) exactly, on Gauss-Legendre nodes."""
    z, _ = legendre.leggauss(m)
    powers = [j for j in range(m) if j != m - 2]
    A = np.vstack([z ** j for j in powers] + [np.sqrt(1 - z * z)])
    b = np.array([(1 - (-1) ** (j + 1)) / (j + 1) for j in powers] + [np.pi / 2])
    w, *_ = np.linalg.lstsq(A, b, rcond=None)
    if np.any(w <= 0) or np.abs(A @ w - b).max() > 1e-12:
        raise NumericalConsistencyError("lift polar rule is not positive or not exact")
    return z, w


def lift_grid(planar_grid, m=16, frame=None):
    """Product grid on S^2 whose azimuths are the nodes of ``planar_grid``,
    carried by the orthogonal ``frame`` when given.

    On it the lifted forms reduce exactly to the planar quadrature sums:
    the polar rule integrates 1, z^2 and sqrt(1 - z^2).
    """
    z, wz = lift_polar_rule(m)
    N = planar_grid.n_azimuth
    phi = planar_grid.theta
    Z, P = np.meshgrid(z, phi, indexing="ij")
    s = np.sqrt(1 - Z ** 2)
    nodes = np.stack([s * np.cos(P), s * np.sin(P), Z], axis=-1).reshape(-1, 3)
    label = ("lift",)
    if frame is not None:
        nodes = nodes @ frame.T
        label = ("lift",) + tuple(np.round(frame, 12).ravel().tolist())
    w = np.outer(wz, planar_grid.weights).ravel()
    return SphereGrid(3, nodes, w, N, m, planar_grid.azimuth_offset, z, label)


def embed_lift(f, frame=None, m=16):
    """Field of Phi(K x {0}) from a planar field of K.

    The target is the lift grid carried by Phi, so node (x sqrt(1 - z^2), z)
    of the frame coordinates gets the value sqrt(1 - z^2) h(x).  Gradients
    come from the lifted contact points, which makes the lift linear in f.
    """
    if f.n != 2:
        raise InvalidDimensionError("embed_lift takes a planar field")
    Phi = None if frame is None else np.asarray(frame, dtype=float)
    if Phi is not None and (Phi.shape != (3, 3) or np.abs(Phi.T @ Phi - np.eye(3)).max() > 1e-12):
        raise ValueError("frame must be an orthogonal 3 x 3 matrix")
    grid = lift_grid(f.grid, m, Phi)
    r = np.repeat(np.sqrt(1 - grid.z ** 2), f.grid.n_azimuth)
    h = np.tile(f.values, m)
    X = f.grid.nodes
    if f.gradients is not None:
        p2 = f.values[:, None] * X + f.gradients
    else:
        _, dh = planar_eval(f, f.grid.theta)
        p2 = f.values[:, None] * X + dh[:, None] * np.stack([-X[:, 1], X[:, 0]], axis=1)
    P = np.hstack([np.tile(p2, (m, 1)), np.zeros((grid.size, 1))])
    if Phi is not None:
        P = P @ Phi.T
    values = r * h
    source = None
    if f.source is not None:
        source = Embedded(f.source, (np.eye(3) if Phi is None else Phi)[:, :2].T)
    return SupportField(grid, values, tangent_gradient(grid, P, values), source)
