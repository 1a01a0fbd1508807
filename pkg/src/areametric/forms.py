"""Intrinsic functionals of support fields: V1, the mixed area V2, mean,
Steiner point and the Alexandrov-Fenchel defect, plus independent oracles.

On S^2 the mixed area is the product-rule quadrature of
c_n ((h, k) - (grad h, grad k) / (n - 1)).

On S^1 the same bilinear form is evaluated through surface area measures.
Writing G(x) = (pi - x) sin(x) / (2 pi) on [0, 2 pi), every planar support
function is h = G * dS + <s, x> with s its Steiner point, and

    V2(h, k) = 1/2 double integral of G(a - b) dS_h(a) dS_k(b).

Each measure splits into point masses (edges) and a density (curvature
radius).  Mass-mass terms are summed exactly, mass-density terms use the
node values of the smooth part G * rho (cubic Hermite off the nodes) and
the density-density term is a trapezoid sum.  The result is exact for
polygons and varies continuously when a body is rotated by a fraction of a
grid cell.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .bodies import Polytope, unit_circle
from .constants import build_constants
from .errors import InvalidDimensionError
from .sphere import KINK_WINDOW, check_same_grid, translate_field

TWO_PI = 2 * np.pi


# ------------------------------------------------------------ kernel


def kernel_g(x):
    """Green kernel of h + h'' on the circle, one kink at 0."""
    x = np.mod(x, TWO_PI)
    return (np.pi - x) * np.sin(x) / TWO_PI


def kernel_dg(x):
    """Derivative of ``kernel_g``; 0 (the mean of the one-sided values) within
    ``KINK_WINDOW`` of the kink."""
    x = np.mod(x, TWO_PI)
    d = (-np.sin(x) + (np.pi - x) * np.cos(x)) / TWO_PI
    at_kink = (x < KINK_WINDOW) | (x > TWO_PI - KINK_WINDOW)
    return np.where(at_kink, 0.0, d)


def _atom_sum(fn, theta, angles, masses, chunk=1 << 22):
    """sum_j masses_j fn(theta - angles_j) for a vector of theta."""
    theta = np.asarray(theta, dtype=float)
    out = np.zeros(theta.shape)
    if masses.size == 0:
        return out
    step = max(1, chunk // max(1, masses.size))
    flat = theta.reshape(-1)
    res = out.reshape(-1)
    for i in range(0, flat.size, step):
        res[i:i + step] = fn(flat[i:i + step, None] - angles[None, :]) @ masses
    return out


def hermite_periodic(y, dy, step, theta, offset=0.0):
    """Cubic Hermite interpolation of periodic node data at angles theta."""
    N = y.size
    s = np.mod(np.asarray(theta, dtype=float) / step - offset, N)
    i = np.floor(s).astype(int) % N
    t = s - np.floor(s)
    j = (i + 1) % N
    t2, t3 = t * t, t * t * t
    h00 = 2 * t3 - 3 * t2 + 1
    h10 = t3 - 2 * t2 + t
    h01 = -2 * t3 + 3 * t2
    h11 = t3 - t2
    return h00 * y[i] + h01 * y[j] + step * (h10 * dy[i] + h11 * dy[j])


def hermite_periodic_deriv(y, dy, step, theta, offset=0.0):
    """Derivative in theta of ``hermite_periodic``."""
    N = y.size
    s = np.mod(np.asarray(theta, dtype=float) / step - offset, N)
    i = np.floor(s).astype(int) % N
    t = s - np.floor(s)
    j = (i + 1) % N
    t2 = t * t
    d00 = 6 * t2 - 6 * t
    d10 = 3 * t2 - 4 * t + 1
    d01 = -6 * t2 + 6 * t
    d11 = 3 * t2 - 2 * t
    return (d00 * y[i] + d01 * y[j]) / step + d10 * dy[i] + d11 * dy[j]


@dataclass(frozen=True)
class PlanarParts:
    """Decomposition of a planar field used by the mixed-area form."""

    angles: np.ndarray
    masses: np.ndarray
    density: np.ndarray
    smooth: np.ndarray   # G * density at the nodes
    dsmooth: np.ndarray  # its derivative
    steiner: np.ndarray
    step: float
    offset: float

    def smooth_at(self, theta):
        return hermite_periodic(self.smooth, self.dsmooth, self.step, theta, self.offset)

    def dsmooth_at(self, theta):
        return hermite_periodic_deriv(self.smooth, self.dsmooth, self.step, theta, self.offset)


def planar_parts(f):
    if "parts" in f.cache:
        return f.cache["parts"]
    g = f.grid
    m = f.planar_measure()
    theta = g.theta
    X = g.nodes
    T = np.stack([-X[:, 1], X[:, 0]], axis=1)
    ga = _atom_sum(kernel_g, theta, m.atom_angles, m.atom_masses)
    dga = _atom_sum(kernel_dg, theta, m.atom_angles, m.atom_masses)
    # int (G * atoms) x = 1/4 sum m x(nu); the remainder is smooth
    moment = 0.25 * (m.atom_masses @ unit_circle(m.atom_angles)) if m.atom_masses.size else np.zeros(2)
    s = ((g.weights * (f.values - ga)) @ X + moment) / np.pi
    parts = PlanarParts(m.atom_angles, m.atom_masses, m.density,
                        f.values - ga - X @ s, m.dmid - dga - T @ s, s, g.step, g.azimuth_offset)
    f.cache["parts"] = parts
    return parts


def planar_eval(f, theta):
    """Support value and angular derivative of a planar field at arbitrary
    angles, from its measure decomposition (exact at the nodes)."""
    p = planar_parts(f)
    theta = np.asarray(theta, dtype=float)
    X = unit_circle(theta)
    h = _atom_sum(kernel_g, theta, p.angles, p.masses) + p.smooth_at(theta) + X @ p.steiner
    T = np.stack([-X[..., 1], X[..., 0]], axis=-1)
    dh = _atom_sum(kernel_dg, theta, p.angles, p.masses) + p.dsmooth_at(theta) + T @ p.steiner
    return h, dh


def _planar_v2(f, g):
    p, q = planar_parts(f), planar_parts(g)
    w = f.grid.weights
    total = 0.25 * (np.dot(w, p.smooth * q.density) + np.dot(w, q.smooth * p.density))
    if p.masses.size and q.masses.size:
        total += 0.5 * _atom_sum(kernel_g, p.angles, q.angles, q.masses) @ p.masses
    if p.masses.size:
        total += 0.5 * np.dot(p.masses, q.smooth_at(p.angles))
    if q.masses.size:
        total += 0.5 * np.dot(q.masses, p.smooth_at(q.angles))
    return float(total)


# ------------------------------------------------------------ forms


def v2_form(f, g):
    """Mixed area V2(f, g); bilinear and symmetric."""
    grid = check_same_grid(f, g)
    if grid.n == 2:
        return _planar_v2(f, g)
    return quadrature_v2_form(f, g)


def v2(f):
    return v2_form(f, f)


def integral(f):
    """int h over the sphere; on S^1 the kinks at edge normals are integrated exactly."""
    if f.n == 2:
        p = planar_parts(f)
        # int G = 1 and the linear part integrates to 0
        return float(np.dot(f.grid.weights, p.smooth) + p.masses.sum())
    return f.grid.integrate(f.values)


def v1(f):
    """V1 = (1 / kappa_{n-1}) int h."""
    c = build_constants(f.n)
    return integral(f) / c.kappa[f.n - 1]


def mean(f):
    return integral(f) / build_constants(f.n).sphere_area


def steiner_point(f):
    """(1 / kappa_n) int h(x) x."""
    if f.n == 2:
        return planar_parts(f).steiner.copy()
    c = build_constants(f.n)
    return (f.grid.weights * f.values) @ f.grid.nodes / c.kappa[f.n]


def center(f):
    """Steiner-centered copy of a field (values, gradients, measure, source)."""
    return translate_field(f, -steiner_point(f))


def quadrature_v1(f):
    """Plain quadrature (1 / kappa_{n-1}) sum w h, without kink handling."""
    return f.grid.integrate(f.values) / build_constants(f.n).kappa[f.n - 1]


def quadrature_v2_form(f, g):
    """c_n (sum w h k - sum w grad h . grad k / (n - 1)) from sampled values
    and gradients, on either sphere."""
    grid = check_same_grid(f, g)
    if f.gradients is None or g.gradients is None:
        raise ValueError("quadrature form needs gradients")
    c = build_constants(grid.n)
    w = grid.weights
    l2 = np.dot(w, f.values * g.values)
    gr = np.dot(w, np.einsum("ij,ij->i", f.gradients, g.gradients))
    return float(c.c_n * (l2 - gr / c.lambda1))


def af_defect(f, g):
    """V2(f, g)^2 - V2(f) V2(g); nonnegative for convex bodies."""
    return v2_form(f, g) ** 2 - v2_form(f, f) * v2_form(g, g)


@dataclass(frozen=True)
class FormReport:
    v1: float
    v2: float
    mean: float
    steiner: np.ndarray
    valid_cone: bool

    def to_dict(self):
        return {"v1": self.v1, "v2": self.v2, "mean": self.mean,
                "steiner": [float(x) for x in self.steiner], "valid_cone": self.valid_cone}


def form_report(f):
    a, b, m = v1(f), v2(f), mean(f)
    return FormReport(a, b, m, steiner_point(f), bool(b > 0 and m > 0))


def is_interior(f, thresh=1e-9):
    """Neither a point nor a segment: V2 > thresh * V1^2."""
    a, b = v1(f), v2(f)
    return bool(a > 0 and b > thresh * a * a)


# ------------------------------------------------------------ oracles


def _hull2(V):
    V = np.asarray(V, dtype=float)
    try:
        return V[ConvexHull(V).vertices]
    except (QhullError, ValueError):
        return None


def polygon_area(V):
    """Shoelace area of the convex hull (0 when degenerate)."""
    C = _hull2(V)
    if C is None:
        return 0.0
    x, y = C[:, 0], C[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def polygon_perimeter(V):
    C = _hull2(V)
    if C is None:
        P = Polytope(V).hull_cycle()
        return 2.0 * float(np.linalg.norm(P[-1] - P[0]))
    return float(np.sum(np.linalg.norm(np.roll(C, -1, axis=0) - C, axis=1)))


def polygon_mixed_area(VK, VL):
    """V2(K, L) = 1/2 sum over edges of L of h_K(outer normal) * length."""
    C = _hull2(VL)
    if C is None:
        C = Polytope(VL).hull_cycle()
    E = np.roll(C, -1, axis=0) - C
    length = np.linalg.norm(E, axis=1)
    keep = length > 0
    normals = np.stack([E[keep, 1], -E[keep, 0]], axis=1) / length[keep, None]
    hK = (normals @ np.asarray(VK, dtype=float).T).max(axis=1)
    return 0.5 * float(np.dot(hK, length[keep]))


def polygon_oracles(V):
    return {"area": polygon_area(V), "perimeter": polygon_perimeter(V),
            "mixed_area": lambda other: polygon_mixed_area(V, other)}


def polyhedron_oracles(V):
    try:
        return {"surface_area": float(ConvexHull(np.asarray(V, dtype=float)).area)}
    except (QhullError, ValueError):
        return {"surface_area": 0.0}


def _probe_directions(n, count):
    if n == 2:
        return unit_circle(TWO_PI * np.arange(count) / count)
    # Fibonacci sphere
    i = np.arange(count) + 0.5
    z = 1 - 2 * i / count
    phi = np.pi * (3 - math.sqrt(5)) * i
    r = np.sqrt(1 - z * z)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def steiner_fit_mc(body, epsilons, samples=10 ** 6, seed=0, directions=None):
    """Estimate V1 and V2 from Monte-Carlo volumes of K + eps B.

    A point x lies in K + eps B iff max_u <u, x> - h(u) <= eps; the maximum
    runs over a fixed direction set, so one sample set serves every eps.
    The volumes are fitted by least squares with the polynomial
    sum_i eps^{n-i} kappa_{n-i} V_i, the leading V_0 = 1 being held fixed.
    """
    n = body.dim
    if n not in (2, 3):
        raise InvalidDimensionError("Monte-Carlo fit supports n = 2 or 3")
    eps = np.asarray(sorted(epsilons), dtype=float)
    if eps.size < n + 1 or np.unique(eps).size != eps.size or np.any(eps <= 0):
        raise ValueError(f"need at least {n + 1} distinct positive epsilons")
    if directions is None:
        directions = 720 if n == 2 else 4000
    D = _probe_directions(n, directions)
    hD = body.support(D)
    E = np.eye(n)
    hi = body.support(E) + eps[-1]
    lo = -body.support(-E) - eps[-1]
    # enlarge so that the coarse direction set never cuts the box
    pad = (hi - lo) * 0.02
    hi, lo = hi + pad, lo - pad
    box = float(np.prod(hi - lo))
    rng = np.random.Generator(np.random.Philox(seed))
    counts = np.zeros(eps.size)
    chunk = max(1, (1 << 23) // directions)
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        x = lo + (hi - lo) * rng.random((m, n))
        gauge = (x @ D.T - hD).max(axis=1)
        counts += (gauge[:, None] <= eps[None, :]).sum(axis=0)
        done += m
    vol = box * counts / samples
    kap = build_constants(n).kappa
    # vol - kappa_n eps^n = sum_{j<n} a_j eps^j with a_j = kappa_j V_{n-j}
    A = np.stack([eps ** j for j in range(n)], axis=1)
    coef, *_ = np.linalg.lstsq(A, vol - kap[n] * eps ** n, rcond=None)
    return {"v1_est": float(coef[n - 1] / kap[n - 1]), "v2_est": float(coef[n - 2] / kap[n - 2]),
            "epsilons": eps.tolist(), "volumes": vol.tolist(), "samples": int(samples), "seed": int(seed)}
