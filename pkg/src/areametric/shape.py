"""Oriented-shape distance, geodesics, the quotient distance over O(n), the
midpoint comparison and the distance between balls of different dimensions.

The quotient distance between shapes is argcosh of the smallest normalized
mixed area V2(K1, Phi K2) / sqrt(V2(K1) V2(K2)) over orthogonal Phi.
"""

from dataclasses import dataclass, field as dc_field
import math

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.spatial.transform import Rotation

from .bodies import Body, Moved
from .constants import wallis_table
from .errors import BoundaryShapeError, InvalidDimensionError
from .forms import (_atom_sum, center, is_interior, kernel_g, planar_eval, planar_parts,
                    steiner_point, v1, v2, v2_form)
from .hyperbolic import BOUNDARY_THRESH, dist_hyperboloid, normalize_v2, safe_arccosh
from .sphere import (PlanarMeasure, SupportField, build_grid, check_same_grid, combine,
                     sample_body, sphere_grid, sup_diff)

TWO_PI = 2 * np.pi
REFLECT_2D = np.diag([1.0, -1.0])


def as_field(K, grid=None):
    """Sample a body (or pass a field through) on ``grid``."""
    if isinstance(K, SupportField):
        if grid is not None:
            check_same_grid(K, SupportField(grid, np.zeros(grid.size)))
        return K
    if not isinstance(K, Body):
        raise TypeError(f"expected a Body or SupportField, got {type(K).__name__}")
    return sample_body(K, build_grid(K.dim) if grid is None else grid)


def _require_interior(f, what="body"):
    if not is_interior(f, BOUNDARY_THRESH):
        raise BoundaryShapeError(f"{what} is a point or a segment (zero intrinsic area)")


def _ratio(f, g):
    return v2_form(f, g) / math.sqrt(v2(f) * v2(g))


# ------------------------------------------------------------ oriented shapes


def dist_oriented(K1, K2, grid=None):
    """argcosh(V2(K1, K2) / sqrt(V2(K1) V2(K2))) after Steiner centering."""
    f = as_field(K1, grid)
    g = as_field(K2, f.grid)
    return dist_hyperboloid(normalize_v2(f), normalize_v2(g))


def geodesic_endpoints(K1, K2, grid=None, allow_boundary=False):
    """Steiner-centered endpoint fields, scaled to V2 = 1.

    With ``allow_boundary`` and a segment or point among the endpoints both
    fields are only centered, so that boundary paths such as the one between
    two orthogonal segments keep their natural scale.
    """
    f = as_field(K1, grid)
    g = as_field(K2, f.grid)
    f, g = center(f), center(g)
    interior = is_interior(f, BOUNDARY_THRESH) and is_interior(g, BOUNDARY_THRESH)
    if interior:
        return f.scaled(1 / math.sqrt(v2(f))), g.scaled(1 / math.sqrt(v2(g)))
    if not allow_boundary:
        raise BoundaryShapeError("geodesic endpoint is a point or a segment; pass allow_boundary")
    if not (v1(f) > 0 and v1(g) > 0):
        raise BoundaryShapeError("geodesic endpoint is a point")
    return f, g


def geodesic_point(K1, K2, t, grid=None, allow_boundary=False):
    """Field (1 - t) h1 + t h2 of the normalized endpoints; t is not arc length."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]; use terminal_extension to probe beyond")
    h1, h2 = geodesic_endpoints(K1, K2, grid, allow_boundary)
    return combine([1.0 - t, t], [h1, h2])


# ------------------------------------------------------------ planar rotations


def rotation_2d(theta, reflect=False):
    c, s = math.cos(theta), math.sin(theta)
    R = np.array([[c, -s], [s, c]])
    return R @ REFLECT_2D if reflect else R


def _reflection_index(grid):
    two_o = 2 * grid.azimuth_offset
    if abs(two_o - round(two_o)) > 1e-12:
        raise ValueError("planar reflection needs a grid symmetric under theta -> -theta")
    return np.mod(-np.arange(grid.n_azimuth) - int(round(two_o)), grid.n_azimuth)


def _index_transform(f, j, reflect):
    """Exact image of a sourceless planar field under a grid rotation by j
    cells, after the reflection (x, y) -> (x, -y) when ``reflect``."""
    grid = f.grid
    N = grid.n_azimuth
    m = f.planar_measure()
    vals, grads = f.values, f.gradients
    dens, dmid, ang = m.density, m.dmid, m.atom_angles
    if reflect:
        k = _reflection_index(grid)
        vals, dens, dmid, ang = vals[k], dens[k], -dmid[k], -ang
        grads = None if grads is None else grads[k] @ REFLECT_2D
    src = np.mod(np.arange(N) - j, N)
    R = rotation_2d(j * grid.step)
    grads = None if grads is None else grads[src] @ R.T
    meas = PlanarMeasure(ang + j * grid.step, m.atom_masses, dens[src], dmid[src])
    return SupportField(grid, vals[src], grads, None, meas)


def rotate_field(f, theta, reflect=False):
    """Field of Phi K for Phi = R_theta (composed with a reflection).

    Bodies with a source are resampled exactly.  Sourceless planar fields
    are shifted by whole cells exactly and interpolated otherwise.
    """
    n = f.n
    if n == 2:
        Q = rotation_2d(theta, reflect)
    else:
        Q = np.asarray(theta, dtype=float)
    if f.source is not None:
        return sample_body(Moved(f.source, Q, None), f.grid)
    if n != 2:
        raise ValueError("rotating a sampled field on S^2 needs its body")
    j = theta / f.grid.step
    if abs(j - round(j)) < 1e-12:
        return _index_transform(f, int(round(j)), reflect)
    base = _index_transform(f, 0, reflect) if reflect else f
    th = f.grid.theta - theta
    h, dh = planar_eval(base, th)
    X = f.grid.nodes
    T = np.stack([-X[:, 1], X[:, 0]], axis=1)
    p = planar_parts(base)
    dens = np.interp(np.mod(th, TWO_PI), np.append(f.grid.theta, f.grid.theta[0] + TWO_PI),
                     np.append(p.density, p.density[0]))
    meas = PlanarMeasure(p.angles + theta, p.masses, dens, dh)
    return SupportField(f.grid, h, dh[:, None] * T, None, meas)


def rotation_objective(K1, K2, theta, grid=None):
    """f(theta) = int k1(s) k2(s - theta) - k1'(s) k2'(s - theta) ds,
    which is twice the mixed area of K1 and R_theta K2."""
    f = as_field(K1, grid)
    g = as_field(K2, f.grid)
    if f.n != 2:
        raise InvalidDimensionError("rotation_objective is defined for n = 2")
    return 2.0 * v2_form(f, rotate_field(g, theta))


def _corr(a, b):
    """c[j] = sum_i a[i] b[i - j] (circular)."""
    return np.real(np.fft.ifft(np.fft.fft(a) * np.conj(np.fft.fft(b))))


def mixed_area_all_rotations(f, g):
    """V2(f, R_{j step} g) for every grid shift j, by circular correlation."""
    grid = check_same_grid(f, g)
    p, q = planar_parts(f), planar_parts(g)
    N = grid.n_azimuth
    shifts = grid.step * np.arange(N)
    w = grid.weights[0]
    total = 0.25 * w * (_corr(p.smooth, q.density) + _corr(p.density, q.smooth))
    if p.masses.size and q.masses.size:
        D = (p.angles[:, None] - q.angles[None, :]).ravel()
        M = np.outer(p.masses, q.masses).ravel()
        # G(D - shift) summed over pairs, as an atom sum in the shift variable
        total += 0.5 * _atom_sum(kernel_g, -shifts, -D, M)
    if p.masses.size:
        total += 0.5 * p.masses @ q.smooth_at(p.angles[:, None] - shifts[None, :])
    if q.masses.size:
        total += 0.5 * q.masses @ p.smooth_at(q.angles[:, None] + shifts[None, :])
    return total


# ------------------------------------------------------------ quotient distance


@dataclass
class ShapeDistanceReport:
    distance: float
    rotation: np.ndarray
    reflected: bool
    method: str
    trace: list = dc_field(default_factory=list)
    optimizers: list = dc_field(default_factory=list)
    diagnostics: dict = dc_field(default_factory=dict)

    @property
    def optimal_rotation(self):
        return self.rotation

    def to_dict(self):
        return {"distance": float(self.distance),
                "rotation": np.asarray(self.rotation).tolist(),
                "reflected": bool(self.reflected), "method": self.method,
                "trace": self.trace, "optimizers": self.optimizers,
                "diagnostics": self.diagnostics}


def _local_minima(r):
    return np.flatnonzero((r <= np.roll(r, 1)) & (r <= np.roll(r, -1)))


def _dist_shape_2d(f, g, n_candidates=12, xatol=1e-10, tie_rel=1e-9):
    grid = f.grid
    norm = math.sqrt(v2(f) * v2(g))
    step = grid.step
    classes = {False: g, True: _index_transform(g, 0, True) if g.source is None
               else rotate_field(g, 0.0, True)}
    cands = []
    kinks = {}
    grid_best = math.inf
    pa = planar_parts(f).angles
    for refl, gr in classes.items():
        r = mixed_area_all_rotations(f, gr) / norm
        grid_best = min(grid_best, float(r.min()))
        for j in _local_minima(r):
            cands.append((float(r[j]), bool(refl), int(j)))
        # the objective has kinks where an edge normal of each body coincide
        kinks[refl] = np.mod(pa[:, None] - planar_parts(gr).angles[None, :], TWO_PI).ravel()
    cands.sort()
    trace = []
    for r0, refl, j in cands[:n_candidates]:
        th0 = j * step

        def obj(th, refl=refl):
            return _ratio(f, rotate_field(g, th, refl))

        res = minimize_scalar(obj, bounds=(th0 - step, th0 + step), method="bounded",
                              options={"xatol": xatol})
        best_th, best_r = th0, obj(th0)
        if res.fun < best_r:
            best_th, best_r = float(res.x), float(res.fun)
        near = np.abs(np.mod(kinks[refl] - th0 + np.pi, TWO_PI) - np.pi) <= step
        for th in np.unique(kinks[refl][near]):
            val = obj(float(th))
            if val < best_r:
                best_th, best_r = float(th), val
        trace.append({"theta": float(np.mod(best_th, TWO_PI)), "reflected": refl,
                      "ratio": best_r, "grid_ratio": r0})
    trace.sort(key=lambda c: (c["ratio"], c["reflected"], c["theta"]))
    best = trace[0]
    # distinct optimal placements of K2
    scale = float(np.max(np.abs(g.values)))
    optima, fields = [], []
    for c in trace:
        if c["ratio"] > best["ratio"] + tie_rel * abs(best["ratio"]):
            break
        h = rotate_field(g, c["theta"], c["reflected"])
        if any(sup_diff(h, k) <= 1e-9 * scale for k in fields):
            continue
        fields.append(h)
        optima.append(c)
    return ShapeDistanceReport(
        safe_arccosh(best["ratio"]), rotation_2d(best["theta"], best["reflected"]),
        best["reflected"], "fft", trace, optima,
        {"grid": grid.n_azimuth, "grid_best_ratio": grid_best, "refined": len(trace)})


def fibonacci_sphere(count):
    i = np.arange(count) + 0.5
    z = 1 - 2 * i / count
    phi = np.pi * (3 - math.sqrt(5)) * i
    r = np.sqrt(1 - z * z)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def rotation_net(n_dirs=384, n_psi=16):
    """Deterministic SO(3) net: the image of e3 runs over a Fibonacci sphere
    and the spin about it over ``n_psi`` equispaced angles."""
    D = fibonacci_sphere(n_dirs)
    e = np.where(np.abs(D[:, :1]) < 0.9, np.array([[1.0, 0, 0]]), np.array([[0, 1.0, 0]]))
    a = np.cross(D, e)
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    b = np.cross(D, a)
    F = np.stack([a, b, D], axis=2)  # columns a, b, D
    psi = TWO_PI * np.arange(n_psi) / n_psi
    c, s = np.cos(psi), np.sin(psi)
    Rz = np.zeros((n_psi, 3, 3))
    Rz[:, 0, 0], Rz[:, 0, 1], Rz[:, 1, 0], Rz[:, 1, 1], Rz[:, 2, 2] = c, -s, s, c, 1
    return np.einsum("dij,pjk->dpik", F, Rz).reshape(-1, 3, 3)


def _coarse_ratios(f, body, rotations, chunk=256):
    """V2(f, Phi K) / sqrt(V2(f) V2(K)) for a stack of Phi on f's grid."""
    grid = f.grid
    U, w = grid.nodes, grid.weights
    from .constants import build_constants
    c = build_constants(3)
    vf = v2(f)
    out = np.empty(len(rotations))
    for i in range(0, len(rotations), chunk):
        Q = rotations[i:i + chunk]
        W = np.einsum("nj,rjk->rnk", U, Q).reshape(-1, 3)  # rows (Q^T u)^T
        h = body.support(W).reshape(len(Q), -1)
        P = body.support_points(W).reshape(len(Q), -1, 3)
        P = np.einsum("rij,rnj->rni", Q, P)
        G = P - h[:, :, None] * U[None]
        vfg = c.c_n * (h @ (w * f.values) - np.einsum("rni,ni,n->r", G, f.gradients, w) / c.lambda1)
        vgg = c.c_n * ((h * h) @ w - np.einsum("rni,rni,n->r", G, G, w) / c.lambda1)
        out[i:i + chunk] = vfg / np.sqrt(vf * vgg)
    return out


def _nelder_mead_rot(obj, x0, scales):
    """Nelder-Mead in a rotation-vector chart; the objective is kinked, so a
    stalled simplex is restarted at each smaller scale."""
    x, fun, nit = np.asarray(x0, dtype=float), math.inf, 0
    for scale in scales:
        simplex = np.vstack([x, x + scale * np.eye(3)])
        res = minimize(obj, x, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 4000,
                                "initial_simplex": simplex})
        nit += int(res.nit)
        if res.fun < fun:
            x, fun = res.x, float(res.fun)
    return x, fun, nit


def _dist_shape_3d(f, g, n_starts=8, n_polish=2, polish_margin=5e-3, coarse=12, medium=24,
                   n_dirs=384, n_psi=16):
    if f.source is None or g.source is None:
        raise ValueError("the shape distance on S^2 needs body descriptors")
    grid = f.grid
    K1 = Moved(f.source, np.eye(3), -steiner_point(f))
    K2 = Moved(g.source, np.eye(3), -steiner_point(g))
    fc = sample_body(K1, sphere_grid(coarse))
    net = rotation_net(n_dirs, n_psi)
    starts = []
    for refl, rots in ((False, net), (True, -net)):
        r = _coarse_ratios(fc, K2, rots)
        for i in np.argsort(r, kind="stable")[:n_starts]:
            starts.append((float(r[i]), refl, rots[i]))
    starts.sort(key=lambda s: s[0])
    starts = starts[:n_starts]

    def objective(grid_, Q0):
        ff = sample_body(K1, grid_)

        def obj(w):
            Q = Rotation.from_rotvec(w).as_matrix() @ Q0
            return _ratio(ff, sample_body(Moved(K2, Q, None), grid_))
        return obj

    # cheap refinement of every start on a medium grid
    gm = sphere_grid(min(medium, grid.n_polar))
    mids = []
    for r0, refl, Q0 in starts:
        x, fun, nit = _nelder_mead_rot(objective(gm, Q0), np.zeros(3), (0.1,))
        mids.append((fun, r0, refl, Rotation.from_rotvec(x).as_matrix() @ Q0, nit))
    mids.sort(key=lambda m: m[0])
    distinct = []
    for m in mids:
        if not any(m[2] == d[2] and np.abs(m[3] - d[3]).max() < 1e-3 for d in distinct):
            distinct.append(m)
    trace = []
    # runners-up are polished only while still competitive on the medium grid
    distinct = [m for m in distinct[:n_polish] if m[0] <= distinct[0][0] + polish_margin]
    for fun_m, r0, refl, Q0, nit_m in distinct:
        x, fun, nit = _nelder_mead_rot(objective(grid, Q0), np.zeros(3), (0.02, 0.004, 0.001))
        Q = Rotation.from_rotvec(x).as_matrix() @ Q0
        trace.append({"ratio": fun, "medium_ratio": fun_m, "coarse_ratio": r0, "reflected": refl,
                      "rotation": Q.tolist(), "iterations": nit_m + nit})
    trace.sort(key=lambda c: c["ratio"])
    best = trace[0]
    return ShapeDistanceReport(
        safe_arccosh(best["ratio"]), np.array(best["rotation"]), best["reflected"],
        "so3-grid", trace, [trace[0]],
        {"heuristic optimum": True, "grid": [grid.n_polar, grid.n_azimuth],
         "coarse_grid": [coarse, 2 * coarse], "medium_grid": [gm.n_polar, gm.n_azimuth],
         "net_size": 2 * len(net), "starts": len(starts),
         "medium_ratios": [m[0] for m in mids]})


def dist_shape(K1, K2, grid=None):
    """Distance between shapes (bodies up to similarities and reflections).

    n = 2: the normalized mixed area is evaluated at every grid rotation in
    both orientation classes by circular correlation, and the best local
    minima are refined by bounded Brent search on exact resamplings.
    n = 3: a deterministic rotation net on a coarse grid followed by
    Nelder-Mead in an axis-angle chart; the result is a heuristic optimum.
    """
    f = as_field(K1, grid)
    g = as_field(K2, f.grid)
    _require_interior(center(f), "first body")
    _require_interior(center(g), "second body")
    if f.n == 2:
        return _dist_shape_2d(f, g)
    if f.n == 3:
        return _dist_shape_3d(f, g)
    raise InvalidDimensionError(f"dist_shape supports n = 2 or 3, got {f.n}")


def align(K2, report, grid=None):
    """Field of Phi K2 for the optimal Phi of a shape-distance report."""
    g = as_field(K2, grid)
    if g.n == 2:
        R = report.rotation @ (REFLECT_2D if report.reflected else np.eye(2))
        theta = math.atan2(R[1, 0], R[0, 0])
        return rotate_field(g, theta, report.reflected)
    return rotate_field(g, report.rotation)


# ------------------------------------------------------------ comparison


def hyperbolic_mid(a, b, c, tol=1e-12):
    """Distance from a vertex to the midpoint of the opposite side of a
    hyperbolic triangle with sides a, b (from that vertex) and c."""
    for x in (a, b, c):
        if x < 0:
            raise ValueError("side lengths must be nonnegative")
    slack = tol * (1 + a + b + c)
    if a > b + c + slack or b > a + c + slack or c > a + b + slack:
        raise ValueError(f"({a}, {b}, {c}) violates the triangle inequality")
    return safe_arccosh((math.cosh(a) + math.cosh(b)) / (2 * math.cosh(c / 2)), window=1e-9)


@dataclass(frozen=True)
class MidpointCheck:
    d: float
    mid: float

    @property
    def gap(self):
        """d - mid; nonnegative under curvature bounded below by -1."""
        return self.d - self.mid

    @property
    def residual(self):
        return abs(self.d - self.mid)


def midpoint_law_check(KA, KB, KC, grid=None, quotient=False):
    """Compare d(C, M) with mid(d(C, A), d(C, B), d(A, B)) for the midpoint
    M of A and B.  ``quotient`` uses shape distances and the midpoint of A
    and the optimally aligned B."""
    fa = as_field(KA, grid)
    fb, fc = as_field(KB, fa.grid), as_field(KC, fa.grid)
    if not quotient:
        ha, hb, hc = (normalize_v2(x).field for x in (fa, fb, fc))
        m = 0.5 * (ha + hb)
        dist = dist_hyperboloid
        d_ab, d_ca, d_cb = dist(ha, hb), dist(hc, ha), dist(hc, hb)
        return MidpointCheck(dist_oriented(hc, m), hyperbolic_mid(d_ca, d_cb, d_ab))
    rep = dist_shape(fa, fb)
    hb = align(fb, rep)
    m = 0.5 * (normalize_v2(fa).field + normalize_v2(hb).field)
    d_ca = dist_shape(fc, fa).distance
    d_cb = dist_shape(fc, fb).distance
    return MidpointCheck(dist_shape(fc, m).distance, hyperbolic_mid(d_ca, d_cb, rep.distance))


def ball_distance(p, n):
    """d(B^p, B^n) from cosh d = sqrt(n-1) W_{n-1} / (sqrt(p-1) W_{p-1})."""
    if p < 2:
        raise BoundaryShapeError("B^p with p < 2 is a point or a segment")
    if p > n:
        raise ValueError("need p <= n")
    W = wallis_table(n)
    return safe_arccosh(math.sqrt(n - 1) * W[n - 1] / (math.sqrt(p - 1) * W[p - 1]))
