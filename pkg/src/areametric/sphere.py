"""Quadrature grids on S^1 and S^2 and sampled support fields.

A planar field also records its surface area measure in a linear form:
point masses (edge normals and lengths), the smooth curvature-radius density
at the nodes, and the derivative of the support at the nodes taken at face
midpoints.  Linear combinations of fields combine these records linearly.
"""

from dataclasses import dataclass, field as dc_field
import math

import numpy as np

from .bodies import Body, Combination, Moved, unit_circle
from .errors import GridMismatchError, InvalidDimensionError

DEFAULT_RESOLUTION = {2: 4096, 3: 64}
# half-width (radians) of the window in which an edge normal counts as
# sitting on a node; the planar kernel derivative uses the same window
KINK_WINDOW = 1e-7


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Quadrature nodes and weights on S^{n-1}.

    n = 2: ``n_azimuth`` equispaced angles starting at ``azimuth_offset`` cells.
    n = 3: Gauss-Legendre in z (``n_polar`` rings) times equispaced azimuth.
    """

    n: int
    nodes: np.ndarray
    weights: np.ndarray
    n_azimuth: int
    n_polar: int = 0
    azimuth_offset: float = 0.0
    z: np.ndarray = None
    label: tuple = ()

    @property
    def size(self):
        return len(self.weights)

    @property
    def azimuths(self):
        return 2 * np.pi * (np.arange(self.n_azimuth) + self.azimuth_offset) / self.n_azimuth

    @property
    def theta(self):
        """Node angles of a planar grid."""
        return self.azimuths

    @property
    def step(self):
        return 2 * np.pi / self.n_azimuth

    def key(self):
        return (self.n, self.n_polar, self.n_azimuth, float(self.azimuth_offset), self.label)

    def same_as(self, other):
        return self is other or self.key() == other.key()

    def integrate(self, values):
        return float(np.dot(self.weights, values))


def circle_grid(N, offset=0.0):
    theta = 2 * np.pi * (np.arange(N) + offset) / N
    return SphereGrid(2, unit_circle(theta), np.full(N, 2 * np.pi / N), N, 0, float(offset))


def sphere_grid(n_polar, n_azimuth=None, offset=0.5):
    """Gauss-Legendre x equispaced product grid on S^2.

    The default half-cell azimuth offset keeps nodes off the coordinate
    planes, where the kinks of axis-aligned polytopes sit.
    """
    n_azimuth = 2 * n_polar if n_azimuth is None else n_azimuth
    z, wz = np.polynomial.legendre.leggauss(n_polar)
    phi = 2 * np.pi * (np.arange(n_azimuth) + offset) / n_azimuth
    Z, P = np.meshgrid(z, phi, indexing="ij")
    s = np.sqrt(1 - Z ** 2)
    nodes = np.stack([s * np.cos(P), s * np.sin(P), Z], axis=-1).reshape(-1, 3)
    w = np.outer(wz, np.full(n_azimuth, 2 * np.pi / n_azimuth)).ravel()
    return SphereGrid(3, nodes, w, n_azimuth, n_polar, float(offset), z)


def build_grid(n, resolution=None):
    """Default grids: N equispaced nodes on S^1 (N a power of two), or
    ``resolution`` polar rings times 2*resolution azimuths on S^2."""
    if n not in (2, 3):
        raise InvalidDimensionError(f"grids exist for n = 2 or 3, got {n}")
    resolution = DEFAULT_RESOLUTION[n] if resolution is None else int(resolution)
    if resolution < 8:
        raise ValueError("resolution must be >= 8")
    if n == 2:
        if resolution & (resolution - 1):
            raise ValueError("planar resolution must be a power of two")
        return circle_grid(resolution)
    return sphere_grid(resolution)


# ------------------------------------------------------------ measures


@dataclass(frozen=True, eq=False)
class PlanarMeasure:
    """Surface area measure of a planar field in linear form."""

    atom_angles: np.ndarray
    atom_masses: np.ndarray
    density: np.ndarray   # curvature radius at the nodes
    dmid: np.ndarray      # d h / d theta at the nodes, face-midpoint convention

    def scaled(self, a):
        return PlanarMeasure(self.atom_angles, a * self.atom_masses, a * self.density, a * self.dmid)

    @staticmethod
    def combine(weights, measures):
        return PlanarMeasure(
            np.concatenate([m.atom_angles for m in measures]),
            np.concatenate([w * m.atom_masses for w, m in zip(weights, measures)]),
            sum(w * m.density for w, m in zip(weights, measures)),
            sum(w * m.dmid for w, m in zip(weights, measures)),
        )


def _spectral_measure(grid, values):
    """Measure of a field known only by samples (assumed band-limited)."""
    N = grid.n_azimuth
    k = np.fft.fftfreq(N, 1.0 / N)
    hat = np.fft.fft(values)
    density = np.real(np.fft.ifft((1 - k ** 2) * hat))
    if N % 2 == 0:
        k = k.copy()
        k[N // 2] = 0.0
    dmid = np.real(np.fft.ifft(1j * k * hat))
    return PlanarMeasure(np.zeros(0), np.zeros(0), density, dmid)


@dataclass(frozen=True, eq=False)
class SupportField:
    grid: SphereGrid
    values: np.ndarray
    gradients: np.ndarray = None
    source: Body = None
    measure: PlanarMeasure = None
    cache: dict = dc_field(default_factory=dict, repr=False)

    @property
    def n(self):
        return self.grid.n

    def planar_measure(self):
        if self.n != 2:
            raise InvalidDimensionError("planar measure requested on S^2")
        if self.measure is None:
            if "spectral" not in self.cache:
                self.cache["spectral"] = _spectral_measure(self.grid, self.values)
            return self.cache["spectral"]
        return self.measure

    def derivative(self):
        """Angular derivative h'(theta) of a planar field (from gradients)."""
        T = np.stack([-self.grid.nodes[:, 1], self.grid.nodes[:, 0]], axis=1)
        return np.einsum("ij,ij->i", self.gradients, T)

    def scaled(self, a):
        return combine([a], [self])

    def __add__(self, other):
        return combine([1.0, 1.0], [self, other])

    def __sub__(self, other):
        return combine([1.0, -1.0], [self, other])

    def __mul__(self, a):
        return combine([a], [self])

    __rmul__ = __mul__

    def __neg__(self):
        return combine([-1.0], [self])


def check_same_grid(*fields):
    g = fields[0].grid
    for f in fields[1:]:
        if not g.same_as(f.grid):
            raise GridMismatchError("fields live on different grids")
    return g


def combine(weights, fields):
    """sum_i w_i f_i, carrying gradients, measures and (for w_i >= 0) sources."""
    weights = [float(w) for w in weights]
    grid = check_same_grid(*fields)
    values = sum(w * f.values for w, f in zip(weights, fields))
    grads = None
    if all(f.gradients is not None for f in fields):
        grads = sum(w * f.gradients for w, f in zip(weights, fields))
    source = None
    if all(f.source is not None for f in fields) and all(w >= 0 for w in weights):
        source = Combination(tuple((w, f.source) for w, f in zip(weights, fields)))
        if len(fields) == 1 and weights[0] == 1.0:
            source = fields[0].source
    measure = None
    if grid.n == 2 and any(f.measure is not None for f in fields):
        measure = PlanarMeasure.combine(weights, [f.planar_measure() for f in fields])
    return SupportField(grid, values, grads, source, measure)


def field_from_values(grid, values, gradients=None):
    """Field from raw samples (no body, no measure record)."""
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.size,):
        raise GridMismatchError(f"expected {grid.size} values, got {values.shape}")
    if gradients is not None:
        gradients = np.asarray(gradients, dtype=float)
    return SupportField(grid, values, gradients)


def tangent_gradient(grid, points, values):
    return points - values[:, None] * grid.nodes


def sample_body(body, grid):
    """Support values and spherical gradients (tangential part of the
    maximizer) of ``body`` at the grid nodes."""
    if body.dim != grid.n:
        raise InvalidDimensionError(f"body of dimension {body.dim} on a grid of S^{grid.n - 1}")
    U = grid.nodes
    values = body.support(U)
    grads = tangent_gradient(grid, body.support_points(U, "low"), values)
    measure = None
    if grid.n == 2:
        theta = grid.theta
        # mean of the contact points just before and after each node: the
        # one-sided derivative off the edge normals, their mean on them
        mid = 0.5 * (body.support_points(unit_circle(theta - KINK_WINDOW), "mid")
                     + body.support_points(unit_circle(theta + KINK_WINDOW), "mid"))
        T = np.stack([-U[:, 1], U[:, 0]], axis=1)
        a, m = body.atoms()
        measure = PlanarMeasure(np.asarray(a, float), np.asarray(m, float),
                                np.asarray(body.curvature_density(theta), float),
                                np.einsum("ij,ij->i", mid, T))
    return SupportField(grid, values, grads, body, measure)


def translate_field(f, t):
    """Field of the body translated by t."""
    t = np.asarray(t, dtype=float)
    X = f.grid.nodes
    lin = X @ t
    grads = None if f.gradients is None else f.gradients + (t[None, :] - lin[:, None] * X)
    measure = None
    if f.measure is not None:
        T = np.stack([-X[:, 1], X[:, 0]], axis=1)
        m = f.measure
        measure = PlanarMeasure(m.atom_angles, m.atom_masses, m.density, m.dmid + T @ t)
    source = None if f.source is None else Moved(f.source, np.eye(f.n), t)
    return SupportField(f.grid, f.values + lin, grads, source, measure)


# ------------------------------------------------------------ norms


def inner_l2(f, g):
    check_same_grid(f, g)
    return float(np.dot(f.grid.weights, f.values * g.values))


def inner_grad(f, g):
    check_same_grid(f, g)
    if f.gradients is None or g.gradients is None:
        raise ValueError("inner_grad needs gradients on both fields")
    return float(np.dot(f.grid.weights, np.einsum("ij,ij->i", f.gradients, g.gradients)))


def sup_diff(f, g):
    """Discrete Hausdorff distance max_i |f_i - g_i|."""
    check_same_grid(f, g)
    return float(np.max(np.abs(f.values - g.values)))


def dist_l2(f, g):
    d = f - g
    return math.sqrt(max(inner_l2(d, d), 0.0))


def dist_h1(f, g):
    d = f - g
    return math.sqrt(max(inner_l2(d, d) + inner_grad(d, d), 0.0))


# ------------------------------------------------------------ CSV


def field_csv(f):
    """CSV dump: ``theta,value,grad`` on S^1, or
    ``polar,azimuth,weight,value,gradx,grady,gradz`` on S^2."""
    lines = []
    if f.n == 2:
        lines.append("theta,value,grad")
        d = f.derivative() if f.gradients is not None else np.full(f.grid.size, np.nan)
        for t, v, g in zip(f.grid.theta, f.values, d):
            lines.append(f"{t:.17g},{v:.17g},{g:.17g}")
    else:
        lines.append("polar,azimuth,weight,value,gradx,grady,gradz")
        X = f.grid.nodes
        polar = np.arccos(np.clip(X[:, 2], -1, 1))
        azim = np.mod(np.arctan2(X[:, 1], X[:, 0]), 2 * np.pi)
        G = f.gradients if f.gradients is not None else np.full_like(X, np.nan)
        for p, a, w, v, g in zip(polar, azim, f.grid.weights, f.values, G):
            lines.append(f"{p:.17g},{a:.17g},{w:.17g},{v:.17g},{g[0]:.17g},{g[1]:.17g},{g[2]:.17g}")
    return "\n".join(lines) + "\n"
