"""Symbolic convex bodies with exact support functions and support points.

Every descriptor is an immutable dataclass.  Directions are passed as arrays
of shape (M, n) so that a whole quadrature grid is evaluated in one call.
Planar bodies additionally expose their surface area measure (smooth
curvature-radius density plus point masses for edges), which the planar
mixed-area form uses to stay exact on polygons.
"""

from dataclasses import dataclass
from functools import lru_cache
import json
import math

import numpy as np
from scipy import integrate
from scipy.spatial import ConvexHull, QhullError

from .errors import BodyParseError, InvalidDimensionError

TIE_TOL = 1e-10
ORTHO_TOL = 1e-12

# semi-axes of the half-ellipse used in the non-uniqueness example
HALF_ELLIPSE_A = math.sqrt(2.0)
HALF_ELLIPSE_B = 1.0 / math.sqrt(2.0)


def _as_dirs(U, n):
    U = np.asarray(U, dtype=float)
    if U.ndim == 1:
        U = U[None, :]
    if U.shape[-1] != n:
        raise InvalidDimensionError(f"directions have dimension {U.shape[-1]}, body has {n}")
    return U


def angles_of(X):
    """Polar angle in [0, 2 pi) of planar vectors."""
    X = np.asarray(X, dtype=float)
    return np.mod(np.arctan2(X[..., 1], X[..., 0]), 2 * np.pi)


def unit_circle(theta):
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def _perp(U):
    return np.stack([-U[:, 1], U[:, 0]], axis=1)


def _empty_atoms():
    return np.zeros(0), np.zeros(0)


class Body:
    """Common interface.  Subclasses implement ``support``, ``support_points``
    and, for n = 2, ``curvature_density`` and ``atoms``."""

    dim: int

    def support(self, U):
        raise NotImplementedError

    def support_points(self, U, side="low"):
        """Maximizers of <u, .>.  ``side="low"`` breaks ties deterministically
        (lowest vertex index); ``side="mid"`` returns the midpoint of the face."""
        raise NotImplementedError

    def curvature_density(self, theta):
        """Radius of curvature as a function of the normal angle (n = 2).
        At a jump the mean of the one-sided values is returned."""
        raise NotImplementedError

    def atoms(self):
        """Point masses of the planar surface area measure: (angles, lengths)."""
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    def __add__(self, other):
        return Combination(((1.0, self), (1.0, other)))

    def __rmul__(self, w):
        return Combination(((float(w), self),))

    def _need_planar(self):
        if self.dim != 2:
            raise InvalidDimensionError("surface area measure is only provided for n = 2")


@dataclass(frozen=True, eq=False)
class Point(Body):
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float).reshape(-1))

    @property
    def dim(self):
        return self.p.size

    def support(self, U):
        return _as_dirs(U, self.dim) @ self.p

    def support_points(self, U, side="low"):
        U = _as_dirs(U, self.dim)
        return np.broadcast_to(self.p, U.shape).copy()

    def curvature_density(self, theta):
        self._need_planar()
        return np.zeros(np.shape(theta))

    def atoms(self):
        self._need_planar()
        return _empty_atoms()

    def to_dict(self):
        return {"dim": self.dim, "type": "point", "p": self.p.tolist()}


@dataclass(frozen=True, eq=False)
class Segment(Body):
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float).reshape(-1)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if a.shape != b.shape:
            raise InvalidDimensionError("segment endpoints differ in dimension")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def dim(self):
        return self.a.size

    def support(self, U):
        U = _as_dirs(U, self.dim)
        return np.maximum(U @ self.a, U @ self.b)

    def support_points(self, U, side="low"):
        U = _as_dirs(U, self.dim)
        diff = U @ (self.b - self.a)
        out = np.where((diff > TIE_TOL)[:, None], self.b, self.a)
        if side == "mid":
            tie = np.abs(diff) <= TIE_TOL
            out[tie] = 0.5 * (self.a + self.b)
        return out

    def curvature_density(self, theta):
        self._need_planar()
        return np.zeros(np.shape(theta))

    def atoms(self):
        self._need_planar()
        d = self.b - self.a
        length = float(np.hypot(*d))
        if length == 0.0:
            return _empty_atoms()
        nu = math.atan2(-d[0], d[1])
        return np.mod(np.array([nu, nu + math.pi]), 2 * np.pi), np.array([length, length])

    def to_dict(self):
        return {"dim": self.dim, "type": "segment", "a": self.a.tolist(), "b": self.b.tolist()}


@dataclass(frozen=True, eq=False)
class Polytope(Body):
    vertices: np.ndarray

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if V.shape[0] < 1:
            raise BodyParseError("polytope needs at least one vertex")
        object.__setattr__(self, "vertices", V)

    @property
    def dim(self):
        return self.vertices.shape[1]

    def support(self, U):
        return (_as_dirs(U, self.dim) @ self.vertices.T).max(axis=1)

    def support_points(self, U, side="low"):
        U = _as_dirs(U, self.dim)
        V = self.vertices
        P = U @ V.T
        h = P.max(axis=1)
        tied = P >= h[:, None] - TIE_TOL
        if side != "mid":
            return V[np.argmax(tied, axis=1)]
        if self.dim == 2:
            # the face is the segment between the extreme tied vertices
            T = _perp(U) @ V.T
            lo = np.where(tied, T, np.inf).argmin(axis=1)
            hi = np.where(tied, T, -np.inf).argmax(axis=1)
            return 0.5 * (V[lo] + V[hi])
        t = tied.astype(float)
        return (t @ V) / t.sum(axis=1, keepdims=True)

    def hull_cycle(self):
        """Planar hull vertices in counter-clockwise order."""
        self._need_planar()
        V = self.vertices
        if V.shape[0] >= 3:
            try:
                return V[ConvexHull(V).vertices]
            except QhullError:
                pass
        # collinear or tiny input: the extreme points along the main direction
        c = V.mean(axis=0)
        _, _, vt = np.linalg.svd(V - c)
        s = (V - c) @ vt[0]
        return V[[int(np.argmin(s)), int(np.argmax(s))]]

    def curvature_density(self, theta):
        self._need_planar()
        return np.zeros(np.shape(theta))

    def atoms(self):
        self._need_planar()
        C = self.hull_cycle()
        if C.shape[0] == 1:
            return _empty_atoms()
        E = np.roll(C, -1, axis=0) - C
        length = np.hypot(E[:, 0], E[:, 1])
        keep = length > 0
        return np.mod(np.arctan2(-E[keep, 0], E[keep, 1]), 2 * np.pi), length[keep]

    def to_dict(self):
        return {"dim": self.dim, "type": "polytope", "vertices": self.vertices.tolist()}


@dataclass(frozen=True, eq=False)
class Ball(Body):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(-1))
        if not self.radius >= 0:
            raise BodyParseError("radius: must be >= 0")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.center.size

    def support(self, U):
        U = _as_dirs(U, self.dim)
        return U @ self.center + self.radius * np.linalg.norm(U, axis=1)

    def support_points(self, U, side="low"):
        U = _as_dirs(U, self.dim)
        return self.center + self.radius * U / np.linalg.norm(U, axis=1, keepdims=True)

    def curvature_density(self, theta):
        self._need_planar()
        return np.full(np.shape(theta), self.radius)

    def atoms(self):
        self._need_planar()
        return _empty_atoms()

    def to_dict(self):
        return {"dim": self.dim, "type": "ball", "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class Ellipsoid(Body):
    """{c + S^{1/2} y : |y| <= 1} for a positive semidefinite shape matrix S."""

    center: np.ndarray
    shape: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(-1)
        S = np.asarray(self.shape, dtype=float)
        if S.shape != (c.size, c.size):
            raise BodyParseError("shape: must be an n x n matrix matching center")
        if not np.allclose(S, S.T, atol=1e-12 * max(1.0, np.abs(S).max())):
            raise BodyParseError("shape: must be symmetric")
        S = 0.5 * (S + S.T)
        if np.linalg.eigvalsh(S).min() < -1e-12 * max(1.0, np.abs(S).max()):
            raise BodyParseError("shape: must be positive semidefinite")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "shape", S)

    @property
    def dim(self):
        return self.center.size

    def _quad(self, U):
        return np.maximum(np.einsum("ij,jk,ik->i", U, self.shape, U), 0.0)

    def support(self, U):
        U = _as_dirs(U, self.dim)
        return U @ self.center + np.sqrt(self._quad(U))

    def support_points(self, U, side="low"):
        U = _as_dirs(U, self.dim)
        q = np.sqrt(self._quad(U))
        SU = U @ self.shape
        scale = max(1.0, float(np.abs(self.shape).max()))
        safe = q > 1e-14 * scale
        out = np.zeros_like(U)
        out[safe] = SU[safe] / q[safe, None]
        # u in the kernel of S: the whole body is the face; use its center
        return self.center + out

    def _rank_split(self):
        w, v = np.linalg.eigh(self.shape)
        tol = 1e-14 * max(1.0, float(np.abs(w).max()))
        return w, v, int(np.sum(w > tol))

    def curvature_density(self, theta):
        self._need_planar()
        w, v, rank = self._rank_split()
        if rank < 2:
            return np.zeros(np.shape(theta))
        X = unit_circle(theta).reshape(-1, 2)
        q = self._quad(X)
        return (np.linalg.det(self.shape) / q ** 1.5).reshape(np.shape(theta))

    def atoms(self):
        self._need_planar()
        w, v, rank = self._rank_split()
        if rank != 1:
            return _empty_atoms()
        half = math.sqrt(w[-1]) * v[:, -1]
        return Segment(self.center - half, self.center + half).atoms()

    def to_dict(self):
        return {"dim": self.dim, "type": "ellipsoid", "center": self.center.tolist(),
                "shape": self.shape.tolist()}


@dataclass(frozen=True, eq=False)
class Combination(Body):
    """Minkowski combination sum_i w_i K_i with w_i >= 0."""

    terms: tuple

    def __post_init__(self):
        terms = tuple((float(w), b) for w, b in self.terms)
        if not terms:
            raise BodyParseError("terms: combination needs at least one term")
        for i, (w, b) in enumerate(terms):
            if not w >= 0:
                raise BodyParseError(f"terms[{i}].weight: must be >= 0")
            if not isinstance(b, Body):
                raise BodyParseError(f"terms[{i}].body: not a body descriptor")
        dims = {b.dim for _, b in terms}
        if len(dims) != 1:
            raise InvalidDimensionError("combination terms differ in dimension")
        object.__setattr__(self, "terms", terms)

    @property
    def dim(self):
        return self.terms[0][1].dim

    def support(self, U):
        return sum(w * b.support(U) for w, b in self.terms)

    def support_points(self, U, side="low"):
        return sum(w * b.support_points(U, side) for w, b in self.terms)

    def curvature_density(self, theta):
        return sum(w * b.curvature_density(theta) for w, b in self.terms)

    def atoms(self):
        parts = [(a, w * m) for w, b in self.terms for a, m in [b.atoms()]]
        return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])

    def to_dict(self):
        return {"dim": self.dim, "type": "combination",
                "terms": [{"weight": w, "body": b.to_dict()} for w, b in self.terms]}


def check_orthogonal(Q, n=None):
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or (n is not None and Q.shape[0] != n):
        raise BodyParseError("rotation: must be a square matrix of the body dimension")
    if np.abs(Q.T @ Q - np.eye(Q.shape[0])).max() > ORTHO_TOL:
        raise BodyParseError("rotation: matrix is not orthogonal within 1e-12")
    return Q


@dataclass(frozen=True, eq=False)
class Moved(Body):
    """Image of ``inner`` under x -> Q x + t (Q orthogonal, reflections allowed)."""

    inner: Body
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        n = self.inner.dim
        object.__setattr__(self, "rotation", check_orthogonal(self.rotation, n))
        t = np.zeros(n) if self.translation is None else np.asarray(self.translation, dtype=float).reshape(-1)
        if t.size != n:
            raise BodyParseError("translation: wrong dimension")
        object.__setattr__(self, "translation", t)

    @property
    def dim(self):
        return self.inner.dim

    def support(self, U):
        U = _as_dirs(U, self.dim)
        return self.inner.support(U @ self.rotation) + U @ self.translation

    def support_points(self, U, side="low"):
        U = _as_dirs(U, self.dim)
        return self.inner.support_points(U @ self.rotation, side) @ self.rotation.T + self.translation

    def curvature_density(self, theta):
        self._need_planar()
        X = unit_circle(theta).reshape(-1, 2) @ self.rotation
        return self.inner.curvature_density(angles_of(X)).reshape(np.shape(theta))

    def atoms(self):
        self._need_planar()
        a, m = self.inner.atoms()
        return angles_of(unit_circle(a) @ self.rotation.T), m

    def to_dict(self):
        return {"dim": self.dim, "type": "moved", "inner": self.inner.to_dict(),
                "rotation": self.rotation.tolist(), "translation": self.translation.tolist()}


@dataclass(frozen=True, eq=False)
class HalfEllipse(Body):
    """Right half of the ellipse x^2/2 + 2 y^2 <= 1 (x >= 0), in closed form.

    Its support is sqrt(2 cos^2 s + sin^2 s / 2) for cos s >= 0 and
    |sin s| / sqrt(2) otherwise; the flat side lies on the y axis.
    """

    @property
    def dim(self):
        return 2

    def support(self, U):
        U = _as_dirs(U, 2)
        a, b = HALF_ELLIPSE_A, HALF_ELLIPSE_B
        ell = np.sqrt((a * U[:, 0]) ** 2 + (b * U[:, 1]) ** 2)
        return np.where(U[:, 0] >= 0, ell, b * np.abs(U[:, 1]))

    def support_points(self, U, side="low"):
        U = _as_dirs(U, 2)
        a, b = HALF_ELLIPSE_A, HALF_ELLIPSE_B
        ell = np.sqrt((a * U[:, 0]) ** 2 + (b * U[:, 1]) ** 2)
        arc = np.stack([a * a * U[:, 0], b * b * U[:, 1]], axis=1) / ell[:, None]
        sgn = np.where(U[:, 1] >= 0, 1.0, -1.0)
        if side == "mid":
            sgn = np.where(np.abs(U[:, 1]) <= TIE_TOL, 0.0, sgn)
        flat = np.stack([np.zeros(len(U)), b * sgn], axis=1)
        return np.where((U[:, 0] >= 0)[:, None], arc, flat)

    def curvature_density(self, theta):
        a, b = HALF_ELLIPSE_A, HALF_ELLIPSE_B
        theta = np.asarray(theta, dtype=float)
        c, s = np.cos(theta), np.sin(theta)
        rho = (a * b) ** 2 / ((a * c) ** 2 + (b * s) ** 2) ** 1.5
        return np.where(np.abs(c) <= 1e-12, 0.5 * rho, np.where(c > 0, rho, 0.0))

    def atoms(self):
        return np.array([math.pi]), np.array([2 * HALF_ELLIPSE_B])

    def to_dict(self):
        return {"dim": 2, "type": "builtin", "builtin": "half_ellipse_k"}


@lru_cache(maxsize=None)
def half_ellipse_constants():
    """(alpha, beta): V1 of the half-ellipse and the abscissa of its
    Steiner point, both by adaptive quadrature of the closed-form support."""
    K = HalfEllipse()

    def k(s):
        return float(K.support([math.cos(s), math.sin(s)])[0])

    pts = [math.pi / 2, math.pi, 3 * math.pi / 2]
    total = integrate.quad(k, 0, 2 * math.pi, points=pts, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    first = integrate.quad(lambda s: k(s) * math.cos(s), 0, 2 * math.pi, points=pts,
                           epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    return 0.5 * total, first / math.pi


def half_ellipse_k1():
    """The half-ellipse moved to Steiner point 0 and scaled to V1 = 1."""
    alpha, beta = half_ellipse_constants()
    return Combination(((1.0 / alpha, Moved(HalfEllipse(), np.eye(2), [-beta, 0.0])),))


def rectangle_k2():
    """[-2/5, 2/5] x [-1/10, 1/10]; its support is (2/5)|cos| + (1/10)|sin|."""
    return Polytope([[-0.4, -0.1], [0.4, -0.1], [0.4, 0.1], [-0.4, 0.1]])


@dataclass(frozen=True, eq=False)
class Embedded(Body):
    """A body of R^m placed in R^n through an isometric embedding.

    ``frame`` is an m x n matrix with orthonormal rows; the embedded body is
    frame^T K.  Its support at u is the 1-homogeneous support of K at frame u.
    """

    inner: Body
    frame: np.ndarray

    def __post_init__(self):
        F = np.asarray(self.frame, dtype=float)
        if F.ndim != 2 or F.shape[0] != self.inner.dim or F.shape[1] <= F.shape[0]:
            raise BodyParseError("frame: must be m x n with m = inner dimension < n")
        if np.abs(F @ F.T - np.eye(F.shape[0])).max() > ORTHO_TOL:
            raise BodyParseError("frame: rows must be orthonormal")
        object.__setattr__(self, "frame", F)

    @property
    def dim(self):
        return self.frame.shape[1]

    def _project(self, U):
        U = _as_dirs(U, self.dim)
        P = U @ self.frame.T
        r = np.linalg.norm(P, axis=1)
        D = np.zeros_like(P)
        D[:, 0] = 1.0
        ok = r > 0
        D[ok] = P[ok] / r[ok, None]
        return D, r

    def support(self, U):
        D, r = self._project(U)
        return r * self.inner.support(D)

    def support_points(self, U, side="low"):
        D, r = self._project(U)
        # u normal to the plane makes all of K maximal; D falls back to e1 there
        return self.inner.support_points(D, side) @ self.frame

    def to_dict(self):
        return {"dim": self.dim, "type": "embedded", "inner": self.inner.to_dict(),
                "frame": self.frame.tolist()}


def transform(body, rotation=None, translation=None, scale=1.0):
    """Body with support h'(u) = scale h(R^T u) + <t, u>."""
    n = body.dim
    R = np.eye(n) if rotation is None else check_orthogonal(rotation, n)
    t = np.zeros(n) if translation is None else translation
    if not scale >= 0:
        raise BodyParseError("scale: must be >= 0")
    inner = body if scale == 1.0 else Combination(((scale, body),))
    return Moved(inner, R, t)


def eval_support(body, u):
    """Support value at a single direction."""
    return float(body.support(np.asarray(u, dtype=float)[None, :])[0])


def support_point(body, u):
    """Deterministic maximizer at a single direction (lowest index on ties)."""
    return body.support_points(np.asarray(u, dtype=float)[None, :])[0]


# ---------------------------------------------------------------- JSON


def _vec(d, key, where, n=None):
    if key not in d:
        raise BodyParseError(f"{where}{key}: missing field")
    try:
        v = np.asarray(d[key], dtype=float)
    except (TypeError, ValueError):
        raise BodyParseError(f"{where}{key}: expected numbers") from None
    if not np.all(np.isfinite(v)):
        raise BodyParseError(f"{where}{key}: non-finite entry")
    if n is not None and v.shape[-1] != n:
        raise BodyParseError(f"{where}{key}: expected last dimension {n}, got {v.shape[-1]}")
    return v


BUILTINS = {
    "half_ellipse_k": HalfEllipse,
    "half_ellipse_k1": half_ellipse_k1,
    "rectangle_k2": rectangle_k2,
}


def body_from_dict(d, where=""):
    if not isinstance(d, dict):
        raise BodyParseError(f"{where or 'body'}: expected an object")
    if "type" not in d:
        raise BodyParseError(f"{where}type: missing field")
    kind = d["type"]
    n = d.get("dim")
    if n is not None and (not isinstance(n, int) or n < 1):
        raise BodyParseError(f"{where}dim: must be a positive integer")
    try:
        if kind == "point":
            body = Point(_vec(d, "p", where, n))
        elif kind == "segment":
            body = Segment(_vec(d, "a", where, n), _vec(d, "b", where, n))
        elif kind == "polytope":
            V = _vec(d, "vertices", where, n)
            if V.ndim != 2 or V.shape[0] < 1:
                raise BodyParseError(f"{where}vertices: expected a non-empty list of points")
            body = Polytope(V)
        elif kind == "ball":
            if "radius" not in d:
                raise BodyParseError(f"{where}radius: missing field")
            body = Ball(_vec(d, "center", where, n), float(d["radius"]))
        elif kind == "ellipsoid":
            body = Ellipsoid(_vec(d, "center", where, n), _vec(d, "shape", where, n))
        elif kind == "combination":
            terms = d.get("terms")
            if not isinstance(terms, list):
                raise BodyParseError(f"{where}terms: expected a list")
            parsed = []
            for i, t in enumerate(terms):
                sub = f"{where}terms[{i}]."
                if not isinstance(t, dict) or "weight" not in t or "body" not in t:
                    raise BodyParseError(f"{sub[:-1]}: expected {{weight, body}}")
                parsed.append((float(t["weight"]), body_from_dict(t["body"], sub + "body.")))
            body = Combination(tuple(parsed))
        elif kind == "moved":
            inner = body_from_dict(d.get("inner"), where + "inner.")
            t = _vec(d, "translation", where) if "translation" in d else None
            body = Moved(inner, _vec(d, "rotation", where), t)
        elif kind == "embedded":
            body = Embedded(body_from_dict(d.get("inner"), where + "inner."), _vec(d, "frame", where))
        elif kind == "builtin":
            name = d.get("builtin")
            if name not in BUILTINS:
                raise BodyParseError(f"{where}builtin: unknown name {name!r}; known: {sorted(BUILTINS)}")
            body = BUILTINS[name]()
        else:
            raise BodyParseError(f"{where}type: unknown body type {kind!r}")
    except BodyParseError as e:
        if where and not str(e).startswith(where):
            raise BodyParseError(where + str(e)) from None
        raise
    except InvalidDimensionError as e:
        raise BodyParseError(f"{where or 'body'}: {e}") from None
    if n is not None and body.dim != n:
        raise BodyParseError(f"{where}dim: declared {n} but body has dimension {body.dim}")
    return body


def load_body(text):
    """Parse a body from JSON text; errors carry line/column or field path."""
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise BodyParseError(f"line {e.lineno}, column {e.colno}: {e.msg}") from None
    return body_from_dict(d)


def read_body(path):
    with open(path) as fh:
        return load_body(fh.read())
