"""Hyperboloid, cross-ratio and Klein models of the space of oriented shapes.

Support fields are Steiner-centered before normalization, which removes the
kernel of the mixed-area form (linear functions).
"""

from dataclasses import dataclass
import math

import numpy as np

from .constants import build_constants
from .errors import BoundaryShapeError, NumericalConsistencyError
from .forms import center, is_interior, mean, steiner_point, v1, v2, v2_form
from .sphere import PlanarMeasure, SupportField, combine

CLAMP_WINDOW = 1e-10
BOUNDARY_THRESH = 1e-9


def safe_arccosh(x, window=CLAMP_WINDOW):
    """argcosh with a narrow clamp below 1; beyond the window inputs are invalid."""
    if x < 1.0 - window:
        raise NumericalConsistencyError(f"argcosh argument {x!r} is below 1 by more than {window}")
    return math.acosh(max(x, 1.0))


@dataclass(frozen=True)
class HyperboloidPoint:
    field: SupportField
    v2: float
    mean: float


@dataclass(frozen=True)
class KleinPoint:
    field: SupportField
    v1: float


def _check_interior(f):
    if not is_interior(f, BOUNDARY_THRESH):
        raise BoundaryShapeError("body is a point or a segment (zero intrinsic area)")


def normalize_v2(f):
    """Center and scale to V2 = 1."""
    f = center(f)
    _check_interior(f)
    g = f.scaled(1.0 / math.sqrt(v2(f)))
    return HyperboloidPoint(g, v2(g), mean(g))


def normalize_v1(f, allow_boundary=False):
    """Center and scale to V1 = 1 (the Klein slice)."""
    f = center(f)
    a = v1(f)
    if not a > 0:
        raise BoundaryShapeError("body is a point (V1 = 0)")
    if not allow_boundary:
        _check_interior(f)
    g = f.scaled(1.0 / a)
    return KleinPoint(g, v1(g))


def dist_hyperboloid(h, k):
    """argcosh V2(h, k) for V2-normalized fields."""
    if isinstance(h, HyperboloidPoint):
        h = h.field
    if isinstance(k, HyperboloidPoint):
        k = k.field
    # averaged so that the result is bitwise symmetric
    return safe_arccosh(0.5 * (v2_form(h, k) + v2_form(k, h)))


def cross_ratio_roots(f, g):
    """Roots t1 = (V2(f, f-g) - sqrt(delta)) / V2(f-g) and t2 = (... + sqrt(delta)) / V2(f-g)
    of V2((1 - t) f + t g) = 0, with g rescaled to V2(f).

    Returns (t1, t2, a, d) where d = V2(f - g)."""
    f, g = center(f), center(g)
    a = v2(f)
    g = g.scaled(math.sqrt(a / v2(g)))
    diff = f - g
    d = v2(diff)
    b = v2_form(f, diff)
    if abs(d) <= 1e-14 * a:
        return None
    delta = b * b - d * a
    if not delta > 0:
        raise NumericalConsistencyError(f"cross-ratio discriminant {delta!r} is not positive")
    r = math.sqrt(delta)
    # d < 0, so t1 is the root beyond 1 and t2 the negative one
    return (b - r) / d, (b + r) / d, a, d


def dist_cross_ratio(f, g):
    """1/2 log of the cross ratio [0, 1, t1, t2] = (t1 / t2) (1 - t2) / (1 - t1)."""
    roots = cross_ratio_roots(f, g)
    if roots is None:
        return 0.0
    t1, t2, _, _ = roots
    cr = (t1 / t2) * (1 - t2) / (1 - t1)
    return 0.5 * math.log(cr)


def dist_klein(f, g):
    """Distance through V1-normalized representatives."""
    h, k = normalize_v1(f).field, normalize_v1(g).field
    return safe_arccosh(v2_form(h, k) / math.sqrt(v2(h) * v2(k)))


def dist_fields(f, g, model="hyperboloid"):
    if model == "hyperboloid":
        return dist_hyperboloid(normalize_v2(f), normalize_v2(g))
    if model == "crossratio":
        _check_interior(center(f))
        _check_interior(center(g))
        return dist_cross_ratio(f, g)
    if model == "klein":
        return dist_klein(f, g)
    raise ValueError(f"unknown model {model!r}")


def add_constant(f, c):
    """f + c (the support of the ball of radius c added)."""
    m = None
    if f.measure is not None:
        m = PlanarMeasure(f.measure.atom_angles, f.measure.atom_masses,
                          f.measure.density + c, f.measure.dmid)
    return SupportField(f.grid, f.values + c, f.gradients, None, m)


def project_horizontal(h):
    """h - mean(h)."""
    f = h.field if isinstance(h, HyperboloidPoint) else h
    return add_constant(f, -mean(f))


def lift_horizontal(f):
    """Inverse of the projection: f + r2 sqrt(1 - V2(f)) on mean-zero fields."""
    r2 = build_constants(f.n).r2
    c = r2 * math.sqrt(max(1.0 - v2(f), 0.0))
    g = add_constant(f, c)
    return HyperboloidPoint(g, v2(g), mean(g))


def d01(f, g):
    """sqrt(-V2(f - g)); the projection to mean-zero fields does not shrink distances."""
    return math.sqrt(max(-v2(f - g), 0.0))


def boundary_gap(f):
    """V2 of the V1-normalized field; it vanishes exactly on segments and points."""
    return v2(normalize_v1(f, allow_boundary=True).field)


def hyperboloid_gram(*fields):
    """Gram matrix of V2-normalized fields (entries are cosh of distances)."""
    pts = [normalize_v2(f).field for f in fields]
    return np.array([[v2_form(p, q) for q in pts] for p in pts])


