"""Reproducible worked cases with quantitative checks.

Each case returns a dict with the computed quantities and a list of checks
``{"name", "value", "target", "tol", "pass"}``.
"""

from decimal import Decimal, localcontext
import math

import numpy as np

from .bodies import (Ball, Combination, Ellipsoid, Polytope, Segment,
                     half_ellipse_constants, half_ellipse_k1, rectangle_k2)
from .forms import polygon_area, polygon_perimeter, quadrature_v1, quadrature_v2_form, v1, v2
from .shape import (align, ball_distance, dist_oriented, dist_shape, geodesic_point,
                    rotate_field, rotation_objective)
from .hyperbolic import normalize_v2
from .sphere import build_grid, sample_body, sup_diff
from .validity import embed_lift, is_support_function, terminal_extension


def check(name, value, target=None, tol=None, ok=None):
    if ok is None:
        ok = abs(value - target) <= tol
    return {"name": name, "value": value, "target": target, "tol": tol, "pass": bool(ok)}


def random_polygon(rng, k=None, kmin=5, kmax=40):
    """Convex polygon from k random points near a random ellipse."""
    k = int(rng.integers(kmin, kmax + 1)) if k is None else k
    t = np.sort(rng.uniform(0, 2 * np.pi, k))
    a, b = rng.uniform(0.5, 2.0, 2)
    P = np.stack([a * np.cos(t), b * np.sin(t)], axis=1) * rng.uniform(0.8, 1.0, (k, 1))
    c, s = math.cos(rng.uniform(0, 2 * np.pi)), math.sin(rng.uniform(0, 2 * np.pi))
    return Polytope(P @ np.array([[c, -s], [s, c]]).T + rng.normal(size=2))


def random_ellipse(rng, dim=2):
    A = rng.normal(size=(dim, dim))
    return Ellipsoid(rng.normal(size=dim), A @ A.T + 0.2 * np.eye(dim))


def random_body_2d(rng):
    """Polygon, ellipse or a positive combination of both."""
    kind = int(rng.integers(3))
    if kind == 0:
        return random_polygon(rng)
    if kind == 1:
        return random_ellipse(rng)
    return Combination(((float(rng.uniform(0.2, 1)), random_polygon(rng)),
                        (float(rng.uniform(0.2, 1)), random_ellipse(rng))))


_PI50 = Decimal("3.14159265358979323846264338327950288419716939937510")


def wallis_exact(m):
    """W_m from the factorial products, in 50-digit decimal arithmetic:
    W_2k = (pi / 2) (2k)! / (4^k k!^2) and W_2k+1 = 4^k k!^2 / (2k + 1)!."""
    with localcontext() as ctx:
        ctx.prec = 50
        k = m // 2
        if m % 2 == 0:
            return _PI50 / 2 * Decimal(math.factorial(2 * k)) / Decimal(4 ** k * math.factorial(k) ** 2)
        return Decimal(4 ** k * math.factorial(k) ** 2) / Decimal(math.factorial(2 * k + 1))


def ball_distance_closed(p, n):
    """argcosh(sqrt(n-1) W_{n-1} / (sqrt(p-1) W_{p-1})), evaluated in high precision."""
    with localcontext() as ctx:
        ctx.prec = 50
        x = (Decimal(n - 1).sqrt() * wallis_exact(n - 1)) / (Decimal(p - 1).sqrt() * wallis_exact(p - 1))
        return float((x + (x * x - 1).sqrt()).ln())


# ------------------------------------------------------------ cases


def case_nonunique(grid=None):
    grid = grid or build_grid(2)
    alpha, beta = half_ellipse_constants()
    k1, k2 = half_ellipse_k1(), rectangle_k2()
    target = math.sqrt(2) / alpha
    f0 = rotation_objective(k1, k2, 0.0, grid)
    f90 = rotation_objective(k1, k2, math.pi / 2, grid)
    eps = 1e-7
    right0 = (rotation_objective(k1, k2, eps, grid) - f0) / eps
    left90 = (f90 - rotation_objective(k1, k2, math.pi / 2 - eps, grid)) / eps
    rep = dist_shape(k1, k2, grid)
    thetas = sorted(o["theta"] for o in rep.optimizers)
    ratios = [o["ratio"] for o in rep.optimizers]
    # midpoints of the two optimal alignments, then optimally re-aligned
    f1 = sample_body(k1, grid)
    g = sample_body(k2, grid)
    mids = [geodesic_point(f1, rotate_field(g, th), 0.5) for th in (0.0, math.pi / 2)]
    m0, m1 = (normalize_v2(m).field for m in mids)
    rep_m = dist_shape(m0, m1, grid)
    m1a = normalize_v2(align(m1, rep_m)).field
    gap = sup_diff(m0, m1a)
    checks = [
        check("alpha", alpha, 2.4198, 1e-3),
        check("alpha near 2.4", alpha, 2.4, 0.05),
        check("f(0)", f0, target, 1e-6),
        check("f(pi/2)", f90, target, 1e-6),
        check("f'(0+) > 0", right0, ok=right0 > 0),
        check("f'(pi/2-) < 0", left90, ok=left90 < 0),
        check("two optimal rotations", len(thetas), ok=len(thetas) == 2),
        check("optimal angles {0, pi/2}", thetas,
              ok=len(thetas) == 2 and abs(thetas[0]) < 1e-9 and abs(thetas[1] - math.pi / 2) < 1e-9),
        check("equal optimal values", max(ratios) - min(ratios), 0.0, 1e-9),
        check("aligned midpoints differ", gap, ok=gap > 0.01),
    ]
    return {"alpha": alpha, "beta": beta, "f0": f0, "f_half_pi": f90, "sqrt2_over_alpha": target,
            "right_derivative_0": right0, "left_derivative_half_pi": left90,
            "right_derivative_target": 1 / (5 * math.sqrt(2) * alpha),
            "left_derivative_target": -4 / (5 * math.sqrt(2) * alpha),
            "shape_distance": rep.distance, "optimizers": rep.optimizers,
            "midpoint_gap": gap, "checks": checks}


def case_balls(n_max=10, chain=200):
    table = {p: {n: ball_distance(p, n) for n in range(p + 1, n_max + 1)} for p in range(2, n_max)}
    err = max(abs(ball_distance(p, n) - ball_distance_closed(p, n))
              for p in range(2, chain) for n in (p + 1, min(p + 7, chain + 1)))
    steps = [ball_distance(n, n + 1) for n in range(2, chain + 1)]
    rows = all(np.all(np.diff(list(row.values())) > 0) for row in table.values() if len(row) > 1)
    checks = [
        check("closed form", err, 0.0, 1e-12),
        check("rows increase", rows, ok=rows),
        check("d(B^n, B^n+1) strictly decreasing", steps[-1], ok=bool(np.all(np.diff(steps) < 0))),
        check("d(B^2, B^3)", table[2][3], math.acosh(math.sqrt(2) * math.pi / 4), 1e-12),
    ]
    return {"table": {str(p): {str(n): d for n, d in row.items()} for p, row in table.items()},
            "consecutive": steps[:10], "checks": checks}


def case_isoperimetric(seed=0, count=20, grid=None):
    grid = grid or build_grid(2)
    rng = np.random.Generator(np.random.Philox(seed))
    disc = Ball(np.zeros(2), 1.0)
    worst = 0.0
    for _ in range(count):
        P = random_polygon(rng)
        d = dist_oriented(P, disc, grid)
        ref = math.acosh(polygon_perimeter(P.vertices) / (2 * math.sqrt(math.pi * polygon_area(P.vertices))))
        worst = max(worst, abs(d - ref))
    square = Polytope([[0, 0], [1, 0], [1, 1], [0, 1]])
    dsq = dist_oriented(square, disc, grid)
    checks = [check("random polygons", worst, 0.0, 1e-6),
              check("square", dsq, 0.50144, 1e-5),
              check("square closed form", dsq, math.acosh(2 / math.sqrt(math.pi)), 1e-9)]
    return {"worst_error": worst, "square": dsq, "checks": checks}


def case_terminal(grid=None, tol=None):
    grid = grid or build_grid(2)
    disc = Ball(np.zeros(2), 1.0)
    seg = Segment([-1.0, 0.0], [1.0, 0.0])
    iv = terminal_extension(disc, seg, grid, tol=tol, allow_boundary=True)
    square = sample_body(Polytope([[0, 0], [1, 0], [1, 1], [0, 1]]), grid)
    ball = sample_body(disc, grid)
    eps_rows = {}
    for eps in (1e-3, 1e-2, 1e-1):
        eps_rows[str(eps)] = is_support_function(square - ball.scaled(eps), tol).valid
    checks = [check("t_min", iv.t_min, 0.0, 1e-3),
              check("t_max", iv.t_max, 1.0, 1e-3),
              check("corner minus eps ball invalid", eps_rows, ok=not any(eps_rows.values()))]
    return {"interval": iv.to_dict(), "corner_minus_ball_valid": eps_rows, "checks": checks}


def case_embed(seed=0, count=20, grid=None):
    grid = grid or build_grid(2)
    rng = np.random.Generator(np.random.Philox(seed))
    dv1 = dv2 = dsup = dexact = 0.0
    for i in range(count):
        body = random_body_2d(rng)
        f = sample_body(body, grid)
        A = np.linalg.qr(rng.normal(size=(3, 3)))[0]
        L = embed_lift(f, A)
        dv1 = max(dv1, abs(v1(L) - quadrature_v1(f)))
        dv2 = max(dv2, abs(v2(L) - quadrature_v2_form(f, f)))
        dsup = max(dsup, sup_diff(L, sample_body(L.source, L.grid)))
        if isinstance(body, Ellipsoid):
            dexact = max(dexact, abs(v1(L) - v1(f)), abs(v2(L) - v2(f)))
    checks = [check("v1 preserved", dv1, 0.0, 1e-8),
              check("v2 preserved", dv2, 0.0, 1e-6),
              check("matches embedded sampling", dsup, 0.0, 1e-8),
              check("smooth bodies: exact forms", dexact, 0.0, 1e-8)]
    return {"v1_error": dv1, "v2_error": dv2, "sup_error": dsup, "checks": checks}


CASES = {"nonunique": case_nonunique, "balls": case_balls, "isoperimetric": case_isoperimetric,
         "terminal": case_terminal, "embed": case_embed}
