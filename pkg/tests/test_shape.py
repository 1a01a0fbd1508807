import math

import numpy as np
import pytest

from areametric.bodies import (Ball, Combination, Embedded, Moved, Polytope, Segment,
                               half_ellipse_k1, rectangle_k2)
from areametric.cases import random_body_2d, random_polygon
from areametric.errors import BoundaryShapeError
from areametric.forms import v2
from areametric.shape import (ball_distance, dist_oriented, dist_shape, geodesic_point,
                              hyperbolic_mid, midpoint_law_check, mixed_area_all_rotations,
                              rotate_field, rotation_2d, rotation_objective)
from areametric.sphere import build_grid, sample_body, sup_diff

SQUARE = Polytope([[0, 0], [1, 0], [1, 1], [0, 1]])
DISC = Ball([0.0, 0.0], 1.0)


def test_oriented_examples(grid2, grid3, rng):
    K = random_polygon(rng)
    K3 = Moved(Combination(((3.0, K),)), np.eye(2), [2.0, -1.0])
    assert dist_oriented(K, K3, grid2) < 1e-9
    assert dist_oriented(DISC, SQUARE, grid2) == pytest.approx(math.acosh(2 / math.sqrt(math.pi)), abs=1e-12)
    # quadrature of the embedded disc has a kink at the equator, hence 1e-5
    disc3 = Embedded(DISC, np.eye(3)[:2])
    d = dist_oriented(Ball([0, 0, 0], 1.0), disc3, grid3)
    assert d == pytest.approx(math.acosh(math.sqrt(2) * math.pi / 4), abs=1e-5)


def test_boundary_rejected(grid2):
    seg = Segment([-1.0, 0.0], [1.0, 0.0])
    with pytest.raises(BoundaryShapeError):
        dist_oriented(seg, DISC, grid2)
    with pytest.raises(BoundaryShapeError):
        dist_shape(seg, DISC, grid2)
    with pytest.raises(BoundaryShapeError):
        geodesic_point(seg, DISC, 0.5, grid2)


def test_symmetry_and_triangle_inequality(grid2, rng):
    for _ in range(20):
        a, b, c = (sample_body(random_body_2d(rng), grid2) for _ in range(3))
        ab, bc, ac = dist_oriented(a, b), dist_oriented(b, c), dist_oriented(a, c)
        assert dist_oriented(b, a) == ab
        assert ac <= ab + bc + 1e-9


def test_geodesic_endpoints_and_additivity(grid2, rng):
    f, g = (sample_body(random_body_2d(rng), grid2) for _ in range(2))
    p0 = geodesic_point(f, g, 0.0)
    assert v2(p0) == pytest.approx(1.0, rel=1e-13)
    assert dist_oriented(p0, f) < 1e-7
    D = dist_oriented(f, g)
    for t in (0.1, 0.5, 0.9):
        p = geodesic_point(f, g, t)
        assert dist_oriented(f, p) + dist_oriented(p, g) == pytest.approx(D, abs=1e-8)
    with pytest.raises(ValueError):
        geodesic_point(f, g, 1.5)


def test_orthogonal_segments_sweep_rectangles(grid2):
    a, b = Segment([-1.0, 0.0], [1.0, 0.0]), Segment([0.0, -1.0], [0.0, 1.0])
    for t in (0.0, 0.25, 0.5, 0.9):
        assert v2(geodesic_point(a, b, t, grid2, allow_boundary=True)) == pytest.approx(
            4 * t * (1 - t), abs=1e-12)


def test_square_disc_midpoint(grid2):
    m = geodesic_point(SQUARE, DISC, 0.5, grid2)
    half = 0.5 * math.acosh(2 / math.sqrt(math.pi))
    assert dist_oriented(SQUARE, m, grid2) == pytest.approx(half, abs=1e-8)
    assert dist_oriented(m, DISC, grid2) == pytest.approx(half, abs=1e-8)
    assert round(half, 5) == 0.25072


def test_rotation_objective_values(grid2):
    f0 = rotation_objective(half_ellipse_k1(), rectangle_k2(), 0.0, grid2)
    f1 = rotation_objective(half_ellipse_k1(), rectangle_k2(), math.pi / 2, grid2)
    assert f0 == pytest.approx(f1, abs=1e-12)


def test_correlation_matches_direct_rotation(grid2_small, rng):
    f, g = (sample_body(random_polygon(rng), grid2_small) for _ in range(2))
    fields = [f.__class__(f.grid, f.values, None, None, f.planar_measure()),
              g.__class__(g.grid, g.values, None, None, g.planar_measure())]
    allr = mixed_area_all_rotations(*fields)
    step = grid2_small.step
    for j in (0, 5, 300, 1000):
        direct = rotation_objective(fields[0], rotate_field(fields[1], j * step), 0.0) / 2
        assert allr[j] == pytest.approx(direct, rel=1e-10)


def test_shape_distance_isometry_invariance(grid2, rng):
    K, L = random_body_2d(rng), random_body_2d(rng)
    base = dist_shape(K, L, grid2).distance
    assert base <= dist_oriented(K, L, grid2) + 1e-12
    Q1 = rotation_2d(rng.uniform(0, 2 * np.pi), True)
    Q2 = rotation_2d(rng.uniform(0, 2 * np.pi))
    moved = dist_shape(Moved(K, Q1, rng.normal(size=2)), Moved(L, Q2, rng.normal(size=2)), grid2)
    assert moved.distance == pytest.approx(base, abs=1e-7)


def test_shape_distance_planted(grid2, rng):
    K = random_polygon(rng)
    Q = rotation_2d(1.234, True)
    rep = dist_shape(K, Moved(Combination(((2.0, K),)), Q, [1.0, 1.0]), grid2)
    assert rep.distance < 1e-7 and rep.reflected
    R = rep.rotation
    assert np.allclose(R.T @ R, np.eye(2), atol=1e-12)
    d = rep.to_dict()
    assert d["method"] == "fft" and len(d["rotation"]) == 2


def test_shape_distance_to_ball_is_oriented(grid2, rng):
    K = random_body_2d(rng)
    assert dist_shape(K, DISC, grid2).distance == pytest.approx(dist_oriented(K, DISC, grid2), abs=1e-9)


def test_hyperbolic_mid():
    a, c = 1.3, 0.8
    assert hyperbolic_mid(a, a, c) == pytest.approx(math.acosh(math.cosh(a) / math.cosh(c / 2)))
    # collinear: midpoint of a segment of length c seen from an endpoint extension
    assert hyperbolic_mid(0.5, 2.5, 2.0) == pytest.approx(1.5, abs=1e-7)
    with pytest.raises(ValueError):
        hyperbolic_mid(1.0, 1.0, 3.0)


def test_midpoint_law_random_triangle(grid2, rng):
    A, B, C = (random_polygon(rng) for _ in range(3))
    assert midpoint_law_check(A, B, C, grid2).residual < 1e-7


def test_ball_distance():
    assert ball_distance(4, 4) == 0.0
    assert ball_distance(2, 3) == pytest.approx(math.acosh(math.sqrt(2) * math.pi / 4), abs=1e-14)
    steps = [ball_distance(n, n + 1) for n in range(2, 201)]
    assert np.all(np.diff(steps) < 0)
    with pytest.raises(BoundaryShapeError):
        ball_distance(1, 3)
    with pytest.raises(ValueError):
        ball_distance(5, 3)


def test_3d_planted_rotation():
    grid = build_grid(3, 32)
    rng = np.random.Generator(np.random.Philox(7))
    K = Polytope(rng.normal(size=(12, 3)))
    Q = np.linalg.qr(rng.normal(size=(3, 3)))[0]
    rep = dist_shape(K, Moved(K, Q, rng.normal(size=3)), grid)
    assert rep.distance < 1e-4
    assert rep.diagnostics["heuristic optimum"]
