import math

import numpy as np
import pytest

from areametric.bodies import Ball, Combination, Ellipsoid, Moved, Polytope, Segment
from areametric.cases import random_body_2d, random_polygon
from areametric.forms import (af_defect, center, form_report, integral, is_interior, mean,
                              planar_eval, polygon_area, polygon_mixed_area, polygon_perimeter,
                              polyhedron_oracles, quadrature_v1, quadrature_v2_form, steiner_fit_mc,
                              steiner_point, v1, v2, v2_form)
from areametric.sphere import build_grid, field_from_values, sample_body, translate_field


def polygon_steiner(V):
    """Steiner point of a polygon: vertices weighted by exterior angle / (2 pi)."""
    C = Polytope(V).hull_cycle()
    e_in = C - np.roll(C, 1, axis=0)
    e_out = np.roll(C, -1, axis=0) - C
    cr = e_in[:, 0] * e_out[:, 1] - e_in[:, 1] * e_out[:, 0]
    turn = np.arctan2(cr, np.einsum("ij,ij->i", e_in, e_out))
    return (turn[:, None] * C).sum(axis=0) / (2 * np.pi)


def test_disc_and_ellipse_exact(grid2):
    f = sample_body(Ball([0.3, -0.2], 1.5), grid2)
    assert v2(f) == pytest.approx(math.pi * 2.25, rel=1e-13)
    assert v1(f) == pytest.approx(math.pi * 1.5, rel=1e-13)
    assert mean(f) == pytest.approx(1.5, rel=1e-13)
    E = Ellipsoid([0, 0], [[4.0, 0], [0, 1.0]])
    assert v2(sample_body(E, grid2)) == pytest.approx(2 * math.pi, rel=1e-12)


def test_polygon_forms_match_oracles(grid2, rng):
    for _ in range(20):
        P, Q = random_polygon(rng), random_polygon(rng)
        f, g = sample_body(P, grid2), sample_body(Q, grid2)
        assert v2(f) == pytest.approx(polygon_area(P.vertices), rel=1e-12)
        assert v1(f) == pytest.approx(polygon_perimeter(P.vertices) / 2, rel=1e-12)
        assert v2_form(f, g) == pytest.approx(polygon_mixed_area(P.vertices, Q.vertices), rel=1e-12)
        assert np.allclose(steiner_point(f), polygon_steiner(P.vertices), atol=1e-12)


def test_contract_quadrature_is_close_for_polygons(grid2, rng):
    P = random_polygon(rng)
    f = sample_body(P, grid2)
    assert quadrature_v1(f) == pytest.approx(v1(f), rel=1e-6)
    assert quadrature_v2_form(f, f) == pytest.approx(v2(f), rel=1e-3)


def test_bilinear_symmetric_translation_invariant(grid2, rng):
    a, b, c = (sample_body(random_body_2d(rng), grid2) for _ in range(3))
    lhs = v2_form(a.scaled(2.0) + b.scaled(0.5), c)
    assert lhs == pytest.approx(2 * v2_form(a, c) + 0.5 * v2_form(b, c), rel=1e-13)
    assert v2_form(a, b) == pytest.approx(v2_form(b, a), rel=1e-14)
    t = rng.normal(size=2)
    assert v2_form(translate_field(a, t), b) == pytest.approx(v2_form(a, b), rel=1e-12)


def test_continuous_under_subcell_rotation(grid2):
    sq = Polytope([[0, 0], [1, 0], [1, 1], [0, 1]])
    vals = []
    for th in np.linspace(0, grid2.step, 7):
        c, s = math.cos(th), math.sin(th)
        vals.append(v2(sample_body(Moved(sq, [[c, -s], [s, c]], None), grid2)))
    assert np.allclose(vals, 1.0, atol=1e-13)


def test_steiner_point_equivariance(grid2, rng):
    K = random_body_2d(rng)
    Q = np.linalg.qr(rng.normal(size=(2, 2)))[0]
    t = rng.normal(size=2)
    s = steiner_point(sample_body(K, grid2))
    s2 = steiner_point(sample_body(Moved(K, Q, t), grid2))
    assert np.allclose(s2, Q @ s + t, atol=1e-10)
    assert np.allclose(steiner_point(center(sample_body(K, grid2))), 0, atol=1e-12)


def test_3d_forms(grid3):
    cube = Polytope(np.array(np.meshgrid([0, 1], [0, 1], [0, 1])).reshape(3, -1).T)
    f = sample_body(cube, grid3)
    assert v2(f) == pytest.approx(3.0, rel=2e-3)
    # V1 of the unit cube is 3 (sum of edge lengths times exterior angles / pi)
    assert v1(f) == pytest.approx(3.0, rel=2e-3)
    assert np.allclose(steiner_point(f), 0.5, atol=1e-3)
    b = sample_body(Ball([0, 0, 0], 1.0), grid3)
    assert v2(b) == pytest.approx(2 * math.pi, rel=1e-12)
    assert v1(b) == pytest.approx(4.0, rel=1e-12)
    assert polyhedron_oracles(cube.vertices)["surface_area"] == pytest.approx(6.0)


def test_af_defect_and_report(grid2, rng):
    for _ in range(30):
        f, g = (sample_body(random_body_2d(rng), grid2) for _ in range(2))
        assert af_defect(f, g) >= -1e-10
    K = random_body_2d(rng)
    f = sample_body(K, grid2)
    h = sample_body(Moved(Combination(((2.5, K),)), np.eye(2), [1.0, 2.0]), grid2)
    assert abs(af_defect(f, h)) < 1e-9 * v2(h)
    rep = form_report(f).to_dict()
    assert set(rep) == {"v1", "v2", "mean", "steiner", "valid_cone"} and rep["valid_cone"]


def test_segment_and_point_classification(grid2):
    s = sample_body(Segment([-1.0, 0.0], [1.0, 0.0]), grid2)
    assert v2(s) == pytest.approx(0.0, abs=1e-14)
    assert v1(s) == pytest.approx(2.0, rel=1e-14)
    assert integral(s) == pytest.approx(4.0, rel=1e-14)
    assert not is_interior(s)
    assert is_interior(sample_body(Ball([0, 0], 1e-3), grid2))


def test_sampled_smooth_field_without_measure(grid2):
    # ellipse support known only by values uses the spectral density
    E = Ellipsoid([0, 0], [[2.0, 0.3], [0.3, 0.7]])
    f = field_from_values(grid2, E.support(grid2.nodes))
    assert v2(f) == pytest.approx(math.pi * math.sqrt(np.linalg.det(E.shape)), rel=1e-10)


def test_planar_eval_between_nodes(grid2, rng):
    K = random_body_2d(rng)
    th = rng.uniform(0, 2 * np.pi, 100)
    h, _ = planar_eval(sample_body(K, grid2), th)
    assert np.allclose(h, K.support(np.stack([np.cos(th), np.sin(th)], axis=1)), atol=1e-9)


def test_steiner_fit_mc_reproducible():
    tri = Polytope([[0, 0], [1, 0], [0, 1]])
    a = steiner_fit_mc(tri, [0.1, 0.2, 0.3, 0.4], samples=20000, seed=3)
    b = steiner_fit_mc(tri, [0.1, 0.2, 0.3, 0.4], samples=20000, seed=3)
    assert a == b
    with pytest.raises(ValueError):
        steiner_fit_mc(tri, [0.1, 0.2], samples=1000)
