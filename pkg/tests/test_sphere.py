import math

import numpy as np
import pytest

from areametric.bodies import Ball, Polytope
from areametric.errors import GridMismatchError, InvalidDimensionError
from areametric.sphere import (build_grid, combine, dist_h1, field_csv, field_from_values,
                               inner_grad, inner_l2, sample_body, sup_diff, translate_field)


def test_build_grid_shapes_and_errors():
    assert build_grid(2).size == 4096
    assert build_grid(3).size == 64 * 128
    assert build_grid(3, 8).size == 8 * 16
    for args in ((4, None), (1, None)):
        with pytest.raises(InvalidDimensionError):
            build_grid(*args)
    with pytest.raises(ValueError):
        build_grid(2, 1000)
    with pytest.raises(ValueError):
        build_grid(3, 4)


def test_quadrature_exact_on_polynomials():
    g = build_grid(3, 16)
    X = g.nodes
    assert g.integrate(np.ones(g.size)) == pytest.approx(4 * math.pi, rel=1e-14)
    # int x^2 = 4 pi / 3, int x^2 y^2 = 4 pi / 15, int z^4 = 4 pi / 5
    assert g.integrate(X[:, 0] ** 2) == pytest.approx(4 * math.pi / 3, rel=1e-13)
    assert g.integrate(X[:, 0] ** 2 * X[:, 1] ** 2) == pytest.approx(4 * math.pi / 15, rel=1e-13)
    assert g.integrate(X[:, 2] ** 4) == pytest.approx(4 * math.pi / 5, rel=1e-13)
    c = build_grid(2, 64)
    assert c.integrate(c.nodes[:, 0] ** 2) == pytest.approx(math.pi, rel=1e-14)


def test_sample_gradients_are_tangent_and_match_finite_differences():
    g = build_grid(3, 16)
    K = Polytope(np.random.default_rng(0).normal(size=(8, 3)))
    f = sample_body(K, g)
    assert np.abs(np.einsum("ij,ij->i", f.gradients, g.nodes)).max() < 1e-12
    # derivative along a tangent direction, away from kinks
    U = g.nodes
    T = np.cross(U, [0.3, 0.5, 0.8])
    T /= np.linalg.norm(T, axis=1, keepdims=True)
    eps = 1e-6
    fd = (K.support(U + eps * T) - K.support(U - eps * T)) / (2 * eps)
    ok = np.abs(fd - np.einsum("ij,ij->i", f.gradients, T)) < 1e-6
    assert ok.mean() > 0.95


def test_linear_combination_and_translation():
    g = build_grid(2, 256)
    a = sample_body(Polytope([[0, 0], [1, 0], [0, 1]]), g)
    b = sample_body(Ball([0.5, 0.5], 2.0), g)
    c = combine([2.0, 0.5], [a, b])
    assert np.allclose(c.values, 2 * a.values + 0.5 * b.values)
    assert np.allclose(c.gradients, 2 * a.gradients + 0.5 * b.gradients)
    t = np.array([0.3, -1.2])
    ta = translate_field(a, t)
    direct = sample_body(Polytope(np.array([[0, 0], [1, 0], [0, 1]]) + t), g)
    assert sup_diff(ta, direct) < 1e-14
    assert np.allclose(ta.gradients, direct.gradients)


def test_grid_mismatch():
    a = field_from_values(build_grid(2, 64), np.ones(64))
    b = field_from_values(build_grid(2, 128), np.ones(128))
    with pytest.raises(GridMismatchError):
        inner_l2(a, b)
    with pytest.raises(GridMismatchError):
        field_from_values(build_grid(2, 64), np.ones(65))


def test_inner_products_of_ball():
    g = build_grid(3, 16)
    f = sample_body(Ball([0, 0, 0], 2.0), g)
    assert inner_l2(f, f) == pytest.approx(16 * math.pi, rel=1e-13)
    assert inner_grad(f, f) == pytest.approx(0.0, abs=1e-12)
    assert dist_h1(f, f) == 0.0


def test_field_csv_header():
    g = build_grid(2, 8)
    text = field_csv(sample_body(Ball([0, 0], 1.0), g))
    lines = text.splitlines()
    assert lines[0] == "theta,value,grad" and len(lines) == 9
    assert field_csv(sample_body(Ball([0, 0, 0], 1.0), build_grid(3, 8))).startswith("polar,azimuth,weight")
