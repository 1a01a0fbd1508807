import math

import numpy as np
import pytest

from areametric.bodies import Ball, Combination, Moved, Polytope, Segment
from areametric.cases import random_body_2d, random_ellipse
from areametric.errors import BoundaryShapeError, NumericalConsistencyError
from areametric.forms import mean, v2
from areametric.hyperbolic import (boundary_gap, cross_ratio_roots, d01, dist_fields,
                                   hyperboloid_gram, lift_horizontal, normalize_v1, normalize_v2,
                                   project_horizontal, safe_arccosh)
from areametric.sphere import sample_body


def test_safe_arccosh_window():
    assert safe_arccosh(1.0 - 1e-12) == 0.0
    assert safe_arccosh(math.cosh(0.7)) == pytest.approx(0.7, rel=1e-14)
    with pytest.raises(NumericalConsistencyError):
        safe_arccosh(0.99)


@pytest.mark.parametrize("seed", range(5))
def test_three_models_agree(grid2, seed):
    rng = np.random.Generator(np.random.Philox(seed))
    f, g = (sample_body(random_body_2d(rng), grid2) for _ in range(2))
    d = [dist_fields(f, g, m) for m in ("hyperboloid", "crossratio", "klein")]
    assert max(d) - min(d) < 1e-9


def test_models_agree_in_3d(grid3, rng):
    f, g = (sample_body(random_ellipse(rng, 3), grid3) for _ in range(2))
    d = [dist_fields(f, g, m) for m in ("hyperboloid", "crossratio", "klein")]
    assert max(d) - min(d) < 1e-9


def test_cross_ratio_roots_are_outside_unit_interval(grid2, rng):
    f, g = (sample_body(random_body_2d(rng), grid2) for _ in range(2))
    t1, t2, a, d = cross_ratio_roots(f, g)
    assert d < 0 and t1 > 1 and t2 < 0


def test_similarity_invariance(grid2, rng):
    K, L = random_body_2d(rng), random_body_2d(rng)
    f, g = sample_body(K, grid2), sample_body(L, grid2)
    Q = np.linalg.qr(rng.normal(size=(2, 2)))[0]
    t = rng.normal(size=2)
    f2 = sample_body(Moved(Combination(((3.0, K),)), Q, t), grid2)
    g2 = sample_body(Moved(Combination(((3.0, L),)), Q, -t), grid2)
    assert dist_fields(f2, g2) == pytest.approx(dist_fields(f, g), abs=1e-10)


def test_normalizations(grid2, rng):
    f = sample_body(random_body_2d(rng), grid2)
    p = normalize_v2(f)
    assert p.v2 == pytest.approx(1.0, rel=1e-13)
    assert normalize_v1(f).v1 == pytest.approx(1.0, rel=1e-13)
    seg = sample_body(Segment([0, 0], [2, 1]), grid2)
    with pytest.raises(BoundaryShapeError):
        normalize_v2(seg)
    with pytest.raises(BoundaryShapeError):
        normalize_v1(seg)
    assert normalize_v1(seg, allow_boundary=True).v1 == pytest.approx(1.0)
    assert boundary_gap(seg) == pytest.approx(0.0, abs=1e-14)
    assert boundary_gap(f) > 0


def test_projection_round_trip(grid2, rng):
    p = normalize_v2(sample_body(random_body_2d(rng), grid2))
    q = project_horizontal(p)
    assert mean(q) == pytest.approx(0.0, abs=1e-13)
    back = lift_horizontal(q)
    assert np.abs(back.field.values - p.field.values).max() < 1e-10
    assert back.v2 == pytest.approx(1.0, rel=1e-10)


def test_projection_does_not_shrink(grid2, rng):
    for _ in range(10):
        p, q = (normalize_v2(sample_body(random_body_2d(rng), grid2)) for _ in range(2))
        d = dist_fields(p.field, q.field)
        assert d01(project_horizontal(p), project_horizontal(q)) >= 2 * math.sinh(d / 2) - 1e-12


def test_gram_matrix(grid2):
    g = hyperboloid_gram(sample_body(Ball([0, 0], 1.0), grid2),
                         sample_body(Polytope([[0, 0], [1, 0], [1, 1], [0, 1]]), grid2))
    assert np.allclose(np.diag(g), 1.0)
    assert g[0, 1] == pytest.approx(2 / math.sqrt(math.pi), rel=1e-12)


def test_unknown_model(grid2):
    f = sample_body(Ball([0, 0], 1.0), grid2)
    with pytest.raises(ValueError):
        dist_fields(f, f, "poincare")
