import math

import pytest

from areametric.constants import build_constants, c_n_wallis, kappa_table, wallis_table
from areametric.errors import InvalidDimensionError


def kappa_gamma(m):
    return math.pi ** (m / 2) / math.gamma(m / 2 + 1)


def wallis_gamma(m):
    return math.sqrt(math.pi) * math.gamma((m + 1) / 2) / (2 * math.gamma(m / 2 + 1))


@pytest.mark.parametrize("m", range(0, 30))
def test_tables_match_gamma_forms(m):
    assert kappa_table(m)[m] == pytest.approx(kappa_gamma(m), rel=1e-13)
    assert wallis_table(m)[m] == pytest.approx(wallis_gamma(m), rel=1e-13)


@pytest.mark.parametrize("n", range(2, 25))
def test_constants_closed_forms(n):
    c = build_constants(n)
    assert c.v2_ball == pytest.approx((n - 1) * math.pi, rel=1e-15)
    assert c.v1_ball == pytest.approx(math.pi / wallis_gamma(n - 1), rel=1e-13)
    assert c.r1 * c.v1_ball == pytest.approx(1.0)
    assert c.r2 ** 2 * c.v2_ball == pytest.approx(1.0)
    assert c.c_n == pytest.approx(c_n_wallis(n), rel=1e-13)
    assert c.sphere_area == pytest.approx(2 * math.pi ** (n / 2) / math.gamma(n / 2), rel=1e-13)
    assert c.lambda1 == n - 1 and c.lambda2 == 2 * n


def test_small_dimensions():
    assert build_constants(2).c_n == 0.5
    assert build_constants(3).c_n == 0.5
    assert build_constants(2).v1_ball == pytest.approx(math.pi)
    assert build_constants(3).v1_ball == pytest.approx(4.0)


@pytest.mark.parametrize("n", [1, 0, -3, 2.5])
def test_invalid_dimension(n):
    with pytest.raises(InvalidDimensionError):
        build_constants(n)
