"""Dimensional constants: unit-ball volumes, Wallis integrals and the
normalizations of the intrinsic volumes V1 and V2."""

from dataclasses import dataclass
from functools import lru_cache
import math

from .errors import InvalidDimensionError


@dataclass(frozen=True)
class DimConstants:
    n: int
    kappa: tuple   # kappa[m] = volume of the unit ball of R^m
    wallis: tuple  # wallis[m] = int_0^{pi/2} cos^m
    c_n: float
    r1: float
    r2: float
    lambda1: float
    lambda2: float
    v1_ball: float
    v2_ball: float

    @property
    def sphere_area(self):
        """Surface measure of S^{n-1}."""
        return self.n * self.kappa[self.n]


def kappa_table(m_max):
    k = [1.0, 2.0]
    for m in range(2, m_max + 1):
        k.append(2.0 * math.pi / m * k[m - 2])
    return tuple(k[:m_max + 1])


def wallis_table(m_max):
    w = [math.pi / 2, 1.0]
    for m in range(2, m_max + 1):
        w.append((m - 1) / m * w[m - 2])
    return tuple(w[:m_max + 1])


@lru_cache(maxsize=None)
def build_constants(n):
    """Constants attached to R^n, n >= 2.

    Examples
    --------
    >>> build_constants(3).v1_ball
    4.0
    """
    if int(n) != n or n < 2:
        raise InvalidDimensionError(f"dimension must be an integer >= 2, got {n!r}")
    n = int(n)
    kappa = kappa_table(n)
    wallis = wallis_table(n)
    v2_ball = (n - 1) * math.pi
    v1_ball = math.pi / wallis[n - 1]
    return DimConstants(
        n=n,
        kappa=kappa,
        wallis=wallis,
        c_n=(n - 1) / (2.0 * kappa[n - 2]),
        r1=1.0 / v1_ball,
        r2=1.0 / math.sqrt(v2_ball),
        lambda1=float(n - 1),
        lambda2=float(2 * n),
        v1_ball=v1_ball,
        v2_ball=v2_ball,
    )


def c_n_wallis(n):
    """Second closed form (n-1) W_{n-1} / kappa_{n-1}, kept for cross-checks."""
    return (n - 1) * wallis_table(n)[n - 1] / kappa_table(n)[n - 1]
