import random
from fractions import Fraction

import numpy as np
import pytest

from spatchkit.algebra import Mode
from spatchkit.hermite import Patch3, geometry_matrix


def planar_uv_patch(mode=Mode.EXACT) -> Patch3:
    """x = u + v, y = u - v, z = 0 with exact tangents and zero twists."""
    x = [[0, 1, 1, 1], [1, 2, 1, 1], [1, 1, 0, 0], [1, 1, 0, 0]]
    y = [[0, -1, -1, -1], [1, 0, -1, -1], [1, 1, 0, 0], [1, 1, 0, 0]]
    z = [[0] * 4 for _ in range(4)]
    return Patch3.from_arrays([x, y, z], mode)


def bilinear_geometry(a, b, c, d):
    """Control matrix reproducing f(u, v) = a + b u + c v + d u v."""
    f = lambda u, v: a + b * u + c * v + d * u * v
    fu = lambda u, v: b + d * v
    fv = lambda u, v: c + d * u
    rows = [[None] * 4 for _ in range(4)]
    for i in (0, 1):
        for j in (0, 1):
            rows[i][j] = f(i, j)
            rows[2 + i][j] = fu(i, j)
            rows[i][2 + j] = fv(i, j)
            rows[2 + i][2 + j] = d
    return rows


def e11_patch(mode=Mode.EXACT) -> Patch3:
    x = [[1 if (i, j) == (0, 0) else 0 for j in range(4)] for i in range(4)]
    zero = [[0] * 4 for _ in range(4)]
    return Patch3.from_arrays([x, zero, zero], mode)


def random_rational_geometry(rng: random.Random, den=7, span=9):
    return geometry_matrix(
        [[Fraction(rng.randint(-span, span), rng.randint(1, den)) for _ in range(4)] for _ in range(4)],
        Mode.EXACT,
    )


def random_float_patch(rng: np.random.Generator, low=-1.0, high=1.0) -> Patch3:
    return Patch3.from_arrays(rng.uniform(low, high, size=(3, 4, 4)).tolist(), Mode.FLOAT)


def random_boundary(rng: random.Random, den=5, span=9):
    q = lambda: Fraction(rng.randint(-span, span), rng.randint(1, den))
    pts = lambda: tuple(tuple(q() for _ in range(3)) for _ in range(4))
    return pts(), pts(), pts()


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def prng():
    return random.Random(1234)
