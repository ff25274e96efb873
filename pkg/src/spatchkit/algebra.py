"""Small dense linear algebra and univariate polynomials.

Everything here works in one of two numeric modes:

* ``EXACT``: entries are :class:`fractions.Fraction` (ints are promoted).
* ``FLOAT``: entries are Python floats.

A computation never mixes modes; combining an exact and a float operand
raises :class:`ModeError`.  Exact mode is used wherever an identity must be
certified (ranks, polynomial degrees), float mode for geometry.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "Mode",
    "ModeError",
    "ShapeError",
    "Matrix",
    "Poly",
    "infer_mode",
    "scalar",
    "mat_mul",
    "rank",
    "inverse",
    "null_space",
    "rref",
    "poly_add",
    "poly_sub",
    "poly_mul",
    "poly_compose",
    "LeastSquares",
    "solve_least_squares",
]


class Mode(enum.Enum):
    EXACT = "exact"
    FLOAT = "float"


class ModeError(TypeError):
    """Operands live in different numeric modes, or the mode is unsupported."""


class ShapeError(ValueError):
    """Operand dimensions do not fit together."""


def scalar(value, mode: Mode):
    """Coerce ``value`` into the scalar type of ``mode``."""
    if mode is Mode.EXACT:
        if isinstance(value, Fraction):
            return value
        if isinstance(value, (int, Rational)) and not isinstance(value, bool):
            return Fraction(value)
        if isinstance(value, str):
            return Fraction(value)
        if isinstance(value, float):
            # Exact binary expansion of the float, never a rounded decimal.
            return Fraction(value)
        raise ModeError(f"cannot represent {value!r} exactly")
    if isinstance(value, str):
        return float(Fraction(value))
    return float(value)


def infer_mode(values: Iterable) -> Mode:
    """EXACT when every value is an int/Fraction (or 'p/q' string), else FLOAT."""
    for v in values:
        if isinstance(v, float) or isinstance(v, np.floating):
            return Mode.FLOAT
    return Mode.EXACT


def _check_same_mode(a: Mode, b: Mode) -> Mode:
    if a is not b:
        raise ModeError(f"mixed numeric modes: {a.value} and {b.value}")
    return a


@dataclass(frozen=True)
class Matrix:
    """Immutable row-major dense matrix."""

    rows: int
    cols: int
    entries: tuple
    mode: Mode

    def __post_init__(self):
        if self.rows * self.cols != len(self.entries):
            raise ShapeError(
                f"{self.rows}x{self.cols} matrix needs {self.rows * self.cols} entries, "
                f"got {len(self.entries)}"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], mode: Mode | None = None) -> "Matrix":
        rows = [list(r) for r in rows]
        ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise ShapeError("ragged rows")
        flat = [v for r in rows for v in r]
        if mode is None:
            mode = infer_mode(flat)
        return cls(len(rows), ncols, tuple(scalar(v, mode) for v in flat), mode)

    @classmethod
    def identity(cls, n: int, mode: Mode = Mode.EXACT) -> "Matrix":
        return cls.from_rows([[1 if i == j else 0 for j in range(n)] for i in range(n)], mode)

    @classmethod
    def zeros(cls, rows: int, cols: int, mode: Mode = Mode.EXACT) -> "Matrix":
        return cls(rows, cols, (scalar(0, mode),) * (rows * cols), mode)

    @classmethod
    def column(cls, values: Sequence, mode: Mode | None = None) -> "Matrix":
        return cls.from_rows([[v] for v in values], mode)

    def __getitem__(self, idx):
        i, j = idx
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(idx)
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int) -> tuple:
        return tuple(self.entries[i * self.cols + j] for i in range(self.rows))

    def to_rows(self) -> list[list]:
        return [list(self.row(i)) for i in range(self.rows)]

    @property
    def T(self) -> "Matrix":
        return Matrix(
            self.cols,
            self.rows,
            tuple(self[i, j] for j in range(self.cols) for i in range(self.rows)),
            self.mode,
        )

    def select_columns(self, indices: Sequence[int]) -> "Matrix":
        return Matrix.from_rows([[self[i, j] for j in indices] for i in range(self.rows)], self.mode)

    def hstack(self, other: "Matrix") -> "Matrix":
        _check_same_mode(self.mode, other.mode)
        if self.rows != other.rows:
            raise ShapeError("hstack needs equal row counts")
        return Matrix.from_rows(
            [list(self.row(i)) + list(other.row(i)) for i in range(self.rows)], self.mode
        )

    def with_mode(self, mode: Mode) -> "Matrix":
        if mode is self.mode:
            return self
        return Matrix(self.rows, self.cols, tuple(scalar(v, mode) for v in self.entries), mode)

    def map(self, fn) -> "Matrix":
        return Matrix(self.rows, self.cols, tuple(fn(v) for v in self.entries), self.mode)

    def to_numpy(self) -> np.ndarray:
        return np.array([float(v) for v in self.entries], dtype=float).reshape(self.rows, self.cols)

    def max_abs(self):
        return max((abs(v) for v in self.entries), default=scalar(0, self.mode))

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return mat_mul(self, other)

    def __add__(self, other: "Matrix") -> "Matrix":
        _check_same_mode(self.mode, other.mode)
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ShapeError("addition needs equal shapes")
        return Matrix(
            self.rows, self.cols, tuple(a + b for a, b in zip(self.entries, other.entries)), self.mode
        )

    def __neg__(self) -> "Matrix":
        return self.map(lambda v: -v)

    def __sub__(self, other: "Matrix") -> "Matrix":
        return self + (-other)

    def __str__(self) -> str:
        cells = [[str(v) for v in self.row(i)] for i in range(self.rows)]
        width = max((len(c) for r in cells for c in r), default=1)
        return "\n".join("[" + " ".join(c.rjust(width) for c in r) + "]" for r in cells)


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    mode = _check_same_mode(a.mode, b.mode)
    if a.cols != b.rows:
        raise ShapeError(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    zero = scalar(0, mode)
    out = []
    for i in range(a.rows):
        arow = a.row(i)
        for j in range(b.cols):
            acc = zero
            for k in range(a.cols):
                acc += arow[k] * b.entries[k * b.cols + j]
            out.append(acc)
    return Matrix(a.rows, b.cols, tuple(out), mode)


def rank(m: Matrix) -> int:
    """Exact rank by fraction-free (Bareiss) elimination."""
    if m.mode is not Mode.EXACT:
        raise ModeError("rank requires exact (rational) entries")
    # Clear denominators row by row; rank is unchanged by nonzero row scaling.
    work = []
    for i in range(m.rows):
        row = m.row(i)
        lcm = 1
        for v in row:
            lcm = math.lcm(lcm, v.denominator)
        work.append([int(v * lcm) for v in row])

    r = 0
    prev = 1
    for c in range(m.cols):
        if r == m.rows:
            break
        pivot = next((i for i in range(r, m.rows) if work[i][c] != 0), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        p = work[r][c]
        for i in range(r + 1, m.rows):
            wi = work[i]
            f = wi[c]
            for j in range(c + 1, m.cols):
                # Division by the previous pivot is exact (Sylvester identity).
                wi[j] = (p * wi[j] - f * work[r][j]) // prev
            wi[c] = 0
        prev = p
        r += 1
    return r


def inverse(m: Matrix) -> Matrix:
    """Gauss-Jordan inverse of a square exact matrix."""
    if m.mode is not Mode.EXACT:
        raise ModeError("inverse is only provided in exact mode")
    n = m.rows
    if n != m.cols:
        raise ShapeError("inverse needs a square matrix")
    aug = [list(m.row(i)) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for c in range(n):
        pivot = next((i for i in range(c, n) if aug[i][c] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("matrix is singular")
        aug[c], aug[pivot] = aug[pivot], aug[c]
        p = aug[c][c]
        aug[c] = [v / p for v in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[c])]
    return Matrix.from_rows([r[n:] for r in aug], Mode.EXACT)


@dataclass(frozen=True)
class Poly:
    """Dense univariate polynomial; ``coeffs[k]`` multiplies ``u**k``."""

    coeffs: tuple
    mode: Mode

    @classmethod
    def of(cls, coeffs: Sequence, mode: Mode | None = None) -> "Poly":
        coeffs = list(coeffs)
        if mode is None:
            mode = infer_mode(coeffs)
        return cls(tuple(scalar(c, mode) for c in coeffs), mode)

    @classmethod
    def from_descending(cls, coeffs: Sequence, mode: Mode | None = None) -> "Poly":
        """Build from highest-power-first order, e.g. ``[t^3, t^2, t, 1]`` weights."""
        return cls.of(list(coeffs)[::-1], mode)

    def descending(self, length: int | None = None) -> list:
        c = list(self.coeffs)
        if length is not None:
            c = (c + [scalar(0, self.mode)] * length)[:length]
        return c[::-1]

    def degree(self) -> float:
        """Highest power with a nonzero coefficient, ``-inf`` for the zero polynomial."""
        for k in range(len(self.coeffs) - 1, -1, -1):
            if self.coeffs[k] != 0:
                return k
        return -math.inf

    def coeff(self, k: int):
        return self.coeffs[k] if k < len(self.coeffs) else scalar(0, self.mode)

    def __call__(self, t):
        acc = scalar(0, self.mode) if not isinstance(t, float) else 0.0
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def __add__(self, other: "Poly") -> "Poly":
        return poly_add(self, other)

    def __sub__(self, other: "Poly") -> "Poly":
        return poly_sub(self, other)

    def __mul__(self, other) -> "Poly":
        if isinstance(other, Poly):
            return poly_mul(self, other)
        s = scalar(other, self.mode)
        return Poly(tuple(c * s for c in self.coeffs), self.mode)

    __rmul__ = __mul__

    def trimmed(self) -> "Poly":
        d = self.degree()
        if d == -math.inf:
            return Poly((), self.mode)
        return Poly(self.coeffs[: int(d) + 1], self.mode)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return self.mode is other.mode and self.trimmed().coeffs == other.trimmed().coeffs

    def __hash__(self):
        return hash((self.trimmed().coeffs, self.mode))


def poly_add(p: Poly, q: Poly) -> Poly:
    mode = _check_same_mode(p.mode, q.mode)
    n = max(len(p.coeffs), len(q.coeffs))
    return Poly(tuple(p.coeff(k) + q.coeff(k) for k in range(n)), mode)


def poly_sub(p: Poly, q: Poly) -> Poly:
    return poly_add(p, q * -1)


def poly_mul(p: Poly, q: Poly) -> Poly:
    mode = _check_same_mode(p.mode, q.mode)
    if not p.coeffs or not q.coeffs:
        return Poly((), mode)
    out = [scalar(0, mode)] * (len(p.coeffs) + len(q.coeffs) - 1)
    for i, a in enumerate(p.coeffs):
        if a == 0:
            continue
        for j, b in enumerate(q.coeffs):
            out[i + j] += a * b
    return Poly(tuple(out), mode)


def poly_compose(p: Poly, q: Poly) -> Poly:
    """Return ``p(q(u))`` by Horner's scheme."""
    mode = _check_same_mode(p.mode, q.mode)
    acc = Poly((), mode)
    for c in reversed(p.coeffs):
        acc = poly_add(poly_mul(acc, q), Poly((c,), mode))
    return acc


class LeastSquares(NamedTuple):
    x: np.ndarray
    rank: int
    residual_norm: float
    rank_deficient: bool


def solve_least_squares(a, b) -> LeastSquares:
    """Minimum-norm least-squares solution of ``a @ x ~= b`` (float mode).

    Rank deficiency is reported in the result rather than raised.
    """
    if isinstance(a, Matrix):
        if a.mode is not Mode.FLOAT:
            raise ModeError("solve_least_squares works in float mode")
        a = a.to_numpy()
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.shape[0] != b.shape[0]:
        raise ShapeError(f"{a.shape[0]} rows but {b.shape[0]} right-hand sides")
    x, _, r, _ = np.linalg.lstsq(a, b, rcond=None)
    resid = float(np.linalg.norm(a @ x - b))
    return LeastSquares(x, int(r), resid, int(r) < min(a.shape))


def rref(m: Matrix) -> tuple[Matrix, tuple[int, ...]]:
    """Reduced row echelon form (exact) and the pivot columns."""
    if m.mode is not Mode.EXACT:
        raise ModeError("rref requires exact (rational) entries")
    a = m.to_rows()
    pivots = []
    r = 0
    for c in range(m.cols):
        pivot = next((i for i in range(r, m.rows) if a[i][c] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        p = a[r][c]
        a[r] = [v / p for v in a[r]]
        for i in range(m.rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == m.rows:
            break
    return Matrix.from_rows(a, Mode.EXACT), tuple(pivots)


def null_space(m: Matrix) -> list[tuple]:
    """Exact basis of ``{x : m x = 0}``, one vector per free column."""
    reduced, pivots = rref(m)
    free = [c for c in range(m.cols) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * m.cols
        x[f] = Fraction(1)
        for r, pc in enumerate(pivots):
            x[pc] = -reduced[r, f]
        basis.append(tuple(x))
    return basis
