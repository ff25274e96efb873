"""S-Patch: a Hermite bicubic patch whose two diagonal curves are cubic.

For one coordinate the diagonal ``v = u`` is ``u^T R1 u`` with
``R1 = M_H^T X M_H`` and the diagonal ``v = 1 - u`` is ``u^T R2 u`` with
``R2 = R1 T``.  Their three highest coefficients (u^6, u^5, u^4) are linear in
the 16 control values; stacking them gives a 6x16 constraint matrix of rank 5.
Eliminating the twists leaves one linear condition between the eight boundary
tangents and the corners (the "compatibility" condition handled below), after
which the four twists follow in closed form.

Vector orderings used throughout:

* control vector (16): x11 x12 x13 x14 x21 ... x44 (row-major over X)
* corners (4): x11 x12 x21 x22
* tangents (8): x13 x14 x23 x24 x31 x32 x41 x42
* twists (4): x33 x34 x43 x44
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Collection, Literal, Sequence

import numpy as np

from .algebra import (
    Matrix,
    Mode,
    Poly,
    infer_mode,
    inverse,
    poly_add,
    poly_compose,
    poly_mul,
    rank,
    scalar,
)
from .hermite import Patch3, geometry_matrix, hermite_matrix

log = logging.getLogger(__name__)

COORDS = ("x", "y", "z")

XI_LABELS = tuple(f"x{i}{j}" for i in range(1, 5) for j in range(1, 5))
XI1_LABELS = ("x11", "x12", "x21", "x22")
XI2_LABELS = ("x13", "x14", "x23", "x24", "x31", "x32", "x33", "x34", "x41", "x42", "x43", "x44")
TANGENT_LABELS = ("x13", "x14", "x23", "x24", "x31", "x32", "x41", "x42")
TWIST_LABELS = ("x33", "x34", "x43", "x44")

# Coefficients of the compatibility condition over TANGENT_LABELS.
COMPAT_SIGNS = (1, 1, -1, -1, 1, -1, 1, -1)

SPATCH_RTOL = 1e-9
PHI_RTOL = 1e-12
COMPAT_RTOL = 1e-9

Policy = Literal["strict", "project"]


def _index(label: str) -> tuple[int, int]:
    return int(label[1]) - 1, int(label[2]) - 1


# Printed reference values; the programmatic derivation must reproduce LAMBDA exactly.
LAMBDA_PRINTED = (
    (4, -4, 2, 2, -4, 4, -2, -2, 2, -2, 1, 1, 2, -2, 1, 1),
    (-12, 12, -7, -5, 12, -12, 7, 5, -7, 7, -4, -3, -5, 5, -3, -2),
    (9, -9, 8, 3, -9, 9, -8, -3, 8, -8, 6, 3, 3, -3, 3, 1),
    (-4, 4, -2, -2, 4, -4, 2, 2, -2, 2, -1, -1, -2, 2, -1, -1),
    (12, -12, 5, 7, -12, 12, -5, -7, 7, -7, 3, 4, 5, -5, 2, 3),
    (-9, 9, -3, -8, 9, -9, 3, 8, -8, 8, -3, -6, -3, 3, -1, -3),
)
LAMBDA1_PRINTED = (
    (4, -4, -4, 4),
    (-12, 12, 12, -12),
    (9, -9, -9, 9),
    (-4, 4, 4, -4),
    (12, -12, -12, 12),
    (-9, 9, 9, -9),
)
LAMBDA2_PRINTED = (
    (2, 2, -2, -2, 2, -2, 1, 1, 2, -2, 1, 1),
    (-7, -5, 7, 5, -7, 7, -4, -3, -5, 5, -3, -2),
    (8, 3, -8, -3, 8, -8, 6, 3, 3, -3, 3, 1),
    (-2, -2, 2, 2, -2, 2, -1, -1, -2, 2, -1, -1),
    (5, 7, -5, -7, 7, -7, 3, 4, 5, -5, 2, 3),
    (-3, -8, 3, 8, -8, 8, -3, -6, -3, 3, -1, -3),
)


def _sparse(**entries: int) -> tuple:
    row = [0] * 16
    for pos, val in entries.items():
        row[int(pos[1:]) - 1] = val
    return tuple(row)


OMEGA1_PRINTED = (
    (4, -4, 2, 2, -4, 4, -2, -2, 2, -2, 1, 1, 2, -2, 1, 1),
    (-6, 6, -4, -2, 6, -6, 4, 2, -3, 3, -2, -1, -3, 3, -2, -1),
    _sparse(c3=2, c7=-2, c11=1, c15=1),
    _sparse(c1=2, c5=-2, c9=1, c13=1),
    (-6, 6, -3, -3, 6, -6, 3, 3, -4, 4, -2, -2, -2, 2, -1, -1),
    (9, -9, 6, 3, -9, 9, -6, -3, 6, -6, 4, 2, 3, -3, 2, 1),
    _sparse(c3=-3, c7=3, c11=-2, c15=-1),
    _sparse(c1=-3, c5=3, c9=-2, c13=-1),
    _sparse(c9=2, c10=-2, c11=1, c12=1),
    _sparse(c9=-3, c10=3, c11=-2, c12=-1),
    _sparse(c11=1),
    _sparse(c9=1),
    _sparse(c1=2, c2=-2, c3=1, c4=1),
    _sparse(c1=-3, c2=3, c3=-2, c4=-1),
    _sparse(c3=1),
    _sparse(c1=1),
)
OMEGA2_PRINTED = (
    (4, -4, 2, 2, -4, 4, -2, -2, 2, -2, 1, 1, 2, -2, 1, 1),
    (-6, 6, -4, -2, 6, -6, 4, 2, -3, 3, -2, -1, -3, 3, -2, -1),
    _sparse(c4=-2, c8=-2, c12=-1, c16=-1),
    _sparse(c2=2, c6=-2, c10=1, c14=1),
    (6, -6, 3, 3, -6, 6, -3, -3, 4, -4, 2, 2, 2, -2, 1, 1),
    (-9, 9, -3, -6, 9, -9, 3, 6, -6, 6, -2, -4, -3, 3, -1, -2),
    _sparse(c3=-3, c7=3, c11=-2, c15=-1),
    _sparse(c2=-3, c6=3, c10=-2, c14=-1),
    _sparse(c9=-2, c10=2, c11=-1, c12=-1),
    _sparse(c9=3, c10=-3, c11=1, c12=2),
    _sparse(c11=-1),
    _sparse(c10=1),
    _sparse(c1=-2, c2=2, c3=-1, c4=-1),
    _sparse(c1=3, c2=-3, c3=1, c4=2),
    _sparse(c4=-1),
    _sparse(c2=1),
)


class DiagonalKind(enum.Enum):
    MAIN = "main"  # v = u
    ANTI = "anti"  # v = 1 - u


class DerivationError(RuntimeError):
    """The programmatic constraint derivation disagrees with the reference data."""


class IncompatibleTangentsError(ValueError):
    def __init__(self, residuals, tolerance=None):
        self.residuals = residuals
        self.tolerance = tolerance
        super().__init__(f"boundary tangents violate the compatibility condition: residuals {residuals}")


class NotAnSPatchError(ValueError):
    pass


class InternalDegreeError(RuntimeError):
    pass


@lru_cache(maxsize=None)
def t_matrix(mode: Mode = Mode.EXACT) -> Matrix:
    """Maps [u^3, u^2, u, 1] to the powers of (1 - u)."""
    return Matrix.from_rows(
        ((-1, 3, -3, 1), (0, 1, -2, 1), (0, 0, -1, 1), (0, 0, 0, 1)), mode
    )


def r_matrix(g: Matrix, d: DiagonalKind) -> Matrix:
    mh = hermite_matrix(g.mode)
    r = mh.T @ g @ mh
    if d is DiagonalKind.ANTI:
        r = r @ t_matrix(g.mode)
    return r


def diagonal_coeffs(g: Matrix, d: DiagonalKind) -> Poly:
    """Diagonal curve coefficients a0..a6 from anti-diagonal sums of R."""
    r = r_matrix(g, d)
    zero = scalar(0, g.mode)
    a = [zero] * 7
    for i in range(4):
        for j in range(4):
            # r_ij (0-based) multiplies u^(3-i) * u^(3-j)
            a[6 - i - j] += r[i, j]
    return Poly(tuple(a), g.mode)


@lru_cache(maxsize=1)
def _oracle_basis() -> tuple[Poly, ...]:
    # Cubic blending functions derived from their interpolation conditions
    # p(0), p(1), p'(0), p'(1); rows of the condition matrix act on [c0, c1, c2, c3].
    conditions = Matrix.from_rows(
        ((1, 0, 0, 0), (1, 1, 1, 1), (0, 1, 0, 0), (0, 1, 2, 3)), Mode.EXACT
    )
    coeffs = inverse(conditions)
    return tuple(Poly.of(coeffs.col(k), Mode.EXACT) for k in range(4))


def diagonal_oracle(g: Matrix, d: DiagonalKind) -> Poly:
    """Diagonal curve by symbolic substitution into the expanded patch."""
    if g.mode is not Mode.EXACT:
        raise TypeError("diagonal_oracle runs in exact mode")
    basis = _oracle_basis()
    u = Poly.of((0, 1), Mode.EXACT)
    v = u if d is DiagonalKind.MAIN else Poly.of((1, -1), Mode.EXACT)
    hu = basis
    hv = [poly_compose(h, v) for h in basis]
    total = Poly((), Mode.EXACT)
    for i in range(4):
        for j in range(4):
            if g[i, j] != 0:
                total = poly_add(total, poly_mul(hu[i], hv[j]) * g[i, j])
    return total


@dataclass(frozen=True)
class ConstraintSystem:
    omega1: Matrix
    omega2: Matrix
    lam: Matrix
    lambda1: Matrix
    lambda2: Matrix
    rank_lambda: int
    rank_lambda2: int
    omega_mismatches: tuple = field(default=())

    @property
    def lambda_(self) -> Matrix:
        return self.lam


def _basis_matrix(k: int) -> Matrix:
    return geometry_matrix([[1 if 4 * i + j == k else 0 for j in range(4)] for i in range(4)], Mode.EXACT)


def _omega(d: DiagonalKind) -> Matrix:
    cols = [r_matrix(_basis_matrix(m), d).entries for m in range(16)]
    return Matrix.from_rows([[cols[m][k] for m in range(16)] for k in range(16)], Mode.EXACT)


def _high_rows(omega: Matrix) -> list[list]:
    # a6 <- r11; a5 <- r12 + r21; a4 <- r13 + r22 + r31 (row-major indices)
    groups = ((0,), (1, 4), (2, 5, 8))
    return [[sum(omega[k, c] for k in grp) for c in range(16)] for grp in groups]


def _compare(name: str, got: Matrix, printed) -> list[tuple]:
    out = []
    for i, row in enumerate(printed):
        for j, val in enumerate(row):
            if got[i, j] != val:
                out.append((name, i + 1, j + 1, int(val), got[i, j]))
    return out


@lru_cache(maxsize=1)
def build_constraint_system() -> ConstraintSystem:
    omega1 = _omega(DiagonalKind.MAIN)
    omega2 = _omega(DiagonalKind.ANTI)
    lam = Matrix.from_rows(_high_rows(omega1) + _high_rows(omega2), Mode.EXACT)
    lambda1 = lam.select_columns([XI_LABELS.index(s) for s in XI1_LABELS])
    lambda2 = lam.select_columns([XI_LABELS.index(s) for s in XI2_LABELS])

    golden = (
        _compare("Lambda", lam, LAMBDA_PRINTED)
        + _compare("Lambda1", lambda1, LAMBDA1_PRINTED)
        + _compare("Lambda2", lambda2, LAMBDA2_PRINTED)
    )
    if golden:
        raise DerivationError(f"derived constraint matrix differs from reference: {golden}")

    mismatches = _compare("Omega1", omega1, OMEGA1_PRINTED) + _compare("Omega2", omega2, OMEGA2_PRINTED)
    for name, i, j, printed, derived in mismatches:
        log.info("%s[%d,%d]: printed %d, derived %s (derived value kept)", name, i, j, printed, derived)

    rank_lambda = rank(lam)
    if rank_lambda != 5:
        raise DerivationError(f"rank of constraint matrix is {rank_lambda}, expected 5")
    return ConstraintSystem(
        omega1=omega1,
        omega2=omega2,
        lam=lam,
        lambda1=lambda1,
        lambda2=lambda2,
        rank_lambda=rank_lambda,
        rank_lambda2=rank(lambda2),
        omega_mismatches=tuple(mismatches),
    )


# -- per-coordinate boundary data ------------------------------------------


def _mode_of(*groups) -> Mode:
    return infer_mode(v for g in groups for v in g)


def _scale(*groups) -> float:
    return max([1.0] + [abs(float(v)) for g in groups for v in g])


def phi(corners: Sequence):
    """x11 - x12 - x21 + x22."""
    x11, x12, x21, x22 = corners
    return x11 - x12 - x21 + x22


def compatibility_residual(corners: Sequence, tangents: Sequence):
    """LHS - RHS of the tangent/corner coupling; zero iff the data is compatible."""
    if len(corners) != 4 or len(tangents) != 8:
        raise ValueError("expected 4 corner values and 8 tangent values")
    mode = _mode_of(corners, tangents)
    lhs = sum(s * scalar(t, mode) for s, t in zip(COMPAT_SIGNS, tangents))
    return lhs + 4 * phi([scalar(c, mode) for c in corners])


def compat_tolerance(corners: Sequence, tangents: Sequence) -> float:
    return COMPAT_RTOL * _scale(corners, tangents)


def project_tangents(
    corners: Sequence, tangents: Sequence, free: Collection[int] | None = None
) -> tuple:
    """Minimum-norm tangent correction that satisfies the compatibility condition.

    Only the slots listed in ``free`` (indices into the tangent ordering) move;
    by default all eight do.  Corners are never touched.
    """
    mode = _mode_of(corners, tangents)
    tangents = [scalar(t, mode) for t in tangents]
    free = sorted(range(8) if free is None else free)
    if not free:
        raise ValueError("at least one tangent slot must be free")
    r = compatibility_residual(corners, tangents)
    if r == 0:
        return tuple(tangents)
    # Every coefficient is +-1, so the squared norm over the free slots is len(free).
    step = r / scalar(len(free), mode)
    out = list(tangents)
    for k in free:
        out[k] = tangents[k] - step * COMPAT_SIGNS[k]
    return tuple(out)


def solve_twists(corners: Sequence, tangents: Sequence, tolerance=None) -> tuple:
    """Twists (x33, x34, x43, x44) that make both diagonals cubic.

    Raises :class:`IncompatibleTangentsError` when the boundary data is not
    compatible (exactly, in exact mode; within ``tolerance`` otherwise).
    """
    mode = _mode_of(corners, tangents)
    corners = [scalar(c, mode) for c in corners]
    tangents = [scalar(t, mode) for t in tangents]
    r = compatibility_residual(corners, tangents)
    if mode is Mode.EXACT:
        if r != 0:
            raise IncompatibleTangentsError([r], 0)
    else:
        tol = compat_tolerance(corners, tangents) if tolerance is None else tolerance
        if abs(r) > tol:
            raise IncompatibleTangentsError([r], tol)
    x13, x14, x23, x24, x31, x32, x41, x42 = tangents
    f = phi(corners)
    a = x14 - x24 + x41 - x42
    b = x13 - x23 + x41 - x42
    x43 = -f - b
    x44 = -f - a
    x34 = 2 * f - x43
    x33 = 2 * f - x44
    return (x33, x34, x43, x44)


def assemble(corners: Sequence, tangents: Sequence, twists: Sequence, mode: Mode | None = None) -> Matrix:
    """Place corner, tangent and twist values into a 4x4 geometry matrix."""
    if mode is None:
        mode = _mode_of(corners, tangents, twists)
    rows = [[None] * 4 for _ in range(4)]
    for labels, values in ((XI1_LABELS, corners), (TANGENT_LABELS, tangents), (TWIST_LABELS, twists)):
        for label, value in zip(labels, values):
            i, j = _index(label)
            rows[i][j] = value
    return geometry_matrix(rows, mode)


def split(g: Matrix) -> tuple[tuple, tuple, tuple]:
    """Inverse of :func:`assemble`: (corners, tangents, twists)."""
    pick = lambda labels: tuple(g[_index(s)] for s in labels)
    return pick(XI1_LABELS), pick(TANGENT_LABELS), pick(TWIST_LABELS)


# -- validity ---------------------------------------------------------------


@dataclass(frozen=True)
class SPatchReport:
    """High diagonal coefficients (a6, a5, a4) per coordinate and diagonal."""

    high_coeffs: dict
    residuals: dict
    thresholds: dict
    exact: bool

    @property
    def passed(self) -> bool:
        return all(self.residuals[c] <= self.thresholds[c] for c in COORDS)

    def failing(self) -> list[str]:
        return [c for c in COORDS if self.residuals[c] > self.thresholds[c]]


def spatch_tolerance(g: Matrix, rtol: float = SPATCH_RTOL) -> float:
    return rtol * max(1.0, float(g.max_abs()))


def check_spatch(p: Patch3, tol: float | None = None) -> SPatchReport:
    """Check that both diagonals of every coordinate have degree <= 3.

    Exact patches must cancel exactly unless ``tol`` is given.  Float patches
    use ``tol`` (default 1e-9) relative to ``max(1, max |control value|)``.
    """
    exact = p.mode is Mode.EXACT and tol is None
    high, resid, thresh = {}, {}, {}
    for name, g in zip(COORDS, p.coords):
        per = {}
        for d in DiagonalKind:
            a = diagonal_coeffs(g, d)
            per[d] = (a.coeff(6), a.coeff(5), a.coeff(4))
        high[name] = per
        resid[name] = max(abs(v) for vals in per.values() for v in vals)
        thresh[name] = 0 if exact else spatch_tolerance(g, SPATCH_RTOL if tol is None else tol)
    return SPatchReport(high, resid, thresh, exact)


def alpha_beta(g: Matrix, tol: float | None = None):
    """Barycentric twist parameters ``(alpha, beta)`` or ``None`` when phi ~ 0.

    ``x44 = 2 phi alpha`` and ``x43 = 2 phi beta``.
    """
    corners, _, (x33, x34, x43, x44) = split(g)
    f = phi(corners)
    e1 = x33 + x44 - 2 * f
    e2 = x34 + x43 - 2 * f
    if g.mode is Mode.EXACT and tol is None:
        if e1 != 0 or e2 != 0:
            raise NotAnSPatchError(f"twist identities violated: {e1}, {e2}")
        if f == 0:
            return None
    else:
        eps = spatch_tolerance(g) if tol is None else tol
        if abs(e1) > eps or abs(e2) > eps:
            raise NotAnSPatchError(f"twist identities violated: {float(e1):.3g}, {float(e2):.3g}")
        if abs(f) <= PHI_RTOL * _scale(corners):
            return None
    return x44 / (2 * f), x43 / (2 * f)


@dataclass(frozen=True)
class SPatch:
    patch: Patch3
    alpha: tuple
    beta: tuple
    report: SPatchReport
    compat_residuals: tuple = ()

    @property
    def residuals(self) -> dict:
        return self.report.residuals


def _per_coord(points: Sequence[Sequence], mode: Mode) -> list[list]:
    pts = [[scalar(v, mode) for v in pt] for pt in points]
    return [[pt[c] for pt in pts] for c in range(3)]


def boundary_values(corners, tangents_u, tangents_v, mode: Mode | None = None):
    """Split 3-D boundary data into per-coordinate (corners, tangents) lists.

    ``corners`` are the points at (u,v) = (0,0), (0,1), (1,0), (1,1);
    ``tangents_u`` the d/du vectors at those corners (x31, x32, x41, x42) and
    ``tangents_v`` the d/dv vectors (x13, x14, x23, x24).
    """
    for name, arr in (("corners", corners), ("tangents_u", tangents_u), ("tangents_v", tangents_v)):
        if len(arr) != 4 or any(len(pt) != 3 for pt in arr):
            raise ValueError(f"{name} must be four 3-vectors")
    if mode is None:
        mode = infer_mode(v for arr in (corners, tangents_u, tangents_v) for pt in arr for v in pt)
    cs = _per_coord(corners, mode)
    tu = _per_coord(tangents_u, mode)
    tv = _per_coord(tangents_v, mode)
    return mode, cs, [tv[c] + tu[c] for c in range(3)]


def hermite_patch(corners, tangents_u, tangents_v, twists=None, mode: Mode | None = None) -> Patch3:
    """Plain Hermite patch from boundary data; twists default to zero."""
    mode, cs, ts = boundary_values(corners, tangents_u, tangents_v, mode)
    tw = [[0] * 4] * 3 if twists is None else [[twists[k][c] for k in range(4)] for c in range(3)]
    return Patch3(*(assemble(cs[c], ts[c], tw[c], mode) for c in range(3)))


def spatch_from_coords(coords: Sequence[tuple], compat=()) -> SPatch:
    """Assemble per-coordinate (corners, tangents) into a verified S-Patch."""
    mats = []
    for corners, tangents in coords:
        mats.append(assemble(corners, tangents, solve_twists(corners, tangents)))
    mode = mats[0].mode
    patch = Patch3(*(m.with_mode(mode) for m in mats))
    report = check_spatch(patch)
    if not report.passed:
        raise InternalDegreeError(f"constructed patch fails degree check in {report.failing()}")
    ab = [alpha_beta(g) for g in patch.coords]
    return SPatch(
        patch=patch,
        alpha=tuple(None if v is None else v[0] for v in ab),
        beta=tuple(None if v is None else v[1] for v in ab),
        report=report,
        compat_residuals=tuple(compat),
    )


def construct_spatch(
    corners, tangents_u, tangents_v, policy: Policy = "strict", mode: Mode | None = None
) -> SPatch:
    """Build an S-Patch from corners and boundary tangents.

    ``strict`` rejects incompatible data; ``project`` first applies the
    minimum-norm tangent correction per coordinate.
    """
    if policy not in ("strict", "project"):
        raise ValueError(f"unknown policy {policy!r}")
    mode, cs, ts = boundary_values(corners, tangents_u, tangents_v, mode)
    residuals = [compatibility_residual(cs[c], ts[c]) for c in range(3)]
    if policy == "strict":
        if mode is Mode.EXACT:
            bad = any(r != 0 for r in residuals)
        else:
            bad = any(abs(r) > compat_tolerance(cs[c], ts[c]) for c, r in enumerate(residuals))
        if bad:
            raise IncompatibleTangentsError(residuals)
    else:
        ts = [project_tangents(cs[c], ts[c]) for c in range(3)]
    return spatch_from_coords(list(zip(cs, ts)), residuals)


def affine_transform(p: Patch3, matrix, offset) -> Patch3:
    """Apply ``x -> A x + b`` to a patch's control data (float mode)."""
    a = np.asarray(matrix, dtype=float)
    b = np.asarray(offset, dtype=float)
    data = np.einsum("ij,jkl->ikl", a, p.array)
    for i, j in ((0, 0), (0, 1), (1, 0), (1, 1)):
        data[:, i, j] += b
    return Patch3.from_arrays(data.tolist(), Mode.FLOAT)
