import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spatchkit import spatch as sp
from spatchkit.algebra import Matrix, Mode, Poly, null_space, solve_least_squares
from spatchkit.hermite import Patch3, geometry_matrix
from spatchkit.spatch import (
    COMPAT_SIGNS,
    DerivationError,
    DiagonalKind,
    IncompatibleTangentsError,
    NotAnSPatchError,
    XI1_LABELS,
    XI2_LABELS,
    XI_LABELS,
    affine_transform,
    alpha_beta,
    assemble,
    build_constraint_system,
    check_spatch,
    compatibility_residual,
    construct_spatch,
    diagonal_coeffs,
    diagonal_oracle,
    project_tangents,
    r_matrix,
    solve_twists,
    split,
    t_matrix,
)

from conftest import e11_patch, planar_uv_patch, random_boundary, random_float_patch, random_rational_geometry

ZERO4 = geometry_matrix([[0] * 4] * 4)
E11 = e11_patch().x
PLANAR_CORNERS = (0, 1, 1, 2)
PLANAR_TANGENTS = (1,) * 8

fractions = st.fractions(min_value=-10, max_value=10, max_denominator=6)


class TestSubstitution:
    def test_entry(self):
        assert t_matrix()[0, 0] == -1

    def test_u_equals_one(self):
        assert (t_matrix() @ Matrix.column([1, 1, 1, 1])).col(0) == (0, 0, 0, 1)

    def test_involution(self):
        assert t_matrix() @ t_matrix() == Matrix.identity(4)


class TestRMatrix:
    def test_zero(self):
        assert all(v == 0 for v in r_matrix(ZERO4, DiagonalKind.MAIN).entries)

    def test_e11(self):
        r = r_matrix(E11, DiagonalKind.MAIN)
        assert r[0, 0] == 4
        assert r[0, 1] + r[1, 0] == -12


class TestDiagonal:
    def test_zero(self):
        assert diagonal_coeffs(ZERO4, DiagonalKind.MAIN).degree() == -math.inf
        assert diagonal_oracle(ZERO4, DiagonalKind.ANTI).degree() == -math.inf

    def test_e11_high_coefficients(self):
        a = diagonal_coeffs(E11, DiagonalKind.MAIN)
        assert (a.coeff(6), a.coeff(5), a.coeff(4)) == (4, -12, 9)

    def test_e11_oracle_leading(self):
        a = diagonal_oracle(E11, DiagonalKind.MAIN)
        assert a.degree() == 6 and a.coeff(6) == 4

    def test_planar_oracle(self):
        assert diagonal_oracle(planar_uv_patch().x, DiagonalKind.MAIN) == Poly.of([0, 2])

    @pytest.mark.parametrize("kind", list(DiagonalKind))
    def test_matches_oracle(self, kind):
        rnd = random.Random(7)
        for _ in range(40):
            g = random_rational_geometry(rnd)
            assert diagonal_coeffs(g, kind) == diagonal_oracle(g, kind)

    def test_float_mode_coefficients(self):
        a = diagonal_coeffs(E11.with_mode(Mode.FLOAT), DiagonalKind.MAIN)
        assert (a.coeff(6), a.coeff(5), a.coeff(4)) == (4.0, -12.0, 9.0)


class TestConstraintSystem:
    def test_lambda_first_row(self):
        assert build_constraint_system().lam.row(0) == (4, -4, 2, 2, -4, 4, -2, -2, 2, -2, 1, 1, 2, -2, 1, 1)

    def test_lambda1_second_row(self):
        assert build_constraint_system().lambda1.row(1) == (-12, 12, 12, -12)

    def test_ranks(self):
        cs = build_constraint_system()
        assert cs.rank_lambda == 5
        assert cs.rank_lambda2 == 5

    def test_lambda_rows_are_omega_sums(self):
        cs = build_constraint_system()
        for omega, offset in ((cs.omega1, 0), (cs.omega2, 3)):
            for k, group in enumerate(((0,), (1, 4), (2, 5, 8))):
                summed = tuple(sum(omega[r, c] for r in group) for c in range(16))
                assert cs.lam.row(offset + k) == summed

    def test_partition_reconstructs(self):
        cs = build_constraint_system()
        joined = cs.lambda2.hstack(cs.lambda1)
        order = [XI_LABELS.index(s) for s in XI2_LABELS + XI1_LABELS]
        assert joined == cs.lam.select_columns(order)

    def test_omega_built_from_basis(self):
        cs = build_constraint_system()
        rnd = random.Random(3)
        g = random_rational_geometry(rnd)
        xi = Matrix.column(g.entries)
        assert (cs.omega1 @ xi).col(0) == r_matrix(g, DiagonalKind.MAIN).entries
        assert (cs.omega2 @ xi).col(0) == r_matrix(g, DiagonalKind.ANTI).entries

    def test_omega1_matches_reference(self):
        assert not [m for m in build_constraint_system().omega_mismatches if m[0] == "Omega1"]

    def test_golden_mismatch_is_fatal(self, monkeypatch):
        bad = list(sp.LAMBDA_PRINTED)
        bad[1] = (-11,) + bad[1][1:]
        monkeypatch.setattr(sp, "LAMBDA_PRINTED", tuple(bad))
        with pytest.raises(DerivationError):
            build_constraint_system.__wrapped__()

    def test_null_directions_keep_validity(self):
        cs = build_constraint_system()
        basis = null_space(cs.lambda2)
        assert len(basis) == 12 - cs.rank_lambda2 == 7
        rnd = random.Random(11)
        corners, tu, tv = random_boundary(rnd)
        s = construct_spatch(corners, tu, tv, policy="project")
        g = s.patch.x
        for vec in basis:
            entries = list(g.entries)
            for label, dv in zip(XI2_LABELS, vec):
                i, j = int(label[1]) - 1, int(label[2]) - 1
                entries[4 * i + j] += 3 * dv
            moved = geometry_matrix([entries[4 * i:4 * i + 4] for i in range(4)])
            assert check_spatch(Patch3(moved, s.patch.y, s.patch.z)).passed


class TestCompatibility:
    def test_planar_zero(self):
        assert compatibility_residual(PLANAR_CORNERS, PLANAR_TANGENTS) == 0

    def test_zero_tangents(self):
        assert compatibility_residual((1, 0, 0, 0), (0,) * 8) == 4

    def test_equals_a_plus_b_plus_c_plus_4phi(self):
        rnd = random.Random(5)
        for _ in range(20):
            c = [Fraction(rnd.randint(-9, 9), rnd.randint(1, 4)) for _ in range(4)]
            t = [Fraction(rnd.randint(-9, 9), rnd.randint(1, 4)) for _ in range(8)]
            x13, x14, x23, x24, x31, x32, x41, x42 = t
            a = x14 - x24 + x41 - x42
            b = x13 - x23 + x41 - x42
            cc = x31 - x32 - x41 + x42
            assert compatibility_residual(c, t) == a + b + cc + 4 * sp.phi(c)


class TestProjection:
    def test_compatible_unchanged(self):
        assert project_tangents(PLANAR_CORNERS, PLANAR_TANGENTS) == PLANAR_TANGENTS

    def test_distributes_residual(self):
        out = project_tangents((1, 0, 0, 0), (0,) * 8)
        assert out == tuple(Fraction(-s, 2) for s in COMPAT_SIGNS)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(fractions, min_size=4, max_size=4), st.lists(fractions, min_size=8, max_size=8))
    def test_idempotent_and_exact(self, corners, tangents):
        once = project_tangents(corners, tangents)
        assert compatibility_residual(corners, once) == 0
        assert project_tangents(corners, once) == once

    def test_float_residual_small(self, rng):
        for _ in range(50):
            c = rng.uniform(-5, 5, 4).tolist()
            t = rng.uniform(-5, 5, 8).tolist()
            out = project_tangents(c, t)
            assert abs(compatibility_residual(c, out)) <= 1e-12 * max(1, *map(abs, c + t))

    def test_minimum_norm_matches_least_squares(self, rng):
        signs = np.array(COMPAT_SIGNS, dtype=float)
        for _ in range(20):
            c = rng.uniform(-3, 3, 4).tolist()
            t = rng.uniform(-3, 3, 8)
            r = compatibility_residual(c, t.tolist())
            delta = np.array(project_tangents(c, t.tolist())) - t
            ls = solve_least_squares(signs[None, :], [-r]).x
            np.testing.assert_allclose(delta, ls, atol=1e-12)

    def test_pinned_slots(self):
        out = project_tangents((1, 0, 0, 0), (0,) * 8, free=[0, 1, 2, 3])
        assert out[4:] == (0, 0, 0, 0)
        assert compatibility_residual((1, 0, 0, 0), out) == 0


class TestSolveTwists:
    def test_planar(self):
        assert solve_twists(PLANAR_CORNERS, PLANAR_TANGENTS) == (0, 0, 0, 0)

    def test_zero(self):
        assert solve_twists((0,) * 4, (0,) * 8) == (0, 0, 0, 0)

    def test_incompatible(self):
        with pytest.raises(IncompatibleTangentsError) as exc:
            solve_twists((1, 0, 0, 0), (0,) * 8)
        assert exc.value.residuals == [4]

    def test_brute_force_phi_one(self):
        corners = (1, 2, 3, 5)
        assert sp.phi(corners) == 1
        # first tangent assignment in {-1, 0, 1}^8 with a + b + c = -4
        found = next(
            t for t in itertools.product((-1, 0, 1), repeat=8) if compatibility_residual(corners, t) == 0
        )
        twists = solve_twists(corners, found)
        g = assemble(corners, found, twists)
        for d in DiagonalKind:
            assert diagonal_oracle(g, d).degree() <= 3
        x33, x34, x43, x44 = twists
        alpha, beta = alpha_beta(g)
        assert 2 * alpha == x44 and 2 * beta == x43

    @settings(max_examples=60, deadline=None)
    @given(st.lists(fractions, min_size=4, max_size=4), st.lists(fractions, min_size=8, max_size=8))
    def test_closure_identities_exact(self, corners, tangents):
        tangents = project_tangents(corners, tangents)
        x33, x34, x43, x44 = solve_twists(corners, tangents)
        f = sp.phi([Fraction(c) for c in corners])
        assert x33 + x44 == 2 * f
        assert x34 + x43 == 2 * f


class TestCheck:
    def test_planar_passes(self):
        rep = check_spatch(planar_uv_patch())
        assert rep.passed and rep.exact
        assert all(r == 0 for r in rep.residuals.values())

    def test_e11_fails(self):
        rep = check_spatch(e11_patch())
        assert not rep.passed
        assert rep.high_coeffs["x"][DiagonalKind.MAIN][0] == 4
        assert rep.failing() == ["x"]

    def test_generic_float_patches_fail(self, rng):
        fails = sum(not check_spatch(random_float_patch(rng), tol=1e-6).passed for _ in range(100))
        assert fails >= 99

    def test_affine_invariance(self, rng):
        rnd = random.Random(21)
        for _ in range(10):
            s = construct_spatch(*random_boundary(rnd), policy="project")
            a = rng.uniform(-2, 2, (3, 3))
            b = rng.uniform(-5, 5, 3)
            assert check_spatch(affine_transform(s.patch, a, b)).passed


class TestConstruct:
    def test_planar(self):
        s = construct_spatch(
            ((0, 0, 0), (1, -1, 0), (1, 1, 0), (2, 0, 0)),
            ((1, 1, 0),) * 4,
            ((1, -1, 0),) * 4,
        )
        for g in s.patch.coords:
            assert split(g)[2] == (0, 0, 0, 0)
            assert diagonal_oracle(g, DiagonalKind.MAIN).degree() <= 1
        assert s.alpha == (None, None, None)

    def test_random_project_is_exactly_cubic(self):
        rnd = random.Random(99)
        for _ in range(20):
            s = construct_spatch(*random_boundary(rnd), policy="project")
            assert s.patch.mode is Mode.EXACT
            for g in s.patch.coords:
                for d in DiagonalKind:
                    a = diagonal_oracle(g, d)
                    assert a.coeff(6) == a.coeff(5) == a.coeff(4) == 0

    def test_random_float_project(self, rng):
        for _ in range(20):
            data = rng.uniform(-3, 3, (3, 4, 3)).tolist()
            s = construct_spatch(*data, policy="project")
            assert check_spatch(s.patch, tol=1e-9).passed

    def test_strict_rejects(self):
        with pytest.raises(IncompatibleTangentsError) as exc:
            construct_spatch(((1, 0, 0), (0, 0, 0), (0, 0, 0), (0, 0, 0)), ((0, 0, 0),) * 4, ((0, 0, 0),) * 4)
        assert exc.value.residuals == [4, 0, 0]

    def test_phi_zero_coordinate(self):
        s = construct_spatch(
            ((0, 0, 0), (0, 1, 0), (1, 0, 0), (1, 1, 1)),
            ((1, 0, 0),) * 4,
            ((0, 1, 0),) * 4,
            policy="project",
        )
        assert s.alpha[0] is None and s.alpha[1] is None
        assert s.alpha[2] is not None

    def test_bad_policy(self):
        with pytest.raises(ValueError):
            construct_spatch(((0, 0, 0),) * 4, ((0, 0, 0),) * 4, ((0, 0, 0),) * 4, policy="repair")


class TestAlphaBeta:
    def _g(self, corners, twists):
        return assemble(corners, (0,) * 8, twists)

    def test_symmetric(self):
        # phi = 1, all twists phi
        assert alpha_beta(self._g((1, 0, 0, 0), (1, 1, 1, 1))) == (Fraction(1, 2), Fraction(1, 2))

    def test_phi_zero(self):
        assert alpha_beta(planar_uv_patch().x) is None

    def test_reconstructed(self):
        # phi = 2: twists from alpha = 0.3, beta = 0.7
        g = assemble((2.0, 0.0, 0.0, 0.0), (0.0,) * 8, (2.8, 1.2, 2.8, 1.2))
        alpha, beta = alpha_beta(g)
        assert alpha == pytest.approx(0.3, abs=1e-15)
        assert beta == pytest.approx(0.7, abs=1e-15)

    def test_violation(self):
        with pytest.raises(NotAnSPatchError):
            alpha_beta(self._g((1, 0, 0, 0), (1, 0, 0, 0)))
