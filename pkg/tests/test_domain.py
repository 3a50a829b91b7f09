import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cone_moduli.domain import (
    AngleVector,
    BeltramiRep,
    HermitianGram,
    ModuliPoint,
    QuadDiff,
    beltrami_eval,
    make_angle_vector,
    quad_diff_eval,
    smooth_bump,
)
from cone_moduli.errors import (
    AngleOutOfRange,
    EvalAtPole,
    GaussBonnetViolated,
    PunctureTooClose,
    QuadDiffConstraintViolated,
)
from cone_moduli.kernels import fit_decay_exponent


class TestAngleVector:
    def test_all_half(self):
        av = make_angle_vector([0.5, 0.5, 0.5, 0.5])
        assert av.n == 4
        for s in av.monodromy:
            assert s == pytest.approx(-1.0)

    def test_five_angles(self):
        av = make_angle_vector([0.3, 0.4, 0.5, 0.35, 0.45])
        assert av.n == 5

    def test_gauss_bonnet_violated(self):
        with pytest.raises(GaussBonnetViolated):
            make_angle_vector([0.5, 0.5, 0.5, 0.4])

    def test_out_of_range(self):
        with pytest.raises(AngleOutOfRange):
            make_angle_vector([1.2, 0.3, 0.3, 0.2])
        with pytest.raises(AngleOutOfRange):
            make_angle_vector([0.5, 0.5, 1.0, 0.0])

    def test_too_few(self):
        with pytest.raises(AngleOutOfRange):
            make_angle_vector([1.0, 0.5, 0.5])

    @given(st.lists(st.floats(0.05, 0.95), min_size=3, max_size=6))
    def test_invariants_hold_whenever_construction_succeeds(self, head):
        last = 2.0 - sum(head)
        if not (0.0 < last < 1.0):
            return
        try:
            av = make_angle_vector(head + [last])
        except GaussBonnetViolated:
            return
        assert abs(sum(av.alphas) - 2.0) <= 1e-12
        assert abs(np.prod(av.monodromy) - 1.0) <= 1e-10


class TestModuliPoint:
    def test_normalization(self):
        u = ModuliPoint.from_punctures([0, 1, 2.5 + 1j])
        assert u.finite_punctures[0] == 0
        assert u.finite_punctures[1] == 1
        assert u.free_coords == (2.5 + 1j,)
        assert u.n == 4

    def test_rejects_bad_normalization(self):
        with pytest.raises(ValueError):
            ModuliPoint.from_punctures([0.1, 1, 2])

    def test_rejects_close_punctures(self):
        with pytest.raises(PunctureTooClose):
            ModuliPoint((1 + 1e-4 + 0j,))

    def test_eps_min_configurable(self):
        u = ModuliPoint((1 + 1e-4 + 0j,), eps_min=1e-5)
        assert u.min_separation == pytest.approx(1e-4)

    def test_pole_guard(self):
        u = ModuliPoint.from_punctures([0, 1, 2])
        with pytest.raises(EvalAtPole):
            u.guard_not_pole(2 + 1e-5j)
        u.guard_not_pole(2 + 1e-3j)


class TestQuadDiff:
    def test_constraint_rejection(self):
        u = ModuliPoint.from_punctures([0, 1, 2])
        with pytest.raises(QuadDiffConstraintViolated):
            QuadDiff((1, -1, 0), u)  # sum rho u = -1
        with pytest.raises(QuadDiffConstraintViolated):
            QuadDiff((1, 0, 0), u)

    def test_eval_example(self):
        u = ModuliPoint.from_punctures([0, 1, 2])
        q = QuadDiff((1, -2, 1), u)
        assert quad_diff_eval(q, 3.0) == pytest.approx(1 / 3)

    def test_zero(self):
        u = ModuliPoint.from_punctures([0, 1, 2])
        q = QuadDiff((0, 0, 0), u)
        assert q.is_zero
        assert quad_diff_eval(q, 0.7 + 0.2j) == 0

    def test_dual_basis_matches_closed_form(self):
        # residues (u2-1, -u2, 1) are the partial fractions of
        # z(z-1)/(zeta (zeta-1)(zeta-z)) at z = u2
        u = ModuliPoint.from_punctures([0, 1, 2])
        q = QuadDiff((1, -2, 1), u)
        closed = (2 * (2 - 1)) / ((-1) * (-1 - 1) * (-1 - 2))
        assert quad_diff_eval(q, -1.0) == pytest.approx(closed)

    def test_eval_at_pole(self):
        u = ModuliPoint.from_punctures([0, 1, 2])
        q = QuadDiff((1, -2, 1), u)
        with pytest.raises(EvalAtPole):
            quad_diff_eval(q, 1 + 1e-6j)

    def test_far_decay_exponent(self):
        u = ModuliPoint.from_punctures([0, 1, 2])
        q = QuadDiff((1, -2, 1), u)
        radii = [1e2, 1e3, 1e4]
        vals = [q(r * np.exp(0.4j)) for r in radii]
        slope = fit_decay_exponent(radii, vals)
        assert slope <= -2 + 0.05

    @given(st.complex_numbers(max_magnitude=3.0, allow_nan=False,
                              allow_infinity=False),
           st.complex_numbers(max_magnitude=3.0, allow_nan=False,
                              allow_infinity=False))
    @settings(max_examples=25)
    def test_linear_combinations_stay_valid(self, c1, c2):
        u = ModuliPoint.from_punctures([0, 1, 2, 3.5])
        q1 = QuadDiff((2.5, -3.5, 0, 1), u)
        q2 = QuadDiff((1, -2, 1, 0), u)
        combo = tuple(c1 * a + c2 * b for a, b in zip(q1.residues, q2.residues))
        q = QuadDiff(combo, u)
        z = 0.4 + 2.2j
        assert q(z) == pytest.approx(c1 * q1(z) + c2 * q2(z), abs=1e-12)


class TestBeltramiRep:
    def test_smooth_compact_zero_outside(self):
        mu = BeltramiRep.smooth_compact(smooth_bump(0, 1.0), 1.0, sup_norm=1.0)
        assert beltrami_eval(mu, 2.0) == 0
        assert abs(beltrami_eval(mu, 0.0)) == pytest.approx(1.0)

    def test_smooth_compact_zero_function(self):
        mu = BeltramiRep.smooth_compact(lambda z: np.zeros_like(z), 1.0)
        assert beltrami_eval(mu, 0.3 + 0.1j) == 0

    def test_harmonic_example(self):
        al = make_angle_vector([0.5] * 4)
        u = ModuliPoint.from_punctures([0, 1, 2])
        psi = QuadDiff((1, -2, 1), u)
        a = BeltramiRep.harmonic(psi, al, u, vol=1.0)
        assert beltrami_eval(a, 3.0) == pytest.approx(2.0)

    def test_harmonic_zero(self):
        al = make_angle_vector([0.5] * 4)
        u = ModuliPoint.from_punctures([0, 1, 2])
        a = BeltramiRep.harmonic(QuadDiff((0, 0, 0), u), al, u, vol=3.7)
        assert beltrami_eval(a, 1.5 + 0.5j) == 0

    def test_harmonic_matches_definition(self):
        al = make_angle_vector([0.3, 0.6, 0.4, 0.7])
        u = ModuliPoint.from_punctures([0, 1, 1.5 + 0.5j])
        psi = QuadDiff((1.5 + 0.5j - 1, -(1.5 + 0.5j), 1), u)
        a = BeltramiRep.harmonic(psi, al, u, vol=2.0)
        z = -0.7 + 0.4j
        expect = np.conj(psi(z)) * np.prod(
            [abs(z - uk) ** (2 * ak) for uk, ak in zip(u.finite_punctures, al.finite)]) * 2.0
        assert beltrami_eval(a, z) == pytest.approx(expect, rel=1e-13)

    @pytest.mark.parametrize("k", [0, 2])
    def test_harmonic_growth_near_puncture(self, k):
        al = make_angle_vector([0.3, 0.6, 0.4, 0.7])
        u = ModuliPoint.from_punctures([0, 1, 1.5 + 0.5j])
        psi = QuadDiff((0.5 + 0.5j, -1.5 - 0.5j, 1), u)
        a = BeltramiRep.harmonic(psi, al, u, vol=1.0)
        uk = u.finite_punctures[k]
        radii = np.array([1e-3, 1e-4, 1e-5])
        vals = [np.mean(np.abs(a(uk + r * np.exp(2j * np.pi * np.arange(8) / 8))))
                for r in radii]
        slope = fit_decay_exponent(radii, vals)
        assert abs(slope - (2 * al.alphas[k] - 1)) <= 0.05

    def test_mismatched_configuration_rejected(self):
        al = make_angle_vector([0.5] * 4)
        u = ModuliPoint.from_punctures([0, 1, 2])
        other = ModuliPoint.from_punctures([0, 1, 3])
        psi = QuadDiff((1, -2, 1), u)
        with pytest.raises(ValueError):
            BeltramiRep.harmonic(psi, al, other, vol=1.0)


class TestHermitianGram:
    def test_accepts_valid(self):
        g = HermitianGram([[2.0, 0.1 + 0.2j], [0.1 - 0.2j, 1.5]])
        assert g.dim == 2
        assert np.all(g.eigenvalues > 0)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            HermitianGram([[1.0, 0.5], [0.2, 1.0]])

    def test_rejects_indefinite(self):
        with pytest.raises(ValueError):
            HermitianGram([[1.0, 3.0], [3.0, 1.0]])

    def test_error_allowance_loosens_hermiticity(self):
        err = np.full((2, 2), 0.05)
        g = HermitianGram([[1.0, 0.5 + 0.01j], [0.5 - 0.2j, 1.0]], err)
        assert g.dim == 2
