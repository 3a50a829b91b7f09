import numpy as np
import pytest

from oracles import plane_integral

from cone_moduli import _speed
from cone_moduli.domain import ModuliPoint
from cone_moduli.errors import NonIntegrableProfile, PunctureTooClose
from cone_moduli.quadrature import (
    QuadratureSpec,
    SingularityProfile,
    SingularPoint,
    integrate,
    integrate_points,
    integrate_pv_points,
    plan,
    plan_points,
)


def disk_indicator_profile():
    return SingularityProfile(exponents=(0.0, 0.0, 0.0), support_radius=1.0)


class TestSpec:
    def test_defaults(self):
        spec = QuadratureSpec()
        assert spec.radial_order == 24
        assert spec.angular_nodes == 64
        assert spec.patch_radius_factor == 0.25
        assert spec.refinement_depth == 6
        assert spec.target_rel_tol == 1e-9

    @pytest.mark.parametrize("kw", [
        {"radial_order": 2},
        {"angular_nodes": 63},
        {"patch_radius_factor": 0.6},
        {"target_rel_tol": 1e-15},
    ])
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            QuadratureSpec(**kw)


class TestPlan:
    def test_symmetric_example(self, default_spec):
        u = ModuliPoint.from_punctures([0, 1, 2])
        prof = SingularityProfile(exponents=(-1.0, -1.0, -1.0), far_exponent=-3.0)
        d = plan(u, prof, default_spec)
        main = [p for p in d.disks if not p.inverted]
        assert len(main) == 3
        assert all(p.radius == pytest.approx(0.25) for p in main)
        assert d.outer_radius == pytest.approx(8.0)
        assert d.has_far

    def test_each_puncture_gets_one_patch(self, default_spec):
        u = ModuliPoint.from_punctures([0, 1, 0.4 + 1.7j, -2.2])
        prof = SingularityProfile(exponents=(-0.5,) * 4, far_exponent=-3.0)
        d = plan(u, prof, default_spec)
        for uk in u.finite_punctures:
            owners = [p for p in d.disks if not p.inverted and p.center == uk]
            assert len(owners) == 1

    def test_non_integrable_rejected(self, default_spec):
        u = ModuliPoint.from_punctures([0, 1, 2])
        prof = SingularityProfile(exponents=(-2.0, -1.0, -1.0), far_exponent=-3.0)
        with pytest.raises(NonIntegrableProfile):
            plan(u, prof, default_spec)

    def test_conditional_accepted(self, default_spec):
        u = ModuliPoint.from_punctures([0, 1, 2])
        prof = SingularityProfile(exponents=(-2.2, -1.0, -1.0),
                                  angular_orders=(-1, 0, 0), far_exponent=-3.0)
        d = plan(u, prof, default_spec)
        assert d.disks[0].sigma == pytest.approx(-2.2 + 1 + 1)

    def test_far_certificate(self, default_spec):
        u = ModuliPoint.from_punctures([0, 1, 2])
        prof = SingularityProfile(exponents=(-1.0,) * 3, far_exponent=-1.5)
        with pytest.raises(NonIntegrableProfile):
            plan(u, prof, default_spec)
        ok = SingularityProfile(exponents=(-1.0,) * 3, far_exponent=-1.5,
                                far_angular_order=1)
        assert plan(u, ok, default_spec).has_far

    def test_eval_point_beyond_far_radius(self, default_spec):
        # base_radius anchors the chart split to the configuration scale, so
        # a distant kernel pole becomes a far-chart center at 1/z
        pts = [SingularPoint(0j, -1.0, 0), SingularPoint(1 + 0j, -1.0, 0),
               SingularPoint(100 + 0j, -1.0, -1)]
        d = plan_points(pts, -4.0, 0, default_spec, base_radius=4.0)
        assert d.outer_radius == pytest.approx(4.0)
        far_centers = [p.center for p in d.far_points]
        assert any(abs(c - 0.01) < 1e-12 for c in far_centers)
        assert len(d.main_points) == 2

    def test_coincident_centers_rejected(self, default_spec):
        pts = [SingularPoint(0j, -1.0, 0), SingularPoint(1e-12 + 0j, -1.0, 0)]
        with pytest.raises(PunctureTooClose):
            plan_points(pts, -4.0, 0, default_spec)

    def test_cover_is_a_partition(self, default_spec, rng):
        u = ModuliPoint.from_punctures([0, 1, 2 + 1j, -1])
        prof = SingularityProfile(exponents=(-0.6, -0.8, -1.0, -0.7),
                                  far_exponent=-3.3)
        d = plan(u, prof, default_spec)
        big_r = d.outer_radius
        for _ in range(400):
            z = complex(rng.uniform(-big_r, big_r), rng.uniform(-big_r, big_r))
            assert d.membership_count(z) == 1
        for _ in range(150):
            z = complex(rng.uniform(-4 * big_r, 4 * big_r),
                        rng.uniform(-4 * big_r, 4 * big_r))
            if abs(z) <= big_r * 1.001:
                continue
            assert d.membership_count(z) == 1

    def test_cover_with_support_and_rim_center(self, default_spec, rng):
        pts = [SingularPoint(0j, -1.0, -1), SingularPoint(1 + 0j, -1.0, -1),
               SingularPoint(0.3 + 0.2j, -1.0, -1)]
        d = plan_points(pts, -6.0, 0, default_spec, support_radius=1.0)
        assert len(d.corners) > 0
        for _ in range(400):
            z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
            if abs(z) >= 0.9999:
                continue
            assert d.membership_count(z) == 1


class TestIntegrate:
    def test_measure_convention(self, sym4, default_spec):
        _, u = sym4
        res = integrate(lambda z: np.ones_like(z), u, disk_indicator_profile(),
                        default_spec)
        assert res.value.real == pytest.approx(1.0, abs=1e-12)
        assert abs(res.value.imag) <= 1e-12

    def test_inverse_abs_on_disk(self, sym4, default_spec):
        _, u = sym4
        prof = SingularityProfile(exponents=(-1.0, 0.0, 0.0), support_radius=1.0)
        res = integrate(lambda z: 1.0 / np.abs(z), u, prof, default_spec)
        assert res.value.real == pytest.approx(2.0, abs=1e-12)

    def test_angular_exactness(self, default_spec):
        # pure mode r^e e^{im theta} cut at the patch radius: zero for m != 0,
        # exact radial value for m = 0
        for m in (1, -2, 5, -17):
            pts = [SingularPoint(0j, -0.5, m, radius=1.0)]

            def f(z, m=m):
                r = np.abs(z)
                out = r ** -0.5 * np.exp(1j * m * np.angle(z))
                return np.where(r <= 1.0, out, 0j)

            res = integrate_points(f, pts, -6.0, 0, default_spec,
                                   support_radius=1.0)
            assert abs(res.value) <= 1e-13
        pts = [SingularPoint(0j, -0.5, 0, radius=1.0)]

        def f0(z):
            r = np.abs(z)
            return np.where(r <= 1.0, r ** -0.5, 0.0)

        res = integrate_points(f0, pts, -6.0, 0, default_spec, support_radius=1.0)
        # (1/pi) * 2 pi * int_0^1 r^{1/2} dr = 4/3
        assert res.value.real == pytest.approx(4.0 / 3.0, abs=1e-13)

    def test_conditionally_convergent_whole_plane(self, default_spec):
        pts = [SingularPoint(0j, -2.5, -1)]

        def f(z):
            return np.abs(z) ** -2.5 * np.exp(-1j * np.angle(z))

        res = integrate_points(f, pts, -2.5, -1, default_spec)
        assert abs(res.value) <= 1e-12

    def test_density_against_oracle(self, sym4, default_spec):
        al, u = sym4
        cen = np.asarray(u.finite_punctures)
        pw = -2.0 * np.asarray(al.finite)

        def f(z):
            return _speed.prod_abs_pow(z, cen, pw)

        prof = SingularityProfile(exponents=tuple(pw), far_exponent=2 * 0.5 - 4)
        res = integrate(f, u, prof, default_spec)
        oracle = plane_integral(f, [0, 1, 2], pw, far_exponent=2 * 0.5 - 4,
                                n_cells=2_000_000)
        assert res.value.real == pytest.approx(oracle.real, rel=3e-6)

    def test_patch_radius_invariance(self, sym4):
        al, u = sym4
        cen = np.asarray(u.finite_punctures)
        pw = -2.0 * np.asarray(al.finite)

        def f(z):
            return _speed.prod_abs_pow(z, cen, pw)

        prof = SingularityProfile(exponents=tuple(pw), far_exponent=-3.0)
        vals = []
        for prf in (0.25, 0.2):
            spec = QuadratureSpec(patch_radius_factor=prf)
            vals.append(integrate(f, u, prof, spec).value.real)
        assert abs(vals[0] - vals[1]) <= 10 * 1e-9 * abs(vals[0])

    def test_self_convergence_under_order_doubling(self, sym4, default_spec):
        al, u = sym4
        cen = np.asarray(u.finite_punctures)
        pw = -2.0 * np.asarray(al.finite)

        def f(z):
            return _speed.prod_abs_pow(z, cen, pw)

        prof = SingularityProfile(exponents=tuple(pw), far_exponent=-3.0)
        v1 = integrate(f, u, prof, default_spec).value.real
        v2 = integrate(f, u, prof, default_spec.scaled(2.0)).value.real
        assert abs(v1 - v2) <= 10 * default_spec.target_rel_tol * abs(v1)

    def test_thread_count_does_not_change_bits(self, sym4, default_spec):
        al, u = sym4
        cen = np.asarray(u.finite_punctures)
        pw = -2.0 * np.asarray(al.finite)

        def f(z):
            return _speed.prod_abs_pow(z, cen, pw)

        prof = SingularityProfile(exponents=tuple(pw), far_exponent=-3.0)
        v1 = integrate(f, u, prof, default_spec, threads=1)
        v4 = integrate(f, u, prof, default_spec, threads=4)
        assert v1.value == v4.value  # bitwise
        assert v1.err == v4.err

    def test_tolerance_flag_when_depth_exhausted(self, sym4):
        _, u = sym4
        spec = QuadratureSpec(radial_order=8, angular_nodes=8,
                              refinement_depth=0, target_rel_tol=1e-12)
        prof = SingularityProfile(exponents=(0.0, 0.0, 0.0), support_radius=1.0)

        def nasty(z):
            return np.cos(40.0 * z.real) * np.cos(40.0 * z.imag)

        res = integrate(nasty, u, prof, spec)
        assert not res.converged


class TestPrincipalValue:
    def test_constant_g_vanishes_on_centered_disk(self, default_spec):
        # f = c/(z-z0)^2 on a support disk centered at z0: pure pv, value 0
        z0 = 0j
        pts = []

        def f(z):
            return 3.7 / (z - z0) ** 2

        res = integrate_pv_points(f, z0, 3.7, pts, -6.0, 0, default_spec,
                                  support_radius=1.0)
        assert abs(res.value) <= 1e-12

    def test_zbar_over_z_squared(self, default_spec):
        # g(z) = zbar, z0 = 0 on the unit disk: angular mode e^{-3 i theta}
        def f(z):
            return np.conj(z) / z ** 2

        res = integrate_pv_points(f, 0j, 0j, [], -6.0, 0, default_spec,
                                  support_radius=1.0)
        assert abs(res.value) <= 1e-12

    def test_missing_holder_value(self, default_spec):
        from cone_moduli.errors import HolderDataMissing
        with pytest.raises(HolderDataMissing):
            integrate_pv_points(lambda z: 1.0 / z ** 2, 0j, None, [], -6.0, 0,
                                default_spec, support_radius=1.0)

    def test_pv_pole_on_declared_center_rejected(self, default_spec):
        pts = [SingularPoint(0.5 + 0j, -1.0, 0)]
        with pytest.raises(PunctureTooClose):
            integrate_pv_points(lambda z: 1.0 / (z - 0.5) ** 2, 0.5 + 0j, 1.0,
                                pts, -6.0, 0, default_spec, support_radius=1.0)
