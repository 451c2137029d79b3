import numpy as np
import pytest

from weldfcs import (InfiniteVolume, TemperatureProfile, VolumeContext,
                     build_h, build_xi, flow, flow_inverse, periodize_profile)
from weldfcs.errors import BoxTooSmall
from weldfcs.spectral import PeriodicGrid, fit_loglog_slope


def brute_force_periodized(profile, L, x):
    """Direct evaluation of the piecewise reflection definition."""
    x = np.mod(np.asarray(x, dtype=float) + 0.75 * L, L) - 0.75 * L
    out = np.empty_like(x)
    main = x >= -0.25 * L
    out[main] = profile.beta(x[main])
    out[~main] = profile.beta(-x[~main] - 0.5 * L)
    return out


class TestTemperatureProfile:
    def test_flat_profile_periodizes_to_constant(self):
        p = TemperatureProfile(2.0, 2.0)
        ctx = VolumeContext(p, 30.0)
        beta_L = periodize_profile(p, ctx)
        x = np.linspace(-100, 100, 1001)
        assert np.max(np.abs(beta_L(x) - 2.0)) == 0.0

    def test_asymptotes_exactly_constant(self, kink):
        assert np.all(kink.beta(np.linspace(-50, -1.0, 200)) == 2.0)
        assert np.all(kink.beta(np.linspace(1.0, 50, 200)) == 1.0)

    def test_monotone_and_c1_at_edges(self, kink):
        x = np.linspace(-1.0, 1.0, 2001)
        b = kink.beta(x)
        assert np.all(np.diff(b) <= 1e-15)
        eps = 1e-9
        for edge in (-1.0, 1.0):
            inner = kink.beta(np.array([edge - eps if edge < 0 else edge + eps]))
            assert abs((inner - kink.beta(np.array([edge]))).item()) < 1e-12
        assert abs(kink.beta_deriv(np.array([-1.0]))[0]) == 0.0
        assert abs(kink.beta_deriv(np.array([1.0]))[0]) == 0.0

    def test_beta0_arithmetic(self, kink):
        assert kink.beta0 == pytest.approx(4.0 / 3.0, abs=1e-15)

    def test_midpoint_reflection_value(self, kink, box):
        beta_L = periodize_profile(kink, box)
        assert beta_L(np.array([-box.L / 2])).item() == pytest.approx(
            kink.beta(np.array([0.0])).item(), abs=1e-14)

    def test_periodization_matches_brute_force(self, kink, box):
        beta_L = periodize_profile(kink, box)
        x = np.linspace(-60.0, 60.0, 4096)
        ref = brute_force_periodized(kink, box.L, x)
        assert np.max(np.abs(beta_L(x) - ref)) < 1e-13

    def test_box_too_small(self, kink):
        with pytest.raises(BoxTooSmall):
            VolumeContext(kink, 3.0)


class TestReparamMap:
    def test_finite_volume_identities(self, kink, box):
        h = build_h(kink, box)
        x = np.linspace(-70, 70, 801)
        assert np.max(np.abs(h(x + box.L) - h(x) - box.L)) < 1e-11
        assert np.max(np.abs(h(-x - box.L / 2) + h(x) + box.L / 2)) < 1e-11
        beta_L = periodize_profile(kink, box)
        assert np.max(np.abs(h.deriv(x) * beta_L(x) - box.beta0L)) < 1e-13

    def test_beta0L_recompute(self, kink, box):
        from scipy.integrate import quad
        val = quad(lambda x: 1.0 / kink.beta(np.array([x])).item(),
                   -box.L / 4, box.L / 4, epsabs=1e-14, limit=400)[0]
        assert abs(1.0 / box.beta0L - 2.0 / box.L * val) < 1e-12

    def test_flat_profile_gives_identity(self):
        p = TemperatureProfile(2.0, 2.0)
        h = build_h(p)
        x = np.linspace(-20, 20, 101)
        assert np.max(np.abs(h(x) - x)) < 1e-13
        hl = build_h(p, VolumeContext(p, 30.0))
        assert np.max(np.abs(hl(x) - x)) < 1e-12

    def test_inverse_roundtrip(self, kink, box):
        for h in (build_h(kink), build_h(kink, box)):
            y = np.linspace(-35, 35, 501)
            assert np.max(np.abs(h(h.inverse(y)) - y)) < 1e-11

    def test_hL_approaches_h_at_rate_one_over_L(self, kink):
        # |h_L(x) - shift - h(x)| on a compact set halves when L doubles
        h = build_h(kink)
        x = np.linspace(-3, 3, 101)
        errs = []
        for L in (60.0, 120.0):
            hl = build_h(kink, VolumeContext(kink, L))
            diff = hl(x) - h(x)
            errs.append(np.max(np.abs(diff - np.mean(diff))))
        assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.2)


class TestXiField:
    def test_zero_time_field_vanishes(self, kink, box):
        xi = build_xi(kink, box, 0.0)
        assert np.max(np.abs(xi(np.linspace(-60, 60, 501)))) == 0.0
        assert np.max(np.abs(xi.zeta(np.linspace(-5, 5, 11)) - box.gammaL)) == 0.0

    def test_plateau_value_and_length(self, kink):
        # for vt >= 2 delta the + field equals gamma dbeta / beta_left on a
        # plateau of length (beta0/beta_left)(vt - 2 delta) ending at h(a-delta)
        xi = build_xi(kink, InfiniteVolume(1.0), 4.0, "+")
        h = build_h(kink)
        A = float(h(np.array([-1.0]))[0])
        plat = xi.gamma * kink.delta_beta / kink.beta_left
        assert plat == pytest.approx(-xi.gamma / 2.0, abs=1e-14)
        lo = A - kink.beta0 / kink.beta_left * 2.0
        inside = np.linspace(lo + 1e-6, A - 1e-6, 101)
        assert np.max(np.abs(xi(inside) - plat)) < 1e-11
        assert np.max(np.abs(xi(np.linspace(1.3, 20, 50)))) == 0.0

    def test_zero_plateau_length_at_2delta(self, kink):
        xi = build_xi(kink, InfiniteVolume(1.0), 2.0, "+")
        h = build_h(kink)
        A = float(h(np.array([-1.0]))[0])
        assert xi(np.array([A])).item() == pytest.approx(
            -xi.gamma / 2.0, abs=1e-9)

    def test_finite_field_reflection_symmetry(self, kink, box):
        y = np.linspace(-60, 60, 701)
        xi_p = build_xi(kink, box, 1.5)
        xi_m = build_xi(kink, box, -1.5)
        assert np.max(np.abs(xi_p(-y - box.L / 2) - xi_m(y))) < 1e-12

    def test_minus_mover_is_reflected_plus(self, kink):
        y = np.linspace(-25, 25, 501)
        xi_m = build_xi(kink, InfiniteVolume(1.0), 3.0, "-")
        xi_p = build_xi(kink, InfiniteVolume(1.0), -3.0, "+")
        assert np.max(np.abs(xi_m(y) - xi_p(-y))) < 1e-13

    def test_recentered_finite_field_converges(self, kink):
        xi_inf = build_xi(kink, InfiniteVolume(1.0), 1.0, "+")
        h = build_h(kink)
        A = float(h(np.array([-1.0]))[0])
        y = np.linspace(-4, 3, 301)
        errs, Ls = [], [40.0, 80.0, 160.0]
        for L in Ls:
            ctx = VolumeContext(kink, L)
            hl = build_h(kink, ctx)
            o_l = float(hl(np.array([-1.0]))[0]) - A
            xi_l = build_xi(kink, ctx, 1.0)
            errs.append(np.max(np.abs(xi_l(y + o_l) - xi_inf(y))))
        slope = fit_loglog_slope(Ls, errs)
        assert -1.3 < slope < -0.7


class TestFlows:
    def test_uniform_field_translates(self):
        p = TemperatureProfile(2.0, 2.0)
        ctx = VolumeContext(p, 30.0)
        xi = build_xi(p, ctx, 5.0)
        grid = PeriodicGrid(ctx.L, 256, x0=-22.5)
        f = flow(xi, 0.7, grid)
        assert np.max(np.abs(f.samples - (grid.x - ctx.gammaL * 0.7))) < 1e-10

    def test_zero_time_flow_is_identity(self, kink, box):
        xi = build_xi(kink, box, 1.0)
        grid = PeriodicGrid(box.L, 512, x0=-30.0)
        f = flow(xi, 0.0, grid)
        assert np.array_equal(f.samples, grid.x)

    def test_group_law(self, kink, box):
        xi = build_xi(kink, box, 1.0)
        grid = PeriodicGrid(box.L, 2048, x0=-30.0)
        f_ab = flow(xi, 0.3, grid)
        f_a = flow(xi, 0.15, grid)
        f_b = flow(xi, 0.15, grid)
        assert np.max(np.abs(f_ab.samples - f_a(f_b.samples))) < 1e-9

    def test_flow_reflection_symmetry(self, kink, box):
        grid = PeriodicGrid(box.L, 2048, x0=-30.0)
        f1 = flow(build_xi(kink, box, 1.0), 0.2, grid)
        f2 = flow(build_xi(kink, box, -1.0), -0.2, grid)
        assert np.max(np.abs(f1(-grid.x - box.L / 2)
                             + f2.samples + box.L / 2)) < 1e-10

    def test_circle_diffeo_invariants(self, kink, box):
        xi = build_xi(kink, box, 2.0)
        grid = PeriodicGrid(box.L, 2048, x0=-30.0)
        f = flow(xi, 0.3, grid)
        x = np.linspace(-5, 5, 41)
        assert np.max(np.abs(f(x + box.L) - f(x) - box.L)) < 1e-10
        assert np.min(f.deriv_samples(1)) > 0
        assert np.max(np.abs(f(f.inverse(x)) - x)) < 1e-11

    def test_line_flow_identity_outside_support(self, kink):
        xi = build_xi(kink, InfiniteVolume(1.0), 2.0, "+")
        g = flow(xi, 0.4)
        lo, hi = g.support
        grid = g.grid
        outside = (grid.x < lo - 0.1) | (grid.x > hi + 0.1)
        assert np.max(np.abs(g.samples[outside] - grid.x[outside])) < 1e-12
        assert np.min(g.deriv_samples(1)) > 0

    def test_line_flow_inverse_is_backward_flow(self, kink):
        xi = build_xi(kink, InfiniteVolume(1.0), 2.0, "+")
        g = flow(xi, 0.3)
        gi = flow_inverse(xi, 0.3, g)
        x = np.linspace(*g.support, 101)
        assert np.max(np.abs(gi(g(x)) - x)) < 1e-10

    def test_recentered_line_flow_rate(self, kink):
        xi_inf = build_xi(kink, InfiniteVolume(1.0), 1.0, "+")
        g_inf = flow(xi_inf, 0.3)
        h = build_h(kink)
        A = float(h(np.array([-1.0]))[0])
        pts = np.linspace(-5, 3, 101)
        ref = g_inf(pts)
        errs, Ls = [], [40.0, 80.0, 160.0]
        for L in Ls:
            ctx = VolumeContext(kink, L)
            grid = PeriodicGrid(L, int(2048 * L / 40), x0=-0.75 * L)
            f_l = flow(build_xi(kink, ctx, 1.0), 0.3, grid)
            hl = build_h(kink, ctx)
            o_l = float(hl(np.array([-1.0]))[0]) - A
            g_l = f_l(pts + o_l) - o_l + ctx.gammaL * 0.3
            errs.append(np.max(np.abs(g_l - ref)))
        slope = fit_loglog_slope(Ls, errs)
        assert -1.3 < slope < -0.7
