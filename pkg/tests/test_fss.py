import math

import numpy as np
import pytest

from mipt2d.fss import (DataPoint, FitFailureError, decay_window, error_widths,
                        fit_decay_tau, fit_profile, fit_scaling, fit_survival,
                        nelder_mead, objective_multilevel, objective_nearest,
                        objective_polynomial, profile_variable, scale_points,
                        survival_timescale, unscale_points)


def planted_collapse(p_c=0.5, nu=0.85, Ls=(8, 12, 16, 24), noise=0.004,
                     seed=5, span=0.06, npts=13):
    """Synthetic observations from a known one-curve scaling function."""
    rng = np.random.default_rng(seed)
    pts = []
    for L in Ls:
        for p in np.linspace(p_c - span, p_c + span, npts):
            x = (p - p_c) * L ** (1.0 / nu)
            delta = 1.0 / (1.0 + np.exp(2.0 * x)) + rng.normal(0, noise)
            pts.append(DataPoint(int(L), float(p), float(delta), noise, 1000))
    return pts


def line_points(xs, ys, L=1):
    return [DataPoint(L, float(x), float(y), 1.0, 10) for x, y in zip(xs, ys)]


class TestDataPoint:
    def test_validation(self):
        with pytest.raises(ValueError):
            DataPoint(8, 0.5, 1.0, 0.1, 0)
        with pytest.raises(ValueError):
            DataPoint(8, 0.5, 1.0, 0.0, 5)
        DataPoint(8, 0.5, 1.0, 0.0, 1)  # sigma unconstrained at count 1


class TestScalePoints:
    def test_gamma_zero_leaves_y(self):
        pts = [DataPoint(8, 0.3, 2.5, 0.1, 9), DataPoint(16, 0.7, 1.5, 0.1, 9)]
        _, y, _, _, _ = scale_points(pts, 0.5, 0.9)
        assert set(np.round(y, 12)) == {2.5, 1.5}

    def test_x_zero_at_pc(self):
        pts = [DataPoint(L, 0.4, 1.0, 0.1, 9) for L in (8, 12, 16)]
        x, _, _, _, _ = scale_points(pts, 0.4, 0.7)
        assert (x == 0).all()

    def test_tie_order_is_content_based(self):
        # equal scaled x: ordering falls back to (L, p), independent of
        # the input arrangement
        a = DataPoint(4, 0.6, 1.0, 0.1, 9)    # x = 0.1 * 4 = 0.4
        b = DataPoint(16, 0.525, 2.0, 0.1, 9)  # x = 0.025 * 16 = 0.4
        for pts in ([a, b], [b, a]):
            x, y, _, Ls, _ = scale_points(pts, 0.5, 1.0)
            assert x[0] == pytest.approx(x[1])
            assert Ls.tolist() == [4, 16]
            assert y.tolist() == [1.0, 2.0]

    def test_requires_positive_nu(self):
        with pytest.raises(ValueError):
            scale_points([DataPoint(8, 0.5, 1.0, 0.1, 9)], 0.5, 0.0)

    def test_round_trip(self):
        pts = planted_collapse()
        for gamma in (0.0, 0.3):
            x, y, _, Ls, _ = scale_points(pts, 0.47, 0.9, gamma)
            p, delta = unscale_points(x, y, Ls, 0.47, 0.9, gamma)
            orig = sorted((q.p, q.delta) for q in pts)
            back = sorted(zip(p, delta))
            for (p0, d0), (p1, d1) in zip(orig, back):
                assert abs(p0 - p1) <= 1e-12 * max(1, abs(p0))
                assert abs(d0 - d1) <= 1e-12 * max(1, abs(d0))


class TestNearest:
    def test_collinear_is_zero(self):
        pts = line_points([0.1, 0.2, 0.4, 0.7], [1.1, 1.2, 1.4, 1.7])
        assert objective_nearest(pts, 0.0, 1.0) == pytest.approx(0.0, abs=1e-24)

    def test_three_point_closed_form(self):
        d = 0.37
        pts = line_points([0.0, 1.0, 2.0], [0.0, 1.0 + d, 2.0])
        assert objective_nearest(pts, 0.0, 1.0) == pytest.approx(d * d)

    def test_needs_three_points(self):
        with pytest.raises(ValueError):
            objective_nearest(line_points([0, 1], [0, 1]), 0.0, 1.0)

    def test_reorder_invariant(self, rng):
        pts = planted_collapse()
        base = objective_nearest(pts, 0.49, 0.9)
        shuffled = list(pts)
        rng.shuffle(shuffled)
        assert objective_nearest(shuffled, 0.49, 0.9) == pytest.approx(base)


class TestMultilevel:
    def test_single_size_rejected(self):
        pts = [DataPoint(8, p, p, 0.1, 9) for p in (0.1, 0.2, 0.3)]
        with pytest.raises(ValueError):
            objective_multilevel(pts, 0.0, 1.0)

    def test_largest_level_contributes_nothing(self):
        # largest-L points are never residual centers: displacing one that
        # no smaller-L point uses as a bracketing neighbor leaves the
        # objective unchanged
        small = [DataPoint(8, 0.1, 0.8, 0.1, 9)]  # x = 0.8
        near = [DataPoint(16, 0.75 / 16, 0.75, 0.1, 9),
                DataPoint(16, 0.85 / 16, 0.85, 0.1, 9)]
        far_on = [DataPoint(16, 0.5, 8.0, 0.1, 9)]
        far_off = [DataPoint(16, 0.5, 123.0, 0.1, 9)]
        base = objective_multilevel(small + near + far_on, 0.0, 1.0)
        moved = objective_multilevel(small + near + far_off, 0.0, 1.0)
        assert base == pytest.approx(moved)
        assert base == pytest.approx(0.0, abs=1e-18)  # center sits on the line

    def test_perfect_collapse_is_zero(self):
        pts = []
        for L in (8, 12, 16):
            for p in np.linspace(0.4, 0.6, 7):
                x = (p - 0.5) * L
                pts.append(DataPoint(L, p, 3.0 * x + 1.0, 0.05, 9))
        assert objective_multilevel(pts, 0.5, 1.0) == pytest.approx(0.0, abs=1e-18)

    def test_reorder_invariant(self, rng):
        pts = planted_collapse()
        base = objective_multilevel(pts, 0.49, 0.9)
        shuffled = list(pts)
        rng.shuffle(shuffled)
        assert objective_multilevel(shuffled, 0.49, 0.9) == pytest.approx(base)


class TestPolynomial:
    def test_exact_polynomial_is_zero(self, rng):
        coeffs = rng.normal(size=9)
        pts = []
        for L in (8, 16):
            for p in np.linspace(0.3, 0.7, 9):
                x = (p - 0.5) * L ** (1.0 / 0.8)
                y = sum(c * x**k for k, c in enumerate(coeffs))
                pts.append(DataPoint(L, p, y, 0.3, 9))
        eps = objective_polynomial(pts, 0.5, 0.8)
        scale = sum(q.delta**2 for q in pts)
        assert eps <= 1e-8 * max(scale, 1.0)

    def test_sigma_scaling(self):
        pts = planted_collapse()
        base = objective_polynomial(pts, 0.49, 0.9)
        doubled = [DataPoint(q.L, q.p, q.delta, 2 * q.sigma, q.count) for q in pts]
        assert objective_polynomial(doubled, 0.49, 0.9) == pytest.approx(base / 4)

    def test_underdetermined_rejected(self):
        pts = [DataPoint(8, 0.1 * i, 0.0, 0.1, 9) for i in range(8)]
        with pytest.raises(ValueError):
            objective_polynomial(pts, 0.0, 1.0, degree=8)

    def test_reorder_invariant(self, rng):
        pts = planted_collapse()
        base = objective_polynomial(pts, 0.49, 0.9)
        shuffled = list(pts)
        rng.shuffle(shuffled)
        assert objective_polynomial(shuffled, 0.49, 0.9) == pytest.approx(base)


class TestNelderMead:
    def test_quadratic_bowl(self):
        target = (1.3, -2.2)
        f = lambda v: (v[0] - target[0]) ** 2 + (v[1] - target[1]) ** 2
        best, val, evals, converged = nelder_mead(f, (0.0, 0.0))
        assert converged
        assert abs(best[0] - target[0]) < 1e-4
        assert abs(best[1] - target[1]) < 1e-4

    def test_multistart_consistency(self, rng):
        pts = planted_collapse()
        from mipt2d.fss import OBJECTIVES

        fits = []
        for start in ((0.45, 0.7), (0.55, 1.2), (0.5, 0.9)):
            fit = fit_scaling(pts, "polynomial", initial=start)
            fits.append(fit)
        ref = fits[0]
        for other in fits[1:]:
            assert abs(other.p_c - ref.p_c) <= ref.p_c_width + other.p_c_width
            assert abs(other.nu - ref.nu) <= ref.nu_width + other.nu_width

    def test_nan_objective_fails(self):
        with pytest.raises(FitFailureError):
            nelder_mead(lambda v: float("nan"), (0.0, 0.0))

    def test_evaluation_budget(self):
        # tiny budget with an unreachable tolerance: stops on evaluations
        f = lambda v: (v[0] - 1) ** 2 + (v[1] + 1) ** 2
        best, val, evals, converged = nelder_mead(f, (50.0, 50.0),
                                                  diameter_tol=1e-300,
                                                  max_evaluations=40)
        assert evals <= 45
        assert not converged
        assert math.isfinite(val)


class TestErrorWidths:
    def test_exact_quadratic_width(self):
        eps_min = 0.73
        w0, w1 = 0.031, 0.42
        f0 = lambda t: eps_min * (1 + (t / w0) ** 2)
        f1 = lambda t: eps_min * (1 + (t / w1) ** 2)
        got0, got1, unbounded = error_widths((f0, f1), (0, 0), eps_min,
                                             (1e-3, 1e-3))
        assert not unbounded
        assert got0 == pytest.approx(w0, rel=1e-6)
        assert got1 == pytest.approx(w1, rel=1e-6)

    def test_flat_objective_flags_unbounded(self):
        f = lambda t: 1.0
        w0, w1, unbounded = error_widths((f, f), (0, 0), 1.0, (0.1, 0.1),
                                         max_expand=8)
        assert unbounded
        assert math.isinf(w0) and math.isinf(w1)

    def test_positive_widths_on_real_fit(self):
        fit = fit_scaling(planted_collapse(), "polynomial", initial=(0.48, 1.0))
        assert fit.p_c_width > 0 and fit.nu_width > 0


class TestPlantedRecovery:
    @pytest.mark.parametrize("method", ["nearest", "multilevel", "polynomial"])
    def test_five_percent_recovery(self, method):
        pts = planted_collapse()
        fit = fit_scaling(pts, method, initial=(0.48, 1.0))
        assert abs(fit.p_c - 0.5) <= 0.05 * 0.5
        assert abs(fit.nu - 0.85) <= 0.05 * 0.85

    def test_methods_agree_within_widths(self):
        pts = planted_collapse()
        fits = [fit_scaling(pts, m, initial=(0.48, 1.0))
                for m in ("nearest", "multilevel", "polynomial")]
        for i in range(3):
            for j in range(i + 1, 3):
                a, b = fits[i], fits[j]
                assert abs(a.p_c - b.p_c) <= a.p_c_width + b.p_c_width
                assert abs(a.nu - b.nu) <= a.nu_width + b.nu_width


class TestSurvival:
    def test_exact_exponential(self):
        t = np.arange(0, 400, 4, dtype=float)
        tau0 = 37.5
        v = 20.0 * np.exp(-t / tau0)
        tau, window = fit_decay_tau(t, v)
        assert tau == pytest.approx(tau0, rel=1e-6)
        assert window[0] >= t.min() and window[1] <= t.max()

    def test_explicit_window_positivity(self):
        t = np.arange(10.0)
        v = np.array([1, 1, 1, 0.5, 0.2, 0.1, 0.0, 0.0, 0.0, 0.0])
        with pytest.raises(ValueError):
            fit_decay_tau(t, v, window=(3, 8))
        tau, _ = fit_decay_tau(t, v, window=(2, 5))
        assert tau > 0

    def test_non_decaying_rejected(self):
        t = np.arange(10.0)
        with pytest.raises(ValueError):
            fit_decay_tau(t, np.exp(t / 5.0), window=(0, 9))

    def test_tau_grows_with_l_below_pc(self):
        taus = survival_timescale([8, 12, 16], [0.3] * 3, 0.5, 0.8)
        assert taus[0] < taus[1] < taus[2]

    def test_planted_law_recovery(self):
        # each synthetic series runs for several decay times so the slope
        # is informative, as a real measurement would be scheduled
        p_c, nu = 0.42, 0.66
        rng = np.random.default_rng(3)
        series = {}
        for L in (8, 12, 16):
            for p in (0.22, 0.27, 0.32, 0.37):
                tau = float(survival_timescale(L, p, p_c, nu))
                t = np.linspace(0, 4 * tau, 100)[1:]
                noise = rng.normal(0, 0.01, size=t.size)
                series[(L, p)] = (t, 20.0 * np.exp(-t / tau) * (1 + noise))
        fit = fit_survival(series, initial=(0.45, 0.8))
        assert abs(fit.p_c - p_c) <= 0.10 * p_c
        assert abs(fit.nu - nu) <= 0.10 * nu
        for key, tau in fit.tau.items():
            planted = float(survival_timescale(key[0], key[1], p_c, nu))
            assert tau == pytest.approx(planted, rel=0.15)

    def test_log_floor_applies(self):
        with_floor = survival_timescale(8, 0.3, 0.5, 0.8, log_floor=10.0)
        without = survival_timescale(8, 0.3, 0.5, 0.8, log_floor=1.0)
        assert with_floor > without

    def test_decay_window_needs_positive_values(self):
        with pytest.raises(ValueError):
            decay_window([0, 1, 2], [0.0, 0.0, 0.0])


class TestProfileFit:
    def test_exact_recovery(self):
        L = 16
        u = profile_variable(L, np.arange(1, L))
        values = 2.0 + 0.5 * u
        (c0, c1), resid = fit_profile(values, L, "linear-log")
        assert c0 == pytest.approx(2.0, abs=1e-6)
        assert c1 == pytest.approx(0.5, abs=1e-6)
        assert resid < 1e-12

    def test_quadratic_never_worse(self, rng):
        L = 12
        u = profile_variable(L, np.arange(1, L))
        values = 1.0 + 0.4 * u + rng.normal(0, 0.05, size=u.size)
        _, r_lin = fit_profile(values, L, "linear-log")
        _, r_quad = fit_profile(values, L, "quadratic-log")
        assert r_quad <= r_lin + 1e-12

    def test_input_validation(self):
        with pytest.raises(ValueError):
            fit_profile(np.ones(5), 4, "linear-log")
        with pytest.raises(ValueError):
            fit_profile(np.ones(10), 12, "linear-log")
        with pytest.raises(ValueError):
            fit_profile(np.ones(11), 12, "cubic")
