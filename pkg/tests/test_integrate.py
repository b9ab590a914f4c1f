import math

import numpy as np
import pytest

import kirchlab as kl
from kirchlab import (
    BLEW_UP,
    COMPLETED,
    STEP_UNDERFLOW,
    IntegratorSettings,
    LipschitzTable,
    OutputGrid,
    PowerLawDissipation,
    PowerNonlinearity,
    Spectrum,
    corrector,
    residual_norm,
    solve_hyperbolic,
    solve_parabolic_direct,
    solve_parabolic_reparam,
)

M_ONE = LipschitzTable(((0.0, 1.0),))  # m == 1
P0 = PowerLawDissipation(0.0)


def settings(kind="log", count=401, t_end=100.0, **kw):
    return IntegratorSettings(grid=OutputGrid(kind, count, t_end), **kw)


class TestOutputGrid:
    def test_log_grid_shape(self):
        t = OutputGrid("log", 5, 99.0).times()
        assert t[0] == 0.0 and t[-1] == 99.0
        np.testing.assert_allclose(np.diff(np.log1p(t)), np.log(10.0) / 2.0, rtol=1e-12)

    def test_linear_grid(self):
        t = OutputGrid("linear", 3, 2.0).times()
        np.testing.assert_allclose(t, [0.0, 1.0, 2.0])

    def test_validation(self):
        with pytest.raises(kl.ConfigurationError):
            OutputGrid("log", 1, 1.0)
        with pytest.raises(kl.ConfigurationError):
            OutputGrid("weird", 10, 1.0)


class TestHyperbolic:
    def test_damped_oscillator_closed_form(self):
        # eps=1, b=1, m=1, lambda=1: u'' + u' + u = 0, u(0)=1, u'(0)=0.
        # By hand: u = e^{-t/2}(cos wt + sin(wt)/(2w)), u' = -e^{-t/2} sin(wt)/w,
        # with w = sqrt(3)/2.
        traj = solve_hyperbolic(
            Spectrum([1.0]), M_ONE, P0, 1.0, [1.0], [0.0], settings("linear", 201, 20.0)
        )
        w = math.sqrt(3.0) / 2.0
        t = traj.times
        u_exact = np.exp(-t / 2) * (np.cos(w * t) + np.sin(w * t) / (2 * w))
        up_exact = -np.exp(-t / 2) * np.sin(w * t) / w
        assert traj.status == COMPLETED
        assert np.max(np.abs(traj.u[:, 0] - u_exact)) < 1e-8
        assert np.max(np.abs(traj.uprime[:, 0] - up_exact)) < 1e-8

    def test_stationary_zero(self):
        with pytest.warns(UserWarning, match="degenerate"):
            traj = solve_hyperbolic(
                Spectrum([1.0, 2.0]),
                PowerNonlinearity(1.0),
                P0,
                0.5,
                [0.0, 0.0],
                [0.0, 0.0],
                settings(t_end=5.0),
            )
        assert np.all(traj.u == 0.0)
        assert np.all(traj.uprime == 0.0)

    def test_zero_mode_preserved_exactly(self):
        traj = solve_hyperbolic(
            Spectrum([1.0, 4.0]),
            PowerNonlinearity(1.0),
            P0,
            0.1,
            [1.0, 0.0],
            [0.0, 0.0],
            settings(t_end=5.0),
        )
        assert np.all(traj.u[:, 1] == 0.0)
        assert np.all(traj.uprime[:, 1] == 0.0)

    def test_hamiltonian_monotone_along_samples(self):
        spec = Spectrum([1.0, 3.0])
        nl = PowerNonlinearity(1.0)
        traj = solve_hyperbolic(
            spec, nl, PowerLawDissipation(0.5), 1e-2, [1.0, -0.4], [0.3, 0.2],
            settings(t_end=50.0),
        )
        H = np.array(
            [
                kl.hamiltonian(spec, nl, 1e-2, traj.u[i], traj.uprime[i])
                for i in range(traj.times.size)
            ]
        )
        assert traj.status == COMPLETED
        assert np.all(H[1:] <= H[:-1] * (1.0 + 10.0 * 1e-10))

    def test_blowup_reported_as_data(self):
        # The first oscillation converts stiffness energy into |u'|^2 of
        # order |A^{1/2}u0|^2 * sqrt(lambda m), past a low threshold.
        traj = solve_hyperbolic(
            Spectrum([1.0]),
            PowerNonlinearity(1.0),
            P0,
            1.0,
            [3.0],
            [0.0],
            settings(t_end=10.0, blowup_threshold=20.0),
        )
        assert traj.status == BLEW_UP
        assert traj.t_stop is not None and traj.t_stop < 10.0
        assert traj.times[-1] == traj.t_stop
        state_sq = traj.u[-1] @ traj.u[-1] + traj.uprime[-1] @ traj.uprime[-1]
        assert state_sq > 20.0

    def test_step_underflow_reported(self):
        traj = solve_hyperbolic(
            Spectrum([1.0]),
            M_ONE,
            P0,
            1.0,
            [1.0],
            [0.0],
            settings(t_end=10.0, rel_tol=1e-300, abs_tol=1e-300),
        )
        assert traj.status == STEP_UNDERFLOW
        assert traj.times[-1] == traj.t_stop

    def test_eps_consistency_monotone(self):
        # On a fixed horizon the gap to the first-order limit shrinks with eps.
        spec = Spectrum([1.0])
        nl = PowerNonlinearity(1.0)
        s = settings(count=201, t_end=1.0)
        par = solve_parabolic_reparam(spec, nl, P0, [1.0], s)
        sups = []
        for eps in (1e-1, 1e-2, 1e-3, 1e-4):
            hyp = solve_hyperbolic(spec, nl, P0, eps, [1.0], [0.0], s)
            sups.append(np.max(np.abs(hyp.u - par.u)))
        assert all(b < a for a, b in zip(sups, sups[1:]))

    def test_deterministic_outputs(self):
        kwargs = (Spectrum([1.0, 2.0]), PowerNonlinearity(2.0), PowerLawDissipation(0.5))
        a = solve_hyperbolic(*kwargs, 1e-2, [1.0, 0.5], [0.0, 0.1], settings(t_end=10.0))
        b = solve_hyperbolic(*kwargs, 1e-2, [1.0, 0.5], [0.0, 0.1], settings(t_end=10.0))
        assert np.array_equal(a.u, b.u) and np.array_equal(a.uprime, b.uprime)


class TestParabolicReparam:
    def test_heat_semigroup(self):
        spec = Spectrum([1.0, 4.0])
        traj = solve_parabolic_reparam(spec, M_ONE, P0, [1.0, -0.5], settings(t_end=10.0))
        np.testing.assert_allclose(traj.alpha, traj.times, rtol=0, atol=1e-12)
        expected = np.array([1.0, -0.5])[None, :] * np.exp(
            -np.outer(traj.times, spec.eigenvalues)
        )
        np.testing.assert_allclose(traj.u, expected, rtol=1e-9, atol=1e-300)

    def test_closed_form_cubic(self):
        # u' = -u^3 gives u(t)^2 = 1/(1+2t).
        traj = solve_parabolic_reparam(
            Spectrum([1.0]), PowerNonlinearity(1.0), P0, [1.0], settings(count=400, t_end=1e4)
        )
        exact = 1.0 / (1.0 + 2.0 * traj.times)
        rel = np.abs(traj.u[:, 0] ** 2 - exact) / exact
        assert np.max(rel) < 1e-8

    def test_closed_form_weak_dissipation(self):
        # u' = -(1+t)^(1/2) u^3 gives u^2 = [1 + (4/3)((1+t)^{3/2}-1)]^{-1}.
        traj = solve_parabolic_reparam(
            Spectrum([1.0]),
            PowerNonlinearity(1.0),
            PowerLawDissipation(0.5),
            [1.0],
            settings(count=400, t_end=100.0),
        )
        exact = 1.0 / (1.0 + (4.0 / 3.0) * ((1.0 + traj.times) ** 1.5 - 1.0))
        rel = np.abs(traj.u[:, 0] ** 2 - exact) / exact
        assert np.max(rel) < 1e-8

    def test_reparametrization_exactness(self):
        spec = Spectrum([0.5, 1.0, 2.5])
        u0 = np.array([1.0, -0.7, 0.3])
        traj = solve_parabolic_reparam(
            spec, PowerNonlinearity(2.0), PowerLawDissipation(1.0), u0, settings(t_end=1e3)
        )
        # u_k e^{lambda_k alpha} must reproduce u0_k wherever it is finite.
        for k, lam in enumerate(spec.eigenvalues):
            back = traj.u[:, k] * np.exp(lam * traj.alpha)
            ok = np.isfinite(back)
            np.testing.assert_allclose(back[ok], u0[k], rtol=1e-12)

    def test_alpha_nondecreasing_from_zero(self):
        traj = solve_parabolic_reparam(
            Spectrum([1.0]), PowerNonlinearity(0.5), PowerLawDissipation(0.5), [2.0],
            settings(t_end=50.0),
        )
        assert traj.alpha[0] == 0.0
        assert np.all(np.diff(traj.alpha) >= 0.0)


class TestParabolicDirect:
    def test_trivial_exponential(self):
        # Relative accuracy degrades to the absolute-tolerance floor as
        # the solution decays; compare against the initial scale.
        traj = solve_parabolic_direct(
            Spectrum([2.0]), M_ONE, P0, [1.0], settings(count=201, t_end=10.0)
        )
        assert np.max(np.abs(traj.u[:, 0] - np.exp(-2.0 * traj.times))) < 1e-9

    def test_zero_data(self):
        traj = solve_parabolic_direct(
            Spectrum([1.0, 2.0]), PowerNonlinearity(1.0), P0, [0.0, 0.0], settings(t_end=5.0)
        )
        assert np.all(traj.u == 0.0) and np.all(traj.uprime == 0.0)

    def test_oracle_equivalence_random(self):
        from helpers import random_parabolic_instance

        rng = np.random.default_rng(7)
        s = settings(count=301, t_end=100.0)
        for _ in range(6):
            spec, nl, dis, u0 = random_parabolic_instance(rng)
            tr = solve_parabolic_reparam(spec, nl, dis, u0, s)
            td = solve_parabolic_direct(spec, nl, dis, u0, s)
            assert tr.status == COMPLETED and td.status == COMPLETED
            scale = math.sqrt(float(u0 @ u0))
            assert np.max(np.abs(tr.u - td.u)) / scale < 1e-6


class TestCorrector:
    def test_constant_b_closed_form(self):
        # eps=0.1, w0=(1): theta = 0.1(1-e^{-10t}), theta' = e^{-10t}.
        times = np.linspace(0.0, 2.0, 21)
        corr = corrector(
            Spectrum([1.0]), PowerNonlinearity(1.0), P0, 0.1, [0.0], [1.0], times
        )
        np.testing.assert_allclose(
            corr.theta[:, 0], 0.1 * (1.0 - np.exp(-10.0 * times)), rtol=1e-12, atol=1e-15
        )
        np.testing.assert_allclose(
            corr.theta_prime[:, 0], np.exp(-10.0 * times), rtol=1e-12, atol=1e-300
        )

    def test_zero_velocity_jump(self):
        times = np.linspace(0.0, 1.0, 5)
        corr = corrector(
            Spectrum([1.0]),
            LipschitzTable(((0.0, 1.0),)),
            P0,
            0.5,
            [1.0],
            [-1.0],
            times,
        )
        assert np.all(corr.theta == 0.0) and np.all(corr.theta_prime == 0.0)

    def test_harmonic_decay_quadrature(self):
        # p=1, eps=1: theta' = w0/(1+t) and theta = w0 log(1+t).
        times = np.linspace(0.0, 5.0, 26)
        spec = Spectrum([1.0])
        dis = PowerLawDissipation(1.0)
        corr = corrector(spec, PowerNonlinearity(1.0), dis, 1.0, [0.0], [1.0], times)
        np.testing.assert_allclose(corr.theta_prime[:, 0], 1.0 / (1.0 + times), rtol=1e-12)
        np.testing.assert_allclose(corr.theta[:, 0], np.log1p(times), atol=1e-12)

    def test_initial_conditions(self):
        corr = corrector(
            Spectrum([1.0, 2.0]),
            PowerNonlinearity(1.0),
            PowerLawDissipation(0.5),
            0.01,
            [1.0, 1.0],
            [0.5, -0.5],
            OutputGrid("log", 101, 10.0).times(),
        )
        w0 = kl.compute_w0(
            Spectrum([1.0, 2.0]), PowerNonlinearity(1.0), PowerLawDissipation(0.5),
            [1.0, 1.0], [0.5, -0.5],
        )
        assert np.all(corr.theta[0] == 0.0)
        np.testing.assert_array_equal(corr.theta_prime[0], w0)


class TestResidual:
    def test_stationary_zero(self):
        traj = kl.Trajectory(
            Spectrum([1.0]),
            np.array([0.0, 1.0, 2.0]),
            np.zeros((3, 1)),
            np.zeros((3, 1)),
            COMPLETED,
        )
        assert residual_norm(traj, Spectrum([1.0]), PowerNonlinearity(1.0), P0, 1.0) == 0.0

    def test_oscillator_self_consistency(self):
        traj = solve_hyperbolic(
            Spectrum([1.0]), M_ONE, P0, 1.0, [1.0], [0.0], settings("log", 801, 20.0)
        )
        assert residual_norm(traj, Spectrum([1.0]), M_ONE, P0, 1.0) <= 1e-4

    def test_detects_corruption(self):
        traj = solve_hyperbolic(
            Spectrum([1.0]), M_ONE, P0, 1.0, [1.0], [0.0], settings("log", 801, 20.0)
        )
        traj.u[len(traj.times) // 2, 0] += 0.1
        assert residual_norm(traj, Spectrum([1.0]), M_ONE, P0, 1.0) > 1e-2

    def test_parabolic_residual(self):
        traj = solve_parabolic_reparam(
            Spectrum([1.0]), PowerNonlinearity(1.0), P0, [1.0], settings("log", 801, 100.0)
        )
        assert residual_norm(traj, Spectrum([1.0]), PowerNonlinearity(1.0), P0, 0.0) <= 1e-4

    def test_too_few_samples(self):
        traj = kl.Trajectory(
            Spectrum([1.0]), np.array([0.0, 1.0]), np.zeros((2, 1)), np.zeros((2, 1)),
            COMPLETED,
        )
        with pytest.raises(ValueError):
            residual_norm(traj, Spectrum([1.0]), PowerNonlinearity(1.0), P0, 1.0)
