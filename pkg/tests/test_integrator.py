import math

import numpy as np
import pytest

from rbhmc.constraints import builtin_constraint
from rbhmc.errors import DivergedTrajectory, InvalidArgument
from rbhmc.integrator import (
    LeapfrogParams,
    LeftRegion,
    PhaseState,
    hamiltonian,
    leapfrog,
    leapfrog_path,
    step_size_bound,
)
from rbhmc.targets import gaussian_std


def zero_grad(x):
    return np.zeros_like(x)


class TestHamiltonian:
    def test_values(self):
        assert hamiltonian(PhaseState([0.0], [0.0]), lambda x: 0.0) == 0.0
        assert hamiltonian(PhaseState([0.0, 0.0], [2.0, 0.0], 1.0), lambda x: 3.0) == 5.0

    def test_mass_scaling(self):
        k2 = hamiltonian(PhaseState([0.0], [3.0], 2.0), lambda x: 0.0)
        k4 = hamiltonian(PhaseState([0.0], [3.0], 4.0), lambda x: 0.0)
        assert k4 == pytest.approx(k2 / 2)

    def test_non_finite_propagates(self):
        assert hamiltonian(PhaseState([0.0], [1.0]), lambda x: math.inf) == math.inf


class TestLeapfrog:
    def test_free_particle(self):
        out = leapfrog(PhaseState([0.0, 0.0], [1.0, 0.0]), zero_grad, LeapfrogParams(0.1, 10))
        np.testing.assert_allclose(out.x, [1.0, 0.0], atol=1e-14)
        np.testing.assert_array_equal(out.p, [1.0, 0.0])

    def test_harmonic_oscillator(self):
        out = leapfrog(PhaseState([1.0], [0.0]), lambda x: x, LeapfrogParams(0.001, 1571))
        # exact solution at t = 1.571: (cos t, -sin t)
        assert out.x[0] == pytest.approx(-0.000203673, abs=2e-3)
        assert out.p[0] == pytest.approx(-0.99999998, abs=2e-3)

    def test_reversible(self, rng):
        t = gaussian_std(3)
        c = builtin_constraint("ball", 50.0, radius=1.0, dim=3)
        grad = lambda x: t.grad_potential(x) + c.gradient(x)
        s = PhaseState(rng.normal(size=3) * 0.3, rng.normal(size=3))
        params = LeapfrogParams(0.001, 500)
        fwd = leapfrog(s, grad, params)
        back = leapfrog(PhaseState(fwd.x, -fwd.p), grad, params)
        np.testing.assert_allclose(back.x, s.x, atol=1e-10)
        np.testing.assert_allclose(-back.p, s.p, atol=1e-10)

    def test_path_agrees_with_leapfrog(self, rng):
        t = gaussian_std(2)
        s = PhaseState(rng.normal(size=2), rng.normal(size=2), 2.0)
        params = LeapfrogParams(0.05, 40)
        end = leapfrog(s, t.grad_potential, params)
        xs, ps = leapfrog_path(s, t.grad_potential, params)
        np.testing.assert_allclose(xs[-1], end.x, atol=1e-12)
        np.testing.assert_allclose(ps[-1], end.p, atol=1e-12)
        np.testing.assert_array_equal(xs[0], s.x)

    def test_energy_error_second_order(self, rng):
        t = gaussian_std(2)
        ratios = []
        for _ in range(20):
            s = PhaseState(rng.normal(size=2), rng.normal(size=2))
            errs = []
            for eps, n in ((0.1, 20), (0.05, 40)):
                xs, ps = leapfrog_path(s, t.grad_potential, LeapfrogParams(eps, n))
                H = 0.5 * np.sum(ps**2, axis=1) + 0.5 * np.sum(xs**2, axis=1)
                errs.append(np.max(np.abs(H - H[0])))
            ratios.append(errs[0] / errs[1])
        assert 3.0 < np.median(ratios) < 5.0
        assert all(3.0 < r < 5.0 for r in ratios)

    def test_divergence_reports_step(self):
        blowup = lambda x: np.array([math.inf]) if x[0] > 0.25 else np.zeros(1)
        with pytest.raises(DivergedTrajectory) as info:
            leapfrog(PhaseState([0.0], [1.0]), blowup, LeapfrogParams(0.1, 10))
        assert info.value.step == 3

    def test_left_region(self):
        with pytest.raises(LeftRegion) as info:
            leapfrog(PhaseState([0.0], [1.0]), zero_grad, LeapfrogParams(0.1, 10), inside=lambda x: x[0] < 0.45)
        assert info.value.step == 5

    def test_invalid_params(self):
        with pytest.raises(InvalidArgument):
            LeapfrogParams(0.0, 10)
        with pytest.raises(InvalidArgument):
            LeapfrogParams(0.1, 0)
        with pytest.raises(InvalidArgument):
            PhaseState([0.0, 1.0], [1.0])


class TestStepSizeBound:
    @pytest.mark.parametrize(
        "mu,m,g,expected", [(1000, 1, 1, 0.001), (500, 1, 1, 0.002), (100, 4, 2, 0.01)]
    )
    def test_formula(self, mu, m, g, expected):
        assert step_size_bound(mu, m, g) == pytest.approx(expected)

    def test_invalid(self):
        with pytest.raises(InvalidArgument):
            step_size_bound(0, 1, 1)


def reflection_errors(mu=1000.0, eps=0.002, x0=(-1.0, 0.5), p0=(1.2, -1.0), level=None):
    """Relative change of (p_perp, p_par) between entering and leaving ``y = level``.

    Crossing momenta are linearly interpolated between leapfrog steps.
    """
    level = 10.0 / mu if level is None else level
    t = gaussian_std(2)
    c = builtin_constraint("halfplane_y", mu)
    grad = lambda x: t.grad_potential(x) + c.gradient(x)
    xs, ps = leapfrog_path(PhaseState(x0, p0), grad, LeapfrogParams(eps, int(3.0 / eps)))
    y = xs[:, 1]
    down = np.flatnonzero((y[:-1] >= level) & (y[1:] < level))[0]
    up = np.flatnonzero((y[:-1] < level) & (y[1:] >= level) & (np.arange(len(y) - 1) > down))[0]

    def at(k):
        f = (level - y[k]) / (y[k + 1] - y[k])
        return ps[k] + f * (ps[k + 1] - ps[k])

    p_in, p_out = at(down), at(up)
    perp = abs(p_out[1] + p_in[1]) / abs(p_in[1])
    par = abs(p_out[0] - p_in[0]) / abs(p_in[0])
    return perp, par, xs


def test_roll_back_reflects():
    perp, par, xs = reflection_errors()
    assert perp < 0.02
    assert par < 0.01
    # the particle never gets far past the wall
    assert xs[:, 1].min() > -0.01
