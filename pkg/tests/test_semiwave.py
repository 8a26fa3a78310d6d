"""Traveling profile solver and front speed estimators.

The heavy fixtures (threshold search, speed ladder) are module scoped;
profiles are cached across speed-functional calls through the shared
cache hook, which also exercises its reuse path.
"""

import numpy as np
import pytest

import nlspread.reactions as rx
from nlspread import semiwave as sw
from nlspread.kernels import INFINITE, KernelSpec, make_kernel


@pytest.fixture(scope="module")
def model():
    return rx.wnv(1.0, 1.0, 0.5, 0.5, 1.0, 1.0)


@pytest.fixture(scope="module")
def laplace1():
    return make_kernel(KernelSpec.laplace(1.0))


@pytest.fixture(scope="module")
def slow_sol(model, laplace1):
    return sw.solve_profile(0.01, model, laplace1, 50.0)


@pytest.fixture(scope="module")
def shared_cache():
    return {}


@pytest.fixture(scope="module")
def c0_ladder(model, laplace1, shared_cache):
    # profiles depend on c alone, so one cache serves every mu
    return {mu: sw.find_c0(model, laplace1, mu, cache=shared_cache)
            for mu in (1.0, 2.0, 4.0, 8.0)}


class TestSolveProfile:
    def test_endpoints_pinned_exactly(self, slow_sol):
        u_star = slow_sol.u_star
        assert np.array_equal(slow_sol.phi[:, 0], u_star)
        assert np.array_equal(slow_sol.phi[:, -1], np.zeros(2))

    def test_slow_speed_saturates(self, slow_sol):
        # at near-zero speed the profile holds the equilibrium deep into
        # the window; the midpoint readout should sit within 10 percent
        assert slow_sol.mid_saturation > 0.9
        assert slow_sol.converged
        assert slow_sol.residual < 1e-6

    def test_profile_monotone_and_boxed(self, slow_sol):
        assert slow_sol.monotone
        assert np.all(slow_sol.phi >= 0.0)
        assert np.all(slow_sol.phi <= slow_sol.u_star[:, None] + 1e-15)

    def test_fast_speed_collapses(self, model, laplace1):
        sol = sw.solve_profile(3.0, model, laplace1, 50.0)
        assert sol.mid_saturation < 0.1
        sol2 = sw.solve_profile(3.0, model, laplace1, 100.0)
        assert sol2.mid_saturation <= sol.mid_saturation + 1e-12

    def test_deterministic_bitwise(self, model, laplace1):
        a = sw.solve_profile(0.5, model, laplace1, 50.0)
        b = sw.solve_profile(0.5, model, laplace1, 50.0)
        assert np.array_equal(a.phi, b.phi)
        assert a.iterations == b.iterations

    def test_short_window_rejected(self, model, laplace1):
        with pytest.raises(ValueError):
            sw.solve_profile(0.5, model, laplace1, 10.0)

    def test_negative_speed_rejected(self, model, laplace1):
        with pytest.raises(ValueError):
            sw.solve_profile(-0.1, model, laplace1, 50.0)

    def test_iteration_cap(self, model, laplace1):
        with pytest.raises(sw.NoConvergence):
            sw.solve_profile(0.5, model, laplace1, 50.0, max_iter=3)
        sol = sw.solve_profile(0.5, model, laplace1, 50.0, max_iter=3, strict=False)
        assert not sol.converged

    def test_sedentary_component(self, laplace1):
        model = rx.custom(["(1 - u1)*u2 - 0.5*u1", "(1 - u2)*u1 - 0.5*u2"],
                          {}, m0=1, u_ceiling=[1.0, 1.0])
        sol = sw.solve_profile(0.05, model, (laplace1,), 50.0)
        assert sol.flux_integrals.shape == (1,)
        assert sol.mid_saturation > 0.8
        assert sol.monotone


class TestFluxFunctional:
    def test_linear_in_weights(self, slow_sol):
        base = slow_sol.flux_integrals
        got = sw.flux_functional(slow_sol, [2.0, 3.0])
        assert got == pytest.approx(2.0 * base[0] + 3.0 * base[1], rel=1e-14)
        # doubling the weights doubles the flux bitwise
        assert sw.flux_functional(slow_sol, [2.0, 2.0]) == 2.0 * sw.flux_functional(slow_sol, [1.0, 1.0])

    def test_weight_validation(self, slow_sol):
        with pytest.raises(ValueError):
            sw.flux_functional(slow_sol, [-1.0, 1.0])
        with pytest.raises(ValueError):
            sw.flux_functional(slow_sol, [0.0, 0.0])

    def test_symmetric_model_equal_integrals(self, slow_sol):
        # the model and kernels are symmetric under component swap
        assert slow_sol.flux_integrals[0] == pytest.approx(slow_sol.flux_integrals[1], rel=1e-12)


class TestFindC0:
    def test_speed_in_measured_band(self, c0_ladder):
        # independent readout: the range-expansion front slope for the
        # same model and weights measures 0.2175 on a dx = 0.25 grid
        res = c0_ladder[1.0]
        assert 0.19 < res.speed < 0.23
        assert res.bracket[1] - res.bracket[0] <= 1e-3 + 1e-12
        assert res.solution.converged

    def test_single_sign_change(self, c0_ladder):
        for res in c0_ladder.values():
            pts = sorted(res.trace)
            flips = sum(1 for a, b in zip(pts, pts[1:]) if (a[1] > 0) != (b[1] > 0))
            assert flips == 1

    def test_monotone_in_expansion_weight(self, c0_ladder):
        speeds = [c0_ladder[mu].speed for mu in (1.0, 2.0, 4.0, 8.0)]
        assert all(a < b for a, b in zip(speeds, speeds[1:]))

    def test_window_doubling_stable(self, model, laplace1, c0_ladder):
        wide = sw.find_c0(model, laplace1, 1.0, L=100.0)
        assert wide.speed == pytest.approx(c0_ladder[1.0].speed, rel=0.01)

    def test_tiny_weight_floor(self, model, laplace1):
        res = sw.find_c0(model, laplace1, 1e-9)
        assert res.bracket == (0.0, 1e-3)
        assert res.speed <= 1e-3

    def test_heavy_tail_rejected(self, model):
        for gamma in (1.5, 2.0):
            kern = make_kernel(KernelSpec.powerlaw(gamma, 1.0))
            with pytest.raises(sw.FirstMomentDiverges):
                sw.find_c0(model, kern, 1.0)

    def test_cache_reused(self, model, laplace1):
        cache = {}
        first = sw.find_c0(model, laplace1, 1.0, cache=cache)
        n_solved = len(cache)
        again = sw.find_c0(model, laplace1, 1.0, cache=cache)
        assert len(cache) == n_solved
        assert again.speed == first.speed


class TestLinearizedSpeed:
    def test_value_against_scalar_reduction(self, model, laplace1):
        # the rate jacobian at zero is symmetric with equal diagonal, so
        # the spectral bound reduces to a scalar curve minimized directly
        lam = np.linspace(1e-4, 1.0 - 1e-9, 200_001)
        curve = (1.0 / (1.0 - lam ** 2) - 0.5) / lam
        expect = curve.min()
        got = sw.linearized_front_speed(model, laplace1)
        assert got == pytest.approx(expect, rel=1e-6)

    def test_heavy_tail_infinite(self, model):
        kern = make_kernel(KernelSpec.powerlaw(2.5, 1.0))
        assert sw.linearized_front_speed(model, kern) == INFINITE

    def test_compact_kernel_finite(self, model):
        kern = make_kernel(KernelSpec.uniform(1.0))
        val = sw.linearized_front_speed(model, kern)
        assert np.isfinite(val) and 0.0 < val < 10.0


@pytest.fixture(scope="module")
def threshold(model, laplace1):
    # trimmed schedule and a grid wrapped around the known threshold keep
    # this probe affordable; the full schedule is exercised by the
    # acceptance suite
    return sw.estimate_cstar(model, laplace1, lengths=(50.0, 100.0),
                             c_grid=(1.3, 1.6, 1.8, 1.95))


class TestEstimateCstar:
    def test_threshold_near_linearized(self, model, laplace1, threshold):
        lin = sw.linearized_front_speed(model, laplace1)
        assert threshold.value == pytest.approx(lin, rel=0.06)
        assert threshold.bracket[0] < threshold.value < threshold.bracket[1]

    def test_exceeds_boundary_matched_speeds(self, threshold, c0_ladder):
        assert threshold.value > c0_ladder[8.0].speed

    def test_trace_escalates_windows(self, threshold):
        assert len(threshold.trace) >= 4
        for c, L, ratio in threshold.trace:
            assert L in threshold.lengths
            assert 0.0 <= ratio <= 1.0 + 1e-12

    def test_heavy_tail_infinite(self, model):
        kern = make_kernel(KernelSpec.powerlaw(1.5, 1.0))
        res = sw.estimate_cstar(model, kern)
        assert res.value == INFINITE
        assert res.linearized == INFINITE
        assert "exponential moment" in res.note

    def test_grid_entirely_alive(self, model, laplace1):
        with pytest.raises(sw.ThresholdNotBracketed):
            sw.estimate_cstar(model, laplace1, lengths=(50.0,),
                              c_grid=(0.05, 0.1))

    def test_grid_floor_dead(self, model, laplace1):
        with pytest.raises(sw.ThresholdNotBracketed):
            sw.estimate_cstar(model, laplace1, lengths=(50.0,),
                              c_grid=(2.5, 3.0))
