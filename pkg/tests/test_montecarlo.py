import math

import numpy as np
import pytest

from pam1d.lattice import hamiltonian, principal_eigpair, solve_box
from pam1d.montecarlo import (best_screening_bound, fk_estimate,
                              screening_lower_bound, simulate_walk)
from pam1d.potential import Field, sample_field

from conftest import constant_field, make_spec, zero_field


class TestSimulateWalk:
    def test_zero_time_no_jumps(self):
        path = simulate_walk(1.0, 0.0, 0)
        assert len(path.times) == 0
        assert path.sites.tolist() == [0]
        assert path.position(0.0) == 0
        assert path.kappa == 1.0

    def test_deterministic_given_seed(self):
        a = simulate_walk(1.0, 5.0, 42)
        b = simulate_walk(1.0, 5.0, 42)
        assert np.array_equal(a.sites, b.sites)
        assert np.array_equal(a.times, b.times)

    def test_path_structure(self):
        path = simulate_walk(0.7, 10.0, 3)
        assert np.all(np.diff(path.times) > 0)
        assert np.all(np.abs(np.diff(path.sites)) == 1)
        assert len(path.sites) == len(path.times) + 1

    def test_mean_jump_count(self):
        # number of jumps by time t is Poisson(2 kappa t)
        kappa, t, n = 1.0, 3.0, 3000
        counts = np.array([len(simulate_walk(kappa, t, s).times)
                           for s in range(n)])
        mean = 2 * kappa * t
        sigma = math.sqrt(mean / n)
        assert abs(counts.mean() - mean) < 4 * sigma

    def test_variance_of_position(self):
        # Var X(t) = 2 kappa t for the rate-2kappa walk with +-1 steps
        kappa, t, n = 0.5, 4.0, 3000
        finals = np.array([simulate_walk(kappa, t, s).position(t)
                           for s in range(n)])
        var = 2 * kappa * t
        # fourth-moment bound for the stderr of a variance estimate
        sigma = math.sqrt((3 * var ** 2 + var) / n)
        assert abs((finals ** 2).mean() - var) < 4 * sigma


class TestFkEstimate:
    def test_zero_potential(self):
        fld = zero_field(-100, 100)
        res = fk_estimate(fld, 1.0, 2.0, 500, 0)
        assert res.estimate == pytest.approx(1.0)
        assert res.stderr == pytest.approx(0.0, abs=1e-12)
        assert not res.lower_bound

    def test_constant_potential(self):
        # xi = -1: the path integral is -t for every path, so the estimator
        # is exact with zero variance
        fld = constant_field(-100, 100, -1.0)
        res = fk_estimate(fld, 1.0, 2.0, 10_000, 1)
        assert res.estimate == pytest.approx(math.exp(-2.0), rel=1e-12)
        assert res.stderr == pytest.approx(0.0, abs=1e-12)

    def test_box_mode_vs_spectral(self):
        spec = make_spec(0.0, 1.0)
        for seed in range(3):
            fld = sample_field(spec, -10, 10, seed)
            exact = solve_box(fld, 0, 10, 1.0, 3.0)[10]
            res = fk_estimate(fld, 1.0, 3.0, 40_000, seed, box=10)
            assert res.lower_bound
            assert abs(res.estimate - exact) < 4 * max(res.stderr, 1e-12)

    def test_block_consistency(self):
        # disjoint seed blocks agree within combined 4 stderr
        fld = sample_field(make_spec(0.0, 1.0), -10, 10, 5)
        a = fk_estimate(fld, 1.0, 3.0, 20_000, 100, box=10)
        b = fk_estimate(fld, 1.0, 3.0, 20_000, 200, box=10)
        comb = math.hypot(a.stderr, b.stderr)
        assert abs(a.estimate - b.estimate) < 4 * comb

    def test_exit_raises_unbounded(self):
        fld = zero_field(-2, 2)
        with pytest.raises(ValueError, match="outside the sampled"):
            fk_estimate(fld, 1.0, 10.0, 200, 0)

    def test_zero_samples_rejected(self):
        with pytest.raises(ValueError):
            fk_estimate(zero_field(-5, 5), 1.0, 1.0, 0, 0)


class TestScreeningLowerBound:
    def test_no_travel_is_sandwich_lower_half(self):
        # y = 0: LB = 2 log e_R(0) + t lambda exactly
        spec = make_spec(0.0, 1.0)
        fld = sample_field(spec, -5, 5, 8)
        op = hamiltonian(fld, 0, 5, 1.0)
        pe = principal_eigpair(op)
        t = 4.0
        lb = screening_lower_bound(fld, 1.0, t, 0, 5)
        assert lb == pytest.approx(2 * math.log(pe.eigvec[5]) + t * pe.principal)

    def test_single_step_travel_factor(self):
        # xi = 0 everywhere: r_0 = 1, travel factor log((1 - e^{-2 kappa})/2),
        # wait penalty -2 kappa s with s = 1
        kappa, t, R = 1.0, 6.0, 4
        fld = zero_field(-10, 10)
        lb0 = screening_lower_bound(fld, kappa, t, 0, R)
        lb1 = screening_lower_bound(fld, kappa, t, 1, R)
        op = hamiltonian(fld, 1, R, kappa)
        lam = principal_eigpair(op).principal
        travel = math.log(-math.expm1(-2 * kappa)) - math.log(2.0)
        # lb1 = travel + wait + window(t - 1); lb0 = window(t) at centre 0
        expected = travel - 2 * kappa * 1.0 + (lb0 - t * lam) + (t - 1) * lam
        assert lb1 == pytest.approx(expected, abs=1e-12)

    def test_linear_in_t_beyond_split(self):
        fld = zero_field(-10, 10)
        op = hamiltonian(fld, 2, 4, 1.0)
        lam = principal_eigpair(op).principal
        lb5 = screening_lower_bound(fld, 1.0, 5.0, 2, 4, s=2.0)
        lb9 = screening_lower_bound(fld, 1.0, 9.0, 2, 4, s=2.0)
        assert lb9 - lb5 == pytest.approx(4.0 * lam, abs=1e-10)

    def test_infeasible_split_raises(self):
        fld = zero_field(-10, 10)
        # crossing 5 zero-potential sites needs sum r_x = 5 > s
        with pytest.raises(ValueError, match="infeasible"):
            screening_lower_bound(fld, 1.0, 20.0, 6, 3, s=1.0)
        # default split min(sum r, t/2) infeasible for t too small
        with pytest.raises(ValueError, match="infeasible"):
            screening_lower_bound(fld, 1.0, 4.0, 6, 3)

    def test_below_exact_solver(self):
        spec = make_spec(0.0, 1.0)
        for seed in range(10):
            fld = sample_field(spec, -30, 30, seed)
            t = 6.0
            exact = math.log(solve_box(fld, 0, 30, 1.0, t)[30])
            for y in (0, 3, -4):
                try:
                    lb = screening_lower_bound(fld, 1.0, t, y, 5)
                except ValueError:
                    continue
                assert lb <= exact + 1e-9


class TestBestScreeningBound:
    def test_homogeneous_stays_home(self):
        fld = constant_field(-60, 60, -0.5)
        lb, y_star = best_screening_bound(fld, 1.0, 8.0, 40, 5)
        assert y_star == 0

    def test_planted_window_found(self):
        # walls at xi = -e everywhere except a clean window around +50
        n = 161
        heavy = np.ones(n, bool)
        vals = np.ones(n)                  # W = 1 -> xi = -e
        lo = -80
        heavy[0 - lo] = False; vals[0 - lo] = 0.0
        for x in range(47, 54):
            heavy[x - lo] = False
            vals[x - lo] = 0.0
        fld = Field(lo=lo, hi=80, heavy=heavy, values=vals)
        lb, y_star = best_screening_bound(fld, 1.0, 200.0, 70, 1)
        assert 47 <= y_star <= 53

    def test_no_candidate_raises(self):
        fld = zero_field(-3, 3)
        with pytest.raises(ValueError):
            best_screening_bound(fld, 1.0, 10.0, 2, 10)
