import itertools
import math
import random

import numpy as np
import pytest

from negdim.bose_model import (
    BoseParams,
    EnsembleConstraints,
    LevelSpectrum,
    cumulative,
    energy_sum,
    log_zeta,
    log_zeta_d2,
    occupation,
    partition_saddle,
    planck_density,
    rank_model_neg1,
    solve_beta_nu,
    solve_nu,
    total_occupation,
)
from negdim.errors import DomainError, ValidationError


def three_level():
    return LevelSpectrum.from_pairs([(1, 1), (2, 1), (3, 1)])


def exact_log_z(xs, beta, n_total):
    """Oracle: ln Z by exhaustive enumeration over all compositions."""
    s = len(xs)
    z = 0.0
    for cuts in itertools.combinations(range(n_total + s - 1), s - 1):
        counts = []
        prev = -1
        for c in cuts:
            counts.append(c - prev - 1)
            prev = c
        counts.append(n_total + s - 1 - prev - 1)
        z += math.exp(-beta * sum(n * x for n, x in zip(counts, xs)))
    return math.log(z)


class TestSpectrumTypes:
    def test_derived_quantities(self):
        spec = LevelSpectrum.from_pairs([(0, 2), (1, 1), (3, 1)])
        assert spec.s == 3
        assert spec.Q == 4
        assert spec.xbar == pytest.approx((0 * 2 + 1 + 3) / 4)
        assert spec.x_min == 0 and spec.x_max == 3

    def test_validation(self):
        with pytest.raises(ValidationError):
            LevelSpectrum.from_pairs([(1, 1), (1, 1)])
        with pytest.raises(ValidationError):
            LevelSpectrum.from_pairs([(1, 0)])
        with pytest.raises(ValidationError):
            LevelSpectrum.from_pairs([])
        with pytest.raises(ValidationError):
            EnsembleConstraints(0, 5.0)
        with pytest.raises(ValidationError):
            BoseParams(math.nan, 0.0)

    def test_admissibility(self):
        spec = three_level()
        EnsembleConstraints(3, 4.0).check_admissible(spec)
        with pytest.raises(DomainError):
            EnsembleConstraints(3, 2.0).check_admissible(spec)
        with pytest.raises(DomainError):
            EnsembleConstraints(3, 9.0).check_admissible(spec)


class TestOccupation:
    def test_zero_level_with_log2_nu(self):
        assert occupation((0, 1), BoseParams(1.0, -math.log(2))) == pytest.approx(1.0)

    def test_direct_substitution(self):
        got = occupation((1, 2), BoseParams(1.0, 0.0))
        assert got == pytest.approx(2.0 / (math.e - 1.0), rel=1e-14)

    def test_scalar_arithmetic_oracle(self):
        x, q, beta, nu = 3.0, 1.0 / 6.0, 0.01, -1.0
        expected = q / (math.exp(beta * x - nu) - 1.0)
        assert occupation((x, q), BoseParams(beta, nu)) == pytest.approx(expected, rel=1e-14)

    def test_domain_error(self):
        with pytest.raises(DomainError):
            occupation((1, 1), BoseParams(0.0, 1.0))
        with pytest.raises(DomainError):
            occupation((1, -1), BoseParams(1.0, 0.0))


class TestCumulative:
    def test_first_level_only(self):
        spec = three_level()
        params = BoseParams(1.0, -0.5)
        assert cumulative(spec, params, 1) == pytest.approx(
            occupation((1, 1), params)
        )

    def test_full_sum_matches_solved_n(self):
        spec = three_level()
        nu = solve_nu(spec, 1.0, 10.0)
        assert cumulative(spec, BoseParams(1.0, nu), spec.s) == pytest.approx(
            10.0, rel=1e-10
        )

    def test_telescoping(self):
        spec = three_level()
        nu = solve_nu(spec, 1.0, 10.0)
        params = BoseParams(1.0, nu)
        b2 = cumulative(spec, params, 2)
        b3 = cumulative(spec, params, 3)
        assert b2 == pytest.approx(b3 - occupation((3, 1), params), rel=1e-12)

    def test_nondecreasing_in_l(self):
        spec = LevelSpectrum.from_pairs([(0, 1), (1, 2), (2, 1), (5, 3)])
        params = BoseParams(0.7, -0.9)
        vals = [cumulative(spec, params, l) for l in range(1, spec.s + 1)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_index_errors(self):
        spec = three_level()
        params = BoseParams(1.0, -0.5)
        for l in (0, 4):
            with pytest.raises(DomainError):
                cumulative(spec, params, l)


class TestSolveNu:
    def test_single_level_closed_form(self):
        spec = LevelSpectrum.from_pairs([(0, 1)])
        for beta in (0.0, 0.5, 2.0):
            assert solve_nu(spec, beta, 1.0) == pytest.approx(-math.log(2), rel=1e-12)
            assert solve_nu(spec, beta, 3.0) == pytest.approx(-math.log(4 / 3), rel=1e-12)

    def test_three_level_residual(self):
        spec = three_level()
        nu = solve_nu(spec, 1.0, 10.0)
        assert nu < 1.0  # below beta * x_min
        got = total_occupation(spec, BoseParams(1.0, nu))
        assert abs(got - 10.0) / 10.0 <= 1e-10

    def test_bisection_oracle_agreement(self):
        spec = three_level()
        target = 10.0

        def sum_at(nu):
            return sum(1.0 / (math.exp(x - nu) - 1.0) for x in (1, 2, 3))

        lo, hi = -60.0, 1.0 - 1e-12
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if sum_at(mid) < target:
                lo = mid
            else:
                hi = mid
        assert solve_nu(spec, 1.0, target) == pytest.approx(lo, abs=1e-10)

    def test_monotone_in_nu(self):
        spec = three_level()
        nus = np.linspace(-5, 0.9, 40)
        sums = [total_occupation(spec, BoseParams(1.0, nu)) for nu in nus]
        assert all(b > a for a, b in zip(sums, sums[1:]))


class TestSolveBetaNu:
    def test_equipartition_limit(self):
        spec = LevelSpectrum.from_pairs([(1, 1), (2, 1)])
        n = 2
        betas = []
        for delta in (0.1, 0.01, 0.001):
            params = solve_beta_nu(spec, EnsembleConstraints(n, n * spec.xbar - delta))
            betas.append(params.beta)
        assert all(b > 0 for b in betas)
        assert betas[0] > betas[1] > betas[2]

    def test_three_level_residuals(self):
        spec = three_level()
        cons = EnsembleConstraints(6, 10.0)
        params = solve_beta_nu(spec, cons)
        assert abs(total_occupation(spec, params) - 6) / 6 < 1e-8
        assert abs(energy_sum(spec, params) - 10.0) / 10.0 < 1e-8

    def test_round_trip(self):
        spec = LevelSpectrum.from_pairs([(0, 1), (1, 2), (2, 1), (4, 1)])
        cons = EnsembleConstraints(7, 6.0)
        params = solve_beta_nu(spec, cons)
        assert total_occupation(spec, params) == pytest.approx(7.0, rel=1e-8)
        assert energy_sum(spec, params) == pytest.approx(6.0, rel=1e-8)

    def test_randomized_residuals(self):
        rng = random.Random(20260810)
        for _ in range(30):
            s = rng.randint(2, 50)
            xs = sorted(rng.sample(range(0, 101), s))
            qs = [rng.uniform(0.2, 5.0) for _ in range(s)]
            spec = LevelSpectrum.from_pairs(list(zip(xs, qs)))
            n = rng.randint(2, 400)
            beta = rng.uniform(0.0, 2.0)
            nu = solve_nu(spec, beta, n)
            assert abs(total_occupation(spec, BoseParams(beta, nu)) - n) / n <= 1e-10
            if spec.xbar > spec.x_min:
                u = rng.uniform(0.05, 0.95)
                e = n * (spec.x_min + u * (spec.xbar - spec.x_min))
                params = solve_beta_nu(spec, EnsembleConstraints(n, e))
                assert abs(total_occupation(spec, params) - n) / n <= 1e-8
                assert abs(energy_sum(spec, params) - e) / abs(e) <= 1e-8

    def test_inadmissible(self):
        spec = three_level()
        with pytest.raises(DomainError):
            solve_beta_nu(spec, EnsembleConstraints(3, 100.0))


class TestLogZeta:
    def test_single_level(self):
        spec = LevelSpectrum.from_pairs([(0, 1)])
        assert log_zeta(spec, BoseParams(1.0, -math.log(2))) == pytest.approx(
            math.log(2), rel=1e-14
        )

    def test_two_level_direct(self):
        spec = LevelSpectrum.from_pairs([(1, 1), (2, 1)])
        expected = -math.log(1 - math.exp(-1)) - math.log(1 - math.exp(-2))
        assert log_zeta(spec, BoseParams(1.0, 0.0)) == pytest.approx(expected, rel=1e-14)

    def test_first_derivative_matches_occupancies(self):
        spec = three_level()
        params = BoseParams(1.0, -0.4)
        h = 1e-6
        fd = (
            log_zeta(spec, BoseParams(1.0, -0.4 + h))
            - log_zeta(spec, BoseParams(1.0, -0.4 - h))
        ) / (2 * h)
        assert fd == pytest.approx(total_occupation(spec, params), rel=1e-6)

    def test_domain_error(self):
        spec = three_level()
        with pytest.raises(DomainError):
            log_zeta(spec, BoseParams(1.0, 2.0))


class TestLogZetaD2:
    def test_single_level_value(self):
        spec = LevelSpectrum.from_pairs([(0, 1)])
        assert log_zeta_d2(spec, BoseParams(1.0, -math.log(2))) == pytest.approx(2.0)

    def test_matches_central_difference(self):
        # nu near the condensate edge keeps the second difference well
        # conditioned (d2 >> |log zeta|), so float64 reaches rel 1e-6 at h=1e-5.
        spec = three_level()
        h = 1e-5
        nu0 = 0.9
        fd = (
            log_zeta(spec, BoseParams(1.0, nu0 + h))
            - 2 * log_zeta(spec, BoseParams(1.0, nu0))
            + log_zeta(spec, BoseParams(1.0, nu0 - h))
        ) / h**2
        assert fd == pytest.approx(log_zeta_d2(spec, BoseParams(1.0, nu0)), rel=1e-6)

    def test_matches_central_difference_generic_point(self):
        spec = three_level()
        h = 1e-4
        nu0 = -0.7
        fd = (
            log_zeta(spec, BoseParams(1.0, nu0 + h))
            - 2 * log_zeta(spec, BoseParams(1.0, nu0))
            + log_zeta(spec, BoseParams(1.0, nu0 - h))
        ) / h**2
        assert fd == pytest.approx(log_zeta_d2(spec, BoseParams(1.0, nu0)), rel=1e-5)

    def test_positive_on_solved_instance(self):
        spec = three_level()
        nu = solve_nu(spec, 1.0, 10.0)
        assert log_zeta_d2(spec, BoseParams(1.0, nu)) > 0


def dense_level_log_z(s, n_total, beta_eff):
    """Exact ln Z over integer levels 0..s-1 via a dense count-energy DP."""
    xs = list(range(s))
    emax = n_total * xs[-1]
    g = np.zeros((n_total + 1, emax + 1))
    g[0, 0] = 1.0
    for x in xs:
        for n in range(1, n_total + 1):
            if x == 0:
                g[n, :] += g[n - 1, :]
            else:
                g[n, x:] += g[n - 1, :-x]
    w = np.exp(-beta_eff * np.arange(emax + 1))
    return math.log(float(g[n_total] @ w))


class TestPartitionSaddle:
    def test_small_instance_against_enumeration(self):
        # At fixed s the Laplace correction is O(1/s), not O(1/N); for
        # s = 3 the offset sits near 0.055 here.
        xs = (0, 1, 2)
        spec = LevelSpectrum.from_pairs([(x, 1) for x in xs])
        exact = exact_log_z(xs, 1.0, 5)
        est = partition_saddle(spec, 1.0, 5)
        assert abs(est - exact) < 0.1

    def test_beta0_exact_count_is_stars_and_bars(self):
        xs = (0, 1, 2)
        for n in (5, 10):
            assert math.exp(exact_log_z(xs, 0.0, n)) == pytest.approx(
                math.comb(n + 2, 2), rel=1e-12
            )

    def test_dp_oracle_matches_enumeration(self):
        got = dense_level_log_z(3, 5, 1.0)
        assert got == pytest.approx(exact_log_z((0, 1, 2), 1.0, 5), rel=1e-12)

    def test_error_decreases_at_fixed_s_over_n_ratio(self):
        # The O(1/N) claim lives in the regime s ~ N with bounded levels:
        # integer levels 0..s-1 with beta_eff = beta * B / (s - 1) realize
        # x dense in [0, B].  beta = 0.5 crosses zero inside the window, so
        # it only gets the net-decrease check.
        b_span = 2.0
        grid = (10, 20, 40, 80)

        def errors(beta):
            out = []
            for n in grid:
                s = max(3, (3 * n) // 10)
                beta_eff = beta * b_span / (s - 1)
                spec = LevelSpectrum.from_pairs([(x, 1) for x in range(s)])
                exact = dense_level_log_z(s, n, beta_eff)
                out.append(abs(partition_saddle(spec, beta_eff, n) - exact))
            return out

        for beta in (0.0, 1.0):
            errs = errors(beta)
            assert errs[0] > errs[1] > errs[2] > errs[3]
        errs_half = errors(0.5)
        assert errs_half[-1] < errs_half[0]

    def test_fixed_s_error_saturates_not_decays(self):
        # Documented limitation: with s pinned the error tends to a
        # nonzero constant; at beta = 1 it approaches from below.
        xs = (0, 1, 2)
        spec = LevelSpectrum.from_pairs([(x, 1) for x in xs])
        errs = [
            abs(partition_saddle(spec, 1.0, n) - exact_log_z(xs, 1.0, n))
            for n in (10, 20, 40, 80)
        ]
        assert errs[0] < errs[1] < errs[2] < errs[3]
        assert errs[-1] == pytest.approx(0.081, abs=2e-3)


class TestPlanckDensity:
    def test_peak_location_d3(self):
        # Oracle: peak of w^3/(e^w - 1) solves 3 (1 - e^-w) = w.
        from scipy.optimize import brentq, minimize_scalar

        root = brentq(lambda w: 3 * (1 - math.exp(-w)) - w, 1.0, 5.0, xtol=1e-12)
        assert root == pytest.approx(2.8214, abs=2e-4)
        res = minimize_scalar(
            lambda w: -planck_density(w, 1.0, 3),
            bounds=(0.5, 8.0),
            method="bounded",
            options={"xatol": 1e-10},
        )
        assert res.x == pytest.approx(root, abs=1e-6)

    def test_small_omega_limit(self):
        for beta in (0.5, 1.0, 2.0):
            w = 1e-7
            assert planck_density(w, beta, 3) == pytest.approx(w**2 / beta, rel=1e-6)

    def test_scale_covariance(self):
        from scipy.optimize import minimize_scalar

        peak1 = minimize_scalar(
            lambda w: -planck_density(w, 1.0, 3), bounds=(0.5, 8.0), method="bounded",
            options={"xatol": 1e-10},
        ).x
        peak2 = minimize_scalar(
            lambda w: -planck_density(w, 2.0, 3), bounds=(0.25, 4.0), method="bounded",
            options={"xatol": 1e-10},
        ).x
        assert peak2 == pytest.approx(peak1 / 2, rel=1e-5)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            planck_density(0.0, 1.0, 3)
        with pytest.raises(DomainError):
            planck_density(1.0, 0.0, 3)


class TestRankModel:
    def test_closed_form_matches_quadrature(self):
        params = BoseParams(0.0, -1.0)
        for omega in (5, 20, 80, 300):
            closed = rank_model_neg1(omega, 0.5, params, 2.3, mode="closed-beta0")
            quad = rank_model_neg1(omega, 0.5, params, 2.3, mode="quadrature")
            assert quad == pytest.approx(closed, rel=1e-8)

    def test_lower_limit_vanishes(self):
        params = BoseParams(0.0, -1.0)
        omega = (2.0 / 0.5) * (1 + 1e-9)
        assert rank_model_neg1(omega, 0.5, params, 1.0, mode="closed-beta0") == pytest.approx(
            0.0, abs=1e-8
        )

    def test_monotone_in_omega(self):
        params = BoseParams(0.05, -0.7)
        for mode in ("discrete", "quadrature"):
            vals = [
                rank_model_neg1(w, 0.5, params, 1.5, mode=mode)
                for w in range(5, 100, 7)
            ]
            assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_discrete_matches_manual_sum(self):
        beta, nu, alpha, c, omega = 0.1, -0.5, 0.8, 3.0, 10.0
        top = math.floor(alpha * omega)
        expected = c * sum(
            1.0 / (i * (i - 1) * (math.exp(beta * i - nu) - 1.0))
            for i in range(2, top + 1)
        )
        got = rank_model_neg1(omega, alpha, BoseParams(beta, nu), c, mode="discrete")
        assert got == pytest.approx(expected, rel=1e-12)

    def test_domain_errors(self):
        params = BoseParams(0.0, -1.0)
        with pytest.raises(DomainError):
            rank_model_neg1(3.0, 0.5, params, 1.0)  # alpha*omega <= 2
        with pytest.raises(DomainError):
            rank_model_neg1(50.0, 0.5, BoseParams(0.1, -1.0), 1.0, mode="closed-beta0")
        with pytest.raises(DomainError):
            rank_model_neg1(50.0, 0.5, BoseParams(0.0, 0.5), 1.0)  # nu >= 2 beta
        with pytest.raises(DomainError):
            rank_model_neg1(50.0, 0.5, params, 1.0, mode="bogus")
