import math

import numpy as np
import pytest

from harmonic_atom import (
    DomainError,
    OscillatorParams,
    UsageError,
    evolve_covariance,
    fock_populations,
    growth_analysis,
    growth_grid,
    p00,
    p01,
    p10,
    p11_stationary,
    p12_stationary,
    stationary_covariance,
    transition_overlap,
    transition_report,
)
from harmonic_atom.transitions import (
    GrowthWindows,
    TransitionReport,
    delta_epsilon,
    stationary_p10_expansion,
    strong_coupling_rate,
    weak_coupling_estimates,
)

# (gamma, t) -> (P00, P01, P10, P11, P12); P11 and P12 from the overlap quadrature
FROZEN = {
    (0.01, 1.0): (0.976431533066, 0.022931988117, 0.041475163009, 0.914327807935, 0.042428952667),
    (0.1, 3.0): (0.865619528535, 0.101832064382, 0.44878433069, 0.432254492928, 0.079570510414),
    (0.4, 2.0): (0.646704285712, 0.209904094429, 0.54159782375, 0.243760962239, 0.10951201897),
}


def _sweep():
    return [(g, t) for g in (0.02, 0.1, 0.25, 0.4) for t in (0.05, 0.5, 2.0, 8.0, 30.0)]


class TestInitialIdentities:
    def test_ground_branch(self, medium):
        c0 = evolve_covariance(medium, 0, 0.0)
        assert abs(p00(c0, medium) - 1) < 1e-10
        assert abs(p01(c0, medium)) < 1e-10

    def test_excited_branch(self, medium):
        c0, c1 = evolve_covariance(medium, 0, 0.0), evolve_covariance(medium, 1, 0.0)
        assert abs(p10(c0, c1, medium)) < 1e-10
        assert abs(transition_overlap(1, 1, c0, c1, medium) - 1) < 1e-10
        assert abs(transition_overlap(0, 1, c0, c1, medium)) < 1e-10


class TestClosedForms:
    @pytest.mark.parametrize("key", sorted(FROZEN))
    def test_frozen_transients(self, key):
        g, t = key
        r = transition_report(OscillatorParams(gamma=g), t)
        got = (r[(0, 0)], r[(0, 1)], r[(1, 0)], r[(1, 1)], r[(1, 2)])
        np.testing.assert_allclose(got, FROZEN[key], atol=1e-10)

    def test_late_ground_probability(self, medium):
        assert 0 <= p00(stationary_covariance(medium), medium) < 1

    def test_p01_is_first_population(self, rng):
        for g in (0.01, 0.1, 0.3):
            p = OscillatorParams(gamma=g)
            for t in (0.5, 3.0, math.inf):
                c = stationary_covariance(p) if math.isinf(t) else evolve_covariance(p, 0, t)
                pops, _ = fock_populations(c, 2, params=p)
                assert p01(c, p) == pytest.approx(pops[1], abs=1e-8)

    @pytest.mark.parametrize("g,t", _sweep())
    def test_against_overlap(self, g, t):
        p = OscillatorParams(gamma=g)
        c0, c1 = evolve_covariance(p, 0, t), evolve_covariance(p, 1, t)
        assert abs(p00(c0, p) - transition_overlap(0, 0, c0, params=p)) < 1e-6
        assert abs(p01(c0, p) - transition_overlap(1, 0, c0, params=p)) < 1e-6
        assert abs(p10(c0, c1, p) - transition_overlap(0, 1, c0, c1, p)) < 1e-6

    @pytest.mark.parametrize("g", [0.01, 0.1, 0.4])
    def test_stationary_against_overlap(self, g):
        p = OscillatorParams(gamma=g)
        st = stationary_covariance(p)
        assert abs(p00(st, p) - transition_overlap(0, 0, st, params=p)) < 1e-8
        assert abs(p10(st, st, p) - transition_overlap(0, 1, st, st, p)) < 1e-6
        assert abs(p11_stationary(st, p) - transition_overlap(1, 1, st, st, p)) < 1e-6
        assert abs(p12_stationary(st, p) - transition_overlap(2, 1, st, st, p)) < 1e-6

    def test_strong_transient_decay(self, strong):
        c0, c1 = evolve_covariance(strong, 0, 2.0), evolve_covariance(strong, 1, 2.0)
        assert abs(transition_overlap(0, 1, c0, c1, strong) - p10(c0, c1, strong)) < 1e-6

    def test_weak_stationary_decay(self, weak):
        st = stationary_covariance(weak)
        assert p10(st, st, weak) == pytest.approx(0.987, abs=2e-3)
        assert stationary_p10_expansion(weak) == pytest.approx(0.988525, abs=1e-6)

    def test_undamped_limit(self):
        p = OscillatorParams(gamma=1e-6)
        st = stationary_covariance(p)
        assert p10(st, st, p) == pytest.approx(1.0, abs=1e-4)

    def test_expansion_is_first_order(self):
        for g in (1e-3, 3e-3):
            p = OscillatorParams(gamma=g)
            st = stationary_covariance(p)
            assert abs(p10(st, st, p) - stationary_p10_expansion(p)) < 10 * g * g

    def test_p11_is_minus_first_order_term(self, weak):
        st = stationary_covariance(weak)
        first_order = stationary_p10_expansion(weak) - 1
        assert p11_stationary(st, weak) > 0
        assert p11_stationary(st, weak) == pytest.approx(-first_order, abs=10 * weak.gamma**2)

    @pytest.mark.parametrize("g", [0.005, 0.02, 0.05])
    def test_weak_ordering(self, g):
        p = OscillatorParams(gamma=g)
        st = stationary_covariance(p)
        assert p10(st, st, p) > p11_stationary(st, p) > p12_stationary(st, p)

    def test_time_mismatch(self, medium):
        with pytest.raises(UsageError):
            p10(evolve_covariance(medium, 0, 1.0), evolve_covariance(medium, 1, 1.5), medium)

    def test_overlap_domain(self, medium):
        c = evolve_covariance(medium, 0, 1.0)
        with pytest.raises(DomainError):
            transition_overlap(7, 0, c, params=medium)
        with pytest.raises(DomainError):
            transition_overlap(0, 2, c, params=medium)
        with pytest.raises(UsageError):
            transition_overlap(0, 1, c, params=medium)


class TestWeakCouplingEstimates:
    def test_free_limit(self):
        est = weak_coupling_estimates(0.0, 0.0)
        assert est["p10"] == 1 and est["p00"] == 1
        assert est["p01"] == est["p11"] == est["p12"] == 0

    def test_two_level_sum(self):
        d = e = 0.01
        est = weak_coupling_estimates(d, e)
        assert est["p00+p01"] == pytest.approx(1 - (3 * d * d + 2 * d * e + 3 * e * e) / 8)
        assert est["p10+p11+p12"] < 1

    def test_against_exact(self):
        g = 1e-3
        p = OscillatorParams(gamma=g)
        st = stationary_covariance(p)
        d, e = delta_epsilon(st, p)
        assert d < 0 < e
        est = weak_coupling_estimates(d, e)
        assert abs(est["p00"] - p00(st, p)) < 10 * g * g
        assert abs(est["p01"] - p01(st, p)) < 10 * g * g
        assert abs(est["p11"] - p11_stationary(st, p)) < 10 * g * g
        assert abs(est["p12"] - p12_stationary(st, p)) < 10 * g * g

    def test_domain(self):
        with pytest.raises(DomainError):
            weak_coupling_estimates(-0.6, 0.0)


class TestReport:
    def test_stationary_report(self, medium):
        r = transition_report(medium, None, 4)
        assert r.method((1, 1)) == "stationary"
        assert math.isinf(r.t)
        for m in (0, 1):
            total = sum(r[(m, n)] for n in range(5))
            assert 0 < total <= 1 + 1e-9

    def test_transient_methods(self, medium):
        r = transition_report(medium, 2.0, 3)
        assert r.method((1, 0)) == "closed-form"
        assert r.method((1, 2)) == "overlap-quadrature"
        assert all(0 <= r[k] <= 1 for k in r.entries)

    def test_rejects_out_of_range(self, medium):
        with pytest.raises(DomainError):
            TransitionReport(medium, 1.0, {(0, 0): (1.2, "closed-form")})
        with pytest.raises(DomainError):
            TransitionReport(medium, 1.0, {(0, 0): (0.7, "x"), (0, 1): (0.7, "x")})


class TestGrowth:
    def test_grid_requirements(self, weak):
        with pytest.raises(UsageError):
            growth_analysis(weak, np.linspace(0, 10, 50))
        with pytest.raises(UsageError):
            growth_analysis(weak, np.linspace(0, 2000, 50))
        with pytest.raises(UsageError):
            growth_analysis(weak, [0.0, 2.0, 1.0])

    def test_windows(self, weak, strong):
        early, middle, _ = GrowthWindows().resolve(weak, 2000.0)
        assert early == (0.0, 1e-3) and middle == (0.1, 10.0)
        _, middle, _ = GrowthWindows().resolve(strong, 50.0)
        assert middle == (0.1, 0.5)

    def test_early_coefficients(self, weak):
        rep = growth_analysis(weak, growth_grid(weak))
        c1, c2 = rep.early_coefficients
        assert c1 == pytest.approx(rep.predicted_early[0], rel=1e-3)
        assert c2 == pytest.approx(rep.predicted_early[1], rel=1e-2)

    def test_strong_rate_formula(self, strong):
        bracket = 1 + 4 * 0.4 / math.pi * (math.log(100) - 1)
        assert strong_coupling_rate(strong) == pytest.approx(0.8 / bracket**1.5)
