import math
import warnings

import numpy as np
import pytest
from scipy.integrate import quad

from harmonic_atom import (
    Covariance,
    DomainError,
    InitialState,
    KernelSet,
    OscillatorParams,
    UnphysicalCovarianceError,
    evolve_covariance,
    evolve_series,
    induced_moments,
    intrinsic_induced_split,
    intrinsic_moments,
    stationary_covariance,
    uncertainty_onset_time,
)
from harmonic_atom.covariance import _induced_integrand, _use_contour, panel_edges, gk15


def closed_qq(g, m=1.0, w=1.0):
    W = math.sqrt(w * w - g * g)
    return 1 / (2 * m * W) - math.atan(g / W) / (math.pi * m * W)


def closed_pp(g, L, m=1.0, w=1.0):
    W = math.sqrt(w * w - g * g)
    ang = math.atan(g / (L - W)) - math.atan(g / (L + W)) + 2 * math.atan(g / W)
    log = math.log(((L - W) ** 2 + g * g) * ((L + W) ** 2 + g * g) / (W * W + g * g) ** 2)
    return m * (W * W - g * g) / (2 * W) * (1 - ang / math.pi) + m * g / (2 * math.pi) * log


# frozen values of the closed forms at cutoff 100 (m = omega = 1)
STATIONARY = {
    0.01: (0.496841691, 0.526059110),
    0.1: (0.470474000, 0.754232520),
    0.4: (0.402623049, 1.446463315),
}


class TestCovarianceType:
    def test_validation(self):
        with pytest.raises(UnphysicalCovarianceError):
            Covariance(-1.0, 1.0, 0.0)
        with pytest.raises(UnphysicalCovarianceError):
            Covariance(float("nan"), 1.0, 0.0)
        with pytest.raises(DomainError):
            Covariance(1.0, 1.0, 0.0, t=-1.0)

    def test_uncertainty_check(self):
        Covariance(0.5, 0.5, 0.0).check_uncertainty()
        with pytest.raises(UnphysicalCovarianceError):
            Covariance(0.4, 0.5, 0.0).check_uncertainty()

    def test_purity(self):
        assert Covariance(0.5, 0.5, 0.0).purity == pytest.approx(1.0)
        assert Covariance(1.5, 1.5, 0.0).purity == pytest.approx(1 / 3)

    def test_initial_state(self):
        p = OscillatorParams(m=2.0, omega=3.0)
        assert InitialState(1).moments(p).as_array() == pytest.approx([3 / 12, 9.0, 0.0])
        with pytest.raises(DomainError):
            InitialState(2)


class TestTransient:
    @pytest.mark.parametrize("level", [0, 1])
    def test_initial_moments(self, weak, level):
        c = evolve_covariance(weak, level, 0.0)
        k = 2 * level + 1
        assert (c.qq, c.pp, c.qp) == (0.5 * k, 0.5 * k, 0.0)

    def test_split_sums_and_starts_empty(self, medium):
        intr, ind = intrinsic_induced_split(medium, 1, 0.0)
        assert ind.as_array().tolist() == [0.0, 0.0, 0.0]
        intr, ind = intrinsic_induced_split(medium, 1, 3.7)
        tot = evolve_covariance(medium, 1, 3.7)
        assert (intr + ind).as_array() == pytest.approx([tot.qq, tot.pp, tot.qp], rel=0, abs=0)

    def test_undamped_is_free_rotation(self):
        p = OscillatorParams(gamma=0.0)
        c = evolve_covariance(p, 1, 2.3)
        assert (c.qq, c.pp) == pytest.approx((1.5, 1.5))
        assert c.qp == pytest.approx(0.0, abs=1e-15)
        assert "undamped" in c.flags

    def test_negative_time(self, weak):
        with pytest.raises(DomainError):
            evolve_covariance(weak, 0, -0.1)

    def test_induced_against_scipy_quad(self, medium):
        # independent adaptive integration of nu |F|^2 etc. on [0, cutoff]
        k = KernelSet(medium)
        t = 5.0
        pts = [medium.Omega] + list(np.arange(1.0, 100.0, 1.0))

        def comp(i):
            f = lambda x: _induced_integrand(k, t)(np.array([x]))[i][0]
            return quad(f, 0, medium.cutoff, points=pts, limit=2000, epsabs=1e-13, epsrel=1e-12)[0]

        ref = [comp(i) for i in range(3)]
        got = induced_moments(medium, t).as_array()
        np.testing.assert_allclose(got, ref, rtol=1e-7, atol=1e-12)

    @pytest.mark.parametrize("t", [60.0, 250.0])
    def test_contour_matches_direct(self, weak, t):
        assert _use_contour(weak, t)
        k = KernelSet(weak)
        edges = panel_edges(0.0, weak.cutoff, [weak.Omega], max_width=math.pi / t)
        direct, _ = gk15(_induced_integrand(k, t), edges, rtol=1e-9, scale=np.array([5e-5, 5e-5, 5e-5]))
        np.testing.assert_allclose(induced_moments(weak, t).as_array(), direct,
                                   rtol=1e-8, atol=1e-12)

    @pytest.mark.parametrize("t", [700.0, 3000.0])
    def test_contour_narrow_resonance(self, t):
        # resonance width 1e-4 against a cutoff of 1000: a very sharp peak
        p = OscillatorParams(gamma=1e-4, cutoff=1000.0)
        assert _use_contour(p, t)
        k = KernelSet(p)
        edges = panel_edges(0.0, p.cutoff, [p.Omega], max_width=math.pi / t)
        direct, _ = gk15(_induced_integrand(k, t), edges, rtol=1e-9, scale=np.full(3, 1e-9))
        np.testing.assert_allclose(induced_moments(p, t).as_array(), direct, rtol=1e-7, atol=1e-11)

    def test_long_time_weak(self, weak):
        c = evolve_covariance(weak, 0, 2000.0)
        assert c.qq == pytest.approx(0.4968, rel=1e-3)

    @pytest.mark.parametrize("g", [0.01, 0.1, 0.4])
    def test_level_independence_and_relaxation(self, g):
        p = OscillatorParams(gamma=g)
        T = 20 / g
        c0, c1 = evolve_covariance(p, 0, T), evolve_covariance(p, 1, T)
        assert abs(c1.qq - c0.qq) / c0.qq < 1e-3
        st = stationary_covariance(p)
        assert c0.qq == pytest.approx(st.qq, rel=5e-3)
        assert c0.pp == pytest.approx(st.pp, rel=5e-3)
        assert abs(c0.qp) < 1e-3 * math.sqrt(c0.qq * c0.pp)

    def test_intrinsic_decay_rate(self, weak):
        t = np.linspace(0, 1 / weak.gamma, 400)
        qq = np.array([intrinsic_moments(weak, 0, ti).qq for ti in t])
        rate = -np.polyfit(t, np.log(qq), 1)[0]
        assert rate == pytest.approx(2 * weak.gamma, rel=0.05)

    def test_jolt_steeper_for_larger_cutoff(self):
        slopes = []
        for L in (100.0, 1000.0):
            p = OscillatorParams(gamma=0.01, cutoff=L)
            slopes.append(induced_moments(p, 1 / L).pp * L)
        assert slopes[1] > 5 * slopes[0]

    def test_induced_position_grows(self, weak):
        t = np.linspace(1, 1 / weak.gamma, 40)
        qq = [induced_moments(weak, ti).qq for ti in t]
        assert np.polyfit(t, qq, 1)[0] > 0

    def test_series(self, medium):
        out = evolve_series(medium, 1, [0.0, 1.0, 2.0])
        assert [c.t for c in out] == [0.0, 1.0, 2.0]
        assert all(c.init_level == 1 for c in out)


class TestUncertainty:
    @pytest.mark.parametrize("g", [0.01, 0.1, 0.4, 0.9])
    def test_bound_after_onset(self, g):
        p = OscillatorParams(gamma=g)
        for t in np.geomspace(uncertainty_onset_time(p), 20 / g, 60):
            for level in (0, 1):
                assert evolve_covariance(p, level, t).det >= 0.25 - 1e-9

    @pytest.mark.parametrize("g,L", [(0.01, 100.0), (0.4, 100.0), (0.1, 1000.0)])
    def test_initial_dip_is_bounded(self, g, L):
        # the local-damping model dips below 1/4 until about 2 pi omega / cutoff^2
        p = OscillatorParams(gamma=g, cutoff=L)
        t0 = uncertainty_onset_time(p)
        assert t0 == pytest.approx(2 * math.pi / L**2, rel=1e-3)
        t = np.linspace(0, t0, 41)[1:-1]
        dets = np.array([evolve_covariance(p, 0, ti).det for ti in t]) - 0.25
        depth = math.pi * g / (2 * L * L)
        assert dets.min() < 0
        assert dets.min() > -1.05 * depth
        assert evolve_covariance(p, 0, 1.5 * t0).det > 0.25


def test_low_cutoff_never_recovers():
    with pytest.raises(UnphysicalCovarianceError):
        uncertainty_onset_time(OscillatorParams(gamma=0.3, cutoff=2.0))


class TestStationary:
    @pytest.mark.parametrize("g", sorted(STATIONARY))
    def test_closed_forms(self, g):
        p = OscillatorParams(gamma=g)
        st = stationary_covariance(p)
        assert st.qq == pytest.approx(closed_qq(g), rel=1e-12)
        assert st.pp == pytest.approx(closed_pp(g, 100.0), rel=1e-12)
        assert (st.qq, st.pp) == pytest.approx(STATIONARY[g], rel=1e-8)
        assert st.qp == 0.0 and math.isinf(st.t)

    def test_weak_values_and_mixedness(self, weak):
        st = stationary_covariance(weak)
        assert st.qq == pytest.approx(0.4968, abs=5e-5)
        assert st.det > 0.25

    def test_small_gamma_expansion(self):
        g = 1e-4
        st = stationary_covariance(OscillatorParams(gamma=g))
        assert abs(st.qq - (0.5 - g / math.pi)) < 10 * g * g

    def test_undamped(self):
        st = stationary_covariance(OscillatorParams(gamma=0.0))
        assert (st.qq, st.pp, st.qp) == (0.5, 0.5, 0.0)
        assert "undamped" in st.flags

    @pytest.mark.parametrize("g", [1.0, 1.5, 3.0])
    def test_quadrature_branch(self, g):
        st = stationary_covariance(OscillatorParams(gamma=g))
        assert "quadrature" in st.flags
        late = evolve_covariance(OscillatorParams(gamma=g), 0, 60.0)
        # the transient keeps the finite-cutoff tail that the closed qq drops
        assert late.qq == pytest.approx(st.qq, rel=1e-5)
        assert late.pp == pytest.approx(st.pp, rel=1e-5)

    def test_closed_form_continuous_into_quadrature(self):
        a = stationary_covariance(OscillatorParams(gamma=0.998))
        b = stationary_covariance(OscillatorParams(gamma=0.9999999))
        assert a.pp == pytest.approx(b.pp, rel=1e-2)
