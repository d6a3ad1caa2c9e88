import math
import warnings

import numpy as np
import pytest

from harmonic_atom import OscillatorParams, UsageError, evolve_covariance
from harmonic_atom.covariance import InitialState
from harmonic_atom.gaussian_states import free_state_kernel
from harmonic_atom.oracle import (
    KernelSpec,
    RecurrenceWarning,
    build_bath,
    evolve_atom,
    evolve_full,
    overlap_quadrature,
)


@pytest.fixture(scope="module")
def bath2000():
    return build_bath(OscillatorParams(gamma=0.1), 2000)


class TestBath:
    def test_too_few_modes(self, medium):
        with pytest.raises(UsageError):
            build_bath(medium, 15)

    def test_grid(self, medium):
        b = build_bath(medium, 64)
        assert np.all(np.diff(b.kappa) > 0)
        assert b.kappa[0] > 0
        assert b.kappa[-1] == pytest.approx(medium.cutoff * (1 - 1 / 128))

    def test_riemann_sum(self, medium):
        # sum c_j^2 approximates int (4 m gamma / pi) kappa^2 dkappa
        for n in (64, 256):
            b = build_bath(medium, n)
            exact = 4 * medium.m * medium.gamma / math.pi * medium.cutoff**3 / 3
            assert abs(np.sum(b.coupling**2) / exact - 1) < 1.0 / n

    def test_gamma_eff_first_order(self, medium):
        e16 = abs(build_bath(medium, 16).gamma_eff - medium.gamma)
        e32 = abs(build_bath(medium, 32).gamma_eff - medium.gamma)
        assert e16 / e32 == pytest.approx(2.0, rel=0.1)

    def test_gamma_eff_within_one_over_n(self, medium):
        for n in (16, 64, 256):
            b = build_bath(medium, n)
            assert abs(b.gamma_eff - medium.gamma) < medium.gamma / n * 4


class TestDynamics:
    def test_decoupled_rotation(self):
        p = OscillatorParams(gamma=0.0)
        b = build_bath(p, 32)
        init = InitialState(1).moments(p)
        t = 0.7
        c = evolve_atom(b, 1, t)
        cs, sn = math.cos(t), math.sin(t)
        assert c.qq == pytest.approx(init.qq * cs**2 + init.pp * sn**2, rel=1e-12)
        assert c.pp == pytest.approx(init.pp * cs**2 + init.qq * sn**2, rel=1e-12)
        assert c.qp == pytest.approx((init.pp - init.qq) * cs * sn, abs=1e-12)

    def test_atom_block_matches_full(self, medium):
        b = build_bath(medium, 100)
        full = evolve_full(b, 1, 3.0).atom(1)
        fast = evolve_atom(b, 1, 3.0)
        assert (full.qq, full.pp, full.qp) == pytest.approx((fast.qq, fast.pp, fast.qp), rel=1e-10)

    def test_energy_conserved(self, medium):
        b = build_bath(medium, 200)
        e = [evolve_full(b, 1, t).energy(b) for t in np.linspace(0, b.recurrence_time, 7)]
        assert np.ptp(e) / e[0] < 1e-8

    def test_full_covariance_positive(self, medium):
        b = build_bath(medium, 100)
        assert evolve_full(b, 0, 2.0).min_eigenvalue() > 0

    def test_uncertainty_bound_decoupled(self):
        b = build_bath(OscillatorParams(gamma=0.0), 40)
        assert evolve_full(b, 0, 1.3).uncertainty_eigenvalue() > -1e-8

    def test_uncertainty_bound_displaced_start(self, medium):
        # the bath starts in its vacuum about x_j - c_j Q / kappa_j^2, so the
        # full initial covariance is not a canonical state even though the
        # atom block is
        b = build_bath(medium, 100)
        assert evolve_full(b, 0, 0.0).uncertainty_eigenvalue() < -1e-8
        assert evolve_atom(b, 0, 0.0).det >= 0.25 - 1e-12

    def test_recurrence_flag(self, medium):
        b = build_bath(medium, 32)
        with pytest.warns(RecurrenceWarning):
            c = evolve_atom(b, 1, 1.5 * b.recurrence_time)
        assert "unreliable" in c.flags
        with pytest.warns(RecurrenceWarning):
            assert not evolve_full(b, 1, 1.5 * b.recurrence_time).reliable
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert evolve_full(b, 1, 0.5 * b.recurrence_time).reliable


class TestAgainstAnalytic:
    def test_n2000_within_one_percent(self, bath2000):
        p = bath2000.params
        worst = 0.0
        for level in (0, 1):
            for t in np.linspace(2.5, 50, 20):
                a = evolve_atom(bath2000, level, t)
                b = evolve_covariance(p, level, t)
                scale = math.sqrt(b.qq * b.pp)
                worst = max(worst, abs(a.qq / b.qq - 1), abs(a.pp / b.pp - 1), abs(a.qp - b.qp) / scale)
        assert worst < 0.01

    def test_monotone_in_n(self):
        p = OscillatorParams(gamma=0.1)
        ref = evolve_covariance(p, 1, 10.0)
        errs = []
        for n in (250, 500, 1000, 2000):
            a = evolve_atom(build_bath(p, n), 1, 10.0)
            errs.append(max(abs(a.qq / ref.qq - 1), abs(a.pp / ref.pp - 1)))
        assert np.all(np.diff(errs) < 0)


class TestOverlap:
    @pytest.fixture
    def free(self, medium):
        mw = medium.m * medium.omega

        def spec(n):
            spread = math.sqrt(2 * n + 1)
            return KernelSpec(free_state_kernel(medium, n), spread / math.sqrt(2 * mw),
                              spread * math.sqrt(2 / mw))
        return spec

    def test_self_overlap(self, free):
        for n in (0, 1, 3):
            assert overlap_quadrature(free(n), free(n)) == pytest.approx(1.0, abs=1e-10)

    def test_orthogonal(self, free):
        assert abs(overlap_quadrature(free(0), free(1))) < 1e-10
        assert abs(overlap_quadrature(free(1), free(2))) < 1e-10
