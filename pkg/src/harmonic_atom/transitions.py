"""Transition probabilities between free Fock levels of the atom.

Closed forms cover every ground-branch probability and ``1 -> 0`` at all
times, plus ``1 -> 1`` and ``1 -> 2`` once the state has relaxed. Any other
pair is reached by numerical overlap of coordinate kernels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .covariance import Covariance, evolve_covariance, stationary_covariance
from .errors import DomainError, UsageError
from .gaussian_states import (
    coeffs_from_covariance,
    excited_branch_coeffs,
    excited_populations,
    fock_populations,
    free_state_kernel,
)
from .kernels import OscillatorParams
from .oracle import KernelSpec, overlap_quadrature

__all__ = [
    "TransitionReport",
    "p00",
    "p01",
    "p10",
    "p11_stationary",
    "p12_stationary",
    "transition_overlap",
    "transition_report",
    "delta_epsilon",
    "weak_coupling_estimates",
    "stationary_p10_expansion",
    "strong_coupling_rate",
    "GrowthWindows",
    "GrowthReport",
    "growth_analysis",
    "growth_grid",
    "p10_series",
]

MAX_OVERLAP_LEVEL = 6
PROB_TOL = 1e-9


def _free(params: OscillatorParams | None) -> tuple[float, float]:
    return (params or OscillatorParams()).ground_moments


def _joint(cov: Covariance, params) -> float:
    qi, pi_ = _free(params)
    return (cov.qq + qi) * (cov.pp + pi_) - cov.qp**2


def p00(cov0_f: Covariance, params: OscillatorParams | None = None) -> float:
    """Probability of finding the free ground level after ground-branch evolution."""
    return _joint(cov0_f, params) ** -0.5


def p01(cov0_f: Covariance, params: OscillatorParams | None = None) -> float:
    return (cov0_f.det - 0.25) * _joint(cov0_f, params) ** -1.5


def p10(cov0_f: Covariance, cov1_f: Covariance,
        params: OscillatorParams | None = None) -> float:
    """Decay probability ``1 -> 0`` from both branch covariances at the same time."""
    if cov0_f.t != cov1_f.t:
        raise UsageError("covariances must share a time stamp")
    qi, pi_ = _free(params)
    q0, p0, x0 = cov0_f.qq, cov0_f.pp, 2.0 * cov0_f.qp
    q1, p1, x1 = cov1_f.qq, cov1_f.pp, 2.0 * cov1_f.qp
    num = (2 * q0 * p0 - 0.5 * x0**2 + 0.25 + 0.25 * x0 * x1
           - 0.5 * q0 * p1 - 0.5 * q1 * p0
           - 0.5 * qi * (p1 - 3 * p0) - 0.5 * pi_ * (q1 - 3 * q0))
    return num * _joint(cov0_f, params) ** -1.5


def _stationary_joint(cov: Covariance, params) -> float:
    qi, pi_ = _free(params)
    return (cov.qq + qi) * (cov.pp + pi_)


def p11_stationary(cov_stat: Covariance, params: OscillatorParams | None = None) -> float:
    return (cov_stat.qq * cov_stat.pp - 0.25) * _stationary_joint(cov_stat, params) ** -1.5


def p12_stationary(cov_stat: Covariance, params: OscillatorParams | None = None) -> float:
    qi, pi_ = _free(params)
    q, p = cov_stat.qq, cov_stat.pp
    num = 0.5 * (q * pi_ - qi * p) ** 2 + (q * p - 0.25) ** 2
    return num * _stationary_joint(cov_stat, params) ** -2.5


def _gaussian_spec(cov: Covariance) -> KernelSpec:
    co = coeffs_from_covariance(cov)
    return KernelSpec(co.kernel, math.sqrt(cov.qq), 1.0 / math.sqrt(2.0 * co.a))


def _excited_spec(cov0: Covariance, cov1: Covariance) -> KernelSpec:
    ex = excited_branch_coeffs(cov0, cov1)
    width = math.sqrt(3.0)
    return KernelSpec(ex.kernel, width * math.sqrt(max(cov0.qq, cov1.qq)),
                      width / math.sqrt(2.0 * ex.ground.a))


def _free_spec(params: OscillatorParams, n: int) -> KernelSpec:
    mw = params.m * params.omega
    spread = math.sqrt(2 * n + 1)
    return KernelSpec(free_state_kernel(params, n), spread / math.sqrt(2 * mw),
                      spread * math.sqrt(2.0 / mw))


def transition_overlap(n: int, branch: int, cov0: Covariance, cov1: Covariance | None = None,
                       params: OscillatorParams | None = None, *, rtol: float = 1e-10) -> float:
    """``P_{branch -> n}`` by 2D quadrature of free level ``n`` against the evolved kernel.

    Raises
    ------
    DomainError
        For ``n`` above 6 or an unknown branch.
    UsageError
        If the excited branch is requested without its covariance.
    """
    if not 0 <= n <= MAX_OVERLAP_LEVEL:
        raise DomainError(f"free level must be in [0, {MAX_OVERLAP_LEVEL}], got {n}")
    params = params or OscillatorParams()
    if branch == 0:
        evolved = _gaussian_spec(cov0)
    elif branch == 1:
        if cov1 is None:
            raise UsageError("the excited branch needs the level-one covariance")
        evolved = _excited_spec(cov0, cov1)
    else:
        raise DomainError(f"branch must be 0 or 1, got {branch}")
    return overlap_quadrature(_free_spec(params, n), evolved, rtol=rtol)


@dataclass(frozen=True)
class TransitionReport:
    """Probabilities ``P_{m->n}`` keyed by ``(m, n)`` with the method used."""

    params: OscillatorParams
    t: float
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        for key, (prob, _method) in self.entries.items():
            if not -PROB_TOL <= prob <= 1 + PROB_TOL:
                raise DomainError(f"P{key} = {prob} lies outside [0, 1]")
        for m in {k[0] for k in self.entries}:
            total = sum(p for (a, _), (p, _) in self.entries.items() if a == m)
            if total > 1 + PROB_TOL:
                raise DomainError(f"probabilities out of level {m} sum to {total}")

    def __getitem__(self, key) -> float:
        return self.entries[key][0]

    def method(self, key) -> str:
        return self.entries[key][1]


def transition_report(params: OscillatorParams, t: float | None = None,
                      n_final: int = 2) -> TransitionReport:
    """All probabilities out of levels 0 and 1 into levels ``0..n_final``.

    ``t=None`` selects the relaxed state. Ground-branch entries come from
    closed forms. Transient excited-branch entries other than ``1 -> 0`` use
    the overlap quadrature up to level 6 and the Legendre derivative above.
    """
    if t is None:
        cov = stationary_covariance(params)
        c0 = c1 = cov
        when, method = math.inf, "stationary"
    else:
        c0 = evolve_covariance(params, 0, t)
        c1 = evolve_covariance(params, 1, t)
        when, method = float(t), "closed-form"
    entries = {(0, 0): (p00(c0, params), method), (0, 1): (p01(c0, params), method),
               (1, 0): (p10(c0, c1, params), method)}
    ground, _ = fock_populations(c0, n_final, params=params)
    for n in range(2, n_final + 1):
        entries[(0, n)] = (float(ground[n]), "closed-form")
    if t is None:
        entries[(1, 1)] = (p11_stationary(c0, params), method)
        entries[(1, 2)] = (p12_stationary(c0, params), method)
        start = 3
    else:
        start = 1
    excited = excited_populations(c0, c1, n_final, params=params)
    for n in range(start, n_final + 1):
        if n <= MAX_OVERLAP_LEVEL and t is not None:
            entries[(1, n)] = (transition_overlap(n, 1, c0, c1, params), "overlap-quadrature")
        else:
            entries[(1, n)] = (float(excited[n]), "closed-form")
    return TransitionReport(params, when, entries)


def delta_epsilon(cov: Covariance, params: OscillatorParams | None = None) -> tuple[float, float]:
    """Fractional excess ``(delta, epsilon)`` with ``qq = qq_i (1 + 2 delta)``."""
    qi, pi_ = _free(params)
    return 0.5 * (cov.qq / qi - 1.0), 0.5 * (cov.pp / pi_ - 1.0)


def weak_coupling_estimates(delta: float, epsilon: float) -> dict[str, float]:
    """Leading small-``delta, epsilon`` approximants of the relaxed probabilities.

    ``delta`` is usually negative for the relaxed state (the position
    spread shrinks), so only ``1 + 2 delta > 0`` and ``1 + 2 epsilon > 0``
    are required.
    """
    d, e = delta, epsilon
    if 1 + 2 * d <= 0 or 1 + 2 * e <= 0:
        raise DomainError("need 1 + 2 delta > 0 and 1 + 2 epsilon > 0")
    return {
        "p00": 1.0 - (d + e) / 2.0,
        "p01": (d + e) / 2.0,
        "p00+p01": 1.0 - (3 * d * d + 2 * d * e + 3 * e * e) / 8.0,
        "p10": 1.0 / math.sqrt((1 + d) * (1 + e)),
        "p11": (d + e) / 2.0,
        "p12": (3 * d * d + 2 * d * e + 3 * e * e) / 8.0,
        "p10+p11+p12": 1.0 - (5 * d**3 + 3 * d * d * e + 3 * d * e * e + 5 * e**3) / 16.0,
    }


def stationary_p10_expansion(params: OscillatorParams) -> float:
    """First-order-in-``gamma`` value of the relaxed ``1 -> 0`` probability."""
    w, L, g = params.omega, params.cutoff, params.gamma
    spread = L * L - w * w
    bracket = 2 * L * L - w * w - spread * math.log(spread / (w * w))
    return 1.0 + g / (2 * math.pi * w * spread) * bracket


def strong_coupling_rate(params: OscillatorParams) -> float:
    """Transient growth rate of ``P_{1->0}`` beyond the weak-coupling limit."""
    g, w, L = params.gamma, params.omega, params.cutoff
    return 2 * g / (1 + 4 * g / (math.pi * w) * (math.log(L / w) - 1)) ** 1.5


def p10_series(params: OscillatorParams, times) -> np.ndarray:
    out = []
    for t in np.asarray(times, dtype=float):
        c0 = evolve_covariance(params, 0, t)
        c1 = evolve_covariance(params, 1, t)
        out.append(p10(c0, c1, params))
    return np.array(out)


@dataclass(frozen=True)
class GrowthWindows:
    """Fit windows for :func:`growth_analysis`, in units of time.

    ``None`` bounds take the defaults: early ``[0, 0.1/cutoff]``; middle
    ``[10/cutoff, 0.1/gamma]`` when ``gamma <= 0.1 omega`` and
    ``[10/cutoff, 0.5/omega]`` otherwise; tail ``t >= 0.75 t_max``.
    """

    early: tuple[float, float] | None = None
    middle: tuple[float, float] | None = None
    tail_fraction: float = 0.75

    def resolve(self, params: OscillatorParams, t_max: float):
        L, g, w = params.cutoff, params.gamma, params.omega
        early = self.early or (0.0, 0.1 / L)
        if self.middle is not None:
            middle = self.middle
        elif g <= 0.1 * w:
            middle = (10.0 / L, 0.1 / g)
        else:
            middle = (10.0 / L, 0.5 / w)
        return early, middle, self.tail_fraction * t_max


@dataclass(frozen=True)
class GrowthReport:
    early_coefficients: tuple[float, float]
    predicted_early: tuple[float, float]
    slope: float
    slope_detrended: float
    weak_rate: float
    strong_rate: float
    saturation: float
    predicted_saturation: float
    exact_saturation: float
    windows: tuple


def growth_grid(params: OscillatorParams, t_max: float | None = None,
                n_early: int = 24, n_middle: int = 80, n_late: int = 60) -> np.ndarray:
    """Time grid with enough points in each window of :func:`growth_analysis`."""
    g = params.gamma
    if g <= 0:
        raise DomainError("growth analysis needs gamma > 0")
    t_max = t_max or 20.0 / g
    early, middle, tail = GrowthWindows().resolve(params, t_max)
    pieces = [
        np.linspace(0.0, early[1], n_early + 1),
        np.linspace(middle[0], middle[1], n_middle),
        np.linspace(min(middle[1], tail), t_max, n_late),
    ]
    return np.unique(np.concatenate(pieces))


def growth_analysis(params: OscillatorParams, t_grid, windows: GrowthWindows | None = None,
                    values=None) -> GrowthReport:
    """Early coefficients, mid-window slope and saturation of ``P_{1->0}(t)``.

    The early fit uses ``c1 t + c2 t^2 + c3 t^3``. ``slope`` is the
    least-squares line through the middle window; ``slope_detrended`` also
    fits a quadratic term and reports the linear coefficient at the window
    start. The saturation is the mean over the tail.

    Raises
    ------
    UsageError
        If a window holds fewer than four grid points or the grid stops
        short of ``20/gamma``.
    """
    t = np.asarray(t_grid, dtype=float)
    if params.gamma <= 0:
        raise DomainError("growth analysis needs gamma > 0")
    if t.ndim != 1 or np.any(np.diff(t) <= 0):
        raise UsageError("time grid must be strictly increasing")
    if t[0] > 0 or t[-1] < 20.0 / params.gamma * (1 - 1e-12):
        raise UsageError("time grid must span [0, 20/gamma]")
    windows = windows or GrowthWindows()
    early, middle, tail = windows.resolve(params, t[-1])
    P = p10_series(params, t) if values is None else np.asarray(values, dtype=float)

    def select(lo, hi):
        mask = (t >= lo) & (t <= hi)
        if mask.sum() < 4:
            raise UsageError(f"fewer than four grid points in window [{lo}, {hi}]")
        return t[mask], P[mask]

    te, pe = select(*early)
    c = np.linalg.lstsq(np.vstack([te, te**2, te**3]).T, pe, rcond=None)[0]
    tm, pm = select(*middle)
    slope = float(np.polyfit(tm, pm, 1)[0])
    x = tm - tm[0]
    slope_dt = float(np.polyfit(x, pm, 2)[1])
    tt, pt = select(tail, np.inf)
    g, w, L = params.gamma, params.omega, params.cutoff
    cov = stationary_covariance(params)
    return GrowthReport(
        early_coefficients=(float(c[0]), float(c[1])),
        predicted_early=(g, g * g + g * L * L / (2 * math.pi * w)),
        slope=slope,
        slope_detrended=slope_dt,
        weak_rate=2 * g,
        strong_rate=strong_coupling_rate(params),
        saturation=float(pt.mean()),
        predicted_saturation=stationary_p10_expansion(params),
        exact_saturation=p10(cov, cov, params),
        windows=(early, middle, tail),
    )
