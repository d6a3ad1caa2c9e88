"""Second moments of the reduced atom, transient and stationary.

Each moment splits into an intrinsic piece carried by the initial data
through ``d1, d2`` and an induced piece driven by the field noise. The
induced piece does not depend on the initial level and is cached per
``(params, t)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, UnphysicalCovarianceError
from .kernels import KernelSet, OscillatorParams
from .quadrature import gk15, panel_edges

__all__ = [
    "Moments",
    "Covariance",
    "InitialState",
    "evolve_covariance",
    "evolve_series",
    "induced_moments",
    "intrinsic_moments",
    "intrinsic_induced_split",
    "stationary_covariance",
    "uncertainty_onset_time",
]

QUAD_RTOL = 1e-8
# absolute floor of the quadrature target, as a fraction of the free moments
_SCALE_FLOOR = 1e-4


@dataclass(frozen=True)
class Moments:
    """Plain triple ``(<Q^2>, <P^2>, <{Q,P}>/2)`` without validation."""

    qq: float
    pp: float
    qp: float

    def __add__(self, other: "Moments") -> "Moments":
        return Moments(self.qq + other.qq, self.pp + other.pp, self.qp + other.qp)

    def __sub__(self, other: "Moments") -> "Moments":
        return Moments(self.qq - other.qq, self.pp - other.pp, self.qp - other.qp)

    def scaled(self, k: float) -> "Moments":
        return Moments(k * self.qq, k * self.pp, k * self.qp)

    def as_array(self) -> np.ndarray:
        return np.array([self.qq, self.pp, self.qp])


@dataclass(frozen=True)
class Covariance:
    """Covariance of the atom at time ``t`` for a given initial Fock level.

    ``flags`` carries qualifiers such as ``"undamped"`` or ``"quadrature"``.
    """

    qq: float
    pp: float
    qp: float
    t: float = 0.0
    init_level: int = 0
    flags: tuple[str, ...] = field(default=())

    def __post_init__(self):
        for name in ("qq", "pp", "qp"):
            if not math.isfinite(getattr(self, name)):
                raise UnphysicalCovarianceError(f"{name} is not finite")
        if math.isnan(self.t) or self.t < 0:
            raise DomainError(f"time stamp must be non-negative, got {self.t!r}")
        if self.qq <= 0 or self.pp <= 0:
            raise UnphysicalCovarianceError(
                f"second moments must be positive, got qq={self.qq}, pp={self.pp}"
            )

    @classmethod
    def from_moments(cls, mom: Moments, t=0.0, init_level=0, flags=()) -> "Covariance":
        return cls(float(mom.qq), float(mom.pp), float(mom.qp), float(t), init_level, tuple(flags))

    @property
    def moments(self) -> Moments:
        return Moments(self.qq, self.pp, self.qp)

    @property
    def det(self) -> float:
        """``qq pp - qp^2``; at least 1/4 for any quantum state."""
        return self.qq * self.pp - self.qp * self.qp

    @property
    def purity(self) -> float:
        return 0.5 / math.sqrt(self.det)

    def matrix(self) -> np.ndarray:
        return np.array([[self.qq, self.qp], [self.qp, self.pp]])

    def check_uncertainty(self, tol: float = 1e-9) -> None:
        if self.det < 0.25 - tol:
            raise UnphysicalCovarianceError(
                f"Robertson-Schroedinger bound violated: det={self.det!r} < 1/4"
            )


@dataclass(frozen=True)
class InitialState:
    """Free Fock state ``level`` of the atom at the initial time."""

    level: int = 0

    def __post_init__(self):
        if self.level not in (0, 1):
            raise DomainError(f"initial level must be 0 or 1, got {self.level!r}")

    def moments(self, params: OscillatorParams) -> Moments:
        q0, p0 = params.ground_moments
        k = 2 * self.level + 1
        return Moments(k * q0, k * p0, 0.0)


def _as_state(init) -> InitialState:
    return init if isinstance(init, InitialState) else InitialState(int(init))


def intrinsic_moments(params: OscillatorParams, init, t: float) -> Moments:
    """Initial moments propagated by the homogeneous solutions."""
    k = KernelSet(params)
    m = params.m
    d1, d2, d2d, d1d = k.d1(t), k.d2(t), k.d2dot(t), k.d1dot(t)
    s = _as_state(init).moments(params)
    qq = d1 * d1 * s.qq + d2 * d2 * s.pp / m**2 + 2 * d1 * d2 * s.qp / m
    pp = m**2 * d1d * d1d * s.qq + d2d * d2d * s.pp + 2 * m * d1d * d2d * s.qp
    qp = m * d1 * d1d * s.qq + d2 * d2d * s.pp / m + (d1 * d2d + d1d * d2) * s.qp
    return Moments(float(qq), float(pp), float(qp))


def _breakpoints(params: OscillatorParams) -> list[float]:
    g, w = params.gamma, params.omega
    centre = params.Omega if g < w else 0.0
    pts = [w, centre]
    step = g / 2.0
    while step < params.cutoff:
        pts += [centre - step, centre + step]
        step *= 2.0
    return [p for p in pts if 0.0 < p < params.cutoff]


def _induced_integrand(kset: KernelSet, t: float):
    m = kset.params.m

    def f(kappa):
        F = kset.transform(kappa, t)
        G = kset.transform_dot(kappa, t)
        nu = kset.noise_power(kappa)
        return np.stack([
            nu * (F.real**2 + F.imag**2) / m**2,
            nu * (G.real**2 + G.imag**2),
            nu * (F.real * G.real + F.imag * G.imag) / m,
        ])

    return f


def _smooth_integrand(kset: KernelSet, t: float):
    m = kset.params.m

    def f(kappa):
        f_inf, r, g_inf, r_g = kset.transform_parts(kappa, t)
        nu = kset.noise_power(kappa)
        return np.stack([
            nu * (np.abs(f_inf) ** 2 + np.abs(r) ** 2) / m**2,
            nu * (np.abs(g_inf) ** 2 + np.abs(r_g) ** 2),
            nu * (f_inf * np.conj(g_inf) + r * np.conj(r_g)).real / m,
        ])

    return f


def _cross_terms(kset: KernelSet, kappa, t: float):
    """Analytic continuation of the oscillating cross terms (complex ``kappa``)."""
    p = kset.params
    f_inf, _, g_inf, _ = kset.transform_parts(kappa, t)
    _, rb, _, rb_g = kset.transform_parts(kappa, t, conjugate=True)
    nu = 2.0 * p.m * p.gamma / math.pi * kappa
    phase = np.exp(-1j * kappa * t)
    return nu * phase * np.stack([
        2.0 * f_inf * rb / p.m**2,
        2.0 * g_inf * rb_g,
        (f_inf * rb_g + g_inf * rb) / p.m,
    ])


def _contour_part(kset: KernelSet, t: float, rtol: float, scale) -> np.ndarray:
    """Oscillating cross terms integrated over ``[0, cutoff]`` by contour shift.

    The path drops from both end points into the lower half plane, where
    ``exp(-i kappa t)`` decays, and the resonance pole contributes a residue.
    The bottom edge at depth ``Y`` is negligible since ``Y t >= 40``.
    """
    p = kset.params
    depth = max(40.0 / t, 2.0 * p.gamma)

    def legs(y):
        left = _cross_terms(kset, -1j * y, t)
        right = _cross_terms(kset, p.cutoff - 1j * y, t)
        leg = 1j * (right - left)
        return np.concatenate([leg.real, leg.imag])

    edges = panel_edges(0.0, depth, [k / t for k in (1, 2, 4, 8, 16)])
    vals, _ = gk15(legs, edges, rtol=rtol, scale=np.concatenate([scale, scale]))
    leg_total = vals[:3] + 1j * vals[3:]
    pole = kset.resonance_pole
    # residue of the susceptibility factor at Omega - i gamma is -1/(2 Omega)
    _, rb, _, rb_g = kset.transform_parts(pole, t, conjugate=True)
    nu = 2.0 * p.m * p.gamma / math.pi * pole
    res = nu * np.exp(-1j * pole * t) * (-0.5 / p.Omega) * np.array([
        2.0 * rb / p.m**2,
        2.0 * (-1j * pole) * rb_g,
        (rb_g + (-1j * pole) * rb) / p.m,
    ])
    return (leg_total - 2j * math.pi * res).real


def _use_contour(params: OscillatorParams, t: float) -> bool:
    # the split pieces peak at 1/gamma^2 while |F|^2 stays below t^2, so the
    # split is only used once gamma t is large enough to keep cancellation mild
    return (params.cutoff * t > 400.0 and 0.05 <= params.gamma * t < 40.0
            and params.gamma < 0.5 * params.omega)


@lru_cache(maxsize=4096)
def induced_moments(params: OscillatorParams, t: float, rtol: float = QUAD_RTOL) -> Moments:
    """Noise-driven part of the moments, by adaptive frequency quadrature.

    Short times integrate ``|F|^2`` directly on panels narrower than the
    ``exp(i kappa t)`` period. Long times of weakly damped atoms separate
    the oscillating cross terms and move them off the real axis, so the
    cost no longer grows with ``t``.

    Raises
    ------
    QuadratureError
        If the frequency integral does not converge.
    """
    if t < 0:
        raise DomainError("time must be non-negative")
    if t == 0 or params.gamma == 0:
        return Moments(0.0, 0.0, 0.0)
    kset = KernelSet(params)
    floor = _SCALE_FLOOR * np.array([*params.ground_moments, 0.5])

    def scale(estimate):
        # the cross moment is judged against sqrt(qq pp), not its own size
        qp_scale = math.sqrt(abs(estimate[0] * estimate[1]))
        return np.maximum(floor, [0.0, 0.0, qp_scale])
    if _use_contour(params, t):
        edges = panel_edges(0.0, params.cutoff, _breakpoints(params))
        smooth, _ = gk15(_smooth_integrand(kset, t), edges, rtol=rtol, scale=scale)
        value = smooth + _contour_part(kset, t, rtol, scale(smooth))
    else:
        # resolve the e^{i kappa t} oscillation while it is not yet damped away
        width = math.pi / t if params.gamma * t < 40 else np.inf
        edges = panel_edges(0.0, params.cutoff, _breakpoints(params), max_width=width)
        value, _ = gk15(_induced_integrand(kset, t), edges, rtol=rtol, scale=scale)
    return Moments(*map(float, value))


def intrinsic_induced_split(params: OscillatorParams, init, t: float) -> tuple[Moments, Moments]:
    """``(intrinsic, induced)`` pieces; their sum is :func:`evolve_covariance`."""
    if t < 0:
        raise DomainError("time must be non-negative")
    return intrinsic_moments(params, init, t), induced_moments(params, float(t))


def evolve_covariance(params: OscillatorParams, init, t: float) -> Covariance:
    """Covariance at time ``t`` starting from the free Fock state ``init``."""
    intr, ind = intrinsic_induced_split(params, init, t)
    flags = ("undamped",) if params.gamma == 0 else ()
    return Covariance.from_moments(intr + ind, t, _as_state(init).level, flags)


def evolve_series(params: OscillatorParams, init, times) -> list[Covariance]:
    return [evolve_covariance(params, init, float(t)) for t in np.asarray(times, dtype=float)]


def _stationary_closed(params: OscillatorParams) -> Moments:
    m, g, L = params.m, params.gamma, params.cutoff
    W = params.Omega
    qq = (1.0 - (2.0 / math.pi) * math.atan(g / W)) / (2.0 * m * W)
    angles = math.atan(g / (L - W)) - math.atan(g / (L + W)) + 2.0 * math.atan(g / W)
    log_arg = ((L - W) ** 2 + g * g) * ((L + W) ** 2 + g * g) / (W * W + g * g) ** 2
    pp = (m * (W * W - g * g) / (2.0 * W) * (1.0 - angles / math.pi)
          + m * g / (2.0 * math.pi) * math.log(log_arg))
    return Moments(qq, pp, 0.0)


def _stationary_quadrature(params: OscillatorParams) -> Moments:
    kset = KernelSet(params)
    m = params.m

    def f(kappa):
        chi2 = np.abs(kset.susceptibility(kappa)) ** 2
        nu = kset.noise_power(kappa)
        return np.stack([nu * chi2 / m**2, nu * kappa**2 * chi2])

    edges = panel_edges(0.0, params.cutoff, _breakpoints(params))
    value, _ = gk15(f, edges, rtol=QUAD_RTOL)
    return Moments(float(value[0]), float(value[1]), 0.0)


def stationary_covariance(params: OscillatorParams) -> Covariance:
    """Late-time covariance, independent of the initial level.

    The underdamped branch uses the arctan/log closed forms, in which the
    position moment is taken at infinite cutoff. Near and beyond critical
    damping the finite-cutoff frequency integrals are evaluated instead.
    ``gamma = 0`` returns the free ground moments flagged ``"undamped"``.
    """
    if params.gamma == 0:
        q0, p0 = params.ground_moments
        return Covariance(q0, p0, 0.0, math.inf, 0, ("undamped", "stationary"))
    if params.gamma < params.omega and params.Omega > 1e-3 * params.omega:
        mom, flags = _stationary_closed(params), ("stationary",)
    else:
        mom, flags = _stationary_quadrature(params), ("stationary", "quadrature")
    return Covariance.from_moments(mom, t=math.inf, flags=flags)


@lru_cache(maxsize=256)
def uncertainty_onset_time(params: OscillatorParams) -> float:
    """End of the short initial stretch where the model dips below ``det = 1/4``.

    Local damping with a band-limited noise removes ``gamma t`` from the
    determinant at once, while the noise restores ``gamma cutoff^2 t^2 /
    (2 pi omega)``; the two balance near ``2 pi omega / cutoff^2``. That
    estimate is refined to the actual crossing by root finding. The dip
    is no deeper than about ``pi gamma / (2 cutoff^2)`` (unit mass and
    frequency). Returns 0 when there is no damping.

    Raises
    ------
    UnphysicalCovarianceError
        If no crossing is found within ``1000`` times the estimate, which
        happens when the cutoff is only a few times ``omega``.
    """
    if params.gamma == 0:
        return 0.0
    t0 = 2.0 * math.pi * params.omega / params.cutoff**2

    def excess(t):
        return evolve_covariance(params, 0, t).det - 0.25

    hi = t0
    while excess(hi) <= 0:
        hi *= 2.0
        if hi > 1e3 * t0:
            raise UnphysicalCovarianceError(
                "the covariance stays below the uncertainty bound; the cutoff is too "
                f"close to omega for local damping (cutoff/omega = {params.cutoff / params.omega:g})"
            )
    lo = hi / 2.0
    while excess(lo) > 0:
        lo /= 2.0
        if lo < 1e-3 * t0:
            return 0.0
    return float(brentq(excess, lo, 2.0 * lo if 2.0 * lo <= hi else hi,
                        xtol=1e-12 * t0, rtol=1e-13))
