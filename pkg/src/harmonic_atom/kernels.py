"""Green's kernels of the damped atom and the vacuum force-noise spectrum.

The internal coordinate of the atom obeys

    Q'' + 2 gamma Q' + omega^2 Q = xi(t) / m

with ``xi`` a Gaussian force whose symmetrised power spectrum on
``0 <= kappa <= cutoff`` is ``noise_power(kappa) = (2 m gamma / pi) kappa``.
Units are natural (hbar = c = 1).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, PoleError

__all__ = [
    "Branch",
    "OscillatorParams",
    "KernelSet",
    "homogeneous_kernels",
    "retarded_susceptibility",
    "one_sided_transform",
    "noise_power",
]

# Root splittings below this are treated as exactly critical.
_CRITICAL_SPLIT = 1e-7


class Branch(enum.Enum):
    UNDERDAMPED = "underdamped"
    CRITICAL = "critical"
    OVERDAMPED = "overdamped"


@dataclass(frozen=True)
class OscillatorParams:
    """Physical parameters of the atom-field model.

    Parameters
    ----------
    m : float
        Oscillator mass, ``m > 0``.
    omega : float
        Physical (renormalised) frequency, ``omega > 0``.
    gamma : float
        Damping constant, ``gamma >= 0``. Related to the coupling by
        ``gamma = coupling**2 / (4 m)``.
    cutoff : float
        Sharp frequency cutoff of the field, ``cutoff > omega``.
    """

    m: float = 1.0
    omega: float = 1.0
    gamma: float = 0.01
    cutoff: float = 100.0

    def __post_init__(self):
        for name in ("m", "omega", "gamma", "cutoff"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.m <= 0:
            raise DomainError(f"mass must be positive, got {self.m}")
        if self.omega <= 0:
            raise DomainError(f"omega must be positive, got {self.omega}")
        if self.gamma < 0:
            raise DomainError(f"gamma must be non-negative, got {self.gamma}")
        if self.cutoff <= self.omega:
            raise DomainError(
                f"cutoff must exceed omega, got cutoff={self.cutoff}, omega={self.omega}"
            )

    @classmethod
    def from_coupling(cls, m, omega, coupling, cutoff):
        """Build parameters from the bare coupling ``lambda``."""
        return cls(m=m, omega=omega, gamma=coupling**2 / (4.0 * m), cutoff=cutoff)

    @property
    def lambda_sq(self) -> float:
        return 4.0 * self.m * self.gamma

    @property
    def coupling(self) -> float:
        return math.sqrt(self.lambda_sq)

    @property
    def branch(self) -> Branch:
        if self.gamma < self.omega:
            return Branch.UNDERDAMPED
        if self.gamma > self.omega:
            return Branch.OVERDAMPED
        return Branch.CRITICAL

    @property
    def Omega(self) -> float:
        """``sqrt(|omega^2 - gamma^2|)``; read together with :attr:`branch`."""
        return math.sqrt(abs(self.omega**2 - self.gamma**2))

    @property
    def ground_moments(self) -> tuple[float, float]:
        """``(<Q^2>, <P^2>)`` of the free ground state."""
        return 1.0 / (2.0 * self.m * self.omega), self.m * self.omega / 2.0

    def with_gamma(self, gamma) -> "OscillatorParams":
        return OscillatorParams(m=self.m, omega=self.omega, gamma=gamma, cutoff=self.cutoff)


def _phi(z, t):
    """``(exp(z t) - 1) / z`` with the removable singularity at ``z = 0``."""
    z = np.asarray(z, dtype=complex)
    zt = z * t
    small = np.abs(zt) < 1e-8
    safe_z = np.where(small, 1.0, z)
    out = np.expm1(zt) / safe_z
    return np.where(small, t * (1.0 + zt / 2.0), out)


class KernelSet:
    """Homogeneous solutions and frequency-domain kernels for one parameter set.

    ``d1`` and ``d2`` are the fundamental solutions of the damped equation
    with ``d1(0) = 1, d1'(0) = 0`` and ``d2(0) = 0, d2'(0) = 1``. All
    evaluators accept scalars or arrays.
    """

    def __init__(self, params: OscillatorParams):
        self.params = params
        g, w = params.gamma, params.omega
        split_sq = g * g - w * w
        # r_plus - r_minus = 2 * split, complex for the underdamped branch
        self._split = np.sqrt(complex(split_sq))
        self._critical = abs(self._split) < _CRITICAL_SPLIT * w
        self._overdamped = g > w and not self._critical

    @cached_property
    def roots(self) -> tuple[complex, complex]:
        g = self.params.gamma
        return -g + self._split, -g - self._split

    def _c_s(self, t):
        """``(C, S)`` with ``d2 = e^{-g t} S`` and ``d2' = e^{-g t}(C - g S)``.

        Only used on the underdamped and critical branches; the overdamped
        branch is written in decaying exponentials to avoid overflow.
        """
        t = np.asarray(t, dtype=float)
        if self._critical:
            return np.ones_like(t), t.copy()
        W = self.params.Omega
        return np.cos(W * t), np.sin(W * t) / W

    def _check_t(self, t):
        if np.any(np.asarray(t) < 0):
            raise DomainError("time must be non-negative")

    def d2(self, t):
        self._check_t(t)
        t = np.asarray(t, dtype=float)
        p = self.params
        if self._overdamped:
            W = p.Omega
            return (np.exp((W - p.gamma) * t) - np.exp(-(W + p.gamma) * t)) / (2 * W)
        _, s = self._c_s(t)
        return np.exp(-p.gamma * t) * s

    def d2dot(self, t):
        self._check_t(t)
        t = np.asarray(t, dtype=float)
        p = self.params
        if self._overdamped:
            W, g = p.Omega, p.gamma
            a, b = W - g, -(W + g)
            return (a * np.exp(a * t) - b * np.exp(b * t)) / (2 * W)
        c, s = self._c_s(t)
        return np.exp(-p.gamma * t) * (c - p.gamma * s)

    def d1(self, t):
        # d1 = d2' + 2 gamma d2 for the damped equation
        return self.d2dot(t) + 2.0 * self.params.gamma * self.d2(t)

    def d1dot(self, t):
        return -self.params.omega ** 2 * self.d2(t)

    def susceptibility(self, kappa):
        """Retarded Green's function ``1 / (omega^2 - kappa^2 - 2 i gamma kappa)``."""
        kappa = np.asarray(kappa, dtype=float)
        p = self.params
        den = p.omega**2 - kappa**2 - 2j * p.gamma * kappa
        if p.gamma == 0 and np.any(den == 0):
            raise PoleError("undamped susceptibility is singular at kappa = +-omega")
        return 1.0 / den

    def transform(self, kappa, t):
        """``F(kappa, t) = int_0^t d2(s) exp(i kappa s) ds`` in closed form."""
        self._check_t(t)
        kappa = np.asarray(kappa, dtype=float)
        a = -self.params.gamma + 1j * kappa
        if self._critical:
            # int_0^t s e^{a s} ds; a != 0 because gamma = omega > 0
            return (np.exp(a * t) * (a * t - 1.0) + 1.0) / (a * a)
        s = self._split
        return (_phi(a + s, t) - _phi(a - s, t)) / (2.0 * s)

    def transform_dot(self, kappa, t):
        """``G(kappa, t) = int_0^t d2'(s) exp(i kappa s) ds``."""
        kappa = np.asarray(kappa, dtype=float)
        return self.d2(t) * np.exp(1j * kappa * t) - 1j * kappa * self.transform(kappa, t)

    def transform_parts(self, kappa, t, conjugate: bool = False):
        """Split ``F = F_inf + exp(i kappa t) R`` and ``G = G_inf + exp(i kappa t) R_G``.

        Returns ``(F_inf, R, G_inf, R_G)``; ``kappa`` may be complex. With
        ``conjugate=True`` the functions ``conj(X(conj(kappa)))`` are
        returned instead, which continue ``conj(X)`` off the real axis.
        Not defined on the critical branch.
        """
        kappa = np.asarray(kappa, dtype=complex)
        g, s = self.params.gamma, self._split
        if conjugate:
            kappa = np.conj(kappa)
        a = -g + 1j * kappa
        f_inf = 1.0 / (a * a - s * s)
        r = (np.exp((s - g) * t) / (a + s) - np.exp(-(s + g) * t) / (a - s)) / (2.0 * s)
        g_inf = -1j * kappa * f_inf
        r_g = self.d2(t) - 1j * kappa * r
        parts = (f_inf, r, g_inf, r_g)
        return tuple(np.conj(p) for p in parts) if conjugate else parts

    @property
    def resonance_pole(self) -> complex:
        """Lower half-plane pole ``Omega - i gamma`` of the susceptibility (underdamped)."""
        return complex(self.params.Omega, -self.params.gamma)

    def noise_power(self, kappa):
        return noise_power(self.params, kappa)


def homogeneous_kernels(params: OscillatorParams, t):
    """Return ``(d1(t), d2(t), d2'(t))`` of the damped oscillator.

    Raises
    ------
    DomainError
        If ``t < 0``.
    """
    k = KernelSet(params)
    return k.d1(t), k.d2(t), k.d2dot(t)


def retarded_susceptibility(params: OscillatorParams, kappa):
    """``d2~(kappa) = 1 / (omega^2 - kappa^2 - 2 i gamma kappa)``.

    Raises :class:`PoleError` for ``gamma = 0`` at ``kappa = +-omega``.
    """
    return KernelSet(params).susceptibility(kappa)


def one_sided_transform(params: OscillatorParams, kappa, t):
    """Closed form of ``int_0^t d2(s) exp(i kappa s) ds``."""
    return KernelSet(params).transform(kappa, t)


def noise_power(params: OscillatorParams, kappa):
    """Zero-temperature force-noise power ``(2 m gamma / pi) kappa`` below the cutoff."""
    kappa = np.asarray(kappa, dtype=float)
    if np.any(kappa < 0):
        raise DomainError("noise power is defined for kappa >= 0")
    slope = 2.0 * params.m * params.gamma / math.pi
    return np.where(kappa <= params.cutoff, slope * kappa, 0.0)
