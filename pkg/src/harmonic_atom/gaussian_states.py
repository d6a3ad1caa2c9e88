"""Coordinate kernels of the evolved atom states and their Fock populations.

A density matrix is written in centre-of-mass and relative coordinates
``Sigma = (x + x')/2`` and ``Delta = x - x'``. The ground branch is

    rho(Sigma, Delta) = N exp(-a Delta^2 - 2 i b Delta Sigma - c Sigma^2),

and the branch grown from the first excited level multiplies the same
exponential by a quadratic polynomial.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_hermite

from .covariance import Covariance, Moments
from .errors import DomainError, UnphysicalCovarianceError, UsageError
from .kernels import OscillatorParams

__all__ = [
    "GaussianStateCoeffs",
    "ExcitedBranchCoeffs",
    "FockShape",
    "coeffs_from_covariance",
    "moments_from_coeffs",
    "fock_populations",
    "excited_populations",
    "excited_branch_coeffs",
    "free_state_kernel",
]

DEFAULT_N_MAX = 32
# relative slack on x y - z^2 >= 1; the local-damping model dips below the
# bound by O(gamma / cutoff^2) during the first few 1/cutoff^2 of evolution
UNCERTAINTY_SLACK = 1e-3


@dataclass(frozen=True)
class GaussianStateCoeffs:
    norm: float
    a: float
    b: float
    c: float
    source: Covariance | None = None

    def kernel(self, sigma, delta):
        sigma = np.asarray(sigma, dtype=float)
        delta = np.asarray(delta, dtype=float)
        return self.norm * np.exp(-self.a * delta**2 - 2j * self.b * delta * sigma
                                  - self.c * sigma**2)


def coeffs_from_covariance(cov: Covariance) -> GaussianStateCoeffs:
    """Exact map from the second moments to ``(N, a, b, c)``."""
    if not cov.qq > 0:
        raise DomainError(f"qq must be positive, got {cov.qq}")
    qq, pp, qp = cov.qq, cov.pp, cov.qp
    a = pp / 2.0 - qp * qp / (2.0 * qq)
    c = 1.0 / (2.0 * qq)
    if not a > 0:
        raise UnphysicalCovarianceError("state is not normalisable (a <= 0)")
    return GaussianStateCoeffs(
        norm=1.0 / math.sqrt(2.0 * math.pi * qq),
        a=a,
        b=-qp / (2.0 * qq),
        c=c,
        source=cov,
    )


def moments_from_coeffs(co: GaussianStateCoeffs) -> Moments:
    """Inverse of :func:`coeffs_from_covariance` (assumes unit trace)."""
    qq = 1.0 / (2.0 * co.c)
    return Moments(qq, 2.0 * co.a + 4.0 * co.b**2 * qq, -2.0 * co.b * qq)


@dataclass(frozen=True)
class FockShape:
    """Invariants ``x, y, z`` of a covariance relative to the free ground state."""

    x: complex
    y: complex
    z: complex

    @classmethod
    def from_moments(cls, params: OscillatorParams, mom: Moments) -> "FockShape":
        mw = params.m * params.omega
        return cls(2.0 * mw * mom.qq, 2.0 * mom.pp / mw, 2.0 * mom.qp)

    @property
    def denominator(self):
        return (1 + self.x) * (1 + self.y) - self.z**2

    @property
    def a_L(self):
        return (self.x - self.y + 2j * self.z) / self.denominator

    @property
    def b_L(self):
        return (self.x * self.y - 1 - self.z**2) / self.denominator

    @property
    def discriminant(self):
        """``b_L^2 - |a_L|^2`` written without conjugation (analytic in x, y, z).

        Negative for states squeezed below the free ground width.
        """
        D = self.denominator
        return self.b_L**2 - ((self.x - self.y) ** 2 + 4 * self.z**2) / D**2


def _legendre_populations(shape: FockShape, n_max: int) -> np.ndarray:
    # T_n = disc^{n/2} P_n(b / sqrt(disc)), generated without forming either factor
    b, disc = shape.b_L, shape.discriminant
    out = np.empty(n_max + 1, dtype=np.result_type(b, disc, complex))
    out[0] = 1.0
    if n_max >= 1:
        out[1] = b
    for n in range(1, n_max):
        out[n + 1] = ((2 * n + 1) * b * out[n] - n * disc * out[n - 1]) / (n + 1)
    return np.sqrt(4.0 / shape.denominator) * out


def _check_shape(shape: FockShape) -> None:
    # x y - z^2 >= 1 is the uncertainty bound in these units; the Legendre
    # argument itself may be imaginary (x < 1 < y) without harm, since the
    # recurrence only involves the discriminant
    x, y, z = (float(np.real(v)) for v in (shape.x, shape.y, shape.z))
    if x <= 0 or y <= 0 or x * y - z * z < 1.0 - UNCERTAINTY_SLACK:
        raise UnphysicalCovarianceError(
            f"covariance violates the uncertainty bound (x={x}, y={y}, z={z})"
        )


def fock_populations(cov: Covariance, n_max: int = DEFAULT_N_MAX, *,
                     params: OscillatorParams | None = None) -> tuple[np.ndarray, float]:
    """Populations ``p_0..p_{n_max}`` of a Gaussian state in the free Fock basis.

    ``params`` fixes the free oscillator (``m, omega``) that defines the
    basis; it defaults to unit mass and frequency.

    Returns
    -------
    populations : ndarray
    tail : float
        ``1 - sum(populations)``, the mass above ``n_max``.
    """
    if n_max < 0:
        raise DomainError("n_max must be non-negative")
    params = params or OscillatorParams()
    shape = FockShape.from_moments(params, cov.moments)
    _check_shape(shape)
    p = _legendre_populations(shape, n_max).real
    return p, float(1.0 - p.sum())


def excited_populations(cov0: Covariance, cov1: Covariance, n_max: int = DEFAULT_N_MAX, *,
                        params: OscillatorParams | None = None) -> np.ndarray:
    """Populations of the state grown from the first excited level.

    A thermal input with occupation ``nbar`` evolves into a Gaussian whose
    moments are ``V0 + nbar (V1 - V0)``; its populations, expanded to first
    order in the Boltzmann ratio, give the level-one contribution as a
    directional derivative. The derivative is taken by complex step.
    """
    _check_same_time(cov0, cov1)
    params = params or OscillatorParams()
    h = 1e-30
    v0, dv = cov0.moments, cov1.moments - cov0.moments
    shape0 = FockShape.from_moments(params, v0)
    _check_shape(shape0)
    stepped = FockShape(*(complex(u, h * du) for u, du in zip(
        (shape0.x, shape0.y, shape0.z),
        (2 * params.m * params.omega * dv.qq, 2 * dv.pp / (params.m * params.omega), 2 * dv.qp),
    )))
    p = _legendre_populations(stepped, n_max)
    out = p.real + p.imag / h
    # the step leaves O(h^2) residue on entries that vanish exactly
    return np.where(np.abs(out) < 1e3 * h * h, 0.0, out)


def _check_same_time(cov0: Covariance, cov1: Covariance) -> None:
    if cov0.t != cov1.t:
        raise UsageError(f"covariances are stamped at different times ({cov0.t} vs {cov1.t})")
    if cov0.init_level == cov1.init_level == 1:
        raise UsageError("the first covariance must come from the ground level")


@dataclass(frozen=True)
class ExcitedBranchCoeffs:
    """Polynomial prefactor of the excited-branch kernel.

    The kernel is ``pref * (A D^2 + 2 B D S + C S^2 + Dc) * exp(...)`` with
    the exponential taken from the ground branch at the same time.
    """

    A: float
    B: complex
    C: float
    D: float
    ground: GaussianStateCoeffs

    @property
    def prefactor(self) -> float:
        qq0 = self.ground.source.qq
        return 1.0 / (2.0 * math.sqrt(2.0 * math.pi) * qq0**1.5)

    def kernel(self, sigma, delta):
        sigma = np.asarray(sigma, dtype=float)
        delta = np.asarray(delta, dtype=float)
        poly = (self.A * delta**2 + 2 * self.B * delta * sigma
                + self.C * sigma**2 + self.D)
        return self.prefactor * poly * self.ground.kernel(sigma, delta) / self.ground.norm


def excited_branch_coeffs(cov0: Covariance, cov1: Covariance) -> ExcitedBranchCoeffs:
    """Coefficients of the excited-branch kernel from both branch covariances.

    Raises
    ------
    UsageError
        If the covariances carry different time stamps.
    """
    _check_same_time(cov0, cov1)
    q0, p0, x0 = cov0.qq, cov0.pp, 2.0 * cov0.qp
    q1, p1, x1 = cov1.qq, cov1.pp, 2.0 * cov1.qp
    A = -q0 * (p1 - p0) - q1 / (4.0 * q0) * x0**2 - x0 / 4.0 * (x0 - 2.0 * x1)
    B = 0.5j * x1 - 1j * q1 / (2.0 * q0) * x0
    C = q1 / q0 - 1.0
    D = 3.0 * q0 - q1
    return ExcitedBranchCoeffs(A, B, C, D, coeffs_from_covariance(cov0))


def free_state_kernel(params: OscillatorParams, n: int):
    """Kernel ``psi_n(x) psi_n(x')`` of the free Fock state ``n`` in ``(Sigma, Delta)``."""
    if n < 0:
        raise DomainError("level must be non-negative")
    mw = params.m * params.omega
    norm = (mw / math.pi) ** 0.25 / math.sqrt(2.0**n * math.factorial(n))

    def psi(x):
        xi = math.sqrt(mw) * x
        return norm * eval_hermite(n, xi) * np.exp(-xi * xi / 2.0)

    def kernel(sigma, delta):
        sigma = np.asarray(sigma, dtype=float)
        delta = np.asarray(delta, dtype=float)
        return psi(sigma + delta / 2.0) * psi(sigma - delta / 2.0)

    return kernel
