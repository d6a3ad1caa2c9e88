"""Brute-force references: a discretised bath and 2D overlap quadrature.

The field is replaced by ``N`` oscillators with unit mass on a midpoint
frequency grid. The Hamiltonian

    H = P^2/2m + m omega^2 Q^2/2 + sum_j [p_j^2 + kappa_j^2 (x_j - c_j Q / kappa_j^2)^2] / 2

is quadratic, so second moments propagate exactly through the normal-mode
decomposition. Each bath mode starts in its vacuum relative to the shifted
coordinate ``x_j - c_j Q / kappa_j^2``, which makes the noise independent of
the atom's initial state as in the reduced Langevin description.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .covariance import Covariance, InitialState
from .errors import DomainError, QuadratureError, UsageError
from .kernels import OscillatorParams

__all__ = [
    "BathDiscretization",
    "FullCovariance",
    "RecurrenceWarning",
    "build_bath",
    "evolve_full",
    "evolve_atom",
    "KernelSpec",
    "overlap_quadrature",
]

MIN_MODES = 16


class RecurrenceWarning(UserWarning):
    """Emitted for times past the bath's recurrence horizon."""


@dataclass(frozen=True)
class BathDiscretization:
    params: OscillatorParams
    n_modes: int
    kappa: np.ndarray
    coupling: np.ndarray

    @property
    def spacing(self) -> float:
        return self.params.cutoff / self.n_modes

    @property
    def recurrence_time(self) -> float:
        return 2.0 * math.pi / self.spacing

    @property
    def gamma_eff(self) -> float:
        """Damping from the kernel area up to half the recurrence time."""
        s = 0.5 * self.recurrence_time
        kernel_area = np.sum(self.coupling**2 / self.kappa**3 * np.sin(self.kappa * s))
        return float(kernel_area / (2.0 * self.params.m))

    @cached_property
    def _modes(self):
        p = self.params
        m = p.m
        n = self.n_modes + 1
        K = np.zeros((n, n))
        K[0, 0] = m * p.omega**2 + np.sum(self.coupling**2 / self.kappa**2)
        K[0, 1:] = K[1:, 0] = -self.coupling
        K[np.arange(1, n), np.arange(1, n)] = self.kappa**2
        inv_sqrt_mass = np.ones(n)
        inv_sqrt_mass[0] = 1.0 / math.sqrt(m)
        Kt = K * inv_sqrt_mass[:, None] * inv_sqrt_mass[None, :]
        w2, U = np.linalg.eigh(Kt)
        if np.any(w2 <= 0):
            raise np.linalg.LinAlgError("coupled normal modes are not all stable")
        return K, np.sqrt(w2), U, inv_sqrt_mass

    def initial_covariance(self, level: int) -> tuple[np.ndarray, np.ndarray]:
        """Position and momentum second-moment matrices at ``t = 0``."""
        p = self.params
        atom = InitialState(level).moments(p)
        shift = self.coupling / self.kappa**2
        n = self.n_modes + 1
        Vx = np.zeros((n, n))
        Vx[0, 0] = atom.qq
        Vx[0, 1:] = Vx[1:, 0] = shift * atom.qq
        Vx[1:, 1:] = np.outer(shift, shift) * atom.qq + np.diag(0.5 / self.kappa)
        Vp = np.diag(np.concatenate([[atom.pp], 0.5 * self.kappa]))
        return Vx, Vp


def build_bath(params: OscillatorParams, n_modes: int) -> BathDiscretization:
    """Midpoint discretisation reproducing the force-noise power ``(2 m gamma/pi) kappa``.

    Raises
    ------
    UsageError
        If fewer than 16 modes are requested.
    """
    if n_modes < MIN_MODES:
        raise UsageError(f"need at least {MIN_MODES} bath modes, got {n_modes}")
    dk = params.cutoff / n_modes
    kappa = (np.arange(1, n_modes + 1) - 0.5) * dk
    coupling = np.sqrt(4.0 * params.m * params.gamma / math.pi * dk) * kappa
    return BathDiscretization(params, int(n_modes), kappa, coupling)


@dataclass(frozen=True)
class FullCovariance:
    """Symmetrised second moments of ``(Q, x_1..x_N, P, p_1..p_N)``."""

    matrix: np.ndarray
    t: float
    reliable: bool = True

    @property
    def n(self) -> int:
        return self.matrix.shape[0] // 2

    @property
    def symplectic_form(self) -> np.ndarray:
        n = self.n
        J = np.zeros((2 * n, 2 * n))
        J[:n, n:] = np.eye(n)
        J[n:, :n] = -np.eye(n)
        return J

    def atom(self, level: int = 0) -> Covariance:
        n = self.n
        V = self.matrix
        return Covariance(float(V[0, 0]), float(V[n, n]), float(V[0, n]), self.t, level)

    def energy(self, bath: "BathDiscretization") -> float:
        """Mean energy of the closed system, ``Tr(K Vx)/2 + Tr(M^-1 Vp)/2``."""
        n = self.n
        K, _, _, ism = bath._modes
        V = self.matrix
        return float(0.5 * np.sum(K * V[:n, :n]) + 0.5 * np.sum(ism**2 * np.diag(V[n:, n:])))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])

    def uncertainty_eigenvalue(self) -> float:
        """Smallest eigenvalue of ``V + i J / 2`` (non-negative for a quantum state)."""
        H = self.matrix + 0.5j * self.symplectic_form
        return float(np.linalg.eigvalsh(H)[0])


def _check_time(bath: BathDiscretization, t: float) -> bool:
    if t < 0:
        raise DomainError("time must be non-negative")
    if t > bath.recurrence_time:
        warnings.warn(
            f"t={t} exceeds the bath recurrence time {bath.recurrence_time:.6g}; "
            "the discrete bath no longer represents the continuum",
            RecurrenceWarning,
            stacklevel=3,
        )
        return False
    return True


def _propagator(bath: BathDiscretization, t: float) -> np.ndarray:
    """Phase-space map ``(x, p)(0) -> (x, p)(t)`` in physical coordinates."""
    _, w, U, ism = bath._modes
    c, s = np.cos(w * t), np.sin(w * t)
    A = (U * c) @ U.T
    B = (U * (s / w)) @ U.T
    C = (U * (-w * s)) @ U.T
    # undo mass weighting: x = M^{-1/2} y, p = M^{1/2} pi
    sm = 1.0 / ism
    Axx = ism[:, None] * A * sm[None, :]
    Axp = ism[:, None] * B * ism[None, :]
    Apx = sm[:, None] * C * sm[None, :]
    App = sm[:, None] * A * ism[None, :]
    return np.block([[Axx, Axp], [Apx, App]])


def evolve_full(bath: BathDiscretization, level: int, t: float) -> FullCovariance:
    """Full-system covariance at ``t`` by exact normal-mode propagation.

    Times past the recurrence horizon are returned with ``reliable=False``
    and a :class:`RecurrenceWarning`.
    """
    reliable = _check_time(bath, t)
    Vx, Vp = bath.initial_covariance(level)
    n = Vx.shape[0]
    V0 = np.zeros((2 * n, 2 * n))
    V0[:n, :n] = Vx
    V0[n:, n:] = Vp
    S = _propagator(bath, t)
    V = S @ V0 @ S.T
    return FullCovariance(0.5 * (V + V.T), float(t), reliable)


def evolve_atom(bath: BathDiscretization, level: int, t: float) -> Covariance:
    """Atom block only, at ``O(N^2)`` cost per time.

    Raises the same warning as :func:`evolve_full` past the recurrence time;
    the returned covariance then carries the flag ``"unreliable"``.
    """
    reliable = _check_time(bath, t)
    _, w, U, ism = bath._modes
    Vx, Vp = bath.initial_covariance(level)
    sm = 1.0 / ism
    u0 = U[0]
    c, s = np.cos(w * t), np.sin(w * t)
    # rows of the mass-weighted propagator for the atom coordinate
    ry = ((u0 * c) @ U.T) * sm
    rpi = ((u0 * s / w) @ U.T) * ism
    dry = ((u0 * -w * s) @ U.T) * sm
    drpi = ((u0 * c) @ U.T) * ism
    m = bath.params.m
    qq = (ry @ Vx @ ry + rpi @ Vp @ rpi) / m
    pp = m * (dry @ Vx @ dry + drpi @ Vp @ drpi)
    qp = ry @ Vx @ dry + rpi @ Vp @ drpi
    flags = () if reliable else ("unreliable",)
    return Covariance(float(qq), float(pp), float(qp), float(t), level, flags)


@dataclass(frozen=True)
class KernelSpec:
    """A density-matrix kernel ``f(Sigma, Delta)`` with its coordinate widths."""

    kernel: object
    sigma_width: float
    delta_width: float


def overlap_quadrature(a: KernelSpec, b: KernelSpec, *, rtol: float = 1e-8,
                       atol: float = 1e-12, n_start: int = 32, n_max: int = 1024) -> float:
    """``Tr(A B) = int dSigma dDelta A(Sigma, -Delta) B(Sigma, Delta)``.

    Tensor Gauss-Legendre on a box of eight widths, with the node count
    doubled until two successive values agree.

    Raises
    ------
    QuadratureError
        If ``n_max`` nodes per axis do not reach the tolerance.
    """
    hs = 8.0 * max(a.sigma_width, b.sigma_width)
    hd = 8.0 * max(a.delta_width, b.delta_width)
    prev = None
    n = n_start
    while n <= n_max:
        x, w = np.polynomial.legendre.leggauss(n)
        S = hs * x[:, None]
        D = hd * x[None, :]
        vals = a.kernel(S, -D) * b.kernel(S, D)
        value = float(np.real(np.einsum("i,ij,j->", w, vals, w)) * hs * hd)
        if prev is not None and abs(value - prev) <= max(atol, rtol * abs(value)):
            return value
        prev = value
        n *= 2
    raise QuadratureError("overlap quadrature did not converge",
                          estimate=prev if prev is not None else float("nan"),
                          n_panels=n_max)
