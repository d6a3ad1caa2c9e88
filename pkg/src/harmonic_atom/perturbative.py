"""Second-order perturbation theory and rate-equation relaxation.

The free atom couples to the same vacuum force noise as in the exact
treatment, so both approaches share ``gamma``. In these units the
zero-temperature noise correlator is

    W(tau) = <xi(tau) xi(0)> = int_0^cutoff nu(kappa) exp(-i kappa tau) dkappa,

and its Fourier transform defines the response function ``R(z)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import sici

from .errors import DomainError
from .kernels import OscillatorParams
from .quadrature import gk15, panel_edges
from .transitions import p10_series

__all__ = [
    "TdptConfig",
    "wightman",
    "response_function",
    "matrix_element_sq",
    "p2_transition",
    "p2_quadrature",
    "einstein_relaxation",
    "second_order_terms",
    "MethodComparison",
    "compare_methods",
]


@dataclass(frozen=True)
class TdptConfig:
    params: OscillatorParams
    initial: int = 1
    final: int = 0

    def __post_init__(self):
        if self.initial < 0 or self.final < 0:
            raise DomainError("Fock levels must be non-negative")


def wightman(params: OscillatorParams, tau):
    """Vacuum force correlator ``<xi(tau) xi(0)>`` in closed form."""
    tau = np.asarray(tau, dtype=float)
    L = params.cutoff
    pref = 2.0 * params.m * params.gamma / math.pi
    x = L * tau
    small = np.abs(x) < 1e-3
    safe = np.where(small, 1.0, tau)
    closed = (np.exp(-1j * L * safe) * (1j * L / safe + 1.0 / safe**2) - 1.0 / safe**2)
    series = L**2 * (0.5 - 1j * x / 3.0 - x**2 / 8.0 + 1j * x**3 / 30.0 + x**4 / 144.0)
    return pref * np.where(small, series, closed)


def response_function(params: OscillatorParams, z):
    """``R(z) = int W(tau) exp(-i z tau) dtau``: ``4 m gamma |z|`` for ``-cutoff <= z < 0``."""
    z = np.asarray(z, dtype=float)
    inside = (z < 0) & (z >= -params.cutoff)
    return np.where(inside, 4.0 * params.m * params.gamma * np.abs(z), 0.0)


def matrix_element_sq(params: OscillatorParams, m: int, n: int) -> float:
    """``|<n|Q|m>|^2`` of the free oscillator."""
    if abs(m - n) != 1:
        return 0.0
    return max(m, n) / (2.0 * params.m * params.omega)


def _sinc_kernel(kappa, z, t):
    u = kappa + z
    half = 0.5 * u * t
    small = np.abs(half) < 1e-6
    safe = np.where(small, 1.0, u)
    return np.where(small, t * t, 4.0 * np.sin(half) ** 2 / safe**2)


def p2_quadrature(config: TdptConfig, t: float) -> float:
    """Second-order probability by direct frequency quadrature."""
    p = config.params
    if config.initial == config.final:
        return 0.0
    q2 = matrix_element_sq(p, config.initial, config.final)
    if q2 == 0.0 or t == 0:
        return 0.0
    z = (config.final - config.initial) * p.omega
    pref = 2.0 * p.m * p.gamma / math.pi

    def f(kappa):
        return pref * kappa * _sinc_kernel(kappa, z, t)

    edges = panel_edges(0.0, p.cutoff, [-z], max_width=math.pi / t)
    value, _ = gk15(f, edges, rtol=1e-12)
    return float(q2 * value)


def _decay_closed(p: OscillatorParams, z: float, t: float) -> float:
    # int_0^L kappa 4 sin^2((kappa - w)t/2)/(kappa - w)^2 with w = -z > 0
    w, L = -z, p.cutoff

    def f2(A):
        si, _ = sici(A * t)
        return t * (si - (1.0 - math.cos(A * t)) / (A * t))

    _, ci_hi = sici((L - w) * t)
    _, ci_lo = sici(w * t)
    first = math.log((L - w) / w) - ci_hi + ci_lo
    return 2.0 * first + 2.0 * w * (f2(w) + f2(L - w))


def p2_transition(config: TdptConfig, t: float) -> float:
    """Second-order transition probability ``m -> n`` after time ``t``.

    Downward transitions use the sine/cosine-integral closed form; others
    fall back to quadrature. The value is not normalised and grows without
    bound for decays.
    """
    if t < 0:
        raise DomainError("time must be non-negative")
    p = config.params
    if config.initial == config.final or t == 0:
        return 0.0
    q2 = matrix_element_sq(p, config.initial, config.final)
    if q2 == 0.0:
        return 0.0
    z = (config.final - config.initial) * p.omega
    if z < 0 and -z < p.cutoff:
        pref = 2.0 * p.m * p.gamma / math.pi
        return float(q2 * pref * _decay_closed(p, z, t))
    return p2_quadrature(config, t)


def einstein_relaxation(gamma: float, t):
    """Ground-state fraction ``1 - exp(-2 gamma t)`` of an initially excited ensemble."""
    if gamma < 0:
        raise DomainError("gamma must be non-negative")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("time must be non-negative")
    return -np.expm1(-2.0 * gamma * t)


def _fock_ops(p: OscillatorParams, n_fock: int):
    a = np.diag(np.sqrt(np.arange(1, n_fock)), 1)
    Q = (a + a.T) / math.sqrt(2.0 * p.m * p.omega)
    E = p.omega * (np.arange(n_fock) + 0.5)
    return Q, E


def _panel_nodes(t: float, width: float, order: int = 20):
    n = max(1, int(math.ceil(t / width)))
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, t, n + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def second_order_terms(config: TdptConfig, t: float, n_fock: int | None = None) -> dict[str, complex]:
    """Order-``lambda^2`` pieces of the reduced density matrix, projected on the final level.

    The reduced state of the atom is expanded to second order in the
    coupling in the interaction picture, with the field correlator in
    place of the bath. Returned keys:

    ``"-+"``: the term with one insertion on each side of the density
    matrix, ``int_0^t int_0^t W(s - s') Q(s') rho0 Q(s)``;
    ``"++"`` and ``"--"``: the time-ordered and anti-time-ordered terms
    with both insertions on one side.

    For a final level different from the initial one only ``"-+"``
    survives and equals :func:`p2_transition`.
    """
    p = config.params
    n_fock = n_fock or max(config.initial, config.final) + 3
    Q, E = _fock_ops(p, n_fock)
    rho0 = np.zeros((n_fock, n_fock))
    rho0[config.initial, config.initial] = 1.0
    k = config.final
    s, ws = _panel_nodes(t, min(0.25, 2.0 / p.cutoff))

    def q_int(times):
        ph = np.exp(1j * np.subtract.outer(E, E)[None, :, :] * times[:, None, None])
        return Q[None, :, :] * ph

    Qs = q_int(s)
    W = wightman(p, np.subtract.outer(s, s))   # W[i, j] = W(s_i - s_j)
    # <k| Q(s_j) rho0 Q(s_i) |k> paired with W(s_i - s_j)
    left = Qs[:, k, :] @ rho0
    right = Qs[:, :, k]
    sandwich = right @ left.T          # [i, j]
    minus_plus = np.einsum("i,j,ij,ij->", ws, ws, W, sandwich)

    # time-ordered pieces over the triangle s_j < s_i
    plus_plus = 0.0 + 0.0j
    if not np.any(rho0[:, k]):
        # the final level is orthogonal to the initial one: both one-sided
        # terms vanish identically and the atom just evolves freely
        return {"-+": complex(minus_plus), "++": 0j, "--": 0j}
    width = min(0.25, 2.0 / p.cutoff)
    for si, wi in zip(s, ws):
        sp, wp = _panel_nodes(si, width)
        Wt = wightman(p, si - sp)
        Qsi = q_int(np.array([si]))[0]
        # <k| Q(s_i) Q(s_j) rho0 |k>
        vals = np.einsum("a,pab,b->p", Qsi[k, :], q_int(sp), rho0[:, k])
        plus_plus += wi * np.sum(wp * Wt * vals)
    minus_minus = np.conj(plus_plus)
    return {"-+": complex(minus_plus), "++": complex(-plus_plus), "--": complex(-minus_minus)}


@dataclass(frozen=True)
class MethodComparison:
    times: np.ndarray
    exact: np.ndarray
    tdpt: np.ndarray
    einstein: np.ndarray
    saturation_gap: float
    jolt_gap: float

    @property
    def difference(self) -> np.ndarray:
        return self.exact - self.einstein


def compare_methods(params: OscillatorParams, t_grid) -> MethodComparison:
    """Exact ``P_{1->0}(t)`` beside second-order and rate-equation curves.

    ``saturation_gap`` is ``|exact - einstein|`` at the last time;
    ``jolt_gap`` is the largest ``|exact - einstein|`` for ``t < 1/cutoff``.
    """
    t = np.asarray(t_grid, dtype=float)
    exact = p10_series(params, t)
    cfg = TdptConfig(params, 1, 0)
    tdpt = np.array([p2_transition(cfg, ti) for ti in t])
    ein = einstein_relaxation(params.gamma, t)
    gap = np.abs(exact - ein)
    early = t < 1.0 / params.cutoff
    return MethodComparison(
        times=t,
        exact=exact,
        tdpt=tdpt,
        einstein=ein,
        saturation_gap=float(gap[-1]),
        jolt_gap=float(gap[early].max()) if early.any() else 0.0,
    )
