"""Harmonic atom coupled to a vacuum field: exact Gaussian dynamics and transition probabilities."""
from .covariance import (
    Covariance,
    InitialState,
    Moments,
    evolve_covariance,
    evolve_series,
    induced_moments,
    intrinsic_induced_split,
    intrinsic_moments,
    stationary_covariance,
    uncertainty_onset_time,
)
from .errors import (
    DomainError,
    HarmonicAtomError,
    PoleError,
    QuadratureError,
    UnphysicalCovarianceError,
    UsageError,
)
from .gaussian_states import (
    coeffs_from_covariance,
    excited_branch_coeffs,
    excited_populations,
    fock_populations,
)
from .kernels import (
    Branch,
    KernelSet,
    OscillatorParams,
    homogeneous_kernels,
    noise_power,
    one_sided_transform,
    retarded_susceptibility,
)
from .oracle import build_bath, evolve_atom, evolve_full, overlap_quadrature
from .perturbative import (
    TdptConfig,
    compare_methods,
    einstein_relaxation,
    p2_transition,
    response_function,
)
from .transitions import (
    growth_analysis,
    growth_grid,
    p00,
    p01,
    p10,
    p11_stationary,
    p12_stationary,
    transition_overlap,
    transition_report,
)

__version__ = "0.1.0"
