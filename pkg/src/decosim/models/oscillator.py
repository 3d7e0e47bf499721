"""Damped harmonic oscillator and coherent-state superpositions.

H = omega * a^dag a with thermal damping channels (a at rate
gamma*(n_thermal+1), a^dag at rate gamma*n_thermal).  States live in a
truncated Fock space; the truncation must hold at least 8*(max|alpha|^2+1)
levels so that coherent components with |alpha| up to the declared maximum
keep their occupation tail below round-off relevance.

Position here means the dimensionless quadrature xi with <xi> = sqrt(2)
Re(alpha) for a coherent state, so the ground-state density has unit
Gaussian width.  A two-component superposition along the real axis
oscillates; at odd quarter-period multiples both components sit at xi = 0
and the position density shows interference fringes whose visibility decays
with damping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, DomainError, TruncationError
from ..evolution import LindbladModel
from ..hilbert import QuantumState

TRUNCATION_TOL = 1e-6
FOCK_LEVELS_PER_UNIT = 8.0


@dataclass(frozen=True)
class DampedOscillatorParams:
    """Oscillator frequency/damping and the coherent amplitudes the run
    intends to use (they size the Fock truncation and position grid)."""

    omega: float
    gamma: float
    n_thermal: float
    n_fock: int
    alphas: tuple

    def __post_init__(self):
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "n_thermal", float(self.n_thermal))
        object.__setattr__(self, "n_fock", int(self.n_fock))
        object.__setattr__(self, "alphas",
                           tuple(complex(a) for a in self.alphas))
        if not np.isfinite(self.omega):
            raise DomainError("omega must be finite")
        if self.gamma < 0.0 or not np.isfinite(self.gamma):
            raise DomainError(f"gamma must be >= 0, got {self.gamma}")
        if self.n_thermal < 0.0 or not np.isfinite(self.n_thermal):
            raise DomainError(
                f"n_thermal must be >= 0, got {self.n_thermal}")
        if not self.alphas:
            raise DomainError("at least one coherent amplitude is required")
        if not all(np.isfinite(a.real) and np.isfinite(a.imag)
                   for a in self.alphas):
            raise DomainError("coherent amplitudes must be finite")
        needed = int(np.ceil(
            FOCK_LEVELS_PER_UNIT * (self.max_alpha ** 2 + 1.0)))
        if self.n_fock < needed:
            raise ConfigurationError(
                f"n_fock={self.n_fock} is too small for max |alpha| "
                f"{self.max_alpha:.3g}; need at least {needed}")

    @property
    def max_alpha(self) -> float:
        return max(abs(a) for a in self.alphas)


def destroy(n_fock: int) -> np.ndarray:
    """Annihilation operator on an n_fock-level truncation."""
    if n_fock < 2:
        raise DomainError(f"n_fock must be >= 2, got {n_fock}")
    return np.diag(np.sqrt(np.arange(1.0, n_fock)), 1).astype(np.complex128)


def number_operator(n_fock: int) -> np.ndarray:
    return np.diag(np.arange(n_fock, dtype=np.float64)).astype(np.complex128)


def coherent_vector(alpha: complex, n_fock: int) -> np.ndarray:
    """Truncated coherent-state amplitudes, renormalized to unit norm.

    Built by the cumulative recurrence c_n = c_{n-1} * alpha / sqrt(n)
    starting from exp(-|alpha|^2 / 2); no factorials are formed.
    """
    alpha = complex(alpha)
    c = np.empty(n_fock, dtype=np.complex128)
    c[0] = np.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, n_fock):
        c[n] = c[n - 1] * alpha / np.sqrt(n)
    return c / np.linalg.norm(c)


def superposition_state(amplitudes, alphas, n_fock: int) -> QuantumState:
    """Normalized sum of coherent components sum_k amplitudes[k] |alphas[k]>."""
    amplitudes = [complex(a) for a in amplitudes]
    alphas = [complex(a) for a in alphas]
    if len(amplitudes) != len(alphas) or not alphas:
        raise DomainError("amplitudes and alphas must pair up, nonempty")
    psi = np.zeros(n_fock, dtype=np.complex128)
    for c, a in zip(amplitudes, alphas):
        psi += c * coherent_vector(a, n_fock)
    nrm = np.linalg.norm(psi)
    if nrm < 1e-12:
        raise DomainError("the requested superposition has zero norm")
    return QuantumState.pure(psi / nrm)


def oscillator_model(params: DampedOscillatorParams) -> LindbladModel:
    """H = omega n with thermal channels; both channels are always present
    (rates may be zero) so channel indices stay stable."""
    a = destroy(params.n_fock)
    h = params.omega * number_operator(params.n_fock)
    down = params.gamma * (params.n_thermal + 1.0)
    up = params.gamma * params.n_thermal
    return LindbladModel(h, [(a, down), (a.conj().T, up)])


def position_grid(params: DampedOscillatorParams,
                  n_points: int = 512) -> np.ndarray:
    """Quadrature grid wide enough for every declared component: the peaks
    sit within sqrt(2)*max|alpha| and carry unit Gaussian width."""
    if n_points < 16:
        raise DomainError(f"n_points must be >= 16, got {n_points}")
    half = np.sqrt(2.0) * params.max_alpha + 5.0
    return np.linspace(-half, half, n_points)


def hermite_functions(xs: np.ndarray, n_max: int) -> np.ndarray:
    """Orthonormal Hermite functions phi_0..phi_{n_max-1} on xs, shape
    (len(xs), n_max).  Uses the normalized recurrence
    phi_{n+1} = sqrt(2/(n+1)) xi phi_n - sqrt(n/(n+1)) phi_{n-1},
    which stays bounded where the raw Hermite polynomials overflow.
    """
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 1:
        raise DomainError("xs must be a 1-D grid")
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    phi = np.empty((xs.size, n_max), dtype=np.float64)
    phi[:, 0] = np.pi ** -0.25 * np.exp(-0.5 * xs ** 2)
    if n_max > 1:
        phi[:, 1] = np.sqrt(2.0) * xs * phi[:, 0]
    for n in range(1, n_max - 1):
        phi[:, n + 1] = (np.sqrt(2.0 / (n + 1)) * xs * phi[:, n]
                         - np.sqrt(n / (n + 1.0)) * phi[:, n - 1])
    return phi


def position_density(state: QuantumState, xs: np.ndarray) -> np.ndarray:
    """Quadrature probability density <xi|rho|xi> on the grid."""
    rho = state.density_matrix()
    phi = hermite_functions(xs, rho.shape[0])
    return np.einsum("xm,mn,xn->x", phi, rho, phi).real


def fringe_visibility(xs: np.ndarray, density: np.ndarray,
                      half_window: float = 1.0) -> float:
    """Interference contrast (max - min) / (max + min) over |xi| <=
    half_window, where min is taken over interior local minima only.

    A density without oscillatory structure in the window (a single
    packet, however placed) has no interior local minimum and scores 0;
    fringes from overlapping components score near 1 when their nodes
    reach zero and less as decoherence fills them in.
    """
    xs = np.asarray(xs, dtype=np.float64)
    density = np.asarray(density, dtype=np.float64)
    if xs.shape != density.shape or xs.ndim != 1:
        raise DomainError("xs and density must be matching 1-D arrays")
    sel = np.abs(xs) <= half_window
    if sel.sum() < 3:
        raise DomainError("fewer than three grid points in the window")
    v = density[sel]
    interior = (v[1:-1] <= v[:-2]) & (v[1:-1] <= v[2:])
    if not interior.any():
        return 0.0
    hi = float(v.max())
    lo = float(v[1:-1][interior].min())
    if hi + lo <= 0.0:
        raise DomainError("density is not positive inside the window")
    return (hi - lo) / (hi + lo)


def merge_times(params: DampedOscillatorParams, t_end: float) -> np.ndarray:
    """Times up to t_end where counter-rotating real-axis components meet
    at xi = 0: odd multiples of the quarter period pi/(2 omega)."""
    if params.omega == 0.0:
        raise DomainError("merge times need a nonzero frequency")
    quarter = np.pi / (2.0 * abs(params.omega))
    if t_end < quarter:
        return np.empty(0, dtype=np.float64)
    k_max = int(np.floor((t_end / quarter - 1.0) / 2.0 + 1e-9))
    return quarter * (2.0 * np.arange(k_max + 1) + 1.0)


def check_truncation(state: QuantumState,
                     tol: float = TRUNCATION_TOL) -> float:
    """Population of the top Fock level; raises TruncationError above tol."""
    top = float(state.density_matrix()[-1, -1].real)
    if top > tol:
        raise TruncationError(
            f"top Fock level holds population {top:.3g} > {tol:.3g}; "
            "the truncation is too small for this evolution")
    return top


def mean_occupation(state: QuantumState) -> float:
    rho = state.density_matrix()
    return float(np.sum(np.diag(rho).real * np.arange(rho.shape[0])))
