"""Gaussian coherent states, their Fourier transforms and free evolution.

The state is

    psi(sigma, sigma_b, q, p; x) = (2 pi hbar)^(-1/4) sigma^(-1/2)
        * exp(-sigma_b (x - q)^2 / (4 hbar sigma) + i p (x - q) / hbar)

with Re sigma > 0, Re sigma_b > 0 and Re(conj(sigma) sigma_b) = 1. The
standard family uses sigma = sigma0, sigma_b = 1/sigma0.
"""
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .numerics import WaveFunctionGrid, simpson_weights

__all__ = [
    "CoherentParams",
    "FreeEvolutionResult",
    "ParameterDomainError",
    "PhysicalConstants",
    "SampleGrid",
    "WaveFunctionGrid",
    "coherent_state",
    "coherent_state_fourier",
    "evolved_params",
    "free_evolve",
    "free_evolved_state",
    "moments",
    "packet_grid",
    "phase_space_kernel",
    "sqrt_pos",
]


class ParameterDomainError(ValueError):
    pass


def sqrt_pos(z):
    """Principal square root, checked to have positive real part."""
    r = np.sqrt(complex(z))
    if not r.real > 0:
        raise ParameterDomainError(f"square root of {z} has Re <= 0")
    return r


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float
    mass: float = 1.0

    def __post_init__(self):
        if not self.hbar > 0:
            raise ParameterDomainError("hbar must be positive")
        if not self.mass > 0:
            raise ParameterDomainError("mass must be positive")


@dataclass(frozen=True)
class CoherentParams:
    constants: PhysicalConstants
    sigma0: float
    sigma: complex
    sigma_breve: complex
    q: float
    p: float

    def __post_init__(self):
        if not self.sigma0 > 0:
            raise ParameterDomainError("sigma0 must be positive")
        s, sb = complex(self.sigma), complex(self.sigma_breve)
        if not s.real > 0:
            raise ParameterDomainError("Re sigma must be positive")
        if not sb.real > 0:
            raise ParameterDomainError("Re sigma_breve must be positive")
        if abs((s.conjugate() * sb).real - 1.0) > 1e-12:
            raise ParameterDomainError("Re(conj(sigma) sigma_breve) must equal 1")
        object.__setattr__(self, "sigma", s)
        object.__setattr__(self, "sigma_breve", sb)
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "p", float(self.p))

    @classmethod
    def standard(cls, hbar, sigma0, q, p, mass=1.0):
        return cls(PhysicalConstants(hbar, mass), sigma0, sigma0, 1.0 / sigma0, q, p)

    @property
    def hbar(self):
        return self.constants.hbar

    @property
    def mass(self):
        return self.constants.mass

    def with_phase_point(self, q, p):
        return replace(self, q=q, p=p)


class FreeEvolutionResult(NamedTuple):
    action_phase: float
    sigma_t: complex
    q_t: float
    p_t: float


def _norm_const(params, sigma):
    return (2.0 * np.pi * params.hbar) ** -0.25 / sqrt_pos(sigma)


def _gauss(params, sigma, q, p, x):
    hbar = params.hbar
    sb = params.sigma_breve
    x = np.asarray(x, dtype=float)
    d = x - q
    return _norm_const(params, sigma) * np.exp(-sb * d * d / (4.0 * hbar * sigma) + 1j * p * d / hbar)


def coherent_state(params, x):
    return _gauss(params, params.sigma, params.q, params.p, x)


def coherent_state_fourier(params, k):
    """Unitary Fourier transform (2 pi)^(-1/2) int exp(-i k x) psi(x) dx."""
    hbar = params.hbar
    s, sb = params.sigma, params.sigma_breve
    k = np.asarray(k, dtype=float)
    d = k - params.p / hbar
    pref = (2.0 * hbar / np.pi) ** 0.25 / sqrt_pos(sb)
    return pref * np.exp(-hbar * s * d * d / sb - 1j * k * params.q)


def free_evolve(params, t):
    m = params.mass
    return FreeEvolutionResult(
        action_phase=params.p ** 2 * t / (2.0 * m),
        sigma_t=params.sigma + 1j * params.sigma_breve * t / (2.0 * m),
        q_t=params.q + params.p * t / m,
        p_t=params.p,
    )


def evolved_params(params, t):
    """Parameters (sigma_t, sigma_b, q_t, p) of the freely evolved packet."""
    fe = free_evolve(params, t)
    return replace(params, sigma=fe.sigma_t, q=fe.q_t)


def free_evolved_state(params, t, x):
    """exp(-i t H0 / hbar) psi evaluated at x (any real points)."""
    fe = free_evolve(params, t)
    phase = np.exp(1j * fe.action_phase / params.hbar)
    return phase * _gauss(params, fe.sigma_t, fe.q_t, fe.p_t, x)


def moments(params):
    """(mean_q, sd_q, mean_p, sd_p) of the packet."""
    rh = np.sqrt(params.hbar)
    return (params.q, rh * abs(params.sigma), params.p, rh * abs(params.sigma_breve) / 2.0)


def phase_space_kernel(params, x, q, p):
    """phi_{sigma,x}(q, p): the packet at fixed x read as a function of (q, p).

    ``params`` supplies hbar, m, sigma and sigma_breve; its own q, p are
    ignored. q and p broadcast.
    """
    hbar = params.hbar
    s, sb = params.sigma, params.sigma_breve
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    d = x - q
    return _norm_const(params, s) * np.exp(-sb * d * d / (4.0 * hbar * s) + 1j * p * d / hbar)


@dataclass(frozen=True, eq=False)
class SampleGrid:
    """Uniform grid on [-L, L] with x = 0 a node and Simpson weights.

    The half-count n is even so x = 0 sits on a Simpson panel boundary.
    """

    xs: np.ndarray
    weights: np.ndarray

    @classmethod
    def symmetric(cls, half_width, dx_max):
        n_half = max(2, int(np.ceil(half_width / dx_max)))
        n_half += n_half % 2
        xs = np.linspace(-half_width, half_width, 2 * n_half + 1)
        xs[n_half] = 0.0
        return cls(xs, simpson_weights(len(xs), xs[1] - xs[0]))

    @classmethod
    def from_nodes(cls, x0_index_half, dx):
        """Grid with nodes j*dx for |j| <= x0_index_half (must be even)."""
        n_half = int(x0_index_half)
        if n_half % 2:
            raise ValueError("half count must be even")
        xs = dx * np.arange(-n_half, n_half + 1, dtype=float)
        return cls(xs, simpson_weights(len(xs), dx))

    @property
    def n_half(self):
        return (len(self.xs) - 1) // 2

    @property
    def dx(self):
        return float(self.xs[1] - self.xs[0])

    @property
    def half(self):
        """Nonnegative nodes 0, dx, ..., L."""
        return self.xs[self.n_half:]

    def abs_index(self):
        """Index into ``half`` of |x_i| for every node."""
        return np.abs(np.arange(len(self.xs)) - self.n_half)

    def wave(self, values):
        return WaveFunctionGrid(self.xs, np.asarray(values, dtype=complex), self.weights)

    def sample(self, fn):
        return self.wave(fn(self.xs))


def packet_grid(params, times=(0.0,), n_sd=14.0, extra_dx=None):
    """Symmetric grid covering the packet and its mirror image at all times.

    The half-width is max_t |q_t| + n_sd sqrt(hbar)|sigma_t|. Spacing
    resolves both the envelope (width/10) and the carrier (wavelength/12).
    """
    hbar = params.hbar
    half = 0.0
    width_min = np.inf
    for t in times:
        fe = free_evolve(params, t)
        w = np.sqrt(hbar) * abs(fe.sigma_t)
        half = max(half, abs(fe.q_t) + n_sd * w)
        width_min = min(width_min, w)
    dx = width_min / 10.0
    if params.p != 0:
        dx = min(dx, 2.0 * np.pi * hbar / abs(params.p) / 12.0)
    if extra_dx is not None:
        dx = min(dx, extra_dx)
    return SampleGrid.symmetric(half, dx)
