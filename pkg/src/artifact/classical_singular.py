"""Classical transport on phase space with a point interaction at q = 0.

A phase-space function is any callable f(q, p) that broadcasts over numpy
arrays. The free flow is (q, p) -> (q - pt/m, p). The singular group adds,
for trajectories that crossed the origin during the elapsed time, a term
proportional to f_ev(q, p) = f(q, p) + f(-q, -p) with the amplitude
1 / (1 + sgn(t) 2i|p|/(m beta)). beta = inf is complete reflection.

theta(0) = 0 throughout; evaluating exactly on a discontinuity set issues
a BoundaryEvaluationWarning and returns the theta(0) = 0 value.
"""
import warnings
from dataclasses import dataclass

import numpy as np

from .numerics import QuadratureSpec, WaveFunctionGrid, adaptive_integral, heaviside
from .states import ParameterDomainError, free_evolve, packet_grid, phase_space_kernel, evolved_params

__all__ = [
    "BetaCoupling",
    "BoundaryEvaluationWarning",
    "NearSingularMultiplierError",
    "apply_resolvent_beta",
    "classical_scattering",
    "classical_wave_operator",
    "classical_wave_operator_adjoint",
    "classical_wave_operator_reverse",
    "even_part",
    "free_resolvent_kernel",
    "free_transport",
    "quasiclassical_approximant",
    "resolvent_multiplier",
    "singular_transport",
]


class BoundaryEvaluationWarning(UserWarning):
    pass


class NearSingularMultiplierError(ArithmeticError):
    pass


@dataclass(frozen=True)
class BetaCoupling:
    """beta in (R minus {0}) or +inf; mass enters every |p|/(m beta)."""

    beta: float
    mass: float = 1.0

    def __post_init__(self):
        b = float(self.beta)
        if b == 0 or np.isnan(b):
            raise ParameterDomainError("beta must be nonzero (beta = 0 is free transport)")
        if np.isinf(b) and b < 0:
            raise ParameterDomainError("only beta = +inf is accepted as the Dirichlet marker")
        if not self.mass > 0:
            raise ParameterDomainError("mass must be positive")
        object.__setattr__(self, "beta", b)

    @classmethod
    def from_alpha(cls, alpha, hbar, mass=1.0):
        """beta = 2 alpha / hbar; alpha = inf gives the Dirichlet case."""
        if np.isinf(alpha):
            return cls(np.inf, mass)
        return cls(2.0 * alpha / hbar, mass)

    @property
    def dirichlet(self):
        return np.isinf(self.beta)

    def ratio(self, p):
        """2|p| / (m beta), zero for beta = inf."""
        if self.dirichlet:
            return np.zeros_like(np.asarray(p, dtype=float))
        return 2.0 * np.abs(p) / (self.mass * self.beta)


def _flag(mask, what):
    if np.any(mask):
        warnings.warn(f"evaluation on the discontinuity set ({what}); theta(0) = 0 used",
                      BoundaryEvaluationWarning, stacklevel=3)


def even_part(f):
    """f_ev(q, p) = f(q, p) + f(-q, -p)."""
    return lambda q, p: f(q, p) + f(-np.asarray(q), -np.asarray(p))


def free_transport(f, t, mass=1.0):
    """(e^{-itL0} f)(q, p) = f(q - pt/m, p)."""
    def out(q, p):
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        return f(q - p * t / mass, p)
    return out


def singular_transport(f, t, beta):
    """(e^{-itL_beta} f)(q, p); e^{+itL_beta} is this with t -> -t."""
    m = beta.mass
    moved = free_transport(f, t, m)
    moved_ev = free_transport(even_part(f), t, m)

    def out(q, p):
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        tqp = t * q * p
        reach = np.abs(p * t) / m - np.abs(q)
        _flag((tqp == 0) | (reach == 0), "tqp = 0 or |q| = |pt|/m")
        gate = heaviside(tqp) * heaviside(reach)
        amp = gate / (1.0 + np.sign(t) * 2j * np.abs(p) / (m * beta.beta))
        return moved(q, p) - amp * moved_ev(q, p)
    return out


def free_resolvent_kernel(q, p, z, mass=1.0):
    """g_z(q, p) = theta(qp Im z) sgn(Im z) (i m/|p|) exp(i m z q / p)."""
    z = complex(z)
    if z.imag == 0:
        raise ParameterDomainError("Im z must be nonzero")
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    if np.any(p == 0):
        raise ParameterDomainError("g_z is singular at p = 0")
    on = heaviside(q * p * z.imag)
    # exponent only where active; elsewhere it may overflow
    expo = np.where(on > 0, 1j * mass * z * q / p, 0.0)
    out = on * np.sign(z.imag) * (1j * mass / np.abs(p)) * np.exp(expo)
    return complex(out) if np.ndim(out) == 0 else out


def resolvent_multiplier(p, z, beta):
    """m_z(p) = 1/beta - sgn(Im z) i m / (2|p|)."""
    inv = 0.0 if beta.dirichlet else 1.0 / beta.beta
    return inv - np.sign(complex(z).imag) * 1j * beta.mass / (2.0 * abs(p))


def _free_resolvent(f, z, q, p, mass, spec):
    """(R0_z f)(q, p) = int g_z(q - q', p) f(q', p) dq' on its active half-line.

    With u = |q - q'|, the kernel is supported on sgn(q - q') = sgn(p Im z)
    and decays like exp(-m |Im z| u / |p|); the half-line is cut where that
    factor drops below e^-42. Functions in the domain of L_beta may jump
    at q' = 0, so the integral is split there.
    """
    s = np.sign(p * z.imag)
    u_max = 42.0 * abs(p) / (mass * abs(z.imag))

    def integrand(u):
        return free_resolvent_kernel(s * u, p, z, mass) * f(q - s * u, p)

    val, _ = adaptive_integral(integrand, 0.0, u_max, spec, n0=16, breaks=(s * q,))
    return val


def apply_resolvent_beta(f, z, beta, p, q, spec=None):
    """(R^beta_z f)(q, p) = (R0_z f)(q, p) + g_z(q, p) [Pi gamma R0_z f](p) / m_z(p).

    gamma is the trace at q = 0 and Pi averages p and -p.
    """
    z = complex(z)
    if z.imag == 0:
        raise ParameterDomainError("Im z must be nonzero")
    if p == 0:
        raise ParameterDomainError("p must be nonzero")
    spec = spec or QuadratureSpec(relative_tol=1e-9)
    m = beta.mass
    mz = resolvent_multiplier(p, z, beta)
    if abs(mz) < 1e-14:
        raise NearSingularMultiplierError(f"|m_z(p)| = {abs(mz):.3e}")
    base = _free_resolvent(f, z, q, p, m, spec)
    g = free_resolvent_kernel(q, p, z, m)
    if g == 0:
        return base
    trace = 0.5 * (_free_resolvent(f, z, 0.0, p, m, spec) + _free_resolvent(f, z, 0.0, -p, m, spec))
    return base + g * trace / mz


def _wave(f, sign, beta, divisor_sign):
    m = beta.mass
    f_ev = even_part(f)

    def out(q, p):
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        _flag(q * p == 0, "qp = 0")
        gate = heaviside(-sign * q * p)
        amp = gate / (1.0 + divisor_sign * sign * 1j * beta.ratio(p))
        return f(q, p) - amp * f_ev(q, p)
    return out


def classical_wave_operator(f, sign, beta):
    """(W+- f) = f - theta(-+qp) / (1 +- 2i|p|/(m beta)) f_ev."""
    return _wave(f, sign, beta, +1)


def classical_wave_operator_reverse(f, sign, beta):
    """Reverse-order limit of e^{itL_beta} e^{-itL0}: divisor 1 -+ 2i|p|/(m beta)."""
    return _wave(f, sign, beta, -1)


def classical_wave_operator_adjoint(f, sign, beta):
    """(W+-)^* on L^2(R^2); theta(qp) is even under (q, p) -> (-q, -p), so
    conjugating the amplitude is all that changes, giving the reverse operator."""
    return classical_wave_operator_reverse(f, sign, beta)


def classical_scattering(f, beta):
    """(S f)(q, p) = f - f_ev / (1 - 2i|p|/(m beta))."""
    f_ev = even_part(f)

    def out(q, p):
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        if np.any(p == 0):
            raise ParameterDomainError("p must be nonzero")
        return f(q, p) - f_ev(q, p) / (1.0 - 1j * beta.ratio(p))
    return out


def quasiclassical_approximant(params, t, alpha, grid=None):
    """x -> e^{iA_t/hbar} (e^{itL_beta} phi_{sigma_t, x})(q, p), beta = 2 alpha/hbar.

    alpha = inf selects the Dirichlet group. Evaluated literally: for every
    grid point x the phase-space kernel of the freely evolved packet is
    pushed through the singular group and read off at the packet's own
    phase point.
    """
    q, p = params.q, params.p
    if q * p == 0:
        raise ParameterDomainError("qp != 0 is required")
    grid = grid or packet_grid(params, (0.0, t))
    beta = BetaCoupling.from_alpha(alpha, params.hbar, params.mass)
    fe = free_evolve(params, t)
    moved = evolved_params(params, t)
    xs = grid.xs

    # columns indexed by x; the phase-space arguments are scalars
    def kernel(qq, pp):
        return phase_space_kernel(moved, xs, qq, pp)

    transported = singular_transport(kernel, -t, beta)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", BoundaryEvaluationWarning)
        vals = transported(q, p)
    if any(issubclass(w.category, BoundaryEvaluationWarning) for w in caught):
        warnings.warn(f"t = {t} is the collision time; theta(0) = 0 used",
                      BoundaryEvaluationWarning, stacklevel=2)
    vals = np.exp(1j * fe.action_phase / params.hbar) * vals
    return WaveFunctionGrid(xs, np.asarray(vals, dtype=complex), grid.weights)
