"""Shared numerical kernels.

Scaled complementary error function, Gauss-Legendre panel quadrature,
uniform Simpson grids, discrete L2 norms and the Heaviside convention used
throughout the package (theta(0) = 0).
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import erfcx

from ._backend import BACKEND, phase_sum, sample_transform

__all__ = [
    "BACKEND",
    "GridMismatchError",
    "QuadratureError",
    "QuadratureSpec",
    "WaveFunctionGrid",
    "adaptive_grid_norm",
    "adaptive_integral",
    "fourier_analysis",
    "fourier_synthesis",
    "gl_rule",
    "half_line_gaussian",
    "heaviside",
    "l2_distance",
    "l2_norm",
    "panel_edges",
    "panel_rule",
    "scaled_erfc_complex",
    "sgn",
    "simpson_weights",
]


class QuadratureError(RuntimeError):
    """Raised when a quadrature does not reach its tolerance.

    ``estimate`` holds the best value obtained and ``achieved`` the last
    error estimate.
    """

    def __init__(self, message, estimate=None, achieved=None):
        super().__init__(message)
        self.estimate = estimate
        self.achieved = achieved


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    relative_tol: float = 1e-8
    absolute_floor: float = 1e-14
    max_refinements: int = 20
    panel_order: int = 32

    def __post_init__(self):
        if self.relative_tol <= 0 or self.absolute_floor <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_refinements < 1:
            raise ValueError("max_refinements must be >= 1")
        if self.panel_order < 2:
            raise ValueError("panel_order must be >= 2")


def heaviside(x):
    """theta(x) = 1 for x > 0 and 0 otherwise (including x = 0)."""
    out = np.where(np.asarray(x) > 0, 1.0, 0.0)
    return float(out) if out.ndim == 0 else out


def sgn(x):
    out = np.sign(np.asarray(x, dtype=float))
    return float(out) if out.ndim == 0 else out


def scaled_erfc_complex(z):
    """exp(z**2) * erfc(z) for complex z."""
    out = erfcx(np.asarray(z, dtype=complex))
    return complex(out) if out.ndim == 0 else out


def half_line_gaussian(a, b, c=0.0):
    """Integral over (0, inf) of exp(-a y**2 + b y + c).

    Requires Re a >= 0 (Re a == 0 only with Re b < 0). Evaluated through
    the scaled erfc with the reflection erfc(z) = 2 - erfc(-z) when
    Re z < 0, so neither branch overflows for large |b|.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    c = np.asarray(c, dtype=complex)
    if np.any(a.real < 0) or np.any((a.real == 0) & (a.imag == 0)):
        raise ValueError("half_line_gaussian needs Re a >= 0 and a != 0")
    if np.any((a.real == 0) & (b.real >= 0)):
        raise ValueError("Re a == 0 requires Re b < 0 for convergence")
    a, b, c = np.broadcast_arrays(a, b, c)
    ra = np.sqrt(a)
    z = -b / (2.0 * ra)
    pref = 0.5 * np.sqrt(np.pi) / ra
    out = np.empty(z.shape, dtype=complex)
    pos = z.real >= 0
    out[pos] = np.exp(c[pos]) * erfcx(z[pos])
    neg = ~pos
    zn = z[neg]
    out[neg] = 2.0 * np.exp(c[neg] + zn * zn) - np.exp(c[neg]) * erfcx(-zn)
    out = pref * out
    return complex(out) if out.ndim == 0 else out


@lru_cache(maxsize=16)
def gl_rule(order):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_edges(lo, hi, h_max, breaks=()):
    """Panel boundaries on [lo, hi], no wider than h_max, aligned to breaks."""
    if not hi > lo:
        raise ValueError("need lo < hi")
    pts = [lo] + sorted(b for b in breaks if lo < b < hi) + [hi]
    edges = [np.array([lo])]
    for left, right in zip(pts[:-1], pts[1:]):
        n = max(1, int(np.ceil((right - left) / h_max)))
        edges.append(np.linspace(left, right, n + 1)[1:])
    return np.concatenate(edges)


def panel_rule(edges, order=32):
    """Composite Gauss-Legendre nodes and weights for the given panel edges."""
    x, w = gl_rule(order)
    edges = np.asarray(edges, dtype=float)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def adaptive_integral(f, a, b, spec=None, n0=1, breaks=()):
    """Panel-doubling Gauss-Legendre estimate of the integral of f on [a, b].

    ``f`` must accept an array of nodes; ``n0`` is the starting panel
    count. Points in ``breaks`` (jumps or kinks of f) split the interval
    and each piece is refined on its own. Returns (value, achieved_error);
    raises QuadratureError carrying the best estimate if the tolerance
    max(relative_tol*|value|, absolute_floor) is not met.
    """
    spec = spec or QuadratureSpec()
    if not b > a:
        raise ValueError("need a < b")
    pts = [a] + sorted(x for x in breaks if a < x < b) + [b]
    total, err = 0j, 0.0
    for left, right in zip(pts[:-1], pts[1:]):
        n = max(1, int(round(n0 * (right - left) / (b - a))))
        val, e = _refine(f, left, right, spec, n)
        total += val
        err += e
    return total, err


def _refine(f, a, b, spec, n):
    nodes, weights = panel_rule(np.linspace(a, b, n + 1), spec.panel_order)
    prev = complex(np.sum(weights * f(nodes)))
    err = np.inf
    for _ in range(spec.max_refinements):
        n *= 2
        nodes, weights = panel_rule(np.linspace(a, b, n + 1), spec.panel_order)
        cur = complex(np.sum(weights * f(nodes)))
        err = abs(cur - prev)
        if err <= max(spec.relative_tol * abs(cur), spec.absolute_floor):
            return cur, err
        prev = cur
    raise QuadratureError(f"no convergence on [{a}, {b}]", prev, err)


def simpson_weights(n, h):
    """Composite Simpson weights for n (odd) equally spaced points."""
    if n < 3 or n % 2 == 0:
        raise ValueError("Simpson needs an odd number of points >= 3")
    w = np.full(n, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * h / 3.0


@dataclass(frozen=True, eq=False)
class WaveFunctionGrid:
    """Complex samples of a wave function with quadrature weights."""

    xs: np.ndarray
    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        if not (len(xs) == len(self.values) == len(self.weights)):
            raise ValueError("xs, values and weights must have equal length")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("xs must be strictly increasing")
        if np.any(np.asarray(self.weights) <= 0):
            raise ValueError("weights must be positive")

    def with_values(self, values):
        return WaveFunctionGrid(self.xs, np.asarray(values, dtype=complex), self.weights)

    def norm(self):
        return l2_norm(self)

    def __add__(self, other):
        _check_same(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other):
        _check_same(self, other)
        return self.with_values(self.values - other.values)


def _check_same(g1, g2):
    if g1.xs is g2.xs:
        return
    if len(g1.xs) != len(g2.xs) or not np.array_equal(g1.xs, g2.xs):
        raise GridMismatchError("grids differ")


def l2_norm(g):
    return float(np.sqrt(np.sum(g.weights * np.abs(g.values) ** 2)))


def l2_distance(g1, g2):
    _check_same(g1, g2)
    return float(np.sqrt(np.sum(g1.weights * np.abs(g1.values - g2.values) ** 2)))


def adaptive_grid_norm(f, lo, hi, n0=257, rtol=1e-9, max_doublings=12):
    """L2 norm of a callable on [lo, hi] by Simpson with grid doubling."""
    n = n0 if n0 % 2 else n0 + 1
    prev = None
    for _ in range(max_doublings):
        xs = np.linspace(lo, hi, n)
        val = np.sqrt(np.sum(simpson_weights(n, xs[1] - xs[0]) * np.abs(f(xs)) ** 2))
        if prev is not None and abs(val - prev) <= rtol * abs(val):
            return float(val)
        prev = val
        n = 2 * n - 1
    raise QuadratureError("grid norm did not settle", prev, None)


def fourier_synthesis(xs, ks, coef):
    """sum_j coef[j] exp(i ks[j] xs) for a uniform grid xs."""
    xs = np.asarray(xs, dtype=float)
    n = len(xs)
    if n == 1:
        return np.array([np.sum(np.asarray(coef) * np.exp(1j * np.asarray(ks) * xs[0]))])
    dx = (xs[-1] - xs[0]) / (n - 1)
    if not np.allclose(np.diff(xs), dx, rtol=1e-9, atol=1e-12):
        raise ValueError("fourier_synthesis needs a uniform grid")
    return phase_sum(float(xs[0]), float(dx), n,
                     np.ascontiguousarray(ks, dtype=float),
                     np.ascontiguousarray(coef, dtype=complex))


def fourier_analysis(xs, values, ks):
    """sum_i values[i] exp(-i ks[j] xs[i]) for a uniform grid xs."""
    xs = np.asarray(xs, dtype=float)
    n = len(xs)
    dx = (xs[-1] - xs[0]) / (n - 1)
    if not np.allclose(np.diff(xs), dx, rtol=1e-9, atol=1e-12):
        raise ValueError("fourier_analysis needs a uniform grid")
    return sample_transform(float(xs[0]), float(dx),
                            np.ascontiguousarray(values, dtype=complex),
                            np.ascontiguousarray(ks, dtype=float))
