"""Quantum-versus-classical error measurements and the bounds they are held to.

Each measurement pairs an L2 distance computed on a shared grid with the
list of terms in the matching upper bound. Constants in those bounds are
not known, so sweeps fit one constant C = max(lhs / sum(rhs)) and the
scaling in hbar is read off a least-squares log-log slope.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy.special import erfc

from .classical_singular import (
    BetaCoupling,
    classical_scattering,
    classical_wave_operator,
    quasiclassical_approximant,
)
from .numerics import QuadratureSpec, heaviside, l2_distance
from .quantum_delta import (
    N_SD,
    DeltaCoupling,
    bound_state_coefficient,
    default_grid,
    e3_remainder,
    f_pm_t,
    propagator_pieces,
    quantum_evolve,
    quantum_scattering,
    quantum_wave_operator,
    reflected_state_estimates,
    reflection_coefficients,
)
from .states import CoherentParams, ParameterDomainError, free_evolve, free_evolved_state, phase_space_kernel

__all__ = [
    "C0_DEFAULT",
    "LAMBDA_DEFAULT",
    "NOISE_FLOOR",
    "ErrorReport",
    "FitError",
    "LemmaCheck",
    "ScalingFit",
    "SweepResult",
    "collision_exclusion",
    "collision_time",
    "dirichlet_classical_gap",
    "dirichlet_gap",
    "dirichlet_sweep",
    "double_underline_h",
    "fit_constant",
    "lemma_bounds",
    "lemma_rhs",
    "ordered_map",
    "reflected_gap_closed_form",
    "scaling_fit",
    "scattering_error",
    "theorem1_error",
    "theorem1_report",
    "theorem1_rhs",
    "theorem1_sweep",
    "theorem2_rhs",
    "theorem2_sweep",
    "underline_h",
    "wave_error",
]

LAMBDA_DEFAULT = 0.1
C0_DEFAULT = 2.5
# distances below this are quadrature round-off, not signal
NOISE_FLOOR = 1e-12


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class ErrorReport:
    lhs: float
    rhs_terms: tuple
    underline_h: float
    double_underline_h: float
    fitted_C: float = math.nan
    slope: float = math.nan
    hbar: float = math.nan
    t: float = math.nan
    excluded: bool = False
    label: str = ""

    def __post_init__(self):
        if self.lhs < 0 or any(v < 0 for _, v in self.rhs_terms):
            raise ValueError("error terms must be nonnegative")

    @property
    def rhs(self):
        return float(sum(v for _, v in self.rhs_terms))

    @property
    def ratio(self):
        return self.lhs / self.rhs if self.rhs > 0 else math.inf

    def term(self, name):
        return dict(self.rhs_terms)[name]


class ScalingFit(NamedTuple):
    slope: float
    intercept: float
    r2: float
    used: int
    dropped: tuple


class LemmaCheck(NamedTuple):
    name: str
    lhs: float
    rhs: float

    @property
    def ratio(self):
        return max(self.lhs - NOISE_FLOOR, 0.0) / self.rhs if self.rhs > 0 else math.inf


# small parameters and regime conditions ------------------------------------

def collision_time(q, p, mass=1.0):
    """t_coll = -mq/p."""
    if p == 0:
        raise ParameterDomainError("collision time needs p != 0")
    return -mass * q / p


def underline_h(params, alpha):
    hbar, m, s0 = params.hbar, params.mass, params.sigma0
    return max(hbar * s0 ** 2 / params.q ** 2, hbar / (m * abs(alpha) * s0) ** (2.0 / 3.0))


def double_underline_h(params, alpha):
    return max(underline_h(params, alpha), params.hbar / (params.sigma0 ** 2 * params.p ** 2))


def collision_exclusion(params, t, alpha, lam=LAMBDA_DEFAULT, c0=C0_DEFAULT):
    """|t - t_coll| >= c0 |t_coll| sqrt((3/2 - lam) h |ln h|) with h = underline_h."""
    h = underline_h(params, alpha)
    if not 0 < h < 1:
        raise ParameterDomainError(f"underline h = {h} is outside (0, 1)")
    tc = collision_time(params.q, params.p, params.mass)
    return abs(t - tc) >= c0 * abs(tc) * math.sqrt((1.5 - lam) * h * abs(math.log(h)))


# right-hand sides ----------------------------------------------------------

def _power_stretched(scale, lam, power):
    """(x)^power + exp(-(1/2) x^(-2 lam)) for the small parameter x = scale."""
    return scale ** power, math.exp(-0.5 * (1.0 / scale) ** (2.0 * lam))


def theorem1_rhs(params, t, coupling, lambda1=LAMBDA_DEFAULT, lambda2=None, C=1.0):
    """Terms of the time-dependent bound for the standard family, as printed.

    lambda2 defaults to 2 lambda1 / 3. The p-dependent prefactor is
    exp(-sigma0 p^2 / hbar) exactly as the statement gives it.
    """
    if lambda2 is None:
        lambda2 = 2.0 * lambda1 / 3.0
    if not (lambda1 > 0 and lambda2 > 0):
        raise ValueError("lambda1, lambda2 must be positive")
    hbar, m, s0, q, p = params.hbar, params.mass, params.sigma0, params.q, params.p
    a = abs(coupling.alpha)
    x = hbar / (m * a * s0) ** (2.0 / 3.0)
    pw1, st1 = _power_stretched(x, lambda1, 1.5 - lambda1)
    pw2, st2 = _power_stretched(x, lambda2, 1.5 - 1.5 * lambda2)
    pref = math.exp(-s0 * p ** 2 / hbar)
    fe = free_evolve(params, t)
    terms = (
        ("power1", pw1),
        ("stretched1", st1),
        ("p_power2", pref * pw2),
        ("p_stretched2", pref * st2),
        ("q_gauss", math.exp(-q ** 2 / (8.0 * hbar * s0 ** 2))),
        ("q_bound", math.exp(-m * a * abs(q) / (8.0 * hbar ** 2))),
        ("collision", math.exp(-fe.q_t ** 2 / (4.0 * hbar * abs(fe.sigma_t) ** 2))),
    )
    return tuple((k, C * v) for k, v in terms)


def theorem2_rhs(params, coupling, lam=LAMBDA_DEFAULT, which="wave", C=1.0):
    hbar, m, s0, q, p = params.hbar, params.mass, params.sigma0, params.q, params.p
    a = abs(coupling.alpha)
    x = hbar / (m * a * s0) ** (2.0 / 3.0)
    pw, st = _power_stretched(x, lam, 1.5 - lam)
    terms = [("power", pw), ("stretched", st), ("p_gauss", math.exp(-s0 ** 2 * p ** 2 / hbar))]
    if which == "wave":
        terms.append(("q_gauss", math.exp(-q ** 2 / (4.0 * hbar * s0 ** 2))))
    elif which == "scattering":
        terms.append(("q_gauss", math.exp(-q ** 2 / (8.0 * hbar * s0 ** 2))))
        terms.append(("q_bound", math.exp(-m * a * abs(q) / (8.0 * hbar ** 2))))
    else:
        raise ValueError("which must be 'wave' or 'scattering'")
    return tuple((k, C * v) for k, v in terms)


def lemma_rhs(params, coupling, lam=LAMBDA_DEFAULT):
    """Bound for each lemma-level quantity, general sigma, sigma_breve."""
    hbar, m, q, p = params.hbar, params.mass, params.q, params.p
    s, sb = abs(params.sigma), abs(params.sigma_breve)
    a = abs(coupling.alpha)
    x = hbar * (sb / (m * a)) ** (2.0 / 3.0)
    pw, st = _power_stretched(x, lam, 1.5 - lam)
    pw2, st2 = _power_stretched(x, lam, 1.5 - 1.5 * lam)
    p_gauss = math.exp(-p ** 2 / (hbar * sb ** 2))
    q4 = math.exp(-q ** 2 / (4.0 * hbar * s ** 2))
    return {
        "F+": pw + st,
        "F-": pw + st,
        "E1": q4,
        "E2": p_gauss * (pw2 + st2),
        "E3+": p_gauss,
        "E3-": p_gauss,
        "P_alpha": math.exp(-m * a * abs(q) / (8.0 * hbar ** 2)) + math.exp(-q ** 2 / (8.0 * hbar * s ** 2)),
        "gap_even": q4,
        "gap_mirror": q4,
    }


# measured errors -----------------------------------------------------------

def _check_qp(params):
    if params.q * params.p == 0:
        raise ParameterDomainError("qp != 0 is required")


def theorem1_error(params, t, coupling, grid=None, spec=None, n_sd=N_SD):
    _check_qp(params)
    grid = grid or default_grid(params, (0.0, t), coupling, n_sd)
    exact = quantum_evolve(params, t, coupling, grid, spec)
    approx = quasiclassical_approximant(params, t, coupling.alpha, grid)
    return l2_distance(exact, approx)


def theorem1_report(params, t, coupling, lam=LAMBDA_DEFAULT, c0=C0_DEFAULT, spec=None, n_sd=N_SD):
    lhs = theorem1_error(params, t, coupling, spec=spec, n_sd=n_sd)
    return ErrorReport(
        lhs=lhs,
        rhs_terms=theorem1_rhs(params, t, coupling, lam),
        underline_h=underline_h(params, coupling.alpha),
        double_underline_h=double_underline_h(params, coupling.alpha),
        hbar=params.hbar,
        t=t,
        excluded=not collision_exclusion(params, t, coupling.alpha, lam, c0),
        label="theorem1",
    )


def dirichlet_gap(params, t, coupling, grid=None, spec=None, n_sd=N_SD):
    """Distance from the exact evolution to the complete-reflection approximant."""
    _check_qp(params)
    tc = collision_time(params.q, params.p, params.mass)
    qp = params.q * params.p
    if not ((qp < 0 and t > tc) or (qp > 0 and t < tc)):
        raise ParameterDomainError("dirichlet_gap needs a time past the collision")
    grid = grid or default_grid(params, (0.0, t), coupling, n_sd)
    exact = quantum_evolve(params, t, coupling, grid, spec)
    wall = quasiclassical_approximant(params, t, math.inf, grid)
    return l2_distance(exact, wall)


def dirichlet_classical_gap(params, t, beta):
    """Closed form of ||e^{itL_beta} phi - e^{itL_inf} phi|| for the standard family."""
    q, p, m, hbar, s0 = params.q, params.p, params.mass, params.hbar, params.sigma0
    gate = heaviside(-t * q * p) * heaviside(abs(p * t) / m - abs(q))
    x2 = 0.0 if beta.dirichlet else (2.0 * p / (m * beta.beta)) ** 2
    overlap = math.exp(-q ** 2 / (2.0 * hbar * s0 ** 2)) * math.exp(-2.0 * s0 ** 2 * p ** 2 / hbar)
    return math.sqrt(2.0 * gate * x2 / (1.0 + x2) * (1.0 + overlap))


def _classical_prediction(params, grid, op):
    kernel = lambda qq, pp: phase_space_kernel(params, grid.xs, qq, pp)
    return grid.wave(op(kernel)(params.q, params.p))


def wave_error(params, coupling, lam=LAMBDA_DEFAULT, spec=None, grid=None, n_sd=N_SD):
    """max over +- of ||Omega_+- psi - (W_+- phi)(xi)||.

    One of the two signs carries no reflected term for a given sign of qp;
    its distance is exponentially small, so the maximum is the quantity
    whose hbar-scaling the bound describes.
    """
    _check_qp(params)
    grid = grid or default_grid(params, (0.0,), coupling, n_sd)
    beta = BetaCoupling.from_alpha(coupling.alpha, params.hbar, params.mass)
    lhs = 0.0
    for sign in (1, -1):
        omega = quantum_wave_operator(params, sign, coupling, grid, spec)
        classical = _classical_prediction(params, grid, lambda f: classical_wave_operator(f, sign, beta))
        lhs = max(lhs, l2_distance(omega, classical))
    return ErrorReport(
        lhs=lhs,
        rhs_terms=theorem2_rhs(params, coupling, lam, "wave"),
        underline_h=underline_h(params, coupling.alpha),
        double_underline_h=double_underline_h(params, coupling.alpha),
        hbar=params.hbar,
        label="wave",
    )


def scattering_error(params, coupling, lam=LAMBDA_DEFAULT, spec=None, grid=None, n_sd=N_SD):
    _check_qp(params)
    grid = grid or default_grid(params, (0.0,), coupling, n_sd)
    beta = BetaCoupling.from_alpha(coupling.alpha, params.hbar, params.mass)
    s_quantum = quantum_scattering(params, coupling, grid, spec)
    classical = _classical_prediction(params, grid, lambda f: classical_scattering(f, beta))
    return ErrorReport(
        lhs=l2_distance(s_quantum, classical),
        rhs_terms=theorem2_rhs(params, coupling, lam, "scattering"),
        underline_h=underline_h(params, coupling.alpha),
        double_underline_h=double_underline_h(params, coupling.alpha),
        hbar=params.hbar,
        label="scattering",
    )


def lemma_bounds(params, t, coupling, lam=LAMBDA_DEFAULT, spec=None, n_sd=N_SD):
    """Measured norm and bound for every lemma-level term at one parameter point."""
    _check_qp(params)
    spec = spec or QuadratureSpec()
    # ||P_alpha psi|| is the modulus of a closed-form coefficient, so the
    # grid need not resolve the bound-state cusp
    grid = default_grid(params, (0.0, t), n_sd=n_sd)
    rhs = lemma_rhs(params, coupling, lam)
    out = []
    free = grid.wave(free_evolved_state(params, t, grid.xs))
    rp, rm = reflection_coefficients(params.p / params.hbar, coupling)
    for sign, r in ((1, rp), (-1, rm)):
        f = grid.wave(f_pm_t(params, t, coupling, sign, grid.xs, spec))
        name = "F+" if sign > 0 else "F-"
        out.append(LemmaCheck(name, l2_distance(f, free.with_values(r * free.values)), rhs[name]))
    pieces = propagator_pieces(params, t, coupling, grid, spec)
    out.append(LemmaCheck("E1", pieces.e1.norm(), rhs["E1"]))
    out.append(LemmaCheck("E2", pieces.e2.norm(), rhs["E2"]))
    p_alpha = abs(bound_state_coefficient(params, coupling)) if coupling.alpha < 0 else 0.0
    out.append(LemmaCheck("P_alpha", p_alpha, rhs["P_alpha"]))
    static = default_grid(params, (0.0,), n_sd=n_sd)
    for sign in (1, -1):
        name = "E3+" if sign > 0 else "E3-"
        out.append(LemmaCheck(name, e3_remainder(params, sign, coupling, static, spec).norm(), rhs[name]))
    gap_even, gap_mirror = reflected_state_estimates(params, static)
    out.append(LemmaCheck("gap_even", gap_even, rhs["gap_even"]))
    out.append(LemmaCheck("gap_mirror", gap_mirror, rhs["gap_mirror"]))
    return out


def reflected_gap_closed_form(params):
    """||psi(-sgn(q)|.|)|| = sqrt(erfc(|q| / (sqrt(2 hbar)|sigma|)))."""
    return math.sqrt(erfc(abs(params.q) / (math.sqrt(2.0 * params.hbar) * abs(params.sigma))))



# fitting -------------------------------------------------------------------

def scaling_fit(samples):
    """Least-squares slope of log(error) against log(h).

    Nonpositive errors are dropped and returned in ``dropped``; fewer than
    four usable samples raise FitError.
    """
    used, dropped = [], []
    for h, e in samples:
        (used if (e > 0 and h > 0) else dropped).append((h, e))
    if len(used) < 4:
        raise FitError(f"need at least 4 positive samples, have {len(used)}")
    x = np.log([h for h, _ in used])
    y = np.log([e for _, e in used])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return ScalingFit(float(slope), float(intercept), r2, len(used), tuple(dropped))


def fit_constant(items):
    """Smallest C with lhs <= C rhs for every ErrorReport or LemmaCheck given."""
    return max(it.ratio for it in items)


# sweeps --------------------------------------------------------------------

def ordered_map(fn, tasks, threads=1):
    """map with a thread pool; results keep task order whatever ``threads`` is."""
    tasks = list(tasks)
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


@dataclass(frozen=True)
class SweepResult:
    reports: tuple
    fit: object
    fitted_C: float
    excluded: tuple = field(default=())


def _family(hbar, sigma0, q, p, mass):
    return CoherentParams.standard(hbar, sigma0, q, p, mass)


def theorem1_sweep(hbars, t, alpha, q, p, sigma0=1.0, mass=1.0, lam=LAMBDA_DEFAULT,
                   c0=C0_DEFAULT, threads=1, spec=None, exclude=True, n_sd=N_SD):
    """Theorem-1 errors over hbar; excluded points are kept out of the fit."""
    def one(h):
        params = _family(h, sigma0, q, p, mass)
        return theorem1_report(params, t, DeltaCoupling.for_params(alpha, params), lam, c0, spec, n_sd)

    reports = ordered_map(one, hbars, threads)
    kept = [r for r in reports if not (exclude and r.excluded)]
    skipped = tuple(r for r in reports if exclude and r.excluded)
    return _finish(reports, kept, skipped, key=lambda r: r.underline_h)


def dirichlet_sweep(hbars, t, alpha, q, p, sigma0=1.0, mass=1.0, threads=1, spec=None, n_sd=N_SD):
    def one(h):
        params = _family(h, sigma0, q, p, mass)
        coupling = DeltaCoupling.for_params(alpha, params)
        gap = dirichlet_gap(params, t, coupling, spec=spec, n_sd=n_sd)
        bound = h * abs(p) / (mass * abs(alpha))
        return ErrorReport(lhs=gap, rhs_terms=(("hbar_p_over_m_alpha", bound),),
                           underline_h=underline_h(params, alpha),
                           double_underline_h=double_underline_h(params, alpha),
                           hbar=h, t=t, label="dirichlet")

    reports = ordered_map(one, hbars, threads)
    return _finish(reports, reports, (), key=lambda r: r.hbar)


def theorem2_sweep(hbars, alpha, q, p, which="wave", sigma0=1.0, mass=1.0, lam=LAMBDA_DEFAULT,
                   threads=1, spec=None, n_sd=N_SD):
    measure = wave_error if which == "wave" else scattering_error

    def one(h):
        params = _family(h, sigma0, q, p, mass)
        return measure(params, DeltaCoupling.for_params(alpha, params), lam, spec, n_sd=n_sd)

    reports = ordered_map(one, hbars, threads)
    return _finish(reports, reports, (), key=lambda r: r.double_underline_h)


def _finish(reports, kept, skipped, key):
    try:
        fit = scaling_fit([(key(r), r.lhs) for r in kept])
    except FitError as exc:
        fit = exc
    c = fit_constant(reports) if reports else math.nan
    slope = fit.slope if isinstance(fit, ScalingFit) else math.nan
    reports = tuple(replace(r, fitted_C=c, slope=slope) for r in reports)
    return SweepResult(reports, fit, c, tuple(replace(r, fitted_C=c, slope=slope) for r in skipped))
