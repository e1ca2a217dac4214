"""Acceptance criteria at desk scale.

Each test prints one line, "PASS criterion N: ..." or "FAIL criterion N: ...",
and asserts at the criterion's own tolerance. The lines are repeated in the
pytest terminal summary. Running this file directly prints them as well:

    python tests/test_acceptance.py
"""
import math
import os
import sys
import tempfile
import warnings

import numpy as np
import pytest

from artifact import comparator as cmp
from artifact.classical_singular import (
    BetaCoupling,
    BoundaryEvaluationWarning,
    apply_resolvent_beta,
    classical_scattering,
    classical_wave_operator,
    classical_wave_operator_adjoint,
    free_transport,
    singular_transport,
)
from artifact.cli import load_config, lemma_draws, main
from artifact.numerics import adaptive_grid_norm, l2_distance, panel_edges, panel_rule
from artifact.oracle import crank_nicolson_delta
from artifact.quantum_delta import DeltaCoupling, quantum_evolve, reflection_coefficients
from artifact.states import (
    CoherentParams,
    PhysicalConstants,
    SampleGrid,
    coherent_state,
    coherent_state_fourier,
    free_evolved_state,
    moments,
)

RESULTS = []

HBARS = (0.2, 0.1, 0.05, 0.025, 0.0125)
Q, P, T_SWEEP = -2.0, 1.0, 4.0


def report(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok


@pytest.fixture(scope="module")
def desk():
    return CoherentParams.standard(0.1, 1.0, Q, P)


@pytest.fixture(scope="module")
def theorem1():
    # the sweep premise says every point satisfies the exclusion condition,
    # so all five points enter the fit; the flags are printed alongside
    return cmp.theorem1_sweep(HBARS, T_SWEEP, 1.0, Q, P, exclude=False)


def test_criterion_1_oracle(desk):
    grid = SampleGrid.from_nodes(10000, 2e-3)
    worst = 0.0
    for alpha in (1.0, -1.0):
        coupling = DeltaCoupling.for_params(alpha, desk)
        for t in (1.0, 2.0, 3.0, 4.0):
            ref = crank_nicolson_delta(desk, t, coupling, 2e-3, 2e-4, 20.0, boundary_tol=1e-5)
            worst = max(worst, l2_distance(quantum_evolve(desk, t, coupling, grid), ref))
    assert report(1, worst <= 1e-3, f"max L2 distance spectral vs Crank-Nicolson = {worst:.3e} (tol 1e-3)")


def test_criterion_2_theorem1_scaling(theorem1):
    fit = cmp.scaling_fit([(r.underline_h, r.lhs) for r in theorem1.reports])
    flags = "".join("x" if r.excluded else "." for r in theorem1.reports)
    ok = 1.3 <= fit.slope <= 1.7 and fit.r2 >= 0.98
    assert report(2, ok, f"slope = {fit.slope:.3f} in [1.3, 1.7], r2 = {fit.r2:.4f} >= 0.98 "
                         f"(exclusion failing at hbar marked x: {flags})")


def test_criterion_3_dirichlet(theorem1):
    sweep = cmp.dirichlet_sweep(HBARS, T_SWEEP, 1.0, Q, P)
    fit = sweep.fit
    larger = all(d.lhs > r.lhs for d, r in zip(sweep.reports, theorem1.reports))
    ok = 0.85 <= fit.slope <= 1.15 and larger
    assert report(3, ok, f"slope = {fit.slope:.3f} in [0.85, 1.15], larger than approximant error "
                         f"at every hbar: {larger}")


def test_criterion_4_theorem2():
    slopes, constants, bounded = [], {}, True
    for alpha in (1.0, -1.0):
        for which in ("wave", "scattering"):
            sweep = cmp.theorem2_sweep(HBARS, alpha, Q, P, which)
            slopes.append(sweep.fit.slope)
            constants.setdefault(which, []).append(sweep.fitted_C)
            bounded &= all(r.lhs <= sweep.fitted_C * r.rhs * (1 + 1e-12) for r in sweep.reports)
    spread = max(max(c) / min(c) for c in constants.values())
    ok = all(1.3 <= s <= 1.7 for s in slopes) and bounded and spread <= 3.0
    assert report(4, ok, f"slopes {', '.join(f'{s:.3f}' for s in slopes)} in [1.3, 1.7], "
                         f"lhs <= C rhs: {bounded}, C spread over alpha = {spread:.3f} <= 3")


def test_criterion_5_lemmas():
    cfg = load_config(None)
    checks = []
    for params, alpha, t in lemma_draws(cfg):
        coupling = DeltaCoupling.for_params(alpha, params)
        checks.extend(cmp.lemma_bounds(params, t, coupling, cfg.lam, cfg.spec, cfg.n_sd))
    c_fit = cmp.fit_constant(checks)
    names = sorted({c.name for c in checks})
    ok = len(checks) == 9 * cfg.draws and c_fit <= 10
    assert report(5, ok, f"{cfg.draws} draws x {len(names)} bounds, single fitted C = {c_fit:.3f} <= 10")


def _bump(q, p):
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    return np.exp(-((q + 1.0) ** 2) / 0.5 - (p - 0.8) ** 2 / 0.3 + 0.7j * q * p)


def _norm2d(g, t=0.0, half=6.0):
    pn, pw = panel_rule(panel_edges(-half, half, 0.25, breaks=(0.0,)), 16)
    total = 0.0
    for p, wp in zip(pn, pw):
        cut = abs(p * t)
        qn, qw = panel_rule(panel_edges(-half, half, 0.25, breaks=(0.0, cut, -cut)), 16)
        total += wp * np.sum(qw * np.abs(g(qn, p)) ** 2)
    return math.sqrt(total)


def _laplace(f, z, beta, q, p, horizon=40.0):
    s = np.sign(z.imag)
    lo, hi = (0.0, horizon) if s > 0 else (-horizon, 0.0)
    nodes, weights = panel_rule(panel_edges(lo, hi, 0.5, breaks=(s * abs(q / p),)), 24)
    vals = np.array([singular_transport(f, u, beta)(q, p) for u in nodes])
    return s * 1j * np.sum(weights * np.exp(1j * z * nodes) * vals)


def test_criterion_6_classical_identities():
    rng = np.random.default_rng(6)
    betas = [BetaCoupling(b) for b in (5.0, -5.0, 20.0, np.inf)]
    n0 = _norm2d(_bump)
    unit = max(abs(_norm2d(singular_transport(_bump, t, b), t) - n0) / n0
               for b in betas for t in (0.5, -0.5, 2.0, -2.0))

    q, p = rng.uniform(-3, 3, 400), rng.uniform(-2, 2, 400)
    iso = inter = 0.0
    for b in betas:
        for sign in (1, -1):
            back = classical_wave_operator_adjoint(classical_wave_operator(_bump, sign, b), sign, b)(q, p)
            iso = max(iso, np.max(np.abs(back - _bump(q, p))))
        lhs = classical_scattering(classical_wave_operator(_bump, 1, b), b)(q, p)
        inter = max(inter, np.max(np.abs(lhs - classical_wave_operator(_bump, -1, b)(q, p))))

    beta = BetaCoupling(2.5)
    lap = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", BoundaryEvaluationWarning)
        for _ in range(5):
            qq = rng.uniform(-2, 2)
            pp = rng.choice([-1, 1]) * rng.uniform(0.4, 1.5)
            z = complex(rng.uniform(-1, 1), rng.choice([-1, 1]))
            lap = max(lap, abs(_laplace(_bump, z, beta, qq, pp) - apply_resolvent_beta(_bump, z, beta, pp, qq)))

    pts = np.array([(2.0, 1.0), (-2.0, 1.0), (2.0, -1.0), (-2.0, -1.0), (1.3, 0.9), (-0.4, 1.6)])
    lim = 0.0
    for b in betas:
        for sign in (1, -1):
            t = 50.0 * sign
            got = free_transport(singular_transport(_bump, t, b), -t)(pts[:, 0], pts[:, 1])
            lim = max(lim, np.max(np.abs(got - classical_wave_operator(_bump, sign, b)(pts[:, 0], pts[:, 1]))))

    machine = 1e-14
    ok = unit <= 1e-6 and iso <= machine and inter <= machine and lap <= 1e-6 and lim < 1e-10
    assert report(6, ok, f"unitarity {unit:.1e} (1e-6), W*W - 1 {iso:.1e} and S W+ - W- {inter:.1e} "
                         f"(machine), Laplace duality {lap:.1e} (1e-6), |t| = 50 limit {lim:.1e} (1e-10)")


def test_criterion_7_invariants():
    cases = [CoherentParams.standard(0.1, 1.0, Q, P),
             CoherentParams.standard(0.0125, 1.0, Q, P),
             CoherentParams.standard(0.03, 0.6, 3.0, 2.0, 0.5),
             CoherentParams(PhysicalConstants(0.1, 1.3), 1.0, 0.8 + 0.6j, (1.0 + 0.4j) / (0.8 - 0.6j), 1.5, -0.7)]
    norm_err = 0.0
    for prm in cases:
        w = math.sqrt(prm.hbar) * abs(prm.sigma)
        norm_err = max(norm_err, abs(adaptive_grid_norm(lambda x: coherent_state(prm, x),
                                                        prm.q - 16 * w, prm.q + 16 * w) - 1))
        wk = abs(prm.sigma_breve) / (2 * math.sqrt(prm.hbar))
        k0 = prm.p / prm.hbar
        norm_err = max(norm_err, abs(adaptive_grid_norm(lambda k: coherent_state_fourier(prm, k),
                                                        k0 - 16 * wk, k0 + 16 * wk) - 1))
        for t in (1.0, 4.0):
            wt = math.sqrt(prm.hbar) * abs(prm.sigma + 1j * prm.sigma_breve * t / (2 * prm.mass))
            qt = prm.q + prm.p * t / prm.mass
            norm_err = max(norm_err, abs(adaptive_grid_norm(lambda x: free_evolved_state(prm, t, x),
                                                            qt - 16 * wt, qt + 16 * wt) - 1))

    ks = np.linspace(-200, 200, 4001)
    req = 0.0
    for alpha in (1.0, -1.0, 0.2):
        rp, rm = reflection_coefficients(ks, DeltaCoupling.for_params(alpha, cases[0]))
        req = max(req, np.max(np.abs(rp + rm + 2 * np.abs(rp) ** 2)))

    sd_exact = True
    for prm in cases[:3]:
        _, sq, _, sp = moments(prm)
        sd_exact &= math.isclose(sq * sp, prm.hbar / 2, rel_tol=4 * sys.float_info.epsilon)

    text = "[state]\nq = -2\np = 1\n[physics]\nhbar = 0.2\n[time]\nt_list = 0.5, 1, 3, 4, 5\n"
    with tempfile.TemporaryDirectory() as tmp:
        cfg = os.path.join(tmp, "run.ini")
        with open(cfg, "w") as fh:
            fh.write(text)
        blobs = []
        for threads in (1, 3):
            out = os.path.join(tmp, f"t{threads}")
            main(["--config", cfg, "--out", out, "--threads", str(threads)])
            blobs.append([open(os.path.join(out, n), "rb").read() for n in ("errors.csv", "sweep_summary.csv")])
        same = blobs[0] == blobs[1]

    ok = norm_err <= 1e-9 and req <= 1e-15 and sd_exact and same
    assert report(7, ok, f"coherent norms {norm_err:.1e} (1e-9), R+ + R- + 2|R+|^2 {req:.1e}, "
                         f"sd_q sd_p = hbar/2 exact: {sd_exact}, CSV identical across threads: {same}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
