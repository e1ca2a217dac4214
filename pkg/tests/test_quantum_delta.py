import numpy as np
import pytest

from artifact.classical_singular import quasiclassical_approximant
from artifact.comparator import lemma_rhs, reflected_gap_closed_form
from artifact.numerics import QuadratureSpec, adaptive_grid_norm, adaptive_integral
from artifact.quantum_delta import (
    DeltaCoupling,
    bound_state_coefficient,
    default_grid,
    e3_remainder,
    f_pm_t,
    generalized_eigenfunction,
    half_line_transforms,
    propagator_pieces,
    quantum_evolve,
    quantum_evolve_spectral,
    quantum_scattering,
    quantum_wave_operator,
    quantum_wave_operator_direct,
    reflected_state_estimates,
    reflection_coefficients,
    upsilon_approximant,
)
from artifact.oracle import crank_nicolson_delta
from artifact.states import (
    coherent_state_fourier,
    CoherentParams,
    ParameterDomainError,
    PhysicalConstants,
    SampleGrid,
    coherent_state,
    evolved_params,
    free_evolve,
    free_evolved_state,
    packet_grid,
)


def coupling_for(alpha, hbar=0.1, mass=1.0):
    return DeltaCoupling(alpha, PhysicalConstants(hbar, mass))


def dist(a, b):
    return float(np.sqrt(np.sum(a.weights * np.abs(a.values - b.values) ** 2)))


def test_coupling_domain():
    with pytest.raises(ParameterDomainError):
        coupling_for(0.0)
    with pytest.raises(ParameterDomainError):
        coupling_for(np.inf)
    c = coupling_for(2.0, hbar=0.1)
    assert c.beta == pytest.approx(40.0)
    assert c.bound_state() is None


def test_bound_state():
    c = coupling_for(-1.5, hbar=0.2, mass=0.8)
    bs = c.bound_state()
    assert bs.lambda_alpha == pytest.approx(-0.8 * 2.25 / (2 * 0.04))
    n = adaptive_grid_norm(bs.amplitude, -5.0, 5.0, n0=4097)
    assert abs(n - 1) < 1e-10
    # -(hbar^2/2m) phi'' = lambda phi away from 0
    x, h = 0.05, 1e-4
    d2 = (bs.amplitude(x + h) - 2 * bs.amplitude(x) + bs.amplitude(x - h)) / h ** 2
    assert -(0.04 / 1.6) * d2 == pytest.approx(bs.lambda_alpha * bs.amplitude(x), rel=1e-6)


def test_reflection_coefficients():
    c = coupling_for(0.7)
    rp, rm = reflection_coefficients(0.0, c)
    assert rp == -1 and rm == -1
    ks = np.linspace(-40, 40, 100)
    rp, rm = reflection_coefficients(ks, c)
    np.testing.assert_allclose(rp + rm, -2 * np.abs(rp) ** 2, rtol=0, atol=1e-15)
    np.testing.assert_allclose(rp + rm, 2 * rp.real, rtol=0, atol=1e-15)
    np.testing.assert_array_equal(rp, reflection_coefficients(-ks, c)[0])
    assert np.all(np.abs(rp) <= 1)
    assert abs(reflection_coefficients(1e9, c)[0]) < 1e-6


@pytest.mark.parametrize("alpha", [1.0, -0.6])
@pytest.mark.parametrize("sign", [1, -1])
def test_eigenfunction_jump_condition(alpha, sign):
    c = coupling_for(alpha, hbar=0.1)
    h = 1e-5
    for k in np.linspace(-14.3, 15.1, 20):
        phi = lambda x: generalized_eigenfunction(k, x, sign, c)
        right = (-3 * phi(0.0) + 4 * phi(h) - phi(2 * h)) / (2 * h)
        left = (3 * phi(0.0) - 4 * phi(-h) + phi(-2 * h)) / (2 * h)
        jump = right - left
        expect = 2 * alpha / 0.01 * phi(0.0)
        assert abs(jump - expect) <= 1e-5 * abs(expect)


def test_eigenfunction_at_origin_and_free_equation():
    c = coupling_for(1.0)
    k = 7.3
    rp, rm = reflection_coefficients(k, c)
    assert generalized_eigenfunction(k, 0.0, 1, c) == pytest.approx((1 + rp) / np.sqrt(2 * np.pi))
    for x in (-0.9, 0.4):
        for sign in (1, -1):
            phi = lambda y: generalized_eigenfunction(k, y, sign, c)
            h = 1e-4
            d2 = (phi(x + h) - 2 * phi(x) + phi(x - h)) / h ** 2
            assert abs(-d2 - k * k * phi(x)) <= 1e-6 * k * k * abs(phi(x)) + 1e-6 * k * k


def test_half_line_transform_symmetric_case():
    prm = CoherentParams.standard(0.1, 1.0, 0.0, 0.0)
    hp, hm = half_line_transforms(prm, 0.0)
    full = adaptive_grid_norm(lambda x: np.sqrt(coherent_state(prm, x)), -5, 5) ** 2
    assert hp == pytest.approx(hm, rel=1e-15)
    assert hp.real == pytest.approx(0.5 * full, rel=1e-10)


@pytest.mark.parametrize("kappa", [0.0, 3.5, -8.0, 2.0 + 4.0j])
def test_half_line_transform_against_quadrature(kappa):
    sb = (1.0 + 0.3j) / np.conj(0.9 + 0.4j)
    prm = CoherentParams(PhysicalConstants(0.1), 1.0, 0.9 + 0.4j, sb, -0.4, 0.8)
    hp, hm = half_line_transforms(prm, kappa)
    spec = QuadratureSpec(1e-13)
    ref_p, _ = adaptive_integral(lambda y: np.exp(1j * kappa * y) * coherent_state(prm, y), 0, 8, spec)
    ref_m, _ = adaptive_integral(lambda y: np.exp(1j * kappa * y) * coherent_state(prm, -y), 0, 8, spec)
    assert abs(hp - ref_p) < 1e-11
    assert abs(hm - ref_m) < 1e-11
    if np.imag(kappa) == 0:
        mod_p, _ = adaptive_integral(lambda y: np.abs(coherent_state(prm, y)), 0, 8, spec)
        assert abs(hp) <= mod_p.real + 1e-12


def test_half_lines_recombine_to_fourier(desk):
    from artifact.states import coherent_state_fourier
    for k in (8.0, 10.0, 12.5):
        hp, hm = half_line_transforms(desk, -k)
        hp2, hm2 = half_line_transforms(desk, k)
        # int_R e^{-ikx} psi = int_0^inf e^{-iky} psi(y) + int_0^inf e^{iky} psi(-y)
        assert hp + hm2 == pytest.approx(np.sqrt(2 * np.pi) * coherent_state_fourier(desk, k), rel=1e-12)


def test_bound_state_coefficient_zero_for_repulsive(desk):
    assert bound_state_coefficient(desk, coupling_for(1.0)) == 0


def test_bound_state_coefficient_quadrature():
    prm = CoherentParams.standard(0.2, 1.0, -0.5, 0.8)
    c = DeltaCoupling.for_params(-0.4, prm)
    bs = c.bound_state()
    ref, _ = adaptive_integral(lambda x: bs.amplitude(x) * coherent_state(prm, x), -12, 0,
                               QuadratureSpec(1e-13))
    ref2, _ = adaptive_integral(lambda x: bs.amplitude(x) * coherent_state(prm, x), 0, 12,
                                QuadratureSpec(1e-13))
    assert abs(bound_state_coefficient(prm, c) - (ref + ref2)) < 1e-12


def test_evolve_at_zero(desk):
    got = quantum_evolve(desk, 0.0, coupling_for(1.0))
    assert np.sqrt(np.sum(got.weights * np.abs(got.values - coherent_state(desk, got.xs)) ** 2)) < 1e-8


@pytest.mark.parametrize("alpha", [1.0, -1.0, 0.2, -0.2])
def test_evolve_unitary(desk, alpha):
    c = DeltaCoupling.for_params(alpha, desk)
    for t in (1.5, 4.0):
        assert abs(quantum_evolve(desk, t, c).norm() - 1) < 1e-6


@pytest.mark.parametrize("alpha, t", [(1.0, 3.0), (-0.4, 2.5), (0.3, 1.0)])
def test_pieces_match_spectral(alpha, t, desk):
    # the spectral route truncates an algebraic k-tail of size ~|psi(0)|;
    # k_max = 200 puts it below 1e-8 for psi(0) ~ e^-10
    c = DeltaCoupling.for_params(alpha, desk)
    grid = default_grid(desk, (0.0, t), c)
    a = quantum_evolve(desk, t, c, grid)
    b = quantum_evolve_spectral(desk, t, c, grid, k_max=200.0)
    assert dist(a, b) < 1e-8


def fplus_transform(prm, c, k):
    rp, rm = reflection_coefficients(k, c)
    hp, hm = half_line_transforms(prm, np.abs(k))
    return coherent_state_fourier(prm, k) + rm * (hp + hm) / np.sqrt(2 * np.pi)


@pytest.mark.parametrize("alpha", [-0.5, 0.7])
def test_completeness(alpha):
    # ||F_+ psi||^2 + |<phi_alpha, psi>|^2 = ||psi||^2 (P_ac + P_alpha = 1)
    prm = CoherentParams.standard(0.2, 1.0, -0.6, 0.8)
    c = DeltaCoupling.for_params(alpha, prm)
    spec = QuadratureSpec(1e-12)
    dens = lambda k: np.abs(fplus_transform(prm, c, k)) ** 2
    cont = 0.0
    for lo, hi in [(-4000, -200), (-200, 0), (0, 200), (200, 4000)]:
        cont += adaptive_integral(dens, lo, hi, spec, n0=8)[0].real
    # |F_+ psi|^2 ~ k^-4 beyond |k| = 4000; the two tails add at most 1e-10
    total = cont + abs(bound_state_coefficient(prm, c)) ** 2
    assert abs(total - 1) < 1e-9
    if alpha < 0:
        assert abs(bound_state_coefficient(prm, c)) > 1e-2


def test_bound_state_orthogonal_to_continuum():
    c = coupling_for(-0.5, hbar=0.2)
    bs = c.bound_state()
    spec = QuadratureSpec(1e-13)
    for k in np.linspace(-9, 11, 20):
        for sign in (1, -1):
            f = lambda x: bs.amplitude(x) * generalized_eigenfunction(k, x, sign, c)
            v = adaptive_integral(f, -4, 0, spec)[0] + adaptive_integral(f, 0, 4, spec)[0]
            assert abs(v) < 1e-12


def test_general_sigma_evolution():
    sb = (1.0 - 0.5j) / np.conj(1.2 + 0.3j)
    prm = CoherentParams(PhysicalConstants(0.1, 1.4), 1.0, 1.2 + 0.3j, sb, 3.0, -0.9)
    c = DeltaCoupling.for_params(0.8, prm)
    grid = default_grid(prm, (0.0, 4.0), c)
    a = quantum_evolve(prm, 4.0, c, grid)
    b = quantum_evolve_spectral(prm, 4.0, c, grid, k_max=200.0)
    assert dist(a, b) < 1e-8
    assert abs(a.norm() - 1) < 1e-6
    cn = crank_nicolson_delta(prm, 4.0, c, 2e-3, 2e-4, 12.0, boundary_tol=1e-6)
    ours = quantum_evolve(prm, 4.0, c, SampleGrid.from_nodes(6000, 2e-3))
    assert dist(cn, ours) < 1e-3


def test_bound_part_and_e1_lemma_bounds():
    prm = CoherentParams.standard(0.1, 1.0, -1.0, 1.0)
    c = DeltaCoupling.for_params(-1.0, prm)
    pieces = propagator_pieces(prm, 1.0, c, default_grid(prm, (0.0, 1.0)))
    bound = np.exp(-1.0 / (8 * 0.01)) + np.exp(-1.0 / (8 * 0.1))
    assert pieces.e_alpha.norm() <= 10 * bound
    assert pieces.e1.norm() <= 10 * np.exp(-1.0 / (4 * 0.1))


def test_f_plus_minus_close_to_scaled_free(desk):
    # F_{+,t} and F_{-,t} are interchangeable up to the lemma remainder
    c = coupling_for(1.0)
    t = 4.0
    grid = default_grid(desk, (0.0, t))
    rhs = lemma_rhs(desk, c)
    rp, rm = reflection_coefficients(1.0 / 0.1, c)
    free = free_evolved_state(desk, t, grid.xs)
    for sign, r, name in ((1, rp, "F+"), (-1, rm, "F-")):
        f = grid.wave(f_pm_t(desk, t, c, sign, grid.xs))
        assert dist(f, grid.wave(r * free)) <= 10 * rhs[name]


def test_upsilon_regimes(desk):
    # large hbar|p| against m|alpha|: reflection is weak
    c = coupling_for(0.01)
    ups = upsilon_approximant(desk, 4.0, c)
    free = ups.values - 0
    freev = free_evolved_state(desk, 4.0, ups.xs)
    r = abs(reflection_coefficients(10.0, c)[0])
    assert np.sqrt(np.sum(ups.weights * np.abs(free - freev) ** 2)) <= 2 * r
    # matches the quasi-classical approximant up to the collision overlap
    c = coupling_for(1.0)
    grid = default_grid(desk, (0.0, 4.0), c)
    a = upsilon_approximant(desk, 4.0, c, grid)
    b = quasiclassical_approximant(desk, 4.0, 1.0, grid)
    assert dist(a, b) <= 2 * np.exp(-4.0 / (4 * 0.1 * 5.0))


def test_reflected_state_estimates():
    prm = CoherentParams.standard(0.05, 1.0, -4.0, 0.5)
    ge, gm = reflected_state_estimates(prm)
    assert ge < 1e-30 and gm < 1e-30


def test_reflected_state_bounds_random(rng):
    for _ in range(10):
        s = rng.uniform(0.6, 1.5)
        prm = CoherentParams.standard(rng.uniform(0.05, 0.5), s, rng.choice([-1, 1]) * rng.uniform(0.3, 2.0),
                                      rng.uniform(-2, 2))
        ge, gm = reflected_state_estimates(prm)
        bound = np.exp(-prm.q ** 2 / (4 * prm.hbar * abs(prm.sigma) ** 2))
        assert ge <= bound and gm <= bound


def test_reflected_gap_dual_evaluation():
    prm = CoherentParams.standard(0.3, 0.8, 0.5, 0.4)
    _, gm = reflected_state_estimates(prm, packet_grid(prm, n_sd=20, extra_dx=1e-3))
    assert abs(gm ** 2 - reflected_gap_closed_form(prm) ** 2) < 1e-9


def test_wave_operator_norm_and_routes(desk):
    c = coupling_for(1.0)
    for sign in (1, -1):
        for prm in (desk, desk.with_phase_point(2.0, 1.0)):
            grid = default_grid(prm, (0.0,), c)
            a = quantum_wave_operator(prm, sign, c, grid)
            b = quantum_wave_operator_direct(prm, sign, c, grid)
            assert abs(a.norm() - 1) < 1e-5
            assert dist(a, b) < 1e-10


def test_e3_small(desk):
    c = coupling_for(1.0)
    for sign in (1, -1):
        assert e3_remainder(desk, sign, c).norm() <= 10 * np.exp(-1.0 / 0.1)


def test_wave_operator_large_time_trend():
    prm = CoherentParams.standard(0.1, 1.0, 2.0, 1.0)
    c = DeltaCoupling.for_params(1.0, prm)
    gaps = []
    for T in (4.0, 8.0, 16.0):
        back = evolved_params(prm, -T)
        grid = default_grid(back, (0.0, T), c)
        phase = np.exp(1j * free_evolve(prm, -T).action_phase / prm.hbar)
        moved = quantum_evolve(back, T, c, grid)
        moved = grid.wave(phase * moved.values)
        gaps.append(dist(moved, quantum_wave_operator(prm, -1, c, grid)))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-3


def test_scattering_norm(desk):
    c = coupling_for(1.0)
    assert abs(quantum_scattering(desk, c).norm() - 1) < 1e-4


def test_scattering_hard_wall_limit():
    prm = CoherentParams.standard(0.05, 1.0, -2.0, 1.0)
    c = DeltaCoupling.for_params(1e6, prm)
    grid = default_grid(prm, (0.0,), c)
    s = quantum_scattering(prm, c, grid)
    assert dist(s, grid.wave(-coherent_state(prm, -grid.xs))) < 1e-3


def test_qp_zero_rejected(desk):
    c = coupling_for(1.0)
    with pytest.raises(ParameterDomainError):
        upsilon_approximant(desk.with_phase_point(0.0, 1.0), 1.0, c)
    with pytest.raises(ParameterDomainError):
        quantum_wave_operator(desk.with_phase_point(1.0, 0.0), 1, c)
