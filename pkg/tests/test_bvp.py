import math

import numpy as np
import pytest

from fpu_pulses import bvp, waves
from fpu_pulses.dispersion import omega_sq
from fpu_pulses.errors import (
    ExistenceConditionViolated, GridTooCoarse, NonPowerOfTwo, TailNotResolved, WindowTooSmall,
)
from fpu_pulses.potentials import PotentialSpec, w1_prime, w2_prime

MIXED = PotentialSpec(0.0, 0.0, 1.3, 0.6)


def _smooth_random(n, L, rng, modes=40):
    xi = bvp.grid(n, L)
    v = np.zeros(n)
    for m in range(1, modes):
        v += rng.normal() * np.cos(2 * np.pi * m * xi / L + rng.uniform(0, 2 * np.pi)) / m**2
    return 0.1 * v


def test_grid_checks():
    with pytest.raises(NonPowerOfTwo):
        bvp.residual(np.zeros(1000), 1.7, 100.0, MIXED)
    with pytest.raises(WindowTooSmall):
        bvp.residual(np.zeros(256), 1.7, 8.0, MIXED)
    xi = bvp.grid(8, 16.0)
    assert xi[0] == -8.0 and xi[4] == 0.0


def test_spectral_shift_and_derivative():
    n, L = 256, 64.0
    xi = bvp.grid(n, L)
    v = np.sin(2 * np.pi * 3 * xi / L)
    assert np.allclose(bvp.spectral_shift(v, 0.7, L), np.sin(2 * np.pi * 3 * (xi + 0.7) / L), atol=1e-13)
    assert np.allclose(bvp.spectral_derivative(v, L), 2 * np.pi * 3 / L * np.cos(2 * np.pi * 3 * xi / L), atol=1e-13)


def test_residual_of_zero():
    assert np.all(bvp.residual(np.zeros(128), 1.7, 32.0, MIXED) == 0.0)


def test_plane_waves_solve_linear_chain():
    n, L, m0 = 512, 128.0, 37
    k = 2 * np.pi * m0 / L
    c = math.sqrt(omega_sq(k)) / k
    v = np.cos(k * bvp.grid(n, L))
    assert np.max(np.abs(bvp.residual(v, c, L, PotentialSpec()))) < 1e-10


def test_residual_matches_index_shifts():
    n, L = 256, 64.0
    ppu = 4
    v = _smooth_random(n, L, np.random.default_rng(3))
    c = 1.7
    d2 = bvp.spectral_derivative(v, L, 2)
    force = 0.0
    for h, wp in ((1, w1_prime), (2, w2_prime)):
        fwd = np.roll(v, -h * ppu) - v
        bwd = v - np.roll(v, h * ppu)
        force = force + wp(fwd, MIXED) - wp(bwd, MIXED)
    assert np.max(np.abs(bvp.residual(v, c, L, MIXED) - (c * c * d2 - force))) < 1e-12


def test_jacobians():
    n, L = 128, 32.0
    rng = np.random.default_rng(5)
    v = _smooth_random(n, L, rng)
    x = _smooth_random(n, L, rng)
    c = 1.66
    J = bvp.jacobian_dense(v, c, L, MIXED)
    assert np.allclose(J, J.T, atol=1e-12)
    h = 1e-6
    fd = (bvp.residual(v + h * x, c, L, MIXED) - bvp.residual(v - h * x, c, L, MIXED)) / (2 * h)
    assert np.max(np.abs(J @ x - fd)) < 1e-7
    assert np.max(np.abs(bvp.jacobian_apply(v, c, L, MIXED)(x) - J @ x)) < 1e-12


def test_solve_zero_epsilon(critical, coeffs, even_spec):
    sol = bvp.solve(0.0, critical, coeffs, even_spec, bvp.SolverConfig(n_modes=256))
    assert np.all(sol.v == 0.0) and sol.newton_iterations == 0
    assert sol.first_integral_drift == 0.0
    values, drift = bvp.first_integral(sol)
    assert np.all(values == 0.0) and drift == 0.0
    assert bvp.chi_diagnostics(sol, 0.0) == (0.0, 0.0)


def test_solve_rejects(critical, coeffs, even_spec):
    with pytest.raises(ValueError):
        bvp.solve(0.05, critical, coeffs, PotentialSpec(a1=0.5, b1=1, b2=1))
    with pytest.raises(ExistenceConditionViolated):
        bvp.solve(0.05, critical, coeffs, PotentialSpec(b1=-1.0, b2=-1.0))
    with pytest.raises(TailNotResolved):
        bvp.solve(0.05, critical, coeffs, even_spec, bvp.SolverConfig(n_modes=2048), domain_length=256.0)
    with pytest.raises(GridTooCoarse):
        bvp.solve(0.02, critical, coeffs, even_spec, bvp.SolverConfig(n_modes=1024))


def test_solve_reference_case(critical, coeffs, even_spec):
    eps = 0.05
    L = 40.0 / (eps * math.sqrt(critical.s0_prime))
    sol = bvp.solve(eps, critical, coeffs, even_spec, bvp.SolverConfig(n_modes=4096), domain_length=L)
    assert sol.newton_iterations <= 10
    assert sol.residual_norm < 1e-10
    predicted = 2 * eps * math.sqrt(2 * critical.s0_prime / coeffs.nu2)
    assert sol.amplitude() == pytest.approx(predicted, rel=0.25)


def test_newton_converges_quadratically(family):
    for sol in family:
        h = sol.residual_history
        assert h[-1] < 1e-10
        # observed order from the last three residuals
        e0, e1, e2 = h[-3:]
        assert math.log(e2 / e1) / math.log(e1 / e0) > 1.8


def test_family_diagnostics(family):
    for sol in family:
        assert sol.residual_norm < 1e-10
        assert sol.first_integral_drift < 1e-8
        assert sol.symmetry_defect < 1e-6
        assert sol.tail_ratio() < 1e-8
        assert abs(sol.mean()) < 1e-14


def test_first_integral_level_is_zero(family):
    for sol in family:
        values, _ = bvp.first_integral(sol)
        assert np.max(np.abs(values)) < 1e-8


def test_family_amplitude_scaling(family):
    ratios = [s.amplitude() / s.epsilon for s in family]
    assert max(ratios) / min(ratios) < 1.1


def test_symmetry_defect_exact_and_shifted(profile_004):
    n = 512
    xi = bvp.grid(n, 128.0)
    even = np.exp(-xi**2 / 50.0) * np.cos(2.1 * xi)
    assert bvp.symmetry_defect(even) < 1e-15
    shifted = np.roll(profile_004.v, 37)
    assert bvp.symmetry_defect(shifted) == pytest.approx(bvp.symmetry_defect(profile_004.v), abs=1e-12)


def test_chi_zero_mode_content_is_quadratic(family):
    scaled = []
    for sol in family:
        w = sol.epsilon * 1.93
        xs = np.linspace(-3 / w, 3 / w, 13)
        worst = max(max(abs(v) for v in bvp.chi_diagnostics(sol, x)) for x in xs)
        scaled.append(worst / sol.epsilon**2)
    # O(eps^2): bounded, and not growing as eps decreases
    assert max(scaled) < 1.0
    assert scaled[0] <= 1.5 * scaled[-1]


def test_chi_of_carrier_ansatz(critical, coeffs):
    from fpu_pulses import dispersion

    scaled = []
    p = np.linspace(-2.0, 2.0, 257)
    for eps in (0.02, 0.04, 0.08):
        an = waves.make_ansatz(eps, critical, coeffs)
        worst = 0.0
        for x in np.linspace(-3 / an.width, 3 / an.width, 13):
            z = waves.leading_profile(x, an)
            y = waves.leading_profile_derivative(x, an)
            U = waves.leading_profile(x + p, an)
            worst = max(worst, abs(dispersion.chi0(z, y, U, an.c)), abs(dispersion.chi1(z, y, U, an.c)))
        scaled.append(worst / eps**2)
    assert max(scaled) < 1.0
    assert scaled[0] <= 1.5 * scaled[-1]


def test_window_doubling(critical, coeffs, even_spec):
    small = bvp.solve(0.08, critical, coeffs, even_spec, bvp.SolverConfig(n_modes=2048))
    big = bvp.solve(0.08, critical, coeffs, even_spec, bvp.SolverConfig(n_modes=4096), domain_length=2 * small.domain_length)
    assert np.max(np.abs(big.evaluate(small.xi) - small.v)) < 1e-8


def test_krylov_matches_dense(critical, coeffs, even_spec):
    dense = bvp.solve(0.08, critical, coeffs, even_spec, bvp.SolverConfig(n_modes=2048))
    krylov = bvp.solve(0.08, critical, coeffs, even_spec, bvp.SolverConfig(n_modes=2048, dense_limit=0))
    # both meet the 1e-10 residual; the Jacobian inverse is O(1/eps^2)
    assert np.max(np.abs(dense.v - krylov.v)) < 1e-8
    large = bvp.solve(0.08, critical, coeffs, even_spec, bvp.SolverConfig(n_modes=8192))
    assert large.residual_norm < 1e-10
    xs = np.linspace(-100, 100, 401)
    assert np.max(np.abs(large.evaluate(xs) - dense.evaluate(xs))) < 1e-8


def test_least_squares_fallback(critical, coeffs, even_spec):
    sol = bvp.solve(0.08, critical, coeffs, even_spec, bvp.SolverConfig(n_modes=1024, cond_limit=1.0))
    assert sol.least_squares_steps == sol.newton_iterations > 0
    assert sol.residual_norm < 1e-10


def test_seeded_and_unseeded_agree(profile_004, critical, coeffs, even_spec):
    fresh = bvp.solve(0.04, critical, coeffs, even_spec)
    assert np.max(np.abs(fresh.v - profile_004.v)) < 1e-9


def test_continuation_preconditions(critical, coeffs, even_spec):
    cfg = bvp.SolverConfig(n_modes=2048)
    with pytest.raises(ValueError):
        bvp.continuation([0.08, 0.06], critical, coeffs, even_spec, cfg)
    with pytest.raises(ValueError):
        bvp.continuation([], critical, coeffs, even_spec, cfg)
    one = bvp.continuation([0.08], critical, coeffs, even_spec, cfg)[0]
    direct = bvp.solve(0.08, critical, coeffs, even_spec, cfg)
    assert np.array_equal(one.v, direct.v)


def test_serialisation_round_trip(profile_004):
    import json

    header = json.dumps(profile_004.header())
    again = bvp.ProfileSolution.from_files(header, "# comment\n" + profile_004.to_csv())
    assert np.array_equal(again.v, profile_004.v)
    assert again.domain_length == profile_004.domain_length and again.c == profile_004.c
    assert np.array_equal(again.xi, profile_004.xi)


def test_resampling_is_consistent(profile_004):
    sol = profile_004
    assert np.allclose(sol.evaluate(sol.xi[::97]), sol.v[::97], atol=1e-13)
    xi_f, v_f = sol.fine_samples(32)
    step = xi_f.size // sol.n_modes
    assert np.allclose(v_f[::step], sol.v, atol=1e-13)
    x0 = 400.25
    q, dq = sol.on_lattice(x0, 1024)
    n = np.arange(1024)
    inside = (n - x0 > sol.xi[0] + 1) & (n - x0 < sol.xi[-1] - 1)
    assert np.allclose(q[inside], sol.evaluate(n[inside] - x0), atol=1e-12)
    assert np.allclose(dq[inside], sol.evaluate(n[inside] - x0, derivative=True), atol=1e-12)


def test_theta_pi_branch_is_the_negated_profile(critical, coeffs, even_spec, profile_004):
    """For an even potential v -> -v is a symmetry, and the theta = pi seed lands on it."""
    flipped = bvp.solve(0.04, critical, coeffs, even_spec, bvp.SolverConfig(theta=math.pi))
    assert flipped.residual_norm < 1e-10
    assert flipped.v.size == profile_004.v.size
    assert np.max(np.abs(flipped.v + profile_004.v)) < 1e-9
