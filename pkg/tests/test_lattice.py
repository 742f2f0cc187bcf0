import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fpu_pulses import lattice, waves
from fpu_pulses.dispersion import omega_sq
from fpu_pulses.errors import BlowUp
from fpu_pulses.lattice import LatticeState
from fpu_pulses.potentials import PotentialSpec

LINEAR = PotentialSpec()
HARD = PotentialSpec(0.4, -0.2, 1.0, 1.0)


def _random_state(n=64, scale=0.1, seed=0):
    rng = np.random.default_rng(seed)
    return LatticeState(scale * rng.standard_normal(n), scale * rng.standard_normal(n))


def test_forces_of_constant_and_delta():
    assert np.all(lattice.forces(np.full(16, 3.0), HARD) == 0.0)
    q = np.zeros(16)
    q[0] = 1.0
    f = lattice.forces(q, LINEAR)
    expected = np.zeros(16)
    expected[[0, 1, -1, 2, -2]] = [-8.0, 5.0, 5.0, -1.0, -1.0]
    assert np.array_equal(f, expected)


@given(st.integers(0, 10_000))
def test_forces_sum_to_zero(seed):
    st_ = _random_state(seed=seed, scale=0.5)
    assert abs(np.sum(lattice.forces(st_.q, HARD))) < 1e-12


def test_free_flight():
    s = LatticeState(np.zeros(16), np.full(16, 0.3))
    out = lattice.step_verlet(s, 0.01, HARD)
    assert np.allclose(out.q, 0.003, atol=1e-17) and np.array_equal(out.p, s.p)


def test_verlet_reversible():
    s = _random_state()
    back = lattice.step_verlet(lattice.step_verlet(s, 0.01, HARD), -0.01, HARD)
    assert np.max(np.abs(back.q - s.q)) < 1e-13 and np.max(np.abs(back.p - s.p)) < 1e-13


def test_energy_values():
    assert lattice.energy(LatticeState(np.zeros(8), np.zeros(8)), HARD) == 0.0
    q = np.zeros(16)
    q[3] = 1.0
    assert lattice.energy(LatticeState(q, np.zeros(16)), LINEAR) == pytest.approx(4.0, abs=1e-15)


def test_energy_is_quadratic_form():
    n = 12
    K = -np.array([lattice.forces(e, LINEAR) for e in np.eye(n)])
    s = _random_state(n)
    assert lattice.energy(s, LINEAR) == pytest.approx(0.5 * s.p @ s.p + 0.5 * s.q @ K @ s.q, rel=1e-13)


def test_pairwise_sum():
    x = np.random.default_rng(2).standard_normal(1001)
    assert lattice.pairwise_sum(x) == pytest.approx(math.fsum(x), abs=1e-13)
    assert lattice.pairwise_sum(x) == lattice.pairwise_sum(x.copy())
    assert lattice.pairwise_sum([]) == 0.0


def test_state_validation():
    with pytest.raises(ValueError):
        LatticeState(np.zeros(4), np.zeros(4))
    with pytest.raises(ValueError):
        LatticeState(np.zeros(8), np.zeros(9))
    with pytest.raises(ValueError):
        LatticeState(np.full(8, np.nan), np.zeros(8))


def test_run_guards():
    s = _random_state()
    assert lattice.run(s, 0.0, 0.01, HARD).final.t == 0.0
    assert np.array_equal(lattice.run(s, 0.0, 0.01, HARD).final.q, s.q)
    with pytest.raises(ValueError):
        lattice.run(s, 1.0, 0.06, HARD)
    with pytest.raises(ValueError):
        lattice.run(s, 1.0, 0.0, HARD)
    with pytest.raises(ValueError):
        lattice.run(s, -1.0, 0.01, HARD)
    with pytest.raises(BlowUp):
        lattice.run(_random_state(scale=2.0), 50.0, 0.05, PotentialSpec(b1=-1.0, b2=-1.0), stride=10)


def test_momentum_conserved():
    s = _random_state(256, scale=0.2)
    traj = lattice.run(s, 100.0, 0.01, HARD, stride=10_000)
    assert abs(traj.column("momentum")[-1] - traj.column("momentum")[0]) < 1e-12


def test_translation_equivariance():
    s = _random_state(64)
    a = lattice.run(s, 5.0, 0.01, HARD).final
    b = lattice.run(LatticeState(np.roll(s.q, 5), np.roll(s.p, 5)), 5.0, 0.01, HARD).final
    assert np.array_equal(np.roll(a.q, 5), b.q) and np.array_equal(np.roll(a.p, 5), b.p)


def test_time_reversal():
    s = _random_state(64)
    fwd = lattice.run(s, 10.0, 0.01, HARD).final
    back = lattice.run(LatticeState(fwd.q, -fwd.p), 10.0, 0.01, HARD).final
    assert np.max(np.abs(back.q - s.q)) < 1e-8


def _drift(state, dt, T):
    E = lattice.run(state, T, dt, HARD, stride=max(1, int(round(0.05 / dt)))).column("energy")
    return np.max(np.abs(E - E[0])) / abs(E[0])


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 1000))
def test_energy_drift_is_second_order(seed):
    s = _random_state(128, scale=0.05, seed=seed)
    ratio = _drift(s, 0.01, 5.0) / _drift(s, 0.005, 5.0)
    assert 3.2 <= ratio <= 4.8


def test_single_mode_frequency():
    k = 2 * np.pi * 40 / 256
    w = lattice.standing_wave_frequency(k, 256, 1e-3, 60.0, 0.005, LINEAR)
    assert w == pytest.approx(math.sqrt(omega_sq(k)), rel=1e-5)


def test_plane_wave_amplitude_constant():
    n = 256
    k = 2 * np.pi * 10 / n
    w = math.sqrt(omega_sq(k))
    sites = np.arange(n)
    s = LatticeState(np.cos(k * sites), w * np.sin(k * sites))
    # modal amplitude from the Fourier coefficient of the carrier
    amp = lambda st: {"amp": float(2 * abs(np.fft.rfft(st.q)[10]) / n)}
    amps = lattice.run(s, 100.0, 0.005, LINEAR, observers=[amp], stride=200).column("amp")
    assert np.max(np.abs(amps - 1.0)) < 1e-6


def test_shape_error_of_exact_samples(profile_004):
    c = profile_004.c
    lo, _ = profile_004.support()
    x0, t = -lo + 10.0, 3.3
    q, p = profile_004.on_lattice(x0 + c * t, 1024)
    err, shift = lattice.shape_error(LatticeState(q, p), profile_004, c, sigma_guess=x0 + c * t)
    assert err < 1e-10
    assert shift == pytest.approx(x0 + c * t, abs=1e-6)
    err_free, shift_free = lattice.shape_error(LatticeState(q, p), profile_004, c)
    assert err_free < 1e-10 and shift_free == pytest.approx(x0 + c * t, abs=1e-6)


def test_shape_error_of_scaled_profile(profile_004):
    lo, _ = profile_004.support()
    x0 = float(round(-lo + 4.0))  # a site sits on the crest
    q, p = profile_004.on_lattice(x0, 1024)
    err, _ = lattice.shape_error(LatticeState(1.1 * q, p), profile_004, profile_004.c, sigma_guess=x0)
    assert err == pytest.approx(0.1, rel=1e-3)


def test_shape_error_callable_profile(critical, coeffs):
    an = waves.make_ansatz(0.1, critical, coeffs)
    prof = waves.AnsatzProfile(an)
    prof.peak = 2 * an.amplitude_scale
    q, p = waves.lattice_initial_data(prof, an.c, 512, 200.4)
    err, shift = lattice.shape_error(LatticeState(q, p), prof, an.c)
    assert err < 1e-10 and shift == pytest.approx(200.4, abs=1e-6)


def test_snapshot_and_csv_round_trip():
    s = _random_state(32)
    s.t = 1.25
    again = LatticeState.load(s.dump())
    assert np.array_equal(again.q, s.q) and np.array_equal(again.p, s.p) and again.t == 1.25
    snaps = []
    traj = lattice.run(s, 1.0, 0.01, HARD, stride=50, snapshots=snaps, snapshot_stride=25)
    assert len(snaps) == 4 and LatticeState.load(snaps[-1]).t == pytest.approx(2.25)
    lines = traj.to_csv().splitlines()
    assert lines[0] == "t,energy,momentum,shape_error,shift"
    assert len(lines) == 1 + len(traj.records) == 4


def test_pulse_travels_at_wave_speed(profile_004, even_spec, critical):
    from fpu_pulses import verify

    lo, _ = profile_004.support()
    traj = verify.pulse_run(profile_004, even_spec, 2048, 10.0, 0.005, -lo + 8.0, k0=critical.k0)
    assert np.max(traj.column("shape_error")) < 1e-4
    assert lattice.fitted_speed(traj) == pytest.approx(profile_004.c, rel=1e-4)
