"""Explicit small-amplitude pulse profiles and their NLS approximation error."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .dispersion import CriticalData, unfold
from .errors import DomainTooSmall, GridTooCoarse, ParameterSignError
from .normalform import NormalFormCoeffs


def nls_soliton(X, gamma: float, nu1: float, nu2: float):
    """Standing soliton ``sqrt(2 gamma/nu2) sech(sqrt(gamma/nu1) X)``."""
    if not (gamma * nu1 > 0.0 and nu1 * nu2 > 0.0):
        raise ParameterSignError(f"need gamma*nu1 > 0 and nu1*nu2 > 0, got gamma={gamma}, nu1={nu1}, nu2={nu2}")
    return math.sqrt(2.0 * gamma / nu2) / np.cosh(math.sqrt(gamma / nu1) * np.asarray(X))


@dataclass(frozen=True)
class WaveAnsatz:
    """Reversible homoclinic of the truncated normal form at ``c = c* + eps**2``.

    ``s0`` and ``p0`` are the exact unfolding values at ``c``; ``width`` is
    ``sqrt(s0)`` and ``amplitude_scale`` the peak of the envelope ``r0``.
    """

    epsilon: float
    c: float
    theta: float
    r_coeff: float
    amplitude_scale: float
    width: float
    k0: float
    s0: float
    p0: float
    s_effective: float

    def to_dict(self) -> dict:
        return asdict(self)


def make_ansatz(epsilon: float, critical: CriticalData, coeffs: NormalFormCoeffs, theta: float = 0.0, r_coeff: float = 0.0) -> WaveAnsatz:
    if not epsilon > 0.0:
        raise ValueError("epsilon must be positive")
    if not coeffs.s_effective < 0.0:
        raise ParameterSignError("homoclinic requires s_effective < 0")
    c = critical.c_star + epsilon**2
    s0, p0, _ = unfold(c, critical)
    return WaveAnsatz(
        epsilon=float(epsilon),
        c=float(c),
        theta=float(theta),
        r_coeff=float(r_coeff),
        amplitude_scale=math.sqrt(2.0 * s0 / -coeffs.s_effective),
        width=math.sqrt(s0),
        k0=critical.k0,
        s0=s0,
        p0=p0,
        s_effective=coeffs.s_effective,
    )


def r0_psi0(xi, ansatz: WaveAnsatz):
    """Envelope ``r0`` and phase correction ``psi0`` at ``xi``."""
    xi = np.asarray(xi, dtype=float)
    w = ansatz.width
    r0 = ansatz.amplitude_scale / np.cosh(w * xi)
    psi0 = ansatz.p0 * xi + 2.0 * (ansatz.r_coeff / ansatz.s_effective) * w * np.tanh(w * xi)
    return r0, psi0


def _envelope_derivatives(xi, ansatz, scale=1.0):
    w = ansatz.width
    a = ansatz.amplitude_scale * scale
    sech = 1.0 / np.cosh(w * xi)
    tanh = np.tanh(w * xi)
    r0 = a * sech
    dr0 = -a * w * sech * tanh
    d2r0 = a * w * w * (sech - 2.0 * sech**3)
    return r0, dr0, d2r0


def truncated_nf_residual(ansatz: WaveAnsatz, grid, amplitude_factor: float = 1.0) -> float:
    """Sup over ``grid`` of the residual of the truncated normal form.

    ``amplitude_factor`` scales the envelope, which is only useful to check
    that the residual notices a wrong amplitude.
    """
    if ansatz.r_coeff != 0.0:
        raise ValueError("only the r_coeff = 0 member is certified")
    xi = np.asarray(grid, dtype=float)
    r0, dr0, d2r0 = _envelope_derivatives(xi, ansatz, amplitude_factor)
    k0, p0, s0, s = ansatz.k0, ansatz.p0, ansatz.s0, ansatz.s_effective
    phase = np.exp(1j * ((k0 + p0) * xi + ansatz.theta))
    A = r0 * phase
    B = dr0 * phase
    dA = (dr0 + 1j * (k0 + p0) * r0) * phase
    dB = (d2r0 + 1j * (k0 + p0) * dr0) * phase
    res_a = np.abs(dA - 1j * k0 * A - B - 1j * A * p0)
    res_b = np.abs(dB - 1j * k0 * B - 1j * B * p0 - A * (s0 + s * r0**2))
    return float(np.max(res_a + res_b))


def leading_profile(xi, ansatz: WaveAnsatz):
    """Real leading-order traveling-wave profile ``2 r0 cos(k0 xi + psi0 + theta)``."""
    r0, psi0 = r0_psi0(xi, ansatz)
    return 2.0 * r0 * np.cos(ansatz.k0 * np.asarray(xi) + psi0 + ansatz.theta)


def leading_profile_derivative(xi, ansatz: WaveAnsatz):
    xi = np.asarray(xi, dtype=float)
    w = ansatz.width
    r0, dr0, _ = _envelope_derivatives(xi, ansatz)
    _, psi0 = r0_psi0(xi, ansatz)
    dpsi0 = ansatz.p0 + 2.0 * (ansatz.r_coeff / ansatz.s_effective) * w * w / np.cosh(w * xi) ** 2
    arg = ansatz.k0 * xi + psi0 + ansatz.theta
    return 2.0 * dr0 * np.cos(arg) - 2.0 * r0 * np.sin(arg) * (ansatz.k0 + dpsi0)


class AnsatzProfile:
    """Callable profile ``v(xi)`` with an analytic ``derivative``."""

    def __init__(self, ansatz: WaveAnsatz):
        self.ansatz = ansatz

    def __call__(self, xi):
        return leading_profile(xi, self.ansatz)

    def derivative(self, xi):
        return leading_profile_derivative(xi, self.ansatz)


def lattice_initial_data(profile, c: float, n_sites: int, x0: float, derivative=None):
    """Lattice displacements ``q_n = v(n - x0)`` and velocities ``-c v'(n - x0)``.

    ``profile`` is either a solved profile (anything with ``on_lattice``) or
    a callable; callables need a ``derivative`` attribute or the
    ``derivative`` argument.
    """
    if hasattr(profile, "on_lattice"):
        lo, hi = profile.support()
        if x0 + lo < 0.0 or x0 + hi > n_sites - 1:
            raise DomainTooSmall(
                f"profile window [{lo:.1f}, {hi:.1f}] shifted by x0={x0} does not fit in {n_sites} sites"
            )
        q, dq = profile.on_lattice(x0, n_sites)
        return q, -c * dq
    n = np.arange(n_sites, dtype=float)
    deriv = derivative if derivative is not None else getattr(profile, "derivative", None)
    if deriv is None:
        raise ValueError("callable profiles need an analytic derivative")
    q = np.asarray(profile(n - x0), dtype=float) * np.ones(n_sites)
    qdot = -c * np.asarray(deriv(n - x0), dtype=float) * np.ones(n_sites)
    return q, qdot


def comparison_wave(xi, epsilon: float, critical: CriticalData, coeffs: NormalFormCoeffs, centre: float = 0.0, phase: float = 0.0):
    """``eps A_hom(eps xi) exp(i k0 xi) + c.c.`` about ``centre`` with carrier phase ``phase``."""
    x = np.asarray(xi, dtype=float) - centre
    env = epsilon * nls_soliton(epsilon * x, coeffs.gamma, coeffs.nu1, coeffs.nu2)
    return 2.0 * env * np.cos(critical.k0 * x + phase)


def _aligned_error(xi, v, epsilon, critical, coeffs):
    peak = np.max(np.abs(v))
    if peak == 0.0:
        # every family member is equally far away: the comparison peak
        centre = 0.5 * (xi[0] + xi[-1])
        return 2.0 * epsilon * math.sqrt(2.0 * coeffs.gamma / coeffs.nu2), centre, 0.0
    weight = v * v
    centre = float(np.sum(xi * weight) / np.sum(weight))
    x = xi - centre
    env = epsilon * nls_soliton(epsilon * x, coeffs.gamma, coeffs.nu1, coeffs.nu2)
    # correlation-maximising carrier phase
    basis = np.stack([env * np.cos(critical.k0 * x), -env * np.sin(critical.k0 * x)], axis=1)
    coef, *_ = np.linalg.lstsq(basis, v, rcond=None)
    phase = math.atan2(coef[1], coef[0])
    err = np.max(np.abs(v - comparison_wave(xi, epsilon, critical, coeffs, centre, phase)))
    return float(err), centre, phase


def nls_error(v, epsilon: float, critical: CriticalData, coeffs: NormalFormCoeffs, xi=None) -> float:
    """Sup distance between a profile and the phase-aligned NLS comparison wave.

    ``v`` is either a solved profile (resampled spectrally to a fine grid) or
    an array sampled at ``xi``.
    """
    if hasattr(v, "fine_samples"):
        xi, values = v.fine_samples(points_per_unit=32)
    else:
        values = np.asarray(v, dtype=float)
        xi = np.asarray(xi, dtype=float)
        if values.shape != xi.shape:
            raise ValueError("v and xi must have the same shape")
    h = xi[1] - xi[0]
    if 2.0 * math.pi / (critical.k0 * h) < 16.0:
        raise GridTooCoarse(f"grid spacing {h:.3g} resolves the carrier with fewer than 16 points")
    err, _, _ = _aligned_error(xi, values, epsilon, critical, coeffs)
    return err
