"""Fourier-collocation Newton solver for the traveling-wave equation.

The advance-delay equation

    c**2 v''(xi) = W1'(v(xi+1) - v(xi)) - W1'(v(xi) - v(xi-1))
                 + W2'(v(xi+2) - v(xi)) - W2'(v(xi) - v(xi-2))

is posed on a periodic window of length ``L`` sampled at ``N`` points,
``xi_j = (j - N/2) L/N``.  Derivatives and shifts act on Fourier
coefficients.  The two continuous symmetries (``v -> v + const`` and
translation in ``xi``) are removed by a mean-zero constraint and a phase
condition against the initial guess, each paired with a scalar multiplier
in a bordered Newton system.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.integrate import simpson
from scipy.sparse.linalg import LinearOperator, gmres

from . import dispersion
from .dispersion import CriticalData
from .errors import (
    ExistenceConditionViolated,
    GridTooCoarse,
    NonPowerOfTwo,
    NoConvergence,
    TailNotResolved,
    WindowTooSmall,
)
from .normalform import NormalFormCoeffs, sign_condition
from .potentials import PotentialSpec, w1_prime, w1_second, w2_prime, w2_second
from .waves import leading_profile, leading_profile_derivative, make_ansatz

log = logging.getLogger(__name__)

SHIFTS = (1, 2)


@dataclass
class SolverConfig:
    n_modes: int = 4096
    domain_length: float | None = None  # None: window policy below
    window_factor: float = 48.0  # L >= window_factor / width
    min_window: float = 64.0
    tol: float = 1e-10
    max_iter: int = 25
    max_halvings: int = 8
    dense_limit: int = 4096
    cond_limit: float = 1e12
    gmres_rtol: float = 1e-13
    theta: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def _check_grid(n: int, L: float) -> None:
    if n < 2 or n & (n - 1):
        raise NonPowerOfTwo(f"number of modes must be a power of two, got {n}")
    if not L > 8.0:
        raise WindowTooSmall(f"window length {L} must exceed 8")


@functools.lru_cache(maxsize=8)
def _wavenumbers(n: int, L: float) -> np.ndarray:
    return 2.0 * np.pi * np.fft.rfftfreq(n, d=L / n)


def grid(n: int, L: float) -> np.ndarray:
    return (np.arange(n) - n // 2) * (L / n)


def spectral_shift(v, s: float, L: float):
    """``v(xi + s)`` by trigonometric interpolation."""
    n = v.shape[-1]
    kappa = _wavenumbers(n, L)
    return np.fft.irfft(np.fft.rfft(v) * np.exp(1j * kappa * s), n=n)


def spectral_derivative(v, L: float, order: int = 1):
    n = v.shape[-1]
    kappa = _wavenumbers(n, L)
    vhat = np.fft.rfft(v) * (1j * kappa) ** order
    if order % 2 == 1 and n % 2 == 0:
        vhat[-1] = 0.0  # odd derivatives of the Nyquist mode are not real
    return np.fft.irfft(vhat, n=n)


def _force_terms(v, L, spec):
    """Differences ``d_h = v(.+h) - v`` and the net nonlinear force ``G(v)``."""
    n = v.size
    kappa = _wavenumbers(n, L)
    vhat = np.fft.rfft(v)
    diffs = {}
    ghat = np.zeros_like(vhat)
    for h, wp in zip(SHIFTS, (w1_prime, w2_prime)):
        d = np.fft.irfft(vhat * (np.exp(1j * kappa * h) - 1.0), n=n)
        diffs[h] = d
        ghat += np.fft.rfft(wp(d, spec)) * (1.0 - np.exp(-1j * kappa * h))
    return diffs, ghat, vhat, kappa


def residual(v, c: float, L: float, spec: PotentialSpec):
    """Traveling-wave residual ``c**2 v'' - G(v)`` on the grid."""
    v = np.asarray(v, dtype=float)
    _check_grid(v.size, L)
    _, ghat, vhat, kappa = _force_terms(v, L, spec)
    return np.fft.irfft(-(c * c) * kappa**2 * vhat - ghat, n=v.size)


def points_per_unit(n: int, L: float) -> int | None:
    """Integer grid points per lattice spacing, or None if shifts are not rolls."""
    ppu = n / L
    r = round(ppu)
    return int(r) if r >= 1 and abs(ppu - r) < 1e-9 * ppu else None


@functools.lru_cache(maxsize=2)
def _second_derivative_matrix(n: int, L: float) -> np.ndarray:
    kappa = _wavenumbers(n, L)
    col = np.fft.irfft(-(kappa**2), n=n)
    return sla.circulant(col)


def jacobian_dense(v, c, L, spec):
    """Dense Jacobian of ``residual``; needs an integer number of points per unit."""
    n = v.size
    ppu = points_per_unit(n, L)
    if ppu is None:
        raise ValueError("dense Jacobian needs N/L to be an integer")
    J = (c * c) * _second_derivative_matrix(n, L)
    idx = np.arange(n)
    for h, wpp in zip(SHIFTS, (w1_second, w2_second)):
        m = h * ppu
        d = np.roll(v, -m) - v
        w = wpp(d, spec)
        # (S - I)^T diag(w) (S - I) with (S v)_j = v_{j+m}
        J[idx, idx] += w + np.roll(w, m)
        J[idx, (idx + m) % n] -= w
        J[(idx + m) % n, idx] -= w
    return J


def jacobian_apply(v, c, L, spec):
    """Matrix-free Jacobian action ``x -> J(v) x``."""
    n = v.size
    diffs, _, _, kappa = _force_terms(v, L, spec)
    curv = {h: wpp(diffs[h], spec) for h, wpp in zip(SHIFTS, (w1_second, w2_second))}

    def apply(x):
        xhat = np.fft.rfft(x)
        out = -(c * c) * kappa**2 * xhat
        for h in SHIFTS:
            dx = np.fft.irfft(xhat * (np.exp(1j * kappa * h) - 1.0), n=n)
            out -= np.fft.rfft(curv[h] * dx) * (1.0 - np.exp(-1j * kappa * h))
        return np.fft.irfft(out, n=n)

    return apply


@dataclass
class ProfileSolution:
    epsilon: float
    c: float
    domain_length: float
    n_modes: int
    v: np.ndarray
    residual_norm: float
    first_integral_drift: float = 0.0
    symmetry_defect: float = 0.0
    newton_iterations: int = 0
    potential: PotentialSpec = field(default_factory=PotentialSpec)
    residual_history: list = field(default_factory=list)
    least_squares_steps: int = 0
    multipliers: tuple = (0.0, 0.0)
    ansatz: dict = field(default_factory=dict)

    @property
    def xi(self) -> np.ndarray:
        return grid(self.n_modes, self.domain_length)

    @property
    def h(self) -> float:
        return self.domain_length / self.n_modes

    def derivative(self, order: int = 1) -> np.ndarray:
        return spectral_derivative(self.v, self.domain_length, order)

    def amplitude(self) -> float:
        return float(np.max(np.abs(self.v)))

    def mean(self) -> float:
        return float(np.mean(self.v))

    def tail_ratio(self, fraction: float = 0.1, gauge: bool = True) -> float:
        """Size of ``v`` on the outer ``fraction`` of the window relative to ``max |v|``.

        With ``gauge`` the common tail level is subtracted first: the pulse
        has a small nonzero integral, and the mean-zero gauge turns it into a
        constant offset ``-integral/L`` of both tails.
        """
        peak = self.amplitude()
        if peak == 0.0:
            return 0.0
        m = max(1, int(round(0.5 * fraction * self.n_modes)))
        tails = np.concatenate([self.v[:m], self.v[-m:]])
        level = np.mean(tails) if gauge else 0.0
        return float(np.max(np.abs(tails - level)) / peak)

    def support(self):
        return -0.5 * self.domain_length, 0.5 * self.domain_length - self.h

    def evaluate(self, x, derivative: bool = False):
        """Trigonometric interpolant (or its derivative) at arbitrary points."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        n, L = self.n_modes, self.domain_length
        kappa = _wavenumbers(n, L)
        vhat = np.fft.rfft(self.v) / n
        weights = np.full(kappa.size, 2.0)
        weights[0] = 1.0
        if n % 2 == 0:
            weights[-1] = 1.0
        coef = weights * vhat
        if derivative:
            coef = coef * 1j * kappa
            if n % 2 == 0:
                coef[-1] = 0.0
        out = np.empty(x.size)
        x0 = -0.5 * L
        for start in range(0, x.size, 256):
            chunk = x[start : start + 256]
            out[start : start + 256] = np.real(np.exp(1j * np.outer(chunk - x0, kappa)) @ coef)
        return out

    def on_lattice(self, x0: float, n_sites: int):
        """``v(n - x0)`` and ``v'(n - x0)`` for ``n = 0 .. n_sites-1``, zero outside the window."""
        n_idx = np.arange(n_sites)
        x = n_idx - x0
        lo, hi = self.support()
        inside = (x >= lo) & (x <= hi)
        q = np.zeros(n_sites)
        dq = np.zeros(n_sites)
        ppu = points_per_unit(self.n_modes, self.domain_length)
        if ppu is None:
            q[inside] = self.evaluate(x[inside])
            dq[inside] = self.evaluate(x[inside], derivative=True)
            return q, dq
        m0 = math.floor(x0)
        frac = x0 - m0
        shifted = spectral_shift(self.v, -frac, self.domain_length)
        dshifted = spectral_derivative(shifted, self.domain_length)
        j = (n_idx - m0) * ppu + self.n_modes // 2
        ok = inside & (j >= 0) & (j < self.n_modes)
        q[ok] = shifted[j[ok]]
        dq[ok] = dshifted[j[ok]]
        return q, dq

    def fine_samples(self, points_per_unit: int = 32):
        """Spectrally upsampled copy on a grid with at least ``points_per_unit`` per unit."""
        factor = 1
        while self.n_modes * factor / self.domain_length < points_per_unit:
            factor *= 2
        n_fine = self.n_modes * factor
        vhat = np.fft.rfft(self.v)
        padded = np.zeros(n_fine // 2 + 1, dtype=complex)
        padded[: vhat.size] = vhat
        if self.n_modes % 2 == 0:
            padded[vhat.size - 1] *= 0.5
        values = np.fft.irfft(padded, n=n_fine) * factor
        return grid(n_fine, self.domain_length), values

    def header(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "c": self.c,
            "domain_length": self.domain_length,
            "n_modes": self.n_modes,
            "residual_norm": self.residual_norm,
            "first_integral_drift": self.first_integral_drift,
            "symmetry_defect": self.symmetry_defect,
            "newton_iterations": self.newton_iterations,
            "least_squares_steps": self.least_squares_steps,
            "residual_history": list(self.residual_history),
            "multipliers": list(self.multipliers),
            "potential": self.potential.to_dict(),
            "ansatz": self.ansatz,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["xi", "v"])
        for x, y in zip(self.xi, self.v):
            writer.writerow([f"{x:.17g}", f"{y:.17g}"])
        return buf.getvalue()

    @classmethod
    def from_files(cls, header_text: str, csv_text: str) -> "ProfileSolution":
        head = json.loads(header_text)
        lines = [ln for ln in csv_text.splitlines() if ln and not ln.startswith("#")]
        rows = list(csv.reader(lines))[1:]
        v = np.array([float(r[1]) for r in rows])
        return cls(
            epsilon=head["epsilon"],
            c=head["c"],
            domain_length=head["domain_length"],
            n_modes=head["n_modes"],
            v=v,
            residual_norm=head["residual_norm"],
            first_integral_drift=head.get("first_integral_drift", 0.0),
            symmetry_defect=head.get("symmetry_defect", 0.0),
            newton_iterations=head.get("newton_iterations", 0),
            potential=PotentialSpec.from_dict(head.get("potential", {})),
            residual_history=head.get("residual_history", []),
            least_squares_steps=head.get("least_squares_steps", 0),
            multipliers=tuple(head.get("multipliers", (0.0, 0.0))),
            ansatz=head.get("ansatz", {}),
        )


def window_length(width: float, n_modes: int, config: SolverConfig) -> float:
    """Window satisfying the tail policy, rounded so that N/L is an integer."""
    if config.domain_length is not None:
        return float(config.domain_length)
    L_min = max(config.window_factor / width, config.min_window)
    ppu = math.floor(n_modes / L_min)
    if ppu < 2:
        raise GridTooCoarse(
            f"N={n_modes} gives fewer than 2 points per lattice unit on a window of length {L_min:.1f}"
        )
    return n_modes / ppu


def _bordered_residual(v, mu, c, L, spec, guess, dguess):
    F = residual(v, c, L, spec)
    full = F + mu[0] + mu[1] * dguess
    mean_eq = np.mean(v)
    phase_eq = np.dot(v - guess, dguess) / np.dot(dguess, dguess)
    return F, np.concatenate([full, [mean_eq, phase_eq]])


def _newton_step_dense(v, c, L, spec, dguess, rhs, config):
    n = v.size
    gnorm = np.dot(dguess, dguess)
    A = np.zeros((n + 2, n + 2))
    A[:n, :n] = jacobian_dense(v, c, L, spec)
    A[:n, n] = 1.0
    A[:n, n + 1] = dguess
    A[n, :n] = 1.0 / n
    A[n + 1, :n] = dguess / gnorm
    anorm = np.max(np.sum(np.abs(A), axis=0))
    lu, piv, info = sla.lapack.dgetrf(A)
    rcond = 0.0
    if info == 0:
        rcond, _ = sla.lapack.dgecon(lu, anorm, norm="1")
    if info != 0 or rcond < 1.0 / config.cond_limit:
        log.warning("bordered Jacobian ill-conditioned (rcond=%.2e); taking a least-squares step", rcond)
        step, *_ = np.linalg.lstsq(A, -rhs, rcond=None)
        return step, True
    step, _ = sla.lapack.dgetrs(lu, piv, -rhs)
    return step, False


def _newton_step_krylov(v, c, L, spec, dguess, rhs, config):
    n = v.size
    gnorm = np.dot(dguess, dguess)
    jac = jacobian_apply(v, c, L, spec)
    kappa = _wavenumbers(n, L)
    symbol = dispersion.f_c(kappa, c)
    symbol[0] = 1.0

    def matvec(x):
        dv, mu = x[:n], x[n:]
        top = jac(dv) + mu[0] + mu[1] * dguess
        return np.concatenate([top, [np.mean(dv), np.dot(dv, dguess) / gnorm]])

    def precond(r):
        top = r[:n]
        rhat = np.fft.rfft(top)
        mean_part = rhat[0].real / n
        rhat[0] = 0.0
        dv = np.fft.irfft(rhat / symbol, n=n) + r[n]
        return np.concatenate([dv, [mean_part, r[n + 1]]])

    A = LinearOperator((n + 2, n + 2), matvec=matvec, dtype=float)
    M = LinearOperator((n + 2, n + 2), matvec=precond, dtype=float)
    # absolute floor: late Newton steps have right-hand sides near rounding level
    step, info = gmres(A, -rhs, M=M, rtol=config.gmres_rtol, atol=1e-2 * config.tol, restart=200, maxiter=20)
    if info != 0:
        log.warning("GMRES did not reach rtol=%.1e (info=%d)", config.gmres_rtol, info)
    return step, False


def newton(v0, c, L, spec, config: SolverConfig, guess=None):
    """Bordered Newton iteration from ``v0``; returns ``(v, mu, history, n_iter, n_lstsq)``."""
    n = v0.size
    _check_grid(n, L)
    guess = v0.copy() if guess is None else guess
    dguess = spectral_derivative(guess, L)
    dense = n <= config.dense_limit and points_per_unit(n, L) is not None
    step_fn = _newton_step_dense if dense else _newton_step_krylov

    v = v0 - np.mean(v0)
    mu = np.zeros(2)
    F, full = _bordered_residual(v, mu, c, L, spec, guess, dguess)
    history = [float(np.max(np.abs(F)))]
    n_lstsq = 0
    for it in range(1, config.max_iter + 1):
        if history[-1] < config.tol and np.max(np.abs(full)) < config.tol:
            return v, mu, history, it - 1, n_lstsq
        step, used_lstsq = step_fn(v, c, L, spec, dguess, full, config)
        n_lstsq += used_lstsq
        merit = np.max(np.abs(full))
        t = 1.0
        for _ in range(config.max_halvings + 1):
            v_try = v + t * step[:n]
            mu_try = mu + t * step[n:]
            F_try, full_try = _bordered_residual(v_try, mu_try, c, L, spec, guess, dguess)
            if np.max(np.abs(full_try)) < merit:
                break
            t *= 0.5
        v, mu, F, full = v_try, mu_try, F_try, full_try
        history.append(float(np.max(np.abs(F))))
        log.debug("newton it=%d |F|=%.3e t=%.3g", it, history[-1], t)
    if history[-1] < config.tol and np.max(np.abs(full)) < config.tol:
        return v, mu, history, config.max_iter, n_lstsq
    raise NoConvergence(f"Newton did not reach {config.tol:.1e} in {config.max_iter} iterations", trace=history)


def _p_nodes(per_unit: int, lo: float, hi: float):
    return np.linspace(lo, hi, int(round((hi - lo) * per_unit)) + 1)


def first_integral_on_grid(sol: ProfileSolution, per_unit: int = 64) -> np.ndarray:
    """First integral ``I1`` at every grid point of the solution."""
    L, v, c, spec = sol.domain_length, sol.v, sol.c, sol.potential
    p = _p_nodes(per_unit, -2.0, 2.0)
    shifted = np.stack([spectral_shift(v, s, L) for s in p])  # row i: v(xi + p_i)
    index = {round(s * per_unit): i for i, s in enumerate(p)}

    def integral(h, wp):
        ps = _p_nodes(per_unit, 0.0, float(h))
        rows = [shifted[index[round(s * per_unit)]] - shifted[index[round((s - h) * per_unit)]] for s in ps]
        return simpson(wp(np.stack(rows), spec), x=ps, axis=0)

    y = spectral_derivative(v, L)
    return (c * c * y - integral(1, w1_prime) - integral(2, w2_prime)) / (c * c - 1.0)


def first_integral(sol: ProfileSolution, xi_samples=None):
    """``I1`` along the profile at ``xi_samples`` (default: interior 80% of the grid) and its drift."""
    values_grid = first_integral_on_grid(sol)
    xi = sol.xi
    if xi_samples is None:
        inner = np.abs(xi) <= 0.4 * sol.domain_length
        values = values_grid[inner]
    else:
        xi_samples = np.asarray(xi_samples, dtype=float)
        if np.any(np.abs(xi_samples) > 0.4 * sol.domain_length):
            raise ValueError("samples must lie in the interior 80% of the window")
        tmp = ProfileSolution(sol.epsilon, sol.c, sol.domain_length, sol.n_modes, values_grid, 0.0)
        values = tmp.evaluate(xi_samples)
    drift = float(np.max(values) - np.min(values)) if values.size else 0.0
    return values, drift


def symmetry_defect(sol_or_v) -> float:
    """Even-reflection defect about the best grid (or half-grid) centre, relative to ``max |v|``."""
    v = np.asarray(getattr(sol_or_v, "v", sol_or_v), dtype=float)
    peak = np.max(np.abs(v))
    if peak == 0.0:
        return 0.0
    n = v.size
    k = np.arange(n)
    best = math.inf
    for j0 in range(n):
        best = min(best, np.max(np.abs(v[(j0 + k) % n] - v[(j0 - k) % n])))
        best = min(best, np.max(np.abs(v[(j0 + k) % n] - v[(j0 - 1 - k) % n])))
        if best == 0.0:
            break
    return float(best / peak)


def _fast_symmetry_defect(v) -> float:
    """Same as ``symmetry_defect`` but only tries centres near the envelope peak."""
    peak = np.max(np.abs(v))
    if peak == 0.0:
        return 0.0
    n = v.size
    k = np.arange(n)
    w = v * v
    centre = int(round(np.angle(np.sum(w * np.exp(2j * np.pi * k / n))) / (2 * np.pi) * n)) % n
    best = math.inf
    for j0 in range(centre - 64, centre + 65):
        best = min(best, np.max(np.abs(v[(j0 + k) % n] - v[(j0 - k) % n])))
        best = min(best, np.max(np.abs(v[(j0 + k) % n] - v[(j0 - 1 - k) % n])))
    return float(best / peak)


def chi_diagnostics(sol: ProfileSolution, xi: float, per_unit: int = 64):
    """Zero-mode projections of ``(v(xi), v'(xi), p -> v(xi + p))`` at ``c = sol.c``."""
    p = _p_nodes(per_unit, -2.0, 2.0)
    U = sol.evaluate(xi + p)
    z = float(sol.evaluate(xi)[0])
    y = float(sol.evaluate(xi, derivative=True)[0])
    return dispersion.chi0(z, y, U, sol.c), dispersion.chi1(z, y, U, sol.c)


def _finalise(sol: ProfileSolution) -> ProfileSolution:
    if sol.amplitude() > 0.0:
        _, sol.first_integral_drift = first_integral(sol)
        sol.symmetry_defect = _fast_symmetry_defect(sol.v)
    return sol


def solve(epsilon, critical: CriticalData, coeffs: NormalFormCoeffs, spec: PotentialSpec, config: SolverConfig | None = None, seed=None, domain_length: float | None = None) -> ProfileSolution:
    """Localised traveling-wave profile at ``c = c* + epsilon**2``.

    Newton starts from the leading-order profile (or ``seed``) with carrier
    phase ``config.theta``.
    """
    config = config or SolverConfig()
    if not spec.is_even():
        raise ValueError("the periodic solver handles even potentials only (a1 = a2 = 0)")
    if not sign_condition(critical, spec):
        raise ExistenceConditionViolated(f"sign condition fails for {spec}")
    n = config.n_modes
    c = critical.c_star + epsilon**2
    if epsilon == 0.0:
        L = domain_length or config.domain_length or config.min_window
        _check_grid(n, L)
        return ProfileSolution(0.0, c, L, n, np.zeros(n), 0.0, potential=spec)

    ansatz = make_ansatz(epsilon, critical, coeffs, theta=config.theta)
    L = domain_length or window_length(ansatz.width, n, config)
    _check_grid(n, L)
    # guard against the leading-order width eps*sqrt(s0'), as the window policy is stated
    nominal = 40.0 / (epsilon * math.sqrt(critical.s0_prime))
    if L < nominal * (1.0 - 1e-12):
        raise TailNotResolved(f"window {L:.1f} < 40/width = {nominal:.1f} at epsilon={epsilon}")
    xi = grid(n, L)
    guess = leading_profile(xi, ansatz)
    guess -= np.mean(guess)
    start = guess if seed is None else np.asarray(seed, dtype=float)

    v, mu, history, n_iter, n_lstsq = newton(start, c, L, spec, config, guess=guess)
    sol = ProfileSolution(
        epsilon=float(epsilon),
        c=float(c),
        domain_length=float(L),
        n_modes=n,
        v=v,
        residual_norm=history[-1],
        newton_iterations=n_iter,
        potential=spec,
        residual_history=history,
        least_squares_steps=n_lstsq,
        multipliers=(float(mu[0]), float(mu[1])),
        ansatz=ansatz.to_dict(),
    )
    return _finalise(sol)


def continuation(eps_list, critical, coeffs, spec, config: SolverConfig | None = None, seeding: bool = True):
    """Solve along an ascending list of epsilons.

    Every epsilon gets its own window from the tail policy.  With ``seeding``
    the Newton start for the next epsilon is its own leading-order profile
    plus the previous solution's deviation from its leading-order profile,
    rescaled by the ratio of leading-order amplitudes and carried over to the
    new grid by trigonometric interpolation.  Without seeding every epsilon
    starts from its own ansatz, so the results do not depend on the order.
    """
    config = config or SolverConfig()
    eps = [float(e) for e in eps_list]
    if not eps:
        raise ValueError("empty epsilon list")
    if any(b <= a for a, b in zip(eps, eps[1:])):
        raise ValueError("epsilon list must be strictly ascending")
    out = []
    prev = None
    for e in eps:
        seed = None
        if seeding and prev is not None and prev.epsilon > 0.0 and e > 0.0:
            seed = _continuation_seed(prev, e, critical, coeffs, config)
        try:
            sol = solve(e, critical, coeffs, spec, config, seed=seed)
        except NoConvergence as exc:
            raise NoConvergence(f"continuation failed at epsilon={e}: {exc}", trace=exc.trace) from exc
        out.append(sol)
        prev = sol
    return out


def _continuation_seed(prev: ProfileSolution, eps: float, critical, coeffs, config: SolverConfig):
    nxt = make_ansatz(eps, critical, coeffs, theta=config.theta)
    L = window_length(nxt.width, config.n_modes, config)
    xi = grid(config.n_modes, L)
    prev_ansatz = make_ansatz(prev.epsilon, critical, coeffs, theta=config.theta)
    prev_guess = leading_profile(prev.xi, prev_ansatz)
    deviation = ProfileSolution(prev.epsilon, prev.c, prev.domain_length, prev.n_modes, prev.v - prev_guess + np.mean(prev_guess), 0.0)
    lo, hi = deviation.support()
    carried = np.zeros_like(xi)
    inside = (xi >= lo) & (xi <= hi)
    carried[inside] = deviation.evaluate(xi[inside])
    ratio = nxt.amplitude_scale / prev_ansatz.amplitude_scale
    return leading_profile(xi, nxt) + ratio * carried
