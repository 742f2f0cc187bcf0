"""Direct simulation of the periodic NN/NNN chain with velocity Verlet."""

from __future__ import annotations

import csv
import io
import math
import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import BlowUp
from .potentials import PotentialSpec, w1, w1_prime, w2, w2_prime

BLOWUP_LIMIT = 1e6
MAX_DT = 0.05


def pairwise_sum(x) -> float:
    """Sum by a fixed balanced binary tree, independent of memory layout."""
    a = np.asarray(x, dtype=float).ravel()
    if a.size == 0:
        return 0.0
    size = 1 << (a.size - 1).bit_length()
    a = np.concatenate([a, np.zeros(size - a.size)])
    while a.size > 1:
        a = a[0::2] + a[1::2]
    return float(a[0])


@dataclass
class LatticeState:
    q: np.ndarray
    p: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.p = np.asarray(self.p, dtype=float)
        if self.q.shape != self.p.shape or self.q.ndim != 1:
            raise ValueError("q and p must be 1-d arrays of equal length")
        if self.q.size < 8:
            raise ValueError("the ring needs at least 8 sites for range-2 coupling")
        if not (np.all(np.isfinite(self.q)) and np.all(np.isfinite(self.p))):
            raise ValueError("state contains non-finite entries")

    @property
    def n_sites(self) -> int:
        return self.q.size

    def copy(self) -> "LatticeState":
        return LatticeState(self.q.copy(), self.p.copy(), self.t)

    def dump(self) -> bytes:
        """Little-endian snapshot: ``n_sites`` (int64), ``t`` (float64), then q and p."""
        head = struct.pack("<qd", self.n_sites, self.t)
        return head + self.q.astype("<f8").tobytes() + self.p.astype("<f8").tobytes()

    @classmethod
    def load(cls, blob: bytes) -> "LatticeState":
        n, t = struct.unpack_from("<qd", blob)
        body = np.frombuffer(blob, dtype="<f8", offset=16)
        return cls(body[:n].copy(), body[n : 2 * n].copy(), t)


def forces(q, spec: PotentialSpec):
    """Net force on every site of the ring."""
    f1 = w1_prime(np.roll(q, -1) - q, spec)
    f2 = w2_prime(np.roll(q, -2) - q, spec)
    return f1 - np.roll(f1, 1) + f2 - np.roll(f2, 2)


def step_verlet(state: LatticeState, dt: float, spec: PotentialSpec) -> LatticeState:
    p_half = state.p + 0.5 * dt * forces(state.q, spec)
    q_new = state.q + dt * p_half
    p_new = p_half + 0.5 * dt * forces(q_new, spec)
    return LatticeState(q_new, p_new, state.t + dt)


def energy(state: LatticeState, spec: PotentialSpec) -> float:
    q = state.q
    dens = 0.5 * state.p**2 + w1(np.roll(q, -1) - q, spec) + w2(np.roll(q, -2) - q, spec)
    return pairwise_sum(dens)


def momentum(state: LatticeState) -> float:
    return pairwise_sum(state.p)


@dataclass
class Trajectory:
    records: list = field(default_factory=list)
    final: LatticeState | None = None

    def column(self, name):
        return np.array([r.get(name, np.nan) for r in self.records])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        cols = ["t", "energy", "momentum", "shape_error", "shift"]
        writer.writerow(cols)
        for r in self.records:
            writer.writerow([f"{r.get(c, float('nan')):.17g}" for c in cols])
        return buf.getvalue()


def run(state0: LatticeState, T: float, dt: float, spec: PotentialSpec, observers=(), stride: int = 100, snapshots=None, snapshot_stride: int = 0) -> Trajectory:
    """Integrate to time ``T``.

    Each observer is called as ``obs(state)`` every ``stride`` steps (and at
    both ends) and returns a dict merged into that record.  Energy and
    momentum are always recorded.  ``snapshots`` (a list) collects binary
    dumps every ``snapshot_stride`` steps when given.
    """
    if T < 0.0:
        raise ValueError("T must be non-negative")
    if not 0.0 < dt <= MAX_DT:
        raise ValueError(f"dt must lie in (0, {MAX_DT}]")
    n_steps = int(round(T / dt))
    if abs(n_steps * dt - T) > 1e-9 * max(1.0, T):
        raise ValueError("T must be an integer multiple of dt")

    def record(st):
        rec = {"t": st.t, "energy": energy(st, spec), "momentum": momentum(st)}
        for obs in observers:
            rec.update(obs(st))
        return rec

    traj = Trajectory()
    q, p = state0.q.copy(), state0.p.copy()
    t0 = state0.t
    traj.records.append(record(state0))
    with np.errstate(over="ignore", invalid="ignore"):  # runaway growth is reported as BlowUp
        _integrate(q, p, t0, n_steps, dt, spec, stride, traj, record, snapshots, snapshot_stride)
    traj.final = LatticeState(q, p, t0 + n_steps * dt)
    return traj


def _integrate(q, p, t0, n_steps, dt, spec, stride, traj, record, snapshots, snapshot_stride):
    f = forces(q, spec)
    for i in range(1, n_steps + 1):
        p += 0.5 * dt * f
        q += dt * p
        f = forces(q, spec)
        p += 0.5 * dt * f
        if i % stride == 0 or i == n_steps or (snapshots is not None and snapshot_stride and i % snapshot_stride == 0):
            if not np.max(np.abs(q)) < BLOWUP_LIMIT:
                raise BlowUp(f"max |q| exceeded {BLOWUP_LIMIT:g} at t={t0 + i * dt:.4g}")
            st = LatticeState(q.copy(), p.copy(), t0 + i * dt)
            if i % stride == 0 or i == n_steps:
                traj.records.append(record(st))
            if snapshots is not None and snapshot_stride and i % snapshot_stride == 0:
                snapshots.append(st.dump())


def _profile_on_chain(profile, sigma, n_sites):
    if hasattr(profile, "on_lattice"):
        return profile.on_lattice(sigma, n_sites)[0]
    return np.asarray(profile(np.arange(n_sites) - sigma), dtype=float)


def _profile_peak(profile):
    if hasattr(profile, "on_lattice"):
        return profile.amplitude()
    return float(getattr(profile, "peak", 1.0))


def _centre_estimate(q):
    """Circular centroid of ``q**2`` on the ring."""
    n = q.size
    angle = np.angle(np.sum(q * q * np.exp(2j * np.pi * np.arange(n) / n)))
    return (angle / (2 * np.pi) * n) % n


def shape_error(state: LatticeState, profile, c: float, sigma_guess: float | None = None, carrier_wavenumber: float = 2.18):
    """Relative sup distance from the chain to the best translate of ``profile``.

    Returns ``(err, shift)`` where ``q_n ~ v(n - shift)``.  A coarse scan over
    one carrier period around the envelope centre is refined by golden-section
    search.
    """
    q = state.q
    n = q.size
    peak = _profile_peak(profile)
    if peak == 0.0:
        return float(np.max(np.abs(q))), 0.0
    centre = _centre_estimate(q) if sigma_guess is None else sigma_guess

    def err(sigma):
        return float(np.max(np.abs(q - _profile_on_chain(profile, sigma, n))) / peak)

    period = 2.0 * math.pi / carrier_wavenumber
    trial = centre + np.linspace(-period, period, 81)
    values = [err(s) for s in trial]
    best = int(np.argmin(values))
    step = trial[1] - trial[0]
    sigma, best_err = float(trial[best]), values[best]
    if 0 < best < len(trial) - 1:
        # golden tol is relative to |sigma|; aim for 1e-11 absolute but stay above rounding
        tol = max(1e-11 / max(abs(sigma), 1.0), 8 * np.finfo(float).eps)
        res = minimize_scalar(err, bracket=(trial[best - 1], sigma, trial[best + 1]), method="golden", tol=tol, options={"maxiter": 200})
        if abs(res.x - sigma) <= step and res.fun < best_err:
            sigma, best_err = float(res.x), float(res.fun)
    return best_err, sigma


def standing_wave_frequency(k: float, n_sites: int, amplitude: float, T: float, dt: float, spec: PotentialSpec, site: int = 0) -> float:
    """Angular frequency of a small standing wave ``q_n = A cos(k n)`` from zero crossings."""
    n = np.arange(n_sites)
    q = amplitude * np.cos(k * n)
    p = np.zeros(n_sites)
    n_steps = int(round(T / dt))
    f = forces(q, spec)
    trace = np.empty(n_steps + 1)
    trace[0] = q[site]
    for i in range(1, n_steps + 1):
        p += 0.5 * dt * f
        q += dt * p
        f = forces(q, spec)
        p += 0.5 * dt * f
        trace[i] = q[site]
    t = np.arange(n_steps + 1) * dt
    sign = np.sign(trace)
    idx = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    if idx.size < 3:
        raise ValueError("too few zero crossings; increase T")
    crossings = t[idx] - trace[idx] * dt / (trace[idx + 1] - trace[idx])
    half_period = (crossings[-1] - crossings[0]) / (crossings.size - 1)
    return math.pi / half_period


def fitted_speed(traj: Trajectory) -> float:
    t = traj.column("t")
    s = traj.column("shift")
    ok = np.isfinite(s)
    slope, _ = np.polyfit(t[ok], s[ok], 1)
    return float(slope)
