"""End-to-end acceptance checks shared by the CLI and the test suite."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bvp, dispersion, lattice, waves
from .errors import ExistenceConditionViolated
from .normalform import nls_params, normal_form_coeffs
from .potentials import PotentialSpec

EPS_GRID = (0.02, 0.04, 0.06, 0.08)
PANELS = ((2.9, "above"), (2.743, "critical"), (2.5, "below"))


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"criterion {self.number:2d} [{'PASS' if self.passed else 'FAIL'}] {self.name} ({self.seconds:.2f} s)"

    def to_dict(self) -> dict:
        return asdict(self)


def _timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


def check_critical() -> CriterionResult:
    crit, dt = _timed(dispersion.find_critical)
    c2 = crit.c_star**2
    ok = abs(c2 - 2.743) <= 5e-3 and abs(crit.c_star - 1.656) <= 0.01 and dt < 1.0
    return CriterionResult(1, "critical point", ok, {"c_star": crit.c_star, "c_star_sq": c2, "k0": crit.k0}, dt)


def spectrum_panel(c2: float, critical, regime: str, box=(0.5, 3.0)) -> dict:
    """One panel; ``regime`` is ``above``, ``critical`` or ``below``."""
    eigs, dt = _timed(dispersion.neutral_eigenvalues, math.sqrt(c2), box)
    imag = eigs.imaginary_roots()
    info = {
        "c_sq": c2,
        "count": eigs.count,
        "winding_number": eigs.winding_number,
        "n_imaginary_nonzero": len(imag),
        "seconds": dt,
    }
    ok = eigs.count == eigs.winding_number and dt < 10.0
    if regime == "above":
        ok = ok and len(imag) == 0
    elif regime == "below":
        ok = ok and len(imag) == 4
    else:
        gaps = []
        for sign in (1, -1):
            close, gap = dispersion.clustered_pairs(eigs, complex(0.0, sign * critical.k0))
            gaps.append(gap if len(close) == 2 else math.inf)
        info["pair_gap"] = max(gaps)
        ok = ok and max(gaps) < 1e-3
    info["passed"] = bool(ok)
    return info


def check_spectrum(critical) -> CriterionResult:
    t0 = time.perf_counter()
    panels = [spectrum_panel(c2, critical, regime) for c2, regime in PANELS]
    # the same checks at the computed critical speed, for reference
    at_critical = spectrum_panel(critical.c_star**2, critical, "critical")
    ok = all(p["passed"] for p in panels)
    return CriterionResult(2, "spectral counts", ok, {"panels": panels, "at_computed_critical": at_critical}, time.perf_counter() - t0)


def check_signs(critical) -> CriterionResult:
    margin = 1e-6
    vals = {"d2_sigma": critical.d2_sigma, "sigma_2ik0": critical.sigma_2ik0, "s0_prime": critical.s0_prime}
    ok = vals["d2_sigma"] > margin and vals["sigma_2ik0"] < -margin and vals["s0_prime"] > margin
    return CriterionResult(3, "sign facts", ok, vals)


def check_duality(critical, per_unit: int = 16) -> CriterionResult:
    c = critical.c_star
    p = np.linspace(-2.0, 2.0, 4 * per_unit + 1)
    vectors = {0: (1.0, 0.0, np.ones_like(p)), 1: (0.0, 1.0, p)}
    chis = {0: dispersion.chi0, 1: dispersion.chi1}
    worst = 0.0
    table = {}
    for i, chi in chis.items():
        for j, (z, y, U) in vectors.items():
            val = chi(z, y, U, c)
            table[f"chi{i}(V{j})"] = val
            worst = max(worst, abs(val - (1.0 if i == j else 0.0)))
    return CriterionResult(4, "projection duality", worst < 1e-10, {"values": table, "max_error": worst})


def check_normal_form(critical, coeffs) -> CriterionResult:
    worst = 0.0
    for eps in np.arange(1, 9) * 0.01:
        for theta in (0.0, math.pi):
            an = waves.make_ansatz(eps, critical, coeffs, theta=theta)
            xi = np.linspace(-40.0 / an.width, 40.0 / an.width, 4001)
            worst = max(worst, waves.truncated_nf_residual(an, xi) / an.amplitude_scale)
    return CriterionResult(5, "normal-form identity", worst < 1e-12, {"max_relative_residual": worst})


def solve_family(critical, coeffs, spec, config=None):
    return _timed(bvp.continuation, list(EPS_GRID), critical, coeffs, spec, config)


def check_family(family, seconds) -> CriterionResult:
    rows = []
    ok = seconds < 120.0
    for sol in family:
        row = {
            "epsilon": sol.epsilon,
            "residual": sol.residual_norm,
            "first_integral_drift": sol.first_integral_drift,
            "symmetry_defect": sol.symmetry_defect,
            "tail_ratio": sol.tail_ratio(),
            "newton_iterations": sol.newton_iterations,
        }
        ok = ok and row["residual"] < 1e-10 and row["first_integral_drift"] < 1e-8
        ok = ok and row["symmetry_defect"] < 1e-6 and row["tail_ratio"] < 1e-8
        rows.append(row)
    return CriterionResult(6, "BVP family", bool(ok), {"solutions": rows}, seconds)


def check_nls(family, critical, coeffs) -> CriterionResult:
    ratios = []
    for sol in family:
        err = waves.nls_error(sol, sol.epsilon, critical, coeffs)
        ratios.append(err / (sol.epsilon**2 * abs(math.log(sol.epsilon))))
    spread = max(ratios) / min(ratios)
    return CriterionResult(7, "NLS estimate", spread < 3.0, {"ratios": ratios, "spread": spread})


def pulse_run(profile, spec, n_sites, T, dt, x0, stride_time=1.0, k0=2.18):
    """Seed the chain with ``profile`` and record energy, shape error and shift."""
    q, p = waves.lattice_initial_data(profile, profile.c, n_sites, x0)

    def observer(st):
        err, shift = lattice.shape_error(st, profile, profile.c, sigma_guess=x0 + profile.c * (st.t), carrier_wavenumber=k0)
        return {"shape_error": err, "shift": shift}

    return lattice.run(lattice.LatticeState(q, p), T, dt, spec, [observer], stride=max(1, int(round(stride_time / dt))))


def _energy_drift(traj):
    E = traj.column("energy")
    return float(np.max(np.abs(E - E[0])) / abs(E[0]))


def check_permanence(profile, spec, k0, n_sites=2048, T=50.0, dt=0.005) -> CriterionResult:
    t0 = time.perf_counter()
    lo, _ = profile.support()
    x0 = -lo + 8.0
    traj = pulse_run(profile, spec, n_sites, T, dt, x0, k0=k0)
    fine = lattice.run(
        lattice.LatticeState(*waves.lattice_initial_data(profile, profile.c, n_sites, x0)),
        T, dt / 2, spec, stride=int(round(1.0 / (dt / 2))),
    )
    shape = float(np.max(traj.column("shape_error")))
    speed = lattice.fitted_speed(traj)
    drift, drift_half = _energy_drift(traj), _energy_drift(fine)
    ratio = drift / drift_half if drift_half > 0 else math.inf
    seconds = time.perf_counter() - t0
    parts = {
        "shape_error": shape < 1e-3,
        "speed": abs(speed - profile.c) / profile.c < 0.01,
        "energy_drift": drift < 1e-6,
        "refinement_ratio": 3.2 <= ratio <= 4.8,
        "runtime": seconds < 60.0,
    }
    details = {
        "shape_error": shape,
        "fitted_speed": speed,
        "c": profile.c,
        "energy_drift": drift,
        "energy_drift_half_dt": drift_half,
        "refinement_ratio": ratio,
        "checks": parts,
    }
    return CriterionResult(8, "permanence of form", all(parts.values()), details, seconds)


def check_dispersion(spec: PotentialSpec, n_sites: int = 256, modes=(10, 30, 60, 90, 120), amplitude: float = 1e-6) -> CriterionResult:
    t0 = time.perf_counter()
    rows = []
    for m in modes:
        k = 2.0 * math.pi * m / n_sites
        expected = math.sqrt(dispersion.omega_sq(k))
        T = min(20.0 * 2.0 * math.pi / expected, 600.0)
        T = round(T / 0.005) * 0.005
        measured = lattice.standing_wave_frequency(k, n_sites, amplitude, T, 0.005, spec)
        rows.append({"k": k, "expected": expected, "measured": measured, "rel_error": abs(measured - expected) / expected})
    ok = all(r["rel_error"] < 0.01 for r in rows)
    return CriterionResult(9, "linear dispersion", ok, {"modes": rows}, time.perf_counter() - t0)


def check_negative_control(critical) -> CriterionResult:
    spec = PotentialSpec(0.0, 0.0, -1.0, -1.0)
    try:
        nls_params(critical, spec)
    except ExistenceConditionViolated as exc:
        return CriterionResult(10, "negative control", True, {"rejected": str(exc)})
    return CriterionResult(10, "negative control", False, {"rejected": None})


def run_all(spec: PotentialSpec | None = None, config=None, n_sites: int = 2048, T: float = 50.0, dt: float = 0.005):
    """Run every criterion; returns the list of results in order."""
    spec = spec or PotentialSpec(0.0, 0.0, 1.0, 1.0)
    results = [check_critical()]
    critical = dispersion.find_critical()
    coeffs = normal_form_coeffs(critical, spec)
    results += [check_spectrum(critical), check_signs(critical), check_duality(critical), check_normal_form(critical, coeffs)]
    family, seconds = solve_family(critical, coeffs, spec, config)
    results += [check_family(family, seconds), check_nls(family, critical, coeffs)]
    profile = next(s for s in family if abs(s.epsilon - 0.04) < 1e-12)
    results.append(check_permanence(profile, spec, critical.k0, n_sites, T, dt))
    results += [check_dispersion(spec), check_negative_control(critical)]
    return results
