"""Linear dispersion relation of the spatial-dynamics linearisation.

``sigma(lam, c)`` is the characteristic function whose roots are the
eigenvalues of the linearised traveling-wave problem; on the imaginary axis
it restricts to ``f_c(k) = -c**2 k**2 + omega_sq(k)``.  The critical speed is
the tangency of ``f_c`` with zero away from ``k = 0``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import BracketFailure, ContourThroughRoot, GridTooCoarse, NoConvergence

NEWTON_TOL = 1e-12
DEDUP_TOL = 1e-8
CLUSTER_TOL = 1e-4
UNFOLD_RADIUS = 0.05


def omega_sq(k):
    """Squared linear frequency of lattice wavenumber ``k``."""
    return 10.0 * (1.0 - np.cos(k)) - 2.0 * (1.0 - np.cos(2.0 * k))


def sigma(lam, c):
    return c * c * lam * lam - 10.0 * (np.cosh(lam) - 1.0) + 2.0 * (np.cosh(2.0 * lam) - 1.0)


def dsigma(lam, c):
    """Derivative of ``sigma`` with respect to ``lam``."""
    return 2.0 * c * c * lam - 10.0 * np.sinh(lam) + 4.0 * np.sinh(2.0 * lam)


def d2sigma(lam, c):
    return 2.0 * c * c - 10.0 * np.cosh(lam) + 8.0 * np.cosh(2.0 * lam)


def f_c(k, c):
    return -c * c * k * k + 8.0 - 10.0 * np.cos(k) + 2.0 * np.cos(2.0 * k)


def df_c(k, c):
    return -2.0 * c * c * k + 10.0 * np.sin(k) - 4.0 * np.sin(2.0 * k)


def d2f_c(k, c):
    return -2.0 * c * c + 10.0 * np.cos(k) - 8.0 * np.cos(2.0 * k)


@dataclass(frozen=True)
class CriticalData:
    c_star: float
    k0: float
    d2_sigma: float
    sigma_2ik0: float
    s0_prime: float
    p0_prime: float

    @classmethod
    def from_tangency(cls, c_star: float, k0: float) -> "CriticalData":
        d2 = 2.0 * c_star**2 - 10.0 * math.cos(k0) + 8.0 * math.cos(2.0 * k0)
        return cls(
            c_star=float(c_star),
            k0=float(k0),
            d2_sigma=float(d2),
            sigma_2ik0=float(f_c(2.0 * k0, c_star)),
            s0_prime=float(4.0 * c_star * k0**2 / d2),
            p0_prime=float(-4.0 * c_star * k0 / d2),
        )

    def validate(self, tol: float = 1e-10) -> None:
        """Raise ``ValueError`` unless every structural invariant holds."""
        problems = []
        if not self.c_star > 1.0:
            problems.append("c_star <= 1")
        if not 0.0 < self.k0 < math.pi:
            problems.append("k0 outside (0, pi)")
        if not self.d2_sigma > 0.0:
            problems.append("d2_sigma <= 0")
        if not self.sigma_2ik0 < 0.0:
            problems.append("sigma_2ik0 >= 0")
        if not self.s0_prime > 0.0:
            problems.append("s0_prime <= 0")
        if abs(f_c(self.k0, self.c_star)) > tol or abs(df_c(self.k0, self.c_star)) > tol:
            problems.append("(c_star, k0) is not a tangency")
        if problems:
            raise ValueError("invalid CriticalData: " + ", ".join(problems))

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps({k: float(v) for k, v in self.to_dict().items()}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "CriticalData":
        return cls(**json.loads(text))


def _scan_bracket(c2_grid, k_grid):
    """First ``c**2`` on the grid at which ``max_k f_c`` turns negative."""
    maxima = np.array([f_c(k_grid, math.sqrt(c2)).max() for c2 in c2_grid])
    flips = np.nonzero((maxima[:-1] >= 0.0) & (maxima[1:] < 0.0))[0]
    if flips.size == 0:
        raise BracketFailure("no sign change of max f_c over the c^2 scan")
    i = flips[0]
    c2 = c2_grid[i]
    k = k_grid[np.argmax(f_c(k_grid, math.sqrt(c2)))]
    return math.sqrt(c2), float(k)


def find_critical(max_iter: int = 50, tol: float = NEWTON_TOL) -> CriticalData:
    """Solve the tangency ``f_c(k) = d/dk f_c(k) = 0`` for ``c > 1``, ``0 < k < pi``.

    A coarse scan over ``c**2`` in ``[2, 3.5]`` brackets the speed at which the
    interior local maximum of ``f_c`` drops below zero; 2D Newton with the
    analytic Jacobian then polishes ``(c, k)``.
    """
    c2_grid = np.arange(2.0, 3.5 + 1e-12, 0.01)
    k_grid = np.arange(0.5, math.pi, 1e-3)
    c, k = _scan_bracket(c2_grid, k_grid)

    for _ in range(max_iter):
        res = np.array([f_c(k, c), df_c(k, c)])
        if np.max(np.abs(res)) < tol:
            break
        jac = np.array(
            [
                [-2.0 * c * k * k, df_c(k, c)],
                [-4.0 * c * k, d2f_c(k, c)],
            ]
        )
        dc, dk = np.linalg.solve(jac, -res)
        c += dc
        k += dk
    else:
        raise NoConvergence(f"critical-point Newton residual {np.max(np.abs(res)):.3e} > {tol}")
    if not (c > 1.0 and 0.0 < k < math.pi):
        raise NoConvergence(f"critical-point Newton left the admissible region: c={c}, k={k}")
    return CriticalData.from_tangency(c, k)


def _newton_complex(lam, c, tol=1e-14, max_iter=60):
    for _ in range(max_iter):
        step = sigma(lam, c) / dsigma(lam, c)
        lam = lam - step
        if abs(step) <= tol * max(1.0, abs(lam)):
            break
    return lam


def unfold(c: float, critical: CriticalData, radius: float = UNFOLD_RADIUS, tol: float = NEWTON_TOL):
    """Split the double eigenvalue ``i k0`` at speed ``c``.

    Returns ``(s0, p0, lambda_plus)``.  For ``c > c*`` the root is
    ``lambda_plus = sqrt(s0) + i (k0 + p0)``.  For ``c < c*`` both roots sit on
    the imaginary axis at ``i (k0 + p0 +- sqrt(-s0))`` and ``lambda_plus`` is
    the upper one; ``s0 < 0`` then measures the squared half-gap.
    """
    dc = c - critical.c_star
    if abs(dc) > radius:
        raise ValueError(f"|c - c*| = {abs(dc):.3g} exceeds the unfolding radius {radius}")
    if dc == 0.0:
        return 0.0, 0.0, complex(0.0, critical.k0)

    if dc > 0.0:
        guess = complex(math.sqrt(critical.s0_prime * dc), critical.k0 + critical.p0_prime * dc)
        lam = _newton_complex(guess, c)
        if abs(sigma(lam, c)) > tol or lam.real <= 0.0:
            raise NoConvergence(f"unfold: no root near predictor {guess} at c={c}")
        return lam.real**2, lam.imag - critical.k0, lam

    centre = critical.k0 + critical.p0_prime * dc
    half = math.sqrt(critical.s0_prime * -dc)
    roots = []
    for k in (centre + half, centre - half):
        for _ in range(60):
            step = f_c(k, c) / df_c(k, c)
            k -= step
            if abs(step) < 1e-15:
                break
        if abs(f_c(k, c)) > tol:
            raise NoConvergence(f"unfold: imaginary root did not converge at c={c}")
        roots.append(k)
    k_hi, k_lo = max(roots), min(roots)
    if k_hi - k_lo < 1e-12:
        raise NoConvergence("unfold: both imaginary roots collapsed onto one")
    p0 = 0.5 * (k_hi + k_lo) - critical.k0
    s0 = -((0.5 * (k_hi - k_lo)) ** 2)
    return s0, p0, complex(0.0, k_hi)


@dataclass
class EigenvalueSet:
    c: float
    roots: list  # complex roots, each listed once
    multiplicities: list
    residuals: list
    search_box: tuple
    winding_number: int = 0

    @property
    def count(self) -> int:
        return int(sum(self.multiplicities))

    def imaginary_roots(self, tol: float = 1e-8, exclude_zero: bool = True):
        """Roots on the imaginary axis, each repeated by multiplicity."""
        out = []
        for lam, m in zip(self.roots, self.multiplicities):
            if abs(lam.real) < tol and not (exclude_zero and abs(lam) < tol):
                out.extend([lam] * m)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["re", "im", "residual"])
        for lam, m, res in zip(self.roots, self.multiplicities, self.residuals):
            for _ in range(m):
                writer.writerow([f"{lam.real:.17g}", f"{lam.imag:.17g}", f"{res:.17g}"])
        return buf.getvalue()


def _winding(fun, path):
    vals = fun(path)
    phase = np.unwrap(np.angle(vals))
    return (phase[-1] - phase[0]) / (2.0 * math.pi), np.max(np.abs(np.diff(phase)))


def _box_path(re_max, im_max, n):
    t = np.linspace(0.0, 1.0, n, endpoint=False)
    corners = [complex(-re_max, -im_max), complex(re_max, -im_max), complex(re_max, im_max), complex(-re_max, im_max)]
    sides = [a + (b - a) * t for a, b in zip(corners, corners[1:] + corners[:1])]
    return np.concatenate(sides + [np.array([corners[0]])])


def argument_principle_count(c: float, re_max: float, im_max: float, n: int = 2048, max_refine: int = 8) -> int:
    """Number of roots of ``sigma(., c)`` inside the box, by phase unwrapping."""
    for _ in range(max_refine):
        path = _box_path(re_max, im_max, n)
        turns, max_jump = _winding(lambda z: sigma(z, c), path)
        if max_jump < 0.5:
            return int(round(turns))
        n *= 2
    raise ContourThroughRoot("argument-principle contour could not be resolved; perturb the box")


def _local_multiplicity(lam, c, radius=1e-3, n=256):
    t = np.linspace(0.0, 2.0 * math.pi, n + 1)
    turns, _ = _winding(lambda z: sigma(z, c), lam + radius * np.exp(1j * t))
    return int(round(turns))


def neutral_eigenvalues(c: float, box=(0.5, 3.0), grid: int = 40, residual_tol: float = 1e-9) -> EigenvalueSet:
    """All roots of ``sigma(., c)`` in ``|Re| <= re_max, |Im| <= im_max``.

    Seeds on a ``grid x grid`` lattice are Newton-polished and deduplicated;
    roots closer than ``CLUSTER_TOL`` are merged and given the winding number
    of a small circle as multiplicity.  The total is checked against the
    argument principle on the box boundary.
    """
    re_max, im_max = map(float, box)
    if re_max <= 0.0 or im_max <= 0.0:
        raise ValueError("box dimensions must be positive")

    found = []
    for x in np.linspace(-re_max, re_max, grid):
        for y in np.linspace(-im_max, im_max, grid):
            lam = _newton_complex(complex(x, y), c)
            if not np.isfinite(lam) or abs(sigma(lam, c)) > residual_tol * max(1.0, abs(lam) ** 2):
                continue
            if abs(lam.real) > re_max or abs(lam.imag) > im_max:
                continue
            lam = complex(0.0 if abs(lam.real) < 1e-10 else lam.real, 0.0 if abs(lam.imag) < 1e-10 else lam.imag)
            if all(abs(lam - other) > DEDUP_TOL for other in found):
                found.append(lam)

    clusters = []
    for lam in sorted(found, key=lambda z: (z.imag, z.real)):
        for cl in clusters:
            if abs(cl[0] - lam) < CLUSTER_TOL:
                cl.append(lam)
                break
        else:
            clusters.append([lam])

    centres = [complex(np.mean(cl)) for cl in clusters]
    roots, mults, residuals = [], [], []
    for i, (cl, centre) in enumerate(zip(clusters, centres)):
        dist = min(abs(centre.real - s * re_max) for s in (-1, 1))
        dist = min(dist, min(abs(centre.imag - s * im_max) for s in (-1, 1)))
        if dist < 1e-6:
            raise ContourThroughRoot(f"root {centre} lies within 1e-6 of the box boundary")
        roots.append(centre)
        spread = max(abs(lam - centre) for lam in cl)
        nearest = min((abs(centre - other) for j, other in enumerate(centres) if j != i), default=math.inf)
        radius = min(1e-3, 0.5 * nearest)
        if radius <= 2.0 * spread:
            radius = 2.0 * spread + 1e-9
        mults.append(_local_multiplicity(centre, c, radius=radius))
        residuals.append(float(abs(sigma(centre, c))))

    order = sorted(range(len(roots)), key=lambda i: (roots[i].imag, roots[i].real))
    result = EigenvalueSet(
        c=float(c),
        roots=[roots[i] for i in order],
        multiplicities=[mults[i] for i in order],
        residuals=[residuals[i] for i in order],
        search_box=(re_max, im_max),
    )
    result.winding_number = argument_principle_count(c, re_max, im_max)
    return result


def clustered_pairs(eigs: EigenvalueSet, near, radius: float = 0.2):
    """Roots of ``eigs`` within ``radius`` of ``near`` and their maximal gap."""
    close = [lam for lam, m in zip(eigs.roots, eigs.multiplicities) for _ in range(m) if abs(lam - near) < radius]
    gap = max((abs(a - b) for a in close for b in close), default=math.inf)
    return close, gap


def _segment_simpson(values, p, lo, hi, weight):
    mask = (p >= lo - 1e-12) & (p <= hi + 1e-12)
    return simpson(weight(p[mask]) * values[mask], x=p[mask])


def _check_grid(p):
    n_nodes = p.size
    per_unit = (n_nodes - 1) / 4.0
    if per_unit + 1 < 9 or (n_nodes - 1) % 8 != 0:
        raise GridTooCoarse(
            f"U needs a uniform grid on [-2, 2] with >= 9 nodes per unit and nodes at the integers; got {n_nodes}"
        )


def _p_grid(n_nodes):
    return np.linspace(-2.0, 2.0, n_nodes)


def chi0(z, y, U, c):
    """Zero-mode projection coefficient along ``V0 = (1, 0, 1)``.

    ``U`` holds samples of ``p -> U(p)`` on a uniform grid over ``[-2, 2]``.
    """
    U = np.asarray(U)
    _check_grid(U)
    p = _p_grid(U.size)
    tent1 = lambda q: 1.0 - np.abs(q)
    tent2 = lambda q: 2.0 - np.abs(q)
    i1 = _segment_simpson(U, p, -1.0, 0.0, tent1) + _segment_simpson(U, p, 0.0, 1.0, tent1)
    i2 = sum(_segment_simpson(U, p, lo, lo + 1.0, tent2) for lo in (-2.0, -1.0, 0.0, 1.0))
    return (c * c * z - 5.0 * i1 + i2) / (c * c - 1.0)


def chi1(z, y, U, c):
    """Zero-mode projection coefficient along ``V1 = (0, 1, p)``."""
    U = np.asarray(U)
    _check_grid(U)
    p = _p_grid(U.size)
    neg = lambda q: -np.ones_like(q)
    pos = lambda q: np.ones_like(q)
    i1 = _segment_simpson(U, p, -1.0, 0.0, neg) + _segment_simpson(U, p, 0.0, 1.0, pos)
    i2 = (
        _segment_simpson(U, p, -2.0, -1.0, neg)
        + _segment_simpson(U, p, -1.0, 0.0, neg)
        + _segment_simpson(U, p, 0.0, 1.0, pos)
        + _segment_simpson(U, p, 1.0, 2.0, pos)
    )
    return (c * c * y - 5.0 * i1 + i2) / (c * c - 1.0)
