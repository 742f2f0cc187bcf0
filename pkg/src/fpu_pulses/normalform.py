"""Cubic normal-form coefficient and the NLS parameters derived from it.

The quadratic (``m2_*``) and cubic (``m3``) interaction values are the closed
forms obtained by applying the force expansions to the critical eigenvectors.
Two versions of the cubic coefficient are reported: ``s_printed`` follows the
published expression term by term, ``s_effective`` carries the cubic term
with the sign that makes ``s_effective < 0`` equivalent to the existence
condition.  Everything downstream (pulse amplitude, ``nu2``) uses
``s_effective``; for even potentials it agrees with a direct multiple-scales
expansion of the traveling-wave equation.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .dispersion import CriticalData
from .errors import ExistenceConditionViolated
from .potentials import PotentialSpec


def m2_v1v2(k0: float, spec: PotentialSpec) -> float:
    return 2.0 * (spec.a1 * (math.cos(k0) - 1.0) + 2.0 * spec.a2 * (math.cos(2.0 * k0) - 1.0))


def m2_v2v2_im(k0: float, spec: PotentialSpec) -> float:
    """Imaginary part ``x`` of the purely imaginary value ``M2(V2, V2) = i x``."""
    return 4.0 * (
        spec.a1 * math.sin(k0) * (math.cos(k0) - 1.0)
        + spec.a2 * math.sin(2.0 * k0) * (math.cos(2.0 * k0) - 1.0)
    )


def m3(k0: float, spec: PotentialSpec) -> float:
    return -16.0 * (spec.b1 * math.sin(0.5 * k0) ** 4 + spec.b2 * math.sin(k0) ** 4)


def quadratic_bracket(critical: CriticalData, spec: PotentialSpec) -> float:
    """Quadratic contribution ``4 M2(V1,V2)^2/(1-c*^2) - 2 M2(V2,V2)^2/sigma(2ik0)``.

    Always ``<= 0`` since ``c* > 1`` and ``sigma(2ik0) < 0``.
    """
    c2 = critical.c_star**2
    mixed = m2_v1v2(critical.k0, spec)
    m22_sq = -(m2_v2v2_im(critical.k0, spec) ** 2)  # (i x)^2
    return 4.0 * mixed**2 / (1.0 - c2) - 2.0 * m22_sq / critical.sigma_2ik0


def coefficient_s(critical: CriticalData, spec: PotentialSpec):
    """Return ``(s_printed, s_effective)``."""
    quad = quadratic_bracket(critical, spec)
    cubic = m3(critical.k0, spec)
    scale = 2.0 / critical.d2_sigma
    return scale * (quad - 3.0 * cubic), scale * (quad + 3.0 * cubic)


def sign_condition(critical: CriticalData, spec: PotentialSpec) -> bool:
    k0 = critical.k0
    rhs = 48.0 * (spec.b1 * math.sin(0.5 * k0) ** 4 + spec.b2 * math.sin(k0) ** 4)
    return bool(quadratic_bracket(critical, spec) < rhs)


def nls_params(critical: CriticalData, spec: PotentialSpec):
    """NLS parameters ``(nu1, nu2, gamma)`` of the approximating soliton.

    Raises
    ------
    ExistenceConditionViolated
        If the potentials fail the sign condition.
    """
    if not sign_condition(critical, spec):
        raise ExistenceConditionViolated(
            f"sign condition fails for {spec}: no sech-type homoclinic (s_effective >= 0)"
        )
    _, s_eff = coefficient_s(critical, spec)
    return 1.0, -s_eff, critical.s0_prime


@dataclass(frozen=True)
class NormalFormCoeffs:
    m2_v1v2: float
    m2_v2v2_im: float
    m3: float
    s_printed: float
    s_effective: float
    sign_condition_ok: bool
    nu1: float
    nu2: float
    gamma: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "NormalFormCoeffs":
        return cls(**json.loads(text))


def normal_form_coeffs(critical: CriticalData, spec: PotentialSpec) -> NormalFormCoeffs:
    """Evaluate all coefficients; does not raise when the sign condition fails."""
    s_printed, s_eff = coefficient_s(critical, spec)
    return NormalFormCoeffs(
        m2_v1v2=m2_v1v2(critical.k0, spec),
        m2_v2v2_im=m2_v2v2_im(critical.k0, spec),
        m3=m3(critical.k0, spec),
        s_printed=s_printed,
        s_effective=s_eff,
        sign_condition_ok=sign_condition(critical, spec),
        nu1=1.0,
        nu2=-s_eff,
        gamma=critical.s0_prime,
    )


def _u_differences(U, h):
    """Forward and backward differences ``U(h) - U(0)``, ``U(0) - U(-h)``."""
    return U(h) - U(0.0), U(0.0) - U(-h)


def bilinear_m2(Y, Z, spec: PotentialSpec, c: float | None = None) -> complex:
    """Second component of the quadratic interaction form, evaluated literally.

    ``Y`` and ``Z`` are callables ``p -> U(p)`` (the function components of
    phase-space vectors).  With ``c`` given the ``c**-2`` prefactor is applied.
    """
    total = 0j
    for h, a in ((1.0, spec.a1), (2.0, spec.a2)):
        yf, yb = _u_differences(Y, h)
        zf, zb = _u_differences(Z, h)
        total += a * (yf * zf - yb * zb)
    return total / c**2 if c is not None else total


def trilinear_m3(Y, W, Z, spec: PotentialSpec, c: float | None = None) -> complex:
    total = 0j
    for h, b in ((1.0, spec.b1), (2.0, spec.b2)):
        yf, yb = _u_differences(Y, h)
        wf, wb = _u_differences(W, h)
        zf, zb = _u_differences(Z, h)
        total += b * (yf * wf * zf - yb * wb * zb)
    return total / c**2 if c is not None else total


def eigen_u(k0: float):
    """Function components of the critical eigenvectors ``V1`` and ``V2``."""
    return (lambda p: p + 0j), (lambda p: np.exp(1j * k0 * p))
