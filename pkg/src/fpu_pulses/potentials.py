"""Interaction force laws of the NN/NNN chain.

The nearest-neighbour spring is attracting with unit stiffness 5, the
next-to-nearest one repelling with stiffness -1.  Both are expanded to cubic
order; ``a`` coefficients are quadratic, ``b`` coefficients cubic.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

K1 = 5.0
K2 = -1.0

_FIELDS = ("a1", "a2", "b1", "b2")


@dataclass(frozen=True)
class PotentialSpec:
    a1: float = 0.0
    a2: float = 0.0
    b1: float = 0.0
    b2: float = 0.0

    def __post_init__(self):
        for name in _FIELDS:
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"potential coefficient {name} must be finite, got {value}")
            object.__setattr__(self, name, value)

    def is_even(self) -> bool:
        """True when both potentials are even, i.e. the forces are odd."""
        return self.a1 == 0.0 and self.a2 == 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PotentialSpec":
        unknown = set(data) - set(_FIELDS)
        if unknown:
            raise ValueError(f"unknown potential keys: {sorted(unknown)}")
        return cls(**{k: data.get(k, 0.0) for k in _FIELDS})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "PotentialSpec":
        return cls.from_dict(json.loads(text))


def w1_prime(r, spec: PotentialSpec):
    """Nearest-neighbour force ``5 r + a1 r**2 + b1 r**3``."""
    return K1 * r + n1(r, spec)


def w2_prime(r, spec: PotentialSpec):
    """Next-to-nearest-neighbour force ``-r + a2 r**2 + b2 r**3``."""
    return K2 * r + n2(r, spec)


def w1_second(r, spec: PotentialSpec):
    return K1 + r * (2.0 * spec.a1 + 3.0 * spec.b1 * r)


def w2_second(r, spec: PotentialSpec):
    return K2 + r * (2.0 * spec.a2 + 3.0 * spec.b2 * r)


def w1(r, spec: PotentialSpec):
    """Nearest-neighbour potential, normalised by ``w1(0) = 0``."""
    return r * r * (0.5 * K1 + r * (spec.a1 / 3.0 + 0.25 * spec.b1 * r))


def w2(r, spec: PotentialSpec):
    return r * r * (0.5 * K2 + r * (spec.a2 / 3.0 + 0.25 * spec.b2 * r))


def n1(r, spec: PotentialSpec):
    """Purely nonlinear part of ``w1_prime``."""
    return r * r * (spec.a1 + spec.b1 * r)


def n2(r, spec: PotentialSpec):
    return r * r * (spec.a2 + spec.b2 * r)
