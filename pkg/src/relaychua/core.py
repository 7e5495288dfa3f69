"""Parameters, states and the discontinuous vector field.

The field is kept in the normal form ``x' = T x + alpha * b * sgn(b . x)``
with ``b = e3``; inside the half-space ``H_q = {q * x3 > 0}`` it is the affine
field ``T x + q * alpha * b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

B = np.array([0.0, 0.0, 1.0])


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class SwitchingSurfaceError(DomainError):
    """The discontinuous field was evaluated on the plane x3 = 0."""


@dataclass(frozen=True)
class Params:
    """Dimensionless parameters ``alpha = C2/C1`` and ``beta = r^2 C2 / L``."""

    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive and finite, got {v!r}")


@dataclass(frozen=True)
class PhysicalParams:
    """Circuit values in any consistent unit system."""

    r: float
    L: float
    C1: float
    C2: float

    def __post_init__(self):
        for name in ("r", "L", "C1", "C2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive and finite, got {v!r}")


def params_from_physical(p: PhysicalParams) -> Params:
    return Params(alpha=p.C2 / p.C1, beta=p.r**2 * p.C2 / p.L)


def side(q) -> int:
    """Validate a half-space tag and return it as a plain ``int``."""
    if q not in (1, -1):
        raise DomainError(f"half-space tag must be +1 or -1, got {q!r}")
    return int(q)


def as_state(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.shape != (3,):
        raise DomainError(f"state must have three components, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("state components must be finite")
    return a


def system_matrix(p: Params) -> np.ndarray:
    a, b = p.alpha, p.beta
    return np.array([[0.0, -b, 0.0], [1.0, -1.0, 1.0], [0.0, a, -a]])


def half_field(x, q: int, p: Params) -> np.ndarray:
    """Affine field of ``H_q`` extended to its closure (valid on x3 = 0)."""
    x1, x2, x3 = x
    return np.array(
        [-p.beta * x2, x1 - x2 + x3, p.alpha * (x2 - x3 + q)]
    )


def vector_field(x, p: Params) -> np.ndarray:
    """Evaluate the discontinuous field off the switching plane.

    Raises
    ------
    SwitchingSurfaceError
        If ``x3 == 0``; ``sgn`` is deliberately left undefined there.
    """
    x = as_state(x)
    if x[2] == 0.0:
        raise SwitchingSurfaceError(
            "vector_field is undefined on x3 = 0; use the surface module"
        )
    return half_field(x, 1 if x[2] > 0 else -1, p)


def reflect(x) -> np.ndarray:
    """The involution ``x -> -x`` under which the field is odd."""
    return -as_state(x)


def equilibrium(q, p: Params) -> np.ndarray:
    """Equilibrium ``q * (-1, 0, 1)`` of the affine field in ``H_q``.

    It is independent of ``p`` and always lies inside ``H_q``.
    """
    q = side(q)
    return np.array([-float(q), 0.0, float(q)])
