"""Geometry of the switching plane ``H0 = {x3 = 0}``.

With ``h(x) = x3`` the first Lie derivative of the ``H_q`` field is
``alpha * (x2 + q)`` on the plane, so the plane splits into the sewing
region ``|x2| > 1``, the escaping region ``|x2| < 1`` and the two fold lines
``x2 = -q`` that bound them.  There is no sliding region.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import DomainError, Params, as_state, half_field, side

ON_LINE_TOL = 1e-12


class SurfaceTag(str, enum.Enum):
    SEWING = "Sewing"
    ESCAPING = "Escaping"
    FOLD_HYPERBOLIC = "FoldHyperbolic"
    FOLD_ELLIPTIC = "FoldElliptic"
    CUSP = "Cusp"
    BOUNDARY_DEGENERATE = "BoundaryDegenerate"


@dataclass(frozen=True)
class SurfaceClassification:
    tag: SurfaceTag
    lie1_plus: float
    lie1_minus: float
    q: int | None = None

    def __str__(self):
        return self.tag.value if self.q is None else f"{self.tag.value}({self.q:+d})"


def _on_plane(x) -> np.ndarray:
    x = as_state(x)
    if x[2] != 0.0:
        raise DomainError(f"point is not on the switching plane (x3={x[2]!r})")
    return x


def lie_derivative(x, q, p: Params, order: int = 1) -> float:
    """``L^k h`` for the extended field of ``H_q`` at a point of the plane.

    The closed forms below hold for any ``x3``; on the fold line and at the
    cusp they reduce to ``alpha*(x1 + q)`` and ``q*alpha*beta``.
    """
    x = _on_plane(x)
    q = side(q)
    a, b = p.alpha, p.beta
    x1, x2, x3 = x
    if order == 1:
        return a * (x2 - x3 + q)
    if order == 2:
        return a * ((x1 - x2 + x3) - a * (x2 - x3 + q))
    if order == 3:
        return a * (
            -b * x2 - (1.0 + a) * (x1 - x2 + x3) + (1.0 + a) * a * (x2 - x3 + q)
        )
    raise DomainError(f"order must be 1, 2 or 3, got {order!r}")


def lie_gradients(p: Params) -> np.ndarray:
    """Rows ``grad h``, ``grad L h``, ``grad L^2 h`` (constant, same for both q)."""
    a = p.alpha
    return np.array(
        [
            [0.0, 0.0, 1.0],
            [0.0, a, -a],
            [a, -a * (1.0 + a), a * (1.0 + a)],
        ]
    )


def classify_point(x, p: Params) -> SurfaceClassification:
    x = _on_plane(x)
    x1, x2 = x[0], x[1]
    lp, lm = lie_derivative(x, 1, p), lie_derivative(x, -1, p)
    tol = ON_LINE_TOL * max(1.0, abs(x2))
    if abs(x2) > 1.0 + tol:
        return SurfaceClassification(SurfaceTag.SEWING, lp, lm)
    if abs(x2) < 1.0 - tol:
        return SurfaceClassification(SurfaceTag.ESCAPING, lp, lm)
    # fold line x2 = -q of the H_q field; sub-case from q * L^2 h = alpha*(q x1 + 1)
    q = -1 if x2 > 0 else 1
    s = q * x1 + 1.0
    stol = ON_LINE_TOL * max(1.0, abs(x1))
    if s > stol:
        tag = SurfaceTag.FOLD_HYPERBOLIC
    elif s < -stol:
        tag = SurfaceTag.FOLD_ELLIPTIC
    else:
        tag = SurfaceTag.CUSP
    return SurfaceClassification(tag, lp, lm, q)


def no_sliding_check(x2: float, p: Params) -> bool:
    return p.alpha * (x2 - 1.0) < p.alpha * (x2 + 1.0)


def filippov_mu(x2: float, q) -> float:
    """Convex weight of the ``H_{-q}`` field in the escaping combination."""
    q = side(q)
    if abs(x2) > 1.0:
        raise DomainError(f"|x2|={abs(x2)} > 1 is outside the escaping closure")
    return (1.0 + q * x2) / 2.0


def filippov_combination(x, q, p: Params) -> np.ndarray:
    """``mu * f_{-q} + (1 - mu) * f_q`` at a point of the escaping closure."""
    x = _on_plane(x)
    q = side(q)
    mu = filippov_mu(x[1], q)
    return mu * half_field(x, -q, p) + (1.0 - mu) * half_field(x, q, p)


def escaping_matrix(p: Params) -> np.ndarray:
    return np.array([[0.0, -p.beta], [1.0, -1.0]])


def escaping_field(pt, p: Params) -> np.ndarray:
    """Planar escaping field ``(-beta x2, x1 - x2)`` on ``|x2| < 1``.

    Given in forward time; negate it for the backward Filippov dynamics.
    """
    x1, x2 = pt
    if not abs(x2) < 1.0:
        raise DomainError(f"|x2|={abs(x2)} is outside the open escaping region")
    return np.array([-p.beta * x2, x1 - x2])


def escaping_equilibrium_spectrum(p: Params) -> tuple[complex, complex]:
    """Eigenvalues ``-1/2 +- sqrt(1/4 - beta)`` of the escaping field at 0."""
    disc = 0.25 - p.beta
    if disc >= 0:
        r = disc**0.5
        return (complex(-0.5 + r), complex(-0.5 - r))
    r = (-disc) ** 0.5
    return (complex(-0.5, r), complex(-0.5, -r))
