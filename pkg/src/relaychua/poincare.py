"""Return maps on the sewing region and limit-cycle search.

The section is the sewing half-plane ``{x3 = 0, x2 > 1}``, from which the
flow enters ``H_+``; its mirror image ``{x2 < -1}`` feeds ``H_-``.  A
semi-Poincare map follows one half-space flow back to the plane and the first
return map composes the two.  A stable fixed point of the return map, reached
by plain Picard iteration, certifies an attracting closed orbit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import DomainError, Params, side
from .flow import captured, flow_to_plane
from .surface import SurfaceClassification, SurfaceTag, classify_point

SEED_MARGIN = 1e-6
DEFAULT_T_MAX = 200.0


class ReturnMapError(RuntimeError):
    """Base class for failures of a return map."""

    kind = "ReturnMapError"


class NoReturn(ReturnMapError):
    """The half-space orbit never comes back to the plane."""

    kind = "NoReturn"

    def __init__(self, point, q, captured_by_equilibrium):
        self.point = point
        self.q = q
        self.captured_by_equilibrium = captured_by_equilibrium
        why = "captured by equilibrium" if captured_by_equilibrium else "no crossing before t_max"
        super().__init__(f"no return to x3=0 from {point} through H_{q:+d} ({why})")


class EscapingLanding(ReturnMapError):
    """The orbit came back to the plane outside the sewing region."""

    kind = "EscapingLanding"

    def __init__(self, landing, classification: SurfaceClassification):
        self.landing = landing
        self.classification = classification
        super().__init__(f"landing at {landing} is {classification}, not sewing")


@dataclass(frozen=True)
class SectionPoint:
    """Point ``(x1, x2, 0)`` of the sewing region, ``|x2| > 1``."""

    x1: float
    x2: float

    def __post_init__(self):
        if not (math.isfinite(self.x1) and math.isfinite(self.x2)):
            raise DomainError("section point must be finite")
        if not abs(self.x2) > 1.0:
            raise DomainError(f"|x2|={abs(self.x2)} is not in the sewing region")

    @property
    def branch(self) -> int:
        return 1 if self.x2 > 0 else -1

    def as_state(self) -> np.ndarray:
        return np.array([self.x1, self.x2, 0.0])

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2])

    def __neg__(self) -> "SectionPoint":
        return SectionPoint(-self.x1, -self.x2)

    def distance(self, other: "SectionPoint") -> float:
        return math.hypot(self.x1 - other.x1, self.x2 - other.x2)


def _section_point(x) -> SectionPoint:
    if isinstance(x, SectionPoint):
        return x
    x1, x2 = x
    return SectionPoint(float(x1), float(x2))


def semi_poincare(x, q, p: Params, t_max: float = DEFAULT_T_MAX, tol: float = 1e-10):
    """Follow the ``H_q`` flow from a sewing point back to the plane.

    Returns ``(landing, time)``.  A sewing point enters ``H_q`` only when
    ``q`` matches the sign of ``x2``.

    Raises
    ------
    NoReturn
        No crossing within ``t_max`` (typically capture by ``x*_q``).
    EscapingLanding
        The landing point is a fold or escaping point.
    """
    x = _section_point(x)
    q = side(q)
    if q != x.branch:
        raise DomainError(f"flow at {x} enters H_{x.branch:+d}, not H_{q:+d}")
    start = x.as_state()
    hit = flow_to_plane(start, q, p, t_max, tol)
    if hit is None:
        raise NoReturn(x, q, captured(start, q, p) or _ends_captured(start, q, p, t_max))
    t, y = hit
    cls = classify_point(y, p)
    if cls.tag is not SurfaceTag.SEWING:
        raise EscapingLanding(y, cls)
    return SectionPoint(float(y[0]), float(y[1])), t


def _ends_captured(x, q, p, t_max) -> bool:
    from .flow import affine_flow

    return captured(affine_flow(x, q, t_max, p), q, p)


def first_return(x, p: Params, t_max: float = DEFAULT_T_MAX, tol: float = 1e-10):
    """``P = phi_{-q} o phi_q`` with ``q`` the branch of ``x``.

    Returns ``(image, period)``; the image lies on the same branch as ``x``.
    """
    x = _section_point(x)
    q = x.branch
    y, t1 = semi_poincare(x, q, p, t_max, tol)
    z, t2 = semi_poincare(y, -q, p, t_max, tol)
    return z, t1 + t2


@dataclass
class CycleResult:
    fixed_point: SectionPoint
    period: float
    contraction: float
    iterates: list[SectionPoint] = field(default_factory=list)
    converged: bool = False
    failure: str | None = None
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "failure": self.failure,
            "message": self.message,
            "fixed_point": [self.fixed_point.x1, self.fixed_point.x2],
            "period": self.period,
            "contraction": self.contraction,
            "iterations": len(self.iterates) - 1,
            "iterates": [[u.x1, u.x2] for u in self.iterates],
        }


def _contraction(diffs: list[float]) -> float:
    ratios = [
        b / a for a, b in zip(diffs, diffs[1:]) if a > 1e-12 and b > 0
    ]
    if not ratios:
        return math.nan
    return math.exp(sum(math.log(r) for r in ratios) / len(ratios))


def find_cycle(
    x0,
    p: Params,
    tol: float = 1e-9,
    max_iter: int = 200,
    t_max: float = DEFAULT_T_MAX,
) -> CycleResult:
    """Iterate the first return map from ``x0`` until successive iterates
    are within ``tol``.

    The contraction factor is the geometric mean of the ratios of successive
    step lengths; when the seed is already (numerically) fixed it is probed
    with a finite difference instead.  Failures of the map are reported in
    the result, not raised.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    x = _section_point(x0)
    if abs(x.x2) < 1.0 + SEED_MARGIN:
        raise DomainError(f"seed |x2|={abs(x.x2)} is too close to the fold line")
    iterates = [x]
    diffs: list[float] = []
    period = math.nan
    for _ in range(max_iter):
        try:
            y, period = first_return(x, p, t_max)
        except ReturnMapError as exc:
            return CycleResult(
                x, math.nan, _contraction(diffs), iterates, False, exc.kind, str(exc)
            )
        iterates.append(y)
        d = y.distance(x)
        diffs.append(d)
        x = y
        if d <= tol:
            c = _contraction(diffs)
            if not math.isfinite(c) or len(diffs) < 3:
                c = _probe_contraction(x, p, t_max)
            ok = c < 1.0
            return CycleResult(
                x,
                period,
                c,
                iterates,
                ok,
                None if ok else "NotContracting",
                "converged" if ok else "fixed point is not attracting",
            )
    return CycleResult(
        x, period, _contraction(diffs), iterates, False, "MaxIter",
        f"no convergence in {max_iter} returns",
    )


def _probe_contraction(x: SectionPoint, p: Params, t_max: float, h: float = 1e-6) -> float:
    base, _ = first_return(x, p, t_max)
    worst = 0.0
    for dx in ((h, 0.0), (0.0, h)):
        y, _ = first_return(SectionPoint(x.x1 + dx[0], x.x2 + dx[1]), p, t_max)
        worst = max(worst, y.distance(base) / h)
    return worst
