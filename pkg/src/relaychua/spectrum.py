"""Spectral analysis of the linear part ``T``.

Everything here concerns the cubic

    p_T(lam) = -(lam^3 + (1 + alpha) lam^2 + beta lam + alpha beta)

whose sign pattern at ``-alpha`` and ``-(1 + alpha)`` always brackets a real
root.  When the other two roots form a complex pair, the ratio of their real
part to the real root decides how the half-space flow maps the incoming part
of the switching plane onto the outgoing part.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

from .core import DomainError, Params

BIJECTION_TOL = 1e-12


class GeometryClass(str, enum.Enum):
    STRICT_SUBDOMAIN = "StrictSubdomain"
    BIJECTION = "Bijection"
    CONTRACTING = "Contracting"
    ALL_REAL = "AllReal"


@dataclass(frozen=True)
class SpectrumReport:
    lambda_star: float
    quad_b: float
    quad_c: float
    complex_pair: tuple[complex, complex]
    ratio: float | None
    geometry_class: GeometryClass
    routh: bool
    single_root: bool
    in_theorem_region: bool
    triple_root: bool = False

    def to_dict(self) -> dict:
        return {
            "lambda_star": self.lambda_star,
            "quad_b": self.quad_b,
            "quad_c": self.quad_c,
            "complex_pair": [[z.real, z.imag] for z in self.complex_pair],
            "ratio": self.ratio,
            "geometry_class": self.geometry_class.value,
            "routh": self.routh,
            "single_root": self.single_root,
            "in_theorem_region": self.in_theorem_region,
            "triple_root": self.triple_root,
        }


def char_poly_eval(lam: float, p: Params) -> float:
    a, b = p.alpha, p.beta
    return -(((lam + (1.0 + a)) * lam + b) * lam + a * b)


def char_poly_derivatives(lam: float, p: Params) -> tuple[float, float, float]:
    """Return ``(p_T, p_T', p_T'')`` at ``lam``."""
    a, b = p.alpha, p.beta
    return (
        char_poly_eval(lam, p),
        -(3.0 * lam * lam + 2.0 * (1.0 + a) * lam + b),
        -(6.0 * lam + 2.0 * (1.0 + a)),
    )


def real_root(p: Params, tol: float = 1e-12, width: float = 1e-12) -> float:
    """Real root of ``p_T`` inside ``]-(1 + alpha), -alpha[``.

    Bisection on the analytic bracket, accelerated by a secant step whenever
    the secant point falls inside the current bracket and the previous step
    at least halved it.  Stops once ``|p_T| <= tol`` and the bracket is
    narrower than ``width`` (relative to the root), on an exact zero, or when
    the bracket cannot be split further in floating point.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    lo, hi = -(1.0 + p.alpha), -p.alpha
    f_lo, f_hi = char_poly_eval(lo, p), char_poly_eval(hi, p)  # beta > 0, -alpha^2 < 0
    best, f_best = (lo, f_lo) if abs(f_lo) < abs(f_hi) else (hi, f_hi)
    last_width = math.inf
    while True:
        w = hi - lo
        if abs(f_best) <= tol and w <= width * max(1.0, abs(best)):
            return best
        x = None
        if w <= 0.5 * last_width and f_hi != f_lo:
            s = hi - f_hi * (hi - lo) / (f_hi - f_lo)
            if lo < s < hi:
                x = s
        if x is None:
            x = lo + 0.5 * w
        last_width = w
        if not lo < x < hi:
            return best
        fx = char_poly_eval(x, p)
        if fx == 0.0:
            return x
        if abs(fx) <= abs(f_best):
            best, f_best = x, fx
        if fx > 0:
            lo, f_lo = x, fx
        else:
            hi, f_hi = x, fx


def quadratic_factor(p: Params, lambda_star: float):
    """Deflate ``p_T`` by its real root.

    Returns ``(quad_b, quad_c, pair)`` with
    ``lam^3 + (1+alpha) lam^2 + beta lam + alpha beta
    = (lam - lambda_star)(lam^2 + quad_b lam + quad_c)``.
    """
    quad_b = 1.0 + p.alpha + lambda_star
    quad_c = p.beta + quad_b * lambda_star
    disc = cmath.sqrt(quad_b * quad_b - 4.0 * quad_c)
    pair = ((-quad_b + disc) / 2.0, (-quad_b - disc) / 2.0)
    return quad_b, quad_c, pair


def routh_stable(p: Params) -> bool:
    a1, a2, a3 = 1.0 + p.alpha, p.beta, p.alpha * p.beta
    return a1 > 0 and a3 > 0 and a1 * a2 > a3


def critical_points(p: Params):
    """Real critical points of ``p_T`` or ``None`` when they are complex."""
    m = (p.alpha + 1.0) / 3.0
    rad = m * m - p.beta / 3.0
    if rad < 0:
        return None
    s = math.sqrt(rad)
    return (-m + s, -m - s)


def single_real_root(p: Params) -> bool:
    """True iff the cubic has exactly one real root (negative discriminant)."""
    a, b = p.alpha, p.beta
    return b * (1.0 + 20.0 * a) < 4.0 * (a * (1.0 + a) ** 3 + b * (b + 2.0 * a * a))


def beta_of_lambda(lam: float, alpha: float) -> float:
    """The ``beta`` for which ``lam`` is the real root, given ``alpha``."""
    if not -(1.0 + alpha) < lam < -alpha:
        raise DomainError(f"lambda={lam} outside ]-(1+alpha), -alpha[")
    return -lam * lam * (1.0 + alpha + lam) / (alpha + lam)


def return_ratio(p: Params, lambda_star: float | None = None) -> float:
    """``Re(lam_{1,2}) / lambda_star`` for the deflated pair."""
    if lambda_star is None:
        lambda_star = real_root(p)
    return 0.5 * ((1.0 + p.alpha) / (-lambda_star) - 1.0)


def geometry_class(p: Params, lambda_star: float | None = None) -> GeometryClass:
    if not single_real_root(p):
        return GeometryClass.ALL_REAL
    ratio = return_ratio(p, lambda_star)
    if abs(ratio - 1.0) <= BIJECTION_TOL:
        return GeometryClass.BIJECTION
    if ratio > 1.0:
        return GeometryClass.STRICT_SUBDOMAIN
    return GeometryClass.CONTRACTING


def bifurcation_curve(alpha: float) -> float | None:
    """Upper ``beta`` bound of the theorem region for ``1/8 < alpha < 1/2``."""
    if not 0.125 < alpha < 0.5:
        return None
    return 2.0 * (1.0 + alpha) ** 3 / (9.0 * (1.0 - 2.0 * alpha))


def theorem_region(p: Params) -> bool:
    """Sufficient condition for a limit cycle; False means "not guaranteed"."""
    if not single_real_root(p):
        return False
    if p.alpha >= 0.5:
        return True
    bound = bifurcation_curve(p.alpha)
    return bound is not None and p.beta < bound


def is_triple_root(p: Params, tol: float = 1e-12) -> bool:
    """All three roots coincide (at ``(1/8, 27/64)``, root ``-3/8``)."""
    lam = -(1.0 + p.alpha) / 3.0
    return all(abs(v) <= tol for v in char_poly_derivatives(lam, p))


def spectrum_report(p: Params, tol: float = 1e-12) -> SpectrumReport:
    lam = real_root(p, tol)
    quad_b, quad_c, pair = quadratic_factor(p, lam)
    single = single_real_root(p)
    return SpectrumReport(
        lambda_star=lam,
        quad_b=quad_b,
        quad_c=quad_c,
        complex_pair=pair,
        ratio=return_ratio(p, lam) if single else None,
        geometry_class=geometry_class(p, lam),
        routh=routh_stable(p),
        single_root=single,
        in_theorem_region=theorem_region(p),
        triple_root=is_triple_root(p),
    )
