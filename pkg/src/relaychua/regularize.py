"""Smoothing of the relay by transition functions and the slow/fast split.

Fields in the rescaled frame ``y = eps * x``::

    rescaled      T y + eps*alpha*b*sgn(y3)
    regularized   T y + eps*alpha*b*phi(y3/eps)

and the blow-up ``u = (y1, y2, x3)`` with ``y3 = eps * x3``.  Multiplying by
``eps`` (fast time ``t = eps * tau``) gives the fast field, in which the
layer ``|x3| < 1`` is crossed in ``tau`` of order ``1 / (alpha * y2)``.

The return map :func:`fast_return_map` lives in the original coordinates:
a layer of half-width ``eps`` around ``x3 = 0`` with the exact affine flows
outside it and leading-order transits across it, so that it tends to the
discontinuous return map as ``eps -> 0``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import DomainError, Params, side
from .flow import captured, flow_to_plane
from .poincare import DEFAULT_T_MAX, _contraction


class TangentLayerError(DomainError):
    """Layer transit requested where the layer flow is tangent (y2 = 0)."""


class LeftDomain(RuntimeError):
    """An iterate of the regularized return map left ``|y2| >= eps0``."""

    kind = "LeftDomain"


class TransitionKind(str, enum.Enum):
    CUBIC_C1 = "cubic"
    SMOOTH_FLAT = "smooth"


def _cubic(x):
    return 0.5 * (3.0 * x - x**3)


def _cubic_d(x):
    return 1.5 * (1.0 - x * x)


def _flat(s):
    return math.exp(-1.0 / s) if s > 0 else 0.0


def _smooth(x):
    a, b = _flat(0.5 * (1.0 + x)), _flat(0.5 * (1.0 - x))
    return (a - b) / (a + b)


def _smooth_d(x):
    sa, sb = 0.5 * (1.0 + x), 0.5 * (1.0 - x)
    a, b = _flat(sa), _flat(sb)
    return a * b * (1.0 / sa**2 + 1.0 / sb**2) / (a + b) ** 2


def _quintic(x):
    return x + 0.5 * x**3 - 0.5 * x**5


def _quintic_d(x):
    return 1.0 + 1.5 * x * x - 2.5 * x**4


@dataclass(frozen=True)
class Transition:
    """A transition function: odd-or-not, increasing on ]-1, 1[, equal to
    ``sign(x)`` for ``|x| >= 1``.

    ``inner`` is only called on ``]-1, 1[``.  Without ``inner_derivative``
    the slope is taken by central differences.
    """

    name: str
    inner: Callable[[float], float]
    inner_derivative: Callable[[float], float] | None = None

    def __call__(self, x: float) -> float:
        if x >= 1.0:
            return 1.0
        if x <= -1.0:
            return -1.0
        return self.inner(x)

    def derivative(self, x: float) -> float:
        if abs(x) >= 1.0:
            return 0.0
        if self.inner_derivative is not None:
            return self.inner_derivative(x)
        h = 1e-6 * max(1.0, abs(x))
        return (self(x + h) - self(x - h)) / (2.0 * h)


CUBIC = Transition("cubic", _cubic, _cubic_d)
SMOOTH = Transition("smooth", _smooth, _smooth_d)
# C1, slope exactly 1 at its only interior fixed point 0
QUINTIC = Transition("quintic", _quintic, _quintic_d)

BUILTIN = {t.name: t for t in (CUBIC, SMOOTH, QUINTIC)}


def transition(kind) -> Transition:
    if isinstance(kind, Transition):
        return kind
    name = kind.value if isinstance(kind, TransitionKind) else str(kind)
    try:
        return BUILTIN[name]
    except KeyError:
        raise DomainError(f"unknown transition kind {kind!r}") from None


def transition_eval(kind, x: float) -> float:
    return transition(kind)(x)


def _check_eps(eps):
    if not (math.isfinite(eps) and eps > 0):
        raise DomainError(f"eps must be positive, got {eps!r}")


def _normal_form(y, p: Params, eps: float, s: float) -> np.ndarray:
    y1, y2, y3 = y
    return np.array(
        [-p.beta * y2, y1 - y2 + y3, p.alpha * (y2 - y3) + eps * p.alpha * s]
    )


def rescaled_field(y, p: Params, eps: float) -> np.ndarray:
    """Discontinuous field in the frame ``y = eps * x``."""
    _check_eps(eps)
    if y[2] == 0.0:
        raise DomainError("rescaled field is undefined on y3 = 0")
    return _normal_form(y, p, eps, 1.0 if y[2] > 0 else -1.0)


def regularized_field(y, p: Params, eps: float, kind=TransitionKind.CUBIC_C1) -> np.ndarray:
    """Smooth field ``T y + eps*alpha*b*phi(y3/eps)``.

    Identical (bit for bit) to :func:`rescaled_field` where ``|y3| >= eps``.
    """
    _check_eps(eps)
    return _normal_form(y, p, eps, transition(kind)(y[2] / eps))


def blow_up(u, eps: float) -> np.ndarray:
    return np.array([u[0], u[1], eps * u[2]])


def blow_down(y, eps: float) -> np.ndarray:
    return np.array([y[0], y[1], y[2] / eps])


def fast_field(u, p: Params, eps: float, kind=TransitionKind.CUBIC_C1, slow: bool = False) -> np.ndarray:
    """Field of the blown-up system at ``u = (y1, y2, x3)``.

    ``slow=True`` returns ``f_eps(blow_up(u))`` in the original time; the
    default is the fast field ``eps * blow_up^{-1}(f_eps(blow_up(u)))``::

        (-eps*beta*y2,
         eps*(y1 - y2) + eps^2*x3,
         alpha*y2 - eps*alpha*x3 + eps*alpha*phi(x3))
    """
    _check_eps(eps)
    y1, y2, x3 = u
    a = p.alpha
    phi = transition(kind)(x3)
    f1 = -p.beta * y2
    f2 = y1 - y2 + eps * x3
    f3 = a * (y2 - eps * x3) + eps * a * phi
    if slow:
        return np.array([f1, f2, f3])
    return np.array([eps * f1, eps * f2, f3])


def layer_transit(u, q, p: Params, face_tol: float = 1e-9):
    """Leading-order passage through the layer from face ``x3 = -q`` to
    ``x3 = q``.

    Returns ``(u_out, delta_tau)`` with the slow coordinates unchanged and
    ``delta_tau = 2q / (alpha * y2)``.
    """
    q = side(q)
    y1, y2, x3 = (float(v) for v in u)
    if abs(x3 + q) > face_tol:
        raise DomainError(f"x3={x3} is not on the entry face x3={-q}")
    if y2 == 0.0:
        raise TangentLayerError("y2 = 0: the layer flow is tangent to the faces")
    if q * y2 < 0:
        raise DomainError(f"layer flow at y2={y2} crosses towards x3={-q}, not {q}")
    return np.array([y1, y2, float(q)]), 2.0 * q / (p.alpha * y2)


def fast_return_map(
    u,
    p: Params,
    eps: float = 1e-3,
    eps0: float = 0.05,
    t_max: float = DEFAULT_T_MAX,
    tol: float = 1e-10,
):
    """One return of ``P_eps = transit o semi-flow o transit o semi-flow``.

    ``u = (x1, x2, q)`` sits on the outer face ``x3 = q*eps`` of the layer,
    with ``q*x2 > 0`` so the flow leaves the layer into ``H_q``.  Returns
    ``(u_next, period)`` on the same face.

    Raises
    ------
    LeftDomain
        A landing with ``|x2| < eps0``.
    poincare.NoReturn
        A semi-flow that never returns to its face.
    """
    from .poincare import NoReturn

    _check_eps(eps)
    if not eps0 > eps:
        raise DomainError(f"eps0={eps0} must exceed eps={eps}")
    x1, x2, w = (float(v) for v in u)
    q = side(int(round(w)))
    if abs(w - q) > 1e-9 or q * x2 <= 0:
        raise DomainError(f"{u} is not on an exit face of the layer")
    if abs(x2) < eps0:
        raise LeftDomain(f"|x2|={abs(x2)} < eps0={eps0}")
    state = np.array([x1, x2, q * eps])
    period = 0.0
    for s in (q, -q):
        hit = flow_to_plane(state, s, p, t_max, tol, level=s * eps)
        if hit is None:
            raise NoReturn(tuple(state), s, captured(state, s, p, s * eps))
        t, y = hit
        period += t
        if abs(y[1]) < eps0:
            raise LeftDomain(f"landing x2={y[1]} has |x2| < eps0={eps0}")
        out, dtau = layer_transit((y[0], y[1], float(s)), -s, p)
        period += eps * dtau
        state = np.array([out[0], out[1], out[2] * eps])
    return np.array([state[0], state[1], float(q)]), period


@dataclass
class FastCycleResult:
    fixed_point: np.ndarray
    period: float
    contraction: float
    iterates: list[np.ndarray] = field(default_factory=list)
    converged: bool = False
    failure: str | None = None
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "failure": self.failure,
            "message": self.message,
            "fixed_point": [float(v) for v in self.fixed_point],
            "period": self.period,
            "contraction": self.contraction,
            "iterations": len(self.iterates) - 1,
        }


def find_fast_cycle(
    u0,
    p: Params,
    eps: float = 1e-3,
    eps0: float = 0.05,
    tol: float = 1e-9,
    max_iter: int = 200,
) -> FastCycleResult:
    """Picard iteration of :func:`fast_return_map` from ``u0``."""
    from .poincare import ReturnMapError

    u = np.asarray(u0, dtype=float)
    iterates = [u]
    diffs: list[float] = []
    period = math.nan
    for _ in range(max_iter):
        try:
            v, period = fast_return_map(u, p, eps, eps0)
        except (ReturnMapError, LeftDomain) as exc:
            return FastCycleResult(u, math.nan, _contraction(diffs), iterates, False, exc.kind, str(exc))
        iterates.append(v)
        d = float(np.hypot(v[0] - u[0], v[1] - u[1]))
        diffs.append(d)
        u = v
        if d <= tol:
            c = _contraction(diffs)
            ok = math.isfinite(c) and c < 1.0
            return FastCycleResult(u, period, c, iterates, ok, None if ok else "NotContracting", "converged")
    return FastCycleResult(u, period, _contraction(diffs), iterates, False, "MaxIter", f"no convergence in {max_iter} returns")


def integrate_fast(u0, p: Params, eps: float, kind=TransitionKind.CUBIC_C1, step: float = 1e-2, tau_max: float = 100.0):
    """Fixed-step RK4 of the fast field; returns ``(taus, states)``."""
    _check_eps(eps)
    if not (step > 0 and tau_max > 0):
        raise DomainError("step and tau_max must be positive")
    k = transition(kind)
    u = np.asarray(u0, dtype=float)
    n = int(math.ceil(tau_max / step - 1e-9))
    taus = np.minimum(np.arange(n + 1) * step, tau_max)
    taus[-1] = tau_max
    out = np.empty((n + 1, 3))
    out[0] = u
    for i in range(1, n + 1):
        h = taus[i] - taus[i - 1]
        k1 = fast_field(u, p, eps, k)
        k2 = fast_field(u + 0.5 * h * k1, p, eps, k)
        k3 = fast_field(u + 0.5 * h * k2, p, eps, k)
        k4 = fast_field(u + h * k3, p, eps, k)
        u = u + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i] = u
    return taus, out


@dataclass(frozen=True)
class RegularizedEquilibrium:
    state: np.ndarray
    eigenvalues: np.ndarray
    planar_eigenvalues: np.ndarray
    slope: float
    hyperbolic: bool
    is_saddle: bool

    def to_dict(self) -> dict:
        def cpl(zs):
            return [[float(z.real), float(z.imag)] for z in zs]

        return {
            "state": [float(v) for v in self.state],
            "eigenvalues": cpl(self.eigenvalues),
            "planar_eigenvalues": cpl(self.planar_eigenvalues),
            "transition_slope": self.slope,
            "hyperbolic": self.hyperbolic,
            "is_saddle": self.is_saddle,
        }


def _fixed_point_of(k: Transition) -> float:
    def g(x):
        return k(x) - x

    for delta in (1e-1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-8):
        lo, hi = -1.0 + delta, 1.0 - delta
        if g(lo) < 0 < g(hi):
            break
    else:
        raise DomainError(f"cannot bracket a fixed point of transition {k.name!r}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0.0 or not lo < mid < hi:
            return mid
        if gm < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def fast_jacobian(u, p: Params, eps: float, kind=TransitionKind.CUBIC_C1) -> np.ndarray:
    a = p.alpha
    slope = transition(kind).derivative(u[2])
    return np.array(
        [
            [0.0, -eps * p.beta, 0.0],
            [eps, -eps, eps * eps],
            [0.0, a, eps * a * (slope - 1.0)],
        ]
    )


def regularized_equilibrium(p: Params, eps: float, kind=TransitionKind.CUBIC_C1, hyp_tol: float = 1e-12) -> RegularizedEquilibrium:
    """Interior equilibrium of the fast field and its linear type.

    It sits at ``y2 = 0``, ``y1 = -eps*x3``, ``phi(x3) = x3``.  The planar
    eigenvalues are those of the linearization restricted to ``{x3 = 0}``,
    which is ``eps`` times the escaping field.  A slope ``phi'(x3) = 1``
    makes the equilibrium non-hyperbolic.
    """
    _check_eps(eps)
    k = transition(kind)
    xs = _fixed_point_of(k)
    u = np.array([-eps * xs, 0.0, xs]) + 0.0
    jac = fast_jacobian(u, p, eps, k)
    ev = np.linalg.eigvals(jac)
    planar = np.linalg.eigvals(jac[:2, :2])
    scale = max(1.0, float(np.max(np.abs(ev))))
    hyperbolic = bool(np.all(np.abs(ev.real) > hyp_tol * scale))
    saddle = hyperbolic and bool(np.any(ev.real > 0) and np.any(ev.real < 0))
    return RegularizedEquilibrium(u, ev, planar, k.derivative(xs), hyperbolic, saddle)
