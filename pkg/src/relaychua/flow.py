"""Half-space flows and the event-driven integrator.

Inside ``H_q`` the field is affine, so the flow is known in closed form:
``phi_t(x) = x*_q + exp(t T)(x - x*_q)``.  Trajectories are built from such
segments glued at sewing crossings of the plane ``x3 = 0``.  An RK4 mode with
the same event handling reproduces fixed-step simulations.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .core import (
    DomainError,
    Params,
    as_state,
    equilibrium,
    half_field,
    side,
    system_matrix,
)
from .surface import SurfaceClassification, SurfaceTag, classify_point


class Method(str, enum.Enum):
    EXACT = "exact"
    RK4 = "rk4"


class EventKind(str, enum.Enum):
    CROSSING = "Crossing"
    ENTERED_ESCAPING = "EnteredEscaping"
    REACHED_TMAX = "ReachedTmax"
    CONVERGED = "ConvergedToEquilibrium"


@dataclass(frozen=True)
class IntegratorConfig:
    method: Method = Method.EXACT
    step: float = 1e-2
    t_max: float = 100.0
    crossing_tol: float = 1e-10
    equilibrium_tol: float = 1e-9

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        for name in ("step", "t_max", "crossing_tol", "equilibrium_tol"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive, got {v!r}")


@dataclass
class Event:
    time: float
    kind: EventKind
    state: np.ndarray
    q_from: int | None = None
    q_to: int | None = None
    surface: SurfaceClassification | None = None

    def to_dict(self) -> dict:
        d = {
            "time": self.time,
            "kind": self.kind.value,
            "state": [float(v) for v in self.state],
            "q_from": self.q_from,
            "q_to": self.q_to,
        }
        if self.surface is not None:
            d["surface"] = str(self.surface)
        return d


@dataclass
class Trajectory:
    """Samples ``(times[i], states[i])`` plus the ordered event log.

    ``sides[i]`` is the half-space tag of the segment a sample belongs to;
    crossing samples carry the tag of the segment they end.
    """

    times: np.ndarray
    states: np.ndarray
    sides: np.ndarray
    events: list[Event] = field(default_factory=list)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def crossings(self) -> list[Event]:
        return [e for e in self.events if e.kind is EventKind.CROSSING]

    @property
    def termination(self) -> Event:
        return self.events[-1]


@functools.lru_cache(maxsize=256)
def _propagator(p: Params, t: float) -> np.ndarray:
    m = expm(t * system_matrix(p))
    m.flags.writeable = False
    return m


def propagator(p: Params, t: float) -> np.ndarray:
    """``exp(t T)`` by scaling and squaring (Pade), cached per ``(p, t)``."""
    return _propagator(p, float(t))


def affine_flow(x, q, t: float, p: Params) -> np.ndarray:
    """Exact flow of the ``H_q`` affine field for time ``t``."""
    q = side(q)
    x = as_state(x)
    xs = equilibrium(q, p)
    return xs + expm(t * system_matrix(p)) @ (x - xs)


@functools.lru_cache(maxsize=256)
def scan_step(p: Params) -> float:
    """Sampling interval for crossing search.

    At most a sixteenth of the rotation period of the complex pair and no
    longer than the time constant of the fastest mode.
    """
    ev = np.linalg.eigvals(system_matrix(p))
    dt = 1.0 / np.max(np.abs(ev))
    im = np.max(np.abs(ev.imag))
    if im > 0:
        dt = min(dt, 2.0 * math.pi / im / 16.0)
    return float(dt)


@functools.lru_cache(maxsize=256)
def _x3_gain(p: Params) -> float:
    # sup_t |e3 . exp(tT) v| / |v|, sampled; 5% margin for the sampling gap
    dt = scan_step(p) / 8.0
    e = propagator(p, dt)
    row = np.array([0.0, 0.0, 1.0])
    best = 1.0
    t = 0.0
    while True:
        row = row @ e
        t += dt
        n = float(np.linalg.norm(row))
        best = max(best, n)
        if n < 1e-3 * best and t > 1.0:
            break
        if t > 1e4:
            return math.inf
    return 1.05 * best


def captured(x, q: int, p: Params, level: float = 0.0) -> bool:
    """True when the ``H_q`` orbit of ``x`` provably never reaches
    ``x3 = level``.

    ``x3`` can deviate from ``x3*_q = q`` by at most ``gain * |x - x*_q|``.
    """
    margin = 1.0 - q * level
    return _x3_gain(p) * float(np.linalg.norm(x - equilibrium(q, p))) < margin


def _bisect_crossing(x, q, p, lo, hi, tol, level=0.0):
    """Root of ``g = q*(x3(t) - level)`` in ``(lo, hi]``, ``g(lo) >= 0 >= g(hi)``."""
    xs = equilibrium(q, p)
    v = x - xs
    T = system_matrix(p)

    def g(t):
        return q * ((xs + expm(t * T) @ v)[2] - level)

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    # Newton polish so that |x3| is small as well as the time bracket
    t = hi
    for _ in range(4):
        y = xs + expm(t * T) @ v
        gt, dg = q * (y[2] - level), q * half_field(y, q, p)[2]
        if abs(gt) <= tol or dg == 0:
            break
        tn = t - gt / dg
        if not lo - tol <= tn <= hi + tol:
            break
        t = tn
    return t


def _bisect_min(x, q, p, lo, hi):
    """Time of the interior minimum of ``q*x3`` (``q*x3'`` changes - to +)."""
    xs = equilibrium(q, p)
    v = x - xs
    T = system_matrix(p)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        y = xs + expm(mid * T) @ v
        if q * half_field(y, q, p)[2] < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def crossing_time(x, q, p: Params, t_max: float, tol: float = 1e-10, level: float = 0.0):
    """First ``t`` in ``(0, t_max]`` at which the ``H_q`` flow reaches
    ``x3 = level`` (the switching plane by default).

    Samples the closed-form flow on a grid of :func:`scan_step` spacing,
    watching both for a sign change of ``q*x3`` and for an interior minimum
    that dips below the plane between samples, then bisects.  Returns
    ``None`` if the plane is not reached by ``t_max`` or the orbit is
    captured by the equilibrium.
    """
    q = side(q)
    x = as_state(x)
    if q * (x[2] - level) < 0:
        raise DomainError("starting point is on the wrong side of the target level")
    xs = equilibrium(q, p)
    dt = min(scan_step(p), t_max)
    e = propagator(p, dt)
    v = x - xs
    t0 = 0.0
    d0 = q * half_field(x, q, p)[2]
    n = 0
    while t0 < t_max:
        if n % 64 == 0 and captured(xs + v, q, p, level):
            return None
        n += 1
        if t0 + dt > t_max:
            t1 = t_max
            v1 = propagator(p, t_max - t0) @ v
        else:
            t1 = t0 + dt
            v1 = e @ v
        y1 = xs + v1
        g1 = q * (y1[2] - level)
        d1 = q * half_field(y1, q, p)[2]
        if g1 <= 0:
            return _bisect_crossing(x, q, p, t0, t1, tol, level)
        if d0 < 0 < d1:
            tm = _bisect_min(x, q, p, t0, t1)
            if q * (affine_flow(x, q, tm, p)[2] - level) <= 0:
                return _bisect_crossing(x, q, p, t0, tm, tol, level)
        t0, v, d0 = t1, v1, d1
    return None


def flow_to_plane(x, q, p: Params, t_max: float, tol: float = 1e-10, level: float = 0.0):
    """``(t, landing point)`` with the landing snapped onto ``x3 = level``,
    or None."""
    t = crossing_time(x, q, p, t_max, tol, level)
    if t is None:
        return None
    y = affine_flow(x, q, t, p)
    y[2] = level
    return t, y


def rk4_step(x, p: Params, h: float, q) -> np.ndarray:
    """One classical RK4 step of the ``H_q`` affine field (sign frozen)."""
    q = side(q)
    k1 = half_field(x, q, p)
    k2 = half_field(x + 0.5 * h * k1, q, p)
    k3 = half_field(x + 0.5 * h * k2, q, p)
    k4 = half_field(x + h * k3, q, p)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _hermite(s, g0, g1, d0, d1, h):
    h00 = 2 * s**3 - 3 * s**2 + 1
    h10 = s**3 - 2 * s**2 + s
    h01 = -2 * s**3 + 3 * s**2
    h11 = s**3 - s**2
    return h00 * g0 + h10 * h * d0 + h01 * g1 + h11 * h * d1


def _hermite_slope(s, g0, g1, d0, d1, h):
    return (
        (6 * s**2 - 6 * s) * g0
        + (3 * s**2 - 4 * s + 1) * h * d0
        + (-6 * s**2 + 6 * s) * g1
        + (3 * s**2 - 2 * s) * h * d1
    )


def _rk4_crossing(g0, g1, d0, d1, h, tol):
    """Fraction of the step at which the Hermite interpolant of q*x3 hits 0."""
    lo, hi = 0.0, 1.0
    if g1 > 0:
        # interior minimum below the plane
        a, b = 0.0, 1.0
        for _ in range(100):
            m = 0.5 * (a + b)
            if _hermite_slope(m, g0, g1, d0, d1, h) < 0:
                a = m
            else:
                b = m
        sm = 0.5 * (a + b)
        if _hermite(sm, g0, g1, d0, d1, h) > 0:
            return None
        hi = sm
    while (hi - lo) * h > tol:
        m = 0.5 * (lo + hi)
        if not lo < m < hi:
            break
        if _hermite(m, g0, g1, d0, d1, h) > 0:
            lo = m
        else:
            hi = m
    return hi


def initial_side(x, p: Params) -> int:
    """Half-space a trajectory starting at ``x`` moves into."""
    if x[2] != 0.0:
        return 1 if x[2] > 0 else -1
    cls = classify_point(x, p)
    if cls.tag is not SurfaceTag.SEWING:
        raise DomainError(
            f"initial point on the plane must be in the sewing region, got {cls}"
        )
    return 1 if x[1] > 0 else -1


class _Recorder:
    def __init__(self, x0, q):
        self.times = [0.0]
        self.states = [x0.copy()]
        self.sides = [q]
        self.events: list[Event] = []

    def add(self, t, x, q):
        if t <= self.times[-1]:
            self.times[-1], self.states[-1], self.sides[-1] = t, x.copy(), q
        else:
            self.times.append(t)
            self.states.append(x.copy())
            self.sides.append(q)

    def result(self) -> Trajectory:
        return Trajectory(
            np.asarray(self.times),
            np.asarray(self.states),
            np.asarray(self.sides, dtype=int),
            self.events,
        )


def _land(rec: _Recorder, t, xc, q, p):
    """Record a plane landing; returns the new side or None if terminated."""
    xc = xc.copy()
    xc[2] = 0.0
    rec.add(t, xc, q)
    cls = classify_point(xc, p)
    if cls.tag is SurfaceTag.SEWING:
        rec.events.append(Event(t, EventKind.CROSSING, xc, q, -q, cls))
        return -q, xc
    rec.events.append(Event(t, EventKind.ENTERED_ESCAPING, xc, q, None, cls))
    return None, xc


def integrate(x0, p: Params, cfg: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """Integrate from ``x0`` until ``t_max``, capture or an escaping landing.

    Raises
    ------
    DomainError
        If ``x0`` lies on the plane outside the sewing region.
    """
    x = as_state(x0)
    q = initial_side(x, p)
    rec = _Recorder(x, q)
    if cfg.method is Method.EXACT:
        _integrate_exact(x, q, p, cfg, rec)
    else:
        _integrate_rk4(x, q, p, cfg, rec)
    return rec.result()


def _converged(rec, t, x, q, p, cfg) -> bool:
    if np.linalg.norm(x - equilibrium(q, p)) < cfg.equilibrium_tol:
        rec.events.append(Event(t, EventKind.CONVERGED, x.copy(), q))
        return True
    return False


def _integrate_exact(x, q, p, cfg, rec):
    h = cfg.step
    e = propagator(p, h)
    t = 0.0
    while True:
        remaining = cfg.t_max - t
        tc = crossing_time(x, q, p, remaining, cfg.crossing_tol)
        seg_end = remaining if tc is None else tc
        xs = equilibrium(q, p)
        v = x - xs
        k = 1
        while k * h < seg_end - 1e-12:
            v = e @ v
            y = xs + v
            rec.add(t + k * h, y, q)
            if _converged(rec, t + k * h, y, q, p, cfg):
                return
            k += 1
        if tc is None:
            y = xs + propagator(p, seg_end) @ (x - xs)
            rec.add(cfg.t_max, y, q)
            if not _converged(rec, cfg.t_max, y, q, p, cfg):
                rec.events.append(Event(cfg.t_max, EventKind.REACHED_TMAX, y, q))
            return
        t += tc
        q_new, x = _land(rec, t, affine_flow(x, q, tc, p), q, p)
        if q_new is None:
            return
        q = q_new


def _integrate_rk4(x, q, p, cfg, rec):
    t = 0.0
    while True:
        h = min(cfg.step, cfg.t_max - t)
        if h <= 1e-14:
            rec.events.append(Event(t, EventKind.REACHED_TMAX, x.copy(), q))
            return
        xn = rk4_step(x, p, h, q)
        g0, g1 = q * x[2], q * xn[2]
        d0 = q * half_field(x, q, p)[2]
        d1 = q * half_field(xn, q, p)[2]
        s = None
        if g1 <= 0 or d0 < 0 < d1:
            s = _rk4_crossing(g0, g1, d0, d1, h, cfg.crossing_tol)
        if s is not None:
            tc = s * h
            xc = rk4_step(x, p, tc, q)
            t += tc
            q_new, x = _land(rec, t, xc, q, p)
            if q_new is None:
                return
            q = q_new
            continue
        t += h
        x = xn
        rec.add(t, x, q)
        if _converged(rec, t, x, q, p, cfg):
            return
