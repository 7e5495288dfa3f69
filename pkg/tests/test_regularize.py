import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from relaychua import Params, find_cycle
from relaychua.core import DomainError
from relaychua import regularize as reg
from relaychua.regularize import (
    BUILTIN,
    LeftDomain,
    TangentLayerError,
    Transition,
    TransitionKind,
    blow_down,
    blow_up,
    fast_field,
    fast_return_map,
    find_fast_cycle,
    integrate_fast,
    layer_transit,
    regularized_equilibrium,
    regularized_field,
    rescaled_field,
    transition,
    transition_eval,
)
from relaychua.surface import escaping_equilibrium_spectrum

from conftest import params_st

kinds = st.sampled_from(sorted(BUILTIN))


def transit_oracle(p, eps, y1, y2, q=1):
    """Direct integration of the fast field from face -q to face q."""
    ev = lambda t, u: u[2] - q
    ev.terminal, ev.direction = True, q
    sol = solve_ivp(
        lambda t, u: fast_field(u, p, eps), (0, 100), [y1, y2, -float(q)],
        events=ev, rtol=1e-12, atol=1e-14, method="DOP853",
    )
    return sol.t_events[0][0], sol.y_events[0][0]


@given(kinds, st.floats(-5, 5))
def test_transition_saturates_and_is_odd(kind, x):
    k = transition(kind)
    if x >= 1:
        assert k(x) == 1.0
    elif x <= -1:
        assert k(x) == -1.0
    else:
        assert -1 <= k(x) <= 1
        if abs(x) < 0.9:
            assert -1 < k(x) < 1
    assert k(-x) == pytest.approx(-k(x), abs=1e-15)


@pytest.mark.parametrize("kind", sorted(BUILTIN))
def test_transition_monotone(kind):
    xs = np.linspace(-1, 1, 2001)[1:-1]
    vals = np.array([transition_eval(kind, x) for x in xs])
    assert np.all(np.diff(vals) >= 0)
    # the flat kind rounds to +-1 near the edges in double precision
    assert np.all(np.diff(vals)[np.abs(xs[1:]) < 0.9] > 0)


@pytest.mark.parametrize("kind", sorted(BUILTIN))
def test_transition_derivative(kind):
    k = transition(kind)
    for x in np.linspace(-0.95, 0.95, 39):
        h = 1e-6
        fd = (k(x + h) - k(x - h)) / (2 * h)
        assert k.derivative(x) == pytest.approx(fd, rel=1e-6, abs=1e-8)
    assert k.derivative(1.5) == 0.0


def test_transition_slopes():
    assert transition("cubic").derivative(0.0) == 1.5
    assert transition(TransitionKind.SMOOTH_FLAT).derivative(0.0) == pytest.approx(2.0)
    assert transition("quintic").derivative(0.0) == 1.0


def test_user_transition_numeric_derivative():
    k = Transition("tanh-like", lambda x: math.sin(math.pi * x / 2))
    assert transition(k) is k
    assert k.derivative(0.0) == pytest.approx(math.pi / 2, rel=1e-8)


def test_unknown_transition():
    with pytest.raises(DomainError):
        transition("linear")


def test_germ_equality(rng, desk):
    eps = 1e-3
    for _ in range(100):
        y = rng.uniform(-5, 5, size=3)
        y[2] = rng.choice([-1, 1]) * rng.uniform(eps, 5)
        for kind in BUILTIN:
            assert np.array_equal(regularized_field(y, desk, eps, kind), rescaled_field(y, desk, eps))
    y = np.array([0.3, -0.2, eps])
    assert np.array_equal(regularized_field(y, desk, eps), rescaled_field(y, desk, eps))


def test_rescaled_field_on_plane(desk):
    with pytest.raises(DomainError):
        rescaled_field([1.0, 1.0, 0.0], desk, 1e-3)
    with pytest.raises(DomainError):
        rescaled_field([1.0, 1.0, 1.0], desk, 0.0)


def test_rescaled_field_is_scaled_original(desk):
    from relaychua import vector_field

    eps = 0.01
    x = np.array([1.0, -2.0, 0.3])
    np.testing.assert_allclose(rescaled_field(eps * x, desk, eps), eps * vector_field(x, desk), rtol=1e-14)


def test_blow_up_conjugacy(rng, desk):
    eps = 1e-3
    for _ in range(100):
        u = rng.uniform(-3, 3, size=3)
        np.testing.assert_allclose(blow_down(blow_up(u, eps), eps), u, rtol=1e-15)
        for kind in BUILTIN:
            f = regularized_field(blow_up(u, eps), desk, eps, kind)
            expected = eps * np.array([f[0], f[1], f[2] / eps])
            np.testing.assert_allclose(fast_field(u, desk, eps, kind), expected, rtol=1e-12, atol=1e-12)
            np.testing.assert_allclose(fast_field(u, desk, eps, kind, slow=True), f, rtol=1e-12, atol=1e-12)


@given(params_st, kinds, st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_fast_field_odd(p, kind, a, b, c):
    u = np.array([a, b, c])
    np.testing.assert_allclose(fast_field(-u, p, 1e-3, kind), -fast_field(u, p, 1e-3, kind), atol=1e-12)


def test_layer_transit_leading_order(desk):
    u, dtau = layer_transit((0.3, 2.0, -1.0), 1, desk)
    np.testing.assert_array_equal(u, [0.3, 2.0, 1.0])
    assert dtau == pytest.approx(2 / (5 * 2.0))
    u, dtau = layer_transit((0.3, -2.0, 1.0), -1, desk)
    assert u[2] == -1.0 and dtau == pytest.approx(2 / (5 * 2.0))


def test_layer_transit_errors(desk):
    with pytest.raises(TangentLayerError):
        layer_transit((0.3, 0.0, -1.0), 1, desk)
    with pytest.raises(DomainError):
        layer_transit((0.3, 2.0, 0.5), 1, desk)
    with pytest.raises(DomainError):
        layer_transit((0.3, -2.0, -1.0), 1, desk)


@pytest.mark.parametrize("y2", [0.5, 1.0, 3.0])
def test_layer_transit_vs_integration(desk, y2):
    eps = 1e-3
    t, u = transit_oracle(desk, eps, 0.3, y2)
    u_lo, dtau = layer_transit((0.3, y2, -1.0), 1, desk)
    assert abs(t - dtau) / dtau < 10 * eps
    assert np.hypot(u[0] - u_lo[0], u[1] - u_lo[1]) < 10 * eps * max(1, y2)


def test_layer_drift_is_first_order(desk):
    drifts, terrs = [], []
    for eps in (1e-3, 5e-4):
        t, u = transit_oracle(desk, eps, 0.3, 1.0)
        drifts.append(np.hypot(u[0] - 0.3, u[1] - 1.0))
        terrs.append(abs(t - 0.4))
    assert drifts[0] / drifts[1] == pytest.approx(2.0, rel=0.3)
    assert terrs[0] / terrs[1] == pytest.approx(2.0, rel=0.3)


def test_integrate_fast_vs_solve_ivp(desk):
    u0 = np.array([0.2, 1.0, -1.0])
    taus, states = integrate_fast(u0, desk, 1e-2, "cubic", step=1e-3, tau_max=2.0)
    assert taus[-1] == 2.0 and len(taus) == 2001
    ref = solve_ivp(lambda t, u: fast_field(u, desk, 1e-2), (0, 2.0), u0, rtol=1e-12, atol=1e-13, method="DOP853")
    # the cubic kind is only C1 at the faces, so the step order drops to 2 there
    np.testing.assert_allclose(states[-1], ref.y[:, -1], atol=1e-6)


def test_fast_return_map_errors(desk):
    with pytest.raises(DomainError):
        fast_return_map((10.0, 3.0, 1.0), desk, eps=0.1, eps0=0.05)
    with pytest.raises(DomainError):
        fast_return_map((10.0, -3.0, 1.0), desk)
    with pytest.raises(DomainError):
        fast_return_map((10.0, 3.0, 0.5), desk)
    with pytest.raises(LeftDomain):
        fast_return_map((10.0, 0.01, 1.0), desk)


def test_fast_return_map_tends_to_discontinuous(desk):
    from relaychua import first_return

    x = (10.0, 10.0)
    exact, t_exact = first_return(x, desk)
    prev = math.inf
    for eps in (1e-2, 1e-3, 1e-4):
        u, t = fast_return_map((x[0], x[1], 1.0), desk, eps=eps, eps0=10 * eps)
        d = math.hypot(u[0] - exact.x1, u[1] - exact.x2)
        assert d < prev
        assert d < 200 * eps
        assert t == pytest.approx(t_exact, abs=50 * eps)
        prev = d


def test_fast_return_map_odd(desk):
    a, ta = fast_return_map((10.0, 10.0, 1.0), desk, eps=1e-2)
    b, tb = fast_return_map((-10.0, -10.0, -1.0), desk, eps=1e-2)
    np.testing.assert_allclose(a, -b, atol=1e-9)
    assert ta == pytest.approx(tb, abs=1e-9)


def test_fast_cycle_near_discontinuous(desk):
    disc = find_cycle((10.0, 10.0), desk)
    fast = find_fast_cycle((10.0, 10.0, 1.0), desk, eps=1e-2)
    assert fast.converged and fast.contraction < 1
    d = math.hypot(fast.fixed_point[0] - disc.fixed_point.x1, fast.fixed_point[1] - disc.fixed_point.x2)
    assert d < 0.2


def test_fast_cycle_failure_reported(captured_regime):
    r = find_fast_cycle((10.0, 10.0, 1.0), captured_regime, eps=1e-2)
    assert not r.converged and r.failure == "NoReturn"


@pytest.mark.parametrize("kind,saddle", [("cubic", True), ("smooth", True)])
def test_regularized_equilibrium_saddle(desk, kind, saddle):
    eps = 1e-3
    eq = regularized_equilibrium(desk, eps, kind)
    np.testing.assert_array_equal(eq.state, [0.0, 0.0, 0.0])
    assert eq.slope > 1 and eq.hyperbolic and eq.is_saddle is saddle
    assert np.any(eq.eigenvalues.real > 0) and np.any(eq.eigenvalues.real < 0)
    esc = sorted(escaping_equilibrium_spectrum(desk), key=lambda z: z.imag)
    planar = sorted(eq.planar_eigenvalues / eps, key=lambda z: z.imag)
    for z, w in zip(planar, esc):
        assert abs(z - w) <= 1e-10 * abs(w)


def test_regularized_equilibrium_non_hyperbolic(desk):
    eq = regularized_equilibrium(desk, 1e-3, "quintic")
    assert eq.slope == 1.0
    assert not eq.hyperbolic and not eq.is_saddle


def test_regularized_equilibrium_is_zero_of_field(desk):
    for kind in BUILTIN:
        eq = regularized_equilibrium(desk, 1e-3, kind)
        assert np.linalg.norm(fast_field(eq.state, desk, 1e-3, kind)) <= 1e-14


def test_equilibrium_off_origin_for_asymmetric_kind(desk):
    # a non-odd transition moves the interior fixed point off the origin
    k = Transition("shifted", lambda x: 0.5 * (3 * x - x**3) + 0.1 * (1 - x * x))
    eps = 1e-2
    eq = regularized_equilibrium(desk, eps, k)
    assert eq.state[2] != 0.0
    assert eq.state[0] == pytest.approx(-eps * eq.state[2])
    assert np.linalg.norm(fast_field(eq.state, desk, eps, k)) <= 1e-12


def test_equilibrium_dict(desk):
    d = regularized_equilibrium(desk, 1e-3, "cubic").to_dict()
    assert d["is_saddle"] and d["hyperbolic"] and d["transition_slope"] == 1.5
    assert len(d["eigenvalues"]) == 3 and len(d["planar_eigenvalues"]) == 2
