import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elastic_purcell import asymptotics as asy
from elastic_purcell import dual
from elastic_purcell.core import Params, State, control_fields

nus = st.floats(0.1, 0.95)
omegas = st.floats(0.5, 30.0)


def test_linear_matrix_is_schur_complement():
    # linearize the full system at the straight state: rates = -(dq1 a_m ...) etc.
    p = Params(0.5)
    _, q1, q2 = control_fields(p)
    ye = np.array(State.equilibrium())
    # d(theta, a_m, a_p)/dt = M (0, a_m - u1, a_p - u2); q1 = -M[:, 1], q2 = -M[:, 2]
    M = asy.linear_matrix(0.5)
    np.testing.assert_allclose(q1(ye)[2:], -M[:, 1], rtol=1e-12)
    np.testing.assert_allclose(q2(ye)[2:], -M[:, 2], rtol=1e-12)


@settings(max_examples=25, deadline=None)
@given(nus, omegas, st.floats(-3, 3), st.floats(-1, 1), st.floats(-1, 1))
def test_linear_solution_residual(nu, omega, phi, c1, c2):
    for t in (0.0, 0.37, 2.1):
        np.testing.assert_allclose(asy.linear_residual(t, nu, omega, phi, c1, c2, 0.2), 0,
                                   atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(nus, omegas)
def test_orbit_angles_are_the_harmonic_linear_solution(nu, omega):
    orbit = asy.AsymptoticOrbit(epsilon=1.0, omega=omega, nu=nu)
    t = np.linspace(0, 3, 7)
    th, am, ap = asy.linear_solution(t, nu, omega, math.pi / 2)
    np.testing.assert_allclose(orbit.alpha_m(t), am, atol=1e-12)
    np.testing.assert_allclose(orbit.alpha_p(t), ap, atol=1e-12)
    # theta differs only by the constant set by the initial condition
    diff = orbit.theta(t) - th
    np.testing.assert_allclose(diff - diff[0], 0, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(nus, omegas, st.floats(0, 5))
def test_sigma_terms_integrate_the_rate_equations(nu, omega, t):
    orbit = asy.AsymptoticOrbit(epsilon=1.0, omega=omega, nu=nu)
    assert orbit.sigma1(t) == pytest.approx((orbit.alpha_m(t) - orbit.alpha_p(t)) / 6, abs=1e-13)

    def d(f):
        return dual.derivative(f, t)

    th = orbit.theta(t) - orbit.theta0
    a11, a12, a13 = asy.second_order_rate_coefficients(th, orbit.alpha_m(t), orbit.alpha_p(t), nu)
    rate = a11 * d(orbit.theta) + a12 * d(orbit.alpha_m) + a13 * d(orbit.alpha_p)
    assert d(orbit.sigma2) == pytest.approx(rate, rel=1e-9, abs=1e-13)
    assert orbit.sigma2(0.0) == 0.0


def test_displacement_per_period_from_secular_term():
    orbit = asy.AsymptoticOrbit(epsilon=0.1, omega=5.0, nu=0.5)
    T = orbit.period
    dx, dy, mag = orbit.displacement_per_period()
    assert orbit.x(T) - orbit.x(0) == pytest.approx(dx, rel=1e-12)
    assert dy == 0.0
    assert mag == pytest.approx(abs(dx))


def test_optimal_frequency_maximizes_theory():
    w_opt, v_max = asy.optimal_frequency(0.5, 0.1)
    assert w_opt == pytest.approx(6.9713700231733506)
    assert v_max == pytest.approx(asy.mean_velocity_theory(0.5, w_opt, epsilon=0.1), rel=1e-12)
    for w in (w_opt * 0.9, w_opt * 1.1):
        assert asy.mean_velocity_theory(0.5, w, epsilon=0.1) < v_max
    with pytest.raises(ValueError):
        asy.optimal_frequency(1.0)


def test_displacement_sign_conventions():
    dx, _, _ = asy.second_order_displacement(0.5, 7.0, math.pi / 2, 0.1)
    assert dx < 0
    rdx, _, _ = asy.second_order_displacement(0.5, 7.0, -math.pi / 2, 0.1)
    assert rdx == pytest.approx(-dx)
    assert asy.second_order_displacement(1.0, 7.0, math.pi / 2)[2] == 0.0
    with pytest.raises(ValueError):
        asy.second_order_displacement(0.5, 0.0, 1.0)


def test_q_coefficient_limits():
    # q3 -> 1 and q4 -> 0 quadratically, q1 and q2 only linearly in omega
    a, b, nu = asy.A_COEF, asy.B_COEF, 0.5
    for w in (1e-4, 1e-5):
        q1, q2, q3, q4 = asy.q_coefficients(nu, w)
        assert abs(q3 - 1) < 1e-6
        assert abs(q4) < 1e-8
        assert q1 / w == pytest.approx(a / (nu * (a * a - b * b)), rel=1e-6)
        assert q2 / w == pytest.approx(b / (nu * (b * b - a * a)), rel=1e-6)
    assert max(abs(v) for v in asy.q_coefficients(nu, 1e-6)[:2]) < 1e-6


def test_orbit_requires_quarter_phase():
    with pytest.raises(NotImplementedError):
        asy.asymptotic_orbit(0.5, 7.0, 0.1, phi=1.0)


def test_compare_warns_when_transient_not_elapsed(params):
    from elastic_purcell.dynamics import ControlSignal, integrate

    sig = ControlSignal.sinusoidal(0.1, 7.0)
    traj = integrate(np.zeros(5), sig, 2 * sig.period, params)
    orbit = asy.asymptotic_orbit(0.5, 7.0, 0.1)
    with pytest.warns(RuntimeWarning):
        rep = asy.compare_to_numeric(traj, orbit, n_skip=7)
    assert not rep.transient_elapsed
