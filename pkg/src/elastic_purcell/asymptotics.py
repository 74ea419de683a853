"""Linear and weakly nonlinear predictions for small sinusoidal gaits.

Controls are u1 = eps sin(w t), u2 = eps sin(w t + phi) about the straight
swimmer with orientation theta0.  First-order quantities below are for unit
amplitude; multiply by eps (or eps**2 at second order).

All functions use numpy ufuncs so they accept floats, arrays, and dual
numbers (the latter is how the residual checks differentiate them in t).
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import default_transient_periods, mean_velocity, net_displacement_per_period

# eigen-structure of the linearized orientation/shape subsystem
A_COEF = -96 / 5
B_COEF = -66 / 5
C_COEF = 42 / 5
D_COEF = -24 / 5


def linear_matrix(nu):
    """nu * [[d, c, c], [c, a, b], [c, b, a]]: maps (0, a_m - u1, a_p - u2) to rates."""
    a, b, c, d = A_COEF, B_COEF, C_COEF, D_COEF
    return nu * np.array([[d, c, c], [c, a, b], [c, b, a]])


def q_coefficients(nu, omega):
    """Harmonic response coefficients (q1, q2, q3, q4) of the shape angles."""
    a, b = A_COEF, B_COEF
    a2, b2 = a * a, b * b
    den = nu**4 * (a2 - b2) ** 2 + 2 * nu**2 * omega**2 * (a2 + b2) + omega**4
    q1 = a * nu * omega * (nu**2 * (a2 - b2) + omega**2) / den
    q2 = b * nu * omega * (nu**2 * (b2 - a2) + omega**2) / den
    q3 = (nu**4 * (a2 - b2) ** 2 + nu**2 * omega**2 * (a2 + b2)) / den
    q4 = 2 * a * b * nu**2 * omega**2 / den
    return q1, q2, q3, q4


def linear_solution(t, nu, omega, phi, c1=0.0, c2=0.0, c3=0.0):
    """First-order (theta, alpha_m, alpha_p) for unit control amplitude.

    The decaying part is written in the basis exp(a nu t) (cosh, sinh)(b nu t)
    for both shape angles, i.e. the damped modes exp((a +/- b) nu t).
    """
    a, b, c = A_COEF, B_COEF, C_COEF
    q1, q2, q3, q4 = q_coefficients(nu, omega)
    wt = omega * t
    decay = np.exp(a * nu * t)
    ch, sh = np.cosh(b * nu * t), np.sinh(b * nu * t)

    k = nu * (a + b)
    theta = (c3 + c * (c1 + c2) / (a + b) * (np.exp(k * t) - 1)
             + 2 * c * nu / (k**2 + omega**2)
             * (k * np.sin(wt + phi / 2) + omega * np.cos(wt + phi / 2)) * math.cos(phi / 2))
    alpha_m = (decay * (c1 * ch + c2 * sh)
               + q1 * np.cos(wt) + q2 * np.cos(wt + phi) + q3 * np.sin(wt) + q4 * np.sin(wt + phi))
    alpha_p = (decay * (c1 * sh + c2 * ch)
               + q1 * np.cos(wt + phi) + q2 * np.cos(wt) + q3 * np.sin(wt + phi) + q4 * np.sin(wt))
    return theta, alpha_m, alpha_p


def linear_residual(t, nu, omega, phi, c1=0.0, c2=0.0, c3=0.0):
    """Residual of the linear solution in the linearized angle equations at scalar t."""
    from .dual import derivative

    def sol(s):
        return linear_solution(s, nu, omega, phi, c1, c2, c3)

    rates = np.array(derivative(sol, t), dtype=float)
    th, am, ap = sol(t)
    forcing = np.array([0.0, am - math.sin(omega * t), ap - math.sin(omega * t + phi)])
    return rates - linear_matrix(nu) @ forcing


def first_order_xy(alpha_m, alpha_p, theta0):
    """Leading-order position, transverse to the central link."""
    return ((alpha_p - alpha_m) / 6 * np.sin(theta0),
            (alpha_m - alpha_p) / 6 * np.cos(theta0))


def second_order_rate_coefficients(theta1, alpha_m1, alpha_p1, nu):
    """(a11, a12, a13) weighting the first-order angle rates in the O(eps^2) drift."""
    a11 = (nu - 2) * (alpha_m1 - alpha_p1) / (6 * nu)
    a12 = -((2 + nu) * alpha_m1 + (nu - 1) * alpha_p1 + 3 * nu * theta1) / (18 * nu)
    a13 = ((nu - 1) * alpha_m1 + (2 + nu) * alpha_p1 + 3 * nu * theta1) / (18 * nu)
    return a11, a12, a13


def _displacement_factor(nu, omega):
    return (60 * math.pi * nu * (972 * nu**2 + 5 * omega**2)
            / ((36 * nu**2 + omega**2) * (26244 * nu**2 + 25 * omega**2)))


def second_order_displacement(nu, omega, phi, epsilon=1.0, theta0=0.0):
    """Net displacement over one period of the harmonic regime, O(eps^2).

    Returns (dx, dy, magnitude).  The swimmer moves along -(cos theta0,
    sin theta0) for 0 < phi < pi and nu < 1.
    """
    if not omega > 0:
        raise ValueError("omega must be positive")
    signed = epsilon**2 * (nu - 1) * _displacement_factor(nu, omega) * math.sin(phi)
    # + 0.0 turns a signed zero into 0.0
    return signed * math.cos(theta0) + 0.0, signed * math.sin(theta0) + 0.0, abs(signed)


def mean_velocity_theory(nu, omega, phi=math.pi / 2, epsilon=1.0):
    return omega * second_order_displacement(nu, omega, phi, epsilon)[2] / (2 * math.pi)


def optimal_frequency(nu, epsilon=1.0):
    """(omega_opt, v_max) maximizing the O(eps^2) mean speed."""
    if not 0 < nu < 1:
        raise ValueError("optimal frequency is defined for 0 < nu < 1")
    return 18 * math.sqrt(3 / 5) * nu, 15 * math.sqrt(15) / 512 * (1 - nu) * epsilon**2


@dataclass(frozen=True)
class AsymptoticOrbit:
    """Long-time motion for phi = pi/2, up to O(eps) in angles and O(eps^2) in position."""

    epsilon: float
    omega: float
    nu: float
    theta0: float = 0.0
    phi: float = math.pi / 2

    def sigma1(self, t):
        nu, w = self.nu, self.omega
        wt = w * t
        return -nu * ((w - 6 * nu) * np.sin(wt) + (6 * nu + w) * np.cos(wt)) / (36 * nu**2 + w**2)

    def sigma2(self, t):
        nu, w = self.nu, self.omega
        wt = w * t
        den = (36 * nu**2 + w**2) * (26244 * nu**2 + 25 * w**2)
        secular = 30 * nu * (nu - 1) * w * (972 * nu**2 + 5 * w**2) * t
        ripple = 6 * nu * (9 * nu + 4) * ((5 * w**2 - 972 * nu**2) * np.sin(wt) ** 2
                                          + 96 * nu * w * np.sin(2 * wt))
        return (secular + ripple) / den

    def x(self, t):
        eps, th = self.epsilon, self.theta0
        return -eps * self.sigma1(t) * math.sin(th) + eps**2 * self.sigma2(t) * math.cos(th)

    def y(self, t):
        eps, th = self.epsilon, self.theta0
        return eps * self.sigma1(t) * math.cos(th) + eps**2 * self.sigma2(t) * math.sin(th)

    def theta(self, t):
        nu, w = self.nu, self.omega
        wt = w * t
        return self.theta0 - self.epsilon * 42 * nu * (
            (162 * nu + 5 * w) * np.sin(wt) + (162 * nu - 5 * w) * np.cos(wt)
        ) / (26244 * nu**2 + 25 * w**2)

    def _D(self):
        nu, w = self.nu, self.omega
        return 944784 * nu**4 + 27144 * nu**2 * w**2 + 25 * w**4

    def alpha_m(self, t):
        nu, w = self.nu, self.omega
        wt = w * t
        return self.epsilon / self._D() * 6 * nu * (
            (157464 * nu**3 - 10692 * nu**2 * w + 2262 * nu * w**2 + 55 * w**3) * np.sin(wt)
            - 16 * w * (972 * nu**2 - 132 * nu * w + 5 * w**2) * np.cos(wt))

    def alpha_p(self, t):
        nu, w = self.nu, self.omega
        wt = w * t
        return self.epsilon / self._D() * 6 * nu * (
            16 * w * (972 * nu**2 + 132 * nu * w + 5 * w**2) * np.sin(wt)
            + (157464 * nu**3 + 10692 * nu**2 * w + 2262 * nu * w**2 - 55 * w**3) * np.cos(wt))

    @property
    def period(self):
        return 2 * math.pi / self.omega

    def displacement_per_period(self):
        return second_order_displacement(self.nu, self.omega, self.phi, self.epsilon, self.theta0)


def asymptotic_orbit(nu, omega, epsilon, theta0=0.0, phi=math.pi / 2):
    if not math.isclose(phi, math.pi / 2, abs_tol=1e-12):
        raise NotImplementedError("closed-form orbits are available only for phi = pi/2")
    return AsymptoticOrbit(epsilon=epsilon, omega=omega, nu=nu, theta0=theta0, phi=phi)


@dataclass(frozen=True)
class ComparisonReport:
    mean_velocity_theory: float
    mean_velocity_numeric: float
    velocity_rel_error: float
    theta_sup_error: float
    alpha_m_sup_error: float
    alpha_p_sup_error: float
    transient_elapsed: bool


def compare_to_numeric(traj, orbit, n_skip=None, n_avg=100):
    """Mean-speed relative error and sup-norm angle deviations past the transient."""
    sig = traj.signal
    if sig.kind == "zero" or orbit.epsilon == 0:
        v_num = 0.0 if sig.kind == "zero" else mean_velocity(traj, n_skip, n_avg)
        v_th = 0.0
        t_start = 0.0
        elapsed = True
    else:
        if n_skip is None:
            n_skip = default_transient_periods(sig, traj.params)
        t_start = n_skip * sig.period
        elapsed = traj.times[-1] >= t_start
        if not elapsed:
            warnings.warn("trajectory ends before the transient has decayed", RuntimeWarning)
            n_avg = 0
        else:
            n_avg = min(n_avg, int(math.floor((traj.times[-1] - t_start) / sig.period + 1e-9)))
        v_th = mean_velocity_theory(orbit.nu, orbit.omega, orbit.phi, orbit.epsilon)
        if n_avg >= 1:
            dx, dy = net_displacement_per_period(traj, n_skip, n_avg)
            v_num = math.hypot(dx, dy) / sig.period
        else:
            v_num = math.nan
    if v_num == 0 and v_th == 0:
        err_v = 0.0
    else:
        err_v = abs(v_th - v_num) / abs(v_num)
    mask = traj.times >= t_start * (1 - 1e-12)
    t = traj.times[mask]
    s = traj.states[mask]
    if len(t) == 0:
        sup = (math.nan,) * 3
    else:
        sup = tuple(float(np.max(np.abs(s[:, i] - f(t)))) if len(t) else math.nan
                    for i, f in ((2, orbit.theta), (3, orbit.alpha_m), (4, orbit.alpha_p)))
    return ComparisonReport(v_th, v_num, err_v, *sup, transient_elapsed=bool(elapsed))
