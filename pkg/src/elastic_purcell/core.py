"""Grand resistance matrix, right-hand side and control-affine vector fields.

Conventions: links are indexed j = -1, 0, +1 with unit length, the central
link points along e(theta) and lateral link j along e(theta + alpha_j).  Time
is scaled by the spring relaxation time, forces by the longitudinal drag, so
the only physical parameter left is the drag ratio nu = xi / eta.

Every function here works on plain floats and on :class:`~elastic_purcell.dual.Dual`
entries alike, which is how exact Jacobians of the vector fields are obtained.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import dual
from .dual import cos, sin

N_STATE = 5


class State(NamedTuple):
    x: float
    y: float
    theta: float
    alpha_m: float
    alpha_p: float

    @classmethod
    def equilibrium(cls, theta0=0.0, x=0.0, y=0.0):
        return cls(x, y, theta0, 0.0, 0.0)


@dataclass(frozen=True)
class Params:
    """Dimensionless swimmer parameters.

    Only the drag ratio is free; link length and spring stiffness are scaled
    to one.  ``nu`` outside (0, 1] is accepted so degenerate cases such as the
    isotropic-drag limit nu = 1 can be probed.
    """

    nu: float = 0.5
    link_length: float = field(default=1.0, init=False)
    spring_stiffness: float = field(default=1.0, init=False)

    def __post_init__(self):
        if not np.isfinite(self.nu) or self.nu <= 0:
            raise ValueError(f"drag ratio nu must be positive and finite, got {self.nu!r}")


class SingularResistanceError(ArithmeticError):
    """Raised when the resistance matrix cannot be inverted."""

    def __init__(self, message, condition):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


def _state_entries(state):
    if len(state) != N_STATE:
        raise ValueError(f"state must have {N_STATE} components, got {len(state)}")
    entries = [v if isinstance(v, dual.Dual) else float(v) for v in state]
    if not all(np.isfinite(dual.primal(v)) for v in entries):
        raise ValueError(f"state has non-finite components: {state!r}")
    return entries


def assemble_resistance_closed(state, params, as_printed=False):
    """Closed-form 5x5 resistance matrix at ``state``.

    With ``as_printed=True`` three entries (R11, R23, R33) use an alternative
    argument grouping and sign that circulates in print.  Those variants disagree
    with direct integration of the drag densities and are kept only so the
    discrepancy can be reproduced.
    """
    _, _, th, am, ap = _state_entries(state)
    nu = params.nu
    phm = th + am
    php = th + ap
    k = 1.0 - nu

    if as_printed:
        r11 = (k * (cos(2 * am + th) + cos(2 * ap + th) + cos(2 * th)) - 3 * (1 + nu)) / (2 * nu)
        r23 = (k * cos(2 * am + th) + 2 * cos(phm) + k * cos(2 * ap + th) - 2 * cos(php)) / (4 * nu)
        r33 = (cos(2 * am) * k - 4 * cos(am) - 2 * (2 * cos(ap) + 4 + nu) + cos(2 * ap) * (nu - 1)) / (8 * nu)
    else:
        r11 = (k * (cos(2 * phm) + cos(2 * php) + cos(2 * th)) - 3 * (1 + nu)) / (2 * nu)
        r23 = (k * cos(2 * am + th) + 2 * cos(phm) - k * cos(2 * ap + th) - 2 * cos(php)) / (4 * nu)
        r33 = ((nu - 1) * (cos(2 * am) + cos(2 * ap)) - 4 * cos(am) - 4 * cos(ap) - 8 - 2 * nu) / (8 * nu)

    r12 = k * (sin(2 * phm) + sin(2 * php) + sin(2 * th)) / (2 * nu)
    r13 = ((nu - 1) * sin(2 * am + th) - 2 * sin(phm) + k * sin(2 * ap + th) + 2 * sin(php)) / (4 * nu)
    r14 = -sin(phm) / (2 * nu)
    r15 = sin(php) / (2 * nu)
    r22 = -(k * (cos(2 * phm) + cos(2 * php) + cos(2 * th)) + 3 * (1 + nu)) / (2 * nu)
    r24 = cos(phm) / (2 * nu)
    r25 = -cos(php) / (2 * nu)
    r34 = -(3 * cos(am) + 4) / (12 * nu)
    r35 = -(3 * cos(ap) + 4) / (12 * nu)
    r44 = -1.0 / (3 * nu)

    return dual.as_array([
        [r11, r12, r13, r14, r15],
        [r12, r22, r23, r24, r25],
        [r13, r23, r33, r34, r35],
        [r14, r24, r34, r44, 0.0],
        [r15, r25, r35, 0.0, r44],
    ])


def _resistance_raw(theta, alpha_m, alpha_p, nu, nodes, weights):
    # columns: response to unit generalized velocity in each coordinate
    R = np.zeros((N_STATE, N_STATE))
    e0 = np.array([np.cos(theta), np.sin(theta)])
    n0 = np.array([-np.sin(theta), np.cos(theta)])
    for j, alpha, row in ((-1, alpha_m, 3), (0, 0.0, None), (1, alpha_p, 4)):
        phi = theta + alpha
        ej = np.array([np.cos(phi), np.sin(phi)])
        nj = np.array([-np.sin(phi), np.cos(phi)])
        arm = nodes + 0.5 * j  # distance along link j from its joint
        lever = 0.5 * j * e0[:, None] + arm * ej[:, None]
        for col in range(N_STATE):
            qdot = np.zeros(N_STATE)
            qdot[col] = 1.0
            phidot = qdot[2] + (qdot[3] if j == -1 else qdot[4] if j == 1 else 0.0)
            v = (qdot[:2, None] + 0.5 * j * qdot[2] * n0[:, None]
                 + arm * phidot * nj[:, None])
            f = -(ej @ v) * ej[:, None] - (nj @ v) / nu * nj[:, None]
            R[0, col] += f[0] @ weights
            R[1, col] += f[1] @ weights
            R[2, col] += (lever[0] * f[1] - lever[1] * f[0]) @ weights
            if row is not None:
                R[row, col] += (arm * (ej[0] * f[1] - ej[1] * f[0])) @ weights
    return R


def assemble_resistance_quadrature(state, params, n_nodes=16):
    """Resistance matrix by Gauss-Legendre integration of the drag densities.

    Independent of :func:`assemble_resistance_closed`.  The overall scale is
    fixed once, by matching the (4, 4) entry to -1/(3 nu) at the straight
    configuration; nothing else is fitted.
    """
    if int(n_nodes) != n_nodes or n_nodes < 8:
        raise ValueError(f"n_nodes must be an integer >= 8, got {n_nodes!r}")
    _, _, th, am, ap = (dual.primal(v) for v in _state_entries(state))
    x, w = np.polynomial.legendre.leggauss(int(n_nodes))
    nodes, weights = 0.5 * x, 0.5 * w  # map [-1, 1] onto [-1/2, 1/2]
    nu = params.nu
    straight = _resistance_raw(0.0, 0.0, 0.0, nu, nodes, weights)
    scale = (-1.0 / (3 * nu)) / straight[3, 3]
    return scale * _resistance_raw(th, am, ap, nu, nodes, weights)


def rhs_vector(state, u1, u2):
    """Spring forcing b = [0, 0, 0, alpha_m - u1, alpha_p - u2]."""
    _, _, _, am, ap = _state_entries(state)
    return dual.as_array([0.0, 0.0, 0.0, am - u1, ap - u2])


def block_decompose(R):
    """Split R into the translational block A, coupling B and angular block C."""
    R = np.asarray(R)
    return R[:2, :2], R[:2, 2:], R[2:, 2:]


def _solve(R, b):
    try:
        return dual.solve(R, b)
    except np.linalg.LinAlgError:
        Rf = np.vectorize(dual.primal, otypes=[float])(R)
        raise SingularResistanceError("resistance matrix is singular", np.linalg.cond(Rf)) from None


def velocity(state, u1, u2, params):
    """Generalized velocity solving R(y) ydot = b(y, u)."""
    return _solve(assemble_resistance_closed(state, params), rhs_vector(state, u1, u2))


class VectorField:
    """A map R^5 -> R^5 that accepts dual-number states.

    ``jac`` differentiates ``func`` with forward-mode duals, so it is exact to
    rounding and can itself be differentiated again.
    """

    def __init__(self, func, name=""):
        self.func = func
        self.name = name

    def __call__(self, y):
        return self.func(np.asarray(y, dtype=object) if _has_dual(y) else np.asarray(y, dtype=float))

    def jac(self, y):
        return dual.jacobian(self, y)

    def __repr__(self):
        return f"VectorField({self.name})"


def _has_dual(y):
    return any(isinstance(v, dual.Dual) for v in np.asarray(y, dtype=object).flat)


def control_fields(params):
    """Drift q0 and input fields q1, q2 of ydot = q0 + u1 q1 + u2 q2."""

    def q0(y):
        return _solve(assemble_resistance_closed(y, params), rhs_vector(y, 0.0, 0.0))

    def q1(y):
        return _solve(assemble_resistance_closed(y, params), np.array([0.0, 0.0, 0.0, -1.0, 0.0]))

    def q2(y):
        return _solve(assemble_resistance_closed(y, params), np.array([0.0, 0.0, 0.0, 0.0, -1.0]))

    return VectorField(q0, "q0"), VectorField(q1, "q1"), VectorField(q2, "q2")
