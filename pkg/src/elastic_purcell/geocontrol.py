"""Lie brackets, controllability certificates and cycle-displacement expansions."""

import math
import re
from dataclasses import dataclass

import numpy as np

from .core import State, VectorField, control_fields

RANK_RTOL = 1e-8
DET_RTOL = 1e-10
TINY = 1e-14


def lie_bracket(f, g):
    """[f, g](y) = Jg(y) f(y) - Jf(y) g(y), itself differentiable."""

    def bracket(y):
        return g.jac(y) @ f(y) - f.jac(y) @ g(y)

    return VectorField(bracket, f"[{f.name},{g.name}]")


class BracketExpr:
    """Formal iterated bracket over the generators q0, q1, q2."""

    def __init__(self, generator=None, left=None, right=None):
        if (generator is None) == (left is None or right is None):
            raise ValueError("a bracket expression is either a generator or a pair")
        if generator is not None and generator not in (0, 1, 2):
            raise ValueError(f"unknown generator q{generator}")
        self.generator = generator
        self.left = left
        self.right = right

    @classmethod
    def gen(cls, k):
        return cls(generator=k)

    @property
    def is_leaf(self):
        return self.generator is not None

    def leaves(self):
        if self.is_leaf:
            return [self.generator]
        return self.left.leaves() + self.right.leaves()

    def degree(self):
        return len(self.leaves())

    def evaluate(self, fields):
        if self.is_leaf:
            return fields[self.generator]
        return lie_bracket(self.left.evaluate(fields), self.right.evaluate(fields))

    def __str__(self):
        if self.is_leaf:
            return f"q{self.generator}"
        return f"[{self.left},{self.right}]"

    def __repr__(self):
        return f"BracketExpr({self})"

    def __eq__(self, other):
        return isinstance(other, BracketExpr) and str(self) == str(other)

    def __hash__(self):
        return hash(str(self))


def bracket(a, b):
    return BracketExpr(left=a, right=b)


_TOKEN = re.compile(r"\s*(q[0-2]|\[|\]|,)")


def parse_bracket(text):
    """Parse expressions such as ``"[q1,[q1,q0]]"``."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"cannot parse bracket expression at {text[pos:]!r}")
        tokens.append(m.group(1))
        pos = m.end()

    def parse(i):
        tok = tokens[i] if i < len(tokens) else None
        if tok is not None and tok.startswith("q"):
            return BracketExpr.gen(int(tok[1])), i + 1
        if tok != "[":
            raise ValueError(f"malformed bracket expression {text!r}")
        left, i = parse(i + 1)
        if i >= len(tokens) or tokens[i] != ",":
            raise ValueError(f"malformed bracket expression {text!r}")
        right, i = parse(i + 1)
        if i >= len(tokens) or tokens[i] != "]":
            raise ValueError(f"malformed bracket expression {text!r}")
        return bracket(left, right), i + 1

    expr, end = parse(0)
    if end != len(tokens):
        raise ValueError(f"trailing input in bracket expression {text!r}")
    return expr


def delta_counters(expr):
    """Occurrences (d0, d1, d2) of q0, q1, q2 in a formal bracket."""
    leaves = expr.leaves()
    return tuple(leaves.count(k) for k in range(3))


def equilibrium(theta0, x=0.0, y=0.0):
    return np.array(State.equilibrium(theta0, x, y), dtype=float)


@dataclass(frozen=True)
class STLCReport:
    L: np.ndarray
    detL: float
    rank: int
    singular_values: np.ndarray
    det_tolerance: float
    sussmann_degree3_residual: float

    @property
    def full_rank(self):
        return self.rank == 5

    @property
    def conditioning(self):
        return float(self.singular_values[-1] / self.singular_values[0])


def build_L(theta0, params, x=0.0, y=0.0):
    """Columns q1, q2, [q1,q2], [q1,[q1,q2]], [q2,[q1,q2]] at the straight equilibrium."""
    q0, q1, q2 = control_fields(params)
    ye = equilibrium(theta0, x, y)
    q12 = lie_bracket(q1, q2)
    cols = [q1, q2, q12, lie_bracket(q1, q12), lie_bracket(q2, q12)]
    L = np.column_stack([f(ye) for f in cols])
    sv = np.linalg.svd(L, compute_uv=False)
    rank = int(np.sum(sv > RANK_RTOL * sv[0]))
    det = float(np.linalg.det(L))
    return STLCReport(
        L=L,
        detL=det,
        rank=rank,
        singular_values=sv,
        det_tolerance=DET_RTOL * sv[0] ** 5,
        sussmann_degree3_residual=sussmann_degree3_check(theta0, params),
    )


def degree3_brackets(theta0, params):
    """[q1,[q1,q0]] and [q2,[q2,q0]] at the equilibrium."""
    fields = control_fields(params)
    ye = equilibrium(theta0)
    h1 = parse_bracket("[q1,[q1,q0]]").evaluate(fields)(ye)
    h2 = parse_bracket("[q2,[q2,q0]]").evaluate(fields)(ye)
    return h1, h2


def sussmann_degree3_check(theta0, params):
    """Norm of sigma(h)(y_e) for the only bad brackets of degree three."""
    h1, h2 = degree3_brackets(theta0, params)
    return float(np.linalg.norm(h1 + h2))


def cycle_displacement(y0, gamma, tau, params, drift_weight=8.0):
    """Second-order estimate of y(4 tau) - y0 over one 4-phase piecewise cycle.

    The drift self-interaction enters with weight 8 (the exact tau^2 term of
    the flow of q0 over 4 tau).  ``drift_weight=6`` gives the alternative
    weight sometimes quoted for this expansion, whose o(tau^2) remainder fails
    away from equilibrium.
    """
    q0, q1, q2 = control_fields(params)
    y0 = np.asarray(y0, dtype=float)
    drift = q0(y0)
    second = (drift_weight * (q0.jac(y0) @ drift)
              + 2 * gamma * lie_bracket(q1, q0)(y0)
              + 2 * gamma * lie_bracket(q2, q0)(y0)
              - gamma**2 * lie_bracket(q1, q2)(y0))
    return 4 * tau * drift + tau**2 * second


def equilibrium_cycle_displacement(gamma, tau, nu, theta0=0.0):
    """Closed form of :func:`cycle_displacement` at a straight equilibrium."""
    k = 12 * gamma * nu * tau**2
    return k * np.array([
        -gamma * (1 - nu) * math.cos(theta0),
        -gamma * (1 - nu) * math.sin(theta0),
        2268 * nu / 25,
        -4374 * nu / 25,
        -4374 * nu / 25,
    ])


def iterated_cycle_displacement(y0, gamma, tau, n_cycles, params, drift_weight=8.0):
    """States after 0..n_cycles cycles, re-expanding about each new state."""
    if n_cycles < 1:
        raise ValueError("n_cycles must be >= 1")
    states = [np.asarray(y0, dtype=float)]
    for _ in range(n_cycles):
        y = states[-1]
        states.append(y + cycle_displacement(y, gamma, tau, params, drift_weight))
    return np.array(states)


COMPONENTS = ("x", "y", "theta", "alpha_m", "alpha_p")


@dataclass(frozen=True)
class ErrorMetrics:
    """Per-component errors; where ``absolute`` is set the numeric value was ~0."""

    errors: np.ndarray
    absolute: np.ndarray

    def __getitem__(self, name):
        return float(self.errors[COMPONENTS.index(name)])


def error_metrics(theory, numeric):
    theory = np.asarray(theory, dtype=float)
    numeric = np.asarray(numeric, dtype=float)
    diff = np.abs(theory - numeric)
    absolute = np.abs(numeric) < TINY
    scale = np.where(absolute, 1.0, np.abs(numeric))
    return ErrorMetrics(errors=diff / scale, absolute=absolute)
