"""Forward-mode dual numbers with nesting levels.

A ``Dual`` carries a value and a single tangent.  Both may themselves be
duals of a lower level, which gives exact higher derivatives by nesting
(Jacobians of Lie brackets need second derivatives of the base fields).
Each seeding pass allocates a fresh level so perturbations from an outer
differentiation are treated as constants by an inner one.
"""

import math

import numpy as np


class Dual:
    __slots__ = ("val", "eps", "level")

    def __init__(self, val, eps, level):
        self.val = val
        self.eps = eps
        self.level = level

    def __repr__(self):
        return f"Dual({self.val!r}, {self.eps!r}, level={self.level})"

    def _split(self, other):
        # other is a constant relative to this level
        if isinstance(other, Dual) and other.level == self.level:
            return other.val, other.eps
        return other, 0.0

    def __add__(self, other):
        if isinstance(other, Dual) and other.level > self.level:
            return other.__radd__(self)
        v, e = self._split(other)
        return Dual(self.val + v, self.eps + e, self.level)

    def __radd__(self, other):
        return Dual(other + self.val, self.eps, self.level)

    def __sub__(self, other):
        if isinstance(other, Dual) and other.level > self.level:
            return other.__rsub__(self)
        v, e = self._split(other)
        return Dual(self.val - v, self.eps - e, self.level)

    def __rsub__(self, other):
        return Dual(other - self.val, -self.eps, self.level)

    def __neg__(self):
        return Dual(-self.val, -self.eps, self.level)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, Dual) and other.level > self.level:
            return other.__rmul__(self)
        v, e = self._split(other)
        return Dual(self.val * v, self.val * e + self.eps * v, self.level)

    def __rmul__(self, other):
        return Dual(other * self.val, other * self.eps, self.level)

    def __truediv__(self, other):
        if isinstance(other, Dual) and other.level > self.level:
            return other.__rtruediv__(self)
        v, e = self._split(other)
        return Dual(self.val / v, (self.eps * v - self.val * e) / (v * v), self.level)

    def __rtruediv__(self, other):
        return Dual(other / self.val, -other * self.eps / (self.val * self.val), self.level)

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        return Dual(self.val**n, n * self.val ** (n - 1) * self.eps, self.level)

    # numpy calls these for object arrays
    def sin(self):
        return Dual(sin(self.val), cos(self.val) * self.eps, self.level)

    def cos(self):
        return Dual(cos(self.val), -sin(self.val) * self.eps, self.level)

    def sqrt(self):
        r = sqrt(self.val)
        return Dual(r, self.eps / (2 * r), self.level)

    def exp(self):
        r = exp(self.val)
        return Dual(r, r * self.eps, self.level)

    def sinh(self):
        return Dual(sinh(self.val), cosh(self.val) * self.eps, self.level)

    def cosh(self):
        return Dual(cosh(self.val), sinh(self.val) * self.eps, self.level)


def sin(x):
    if isinstance(x, Dual):
        return x.sin()
    return math.sin(x)


def cos(x):
    if isinstance(x, Dual):
        return x.cos()
    return math.cos(x)


def sqrt(x):
    if isinstance(x, Dual):
        return x.sqrt()
    return math.sqrt(x)


def exp(x):
    if isinstance(x, Dual):
        return x.exp()
    return math.exp(x)


def sinh(x):
    if isinstance(x, Dual):
        return x.sinh()
    return math.sinh(x)


def cosh(x):
    if isinstance(x, Dual):
        return x.cosh()
    return math.cosh(x)


def derivative(f, t):
    """df/dt at scalar t; f may return a scalar or a tuple of scalars."""
    lvl = level_of(t) + 1
    out = f(Dual(t, 1.0, lvl))
    if isinstance(out, tuple):
        return tuple(o.eps if isinstance(o, Dual) and o.level == lvl else 0.0 for o in out)
    return out.eps if isinstance(out, Dual) and out.level == lvl else 0.0


def primal(x):
    """Strip every tangent level and return the underlying float."""
    while isinstance(x, Dual):
        x = x.val
    return float(x)


def level_of(x):
    return x.level if isinstance(x, Dual) else 0


def max_level(arr):
    arr = np.asarray(arr, dtype=object) if not isinstance(arr, np.ndarray) else arr
    if arr.dtype != object:
        return 0
    return max((level_of(v) for v in arr.flat), default=0)


def as_array(items):
    """Pack a sequence into a float array when possible, an object array otherwise."""
    try:
        return np.array(items, dtype=float)
    except TypeError:
        return np.array(items, dtype=object)


def split(arr, level):
    """Split an array into value and tangent parts at ``level``."""
    vals = np.empty(arr.shape, dtype=object)
    eps = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        if isinstance(v, Dual) and v.level == level:
            vals[idx], eps[idx] = v.val, v.eps
        else:
            vals[idx], eps[idx] = v, 0.0
    return _maybe_float(vals), _maybe_float(eps)


def _maybe_float(arr):
    if arr.dtype == object and not any(isinstance(v, Dual) for v in arr.flat):
        return arr.astype(float)
    return arr


def combine(vals, eps, level):
    out = np.empty(np.shape(vals), dtype=object)
    for idx in np.ndindex(out.shape):
        out[idx] = Dual(vals[idx], eps[idx], level)
    return out


def tangent(arr, level):
    """Tangent part of every entry at ``level`` (zero where absent)."""
    return split(np.asarray(arr, dtype=object), level)[1]


def solve(R, b, lapack=np.linalg.solve):
    """Solve ``R x = b`` where entries may be duals.

    The top tangent level is peeled off with d(R^-1 b) = R^-1 (db - dR R^-1 b)
    and the two resulting real systems are solved recursively, so the base
    case is always a plain float LU solve with partial pivoting.
    """
    R = np.asarray(R)
    b = np.asarray(b)
    lvl = max(max_level(R), max_level(b))
    if lvl == 0:
        return lapack(np.asarray(R, dtype=float), np.asarray(b, dtype=float))
    Rv, Re = split(np.asarray(R, dtype=object), lvl)
    bv, be = split(np.asarray(b, dtype=object), lvl)
    x = solve(Rv, bv, lapack)
    rhs = be - Re @ x
    dx = solve(Rv, _maybe_float(np.asarray(rhs, dtype=object)), lapack)
    return combine(x, dx, lvl)


def jacobian(f, y):
    """Exact Jacobian of ``f`` at ``y`` by one forward pass per input direction.

    ``y`` may already hold duals; the seed uses the next free level so the
    result is itself differentiable.
    """
    y = np.asarray(y)
    n = y.shape[0]
    lvl = max_level(y) + 1
    cols = []
    for k in range(n):
        seeded = np.empty(n, dtype=object)
        for i in range(n):
            base = y[i] if isinstance(y[i], Dual) else float(y[i])
            seeded[i] = Dual(base, 1.0 if i == k else 0.0, lvl)
        out = np.asarray(f(seeded), dtype=object)
        cols.append(tangent(out, lvl))
    J = np.empty((len(cols[0]), n), dtype=object)
    for k, col in enumerate(cols):
        J[:, k] = col
    return _maybe_float(J)
