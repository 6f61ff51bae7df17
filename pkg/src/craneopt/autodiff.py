"""Forward-mode automatic differentiation on dual numbers.

``Dual`` carries a value together with a stack of directional derivatives;
``Dual2`` additionally carries the full matrix of second derivatives.  The
derivative slots have one (``Dual``) or two (``Dual2``) leading axes that
enumerate seed directions, and any trailing axes broadcast against the value,
so a function written once with the helpers below can be differentiated at
many sample points in a single vectorized evaluation.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Dual",
    "Dual2",
    "seed",
    "seed2",
    "sin",
    "cos",
    "sqrt",
    "exp",
    "log",
    "value_of",
    "jacobian",
]


def _outer(da, db):
    # works for both (k,) and (k, n) derivative stacks
    return da[:, None] * db[None, :]


class Dual:
    """First-order dual number: value plus directional derivatives."""

    __slots__ = ("val", "der")

    def __init__(self, val, der):
        self.val = val
        self.der = der

    def __repr__(self):
        return f"Dual({self.val!r}, der={self.der!r})"

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.der + other.der)
        return Dual(self.val + other, self.der)

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.val, -self.der)

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.der - other.der)
        return Dual(self.val - other, self.der)

    def __rsub__(self, other):
        return Dual(other - self.val, -self.der)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val * other.val, self.der * other.val + self.val * other.der)
        return Dual(self.val * other, self.der * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            inv = 1.0 / other.val
            val = self.val * inv
            return Dual(val, (self.der - val * other.der) * inv)
        return Dual(self.val / other, self.der / other)

    def __rtruediv__(self, other):
        inv = 1.0 / self.val
        val = other * inv
        return Dual(val, -val * inv * self.der)

    def __pow__(self, p):
        if not isinstance(p, int) or p < 2:
            raise TypeError("only integer powers >= 2 are supported")
        out = self
        for _ in range(p - 1):
            out = out * self
        return out

    def sin(self):
        return Dual(np.sin(self.val), np.cos(self.val) * self.der)

    def cos(self):
        return Dual(np.cos(self.val), -np.sin(self.val) * self.der)

    def sqrt(self):
        root = np.sqrt(self.val)
        return Dual(root, self.der / (2.0 * root))

    def exp(self):
        e = np.exp(self.val)
        return Dual(e, e * self.der)

    def log(self):
        return Dual(np.log(self.val), self.der / self.val)


class Dual2:
    """Second-order dual number: value, gradient stack and Hessian stack."""

    __slots__ = ("val", "der", "hes")

    def __init__(self, val, der, hes):
        self.val = val
        self.der = der
        self.hes = hes

    def __repr__(self):
        return f"Dual2({self.val!r})"

    def __add__(self, other):
        if isinstance(other, Dual2):
            return Dual2(self.val + other.val, self.der + other.der, self.hes + other.hes)
        return Dual2(self.val + other, self.der, self.hes)

    __radd__ = __add__

    def __neg__(self):
        return Dual2(-self.val, -self.der, -self.hes)

    def __sub__(self, other):
        if isinstance(other, Dual2):
            return Dual2(self.val - other.val, self.der - other.der, self.hes - other.hes)
        return Dual2(self.val - other, self.der, self.hes)

    def __rsub__(self, other):
        return Dual2(other - self.val, -self.der, -self.hes)

    def __mul__(self, other):
        if isinstance(other, Dual2):
            cross = _outer(self.der, other.der)
            hes = (
                self.hes * other.val
                + other.hes * self.val
                + cross
                + np.swapaxes(cross, 0, 1)
            )
            return Dual2(self.val * other.val, self.der * other.val + self.val * other.der, hes)
        return Dual2(self.val * other, self.der * other, self.hes * other)

    __rmul__ = __mul__

    def _reciprocal(self):
        inv = 1.0 / self.val
        inv2 = inv * inv
        hes = -self.hes * inv2 + 2.0 * inv2 * inv * _outer(self.der, self.der)
        return Dual2(inv, -inv2 * self.der, hes)

    def __truediv__(self, other):
        if isinstance(other, Dual2):
            return self * other._reciprocal()
        return Dual2(self.val / other, self.der / other, self.hes / other)

    def __rtruediv__(self, other):
        return self._reciprocal() * other

    def __pow__(self, p):
        if not isinstance(p, int) or p < 2:
            raise TypeError("only integer powers >= 2 are supported")
        out = self
        for _ in range(p - 1):
            out = out * self
        return out

    def _chain(self, f, df, d2f):
        return Dual2(f, df * self.der, df * self.hes + d2f * _outer(self.der, self.der))

    def sin(self):
        s, c = np.sin(self.val), np.cos(self.val)
        return self._chain(s, c, -s)

    def cos(self):
        s, c = np.sin(self.val), np.cos(self.val)
        return self._chain(c, -s, -c)

    def sqrt(self):
        root = np.sqrt(self.val)
        return self._chain(root, 0.5 / root, -0.25 / (root * self.val))

    def exp(self):
        e = np.exp(self.val)
        return self._chain(e, e, e)

    def log(self):
        inv = 1.0 / self.val
        return self._chain(np.log(self.val), inv, -inv * inv)


def sin(x):
    return x.sin() if isinstance(x, (Dual, Dual2)) else np.sin(x)


def cos(x):
    return x.cos() if isinstance(x, (Dual, Dual2)) else np.cos(x)


def sqrt(x):
    return x.sqrt() if isinstance(x, (Dual, Dual2)) else np.sqrt(x)


def exp(x):
    return x.exp() if isinstance(x, (Dual, Dual2)) else np.exp(x)


def log(x):
    return x.log() if isinstance(x, (Dual, Dual2)) else np.log(x)


def value_of(x):
    return x.val if isinstance(x, (Dual, Dual2)) else x


def seed(values):
    """Wrap ``values`` into ``Dual``s seeded with unit directions.

    Each value may be a scalar or an ndarray; all arrays must share a shape.
    """
    k = len(values)
    shape = np.broadcast_shapes(*(np.shape(v) for v in values))
    out = []
    for i, v in enumerate(values):
        der = np.zeros((k,) + shape)
        der[i] = 1.0
        out.append(Dual(np.asarray(v, dtype=float) if shape else float(v), der))
    return out


def seed2(values):
    """Like :func:`seed` but with second-order duals."""
    k = len(values)
    shape = np.broadcast_shapes(*(np.shape(v) for v in values))
    out = []
    for i, v in enumerate(values):
        der = np.zeros((k,) + shape)
        der[i] = 1.0
        hes = np.zeros((k, k) + shape)
        out.append(Dual2(np.asarray(v, dtype=float) if shape else float(v), der, hes))
    return out


def jacobian(f, x):
    """Jacobian of ``f`` (returning a sequence of outputs) at the point ``x``."""
    x = np.asarray(x, dtype=float)
    outs = f(*seed(list(x)))
    rows = [o.der if isinstance(o, Dual) else np.zeros(x.size) for o in outs]
    return np.array(rows)
