"""Dense tensors, points and a second-order forward differentiation engine.

A :class:`Jet` carries a value together with its gradient and (optionally)
its Hessian with respect to a fixed set of seed variables.  Arithmetic on
jets is truncated Taylor arithmetic, which is exactly what nesting two
forward-mode dual numbers produces, so derivatives are exact up to
floating-point rounding.  Jets built with ``order=1`` drop the Hessian and
are used where only first derivatives are needed.

Multi-index tensors are stored row-major with all contravariant slots
first, followed by the covariant slots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "DomainError",
    "Jet",
    "Point",
    "TensorValue",
    "arctan",
    "contract",
    "cos",
    "eval_jet2",
    "exp",
    "fd_hessian",
    "fd_jacobian",
    "JetArray",
    "log",
    "seed",
    "sin",
    "split",
    "sqrt",
    "tan",
    "truncate",
]


class DomainError(ValueError):
    """A primitive was evaluated at a singular point."""


@dataclass(frozen=True)
class Point:
    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float).reshape(-1)
        if c.size == 0:
            raise ValueError("a point needs at least one coordinate")
        if not np.all(np.isfinite(c)):
            raise ValueError(f"non-finite coordinates: {c}")
        object.__setattr__(self, "coords", c)

    @property
    def dim(self) -> int:
        return self.coords.size


def _as_coords(p) -> np.ndarray:
    return p.coords if isinstance(p, Point) else Point(p).coords


class Jet:
    """Truncated second-order Taylor expansion of a scalar."""

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value: float, grad: np.ndarray, hess: np.ndarray | None = None):
        self.value = float(value)
        self.grad = grad
        self.hess = hess

    @property
    def order(self) -> int:
        return 1 if self.hess is None else 2

    def __repr__(self) -> str:
        return f"Jet({self.value!r}, grad={self.grad!r})"

    def _lift(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        z = np.zeros_like(self.grad)
        h = None if self.hess is None else np.zeros_like(self.hess)
        return Jet(other, z, h)

    def _chain(self, f0: float, f1: float, f2: float) -> "Jet":
        g = f1 * self.grad
        if self.hess is None:
            return Jet(f0, g)
        return Jet(f0, g, f1 * self.hess + f2 * np.outer(self.grad, self.grad))

    def __add__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.value + other, self.grad, self.hess)
        h = None if self.hess is None or other.hess is None else self.hess + other.hess
        return Jet(self.value + other.value, self.grad + other.grad, h)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.value, -self.grad, None if self.hess is None else -self.hess)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            other = float(other)
            return Jet(self.value * other, self.grad * other,
                       None if self.hess is None else self.hess * other)
        a, b = self.value, other.value
        g = a * other.grad + b * self.grad
        if self.hess is None or other.hess is None:
            return Jet(a * b, g)
        cross = np.outer(self.grad, other.grad)
        return Jet(a * b, g, a * other.hess + b * self.hess + cross + cross.T)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        x = self.value
        if x == 0.0:
            raise DomainError("division by a jet with zero value")
        return self._chain(1.0 / x, -1.0 / x**2, 2.0 / x**3)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            if other == 0:
                raise DomainError("division by zero")
            return self * (1.0 / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k):
        if isinstance(k, Jet):
            return exp(k * log(self))
        k = float(k)
        x = self.value
        if k == int(k) and k >= 0:
            if k == 0:
                return self._lift(1.0)
            return self._chain(x**k, k * x ** (k - 1), k * (k - 1) * x ** (k - 2) if k >= 2 else 0.0)
        if x <= 0.0:
            raise DomainError(f"non-integer power of non-positive value {x}")
        return self._chain(x**k, k * x ** (k - 1), k * (k - 1) * x ** (k - 2))


def _unary(name: str, f0, f1, f2, check=None):
    np_f = getattr(np, name)

    def fn(x):
        if check is not None:
            check(x.value if isinstance(x, Jet) else x)
        if isinstance(x, Jet):
            v = x.value
            return x._chain(f0(v), f1(v), f2(v))
        return np_f(x)

    fn.__name__ = name
    fn.__doc__ = f"Jet-aware {name}."
    return fn


def _positive(x):
    if np.any(np.asarray(x) <= 0):
        raise DomainError(f"log of non-positive value {x}")


def _nonnegative_sqrt(x):
    if np.any(np.asarray(x) <= 0):
        raise DomainError(f"sqrt derivative undefined at {x}")


def _tan_ok(x):
    if np.any(np.abs(np.cos(x)) < 1e-12):
        raise DomainError(f"tan pole at {x}")


sin = _unary("sin", math.sin, math.cos, lambda v: -math.sin(v))
cos = _unary("cos", math.cos, lambda v: -math.sin(v), lambda v: -math.cos(v))
exp = _unary("exp", math.exp, math.exp, math.exp)
log = _unary("log", math.log, lambda v: 1.0 / v, lambda v: -1.0 / v**2, _positive)
tan = _unary("tan", math.tan, lambda v: 1.0 / math.cos(v) ** 2,
             lambda v: 2.0 * math.tan(v) / math.cos(v) ** 2, _tan_ok)
arctan = _unary("arctan", math.atan, lambda v: 1.0 / (1.0 + v * v),
                lambda v: -2.0 * v / (1.0 + v * v) ** 2)


def sqrt(x):
    if isinstance(x, Jet):
        _nonnegative_sqrt(x.value)
        r = math.sqrt(x.value)
        return x._chain(r, 0.5 / r, -0.25 / (r * x.value))
    return np.sqrt(x)


def seed(p, order: int = 2) -> list[Jet]:
    """Independent jet variables at ``p``, one per coordinate."""
    c = _as_coords(p)
    m = c.size
    eye = np.eye(m)
    if order == 2:
        return [Jet(c[i], eye[i].copy(), np.zeros((m, m))) for i in range(m)]
    if order == 1:
        return [Jet(c[i], eye[i].copy()) for i in range(m)]
    raise ValueError("order must be 1 or 2")


def truncate(x):
    """Drop second-order information."""
    if isinstance(x, Jet):
        return Jet(x.value, x.grad)
    return x


def eval_jet2(f: Callable[[Sequence[Jet]], object], p) -> Jet:
    """Value, gradient and Hessian of a scalar map at ``p``."""
    x = seed(p, order=2)
    out = f(x)
    if not isinstance(out, Jet):
        m = len(x)
        out = Jet(float(out), np.zeros(m), np.zeros((m, m)))
    out.hess = 0.5 * (out.hess + out.hess.T)
    return out


def split(arr, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Values and first derivatives of a (possibly nested) array of jets.

    Plain numbers count as constants.  The derivative axis is appended last.
    """
    a = np.asarray(arr, dtype=object)
    val = np.empty(a.shape)
    der = np.zeros(a.shape + (m,))
    for idx, x in np.ndenumerate(a):
        if isinstance(x, Jet):
            val[idx] = x.value
            der[idx] = x.grad
        else:
            val[idx] = x
    return val, der


class JetArray:
    """Array of values with first derivatives along ``m`` seed variables.

    ``der`` has the shape of ``val`` plus a trailing derivative axis.  Only
    the operations needed for small dense linear algebra are provided.
    """

    __array_priority__ = 100

    def __init__(self, val, der):
        self.val = np.asarray(val, dtype=float)
        self.der = np.asarray(der, dtype=float)
        if self.der.shape[:-1] != self.val.shape:
            raise ValueError(f"derivative shape {self.der.shape} does not match {self.val.shape}")

    @classmethod
    def of(cls, arr, m: int) -> "JetArray":
        return cls(*split(arr, m))

    @classmethod
    def const(cls, val, m: int) -> "JetArray":
        val = np.asarray(val, dtype=float)
        return cls(val, np.zeros(val.shape + (m,)))

    @property
    def width(self) -> int:
        return self.der.shape[-1]

    @property
    def shape(self):
        return self.val.shape

    def __repr__(self) -> str:
        return f"JetArray({self.val!r})"

    def _wrap(self, other) -> "JetArray":
        return other if isinstance(other, JetArray) else JetArray.const(other, self.width)

    def __getitem__(self, idx) -> "JetArray":
        if not isinstance(idx, tuple):
            idx = (idx,)
        return JetArray(self.val[idx], self.der[idx + (slice(None),)])

    @property
    def T(self) -> "JetArray":
        axes = tuple(reversed(range(self.val.ndim)))
        return JetArray(self.val.transpose(axes), self.der.transpose(axes + (self.val.ndim,)))

    def __add__(self, other):
        o = self._wrap(other)
        return JetArray(self.val + o.val, self.der + o.der)

    __radd__ = __add__

    def __neg__(self):
        return JetArray(-self.val, -self.der)

    def __sub__(self, other):
        return self + (-self._wrap(other))

    def __rsub__(self, other):
        return self._wrap(other) - self

    def __mul__(self, other):
        # elementwise; a 0-d operand broadcasts as a scalar
        o = self._wrap(other)
        val = self.val * o.val
        der = self.der * o.val[..., None] + self.val[..., None] * o.der
        return JetArray(val, der)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._wrap(other)
        inv = 1.0 / o.val
        return self * JetArray(inv, -o.der * (inv * inv)[..., None])

    def __matmul__(self, other):
        o = self._wrap(other)
        ka = self.val.ndim - 1
        val = self.val @ o.val
        left = np.moveaxis(np.tensordot(self.der, o.val, axes=([ka], [0])), ka, -1)
        right = np.tensordot(self.val, o.der, axes=([ka], [0]))
        return JetArray(val, left + right)

    def __rmatmul__(self, other):
        return self._wrap(other) @ self

    def sqrt(self) -> "JetArray":
        r = np.sqrt(self.val)
        return JetArray(r, self.der * (0.5 / r)[..., None])

    def inv(self) -> "JetArray":
        inv = np.linalg.inv(self.val)
        return JetArray(inv, -np.einsum("ij,jkm,kl->ilm", inv, self.der, inv))

    @staticmethod
    def hstack(parts: Sequence["JetArray"]) -> "JetArray":
        vals = [p.val if p.val.ndim == 2 else p.val[:, None] for p in parts]
        ders = [p.der if p.val.ndim == 2 else p.der[:, None, :] for p in parts]
        return JetArray(np.concatenate(vals, axis=1), np.concatenate(ders, axis=1))


def fd_jacobian(f: Callable[[np.ndarray], object], p, h: float = 1e-3) -> np.ndarray:
    """Central-difference Jacobian with one Richardson step (h and h/2).

    Returns shape (k, m) for a map R^m -> R^k (k = 1 for scalar maps).
    """
    if h <= 0:
        raise ValueError("step must be positive")
    c = _as_coords(p)
    m = c.size

    def central(step):
        cols = []
        for i in range(m):
            e = np.zeros(m)
            e[i] = step
            fp = np.atleast_1d(np.asarray(f(c + e), dtype=float))
            fm = np.atleast_1d(np.asarray(f(c - e), dtype=float))
            cols.append((fp - fm) / (2 * step))
        return np.stack(cols, axis=-1)

    d1, d2 = central(h), central(h / 2)
    return (4.0 * d2 - d1) / 3.0


def fd_hessian(f: Callable[[np.ndarray], float], p, h: float = 1e-3) -> np.ndarray:
    """Second differences of a scalar map, Richardson-extrapolated."""
    c = _as_coords(p)
    m = c.size

    def second(step):
        H = np.empty((m, m))
        for i in range(m):
            for j in range(m):
                ei = np.zeros(m)
                ej = np.zeros(m)
                ei[i] = step
                ej[j] = step
                H[i, j] = (f(c + ei + ej) - f(c + ei - ej) - f(c - ei + ej) + f(c - ei - ej)) / (
                    4 * step * step
                )
        return H

    H = (4.0 * second(h / 2) - second(h)) / 3.0
    return 0.5 * (H + H.T)


@dataclass(frozen=True)
class TensorValue:
    """Component array of an (r, s) tensor; contravariant slots come first."""

    valence: tuple[int, int]
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        r, s = self.valence
        if r < 0 or s < 0 or e.ndim != r + s:
            raise ValueError(f"valence {self.valence} does not match array rank {e.ndim}")
        if not np.all(np.isfinite(e)):
            raise ValueError("non-finite tensor entries")
        object.__setattr__(self, "entries", e)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.entries.shape

    def __float__(self) -> float:
        return float(self.entries)


def contract(t: TensorValue, slot_a: int, slot_b: int) -> TensorValue:
    r, s = t.valence
    a, b = sorted((slot_a, slot_b))
    if a == b or b >= r + s or a < 0:
        raise ValueError(f"invalid slot pair ({slot_a}, {slot_b})")
    if not (a < r <= b):
        raise ValueError("contraction needs one contravariant and one covariant slot")
    if t.dims[a] != t.dims[b]:
        raise ValueError(f"extent mismatch {t.dims[a]} != {t.dims[b]}")
    return TensorValue((r - 1, s - 1), np.trace(t.entries, axis1=a, axis2=b))
