"""Commutative scale groups with an absolute.

Three concrete groups are supported:

* ``POSITIVE_REAL``: ``(0, +inf)`` under multiplication, absolute at 0.
* ``INTEGER_SHIFT``: the integers under addition, absolute at ``-inf``.
* ``NONZERO_COMPLEX``: nonzero complex numbers under multiplication,
  absolute at modulus 0.

The absolute is handled operationally: nets that approach it and a
predicate telling which of two elements is nearer to it.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from numbers import Complex, Integral, Real
from typing import Union

from .errors import IncompatibleScaleError, NetError

__all__ = [
    "ScaleKind",
    "ScaleElement",
    "AbsoluteNet",
    "as_scale",
    "compose",
    "invert",
    "neutral",
    "is_nearer_absolute",
    "net_toward_absolute",
    "default_net",
    "positive",
    "shift",
    "nonzero_complex",
]


class ScaleKind(str, Enum):
    POSITIVE_REAL = "positive_real"
    INTEGER_SHIFT = "integer_shift"
    NONZERO_COMPLEX = "nonzero_complex"


ScaleLike = Union["ScaleElement", int, float, complex]


@dataclass(frozen=True)
class ScaleElement:
    """An element of one of the supported scale groups."""

    kind: ScaleKind
    value: Union[float, int, complex]

    def __post_init__(self):
        kind = ScaleKind(self.kind)
        object.__setattr__(self, "kind", kind)
        v = self.value
        if kind is ScaleKind.POSITIVE_REAL:
            if isinstance(v, Complex) and not isinstance(v, Real):
                raise TypeError("positive real scale needs a real payload")
            v = float(v)
            if not (v > 0.0 and math.isfinite(v)):
                raise ValueError(f"positive real scale must be finite and > 0, got {v!r}")
        elif kind is ScaleKind.INTEGER_SHIFT:
            if isinstance(v, float) and v.is_integer():
                v = int(v)
            if not isinstance(v, Integral):
                raise TypeError(f"integer scale needs an integer payload, got {v!r}")
            v = int(v)
        else:
            v = complex(v)
            if not (abs(v) > 0.0 and cmath.isfinite(v)):
                raise ValueError(f"complex scale must be finite and nonzero, got {v!r}")
        object.__setattr__(self, "value", v)

    def __mul__(self, other):
        if not isinstance(other, ScaleElement):
            return NotImplemented
        return compose(self, other)

    def __invert__(self):
        return invert(self)

    def __repr__(self):
        return f"ScaleElement({self.kind.value}, {self.value!r})"

    @property
    def is_neutral(self):
        return self == neutral(self.kind)


def positive(x) -> ScaleElement:
    return ScaleElement(ScaleKind.POSITIVE_REAL, x)


def shift(n) -> ScaleElement:
    return ScaleElement(ScaleKind.INTEGER_SHIFT, n)


def nonzero_complex(z) -> ScaleElement:
    return ScaleElement(ScaleKind.NONZERO_COMPLEX, z)


def as_scale(value: ScaleLike, kind: ScaleKind) -> ScaleElement:
    """Coerce a raw number (or check an element) into the group ``kind``."""
    kind = ScaleKind(kind)
    if isinstance(value, ScaleElement):
        if value.kind is not kind:
            raise IncompatibleScaleError(
                f"expected a {kind.value} scale, got {value.kind.value}"
            )
        return value
    return ScaleElement(kind, value)


def _same_kind(a: ScaleElement, b: ScaleElement) -> ScaleKind:
    if a.kind is not b.kind:
        raise IncompatibleScaleError(
            f"cannot combine {a.kind.value} with {b.kind.value}"
        )
    return a.kind


def compose(a: ScaleElement, b: ScaleElement) -> ScaleElement:
    """Group operation: product of reals or complexes, sum of integers."""
    kind = _same_kind(a, b)
    if kind is ScaleKind.INTEGER_SHIFT:
        return ScaleElement(kind, a.value + b.value)
    return ScaleElement(kind, a.value * b.value)


def invert(a: ScaleElement) -> ScaleElement:
    if a.kind is ScaleKind.INTEGER_SHIFT:
        return ScaleElement(a.kind, -a.value)
    return ScaleElement(a.kind, 1.0 / a.value)


def neutral(kind: ScaleKind) -> ScaleElement:
    kind = ScaleKind(kind)
    if kind is ScaleKind.INTEGER_SHIFT:
        return ScaleElement(kind, 0)
    if kind is ScaleKind.NONZERO_COMPLEX:
        return ScaleElement(kind, 1 + 0j)
    return ScaleElement(kind, 1.0)


def _height(a: ScaleElement) -> float:
    # Monotone "distance" to the absolute: smaller is nearer.
    if a.kind is ScaleKind.INTEGER_SHIFT:
        return float(a.value)
    return abs(a.value)


def is_nearer_absolute(a: ScaleElement, b: ScaleElement) -> bool:
    """True when ``a`` is strictly nearer to the absolute than ``b``."""
    _same_kind(a, b)
    return _height(a) < _height(b)


@dataclass(frozen=True)
class AbsoluteNet:
    """Geometric (or arithmetic, for integers) net ``start * ratio**k``."""

    start: ScaleElement
    ratio: ScaleElement
    count: int

    def __post_init__(self):
        _same_kind(self.start, self.ratio)
        if int(self.count) != self.count or self.count < 2:
            raise NetError(f"net count must be an integer >= 2, got {self.count!r}")
        if not is_nearer_absolute(compose(self.start, self.ratio), self.start):
            raise NetError(
                f"ratio {self.ratio.value!r} does not contract toward the absolute"
            )

    @property
    def kind(self) -> ScaleKind:
        return self.start.kind

    def elements(self) -> list:
        return net_toward_absolute(self)


def net_toward_absolute(net: AbsoluteNet) -> list:
    """Return ``[start, start*ratio, start*ratio**2, ...]`` of length ``count``."""
    out = [net.start]
    for _ in range(net.count - 1):
        out.append(compose(out[-1], net.ratio))
    for prev, cur in zip(out, out[1:]):
        if not is_nearer_absolute(cur, prev):
            # reachable only through floating underflow
            raise NetError("net stalled before reaching the requested length")
    return out


def default_net(kind: ScaleKind, count: int = 20) -> AbsoluteNet:
    """Default nets: 0.5 * 2**-k for reals, -1, -2, ... for integers, and a
    modulus-halving spiral (argument step pi/7) for complex scales."""
    kind = ScaleKind(kind)
    if kind is ScaleKind.INTEGER_SHIFT:
        return AbsoluteNet(shift(-1), shift(-1), count)
    if kind is ScaleKind.NONZERO_COMPLEX:
        step = 0.5 * cmath.exp(1j * math.pi / 7)
        return AbsoluteNet(nonzero_complex(step), nonzero_complex(step), count)
    return AbsoluteNet(positive(0.5), positive(0.5), count)
