"""The pair groupoid ``X x X`` and its deformation by dilations.

An arrow ``(x, y)`` has target ``x`` and source ``y``; composition is
``(x, u)(u, v) = (x, v)``. Objects are points, compared up to
:data:`ENDPOINT_TOL`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DilationModel, approx_diff
from .errors import CompositionError, DomainError

__all__ = [
    "ENDPOINT_TOL",
    "Arrow",
    "identity_arrow",
    "compose_arrows",
    "add",
    "inverse_arrow",
    "dif_arrows",
    "dilate_arrow",
    "norm_arrow",
    "deformed_dif",
]

ENDPOINT_TOL = 1e-12


def _pt(p):
    arr = np.atleast_1d(np.asarray(p, dtype=float)).copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Arrow:
    """Arrow from ``source`` to ``target``, written ``(target, source)``."""

    target: np.ndarray
    source: np.ndarray

    def __post_init__(self):
        t, s = _pt(self.target), _pt(self.source)
        if t.shape != s.shape:
            raise ValueError(f"endpoints live in different carriers: {t.shape} vs {s.shape}")
        object.__setattr__(self, "target", t)
        object.__setattr__(self, "source", s)

    @property
    def is_identity(self) -> bool:
        return _same(self.target, self.source)

    def isclose(self, other: "Arrow", tol: float = ENDPOINT_TOL) -> bool:
        return _same(self.target, other.target, tol) and _same(self.source, other.source, tol)

    def __iter__(self):
        yield self.target
        yield self.source

    def __repr__(self):
        return f"Arrow(target={self.target.tolist()}, source={self.source.tolist()})"


def _same(p, q, tol=ENDPOINT_TOL) -> bool:
    return p.shape == q.shape and bool(np.max(np.abs(p - q), initial=0.0) <= tol)


def identity_arrow(x) -> Arrow:
    return Arrow(x, x)


def compose_arrows(g: Arrow, h: Arrow) -> Arrow:
    """``(x, u)(u, v) = (x, v)``; requires ``source(g) == target(h)``."""
    if not _same(g.source, h.target):
        raise CompositionError(
            f"cannot compose: source {g.source.tolist()} != target {h.target.tolist()}"
        )
    return Arrow(g.target, h.source)


add = compose_arrows


def inverse_arrow(g: Arrow) -> Arrow:
    return Arrow(g.source, g.target)


def dif_arrows(g: Arrow, h: Arrow) -> Arrow:
    """``g h^-1``: ``((u, x), (v, x)) -> (u, v)`` for arrows with a common source."""
    if not _same(g.source, h.source):
        raise CompositionError(
            f"difference needs a common source: {g.source.tolist()} vs {h.source.tolist()}"
        )
    return compose_arrows(g, inverse_arrow(h))


def norm_arrow(m: DilationModel, g: Arrow) -> float:
    return float(m.distance(g.target, g.source))


def dilate_arrow(m: DilationModel, eps, g: Arrow) -> Arrow:
    """Dilate the target about the source; the source is kept."""
    if norm_arrow(m, g) > m.locality_radius:
        raise DomainError(f"{m.name}: arrow too long to dilate (norm {norm_arrow(m, g):.6g})")
    return Arrow(m.op(eps, g.source, g.target), g.source)


def deformed_dif(m: DilationModel, eps, g: Arrow, h: Arrow) -> Arrow:
    """Deformed difference of two arrows with a common source ``x``.

    For ``g = (y, x)`` and ``h = (z, x)`` this is the arrow
    ``(approx_diff(x, z, y), x o_eps z)``, the unique arrow whose dilation
    equals ``dif(dilate(g), dilate(h))``.
    """
    if not _same(g.source, h.source):
        raise CompositionError("deformed difference needs a common source")
    x = g.source
    for a in (g, h):
        if norm_arrow(m, a) > m.locality_radius:
            raise DomainError(f"{m.name}: arrow too long to dilate")
    y, z = g.target, h.target
    return Arrow(approx_diff(m, eps, x, z, y), m.op(eps, x, z))
