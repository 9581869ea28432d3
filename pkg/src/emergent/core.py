"""Scale-indexed idempotent quasigroups over a dilation model.

A :class:`DilationModel` supplies the family ``x o_eps y`` on its carrier.
Everything else here is generic: the inverse-scale operation ``bullet``,
the approximate sum/difference/inverse, the far-point ("blue")
construction, and numerical checkers for the quasigroup axioms.

Points are 1-d float arrays whose length is the model's ``dim``.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .errors import CarrierError, DomainError, NonLocalIntermediateError
from .scale import ScaleElement, ScaleKind, as_scale, compose, invert, neutral

__all__ = [
    "DilationModel",
    "CheckReport",
    "check_point",
    "check_sample",
    "residual",
    "op",
    "bullet",
    "approx_sum",
    "approx_diff",
    "approx_inv",
    "blue_construction",
    "check_idempotent",
    "check_trivial_at_neutral",
    "check_one_parameter_law",
    "check_left_division",
    "check_right_division",
    "check_self_distributivity",
    "check_sum_diff_cancellation",
]

EXACT_TOL = 1e-12
TRANSCENDENTAL_TOL = 1e-9


class DilationModel(ABC):
    """A carrier set with a scale-indexed family of dilations.

    Subclasses implement :meth:`_dilate` (the raw formula, with the scale
    already unwrapped to a number), :meth:`distance` and
    :meth:`_ball_offsets`. Instances are immutable after construction.
    """

    name: str = "abstract"
    scale_kind: ScaleKind = ScaleKind.POSITIVE_REAL
    dim: int = 0
    locality_radius: float = math.inf
    #: whether x o (y o z) == (x o y) o (x o z) holds identically
    self_distributive: bool = False
    #: whether distance is compatible with dilations (distance experiments)
    is_metric: bool = True
    #: default residual tolerance for algebraic identities
    default_tol: float = EXACT_TOL

    # -- formula hooks -----------------------------------------------------

    @abstractmethod
    def _dilate(self, eps, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Return ``x o_eps y`` for a raw scale value ``eps``."""

    @abstractmethod
    def distance(self, x, y) -> float:
        """Model distance between two carrier points."""

    @abstractmethod
    def _ball_offsets(self, n: int, radius: float, rng: np.random.Generator, center):
        """Return ``n`` carrier points within ``radius`` of ``center``."""

    def get_params(self) -> dict:
        """Constructor parameters, enough to rebuild the model."""
        return {}

    def reference_point(self) -> np.ndarray:
        return np.zeros(self.dim)

    def check_scales(self) -> list:
        """Scales used by the default axiom suites."""
        return [as_scale(e, self.scale_kind) for e in (0.1, 0.3, 0.5, 0.7, 2.0)]

    def scale_size(self, eps: ScaleElement) -> float:
        """Positive size of a scale: how strongly it contracts toward the base."""
        return float(abs(eps.value))

    def extrapolate_first_order(self, f_prev, f_last, eps_prev, eps_last):
        """Eliminate a remainder proportional to the scale size."""
        t = self.scale_size(eps_last) / self.scale_size(eps_prev)
        return (np.asarray(f_last) - t * np.asarray(f_prev)) / (1.0 - t)

    def dilation_defined(self, eps, x, y) -> bool:
        """Whether ``x o_eps y`` stays inside the region where the formula is faithful."""
        return True

    def project(self, p) -> np.ndarray:
        """Snap a nearly-valid point back onto the carrier (identity by default)."""
        return np.asarray(p, dtype=float)

    # -- public surface ------------------------------------------------------

    def scale(self, eps) -> ScaleElement:
        return as_scale(eps, self.scale_kind)

    def check_point(self, x) -> np.ndarray:
        return check_point(self, x)

    def op(self, eps, x, y, *, local=True) -> np.ndarray:
        e = self.scale(eps)
        x = self.check_point(x)
        y = self.check_point(y)
        if local and math.isfinite(self.locality_radius):
            d = self.distance(x, y)
            if not d <= self.locality_radius:
                raise DomainError(
                    f"{self.name}: d(x, y) = {d:.6g} exceeds locality radius "
                    f"{self.locality_radius:.6g}"
                )
        return self._dilate(e.value, x, y)

    def bullet(self, eps, x, y, *, local=True) -> np.ndarray:
        return self.op(invert(self.scale(eps)), x, y, local=local)

    def sample_ball(self, n: int, radius: float = 1.0, seed=0, center=None) -> np.ndarray:
        """Seeded sample of ``n`` points within ``radius`` of ``center``."""
        if n < 1:
            raise ValueError("sample size must be positive")
        if not radius > 0:
            raise ValueError("sample radius must be positive")
        if radius > self.locality_radius:
            raise DomainError(
                f"{self.name}: sample radius {radius:g} exceeds locality radius "
                f"{self.locality_radius:.6g}"
            )
        center = self.reference_point() if center is None else self.check_point(center)
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        pts = np.asarray(self._ball_offsets(n, radius, rng, center), dtype=float)
        return pts.reshape(n, self.dim)

    def __repr__(self):
        params = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({params})"


# -- validation helpers ------------------------------------------------------


def check_point(model: DilationModel, x) -> np.ndarray:
    """Validate ``x`` as a point of ``model`` and return it as a float array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != model.dim:
        raise CarrierError(
            f"{model.name}: expected a point with {model.dim} coordinates, "
            f"got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise CarrierError(f"{model.name}: point has non-finite coordinates")
    return arr


def check_sample(model: DilationModel, sample) -> np.ndarray:
    arr = np.asarray(sample, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != model.dim or arr.shape[0] == 0:
        raise CarrierError(
            f"{model.name}: sample must have shape (n, {model.dim}), got {arr.shape}"
        )
    for p in arr:
        check_point(model, p)
    return arr


def residual(p, q) -> float:
    return float(np.linalg.norm(np.asarray(p, dtype=float) - np.asarray(q, dtype=float)))


# -- operations --------------------------------------------------------------


def op(m: DilationModel, eps, x, y) -> np.ndarray:
    """``x o_eps y``: dilation of ``y`` about ``x``."""
    return m.op(eps, x, y)


def bullet(m: DilationModel, eps, x, y) -> np.ndarray:
    """``x o_{1/eps} y``; left division for ``op(m, eps, x, .)``.

    The result may lie outside the locality ball of ``x``.
    """
    return m.bullet(eps, x, y)


def approx_sum(m: DilationModel, eps, x, u, v) -> np.ndarray:
    """``x bullet_eps ((x o_eps u) o_eps v)``."""
    return m.bullet(eps, x, m.op(eps, m.op(eps, x, u), v))


def approx_diff(m: DilationModel, eps, x, u, v) -> np.ndarray:
    """``(x o_eps u) bullet_eps (x o_eps v)``."""
    return m.bullet(eps, m.op(eps, x, u), m.op(eps, x, v))


def approx_inv(m: DilationModel, eps, x, u) -> np.ndarray:
    """``(x o_eps u) bullet_eps x``."""
    return m.bullet(eps, m.op(eps, x, u), m.check_point(x))


def blue_construction(m: DilationModel, eps, x, y, z) -> np.ndarray:
    """Dilate ``z`` away from ``x`` by ``1/eps``, then contract toward ``y``.

    The far intermediate point is exempt from the locality guard. Raises
    :class:`NonLocalIntermediateError` when it cannot be represented or the
    second dilation is undefined there.
    """
    with np.errstate(over="raise", invalid="raise"):
        try:
            far = m.bullet(eps, x, z, local=False)
        except (FloatingPointError, OverflowError) as exc:
            raise NonLocalIntermediateError(f"far point overflowed: {exc}") from exc
    if not np.all(np.isfinite(far)):
        raise NonLocalIntermediateError("far point is not finite")
    try:
        return m.op(eps, y, m.project(far), local=False)
    except DomainError as exc:
        raise NonLocalIntermediateError(f"non-local intermediate: {exc}") from exc


# -- axiom checkers ----------------------------------------------------------


@dataclass(frozen=True)
class CheckReport:
    """Maximum residual of one identity over a sample."""

    law: str
    max_residual: float
    tol: float
    n_checked: int

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.tol)

    def as_dict(self) -> dict:
        return {
            "law": self.law,
            "max_residual": self.max_residual,
            "tol": self.tol,
            "n_checked": self.n_checked,
            "pass": self.passed,
        }


def _tuples(sample, k):
    n = len(sample)
    for i in range(n):
        yield tuple(sample[(i + j) % n] for j in range(k))


def _run(m, law, sample, k, tol, fn):
    pts = check_sample(m, sample)
    worst = 0.0
    count = 0
    for args in _tuples(pts, k):
        worst = max(worst, fn(*args))
        count += 1
    return CheckReport(law, worst, m.default_tol if tol is None else tol, count)


def check_idempotent(m, eps, sample, tol=None) -> CheckReport:
    return _run(m, "idempotent", sample, 1, tol,
                lambda x: residual(m.op(eps, x, x), x))


def check_trivial_at_neutral(m, sample, tol=None) -> CheckReport:
    one = neutral(m.scale_kind)
    return _run(m, "trivial_at_neutral", sample, 2, tol,
                lambda x, y: residual(m.op(one, x, y), y))


def check_one_parameter_law(m, eps, mu, sample, tol=None) -> CheckReport:
    """Residual of ``x o_eps (x o_mu y) == x o_{eps mu} y``."""
    e, u = m.scale(eps), m.scale(mu)
    both = compose(e, u)

    def fn(x, y):
        return residual(m.op(e, x, m.op(u, x, y), local=False), m.op(both, x, y))

    return _run(m, "one_parameter", sample, 2, tol, fn)


def check_left_division(m, eps, sample, tol=None) -> CheckReport:
    """``bullet`` undoes ``op`` and vice versa at base ``x``.

    The reverse direction is skipped for pairs whose inverse dilation
    leaves the model's domain (e.g. wraps around the sphere).
    """
    inv = invert(m.scale(eps))

    def fn(x, y):
        a = residual(m.bullet(eps, x, m.op(eps, x, y), local=False), y)
        if not m.dilation_defined(inv, x, y):
            return a
        b = residual(m.op(eps, x, m.bullet(eps, x, y), local=False), y)
        return max(a, b)

    return _run(m, "left_division", sample, 2, tol, fn)


def check_right_division(m, eps, sample, tol=None) -> CheckReport:
    """Only for models exposing a closed-form ``right_divide``."""
    solve = getattr(m, "right_divide", None)
    if solve is None:
        raise TypeError(f"{m.name} has no closed-form right division")

    def fn(y, z):
        x = solve(eps, y, z)
        return residual(m.op(eps, x, y, local=False), z)

    return _run(m, "right_division", sample, 2, tol, fn)


def check_self_distributivity(m, eps, sample, tol=None) -> CheckReport:
    """Residual of ``x o (y o z)`` against ``(x o y) o (x o z)``."""

    def fn(x, y, z):
        lhs = m.op(eps, x, m.op(eps, y, z), local=False)
        rhs = m.op(eps, m.op(eps, x, y), m.op(eps, x, z), local=False)
        return residual(lhs, rhs)

    return _run(m, "self_distributive", sample, 3, tol, fn)


def check_sum_diff_cancellation(m, eps, sample, tol=None) -> CheckReport:
    """``approx_sum(x, u, approx_diff(x, u, v)) == v``."""

    def fn(x, u, v):
        d = approx_diff(m, eps, x, u, v)
        return residual(approx_sum(m, eps, x, u, m.project(d)), v)

    return _run(m, "sum_diff_cancellation", sample, 3, tol, fn)
