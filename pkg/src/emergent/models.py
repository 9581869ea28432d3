"""Concrete dilation models.

===================== ============ ===============================================
registry name         scales       dilation ``x o_eps y``
===================== ============ ===============================================
``real-vector``       (0, inf)     ``(1 - eps) x + eps y``
``complex-vector``    C*           same, complex ``eps``, re/im interleaved
``contractible-linear`` Z          ``x + A**k (y - x)``
``heisenberg-carnot`` (0, inf)     ``x . delta_eps(x^-1 . y)``
``non-morphism``      Z            ``x + phi**k (y - x)``, ``phi`` nonlinear
``lie-exp-log``       (0, inf)     ``x . exp(eps log(x^-1 . y))``
``sphere``            (0, inf)     ``exp_x(eps log_x y)`` on the unit 2-sphere
===================== ============ ===============================================

For the integer models ``k = -n`` under the default ``"contract"``
orientation, so the dilations shrink as ``n`` runs toward ``-inf``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    EXACT_TOL,
    TRANSCENDENTAL_TOL,
    DilationModel,
    check_idempotent,
    check_left_division,
    check_point,
    check_self_distributivity,
)
from .errors import CarrierError, ConfigError, DomainError
from .scale import ScaleElement, ScaleKind, as_scale, nonzero_complex, positive, shift

__all__ = [
    "RealVectorModel",
    "ComplexVectorModel",
    "ContractibleLinearModel",
    "CarnotHeisenbergModel",
    "NonMorphismModel",
    "LieExpLogModel",
    "SphereModel",
    "heisenberg_mul",
    "heisenberg_inv",
    "heisenberg_gauge",
    "carnot_dilate",
    "heisenberg_exp",
    "heisenberg_log",
    "sphere_exp",
    "sphere_log",
    "integer_phi_power",
    "quandle_view_check",
    "QuandleReport",
    "MODELS",
    "build_model",
    "list_models",
]


def _euclid_ball(n, radius, rng, center):
    d = center.shape[0]
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.random(n) ** (1.0 / d)
    return center + g * r[:, None]


def _euclid(x, y):
    return float(np.linalg.norm(np.asarray(x, float) - np.asarray(y, float)))


# ---------------------------------------------------------------------------
# vector spaces


class RealVectorModel(DilationModel):
    scale_kind = ScaleKind.POSITIVE_REAL
    self_distributive = True

    def __init__(self, dim: int = 2):
        if int(dim) != dim or dim < 1:
            raise ValueError(f"dim must be a positive integer, got {dim!r}")
        self.dim = int(dim)
        self.name = "real-vector"

    def get_params(self):
        return {"dim": self.dim}

    def _dilate(self, eps, x, y):
        return (1.0 - eps) * x + eps * y

    def distance(self, x, y):
        return _euclid(x, y)

    def _ball_offsets(self, n, radius, rng, center):
        return _euclid_ball(n, radius, rng, center)

    def right_divide(self, eps, y, z):
        """Solve ``x o_eps y = z`` for ``x``."""
        e = self.scale(eps).value
        if e == 1:
            raise DomainError("right division is not unique at the neutral scale")
        return (self.check_point(z) - e * self.check_point(y)) / (1.0 - e)


class ComplexVectorModel(DilationModel):
    """Complex affine dilations on C**dim; a point stores (re, im) per coordinate."""

    scale_kind = ScaleKind.NONZERO_COMPLEX
    self_distributive = True

    def __init__(self, dim: int = 1):
        if int(dim) != dim or dim < 1:
            raise ValueError(f"dim must be a positive integer, got {dim!r}")
        self.complex_dim = int(dim)
        self.dim = 2 * self.complex_dim
        self.name = "complex-vector"

    def get_params(self):
        return {"dim": self.complex_dim}

    @staticmethod
    def to_complex(p):
        p = np.asarray(p, dtype=float)
        return p[..., 0::2] + 1j * p[..., 1::2]

    @staticmethod
    def from_complex(z):
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
        out[..., 0::2] = z.real
        out[..., 1::2] = z.imag
        return out

    def _dilate(self, eps, x, y):
        xc, yc = self.to_complex(x), self.to_complex(y)
        return self.from_complex((1.0 - eps) * xc + eps * yc)

    def distance(self, x, y):
        return _euclid(x, y)

    def _ball_offsets(self, n, radius, rng, center):
        return _euclid_ball(n, radius, rng, center)

    def check_scales(self):
        raw = (0.5 * cmath.exp(1j * math.pi / 7), 0.3 + 0.4j, 0.8j, 2 - 1j, 0.1)
        return [nonzero_complex(z) for z in raw]

    def extrapolate_first_order(self, f_prev, f_last, eps_prev, eps_last):
        # the remainder is linear in the complex scale, so use the complex ratio
        t = eps_last.value / eps_prev.value
        a, b = self.to_complex(f_prev), self.to_complex(f_last)
        return self.from_complex((b - t * a) / (1.0 - t))

    def right_divide(self, eps, y, z):
        e = self.scale(eps).value
        if e == 1:
            raise DomainError("right division is not unique at the neutral scale")
        yc, zc = self.to_complex(self.check_point(y)), self.to_complex(self.check_point(z))
        return self.from_complex((zc - e * yc) / (1.0 - e))


# ---------------------------------------------------------------------------
# integer-indexed models on (R^d, +)


class _IntegerShiftModel(DilationModel):
    scale_kind = ScaleKind.INTEGER_SHIFT
    is_metric = False
    _orientations = ("contract", "literal")

    def _set_orientation(self, net_orientation):
        if net_orientation not in self._orientations:
            raise ValueError(
                f"net_orientation must be one of {self._orientations}, got {net_orientation!r}"
            )
        self.net_orientation = net_orientation

    def exponent(self, n: int) -> int:
        """Power of the deforming map used by scale ``n``."""
        return -n if self.net_orientation == "contract" else n

    def phi(self, v):
        raise NotImplementedError

    def phi_inverse(self, v):
        raise NotImplementedError

    def phi_power(self, k: int, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        step = self.phi if k >= 0 else self.phi_inverse
        for _ in range(abs(k)):
            v = step(v)
        return v

    def _dilate(self, eps, x, y):
        return x + self.phi_power(self.exponent(eps), y - x)

    def distance(self, x, y):
        return _euclid(x, y)

    def _ball_offsets(self, n, radius, rng, center):
        return _euclid_ball(n, radius, rng, center)

    def check_scales(self):
        return [shift(n) for n in (-2, -1, 1, 2)]

    def scale_size(self, eps):
        return self.contraction_rate ** self.exponent(eps.value)

    def linear_part(self) -> np.ndarray:
        """Derivative of the deforming map at 0."""
        raise NotImplementedError

    def extrapolate_first_order(self, f_prev, f_last, eps_prev, eps_last):
        # the remainder is J**k w for the linear part J, so the ratio is a matrix
        k = self.exponent(eps_last.value) - self.exponent(eps_prev.value)
        j = self.linear_part()
        t = np.linalg.matrix_power(j if k >= 0 else np.linalg.inv(j), abs(k))
        f_prev, f_last = np.asarray(f_prev, float), np.asarray(f_last, float)
        return np.linalg.solve(np.eye(self.dim) - t, f_last - t @ f_prev)


def _default_contraction():
    c, s = math.cos(math.pi / 6), math.sin(math.pi / 6)
    return 0.5 * np.array([[c, -s], [s, c]])


class ContractibleLinearModel(_IntegerShiftModel):
    """``phi(v) = A v``: a linear automorphism of (R^d, +).

    The default ``A`` is half a rotation by pi/6. Strongly anisotropic
    matrices work too, but deep nets then amplify rounding by
    ``|A**-1| ** depth`` in the inverse dilation.
    """

    self_distributive = True

    def __init__(self, matrix=None, net_orientation="contract"):
        a = _default_contraction() if matrix is None else np.array(matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ValueError(f"matrix must be square, got shape {a.shape}")
        if abs(np.linalg.det(a)) <= 1e-12:
            raise ValueError("matrix must be invertible")
        a.setflags(write=False)
        self.matrix = a
        self._inverse = np.linalg.inv(a)
        self._inverse.setflags(write=False)
        self.dim = a.shape[0]
        self.contraction_rate = float(max(abs(np.linalg.eigvals(a))))
        self._set_orientation(net_orientation)
        self.name = "contractible-linear"

    def get_params(self):
        return {"matrix": self.matrix.tolist(), "net_orientation": self.net_orientation}

    def phi(self, v):
        return self.matrix @ v

    def linear_part(self):
        return self.matrix

    def phi_inverse(self, v):
        return self._inverse @ v

    def right_divide(self, eps, y, z):
        k = self.exponent(self.scale(eps).value)
        d = np.linalg.matrix_power(self.matrix if k >= 0 else self._inverse, abs(k))
        lhs = np.eye(self.dim) - d
        y, z = self.check_point(y), self.check_point(z)
        return np.linalg.solve(lhs, z - d @ y)


class NonMorphismModel(_IntegerShiftModel):
    """``phi(v1, v2) = (v1/2, v2/2 + v1**p / 4)``: fixes 0, invertible, not additive.

    With ``power=2`` the resulting operations happen to be self-distributive;
    ``power=3`` (default) is not.
    """

    contraction_rate = 0.5
    default_tol = TRANSCENDENTAL_TOL

    def __init__(self, power: int = 3, net_orientation="contract"):
        if int(power) != power or power < 2:
            raise ValueError(f"power must be an integer >= 2, got {power!r}")
        self.power = int(power)
        self.dim = 2
        self.self_distributive = self.power == 2
        self._set_orientation(net_orientation)
        self.name = "non-morphism"

    def get_params(self):
        return {"power": self.power, "net_orientation": self.net_orientation}

    def phi(self, v):
        return np.array([v[0] / 2.0, v[1] / 2.0 + v[0] ** self.power / 4.0])

    def linear_part(self):
        return np.eye(2) / 2.0

    def phi_inverse(self, w):
        v1 = 2.0 * w[0]
        return np.array([v1, 2.0 * w[1] - v1 ** self.power / 2.0])


def integer_phi_power(m: _IntegerShiftModel, n: int, v) -> np.ndarray:
    """``n``-fold composite of the model's map (its inverse when ``n < 0``)."""
    return m.phi_power(int(n), check_point(m, v))


# ---------------------------------------------------------------------------
# Heisenberg group, exponential coordinates (a, b, c)


def heisenberg_mul(p, q) -> np.ndarray:
    a, b, c = p
    a2, b2, c2 = q
    return np.array([a + a2, b + b2, c + c2 + 0.5 * (a * b2 - a2 * b)])


def heisenberg_inv(p) -> np.ndarray:
    return -np.asarray(p, dtype=float)


def carnot_dilate(eps, p) -> np.ndarray:
    """Intrinsic dilation ``(a, b, c) -> (eps a, eps b, eps**2 c)``."""
    e = as_scale(eps, ScaleKind.POSITIVE_REAL).value
    a, b, c = p
    return np.array([e * a, e * b, e * e * c])


def heisenberg_gauge(p) -> float:
    """Homogeneous gauge ``((a^2 + b^2)^2 + c^2)^(1/4)``."""
    a, b, c = p
    return float(((a * a + b * b) ** 2 + c * c) ** 0.25)


def _gauge_ball(n, radius, rng, center):
    out = np.empty((n, 3))
    got = 0
    while got < n:
        cand = rng.uniform(-1.0, 1.0, size=(2 * n, 3)) * [radius, radius, radius * radius]
        for q in cand:
            if heisenberg_gauge(q) <= radius:
                out[got] = heisenberg_mul(center, q)
                got += 1
                if got == n:
                    break
    return out


class CarnotHeisenbergModel(DilationModel):
    scale_kind = ScaleKind.POSITIVE_REAL
    self_distributive = True
    dim = 3

    def __init__(self):
        self.name = "heisenberg-carnot"

    def _dilate(self, eps, x, y):
        return heisenberg_mul(x, carnot_dilate(eps, heisenberg_mul(heisenberg_inv(x), y)))

    def distance(self, x, y):
        return heisenberg_gauge(heisenberg_mul(heisenberg_inv(x), y))

    def _ball_offsets(self, n, radius, rng, center):
        return _gauge_ball(n, radius, rng, center)


def _algebra_matrix(v):
    a, b, c = v
    return np.array([[0.0, a, c], [0.0, 0.0, b], [0.0, 0.0, 0.0]])


def heisenberg_exp(v) -> np.ndarray:
    """Group exponential into the 3x3 unipotent matrix group (series is finite)."""
    n = _algebra_matrix(v)
    return np.eye(3) + n + 0.5 * (n @ n)


def heisenberg_log(g) -> np.ndarray:
    """Inverse of :func:`heisenberg_exp`; returns algebra coordinates."""
    n = np.asarray(g, dtype=float) - np.eye(3)
    if abs(n[0, 0]) + abs(n[1, 1]) + abs(n[2, 2]) + abs(n[1, 0]) + abs(n[2, 0]) + abs(n[2, 1]) > 1e-9:
        raise DomainError("matrix is not upper unipotent")
    m = n - 0.5 * (n @ n)
    return np.array([m[0, 1], m[1, 2], m[0, 2]])


class LieExpLogModel(DilationModel):
    """Lie-group dilations on the Heisenberg group, through matrix exp/log.

    Same carrier and group law as :class:`CarnotHeisenbergModel`, but the
    scale acts linearly on the whole Lie algebra, center included.
    """

    scale_kind = ScaleKind.POSITIVE_REAL
    default_tol = TRANSCENDENTAL_TOL
    dim = 3

    def __init__(self):
        self.name = "lie-exp-log"

    @staticmethod
    def _quotient(x, y):
        # x^-1 . y as a unipotent matrix
        return heisenberg_exp(-np.asarray(x, float)) @ heisenberg_exp(y)

    def _dilate(self, eps, x, y):
        v = heisenberg_log(self._quotient(x, y))
        return heisenberg_log(heisenberg_exp(x) @ heisenberg_exp(eps * v))

    def distance(self, x, y):
        return float(np.linalg.norm(heisenberg_log(self._quotient(x, y))))

    def _ball_offsets(self, n, radius, rng, center):
        q = _euclid_ball(n, radius, rng, np.zeros(3))
        return np.array([heisenberg_log(heisenberg_exp(center) @ heisenberg_exp(p)) for p in q])


# ---------------------------------------------------------------------------
# unit sphere

ANTIPODAL_MARGIN = 1e-6


def _angle(x, y):
    return math.atan2(float(np.linalg.norm(np.cross(x, y))), float(np.dot(x, y)))


def sphere_exp(x, tangent) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    v = np.asarray(tangent, dtype=float)
    theta = float(np.linalg.norm(v))
    if theta == 0.0:
        return x.copy()
    p = math.cos(theta) * x + math.sin(theta) * (v / theta)
    return p / np.linalg.norm(p)


def sphere_log(x, y) -> np.ndarray:
    """Tangent vector at ``x`` pointing along the short great circle to ``y``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    theta = _angle(x, y)
    if theta >= math.pi - ANTIPODAL_MARGIN:
        raise DomainError(f"sphere log undefined: points are (nearly) antipodal, angle {theta:.9g}")
    w = y - np.dot(x, y) * x
    nw = float(np.linalg.norm(w))
    if nw == 0.0 or theta == 0.0:
        return np.zeros(3)
    return theta * (w / nw)


class SphereModel(DilationModel):
    scale_kind = ScaleKind.POSITIVE_REAL
    default_tol = TRANSCENDENTAL_TOL
    locality_radius = math.pi - ANTIPODAL_MARGIN
    dim = 3
    unit_tol = 1e-12

    def __init__(self):
        self.name = "sphere"

    def check_point(self, x):
        p = check_point(self, x)
        if abs(float(np.linalg.norm(p)) - 1.0) > self.unit_tol:
            raise CarrierError(f"sphere: point {p} is not unit length")
        return p

    def project(self, p):
        p = np.asarray(p, dtype=float)
        return p / np.linalg.norm(p)

    def reference_point(self):
        return np.array([0.0, 0.0, 1.0])

    def check_scales(self):
        return [positive(e) for e in (0.1, 0.3, 0.5, 0.7, 0.9)]

    def _dilate(self, eps, x, y):
        return sphere_exp(x, eps * sphere_log(x, y))

    def dilation_defined(self, eps, x, y):
        return self.scale_size(self.scale(eps)) * self.distance(x, y) < self.locality_radius

    def distance(self, x, y):
        return _angle(np.asarray(x, float), np.asarray(y, float))

    def _ball_offsets(self, n, radius, rng, center):
        out = np.empty((n, 3))
        for i in range(n):
            g = rng.standard_normal(3)
            g -= np.dot(g, center) * center
            g /= np.linalg.norm(g)
            out[i] = sphere_exp(center, radius * math.sqrt(rng.random()) * g)
        return out


# ---------------------------------------------------------------------------
# quandle view


@dataclass(frozen=True)
class QuandleReport:
    model: str
    is_quandle_family: bool
    max_residual: float
    tol: float
    residuals: dict = field(default_factory=dict)

    def summary(self) -> str:
        verdict = "yes" if self.is_quandle_family else "no"
        return f"{self.model}: quandle family: {verdict} (max residual {self.max_residual:.3g})"


def quandle_view_check(m: DilationModel, eps_sample=None, point_sample=None, tol=1e-9) -> QuandleReport:
    """Check idempotency, left division and self-distributivity at each scale."""
    scales = m.check_scales() if eps_sample is None else [m.scale(e) for e in eps_sample]
    pts = m.sample_ball(30, 1.0, seed=0) if point_sample is None else point_sample
    residuals = {}
    for e in scales:
        for rep in (
            check_idempotent(m, e, pts, tol),
            check_left_division(m, e, pts, tol),
            check_self_distributivity(m, e, pts, tol),
        ):
            residuals[rep.law] = max(residuals.get(rep.law, 0.0), rep.max_residual)
    worst = max(residuals.values())
    return QuandleReport(m.name, bool(worst <= tol), worst, tol, residuals)


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class _ModelEntry:
    factory: type
    example: int
    description: str


MODELS = {
    "complex-vector": _ModelEntry(ComplexVectorModel, 2, "complex affine dilations, complex scales"),
    "contractible-linear": _ModelEntry(ContractibleLinearModel, 3, "linear contraction A, integer scales"),
    "heisenberg-carnot": _ModelEntry(CarnotHeisenbergModel, 4, "Heisenberg group with intrinsic dilations"),
    "lie-exp-log": _ModelEntry(LieExpLogModel, 7, "Heisenberg group with exp/log dilations"),
    "non-morphism": _ModelEntry(NonMorphismModel, 5, "nonlinear invertible map fixing 0, integer scales"),
    "real-vector": _ModelEntry(RealVectorModel, 1, "real affine dilations"),
    "sphere": _ModelEntry(SphereModel, 8, "unit 2-sphere, geodesic exp/log dilations"),
}


def list_models() -> list:
    return [f"{name} (Example {e.example}): {e.description}" for name, e in sorted(MODELS.items())]


def build_model(name: str, params: dict | None = None) -> DilationModel:
    """Construct a registered model from a name and a parameter block."""
    try:
        entry = MODELS[name]
    except KeyError:
        raise ConfigError("model", f"unknown model {name!r}; choose from {sorted(MODELS)}") from None
    params = dict(params or {})
    try:
        return entry.factory(**params)
    except TypeError as exc:
        raise ConfigError("params", f"bad parameters for {name}: {exc}") from None
    except ValueError as exc:
        raise ConfigError("params", str(exc)) from None
