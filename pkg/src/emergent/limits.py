"""Numerical limits as the scale runs to the absolute.

Every limit here is a first-order Richardson step on the two points of
the net nearest the absolute,

    L = (f(e_last) - t f(e_prev)) / (1 - t),   t = size(e_last) / size(e_prev),

which is ``2 f(e/2) - f(e)`` for the default halving net. The empirical
rate is then read off the tail of ``|f(e_k) - L|`` against the scale size.

Uniformity over compact sets is probed with the supremum over a finite,
seeded sample; that is a surrogate only (see :data:`FINITE_SAMPLE_CAVEAT`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import core
from .core import DilationModel, residual
from .errors import DomainError
from .groupoid import Arrow, deformed_dif
from .scale import AbsoluteNet, ScaleKind, default_net, net_toward_absolute

__all__ = [
    "FINITE_SAMPLE_CAVEAT",
    "EXPRESSIONS",
    "ConvergenceReport",
    "UniformityReport",
    "ContractivityReport",
    "ConicalCheckReport",
    "DifferentialLawReport",
    "CompactSample",
    "SmoothMap",
    "BUILTIN_MAPS",
    "evaluate",
    "estimate_limit",
    "uniformity_probe",
    "compact_contractivity_check",
    "conical_group_check",
    "tangent_distance_check",
    "gromov_differential",
    "differential_laws",
]

FINITE_SAMPLE_CAVEAT = (
    "uniformity is measured as a supremum over a finite seeded sample; "
    "it is evidence for, not a certificate of, uniform convergence on compact sets"
)

DEFAULT_CONVERGENCE_TOL = 1e-5
MIN_RATE = 0.5
# |f - L| below NOISE_FLOOR * (1 + |L|) / size is rounding noise (the inverse
# dilation amplifies rounding by about 1/size)
NOISE_FLOOR = 1e3 * np.finfo(float).eps
RATE_PAIRS = 3


def _dif_target(m, eps, x, u, v):
    return deformed_dif(m, eps, Arrow(u, x), Arrow(v, x)).target


EXPRESSIONS: dict[str, Callable] = {
    "sum": lambda m, eps, x, u, v: core.approx_sum(m, eps, x, u, v),
    "diff": lambda m, eps, x, u, v: core.approx_diff(m, eps, x, u, v),
    "inv": lambda m, eps, x, u, v=None: core.approx_inv(m, eps, x, u),
    "dif-target": _dif_target,
}


def evaluate(m: DilationModel, expr: str, eps, x, u, v=None) -> np.ndarray:
    """Evaluate one approximate operation at a single scale."""
    try:
        fn = EXPRESSIONS[expr]
    except KeyError:
        raise ValueError(f"unknown expression {expr!r}; choose from {sorted(EXPRESSIONS)}") from None
    if expr != "inv" and v is None:
        raise ValueError(f"expression {expr!r} needs two argument points")
    return fn(m, eps, x, u, v)


def _net(m_or_kind, net):
    if net is None:
        kind = m_or_kind.scale_kind if isinstance(m_or_kind, DilationModel) else m_or_kind
        net = default_net(kind)
    if isinstance(net, AbsoluteNet):
        return net_toward_absolute(net)
    return list(net)


@dataclass
class ConvergenceReport:
    """Values of an expression along a net, with the extrapolated limit."""

    net: list
    values: np.ndarray
    extrapolated_limit: np.ndarray
    empirical_rate: float
    deltas: np.ndarray
    tol: float
    sizes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.values) != len(self.net):
            raise ValueError("values and net must have the same length")

    @property
    def max_successive_delta(self) -> float:
        """Largest of the final three successive differences."""
        return float(np.max(self.deltas[-3:]))

    @property
    def converged(self) -> bool:
        return bool(self.max_successive_delta <= self.tol)

    @property
    def inconclusive(self) -> bool:
        return bool(math.isfinite(self.empirical_rate) and self.empirical_rate < MIN_RATE)

    @property
    def residuals(self) -> np.ndarray:
        """Distance of each sampled value from the extrapolated limit."""
        return np.linalg.norm(self.values - self.extrapolated_limit, axis=1)


def _rate(values, limit, sizes):
    r = np.linalg.norm(values - limit, axis=1)
    floor = NOISE_FLOOR * (1.0 + float(np.linalg.norm(limit))) / sizes
    n = len(values)
    rates = []
    # the final pair is excluded: the extrapolation makes its ratio exact
    for k in range(max(0, n - 2 - RATE_PAIRS), n - 2):
        if r[k] > floor[k] and r[k + 1] > floor[k + 1]:
            rates.append(math.log(r[k] / r[k + 1]) / math.log(sizes[k] / sizes[k + 1]))
    return float(np.median(rates)) if rates else math.nan


def _converge(net, values, extrapolate, size, tol) -> ConvergenceReport:
    values = np.array([np.atleast_1d(np.asarray(v, dtype=float)) for v in values])
    sizes = np.array([size(e) for e in net], dtype=float)
    limit = np.asarray(extrapolate(values[-2], values[-1], net[-2], net[-1]), dtype=float)
    deltas = np.linalg.norm(np.diff(values, axis=0), axis=1)
    return ConvergenceReport(
        net=list(net),
        values=values,
        extrapolated_limit=limit,
        empirical_rate=_rate(values, limit, sizes),
        deltas=deltas,
        tol=tol,
        sizes=sizes,
    )


def _real_richardson(size):
    def extrapolate(f_prev, f_last, e_prev, e_last):
        t = size(e_last) / size(e_prev)
        return (f_last - t * f_prev) / (1.0 - t)

    return extrapolate


def estimate_limit(m: DilationModel, expr: str, x, u, v=None, net=None,
                   tol: float = DEFAULT_CONVERGENCE_TOL) -> ConvergenceReport:
    """Evaluate ``expr`` along the net and extrapolate to the absolute.

    ``expr`` is one of ``"sum"``, ``"diff"``, ``"inv"`` or ``"dif-target"``
    (target of the deformed difference of the arrows ``(u, x)``, ``(v, x)``).
    Divergence is reported through ``converged``, never raised.
    """
    eps_list = _net(m, net)
    values = [evaluate(m, expr, e, x, u, v) for e in eps_list]
    return _converge(eps_list, values, m.extrapolate_first_order, m.scale_size, tol)


# -- uniformity --------------------------------------------------------------


@dataclass(frozen=True)
class CompactSample:
    """Finite stand-in for a compact set: base points with two argument points each."""

    bases: np.ndarray
    us: np.ndarray
    vs: np.ndarray
    radius: float
    seed: int

    def __len__(self):
        return len(self.bases)

    @classmethod
    def draw(cls, m: DilationModel, size: int, radius: float = 1.0, seed: int = 42, base=None):
        """Bases within ``radius`` of the reference point (or all equal to
        ``base``), arguments within ``radius`` of their base."""
        rng = np.random.default_rng(seed)
        if base is None:
            bases = m.sample_ball(size, radius, rng)
        else:
            bases = np.tile(m.check_point(base), (size, 1))
        us = np.empty_like(bases)
        vs = np.empty_like(bases)
        for i, b in enumerate(bases):
            us[i], vs[i] = m.sample_ball(2, radius, rng, center=b)
        return cls(bases, us, vs, float(radius), int(seed))

    @classmethod
    def single(cls, m: DilationModel, x, u=None, v=None):
        x = m.check_point(x)
        u = x if u is None else m.check_point(u)
        v = x if v is None else m.check_point(v)
        return cls(x[None, :], u[None, :], v[None, :], 0.0, 0)


@dataclass
class UniformityReport:
    net: list
    sup_deltas: np.ndarray
    tol: float
    tail: int
    caveat: str = FINITE_SAMPLE_CAVEAT

    @property
    def decreasing_tail(self) -> bool:
        tail = self.sup_deltas[-self.tail:]
        return bool(np.all(np.diff(tail) < 0))

    @property
    def below_tol(self) -> bool:
        return bool(self.sup_deltas[-1] <= self.tol)

    @property
    def converged(self) -> bool:
        return self.decreasing_tail and self.below_tol


def uniformity_probe(m: DilationModel, expr: str, sample: CompactSample, net=None,
                     tol: float = DEFAULT_CONVERGENCE_TOL, tail: int = 5) -> UniformityReport:
    """Sup over the sample of successive differences along the net."""
    eps_list = _net(m, net)
    vals = np.array([
        [evaluate(m, expr, e, x, u, v) for x, u, v in zip(sample.bases, sample.us, sample.vs)]
        for e in eps_list
    ])
    diffs = np.linalg.norm(np.diff(vals, axis=0), axis=2)
    return UniformityReport(eps_list, diffs.max(axis=1), tol, tail)


@dataclass
class ContractivityReport:
    net: list
    max_distances: np.ndarray
    radius: float
    tail_index: int | None

    @property
    def passed(self) -> bool:
        return self.tail_index is not None


def compact_contractivity_check(m: DilationModel, sample: CompactSample, radius: float,
                                net=None) -> ContractivityReport:
    """First net index from which every dilated sample point stays within
    ``radius`` of its base (``tail_index`` is None if none exists)."""
    eps_list = _net(m, net)
    dmax = np.zeros(len(eps_list))
    for k, e in enumerate(eps_list):
        for x, u, v in zip(sample.bases, sample.us, sample.vs):
            dmax[k] = max(dmax[k], m.distance(x, m.op(e, x, u)), m.distance(x, m.op(e, x, v)))
    inside = dmax < radius
    tail_index = None
    for n in range(len(eps_list)):
        if inside[n:].all():
            tail_index = n
            break
    return ContractivityReport(eps_list, dmax, float(radius), tail_index)


# -- conical group structure of the limit -------------------------------------


LAWS = ("neutrality", "associativity", "inverse", "dilation_morphism")


@dataclass
class ConicalCheckReport:
    residuals: dict
    tols: dict
    tol: float
    inconclusive: bool
    n_limits: int

    @property
    def passed(self) -> dict:
        return {law: bool(self.residuals[law] <= self.tols[law]) for law in LAWS}

    @property
    def all_passed(self) -> bool:
        return not self.inconclusive and all(self.passed.values())


def conical_group_check(m: DilationModel, x, sample: CompactSample, net=None, tol: float = 1e-7,
                        conv_tol: float = DEFAULT_CONVERGENCE_TOL, scales=None) -> ConicalCheckReport:
    """Check that the extrapolated sum at ``x`` behaves as a conical group.

    Laws, over the argument points of ``sample``: neutrality of ``x``,
    associativity, inverses from the limit of the approximate inverse, and
    the dilations at ``x`` acting as morphisms. Associativity composes two
    extrapolations and gets ten times the tolerance.
    """
    x = m.check_point(x)
    eps_list = _net(m, net)
    if scales is None:
        # expanding scales push arguments outward and slow the tail down
        scales = [e for e in m.check_scales() if m.scale_size(e) < 1.0]
    else:
        scales = [m.scale(e) for e in scales]
    state = {"inconclusive": False, "n": 0}

    def lim(expr, u, v=None):
        rep = estimate_limit(m, expr, x, m.project(u), None if v is None else m.project(v),
                             eps_list, conv_tol)
        state["n"] += 1
        if not rep.converged or rep.inconclusive:
            state["inconclusive"] = True
        return m.project(rep.extrapolated_limit)

    res = dict.fromkeys(LAWS, 0.0)
    us, vs = sample.us, sample.vs
    n = len(us)
    for i in range(n):
        u, v, w = us[i], vs[i], us[(i + 1) % n]
        s_uv = lim("sum", u, v)
        res["neutrality"] = max(res["neutrality"],
                                residual(lim("sum", x, u), u), residual(lim("sum", u, x), u))
        res["associativity"] = max(res["associativity"],
                                   residual(lim("sum", s_uv, w), lim("sum", u, lim("sum", v, w))))
        inv_u = lim("inv", u)
        res["inverse"] = max(res["inverse"],
                             residual(lim("sum", u, inv_u), x), residual(lim("sum", inv_u, u), x))
        for e in scales:
            lhs = m.op(e, x, s_uv)
            rhs = lim("sum", m.op(e, x, u), m.op(e, x, v))
            res["dilation_morphism"] = max(res["dilation_morphism"], residual(lhs, rhs))
    tols = {law: tol for law in LAWS}
    tols["associativity"] = 10 * tol
    return ConicalCheckReport(res, tols, tol, state["inconclusive"], state["n"])


# -- metric tangent space ---------------------------------------------------------


def tangent_distance_check(m: DilationModel, x, y, z, net=None,
                           tol: float = DEFAULT_CONVERGENCE_TOL) -> ConvergenceReport:
    """``d(x o_e y, x o_e z) / size(e)`` along the net, extrapolated."""
    if not m.is_metric:
        raise DomainError(f"{m.name} has no dilation-compatible distance")
    eps_list = _net(m, net)
    vals = [m.distance(m.op(e, x, y), m.op(e, x, z)) / m.scale_size(e) for e in eps_list]
    return _converge(eps_list, vals, _real_richardson(m.scale_size), m.scale_size, tol)


# -- differential of maps on R^n -------------------------------------------------


@dataclass(frozen=True)
class SmoothMap:
    fn: Callable
    jacobian: Callable | None
    dim: int
    smooth: bool = True
    description: str = ""

    def __call__(self, p):
        return np.asarray(self.fn(np.asarray(p, dtype=float)), dtype=float)


def _cone(p):
    r2 = p[0] ** 2 + p[1] ** 2
    return np.array([0.0 if r2 == 0 else p[0] ** 3 / r2, p[1]])


BUILTIN_MAPS = {
    "identity": SmoothMap(lambda p: p.copy(), lambda p: np.eye(2), 2,
                          description="p -> p"),
    "square-first": SmoothMap(lambda p: np.array([p[0] ** 2, p[1]]),
                              lambda p: np.array([[2 * p[0], 0.0], [0.0, 1.0]]), 2,
                              description="(p1, p2) -> (p1^2, p2)"),
    "trig": SmoothMap(
        lambda p: np.array([math.sin(p[0]) + p[1] ** 2, math.exp(p[0] * p[1]), p[0] * p[1]]),
        lambda p: np.array([
            [math.cos(p[0]), 2 * p[1]],
            [p[1] * math.exp(p[0] * p[1]), p[0] * math.exp(p[0] * p[1])],
            [p[1], p[0]],
        ]),
        2,
        description="(p1, p2) -> (sin p1 + p2^2, exp(p1 p2), p1 p2)",
    ),
    # homogeneous at the origin but not additive there
    "cone": SmoothMap(_cone, None, 2, smooth=False,
                      description="(p1, p2) -> (p1^3 / (p1^2 + p2^2), p2), not differentiable at 0"),
}


def _as_map(f) -> SmoothMap:
    if isinstance(f, SmoothMap):
        return f
    if isinstance(f, str):
        try:
            return BUILTIN_MAPS[f]
        except KeyError:
            raise ValueError(f"unknown map {f!r}; choose from {sorted(BUILTIN_MAPS)}") from None
    if callable(f):
        return SmoothMap(f, None, -1, smooth=False)
    raise TypeError(f"cannot interpret {f!r} as a map")


def gromov_differential(f, x, u, net=None, tol: float = DEFAULT_CONVERGENCE_TOL) -> ConvergenceReport:
    """Limit of ``(f(x + e u) - f(x)) / e`` as ``e -> 0``."""
    g = _as_map(f)
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    eps_list = _net(ScaleKind.POSITIVE_REAL, net)
    fx = g(x)
    vals = [(g(x + e.value * u) - fx) / e.value for e in eps_list]
    size = lambda e: float(e.value)  # noqa: E731
    return _converge(eps_list, vals, _real_richardson(size), size, tol)


@dataclass(frozen=True)
class DifferentialLawReport:
    homogeneity: float
    additivity: float
    tol: float
    additivity_asserted: bool

    @property
    def passed(self) -> dict:
        out = {"homogeneity": bool(self.homogeneity <= self.tol)}
        if self.additivity_asserted:
            out["additivity"] = bool(self.additivity <= self.tol)
        return out


def differential_laws(f, x, u, v, lam: float = 2.0, net=None, tol: float = 1e-6) -> DifferentialLawReport:
    """Residuals of ``D(lam u) = lam D(u)`` and ``D(u + v) = D(u) + D(v)``.

    Additivity is only asserted for smooth maps.
    """
    g = _as_map(f)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)

    def d(w):
        return gromov_differential(g, x, w, net, tol).extrapolated_limit

    du, dv = d(u), d(v)
    hom = residual(d(lam * u), lam * du)
    add = residual(d(u + v), du + dv)
    return DifferentialLawReport(hom, add, tol, g.smooth)
