"""Experiment driver.

Usage::

    emergent list-models
    emergent list-experiments
    emergent run --model heisenberg-carnot --experiment blue-red --format csv --out br.csv
    emergent run --config sweep.json --seed 7

Exit status: 0 when every asserted check passes, 2 when a check fails,
1 on configuration or domain errors. Reports are written to a temporary
file and renamed into place, so a failed run never leaves a partial report.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import core
from .errors import CarrierError, ConfigError, DomainError, EmergentError
from .groupoid import Arrow, deformed_dif, dif_arrows, dilate_arrow
from .limits import (
    DEFAULT_CONVERGENCE_TOL,
    BUILTIN_MAPS,
    CompactSample,
    conical_group_check,
    differential_laws,
    estimate_limit,
    gromov_differential,
    tangent_distance_check,
    uniformity_probe,
)
from .models import MODELS, build_model, list_models
from .scale import AbsoluteNet, ScaleKind, as_scale, default_net, net_toward_absolute

OUT_DIR_ENV = "EMERGENT_OUT_DIR"
FORMATS = ("csv", "json")

EXPERIMENTS = {
    "axioms": ("quasigroup axioms", "idempotency, neutral scale, one-parameter law, left division"),
    "blue-red": ("blue/red constructions", "far-point dilation against the approximate sum"),
    "conical": ("limit group laws", "conical group laws of the extrapolated sum at a base point"),
    "convergence": ("approximate operations", "values along a net, extrapolated limit, uniformity probe"),
    "differential": ("maps on R^2", "differential as a limit of difference quotients"),
    "distance": ("tangent distance", "rescaled distance of dilated points"),
    "groupoid": ("pair groupoid", "deformed arrow difference against the dilated difference"),
}

DEFAULT_TOL = {
    "axioms": 1e-9,
    "blue-red": 1e-9,
    "conical": 1e-7,
    "convergence": DEFAULT_CONVERGENCE_TOL,
    "differential": 1e-6,
    "distance": DEFAULT_CONVERGENCE_TOL,
    "groupoid": 1e-9,
}
# transcendental conditioning on the sphere
CONICAL_TOL_SPHERE = 1e-5


def list_experiments() -> list:
    return [f"{name} ({tag}): {desc}" for name, (tag, desc) in sorted(EXPERIMENTS.items())]


@dataclass
class ExperimentConfig:
    model: str = "real-vector"
    params: dict = field(default_factory=dict)
    experiment: str = "axioms"
    expr: str = "sum"
    eps_start: object = None
    eps_ratio: object = None
    steps: int = 20
    sample_size: int = 100
    sample_radius: float = 1.0
    vary_base: bool = False
    seed: int = 42
    tol: float | None = None
    map: str = "square-first"
    out: str | None = None
    format: str = "json"

    def validate(self):
        if self.model not in MODELS:
            raise ConfigError("model", f"unknown model {self.model!r}; choose from {sorted(MODELS)}")
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(
                "experiment", f"unknown experiment {self.experiment!r}; choose from {sorted(EXPERIMENTS)}"
            )
        if self.format not in FORMATS:
            raise ConfigError("format", f"must be one of {FORMATS}, got {self.format!r}")
        if self.expr not in ("sum", "diff", "inv", "dif-target"):
            raise ConfigError("expr", f"unknown expression {self.expr!r}")
        if int(self.steps) != self.steps or self.steps < 2:
            raise ConfigError("steps", f"net needs at least 2 steps, got {self.steps!r}")
        if int(self.sample_size) != self.sample_size or self.sample_size < 1:
            raise ConfigError("sample_size", f"must be a positive integer, got {self.sample_size!r}")
        if not self.sample_radius > 0:
            raise ConfigError("sample_radius", "must be positive")
        if self.seed is None or int(self.seed) != self.seed:
            raise ConfigError("seed", f"must be an integer, got {self.seed!r}")
        if self.tol is not None and not self.tol >= 0:
            raise ConfigError("tol", "must be non-negative")
        if self.experiment == "differential" and self.map not in BUILTIN_MAPS:
            raise ConfigError("map", f"unknown map {self.map!r}; choose from {sorted(BUILTIN_MAPS)}")
        return self

    @property
    def effective_tol(self) -> float:
        if self.tol is not None:
            return float(self.tol)
        if self.experiment == "conical" and self.model == "sphere":
            return CONICAL_TOL_SPHERE
        return DEFAULT_TOL[self.experiment]


_FIELD_NAMES = {f.name for f in fields(ExperimentConfig)}


def _parse_value(text: str):
    try:
        return json.loads(text)
    except ValueError:
        return text


def _merge(cfg: dict, key: str, value, source: str):
    key = key.strip().replace("-", "_")
    if key.startswith(("params.", "param.")):
        cfg.setdefault("params", {})[key.split(".", 1)[1]] = value
        return
    if key not in _FIELD_NAMES:
        raise ConfigError(key, f"unknown configuration key in {source}")
    if key == "params":
        if not isinstance(value, dict):
            raise ConfigError("params", "must be a mapping")
        cfg.setdefault("params", {}).update(value)
    else:
        cfg[key] = value


def load_config_file(path) -> dict:
    """Read a JSON object or ``key = value`` lines (``#`` starts a comment)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from None
    cfg: dict = {}
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except ValueError as exc:
            raise ConfigError("config", f"invalid JSON in {path}: {exc}") from None
        for k, v in data.items():
            _merge(cfg, k, v, str(path))
        return cfg
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("config", f"{path}:{lineno}: expected key = value")
        k, v = line.split("=", 1)
        _merge(cfg, k, _parse_value(v.strip()), str(path))
    return cfg


def _scale_arg(value, kind: ScaleKind, name: str):
    try:
        if isinstance(value, str):
            value = complex(value.replace(" ", "")) if kind is ScaleKind.NONZERO_COMPLEX else float(value)
        if isinstance(value, list) and len(value) == 2:
            value = complex(value[0], value[1])
        return as_scale(value, kind)
    except (TypeError, ValueError) as exc:
        raise ConfigError(name, f"invalid {kind.value} scale {value!r}: {exc}") from None


def build_net(cfg: ExperimentConfig, kind: ScaleKind) -> list:
    base = default_net(kind, cfg.steps)
    start = base.start if cfg.eps_start is None else _scale_arg(cfg.eps_start, kind, "eps_start")
    ratio = base.ratio if cfg.eps_ratio is None else _scale_arg(cfg.eps_ratio, kind, "eps_ratio")
    try:
        return net_toward_absolute(AbsoluteNet(start, ratio, int(cfg.steps)))
    except ValueError as exc:
        raise ConfigError("eps_ratio", str(exc)) from None


# -- reports -----------------------------------------------------------------


@dataclass
class ExperimentReport:
    config: dict
    net: list
    values: list
    residuals: list
    extrapolated: object = None
    rate: float | None = None
    passed: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.passed.values())

    def to_json_obj(self) -> dict:
        return {
            "config": self.config,
            "net": [_scale_json(e) for e in self.net],
            "values": [np.asarray(v, float).tolist() for v in self.values],
            "extrapolated": None if self.extrapolated is None
            else np.asarray(self.extrapolated, float).tolist(),
            "rate": self.rate,
            "pass": dict(self.passed),
            "residuals": list(self.residuals),
        }


def _scale_json(e):
    v = e.value
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def _dump(obj, indent=0) -> str:
    """JSON with every float written to 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_, int, float, np.integer, np.floating)):
        return _num(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_dump(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(_dump(v, indent + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + _dump(v, indent + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _eps_csv(e) -> str:
    v = e.value
    if isinstance(v, complex):
        return f"{v.real:.17g}{v.imag:+.17g}j"
    return _num(v)


def render_csv(report: ExperimentReport) -> str:
    width = max((np.atleast_1d(v).shape[0] for v in report.values), default=0)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epsilon"] + [f"component_{i}" for i in range(width)] + ["residual"])
    for e, v, r in zip(report.net, report.values, report.residuals):
        w.writerow([_eps_csv(e)] + [_num(c) for c in np.atleast_1d(v)] + [_num(r)])
    return buf.getvalue()


def render_json(report: ExperimentReport) -> str:
    return _dump(report.to_json_obj()) + "\n"


def emit_report(report: ExperimentReport, fmt: str, path) -> Path:
    """Write atomically: temp file in the target directory, then rename."""
    if fmt not in FORMATS:
        raise ConfigError("format", f"must be one of {FORMATS}")
    if not report.net:
        raise ConfigError("steps", "empty net")
    text = render_csv(report) if fmt == "csv" else render_json(report)
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


# -- experiments ---------------------------------------------------------------


def _sample(cfg, m):
    base = None if cfg.vary_base else m.reference_point()
    return CompactSample.draw(m, cfg.sample_size, cfg.sample_radius, cfg.seed, base=base)


def _axioms(cfg, m, tol):
    pts = m.sample_ball(cfg.sample_size, cfg.sample_radius, cfg.seed)
    scales = m.check_scales()
    worst: dict = {}
    residuals, values = [], []

    def note(rep):
        worst[rep.law] = max(worst.get(rep.law, 0.0), rep.max_residual)
        return rep.max_residual

    note(core.check_trivial_at_neutral(m, pts, tol))
    for e in scales:
        row = [note(core.check_idempotent(m, e, pts, tol)),
               note(core.check_left_division(m, e, pts, tol))]
        row += [note(core.check_one_parameter_law(m, e, mu, pts, tol)) for mu in scales]
        if hasattr(m, "right_divide"):
            row.append(note(core.check_right_division(m, e, pts, tol)))
        residuals.append(max(row))
        values.append(m.op(e, pts[0], pts[min(1, len(pts) - 1)]))
    passed = {law: bool(r <= tol) for law, r in worst.items()}
    return ExperimentReport({}, scales, values, residuals, passed=passed)


def _convergence(cfg, m, net, tol):
    s = _sample(cfg, m)
    v = None if cfg.expr == "inv" else s.vs[0]
    rep = estimate_limit(m, cfg.expr, s.bases[0], s.us[0], v, net, tol)
    uni = uniformity_probe(m, cfg.expr, s, net, tol) if cfg.expr != "inv" else None
    passed = {"converged": rep.converged, "rate_conclusive": not rep.inconclusive}
    if uni is not None:
        passed["uniform"] = uni.converged
    return ExperimentReport({}, net, list(rep.values), rep.residuals.tolist(),
                            rep.extrapolated_limit, rep.empirical_rate, passed)


def _blue_red(cfg, m, net, tol):
    s = _sample(cfg, m)
    values, residuals = [], []
    for e in net:
        worst = 0.0
        for i, (x, u, v) in enumerate(zip(s.bases, s.us, s.vs)):
            blue = core.blue_construction(m, e, x, u, v)
            worst = max(worst, core.residual(blue, core.approx_sum(m, e, x, u, v)))
            if i == 0:
                values.append(blue)
        residuals.append(worst)
    passed = {"blue_equals_red": bool(max(residuals) <= tol)} if m.self_distributive else {}
    return ExperimentReport({}, net, values, residuals, passed=passed)


def _groupoid(cfg, m, net, tol):
    s = _sample(cfg, m)
    values, residuals = [], []
    for e in net:
        worst = 0.0
        for i, (x, u, v) in enumerate(zip(s.bases, s.us, s.vs)):
            g, h = Arrow(u, x), Arrow(v, x)
            d = deformed_dif(m, e, g, h)
            lhs = dilate_arrow(m, e, Arrow(m.project(d.target), d.source))
            rhs = dif_arrows(dilate_arrow(m, e, g), dilate_arrow(m, e, h))
            worst = max(worst, core.residual(lhs.target, rhs.target),
                        core.residual(lhs.source, rhs.source))
            if i == 0:
                values.append(d.target)
        residuals.append(worst)
    return ExperimentReport({}, net, values, residuals,
                            passed={"defining_relation": bool(max(residuals) <= tol)})


def _conical(cfg, m, net, tol):
    x = m.reference_point()
    s = CompactSample.draw(m, cfg.sample_size, cfg.sample_radius, cfg.seed, base=x)
    chk = conical_group_check(m, x, s, net, tol)
    rep = estimate_limit(m, "sum", x, s.us[0], s.vs[0], net)
    passed = dict(chk.passed)
    passed["conclusive"] = not chk.inconclusive
    return ExperimentReport({}, net, list(rep.values), rep.residuals.tolist(),
                            rep.extrapolated_limit, rep.empirical_rate, passed)


def _differential(cfg, m, net, tol):
    if cfg.model != "real-vector" or m.dim != 2:
        raise ConfigError("model", "differential needs the real-vector model with dim 2")
    pts = m.sample_ball(3, cfg.sample_radius, cfg.seed)
    x, u, v = pts
    rep = gromov_differential(cfg.map, x, u, net, DEFAULT_CONVERGENCE_TOL)
    laws = differential_laws(cfg.map, x, u, v, 2.0, net, tol)
    passed = {"converged": rep.converged}
    passed.update(laws.passed)
    return ExperimentReport({}, net, list(rep.values), rep.residuals.tolist(),
                            rep.extrapolated_limit, rep.empirical_rate, passed)


def _distance(cfg, m, net, tol):
    if not m.is_metric:
        raise ConfigError("experiment", f"distance needs a metric model; {cfg.model} is not one")
    x = m.reference_point()
    y, z = m.sample_ball(2, cfg.sample_radius, cfg.seed, center=x)
    rep = tangent_distance_check(m, x, y, z, net, tol)
    passed = {"converged": rep.converged, "rate_conclusive": not rep.inconclusive}
    return ExperimentReport({}, net, list(rep.values), rep.residuals.tolist(),
                            rep.extrapolated_limit, rep.empirical_rate, passed)


_RUNNERS = {
    "blue-red": _blue_red,
    "conical": _conical,
    "convergence": _convergence,
    "differential": _differential,
    "distance": _distance,
    "groupoid": _groupoid,
}


def _config_record(cfg: ExperimentConfig, m, tol) -> dict:
    rec = asdict(cfg)
    rec.pop("out")
    rec["params"] = m.get_params()
    rec["tol"] = tol
    return rec


def default_output_path(cfg: ExperimentConfig) -> Path:
    out_dir = Path(os.environ.get(OUT_DIR_ENV, "."))
    return out_dir / f"{cfg.experiment}_{cfg.model}.{cfg.format}"


def run_experiment(cfg: ExperimentConfig):
    """Run one experiment; returns ``(exit_status, report, path)``.

    Raises :class:`ConfigError` / :class:`DomainError` on invalid input;
    :func:`main` maps those to exit status 1.
    """
    cfg.validate()
    m = build_model(cfg.model, cfg.params)
    tol = cfg.effective_tol
    kind = ScaleKind.POSITIVE_REAL if cfg.experiment == "differential" else m.scale_kind
    # validated for every experiment, even those that sweep fixed scales instead
    net = build_net(cfg, kind)
    if cfg.experiment == "axioms":
        report = _axioms(cfg, m, tol)
    else:
        report = _RUNNERS[cfg.experiment](cfg, m, net, tol)
    report.config = _config_record(cfg, m, tol)
    path = Path(cfg.out) if cfg.out else default_output_path(cfg)
    emit_report(report, cfg.format, path)
    return (0 if report.ok else 2), report, path


# -- argument parsing -------------------------------------------------------------


def _build_parser():
    p = argparse.ArgumentParser(prog="emergent", description="Emergent-algebra experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("list-models", help="list the available dilation models")
    sub.add_parser("list-experiments", help="list the available experiments")
    run = sub.add_parser("run", help="run one experiment and write a report")
    run.add_argument("--config", help="JSON or key=value file; flags override it")
    run.add_argument("--model")
    run.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                     help="model parameter (JSON value), repeatable")
    run.add_argument("--experiment", choices=sorted(EXPERIMENTS))
    run.add_argument("--expr", choices=["sum", "diff", "inv", "dif-target"])
    run.add_argument("--eps-start")
    run.add_argument("--eps-ratio")
    run.add_argument("--steps", type=int)
    run.add_argument("--sample-size", type=int)
    run.add_argument("--sample-radius", type=float)
    run.add_argument("--vary-base", action="store_true", default=None,
                     help="draw base points too instead of using the model's reference point")
    run.add_argument("--seed", type=int)
    run.add_argument("--tol", type=float)
    run.add_argument("--map", help="map for the differential experiment")
    run.add_argument("--out", help=f"output path (default: ${OUT_DIR_ENV} or the working directory)")
    run.add_argument("--format", choices=FORMATS)
    return p


def config_from_args(args) -> ExperimentConfig:
    raw = load_config_file(args.config) if args.config else {}
    for name in ("model", "experiment", "expr", "eps_start", "eps_ratio", "steps", "sample_size",
                 "sample_radius", "vary_base", "seed", "tol", "map", "out", "format"):
        value = getattr(args, name)
        if value is not None:
            raw[name] = value
    for item in args.param:
        if "=" not in item:
            raise ConfigError("param", f"expected KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        raw.setdefault("params", {})[k.strip()] = _parse_value(v.strip())
    return ExperimentConfig(**raw)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "list-models":
        print("\n".join(list_models()))
        return 0
    if args.command == "list-experiments":
        print("\n".join(list_experiments()))
        return 0
    try:
        status, report, path = run_experiment(config_from_args(args))
    except (ConfigError, DomainError, CarrierError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except EmergentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return 1
    failed = [k for k, v in report.passed.items() if not v]
    print(f"{path}: " + ("all checks passed" if not failed else "failed: " + ", ".join(failed)))
    return status


if __name__ == "__main__":
    sys.exit(main())
