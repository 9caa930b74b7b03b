"""Config-driven experiment runner.

Usage::

    magnetokernel <subcommand> --config run.toml [--seed N] [--out DIR] [--workers N]
                  [--set section.key=value ...]

Every subcommand writes ``<name>.csv`` and ``manifest.json`` into ``--out``.
CSV bodies depend only on the configuration and the seed: the worker count
and output directory are excluded from the config hash and never change a
number.

Exit codes: 0 success, 2 invalid configuration, 3 estimator or numerical
failure, 4 a bound was violated, 5 inconclusive verdicts only, 6 I/O error.
"""

import argparse
import csv
import hashlib
import itertools
import json
import math
import platform
import sys
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import bounds, estimator, exact, fields, potentials, stochint
from ._validation import ConfigurationError, check_int, check_positive
from .fields import CovarianceError, FieldExtentError
from .paths import PhysParams, bridge_batch, space_points
from .potentials import PotentialError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ESTIMATOR = 3
EXIT_VIOLATED = 4
EXIT_INCONCLUSIVE = 5
EXIT_IO = 6

ESTIMATE_HEADER = (
    "estimator", "D", "gamma_or_spec", "V_spec", "x", "x_prime", "tau_or_m",
    "mean", "std_error", "n_paths", "n_steps", "seed", "mean_imag", "config_hash",
)

BOUND_NAMES = ("kato", "jensen", "thm2", "thm3", "cor4", "green")


# --------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    seed: int
    params: PhysParams
    covariance: object
    potential: object
    field: dict
    budgets: dict
    points: dict
    sections: dict
    raw: dict

    @property
    def config_hash(self):
        body = {k: v for k, v in self.raw.items() if k not in ("out", "workers")}
        text = json.dumps(body, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def _section(raw, name):
    sec = raw.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigurationError(f"[{name}] must be a table")
    return sec


def _get(sec, key, where, default=None, required=False):
    if key in sec:
        return sec[key]
    if required:
        raise ConfigurationError(f"missing {where}.{key}")
    return default


def parse_covariance(sec, dim):
    if not sec:
        return None
    kind = _get(sec, "kind", "covariance", required=True)
    opts = {k: v for k, v in sec.items() if k != "kind"}
    try:
        if kind == "bounded_isotropic":
            length = opts.pop("length", 1.0)
            spec = fields.BoundedIsotropic(length=math.inf if length == "inf" else float(length), **opts)
        elif kind == "scale_invariant":
            spec = fields.ScaleInvariant(**opts)
        elif kind == "none":
            return None
        else:
            raise ConfigurationError(f"covariance.kind must be bounded_isotropic, scale_invariant or none, got {kind!r}")
    except TypeError as exc:
        raise ConfigurationError(f"covariance: {exc}") from None
    if spec.transverse and dim < 2:
        raise ConfigurationError("covariance.transverse needs dimension >= 2")
    return spec


def parse_potential(sec):
    kind = sec.get("kind", "zero") if sec else "zero"
    opts = {k: v for k, v in (sec or {}).items() if k != "kind"}
    try:
        if kind == "zero":
            return potentials.Zero()
        if kind == "constant":
            return potentials.Constant(float(_get(opts, "value", "potential", required=True)))
        if kind == "quadratic":
            axes = opts.pop("axes", None)
            return potentials.Quadratic(axes=None if axes is None else tuple(axes), **opts)
        if kind == "powerlaw":
            return potentials.PowerLaw(**opts)
        if kind == "saturating":
            return potentials.Saturating(**opts)
    except TypeError as exc:
        raise ConfigurationError(f"potential: {exc}") from None
    raise ConfigurationError(f"potential.kind must be zero, constant, quadratic, powerlaw or saturating, got {kind!r}")


def _vectors(values, dim, where):
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1 and dim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ConfigurationError(f"{where} must be a list of {dim}-vectors")
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError(f"{where} must be finite")
    return arr


def _positives(values, where):
    vals = [float(v) for v in np.atleast_1d(values)]
    for v in vals:
        if not (v > 0 and math.isfinite(v)):
            raise ConfigurationError(f"{where} must be positive and finite, got {v}")
    return vals


def parse_points(sec, dim, where="points"):
    out = {}
    for key in ("x", "x_prime", "u", "u_prime"):
        if key in sec:
            out[key] = _vectors(sec[key], dim, f"{where}.{key}")
    for key in ("tau", "m"):
        if key in sec:
            out[key] = _positives(sec[key], f"{where}.{key}")
    if "pairs" in sec:
        out["pairs"] = bool(sec["pairs"])
    return out


def _apply_override(raw, assignment):
    if "=" not in assignment:
        raise ConfigurationError(f"--set expects section.key=value, got {assignment!r}")
    path, value = assignment.split("=", 1)
    try:
        parsed = tomllib.loads(f"v = {value}")["v"]
    except tomllib.TOMLDecodeError:
        parsed = value
    keys = path.split(".")
    node = raw
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigurationError(f"--set path {path!r} crosses a scalar")
    if isinstance(node.get(keys[-1]), (dict, list)):
        raise ConfigurationError(f"--set may only override scalar fields, {path!r} is not scalar")
    node[keys[-1]] = parsed


def load_config(path, seed=None, overrides=()):
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"cannot parse {path}: {exc}") from None
    return build_config(raw, seed=seed, overrides=overrides)


def build_config(raw, seed=None, overrides=()):
    raw = json.loads(json.dumps(raw))
    for assignment in overrides:
        _apply_override(raw, assignment)
    if seed is not None:
        raw["seed"] = seed
    if "seed" not in raw:
        raise ConfigurationError("seed is mandatory (config or --seed)")
    seed = raw["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigurationError(f"seed must be a non-negative integer, got {seed!r}")
    phys = _section(raw, "physics")
    try:
        params = PhysParams(float(phys.get("hbar", 1.0)), float(phys.get("mass", 1.0)), int(phys.get("dimension", 1)))
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"physics: {exc}") from None
    budgets = dict(_section(raw, "budgets"))
    for key, default in (("n_paths", 4096), ("n_steps", 64), ("n_fields", 32)):
        budgets[key] = check_int(budgets.get(key, default), f"budgets.{key}", 2 if key != "n_fields" else 1)
    sections = {k: _section(raw, k) for k in ("kernel", "trace", "green", "bounds", "collapse", "sample", "train")}
    cfg = ExperimentConfig(
        name=str(raw.get("name", "run")),
        seed=seed,
        params=params,
        covariance=parse_covariance(_section(raw, "covariance"), params.dimension),
        potential=parse_potential(_section(raw, "potential")),
        field=_section(raw, "field"),
        budgets=budgets,
        points=parse_points(_section(raw, "points"), params.dimension),
        sections=sections,
        raw=raw,
    )
    return cfg


def build_fixed_field(cfg, index=0):
    """The fixed vector potential named by ``[field]`` (``None`` when absent)."""
    sec = cfg.field
    if not sec:
        return None
    kind = sec.get("kind")
    if kind == "constant_b":
        if cfg.params.dimension != 3:
            raise ConfigurationError("field.kind = constant_b needs dimension 3")
        B = check_positive(float(_get(sec, "B", "field", required=True)), "field.B")
        return constant_field(B)
    if kind == "sampled":
        if cfg.covariance is None:
            raise ConfigurationError("field.kind = sampled needs a [covariance] table")
        reach = float(sec.get("reach", 3.0))
        grid = fields.grid_for(cfg.covariance, cfg.params.dimension, reach)
        return fields.sample_field(cfg.covariance, grid, cfg.seed, index=int(sec.get("index", 0)) + index)
    if kind == "file":
        return fields.load_field(_get(sec, "path", "field", required=True))
    raise ConfigurationError(f"field.kind must be constant_b, sampled or file, got {kind!r}")


def constant_field(B):
    """Symmetric-gauge potential ``(B / 2)(-x_2, x_1, 0)`` of a constant field along the third axis."""

    def A(q):
        q = np.asarray(q, dtype=float)
        return np.stack([-0.5 * B * q[..., 1], 0.5 * B * q[..., 0], np.zeros(q.shape[:-1])], axis=-1)

    A.B = B
    return A


# --------------------------------------------------------------------------
# output


def _vec(v):
    return ";".join(repr(float(t)) for t in np.atleast_1d(v))


def _num(v):
    return repr(float(v))


def kernel_points(points, need_tau=True, key="tau"):
    if "x" not in points or "x_prime" not in points or (need_tau and key not in points):
        raise ConfigurationError(f"[points] needs x, x_prime and {key}")
    xs, xps, ts = points["x"], points["x_prime"], points[key]
    if points.get("pairs"):
        if len(xs) != len(xps):
            raise ConfigurationError("points.pairs needs x and x_prime of equal length")
        return [(x, xp, t) for (x, xp), t in itertools.product(zip(xs, xps), ts)]
    return list(itertools.product(xs, xps, ts))


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _versions():
    import scipy
    import sklearn

    from . import __version__

    return {
        "magnetokernel": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "scikit-learn": sklearn.__version__,
        "python": platform.python_version(),
    }


def _spec_token(cfg):
    return fields.describe_covariance(cfg.covariance)


def estimate_row(cfg, name, est, x, xp, t, n_paths=None, n_steps=None, spec_token=None):
    mean = complex(est.mean if hasattr(est, "mean") else est.value)
    return (
        name, cfg.params.dimension, spec_token or _spec_token(cfg), cfg.potential.describe(), _vec(x), _vec(xp), _num(t),
        _num(mean.real), _num(est.std_error), n_paths or est.n_paths, n_steps or est.n_steps, cfg.seed, _num(mean.imag),
        cfg.config_hash,
    )


# --------------------------------------------------------------------------
# subcommands


def cmd_sample_paths(cfg, workers):
    """Bridge-law diagnostics: empirical ``E[a_j(s) a_k(s')]`` against ``delta_jk min(s,s') (1 - max(s,s'))``."""
    n, dim = cfg.budgets["n_steps"], cfg.params.dimension
    P = cfg.budgets["n_paths"]
    a = bridge_batch(n, dim, cfg.seed, 0, P)
    idx = sorted({max(1, min(n - 1, int(round(f * n)))) for f in cfg.sections["sample"].get("fractions", [0.1, 0.25, 0.5, 0.75, 0.9])})
    rows = []
    for i, j in itertools.combinations_with_replacement(idx, 2):
        s, sp = i / n, j / n
        for d1, d2 in itertools.product(range(dim), repeat=2):
            prod = a[:, i, d1] * a[:, j, d2]
            emp, se = float(prod.mean()), float(prod.std(ddof=1) / math.sqrt(P))
            ex = (min(s, sp) * (1 - max(s, sp))) if d1 == d2 else 0.0
            z = (emp - ex) / se if se > 0 else 0.0
            rows.append((_num(s), _num(sp), d1, d2, _num(emp), _num(ex), _num(se), _num(z)))
    header = ("s", "s_prime", "j", "k", "empirical", "exact", "std_error", "z")
    return header, rows, EXIT_OK


def cmd_sample_field(cfg, workers):
    """Field realizations: sampler covariance against the quadrature tensor, and transversality."""
    spec = cfg.covariance
    if spec is None:
        raise ConfigurationError("sample-field needs a [covariance] table")
    dim = cfg.params.dimension
    sec = cfg.sections["sample"]
    reach = float(sec.get("reach", 3.0))
    grid = fields.grid_for(spec, dim, reach)
    lags = _vectors(sec.get("lags", [[0.5] + [0.0] * (dim - 1)]), dim, "sample.lags")
    base = _vectors(sec.get("base", [[0.0] * dim]), dim, "sample.base")[0]
    n_fields = cfg.budgets["n_fields"]
    samples = [fields.sample_field(spec, grid, cfg.seed, index=f) for f in range(n_fields)]
    at_base = np.stack([s(base) for s in samples])
    rows = []
    for lag in lags:
        at_lag = np.stack([s(base + lag) for s in samples])
        exact_tensor = spec.tensor(base + lag, base)
        for j, k in itertools.product(range(dim), repeat=2):
            prod = at_lag[:, j] * at_base[:, k]
            emp, se = float(prod.mean()), float(prod.std(ddof=1) / math.sqrt(n_fields)) if n_fields > 1 else math.inf
            rows.append(
                ("covariance", _vec(lag), j, k, _num(emp), _num(exact_tensor[j, k]), _num(se), describe_grid(grid))
            )
    for f, s in enumerate(samples):
        rows.append(("divergence_ratio", "", f, "", _num(fields.divergence_ratio(s)), "0.0", "0.0", describe_grid(grid)))
    save = sec.get("save")
    if save:
        fields.save_field(samples[0], Path(cfg.raw["out"]) / save)
    header = ("quantity", "lag", "j", "k", "value", "reference", "std_error", "grid")
    return header, rows, EXIT_OK


def describe_grid(grid):
    return f"n={'x'.join(map(str, grid.shape))},h={grid.spacing:.6g}"


def _routes(cfg):
    route = cfg.sections["kernel"].get("route", "auto")
    if route == "auto":
        routes = []
        if cfg.field:
            routes.append("fixed")
        if cfg.covariance is not None or not cfg.field:
            routes.append("gaussian")
        return routes
    if route == "all":
        return ["gaussian", "quenched"] + (["fixed"] if cfg.field else [])
    if route not in ("gaussian", "quenched", "fixed"):
        raise ConfigurationError(f"kernel.route must be auto, all, gaussian, quenched or fixed, got {route!r}")
    return [route]


def cmd_kernel(cfg, workers):
    b, p = cfg.budgets, cfg.params
    rows = []
    for route in _routes(cfg):
        for x, xp, t in kernel_points(cfg.points):
            if route == "gaussian":
                est = estimator.kernel_gaussian_average(cfg.covariance, cfg.potential, x, xp, t, b["n_paths"], b["n_steps"], p, cfg.seed, workers)
            elif route == "quenched":
                if cfg.covariance is None:
                    raise ConfigurationError("the quenched route needs a [covariance] table")
                est = estimator.kernel_quenched_average(
                    cfg.covariance, cfg.potential, x, xp, t, b["n_fields"], b["n_paths"], b["n_steps"], p, cfg.seed, workers=workers
                )
            else:
                field = build_fixed_field(cfg)
                if field is None:
                    raise ConfigurationError("the fixed route needs a [field] table")
                est = estimator.kernel_fixed_field(field, cfg.potential, x, xp, t, b["n_paths"], b["n_steps"], p, cfg.seed, workers)
            rows.append(estimate_row(cfg, route, est, x, xp, t, spec_token=_field_token(cfg) if route == "fixed" else None))
    return ESTIMATE_HEADER, rows, EXIT_OK


def _field_token(cfg):
    sec = cfg.field
    if sec.get("kind") == "constant_b":
        return f"constant_b(B={float(sec['B']):g})"
    if sec.get("kind") == "sampled":
        return "sampled:" + _spec_token(cfg)
    return f"file:{sec.get('path')}"


def cmd_trace(cfg, workers):
    sec = cfg.sections["trace"]
    b, p = cfg.budgets, cfg.params
    if "tau" not in cfg.points:
        raise ConfigurationError("[points] needs tau")
    box = float(sec.get("box", 6.0))
    n_grid = check_int(sec.get("n_grid", 16), "trace.n_grid", 2)
    rows = []
    origin = np.zeros(p.dimension)
    for t in cfg.points["tau"]:
        est = estimator.trace_estimate(cfg.covariance, cfg.potential, t, box, n_grid, b["n_paths"], b["n_steps"], p, cfg.seed, workers)
        rows.append(estimate_row(cfg, "trace", _TraceRow(est), origin, origin, t))
    return ESTIMATE_HEADER, rows, EXIT_OK


@dataclass(frozen=True)
class _TraceRow:
    est: object

    @property
    def mean(self):
        return self.est.value

    @property
    def std_error(self):
        return self.est.std_error

    @property
    def n_paths(self):
        return self.est.n_paths

    @property
    def n_steps(self):
        return self.est.n_steps


def _green_source(cfg):
    if cfg.field:
        return build_fixed_field(cfg), _field_token(cfg)
    return cfg.covariance, _spec_token(cfg)


def cmd_green(cfg, workers):
    sec = cfg.sections["green"]
    b, p = cfg.budgets, cfg.params
    source, token = _green_source(cfg)
    n_tau = check_int(sec.get("n_tau", 40), "green.n_tau", 4)
    rows = []
    for x, xp, m in kernel_points(cfg.points, key="m"):
        if sec.get("diagonal_difference", False):
            est = estimator.green_diagonal_difference(source, cfg.potential, x, m, p, b["n_paths"], b["n_steps"], cfg.seed, n_tau=n_tau, workers=workers)
            name = "green_diagonal_difference"
            xp = x
        else:
            est = estimator.green_estimate(source, cfg.potential, x, xp, m, p, b["n_paths"], b["n_steps"], cfg.seed, n_tau=n_tau, workers=workers)
            name = "green"
        rows.append(estimate_row(cfg, name, _GreenRow(est), x, xp, m, spec_token=token))
    return ESTIMATE_HEADER, rows, EXIT_OK


@dataclass(frozen=True)
class _GreenRow:
    est: object

    @property
    def mean(self):
        return self.est.value

    @property
    def std_error(self):
        return math.hypot(self.est.mc_error, self.est.quadrature_error)

    @property
    def n_paths(self):
        return self.est.n_paths

    @property
    def n_steps(self):
        return self.est.n_steps


def cmd_collapse(cfg, workers):
    spec = cfg.covariance
    if not isinstance(spec, fields.ScaleInvariant):
        raise ConfigurationError("collapse needs a scale_invariant covariance")
    if not cfg.potential.is_zero():
        raise ConfigurationError("collapse needs V = 0")
    pts = cfg.points
    if "u" not in pts or "u_prime" not in pts or "tau" not in pts:
        raise ConfigurationError("[points] needs u, u_prime and tau for the collapse")
    if len(pts["u"]) != len(pts["u_prime"]):
        raise ConfigurationError("points.u and points.u_prime must pair up")
    b, p = cfg.budgets, cfg.params

    def est(x, xp, t):
        return estimator.kernel_gaussian_average(spec, None, x, xp, t, b["n_paths"], b["n_steps"], p, cfg.seed, workers)

    rel = float(cfg.sections["collapse"].get("rel_tol", 0.15))
    rep = bounds.scaling_collapse(spec.gamma, list(zip(pts["u"], pts["u_prime"])), pts["tau"], est, p, rel_tol=rel)
    rows = []
    for q in rep.points:
        for t, F, e in zip(q.taus, q.F, q.F_err):
            rows.append((_vec(q.u), _vec(q.u_prime), _num(t), _num(F), _num(e), _num(q.spread), _num(q.allowed), q.verdict))
    header = ("u", "u_prime", "tau", "F", "F_err", "spread", "allowed", "verdict")
    return header, rows, _verdict_exit([q.verdict for q in rep.points])


def _verdict_exit(verdicts):
    if "violated" in verdicts:
        return EXIT_VIOLATED
    if "inconclusive" in verdicts:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


# check-bounds ---------------------------------------------------------------


def _asserted_constants(sec):
    names = [n for n in bounds._CONSTANT_NAMES if n in sec]
    return bounds.BoundConstants(**{n: float(sec[n]) for n in names})


def _train_rows(cfg, key="tau"):
    train = parse_points(cfg.sections["train"], cfg.params.dimension, "train")
    if not train:
        return None
    return kernel_points(train, key=key)


def _kernel_data(cfg, rows, workers, seed):
    b, p = cfg.budgets, cfg.params
    X, y, e = [], [], []
    for x, xp, t in rows:
        est = estimator.kernel_gaussian_average(cfg.covariance, cfg.potential, x, xp, t, b["n_paths"], b["n_steps"], p, seed, workers)
        X.append(np.concatenate([x, xp, [t]]))
        y.append(est.real)
        e.append(est.std_error)
    return np.array(X), np.array(y), np.array(e)


def _potential_bounds(cfg):
    V = cfg.potential
    c = float(V.lower)
    if isinstance(V, potentials.PowerLaw):
        return c, 0.0, V.beta
    return c, float(V.upper) if math.isfinite(V.upper) else None, 0.0


def _fitted_reports(cfg, form, workers, gamma=0.0, beta=0.0, upper=None):
    sec = cfg.sections["bounds"]
    test_rows = kernel_points(cfg.points)
    c, a, _ = _potential_bounds(cfg)
    if a is None:
        raise ConfigurationError(f"{form} needs a potential with a finite upper bound")
    Xs, ys, es = _kernel_data(cfg, test_rows, workers, cfg.seed)
    fitter = bounds.LowerBoundFitter(form, gamma=gamma, beta=beta, a=a, c=max(c, 0.0), hbar=cfg.params.hbar, mass=cfg.params.mass, dimension=cfg.params.dimension)
    train = _train_rows(cfg)
    if train is not None:
        Xt, yt, et = _kernel_data(cfg, train, workers, cfg.seed + 1)
        fitter.fit(Xt, yt, et)
    else:
        fitter.constants_ = _asserted_constants(sec)
    ups = None if upper is None else [upper(fitter.constants_, r) for r in Xs]
    return fitter.reports(Xs, ys, es, name=form_name(form), upper=ups)


def form_name(form):
    return {"theorem2": "thm2", "theorem3": "thm3", "corollary4": "cor4", "green": "green"}[form]


def check_kato(cfg, workers):
    b, p = cfg.budgets, cfg.params
    reports = []
    n_real = 1 if cfg.field.get("kind") in ("constant_b", "file") else b["n_fields"]
    for f in range(n_real):
        field = build_fixed_field(cfg, index=f) if cfg.field else None
        if field is None:
            if cfg.covariance is None:
                raise ConfigurationError("kato needs a [field] or a [covariance] table")
            dim = p.dimension
            reach = max(estimator.path_reach(x, xp, t, p) for x, xp, t in kernel_points(cfg.points))
            field = fields.sample_field(cfg.covariance, fields.grid_for(cfg.covariance, dim, reach), cfg.seed, index=f)
        for x, xp, t in kernel_points(cfg.points):
            ka = estimator.kernel_fixed_field(field, cfg.potential, x, xp, t, b["n_paths"], b["n_steps"], p, cfg.seed, workers)
            k0 = estimator.kernel_fixed_field(None, cfg.potential, x, xp, t, b["n_paths"], b["n_steps"], p, cfg.seed, workers)
            se = math.hypot(ka.std_error, k0.std_error)
            reports.append(bounds.make_report("kato", x, xp, t, 0.0, abs(ka.mean), se, k0.real))
    return reports


def check_jensen(cfg, workers):
    b, p = cfg.budgets, cfg.params
    reports = []
    for x, xp, t in kernel_points(cfg.points):
        est = estimator.kernel_gaussian_average(cfg.covariance, cfg.potential, x, xp, t, b["n_paths"], b["n_steps"], p, cfg.seed, workers)
        low = bounds.jensen_lower_bound(cfg.covariance, cfg.potential, x, xp, t, b["n_paths"], b["n_steps"], p, cfg.seed, workers)
        reports.append(bounds.make_report("jensen", x, xp, t, low, est.real, est.std_error, math.inf))
    return reports


def check_thm2(cfg, workers):
    if not isinstance(cfg.covariance, (fields.BoundedIsotropic, type(None))):
        raise ConfigurationError("thm2 needs a bounded_isotropic covariance")
    D = cfg.params.dimension
    upper = lambda k, r: bounds.theorem2_bounds(k, r[:D], r[D : 2 * D], r[-1], cfg.params)[1]
    return _fitted_reports(cfg, "theorem2", workers, upper=upper)


def check_thm3(cfg, workers):
    if not isinstance(cfg.covariance, fields.ScaleInvariant):
        raise ConfigurationError("thm3 needs a scale_invariant covariance")
    D = cfg.params.dimension
    _, _, beta = _potential_bounds(cfg)
    rtol = float(cfg.sections["bounds"].get("upper_rtol", 1e-7))
    upper = lambda k, r: bounds.theorem3_upper_bound(cfg.potential, r[:D], r[D : 2 * D], r[-1], cfg.params, rtol=rtol)
    return _fitted_reports(cfg, "theorem3", workers, gamma=cfg.covariance.gamma, beta=beta, upper=upper)


def check_cor4(cfg, workers):
    p, b = cfg.params, cfg.budgets
    sec = cfg.sections["bounds"]
    tsec = cfg.sections["trace"]
    gamma = cfg.covariance.gamma if isinstance(cfg.covariance, fields.ScaleInvariant) else 0.0
    beta = _potential_beta(cfg.potential)
    if "tau" not in cfg.points:
        raise ConfigurationError("[points] needs tau")
    box = float(tsec.get("box", 6.0))
    n_grid = check_int(tsec.get("n_grid", 16), "trace.n_grid", 2)

    def traces(taus, seed):
        out = [estimator.trace_estimate(cfg.covariance, cfg.potential, t, box, n_grid, b["n_paths"], b["n_steps"], p, seed, workers) for t in taus]
        return np.array([[t] for t in taus]), np.array([o.value for o in out]), np.array([o.std_error + o.truncation for o in out])

    Xs, ys, es = traces(cfg.points["tau"], cfg.seed)
    fitter = bounds.LowerBoundFitter("corollary4", gamma=gamma, beta=beta, a=0.0, hbar=p.hbar, mass=p.mass, dimension=p.dimension)
    train = cfg.sections["train"].get("tau")
    if train:
        Xt, yt, et = traces(_positives(train, "train.tau"), cfg.seed + 1)
        fitter.fit(Xt, yt, et)
    else:
        fitter.constants_ = _asserted_constants(sec)
    ups = [bounds.corollary4_bounds(gamma, beta, p.dimension, t, cfg.potential, fitter.constants_, p)[1] for t in cfg.points["tau"]]
    return fitter.reports(Xs, ys, es, name="cor4", upper=ups)


def _potential_beta(V):
    if isinstance(V, potentials.PowerLaw):
        return V.beta
    if isinstance(V, potentials.Quadratic):
        return 1.0
    raise ConfigurationError("cor4 needs a confining powerlaw or quadratic potential")


def check_green(cfg, workers):
    """Green lower form (fitted or asserted) and, for a constant field, the upper envelope."""
    p, b = cfg.params, cfg.budgets
    sec = cfg.sections["bounds"]
    gsec = cfg.sections["green"]
    source, _ = _green_source(cfg)
    n_tau = check_int(gsec.get("n_tau", 40), "green.n_tau", 4)

    def data(rows, seed):
        ests = [estimator.green_estimate(source, cfg.potential, x, xp, m, p, b["n_paths"], b["n_steps"], seed, n_tau=n_tau, workers=workers) for x, xp, m in rows]
        vals = np.array([np.real(e.value) for e in ests])
        errs = np.array([math.hypot(e.mc_error, e.quadrature_error) for e in ests])
        return np.array([np.concatenate([x, xp, [m]]) for x, xp, m in rows]), vals, errs

    rows = kernel_points(cfg.points, key="m")
    X, vals, errs = data(rows, cfg.seed)
    fitter = bounds.LowerBoundFitter("green", hbar=p.hbar, mass=p.mass, dimension=p.dimension)
    train = _train_rows(cfg, key="m")
    if train is not None:
        fitter.fit(*data(train, cfg.seed + 1))
    else:
        fitter.constants_ = _asserted_constants(sec)
    B = getattr(source, "B", None)
    ups = None
    if B is not None:
        # the envelope constant is fitted at the first point and checked at the rest
        c_up = bounds.fit_green_envelope(rows[0][2], rows[0][0], rows[0][1], vals[0], errs[0], p, B)
        ups = [bounds.green_bounds(m, x, xp, fitter.constants_, p, B=B, upper_C=c_up)[1] for x, xp, m in rows]
    return fitter.reports(X, vals, errs, name="green", upper=ups)


CHECKS = {"kato": check_kato, "jensen": check_jensen, "thm2": check_thm2, "thm3": check_thm3, "cor4": check_cor4, "green": check_green}


def cmd_check_bounds(cfg, workers, which):
    reports = CHECKS[which](cfg, workers)
    return bounds.BoundReport.CSV_HEADER, [r.csv_row() for r in reports], _verdict_exit([r.verdict for r in reports])


COMMANDS = {
    "sample-paths": cmd_sample_paths,
    "sample-field": cmd_sample_field,
    "kernel": cmd_kernel,
    "trace": cmd_trace,
    "green": cmd_green,
    "collapse": cmd_collapse,
}


# --------------------------------------------------------------------------
# entry point


def build_parser():
    parser = argparse.ArgumentParser(prog="magnetokernel", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="TOML experiment file")
        p.add_argument("--seed", type=int, help="override the configured seed")
        p.add_argument("--out", default=".", help="output directory (default: current)")
        p.add_argument("--workers", type=int, help="worker threads (default: $MAGNETOKERNEL_WORKERS or 1)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a scalar config field")

    for name in COMMANDS:
        common(sub.add_parser(name))
    cb = sub.add_parser("check-bounds")
    cb.add_argument("bound", choices=BOUND_NAMES)
    common(cb)
    return parser


def run(argv=None):
    """Run one subcommand; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_CONFIG
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    try:
        cfg = load_config(args.config, seed=args.seed, overrides=args.set)
        if args.workers is not None and args.workers < 1:
            raise ConfigurationError("--workers must be at least 1")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        cfg.raw["out"] = str(out)
        if args.subcommand == "check-bounds":
            header, rows, status = cmd_check_bounds(cfg, args.workers, args.bound)
            label = f"check-bounds-{args.bound}"
        else:
            header, rows, status = COMMANDS[args.subcommand](cfg, args.workers)
            label = args.subcommand
        _write_csv(out / f"{cfg.name}-{label}.csv", header, rows)
        manifest = {
            "config_hash": cfg.config_hash,
            "seed": cfg.seed,
            "subcommand": label,
            "budgets": cfg.budgets,
            "started": started.isoformat(),
            "elapsed_s": time.perf_counter() - t0,
            "versions": _versions(),
            "csv": f"{cfg.name}-{label}.csv",
            "exit_status": status,
        }
        with open(out / "manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
        if status == EXIT_VIOLATED:
            print(f"magnetokernel: {label}: at least one check violated", file=sys.stderr)
        elif status == EXIT_INCONCLUSIVE:
            print(f"magnetokernel: {label}: inconclusive verdicts", file=sys.stderr)
        return status
    except (ConfigurationError, CovarianceError, FieldExtentError, PotentialError) as exc:
        kind = EXIT_CONFIG if isinstance(exc, ConfigurationError) else EXIT_ESTIMATOR
        print(f"magnetokernel: error: {exc}", file=sys.stderr)
        return kind
    except (estimator.EstimatorError, bounds.BoundFitError, stochint.FieldEvaluationError, FloatingPointError) as exc:
        print(f"magnetokernel: estimator error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATOR
    except OSError as exc:
        print(f"magnetokernel: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
