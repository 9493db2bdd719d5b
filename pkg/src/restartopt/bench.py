"""Experiment harness: run one configured experiment or a matrix of them.

Every experiment yields a :class:`ResultRecord` comparing a measured count
(iterations, augmentation steps or oracle evaluations) with its closed-form
ceiling, plus per-iteration trace rows.

Continuous solvers run oracle-only: the minimizer is hidden from them and
they stop on the gradient certificate.  The harness then checks the true gap
against the known minimizer, so a solver fed wrong constants can fail even if
its own certificate claims success.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import augmentation as aug
from . import submodular as sm
from .first_order import certified_gap, regularized_reduction, restarted_minimize
from .oracles import DiagonalQuadratic, L1PlusQuadratic, LogSumExp
from .schedule import iteration_bound

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ResultRecord",
    "ALGORITHMS",
    "TRACE_COLUMNS",
    "parse_instance",
    "run_experiment",
    "run_matrix",
    "load_configs",
    "format_trace",
    "format_summary",
]

ALGORITHMS = {
    "continuous": ("restarted-gd", "restarted-agd", "restarted-subgrad", "regularized-agd"),
    "augment": ("naive", "bit-scaling", "geometric-scaling"),
    "submodular": ("greedy", "threshold-greedy"),
}
DEFAULT_EPS = {"continuous": 1e-6, "augment": None, "submodular": 0.1}
TRACE_COLUMNS = ("experiment_id", "phase", "global_iter", "value", "gap", "oracle_calls")
SUMMARY_COLUMNS = (
    "experiment_id", "domain", "algo", "instance", "measured", "bound",
    "bound_satisfied", "final_value", "gap_or_ratio", "wall_time", "error",
)


class ConfigError(ValueError):
    """Invalid experiment configuration (a usage error)."""


@dataclass
class ExperimentConfig:
    domain: str
    algo: str
    instance: str
    epsilon: float | None = None
    seed: int = 0
    k: int | None = None
    policy: str = "max_improvement"
    mu_scale: float = 1.0
    c: float = 2.0
    experiment_id: str | None = None
    out: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.domain not in ALGORITHMS:
            raise ConfigError(f"domain: unknown value {self.domain!r}; expected one of {sorted(ALGORITHMS)}")
        if self.algo not in ALGORITHMS[self.domain]:
            raise ConfigError(
                f"algo: unknown value {self.algo!r} for domain {self.domain}; "
                f"expected one of {ALGORITHMS[self.domain]}"
            )
        if self.epsilon is None:
            self.epsilon = DEFAULT_EPS[self.domain]
        if self.epsilon is not None and not float(self.epsilon) > 0:
            raise ConfigError(f"epsilon: must be positive, got {self.epsilon}")
        if self.domain == "submodular":
            if self.k is None or int(self.k) < 1:
                raise ConfigError("k: submodular experiments need k >= 1")
            if self.algo == "threshold-greedy" and not float(self.epsilon) < 1:
                raise ConfigError(f"epsilon: threshold greedy needs epsilon < 1, got {self.epsilon}")
        if self.policy not in aug.POLICIES:
            raise ConfigError(f"policy: unknown value {self.policy!r}; expected one of {aug.POLICIES}")
        if not float(self.mu_scale) > 0:
            raise ConfigError(f"mu_scale: must be positive, got {self.mu_scale}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format: expected csv or json, got {self.format!r}")
        self.seed = int(self.seed)
        parse_instance(self.domain, self.instance)  # validates name and file
        if self.experiment_id is None:
            self.experiment_id = f"{self.domain}/{self.algo}/{self.instance}/seed{self.seed}"

    @classmethod
    def from_dict(cls, d) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config field(s): {sorted(extra)}")
        for name in ("domain", "algo", "instance"):
            if name not in d:
                raise ConfigError(f"{name}: missing")
        return cls(**d)


@dataclass
class ResultRecord:
    experiment_id: str
    domain: str
    algo: str
    instance: str
    measured: int | None
    bound: float | None
    bound_satisfied: bool
    final_value: float | None
    gap_or_ratio: float | None
    wall_time: float
    error: str | None = None
    details: dict = field(default_factory=dict)


# ---- instance specs ---------------------------------------------------------

BUILTINS = {
    "continuous": ("quadratic", "flat-quadratic", "logcosh", "abs-quadratic"),
    "augment": ("cube-powers", "random"),
    "submodular": ("coverage-random", "toy"),
}


def _number(text):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_instance(domain, spec):
    """``name:key=value,...`` for a built-in, otherwise a file path.

    Returns ``(name, params)``; for files name is ``"file"`` and params holds
    the path.
    """
    name, _, rest = str(spec).partition(":")
    if name in BUILTINS.get(domain, ()):
        params = {}
        for item in filter(None, rest.split(",")):
            key, eq, val = item.partition("=")
            if not eq:
                raise ConfigError(f"instance: malformed parameter {item!r} in {spec!r}")
            params[key.strip()] = _number(val.strip())
        return name, params
    if domain in ("augment", "submodular") and Path(spec).is_file():
        return "file", {"path": str(spec)}
    raise ConfigError(
        f"instance: {spec!r} is neither a built-in for {domain} {BUILTINS.get(domain, ())} "
        "nor an existing file"
    )


def _continuous_problem(name, params, seed):
    """Returns (oracle, x0, D) with the true minimizer attached to the oracle."""
    if name == "quadratic":
        mu = float(params.get("mu", 1.0))
        L = float(params.get("L", params.get("kappa", 10.0) * mu))
        n = int(params.get("n", 20))
        oracle = DiagonalQuadratic.with_condition(L, mu, n)
        if params.get("start", "normal") == "ones":
            x0 = np.ones(n)
        else:
            x0 = np.random.default_rng(seed).standard_normal(n)
        return oracle, x0, None
    if name == "flat-quadratic":
        # minimizers form the line x_1 = 0, at distance 1 from (1, 1)
        return DiagonalQuadratic([1.0, 0.0]), np.array([1.0, 1.0]), 1.0
    if name == "logcosh":
        x0 = float(params.get("x0", 2.0))
        return LogSumExp.log_cosh(), np.array([x0]), float(params.get("D", abs(x0)))
    if name == "abs-quadratic":
        oracle = L1PlusQuadratic(1, mu=float(params.get("mu", 1.0)), radius=1.0)
        return oracle, np.array([float(params.get("x0", 1.0))]), None
    raise ConfigError(f"instance: unknown continuous instance {name!r}")


def _augment_problem(name, params, seed):
    if name == "cube-powers":
        inst = aug.make_cube_powers(int(params.get("n", 10)))
        return inst, np.zeros(inst.n, dtype=np.int64)
    if name == "random":
        inst = aug.make_random_01_polytope(
            int(params.get("n", 8)), int(params.get("m", 50)), seed, int(params.get("max_entry", 100))
        )
        return inst, inst.points[0].copy()
    inst = aug.read_instance(params["path"])
    return inst, inst.points[0].copy()


def _submodular_problem(name, params, seed):
    if name == "coverage-random":
        return sm.random_coverage(
            int(params.get("n", 12)), int(params.get("u", 30)), seed, float(params.get("density", 0.2))
        )
    if name == "toy":
        return sm.CoverageInstance(({0, 1}, {2, 3}, {0, 2}), np.ones(4), labels=("A", "B", "C"))
    return sm.read_coverage(params["path"])


# ---- runners ------------------------------------------------------------------

def _rows(trace):
    return [(r.phase, r.global_iter, r.objective_value, r.gap_certificate, r.oracle_calls) for r in trace]


def _run_continuous(cfg, name, params):
    oracle, x0, D = _continuous_problem(name, params, cfg.seed)
    eps = float(cfg.epsilon)
    f_star = oracle.f_star
    details = {}
    if cfg.algo == "regularized-agd":
        if oracle.mu > 0 or D is None:
            raise ConfigError(f"instance: regularized-agd needs a mu = 0 instance with known D, got {name!r}")
        hidden = oracle.with_constants(keep_minimizer=False)
        x, trace = regularized_reduction(hidden, x0, D, eps, c=cfg.c)
        w = eps / D**2
        gap0 = float(np.dot(oracle.gradient(x0), oracle.gradient(x0))) / (2 * w)
        bound = iteration_bound("agd", mu=w, L=oracle.L + w, gap0=gap0, eps=eps / 2, c=cfg.c)
        rows = _rows(trace)  # values are f_eps values; no true gap per row
    else:
        variant = {"restarted-gd": "gd", "restarted-agd": "agd", "restarted-subgrad": "subgrad"}[cfg.algo]
        if variant == "subgrad":
            if not hasattr(oracle, "subgradient"):
                raise ConfigError(f"instance: restarted-subgrad needs a nonsmooth instance, got {name!r}")
            # no gradient certificate exists here, so the optimal value is shown
            solver_oracle = oracle.with_constants(mu=oracle.mu * cfg.mu_scale)
            cert = "minimizer"
        else:
            if not hasattr(oracle, "gradient") or not oracle.mu > 0:
                raise ConfigError(f"instance: {cfg.algo} needs a smooth strongly convex instance, got {name!r}")
            solver_oracle = oracle.with_constants(mu=oracle.mu * cfg.mu_scale, keep_minimizer=False)
            cert = "gradient"
        gap0 = certified_gap(solver_oracle, x0, cert)
        x, trace = restarted_minimize(variant, solver_oracle, x0, eps, gap0=gap0, c=cfg.c, certificate=cert)
        bound = iteration_bound(
            variant, mu=solver_oracle.mu, gap0=gap0, eps=eps,
            L=getattr(solver_oracle, "L", None), G=getattr(solver_oracle, "G", None), c=cfg.c,
        )
        rows = [(p, t, v, v - f_star, calls) for p, t, v, _, calls in _rows(trace)]
        details["certified_gap0"] = gap0
    measured = len(trace)
    final = oracle.value(x)
    true_gap = final - f_star
    details["phases"] = trace[-1].phase if trace else 0
    ok = measured <= bound and true_gap <= eps
    return measured, bound, ok, final, true_gap, rows, details


def _run_augment(cfg, name, params):
    inst, x0 = _augment_problem(name, params, cfg.seed)
    if cfg.algo == "naive":
        path = []
        oracle = aug.ImprovingOracle(inst, cfg.policy)
        x, steps = aug.augment(inst, oracle, x0, inst.c, path=path)
        rows = [(1, i, float(inst.value(p)), None, i) for i, p in enumerate(path[1:], start=1)]
        bound = inst.m - 1  # each step moves to a strictly better distinct point
    else:
        run = aug.bit_scaling if cfg.algo == "bit-scaling" else aug.geometric_scaling
        x, steps, trace = run(inst, x0, policy=cfg.policy)
        rows = _rows(trace)
        if cfg.algo == "bit-scaling":
            bound = aug.bit_scaling_bound(inst)
        else:
            bound = 2 * inst.n * aug.geometric_phase_bound(inst)
    opt = inst.value(aug.brute_force_opt(inst))
    gap = opt - inst.value(x)
    rows = [(p, t, v, opt - v, calls) for p, t, v, _, calls in rows]
    ok = steps <= bound and gap == 0
    return steps, bound, ok, float(inst.value(x)), float(gap), rows, {"C": inst.C, "n": inst.n}


def _run_submodular(cfg, name, params):
    inst = _submodular_problem(name, params, cfg.seed)
    k = int(cfg.k)
    if k > inst.n:
        raise ConfigError(f"k: must be at most n = {inst.n}, got {k}")
    oracle = inst.oracle()
    if cfg.algo == "greedy":
        sel = sm.greedy(oracle, k)
        bound, guarantee = 2 * k * inst.n, 1 - 1 / math.e
    else:
        eps = float(cfg.epsilon)
        sel = sm.threshold_greedy(oracle, k, eps)
        bound, guarantee = sm.threshold_eval_bound(inst.n, eps), 1 - 1 / math.e - eps
    ratio = None
    if inst.n <= 20:
        best = sm.brute_force_submax(inst.oracle(), k).value
        ratio = 1.0 if best == 0 else sel.value / best
    rows = _rows(sel.trace)
    ok = sel.evals_used <= bound and (ratio is None or ratio >= guarantee - 1e-12)
    details = {"chosen": list(sel.chosen), "guarantee": guarantee}
    return sel.evals_used, bound, ok, sel.value, ratio, rows, details


_RUNNERS = {"continuous": _run_continuous, "augment": _run_augment, "submodular": _run_submodular}


def run_experiment(cfg: ExperimentConfig):
    """Run one experiment; returns ``(ResultRecord, trace_rows)``.

    Trace rows are tuples in :data:`TRACE_COLUMNS` order.  Solver failures
    are caught and reported in ``error`` with ``bound_satisfied = False``;
    configuration problems raise :class:`ConfigError`.
    """
    name, params = parse_instance(cfg.domain, cfg.instance)
    start = time.perf_counter()
    try:
        measured, bound, ok, final, gap, rows, details = _RUNNERS[cfg.domain](cfg, name, params)
    except ConfigError:
        raise
    except Exception as exc:  # reported per cell, never aborts a matrix
        rec = ResultRecord(cfg.experiment_id, cfg.domain, cfg.algo, cfg.instance, None, None, False,
                           None, None, time.perf_counter() - start, f"{type(exc).__name__}: {exc}")
        return rec, []
    rec = ResultRecord(
        cfg.experiment_id, cfg.domain, cfg.algo, cfg.instance, int(measured),
        None if bound is None else float(bound), bool(ok), float(final),
        None if gap is None else float(gap), time.perf_counter() - start, None, details,
    )
    return rec, [(cfg.experiment_id, *r) for r in rows]


def _run_cell(cfg):
    try:
        return run_experiment(cfg)
    except ConfigError as exc:
        rec = ResultRecord(cfg.experiment_id, cfg.domain, cfg.algo, cfg.instance, None, None, False,
                           None, None, 0.0, f"ConfigError: {exc}")
        return rec, []


def run_matrix(configs, jobs: int = 1):
    """Run every config; returns ``(records, trace_rows)`` in config order.

    With ``jobs > 1`` cells run in worker processes, each building its own
    instance and oracle.  A failing cell is recorded and the rest still run.
    """
    configs = list(configs)
    if not configs:
        raise ConfigError("matrix is empty")
    if jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, configs))
    else:
        results = [_run_cell(c) for c in configs]
    records = [r for r, _ in results]
    rows = [row for _, cell_rows in results for row in cell_rows]
    return records, rows


def _expand(entry, defaults):
    d = {**defaults, **entry}
    seeds = d.pop("seeds", None)
    seed_range = d.pop("seed_range", None)
    if seeds is not None and seed_range is not None:
        raise ConfigError("use either seeds or seed_range, not both")
    if seed_range is not None:
        seeds = list(range(*seed_range))
    if seeds is None:
        return [d]
    out = []
    for s in seeds:
        cell = {**d, "seed": s}
        if "experiment_id" in d:
            cell["experiment_id"] = f"{d['experiment_id']}/seed{s}"
        out.append(cell)
    return out


def load_configs(path):
    """Read a JSON config: one experiment object, a list of them, or
    ``{"defaults": {...}, "experiments": [...]}``.  Entries may carry
    ``seeds`` (a list) or ``seed_range`` ([start, stop]) to expand into one
    cell per seed."""
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config: file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON in {path}: {exc}") from None
    defaults = {}
    if isinstance(data, dict) and "experiments" in data:
        defaults = data.get("defaults", {})
        data = data["experiments"]
    if isinstance(data, dict):
        data = [data]
    if not isinstance(data, list):
        raise ConfigError("config: expected an object or a list of objects")
    cells = [cell for entry in data for cell in _expand(entry, defaults)]
    return [ExperimentConfig.from_dict(c) for c in cells]


# ---- output -------------------------------------------------------------------

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_trace(rows, fmt="csv") -> str:
    if fmt == "json":
        return json.dumps([dict(zip(TRACE_COLUMNS, r)) for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    w.writerows([_fmt(v) for v in r] for r in rows)
    return buf.getvalue()


def format_summary(records, fmt="csv", with_time=True) -> str:
    cols = [c for c in SUMMARY_COLUMNS if with_time or c != "wall_time"]
    if fmt == "json":
        out = []
        for r in records:
            d = asdict(r)
            if not with_time:
                d.pop("wall_time")
            out.append(d)
        return json.dumps(out, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in records:
        d = asdict(r)
        w.writerow([_fmt(d[c]) for c in cols])
    return buf.getvalue()
