"""Gradient, accelerated gradient and subgradient descent, and their restarts.

Every base method has the restart-engine signature ``run_x(oracle, x0, T)``
and emits one TraceRecord per iteration.  ``oracle_calls`` counts gradient
(or subgradient) evaluations made by the method itself; certificate checks
done between phases are not counted.
"""

from __future__ import annotations

import math

import numpy as np

from .oracles import NonsmoothOracle, RegularizedOracle, SmoothOracle
from .schedule import (
    NonFiniteError,
    RestartSchedule,
    TraceRecord,
    halving_schedule,
    phase_count,
    phase_length,
    run_restart_scheme,
)

__all__ = [
    "gd_step",
    "run_gd",
    "run_agd",
    "run_subgradient",
    "certified_gap",
    "restarted_minimize",
    "regularized_reduction",
]


def _finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"non-finite {what}")
    return arr


def _record(oracle, t, value, calls):
    gap = value - oracle.f_star if oracle.f_star is not None else None
    if not math.isfinite(value):
        raise NonFiniteError(f"non-finite objective value at iteration {t}")
    return TraceRecord(0, t, value, gap, calls)


def gd_step(oracle: SmoothOracle, x):
    """One gradient step with the fixed step size 1/L."""
    x = np.asarray(x, dtype=float)
    grad = _finite(oracle.gradient(x), "gradient")
    return x - grad / oracle.L


def run_gd(oracle: SmoothOracle, x0, T: int):
    if T < 0:
        raise ValueError("T must be nonnegative")
    x = np.asarray(x0, dtype=float)
    records = []
    for t in range(1, T + 1):
        x = gd_step(oracle, x)
        records.append(_record(oracle, t, oracle.value(x), t))
    return x, records


def run_agd(oracle: SmoothOracle, x0, T: int):
    """Nesterov's accelerated gradient method.

    x_{t+1} = y_t - grad f(y_t) / L
    y_{t+1} = x_{t+1} + t / (t + 3) (x_{t+1} - x_t),   y_0 = x_0.

    The first step is a plain gradient step.  This form satisfies
    f(x_t) - f* <= 2 L |x_0 - x*|^2 / (t + 1)^2.
    """
    if T < 0:
        raise ValueError("T must be nonnegative")
    x = np.asarray(x0, dtype=float)
    y = x
    records = []
    for t in range(T):
        x_next = y - _finite(oracle.gradient(y), "gradient") / oracle.L
        y = x_next + (t / (t + 3)) * (x_next - x)
        x = x_next
        records.append(_record(oracle, t + 1, oracle.value(x), t + 1))
    return x, records


def run_subgradient(oracle: NonsmoothOracle, x0, T: int, radius: float):
    """Fixed-horizon subgradient descent returning the best iterate.

    Step size radius / (G sqrt(T)); if ``radius`` bounds |x0 - x*|, the best
    value found satisfies f - f* <= G radius / sqrt(T).  Trace values are
    the best value seen so far.
    """
    if T < 0:
        raise ValueError("T must be nonnegative")
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    x = np.asarray(x0, dtype=float)
    best_x, best_f = x, oracle.value(x)
    if T == 0:
        return best_x, []
    step = radius / (oracle.G * math.sqrt(T))
    records = []
    for t in range(1, T + 1):
        x = x - step * _finite(oracle.subgradient(x), "subgradient")
        fx = oracle.value(x)
        if fx < best_f:
            best_x, best_f = x, fx
        records.append(_record(oracle, t, best_f, t))
    return best_x, records


def certified_gap(oracle, x, mode="auto") -> float:
    """Upper bound on f(x) - f*.

    ``minimizer`` uses the known optimal value; ``gradient`` uses
    |grad f(x)|^2 / (2 mu), valid for mu-strongly convex smooth f; ``auto``
    picks the first one available.
    """
    if mode == "auto":
        mode = "minimizer" if oracle.has_minimizer else "gradient"
    if mode == "minimizer":
        if not oracle.has_minimizer:
            raise ValueError("oracle has no known minimizer")
        return max(oracle.value(x) - oracle.f_star, 0.0)
    if mode == "gradient":
        if not isinstance(oracle, SmoothOracle) or not oracle.mu > 0:
            raise ValueError("gradient certificate needs a smooth, strongly convex oracle")
        g = oracle.gradient(x)
        return float(np.dot(g, g)) / (2 * oracle.mu)
    raise ValueError(f"unknown certificate mode {mode!r}")


def restarted_minimize(
    variant: str,
    oracle,
    x0,
    eps: float,
    *,
    gap0: float | None = None,
    c: float = 2.0,
    certificate: str = "auto",
    max_extra_phases: int = 64,
):
    """Restarted GD / AGD / subgradient descent down to a certified gap ``eps``.

    The schedule comes from :func:`halving_schedule`.  After each phase the
    gap certificate is checked:

    * once it is at most ``eps`` the run stops;
    * for ``agd``, a phase that fails to halve the certificate doubles ``c``
      for all later phases;
    * if all scheduled phases ran and the certificate is still above ``eps``,
      up to ``max_extra_phases`` further phases are appended.

    Returns ``(x, trace)``.
    """
    if variant not in ("gd", "agd", "subgrad"):
        raise ValueError(f"unknown variant {variant!r}")
    if not oracle.mu > 0:
        raise ValueError("restarts need mu > 0; use regularized_reduction for mu = 0")
    x0 = np.asarray(x0, dtype=float)

    def cert(x):
        return certified_gap(oracle, x, certificate)

    if gap0 is None:
        gap0 = cert(x0)
    K = phase_count(gap0, eps)
    state = {"c": float(c), "extra": 0}

    if variant == "gd":
        base = run_gd
    elif variant == "agd":
        base = run_agd
    else:
        base = run_subgradient

    def plan(first, count):
        # phases first .. first + count - 1
        if variant == "subgrad":
            last = gap0 * 2.0 ** -(first + count - 1)
            return halving_schedule(
                "subgrad", mu=oracle.mu, G=oracle.G, gap0=gap0, eps=last, first_phase=first
            )
        T = phase_length(variant, mu=oracle.mu, L=oracle.L, c=state["c"])
        return RestartSchedule.constant(T, count)

    def after_phase(phase, x_start, x_end, records):
        end = cert(x_end)
        if end <= eps:
            return RestartSchedule(())
        if variant == "agd" and end > 0.5 * cert(x_start):
            state["c"] *= 2
        remaining = K - phase
        if remaining <= 0:
            if state["extra"] >= max_extra_phases:
                return RestartSchedule(())
            state["extra"] += 1
            remaining = 1
        return plan(phase + 1, remaining)

    if K == 0:
        return x0, []
    return run_restart_scheme(base, oracle, x0, plan(1, K), after_phase=after_phase)


def regularized_reduction(oracle: SmoothOracle, x0, D: float, eps: float, *, c: float = 2.0):
    """Minimize a merely convex smooth f to accuracy ``eps`` via restarted AGD.

    Builds f_eps(x) = f(x) + eps / (2 D^2) |x - x0|^2, which is
    (L + eps/D^2)-smooth and (eps/D^2)-strongly convex, and solves it to
    eps/2 with gradient-certified restarted AGD.  If |x0 - x*| <= D for some
    minimizer x* of f, then f(x) - f(x*) <= f_eps(x) - min f_eps + eps/2,
    so the returned point is eps-optimal for f.

    Returns ``(x, trace)``; trace values are f_eps values.
    """
    if not D > 0:
        raise ValueError(f"D must be positive, got {D}")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    x0 = np.asarray(x0, dtype=float)
    f_eps = RegularizedOracle(oracle, x0, eps / D**2)
    return restarted_minimize("agd", f_eps, x0, eps / 2, c=c, certificate="gradient")
