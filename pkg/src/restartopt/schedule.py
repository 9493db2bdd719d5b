"""Generic restart engine.

A restart scheme runs a base algorithm for ``T_1`` iterations, then runs it
again for ``T_2`` iterations starting from the point the first run returned,
and so on.  The base algorithm is any callable

    algo(problem, x, T, **phase_params) -> (x_new, records)

where ``records`` holds exactly one :class:`TraceRecord` per iteration,
numbered locally (``global_iter`` 1..T, ``oracle_calls`` counted from 0 at the
phase start).  The engine renumbers them into one global trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any, Callable, Mapping, Optional

import numpy as np

__all__ = [
    "TraceRecord",
    "RestartSchedule",
    "NonFiniteError",
    "PhaseFailure",
    "BaseAlgorithm",
    "phase_count",
    "phase_length",
    "halving_schedule",
    "iteration_bound",
    "run_restart_scheme",
]


@dataclass(frozen=True)
class TraceRecord:
    phase: int
    global_iter: int
    objective_value: float
    gap_certificate: Optional[float]
    oracle_calls: int


class NonFiniteError(ArithmeticError):
    """Raised by a base algorithm when it meets a NaN or infinite quantity."""


class PhaseFailure(RuntimeError):
    """A base algorithm failed inside a restart phase."""

    def __init__(self, phase: int, message: str):
        super().__init__(f"phase {phase}: {message}")
        self.phase = phase


BaseAlgorithm = Callable[..., "tuple[Any, list[TraceRecord]]"]


@dataclass(frozen=True)
class RestartSchedule:
    """Per-phase iteration budgets, optionally with per-phase keyword args.

    ``phase_params`` is either empty or has one mapping per phase; the
    mappings are forwarded to the base algorithm (e.g. a subgradient radius
    that shrinks from phase to phase).
    """

    per_phase_iters: tuple[int, ...]
    phase_params: tuple[Mapping[str, Any], ...] = ()

    def __post_init__(self):
        iters = tuple(int(t) for t in self.per_phase_iters)
        if any(t < 1 for t in iters):
            raise ValueError(f"every phase needs at least one iteration, got {iters}")
        params = tuple(dict(p) for p in self.phase_params)
        if params and len(params) != len(iters):
            raise ValueError("phase_params must be empty or match per_phase_iters")
        object.__setattr__(self, "per_phase_iters", iters)
        object.__setattr__(self, "phase_params", params)

    @classmethod
    def constant(cls, iters: int, phases: int) -> "RestartSchedule":
        return cls((iters,) * phases)

    @property
    def phase_count(self) -> int:
        return len(self.per_phase_iters)

    @property
    def total_iters(self) -> int:
        return sum(self.per_phase_iters)

    def phases(self):
        """Iterate over ``(T, params)`` pairs."""
        params = self.phase_params or ({},) * self.phase_count
        return zip(self.per_phase_iters, params)


def phase_count(gap0: float, eps: float) -> int:
    """Number of halvings that take a gap of ``gap0`` below ``eps``.

    Returns ``ceil(log2(gap0 / eps))``, or 0 when ``gap0 <= eps``.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if not gap0 >= 0:
        raise ValueError(f"gap0 must be nonnegative, got {gap0}")
    if gap0 <= eps:
        return 0
    return math.ceil(math.log2(gap0 / eps))


def _positive(name, value):
    if value is None:
        raise ValueError(f"{name} is required for this variant")
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return float(value)


def phase_length(
    variant: str,
    *,
    mu: float,
    L: float | None = None,
    G: float | None = None,
    c: float = 2.0,
    gap: float | None = None,
) -> int:
    """Iterations that halve a primal gap of size ``gap`` (``gap`` is only
    needed for ``subgrad``)."""
    mu = _positive("mu", mu)
    if variant == "gd":
        return math.ceil(4 * _positive("L", L) / mu)
    if variant == "agd":
        return math.ceil(math.sqrt(4 * _positive("c", c) * _positive("L", L) / mu))
    if variant == "subgrad":
        return math.ceil(4 * _positive("G", G) ** 2 / (mu * _positive("gap", gap)))
    raise ValueError(f"unknown variant {variant!r}; expected gd, agd or subgrad")


def halving_schedule(
    variant: str,
    *,
    mu: float,
    gap0: float,
    eps: float,
    L: float | None = None,
    G: float | None = None,
    c: float = 2.0,
    first_phase: int = 1,
) -> RestartSchedule:
    """Schedule whose every phase halves the primal gap in theory.

    ``gd``      T = ceil(4 L / mu) in every phase.
    ``agd``     T = ceil(sqrt(4 c L / mu)) in every phase.
    ``subgrad`` T_l = ceil(4 G^2 / (mu gap_l)) with gap_l = gap0 / 2^(l-1);
                each phase also carries ``radius = sqrt(2 gap_l / mu)``, a
                bound on the distance to the minimizer at the phase start.

    Phases ``first_phase .. phase_count(gap0, eps)`` are returned, so the
    default is the full schedule.
    """
    K = phase_count(gap0, eps)
    phases = range(first_phase - 1, K)
    if variant != "subgrad":
        T = phase_length(variant, mu=mu, L=L, G=G, c=c)
        return RestartSchedule.constant(T, len(phases))
    gaps = [gap0 * 2.0 ** (-l) for l in phases]
    return RestartSchedule(
        tuple(phase_length("subgrad", mu=mu, G=G, gap=g) for g in gaps),
        tuple({"radius": math.sqrt(2 * g / mu)} for g in gaps),
    )


def iteration_bound(
    variant: str,
    *,
    mu: float,
    gap0: float,
    eps: float,
    L: float | None = None,
    G: float | None = None,
    c: float = 2.0,
) -> float:
    """Closed-form iteration ceiling of the restarted method.

    gd: ceil(4L/mu) K; agd: ceil(sqrt(4cL/mu)) K; subgrad: 8 G^2 / (eps mu).
    """
    if variant == "subgrad":
        return 8 * _positive("G", G) ** 2 / (_positive("eps", eps) * _positive("mu", mu))
    sched = halving_schedule(variant, mu=mu, gap0=gap0, eps=eps, L=L, G=G, c=c)
    return float(sched.total_iters)


def run_restart_scheme(
    algo: BaseAlgorithm,
    problem,
    x0,
    schedule: RestartSchedule,
    *,
    after_phase: Callable[..., Optional[RestartSchedule]] | None = None,
):
    """Run ``algo`` phase by phase, chaining each phase's output into the next.

    Parameters
    ----------
    algo : callable
        Base algorithm ``algo(problem, x, T, **params) -> (x, records)``.
    problem : object
        Passed through to ``algo`` untouched.
    x0 : point
        Start of phase 1.
    schedule : RestartSchedule
    after_phase : callable, optional
        ``after_phase(phase, x_start, x_end, records)`` is called after every
        phase.  Returning a schedule replaces all phases not yet run (an empty
        schedule stops the scheme); returning ``None`` keeps the current plan.

    Returns
    -------
    x : point
        Output of the last phase, or ``x0`` if no phase ran.
    trace : list of TraceRecord
        Records of all phases with global numbering.
    """
    plan = list(schedule.phases())
    x = x0
    trace: list[TraceRecord] = []
    phase = 0
    iters_done = 0
    calls_done = 0
    while plan:
        T, params = plan.pop(0)
        phase += 1
        try:
            x_new, records = algo(problem, x, T, **params)
        except ArithmeticError as exc:
            raise PhaseFailure(phase, f"{type(exc).__name__}: {exc}") from exc
        if not np.all(np.isfinite(np.asarray(x_new, dtype=float))):
            raise PhaseFailure(phase, "base algorithm returned a non-finite point")
        shifted = [
            replace(
                r,
                phase=phase,
                global_iter=iters_done + r.global_iter,
                oracle_calls=calls_done + r.oracle_calls,
            )
            for r in records
        ]
        trace.extend(shifted)
        iters_done += T
        if shifted:
            calls_done = shifted[-1].oracle_calls
        if after_phase is not None:
            new_plan = after_phase(phase, x, x_new, shifted)
            if new_plan is not None:
                plan = list(new_plan.phases())
        x = x_new
    return x, trace
