"""Augmentation over explicit 0/1 point sets, with bit and geometric scaling.

Problems are max { c x : x in X } for a finite X subset of {0,1}^n given as an
explicit list.  The improving oracle scans that list, which keeps every
oracle exact at desk scale.  Points are stored sorted lexicographically, so
"first index" and "lexicographically smallest" coincide everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .schedule import TraceRecord

__all__ = [
    "AugmentInstance",
    "LinearFunctional",
    "ImprovingOracle",
    "PhaseLog",
    "POLICIES",
    "augment",
    "scale_objective",
    "geo_objective",
    "bit_scaling",
    "geometric_scaling",
    "brute_force_opt",
    "make_cube_powers",
    "make_random_01_polytope",
    "read_instance",
    "write_instance",
    "bit_scaling_bound",
    "geometric_phase_bound",
]

POLICIES = ("max_improvement", "min_improvement", "lexicographic")


def _as_binary(x, n=None):
    x = np.asarray(x)
    if x.ndim != 1 or (n is not None and x.size != n):
        raise ValueError(f"expected a 0/1 vector of length {n}")
    if not np.all((x == 0) | (x == 1)):
        raise ValueError("entries must be 0 or 1")
    return x.astype(np.int64)


@dataclass(frozen=True, eq=False)
class AugmentInstance:
    """Feasible set (rows of ``points``) and integer objective ``c``."""

    points: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("feasible set must be a nonempty 2-d array of points")
        if not np.all((pts == 0) | (pts == 1)):
            raise ValueError("feasible points must be 0/1 vectors")
        c = np.asarray(self.c)
        if c.shape != (pts.shape[1],):
            raise ValueError(f"objective length {c.shape} does not match dimension {pts.shape[1]}")
        if not np.all(np.equal(np.mod(c, 1), 0)):
            raise ValueError("objective entries must be integers")
        # np.unique sorts rows lexicographically
        object.__setattr__(self, "points", np.unique(pts.astype(np.int64), axis=0))
        object.__setattr__(self, "c", c.astype(np.int64))
        object.__setattr__(self, "_keys", frozenset(map(bytes, self.points.astype(np.uint8))))

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def C(self) -> int:
        """max |c_i| + 1."""
        return int(np.max(np.abs(self.c))) + 1

    def contains(self, x) -> bool:
        return bytes(np.asarray(x).astype(np.uint8)) in self._keys

    def value(self, x) -> int:
        return int(np.asarray(x) @ self.c)


@dataclass(frozen=True, eq=False)
class LinearFunctional:
    """x -> weights . x + offset; also applies row-wise to a matrix of points."""

    weights: np.ndarray
    offset: float = 0.0

    def __call__(self, x):
        return np.asarray(x) @ self.weights + self.offset


def scale_objective(c, mu: int) -> np.ndarray:
    """Entrywise floor(c / mu) for a power-of-two ``mu >= 1``."""
    mu = int(mu)
    if mu < 1 or mu & (mu - 1):
        raise ValueError(f"mu must be a power of two >= 1, got {mu}")
    return np.floor_divide(np.asarray(c, dtype=np.int64), mu)


def geo_objective(c, mu: float, x_ref) -> LinearFunctional:
    """x -> c (x - x_ref) - mu |x - x_ref|_1, written as a linear functional.

    On 0/1 vectors |x - x_ref|_1 = sum_i x_i (1 - 2 x_ref_i) + sum_i x_ref_i.
    """
    c = np.asarray(c)
    x_ref = _as_binary(x_ref, c.size)
    weights = c - mu * (1 - 2 * x_ref)
    offset = -float(c @ x_ref) - mu * float(x_ref.sum())
    return LinearFunctional(weights, offset)


class ImprovingOracle:
    """Returns a feasible point that strictly improves a linear functional.

    ``max_improvement`` picks the largest improvement, ``min_improvement``
    the smallest positive one, ``lexicographic`` the first improving point in
    lexicographic order.  Ties always go to the lexicographically smallest
    point.  Returns ``None`` iff no improving point exists.
    """

    def __init__(self, instance: AugmentInstance, policy: str = "max_improvement"):
        if policy not in POLICIES:
            raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")
        self.instance = instance
        self.policy = policy

    def __call__(self, x, functional: LinearFunctional):
        gain = functional(self.instance.points) - functional(x)
        improving = gain > 0
        if not improving.any():
            return None
        if self.policy == "max_improvement":
            idx = int(np.argmax(np.where(improving, gain, -np.inf)))
        elif self.policy == "min_improvement":
            idx = int(np.argmin(np.where(improving, gain, np.inf)))
        else:
            idx = int(np.argmax(improving))
        return self.instance.points[idx].copy()


def _functional_for(objective, x_ref):
    if isinstance(objective, LinearFunctional):
        return objective
    if callable(objective):
        return objective(x_ref)
    return LinearFunctional(np.asarray(objective))


def augment(instance: AugmentInstance, oracle: ImprovingOracle, x0, objective, *, path=None):
    """Improve ``x0`` until no improving feasible point exists.

    ``objective`` is a weight vector, a :class:`LinearFunctional`, or a
    callable ``x_ref -> LinearFunctional`` for objectives that are measured
    relative to the current iterate (as in geometric scaling).  If ``path``
    is a list, every iterate (starting with ``x0``) is appended to it.

    Returns ``(x, steps)``; the oracle was called ``steps + 1`` times.
    """
    x = _as_binary(x0, instance.n)
    if not instance.contains(x):
        raise ValueError("starting point is not feasible")
    if path is not None:
        path.append(x.copy())
    steps = 0
    while True:
        nxt = oracle(x, _functional_for(objective, x))
        if nxt is None:
            return x, steps
        x = nxt
        steps += 1
        if path is not None:
            path.append(x.copy())


@dataclass
class PhaseLog:
    """Iterates of one scaling phase, for inspecting per-phase behaviour."""

    phase: int
    mu: float
    path: list = field(default_factory=list)

    @property
    def start(self):
        return self.path[0]

    @property
    def end(self):
        return self.path[-1]

    @property
    def steps(self) -> int:
        return len(self.path) - 1


def _flip(instance: AugmentInstance, x0):
    """Flip coordinates with negative objective so that c >= 0."""
    neg = instance.c < 0
    flipped = AugmentInstance(np.where(neg, 1 - instance.points, instance.points), np.abs(instance.c))
    return flipped, np.where(neg, 1 - x0, x0), neg


def _scaling_run(instance, x0, policy, history, phases):
    """Shared driver: ``phases`` yields (mu, objective) pairs lazily."""
    x0 = _as_binary(x0, instance.n)
    if not instance.contains(x0):
        raise ValueError("starting point is not feasible")
    work, x, neg = _flip(instance, x0)
    oracle = ImprovingOracle(work, policy)
    trace = []
    total = 0
    calls = 0
    for phase, (mu, objective) in enumerate(phases(work), start=1):
        path = []
        x, steps = augment(work, oracle, x, objective, path=path)
        for p in path[1:]:
            total += 1
            calls += 1
            orig = np.where(neg, 1 - p, p)
            trace.append(TraceRecord(phase, total, float(instance.value(orig)), None, calls))
        calls += 1
        if history is not None:
            history.append(PhaseLog(phase, mu, [np.where(neg, 1 - p, p) for p in path]))
    return np.where(neg, 1 - x, x), total, trace


def bit_scaling(instance: AugmentInstance, x0, *, policy="max_improvement", history=None):
    """Optimize by augmenting under floor(c / mu) for mu = 2^(K-1), ..., 2, 1.

    K = ceil(log2 C) with C = max|c| + 1.  The first scaled objective is
    0/1-valued, and each later phase starts from a point optimal for the
    previous (twice coarser) objective, so every phase needs at most n
    augmentation steps and the total is at most n ceil(log2 C).

    Returns ``(x, total_steps, trace)``.  If ``history`` is a list, one
    :class:`PhaseLog` per phase is appended.
    """

    def phases(work):
        K = (work.C - 1).bit_length()  # ceil(log2 C)
        for j in range(K - 1, -1, -1):
            mu = 1 << j
            yield mu, scale_objective(work.c, mu)

    return _scaling_run(instance, x0, policy, history, phases)


def geometric_scaling(instance: AugmentInstance, x0, *, policy="max_improvement", history=None):
    """Optimize by augmenting under c(x - x~) - mu |x - x~|_1 with halving mu.

    mu starts at n C and halves after every phase; the last phase is the
    first one with mu n < 1, at which point c (x* - x~) <= mu n < 1 and
    integrality of c makes x~ optimal.  Each phase recovers at least a
    1/(2n) fraction of its initial primal gap per step, hence at most 2n
    steps per phase.

    Returns ``(x, total_steps, trace)``; ``history`` as in :func:`bit_scaling`.
    """

    def phases(work):
        n = work.n
        mu = float(n * work.C)
        while True:
            yield mu, (lambda x_ref, mu=mu: geo_objective(work.c, mu, x_ref))
            if mu * n < 1:
                return
            mu /= 2

    if not np.any(instance.c):
        x0 = _as_binary(x0, instance.n)
        if not instance.contains(x0):
            raise ValueError("starting point is not feasible")
        return x0, 0, []
    return _scaling_run(instance, x0, policy, history, phases)


def bit_scaling_bound(instance: AugmentInstance) -> int:
    """n ceil(log2 C)."""
    return instance.n * (instance.C - 1).bit_length()


def geometric_phase_bound(instance: AugmentInstance) -> int:
    """Number of geometric-scaling phases: floor(log2(n^2 C)) + 2."""
    return (instance.n**2 * instance.C).bit_length() + 1


def brute_force_opt(instance: AugmentInstance) -> np.ndarray:
    """Maximizer of c x over the feasible set; lexicographically smallest on ties."""
    if instance.m == 0:
        raise ValueError("empty feasible set")
    return instance.points[int(np.argmax(instance.points @ instance.c))].copy()


def _all_binary(n):
    codes = np.arange(2**n, dtype=np.int64)
    return (codes[:, None] >> np.arange(n - 1, -1, -1)) & 1


def make_cube_powers(n: int) -> AugmentInstance:
    """All of {0,1}^n with c = (1, 2, 4, ..., 2^(n-1))."""
    if not 1 <= n <= 25:
        raise ValueError(f"n must be in [1, 25] for explicit enumeration, got {n}")
    return AugmentInstance(_all_binary(n), 2 ** np.arange(n, dtype=np.int64))


def make_random_01_polytope(n: int, m: int, seed, max_entry: int = 100) -> AugmentInstance:
    """``m`` distinct uniform 0/1 points and c uniform on {0, ..., max_entry}."""
    if not 1 <= n <= 62:
        raise ValueError("n must be in [1, 62]")
    if not 1 <= m <= 2**n:
        raise ValueError(f"m must be in [1, 2^n], got {m}")
    rng = np.random.default_rng(seed)
    codes = rng.choice(2**n, size=m, replace=False)
    pts = (codes[:, None] >> np.arange(n - 1, -1, -1)) & 1
    c = rng.integers(0, max_entry + 1, size=n)
    return AugmentInstance(pts, c)


def read_instance(path) -> AugmentInstance:
    """Read the text format: ``n m`` header, m lines of bits, one line of c."""
    lines = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or len(lines[0]) != 2:
        raise ValueError(f"{path}: header must be 'n m'")
    n, m = map(int, lines[0])
    if len(lines) != m + 2:
        raise ValueError(f"{path}: expected {m} point lines and one objective line")
    pts = np.array([[int(v) for v in row] for row in lines[1 : m + 1]], dtype=np.int64).reshape(m, n)
    c = np.array([int(v) for v in lines[m + 1]], dtype=np.int64)
    return AugmentInstance(pts, c)


def write_instance(instance: AugmentInstance, path) -> None:
    rows = [f"{instance.n} {instance.m}"]
    rows += [" ".join(map(str, p)) for p in instance.points]
    rows.append(" ".join(map(str, instance.c)))
    Path(path).write_text("\n".join(rows) + "\n")
