"""Monotone submodular maximization under a cardinality constraint.

Set functions are accessed only through :class:`SetFunctionOracle`, which
counts every evaluation.  Ground-set elements are the indices 0..n-1; the
oracle may carry display labels for them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .schedule import TraceRecord

__all__ = [
    "SetFunctionOracle",
    "Selection",
    "CoverageInstance",
    "modular_oracle",
    "random_coverage",
    "marginal_gain",
    "greedy",
    "threshold_greedy",
    "threshold_eval_bound",
    "brute_force_submax",
    "verify_submodular",
    "read_coverage",
    "write_coverage",
]


class SetFunctionOracle:
    """Value oracle for g: 2^V -> R with an evaluation counter.

    Not thread-safe: the counter is mutated on every call, so concurrent
    solves need separate oracle instances (see :meth:`fresh`).
    """

    def __init__(self, n, func, labels=None):
        if n < 1:
            raise ValueError("ground set must be nonempty")
        labels = tuple(range(n)) if labels is None else tuple(labels)
        if len(labels) != n or len(set(labels)) != n:
            raise ValueError("labels must be n distinct identifiers")
        self.n = int(n)
        self.labels = labels
        self._func = func
        self.calls = 0

    def evaluate(self, S) -> float:
        self.calls += 1
        return float(self._func(frozenset(S)))

    __call__ = evaluate

    def fresh(self) -> "SetFunctionOracle":
        """Same function, counter reset to zero."""
        return SetFunctionOracle(self.n, self._func, self.labels)


@dataclass
class Selection:
    chosen: tuple
    value: float
    evals_used: int
    trace: list = field(default_factory=list, repr=False)


@dataclass(frozen=True, eq=False)
class CoverageInstance:
    """g(S) = total weight of universe items covered by the subsets in S."""

    subsets: tuple
    weights: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or np.any(w < 0):
            raise ValueError("weights must be a vector of nonnegative numbers")
        subsets = tuple(frozenset(int(i) for i in s) for s in self.subsets)
        if not subsets:
            raise ValueError("need at least one ground element")
        for s in subsets:
            if s and (min(s) < 0 or max(s) >= w.size):
                raise ValueError("subset refers to an item outside the universe")
        cover = np.zeros((len(subsets), w.size), dtype=bool)
        for i, s in enumerate(subsets):
            cover[i, list(s)] = True
        object.__setattr__(self, "subsets", subsets)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "_cover", cover)

    @property
    def n(self) -> int:
        return len(self.subsets)

    @property
    def u(self) -> int:
        return self.weights.size

    def value(self, S) -> float:
        S = list(S)
        if not S:
            return 0.0
        return float(self.weights[self._cover[S].any(axis=0)].sum())

    def oracle(self) -> SetFunctionOracle:
        return SetFunctionOracle(self.n, self.value, self.labels)


def modular_oracle(weights) -> SetFunctionOracle:
    """g(S) = sum of nonnegative weights over S."""
    w = np.asarray(weights, dtype=float)
    return SetFunctionOracle(w.size, lambda S: float(sum(w[i] for i in S)))


def random_coverage(n, u, seed, density=0.2) -> CoverageInstance:
    """Each element covers each of ``u`` items with probability ``density``;
    item weights uniform on [0, 1)."""
    rng = np.random.default_rng(seed)
    cover = rng.random((n, u)) < density
    weights = rng.random(u)
    return CoverageInstance(tuple(np.flatnonzero(row) for row in cover), weights)


def marginal_gain(oracle: SetFunctionOracle, S, e, base_value=None) -> float:
    """g(S + e) - g(S); pass ``base_value = g(S)`` to save one evaluation."""
    S = frozenset(S)
    if e in S:
        raise ValueError(f"element {e} is already in S")
    if base_value is None:
        base_value = oracle.evaluate(S)
    return oracle.evaluate(S | {e}) - base_value


def greedy(oracle: SetFunctionOracle, k: int) -> Selection:
    """Repeatedly add the element of largest marginal gain, k times.

    Ties go to the smallest index.  g of the current set is cached, so the
    run costs 1 + sum_{i<k} (n - i) <= 2 k n evaluations.
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    start = oracle.calls
    k = min(k, oracle.n)
    chosen = []
    current = frozenset()
    value = oracle.evaluate(current)
    trace = []
    for it in range(1, k + 1):
        best_e, best_val = None, -math.inf
        for e in range(oracle.n):
            if e in current:
                continue
            v = oracle.evaluate(current | {e})
            if v > best_val:
                best_e, best_val = e, v
        chosen.append(best_e)
        current = current | {best_e}
        value = best_val
        trace.append(TraceRecord(1, it, value, None, oracle.calls - start))
    return Selection(tuple(chosen), value, oracle.calls - start, trace)


def threshold_eval_bound(n: int, eps: float) -> int:
    """n (ceil(log_{1/(1-eps)}(n/eps)) + 2): evaluation ceiling of threshold greedy."""
    passes = math.ceil(math.log(n / eps) / -math.log1p(-eps))
    return n * (passes + 2)


def threshold_greedy(oracle: SetFunctionOracle, k: int, eps: float) -> Selection:
    """Add every element whose marginal gain clears a decreasing threshold.

    The threshold starts at the best singleton value Phi_0 and shrinks by a
    factor (1 - eps) per pass over the ground set; passes stop once it drops
    below (eps / n) Phi_0 or k elements are chosen.  Each accepted element
    has gain within a (1 - eps) factor of the best available one, giving a
    (1 - 1/e - eps) approximation with O((n / eps) log(n / eps)) evaluations.

    g(current set) is cached, so each threshold test costs one evaluation,
    and the singleton values computed for Phi_0 are reused while the current
    set is still empty.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    start = oracle.calls
    n = oracle.n
    singles = [oracle.evaluate({e}) for e in range(n)]

    def g_plus(current, e):
        if not current:
            return singles[e]
        return oracle.evaluate(current | {e})

    phi0 = max(singles)
    current = frozenset()
    chosen = []
    trace = []
    value = oracle.evaluate(current)
    if phi0 <= 0:
        return Selection((), value, oracle.calls - start, trace)
    phi = phi0
    floor = eps / n * phi0
    passes = 0
    while phi >= floor and len(chosen) < k:
        passes += 1
        for e in range(n):
            if len(chosen) >= k:
                break
            if e in current:
                continue
            v = g_plus(current, e)
            if v - value >= phi:
                current = current | {e}
                chosen.append(e)
                value = v
                trace.append(TraceRecord(passes, len(chosen), value, None, oracle.calls - start))
        phi *= 1 - eps
    return Selection(tuple(chosen), value, oracle.calls - start, trace)


def brute_force_submax(oracle: SetFunctionOracle, k: int) -> Selection:
    """Exact maximizer over all subsets of size <= k (n <= 20).

    Ties go to the lexicographically smallest sorted index tuple.
    """
    n = oracle.n
    if n > 20:
        raise ValueError(f"brute force limited to n <= 20, got {n}")
    if k < 0:
        raise ValueError("k must be nonnegative")
    start = oracle.calls
    best, best_val = (), oracle.evaluate(())
    for size in range(1, min(k, n) + 1):
        for combo in itertools.combinations(range(n), size):
            v = oracle.evaluate(combo)
            if v > best_val or (v == best_val and combo < best):
                best, best_val = combo, v
    return Selection(best, best_val, oracle.calls - start)


def _mask_set(mask, n):
    return frozenset(i for i in range(n) if mask >> i & 1)


def verify_submodular(oracle: SetFunctionOracle, n=None, *, samples=2000, seed=0, tol=1e-9) -> bool:
    """Check non-negativity, monotonicity and diminishing returns.

    For n <= 12 all 2^n values are tabulated and the local conditions
    g(A+e) >= g(A) and g_A(e) >= g_{A+f}(e) are checked for every A, e, f;
    these imply the general A subset B conditions.  Larger ground sets are
    checked on ``samples`` random triples A subset B, e not in B.
    """
    n = oracle.n if n is None else n
    if n <= 12:
        vals = np.array([oracle.evaluate(_mask_set(m, n)) for m in range(1 << n)])
        slack = tol * max(1.0, float(np.max(np.abs(vals))))
        if np.any(vals < -slack):
            return False
        masks = np.arange(1 << n)
        for e in range(n):
            be = 1 << e
            free = masks[(masks & be) == 0]
            if np.any(vals[free | be] < vals[free] - slack):
                return False
            for f in range(n):
                bf = 1 << f
                if f == e:
                    continue
                A = free[(free & bf) == 0]
                if np.any(vals[A | be] - vals[A] < vals[A | be | bf] - vals[A | bf] - slack):
                    return False
        return True

    rng = np.random.default_rng(seed)
    for _ in range(samples):
        e = int(rng.integers(n))
        others = [i for i in range(n) if i != e]
        in_B = rng.random(n - 1) < 0.5
        B = frozenset(np.asarray(others)[in_B].tolist())
        A = frozenset(i for i in B if rng.random() < 0.5)
        gA, gB = oracle.evaluate(A), oracle.evaluate(B)
        gAe, gBe = oracle.evaluate(A | {e}), oracle.evaluate(B | {e})
        slack = tol * max(1.0, abs(gBe))
        if min(gA, gB, gAe, gBe) < -slack or gA > gB + slack or gAe - gA < gBe - gB - slack:
            return False
    return True


def read_coverage(path) -> CoverageInstance:
    """Text format: ``n u`` header, n lines of covered item indices (a line
    may be empty), then one line of u weights."""
    lines = Path(path).read_text().splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError(f"{path}: header must be 'n u'")
    n, u = map(int, header)
    if len(lines) != n + 2:
        raise ValueError(f"{path}: expected {n} subset lines and one weight line")
    subsets = tuple(tuple(int(v) for v in ln.split()) for ln in lines[1 : n + 1])
    weights = np.array([float(v) for v in lines[n + 1].split()])
    if weights.size != u:
        raise ValueError(f"{path}: expected {u} weights, got {weights.size}")
    return CoverageInstance(subsets, weights)


def write_coverage(instance: CoverageInstance, path) -> None:
    rows = [f"{instance.n} {instance.u}"]
    rows += [" ".join(map(str, sorted(s))) for s in instance.subsets]
    rows.append(" ".join(repr(float(w)) for w in instance.weights))
    Path(path).write_text("\n".join(rows) + "\n")
