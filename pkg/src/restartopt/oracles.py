"""First-order oracles with known constants, plus sanity checks on them."""

from __future__ import annotations

import copy
import math

import numpy as np

__all__ = [
    "SmoothOracle",
    "FunctionOracle",
    "DiagonalQuadratic",
    "LogSumExp",
    "RegularizedOracle",
    "NonsmoothOracle",
    "L1PlusQuadratic",
    "MaxAffine",
    "finite_difference_check",
    "inequality_slacks",
]


class SmoothOracle:
    """Convex, L-smooth function with value and gradient queries.

    ``mu`` is the strong convexity constant (0 for merely convex).  When the
    minimizer is known, ``x_star`` and ``f_star`` are set; otherwise both are
    ``None``.  Oracles hold no mutable state, so one instance can be shared
    by concurrent solves.
    """

    def __init__(self, dim, L, mu=0.0, x_star=None, f_star=None):
        if dim < 1:
            raise ValueError("dim must be positive")
        if not L > 0:
            raise ValueError(f"L must be positive, got {L}")
        if mu < 0:
            raise ValueError(f"mu must be nonnegative, got {mu}")
        self.dim = int(dim)
        self.L = float(L)
        self.mu = float(mu)
        self.x_star = None if x_star is None else np.asarray(x_star, dtype=float)
        self.f_star = None if f_star is None else float(f_star)

    def value(self, x) -> float:
        raise NotImplementedError

    def gradient(self, x) -> np.ndarray:
        raise NotImplementedError

    @property
    def has_minimizer(self) -> bool:
        return self.f_star is not None

    def with_constants(self, L=None, mu=None, keep_minimizer=True):
        """Copy with different declared constants (the function is unchanged).

        Used to feed a solver mis-specified or hidden problem knowledge.
        """
        other = copy.copy(self)
        if L is not None:
            other.L = float(L)
        if mu is not None:
            other.mu = float(mu)
        if not keep_minimizer:
            other.x_star = None
            other.f_star = None
        return other

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, L={self.L:g}, mu={self.mu:g})"


class FunctionOracle(SmoothOracle):
    """Wraps plain ``value`` / ``gradient`` callables."""

    def __init__(self, value, gradient, dim, L, mu=0.0, x_star=None, f_star=None):
        super().__init__(dim, L, mu, x_star, f_star)
        self._value = value
        self._gradient = gradient

    def value(self, x):
        return float(self._value(np.asarray(x, dtype=float)))

    def gradient(self, x):
        return np.asarray(self._gradient(np.asarray(x, dtype=float)), dtype=float)


class DiagonalQuadratic(SmoothOracle):
    """f(x) = 1/2 sum_i lambda_i x_i^2 with lambda_i >= 0.

    L = max lambda, mu = min lambda; the origin is a minimizer with value 0.
    """

    def __init__(self, eigenvalues):
        lam = np.asarray(eigenvalues, dtype=float)
        if lam.ndim != 1 or lam.size == 0 or np.any(lam < 0):
            raise ValueError("eigenvalues must be a nonempty vector of nonnegative numbers")
        super().__init__(lam.size, lam.max(), lam.min(), np.zeros(lam.size), 0.0)
        self.eigenvalues = lam

    @classmethod
    def with_condition(cls, L, mu, n=20):
        """Eigenvalues evenly spaced over [mu, L]."""
        return cls(np.linspace(mu, L, n))

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * float(np.dot(self.eigenvalues * x, x))

    def gradient(self, x):
        return self.eigenvalues * np.asarray(x, dtype=float)


class LogSumExp(SmoothOracle):
    """f(x) = log sum_i exp(a_i . x + b_i).

    The Hessian is A^T (diag p - p p^T) A with p the softmax weights, so
    L = max_i |a_i|^2 is a valid smoothness constant.  mu is 0.
    """

    def __init__(self, A, b=None, x_star=None, f_star=None):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.zeros(A.shape[0]) if b is None else np.asarray(b, dtype=float)
        L = float(np.max(np.sum(A**2, axis=1)))
        super().__init__(A.shape[1], L, 0.0, x_star, f_star)
        self.A = A
        self.b = b

    @classmethod
    def log_cosh(cls):
        """log(e^x + e^-x), minimized at 0 with value log 2."""
        return cls([[1.0], [-1.0]], x_star=[0.0], f_star=math.log(2.0))

    def _logits(self, x):
        return self.A @ np.asarray(x, dtype=float) + self.b

    def value(self, x):
        z = self._logits(x)
        m = z.max()
        return float(m + np.log(np.sum(np.exp(z - m))))

    def gradient(self, x):
        z = self._logits(x)
        p = np.exp(z - z.max())
        p /= p.sum()
        return self.A.T @ p


class RegularizedOracle(SmoothOracle):
    """f(x) + (weight / 2) |x - center|^2.

    Adds ``weight`` to both L and mu of the base function.  The minimizer of
    the sum is not known in general.
    """

    def __init__(self, base: SmoothOracle, center, weight):
        if not weight > 0:
            raise ValueError(f"weight must be positive, got {weight}")
        super().__init__(base.dim, base.L + weight, base.mu + weight)
        self.base = base
        self.center = np.asarray(center, dtype=float)
        self.weight = float(weight)

    def value(self, x):
        d = np.asarray(x, dtype=float) - self.center
        return self.base.value(x) + 0.5 * self.weight * float(np.dot(d, d))

    def gradient(self, x):
        return self.base.gradient(x) + self.weight * (np.asarray(x, dtype=float) - self.center)


class NonsmoothOracle:
    """Convex function with a subgradient oracle.

    ``G`` bounds the subgradient norm over the working region the solver is
    expected to stay in.
    """

    def __init__(self, dim, G, mu=0.0, x_star=None, f_star=None):
        if not G > 0:
            raise ValueError(f"G must be positive, got {G}")
        if mu < 0:
            raise ValueError(f"mu must be nonnegative, got {mu}")
        self.dim = int(dim)
        self.G = float(G)
        self.mu = float(mu)
        self.x_star = None if x_star is None else np.asarray(x_star, dtype=float)
        self.f_star = None if f_star is None else float(f_star)

    def value(self, x) -> float:
        raise NotImplementedError

    def subgradient(self, x) -> np.ndarray:
        raise NotImplementedError

    @property
    def has_minimizer(self) -> bool:
        return self.f_star is not None

    def with_constants(self, G=None, mu=None, keep_minimizer=True):
        other = copy.copy(self)
        if G is not None:
            other.G = float(G)
        if mu is not None:
            other.mu = float(mu)
        if not keep_minimizer:
            other.x_star = None
            other.f_star = None
        return other

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, G={self.G:g}, mu={self.mu:g})"


class L1PlusQuadratic(NonsmoothOracle):
    """f(x) = |x|_1 + (mu/2) |x|^2, minimized at the origin.

    On the box |x_i| <= radius the subgradients sign(x) + mu x have norm at
    most sqrt(dim) (1 + mu radius), which is the default ``G``.
    """

    def __init__(self, dim=1, mu=1.0, radius=1.0, G=None):
        if G is None:
            G = math.sqrt(dim) * (1.0 + mu * radius)
        super().__init__(dim, G, mu, np.zeros(dim), 0.0)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return float(np.sum(np.abs(x)) + 0.5 * self.mu * np.dot(x, x))

    def subgradient(self, x):
        x = np.asarray(x, dtype=float)
        return np.sign(x) + self.mu * x


class MaxAffine(NonsmoothOracle):
    """f(x) = max_i (a_i . x + b_i); the active row is a subgradient."""

    def __init__(self, A, b=None, x_star=None, f_star=None):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.zeros(A.shape[0]) if b is None else np.asarray(b, dtype=float)
        G = float(np.max(np.linalg.norm(A, axis=1)))
        super().__init__(A.shape[1], G, 0.0, x_star, f_star)
        self.A = A
        self.b = b

    def value(self, x):
        return float(np.max(self.A @ np.asarray(x, dtype=float) + self.b))

    def subgradient(self, x):
        i = int(np.argmax(self.A @ np.asarray(x, dtype=float) + self.b))
        return self.A[i].copy()


def finite_difference_check(oracle: SmoothOracle, x, h: float = 1e-5) -> float:
    """Largest componentwise gap between the gradient and central differences."""
    x = np.asarray(x, dtype=float)
    grad = oracle.gradient(x)
    worst = 0.0
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        fd = (oracle.value(x + e) - oracle.value(x - e)) / (2 * h)
        worst = max(worst, abs(fd - grad[i]))
    return worst


def inequality_slacks(oracle: SmoothOracle, rng, n_pairs=200, scale=1.0):
    """Smallest slack of the first-order inequalities over random point pairs.

    Keys: ``convexity``, ``strong_convexity``, ``smoothness`` and, when the
    minimizer is known, ``primal_distance`` (f(y) - f* >= mu/2 |y - x*|^2).
    Nonnegative slack means the inequality held on every sampled pair.
    """
    slacks = {"convexity": np.inf, "strong_convexity": np.inf, "smoothness": np.inf}
    if oracle.has_minimizer and oracle.x_star is not None:
        slacks["primal_distance"] = np.inf
    for _ in range(n_pairs):
        x = scale * rng.standard_normal(oracle.dim)
        y = scale * rng.standard_normal(oracle.dim)
        fx, fy, gx = oracle.value(x), oracle.value(y), oracle.gradient(x)
        lin = float(np.dot(gx, y - x))
        sq = float(np.dot(y - x, y - x))
        slacks["convexity"] = min(slacks["convexity"], fy - fx - lin)
        slacks["strong_convexity"] = min(
            slacks["strong_convexity"], fy - fx - lin - 0.5 * oracle.mu * sq
        )
        slacks["smoothness"] = min(slacks["smoothness"], lin + 0.5 * oracle.L * sq - (fy - fx))
        if "primal_distance" in slacks:
            d = y - oracle.x_star
            slacks["primal_distance"] = min(
                slacks["primal_distance"],
                fy - oracle.f_star - 0.5 * oracle.mu * float(np.dot(d, d)),
            )
    return slacks
