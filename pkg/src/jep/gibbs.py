"""Closed-form equilibrium of the memoryless process.

The equilibrium is the Gibbs measure ``Z^{-1} exp(-beta * sum(B))`` with
``beta = -log(alpha)``, and it is also the law of the noncolliding union of
``n`` independent geometric variables.  That second description gives an
exact sampler.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from .distributions import GeometricStream, _check_alpha
from .errors import DomainError
from .exact import TruncatedStateSpace
from .process import union_batch
from .sets import EMPTY, ParticleConfig, count_below, noncolliding_union


@dataclass(frozen=True)
class GibbsParams:
    """Parameters of a Gibbs equilibrium; ``alpha`` is canonical."""

    n: int
    alpha: float
    base: ParticleConfig = EMPTY

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("particle count must be positive")
        object.__setattr__(self, "alpha", _check_alpha(self.alpha))
        if not isinstance(self.base, ParticleConfig):
            object.__setattr__(self, "base", ParticleConfig(self.base))

    @classmethod
    def from_beta(cls, n: int, beta: float, base: Sequence[int] = ()) -> GibbsParams:
        return cls(n, math.exp(-_check_beta(beta)), ParticleConfig(base))

    @property
    def beta(self) -> float:
        return -math.log(self.alpha)

    def pmf(self, B: Sequence[int]) -> float:
        return gibbs_super_pmf(self.base, self.n, self.beta, B)

    def sample(self, stream) -> ParticleConfig:
        return sample_gibbs(self.base, self.n, self.alpha, stream)


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not beta > 0.0 or not math.isfinite(beta):
        raise DomainError(f"beta must be a positive real, got {beta}")
    return beta


def log_partition_function(n: int, beta: float) -> float:
    beta = _check_beta(beta)
    if n < 1:
        raise DomainError("particle count must be positive")
    return sum(beta - math.log(math.expm1(beta * k)) for k in range(1, n + 1))


def partition_function(n: int, beta: float) -> float:
    """``prod_{k=1}^{n} e^beta / (e^{beta k} - 1)``."""
    return math.exp(log_partition_function(n, beta))


def gibbs_pmf(n: int, beta: float, B: Sequence[int]) -> float:
    if len(B) != n:
        raise DomainError(f"configuration {ParticleConfig(B)!r} does not have {n} elements")
    B = B if isinstance(B, ParticleConfig) else ParticleConfig(B)
    return math.exp(-beta * sum(B) - log_partition_function(n, beta))


def gibbs_super_pmf(A: Sequence[int], n: int, beta: float, B: Sequence[int]) -> float:
    """Law of ``U(A, xi_1, ..., xi_n)`` at ``B``.

    The energy counts, for each added site, only the free sites of ``A``
    below it.
    """
    A = A if isinstance(A, ParticleConfig) else ParticleConfig(A)
    B = B if isinstance(B, ParticleConfig) else ParticleConfig(B)
    added = sorted(set(B) - set(A))
    if not set(A) <= set(B) or len(added) != n:
        raise DomainError(f"{B!r} is not a superset of {A!r} with {n} extra elements")
    energy = sum(count_below(A, x) for x in added)
    return math.exp(-beta * energy - log_partition_function(n, beta))


def gibbs_vector(space: TruncatedStateSpace, alpha: float) -> np.ndarray:
    """Gibbs probabilities of every state in ``space`` (not renormalised)."""
    alpha = _check_alpha(alpha)
    beta = -math.log(alpha)
    logz = log_partition_function(space.n, beta)
    heights = np.array([sum(s) for s in space.states], dtype=float)
    return np.exp(-beta * heights - logz)


def sample_gibbs(A: Sequence[int], n: int, alpha: float, stream) -> ParticleConfig:
    """``U(A, xi_1, ..., xi_n)`` with fresh geometric draws."""
    alpha = _check_alpha(alpha)
    if n < 1:
        raise DomainError("particle count must be positive")
    return noncolliding_union(A, [stream.geometric(alpha) for _ in range(n)])


def sample_gibbs_batch(A: Sequence[int], n: int, alpha: float, size: int, stream: GeometricStream) -> np.ndarray:
    """``size`` draws of :func:`sample_gibbs` as rows of an int array.

    Reads the stream in the same order as repeated scalar calls, so the
    rows equal ``[sample_gibbs(A, n, alpha, stream) for _ in range(size)]``.
    """
    alpha = _check_alpha(alpha)
    if n < 1:
        raise DomainError("particle count must be positive")
    xs = stream.geometrics(alpha, (size, n))
    base = np.tile(np.asarray(ParticleConfig(A), dtype=np.int64), (size, 1))
    return union_batch(base, xs)


@dataclass(frozen=True)
class EquilibriumStats:
    n: int
    alpha: float
    mean_height: float
    ground_state_prob: float
    zero_occupied_prob: float

    def min_tail(self, m: int) -> float:
        """``P(min G >= m) = alpha**(n m)``."""
        if m < 0:
            raise DomainError("m must be non-negative")
        return self.alpha ** (self.n * m)

    def to_json(self) -> str:
        rec = {
            "n": self.n,
            "alpha": self.alpha,
            "beta": -math.log(self.alpha),
            "mean_height": self.mean_height,
            "ground_state_prob": self.ground_state_prob,
            "zero_occupied_prob": self.zero_occupied_prob,
            "min_tail_rate": self.alpha ** self.n,
        }
        return json.dumps(rec)


def equilibrium_stats(n: int, alpha: float) -> EquilibriumStats:
    alpha = _check_alpha(alpha)
    if n < 1:
        raise DomainError("particle count must be positive")
    mean = sum(k / (1.0 - alpha**k) for k in range(1, n + 1)) / n - 1.0
    ground = alpha ** (n * (n + 1) / 2) * math.prod((1.0 - alpha**k) / alpha**k for k in range(1, n + 1))
    return EquilibriumStats(n, alpha, mean, ground, 1.0 - alpha**n)


def union_law_enumerated(A: Sequence[int], n: int, alpha: float, cutoff: int = 25) -> dict[ParticleConfig, float]:
    """Law of ``U(A, xi_1, ..., xi_n)`` restricted to ``xi_i <= cutoff``.

    Sums the probability of every outcome tuple; the tuples are processed
    one coordinate at a time so shared prefixes are pushed through the
    union only once.  Total missing mass is at most ``n * alpha**(cutoff+1)``.
    """
    alpha = _check_alpha(alpha)
    weights = [(1.0 - alpha) * alpha**k for k in range(cutoff + 1)]
    law: dict[ParticleConfig, float] = {ParticleConfig(A): 1.0}
    for _ in range(n):
        nxt: dict[ParticleConfig, float] = defaultdict(float)
        for S, p in law.items():
            for x, w in enumerate(weights):
                nxt[noncolliding_union(S, [x])] += p * w
        law = dict(nxt)
    return law


def push_forward(law: dict, fn: Callable) -> dict:
    """Image of a finite law under ``fn``; outcomes mapped to None are dropped."""
    out: dict = defaultdict(float)
    for s, p in law.items():
        image = fn(s)
        if image is not None:
            out[image] += p
    return dict(out)
