"""Monte-Carlo bookkeeping and convergence profiling."""

from __future__ import annotations

import math
import os
from collections import Counter
from collections.abc import Callable, Iterable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distributions import GeometricStream, MemorylessFamily, _check_alpha
from .errors import DomainError, TruncationError
from .exact import TruncatedStateSpace, build_matrix, tv_distance
from .gibbs import gibbs_vector
from .process import simulate
from .sets import ParticleConfig


@dataclass
class EmpiricalSetDistribution:
    counts: Counter = field(default_factory=Counter)
    total: int = 0

    def add(self, state: Sequence[int], count: int = 1) -> None:
        key = state if isinstance(state, ParticleConfig) else ParticleConfig(state)
        self.counts[key] += count
        self.total += count

    def merge(self, other: EmpiricalSetDistribution) -> EmpiricalSetDistribution:
        return EmpiricalSetDistribution(self.counts + other.counts, self.total + other.total)

    def prob(self, state: Sequence[int]) -> float:
        key = state if isinstance(state, ParticleConfig) else ParticleConfig(state)
        return self.counts.get(key, 0) / self.total

    def probabilities(self) -> dict[ParticleConfig, float]:
        return {s: c / self.total for s, c in sorted(self.counts.items())}

    def expect(self, fn: Callable[[ParticleConfig], float]) -> float:
        return sum(c * fn(s) for s, c in self.counts.items()) / self.total

    def std_error(self, indicator: Callable[[ParticleConfig], bool]) -> tuple[float, float]:
        """Mean of an event indicator and its binomial standard error."""
        p = self.expect(lambda s: 1.0 if indicator(s) else 0.0)
        return p, math.sqrt(max(p * (1 - p), 1e-300) / self.total)


def empirical_distribution(samples: Iterable[Sequence[int]] | np.ndarray) -> EmpiricalSetDistribution:
    """Count configurations; accepts an iterable of sets or an int array of rows."""
    dist = EmpiricalSetDistribution()
    if isinstance(samples, np.ndarray):
        if samples.shape[0] == 0:
            raise DomainError("need at least one sample")
        rows, counts = np.unique(samples, axis=0, return_counts=True)
        for row, c in zip(rows, counts):
            dist.add(ParticleConfig._trusted(int(v) for v in row), int(c))
        return dist
    for s in samples:
        dist.add(s)
    if dist.total == 0:
        raise DomainError("need at least one sample")
    return dist


def empirical_tv(
    emp: EmpiricalSetDistribution, exact: Mapping[ParticleConfig, float] | Callable[[ParticleConfig], float]
) -> float:
    """TV between an empirical law and an exact one, over the union of supports.

    With a callable ``exact``, mass of the exact law off the empirical
    support is taken as ``1 - sum`` over the empirical support.
    """
    if callable(exact):
        on_support = {s: exact(s) for s in emp.counts}
        missing = max(0.0, 1.0 - sum(on_support.values()))
        return 0.5 * (sum(abs(emp.counts[s] / emp.total - p) for s, p in on_support.items()) + missing)
    keys = set(emp.counts) | set(exact)
    return 0.5 * sum(abs(emp.counts.get(s, 0) / emp.total - exact.get(s, 0.0)) for s in keys)


def empirical_tv_pair(a: EmpiricalSetDistribution, b: EmpiricalSetDistribution) -> float:
    keys = set(a.counts) | set(b.counts)
    return 0.5 * sum(abs(a.counts.get(s, 0) / a.total - b.counts.get(s, 0) / b.total) for s in keys)


def convergence_profile(
    A: Sequence[int], alpha: float, T: int, space: TruncatedStateSpace, tol: float = 1e-9
) -> list[tuple[int, float]]:
    """Exact ``(t, TV(law of X_t, Gibbs))`` for ``t = 0..T``."""
    alpha = _check_alpha(alpha)
    if T < 1:
        raise DomainError("horizon must be positive")
    A = A if isinstance(A, ParticleConfig) else ParticleConfig(A)
    if len(A) != space.n:
        raise DomainError(f"{A!r} does not have {space.n} particles")
    matrix = build_matrix(MemorylessFamily(alpha), space)
    if T * matrix.max_escaped > tol:
        raise TruncationError(f"escaped mass over {T} steps may reach {T * matrix.max_escaped:.3e}")
    target = gibbs_vector(space, alpha)
    PT = matrix.P.T.tocsr()
    p = space.point_mass(A)
    out = [(0, tv_distance(p, target))]
    for t in range(1, T + 1):
        p = PT @ p
        out.append((t, tv_distance(p, target)))
    return out


def worker_count() -> int:
    """Worker bound from ``JEP_THREADS`` (default 1)."""
    raw = os.environ.get("JEP_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise DomainError(f"JEP_THREADS must be an integer, got {raw!r}") from None
    if value < 1:
        raise DomainError("JEP_THREADS must be at least 1")
    return value


def monte_carlo(
    sampler: Callable[[int, GeometricStream], np.ndarray],
    total: int,
    seed: int,
    run: int = 0,
    chunk: int = 100_000,
    workers: int | None = None,
) -> EmpiricalSetDistribution:
    """Draw ``total`` samples in fixed chunks, each on its own sub-stream.

    Chunk ``c`` uses the sub-stream labelled ``(run, c)``, so the merged
    counts do not depend on the number of workers or their scheduling.
    """
    if total < 1:
        raise DomainError("need at least one sample")
    root = GeometricStream(seed)
    sizes = [min(chunk, total - start) for start in range(0, total, chunk)]

    def job(c):
        return empirical_distribution(sampler(sizes[c], root.spawn(run, c)))

    workers = workers or worker_count()
    if workers == 1:
        parts = [job(c) for c in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    result = EmpiricalSetDistribution()
    for part in parts:
        result = result.merge(part)
    return result


def jump_rate(X0: Sequence[int], family, T: int, seed: int) -> float:
    """Fraction of steps ``0..T-1`` whose state has a particle at zero."""
    hits = 0

    def visit(t, X):
        nonlocal hits
        if t < T and X[0] == 0:
            hits += 1

    simulate(X0, family, T, seed, record=False, visit=visit)
    return hits / T
