"""Two comparison models sharing structure with the process.

* Uniform jumps bounded by ``M``: its equilibrium has a product form
  normalised by a Stirling number of the second kind.
* A continuous-time exclusion process on the non-negative integers with a
  reflecting wall at zero; with up-rate ``lam`` and down-rate ``eta`` its
  equilibrium is the Gibbs measure with ``alpha = lam / eta``.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .distributions import GeometricStream
from .errors import DomainError, TruncationError
from .exact import TruncatedStateSpace, _solve_stationary, enumerate_states
from .sets import ParticleConfig


@lru_cache(maxsize=None)
def _stirling_row(a: int) -> tuple[int, ...]:
    if a == 0:
        return (1,)
    prev = _stirling_row(a - 1)
    row = [0] * (a + 1)
    for b in range(1, a + 1):
        row[b] = b * (prev[b] if b < len(prev) else 0) + prev[b - 1]
    return tuple(row)


def stirling2(a: int, b: int) -> int:
    """Stirling number of the second kind, exact integer."""
    if not (isinstance(a, int) and isinstance(b, int)) or not 1 <= b <= a:
        raise DomainError(f"stirling2 needs integers 1 <= b <= a, got ({a}, {b})")
    # iterate rows bottom-up to keep recursion depth flat for large a
    for k in range(0, a + 1, 256):
        _stirling_row(k)
    return _stirling_row(a)[b]


def _check_warrington(n: int, M: int, B: Sequence[int]) -> ParticleConfig:
    if not 1 <= n <= M:
        raise DomainError(f"need 1 <= n <= M, got n={n}, M={M}")
    B = B if isinstance(B, ParticleConfig) else ParticleConfig(B)
    if len(B) != n:
        raise DomainError(f"{B!r} does not have {n} elements")
    if B and B[-1] >= M:
        raise DomainError(f"{B!r} is not contained in [0, {M - 1}]")
    return B


def warrington_weight(n: int, M: int, B: Sequence[int]) -> int:
    """Unnormalised weight ``prod_{x in B} (1 + |[x+1, M-1] \\ B|)``."""
    B = _check_warrington(n, M, B)
    weight = 1
    for i, x in enumerate(B):
        above_occupied = len(B) - i - 1
        weight *= 1 + (M - 1 - x) - above_occupied
    return weight


def warrington_pmf(n: int, M: int, B: Sequence[int]) -> float:
    return warrington_weight(n, M, B) / stirling2(M + 1, M + 1 - n)


def warrington_energy(n: int, M: int, B: Sequence[int]) -> float:
    """Energy at inverse temperature 1: ``-sum log(1 + |[x+1, M-1] \\ B|)``."""
    B = _check_warrington(n, M, B)
    return -sum(math.log(1 + sum(1 for y in range(x + 1, M) if y not in B)) for x in B)


@dataclass(frozen=True)
class AsepParams:
    n: int
    lam: float
    eta: float

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("particle count must be positive")
        if not (0.0 < self.lam < self.eta and math.isfinite(self.eta)):
            raise DomainError(f"need 0 < lam < eta, got lam={self.lam}, eta={self.eta}")

    @property
    def ratio(self) -> float:
        return self.lam / self.eta

    @property
    def total_rate(self) -> float:
        return self.n * (self.lam + self.eta)


def asep_simulate(params: AsepParams, X0: Sequence[int], t_end: float, stream: GeometricStream) -> ParticleConfig:
    """State at ``t_end`` of one run started from ``X0``.

    Events arrive at the aggregate rate ``n (lam + eta)``; each picks a
    particle and a direction, and the move is suppressed if the target is
    occupied or negative.  Each event reads three uniforms.
    """
    return _asep_run(params, X0, t_end, stream)[0]


def _asep_run(params, X0, t_end, stream):
    X0 = X0 if isinstance(X0, ParticleConfig) else ParticleConfig(X0)
    if len(X0) != params.n:
        raise DomainError(f"{X0!r} does not have {params.n} particles")
    if t_end < 0:
        raise DomainError("t_end must be non-negative")
    x = list(X0)
    rate = params.total_rate
    p_up = params.lam / (params.lam + params.eta)
    t = 0.0
    events = 0
    while True:
        t += -math.log(stream.uniform()) / rate
        if t > t_end:
            break
        events += 1
        i = stream.index(params.n)
        if stream.uniform() <= p_up:
            target = x[i] + 1
            if i + 1 < len(x) and x[i + 1] == target:
                continue
        else:
            target = x[i] - 1
            if target < 0 or (i > 0 and x[i - 1] == target):
                continue
        x[i] = target
    return ParticleConfig._trusted(x), events


def asep_simulate_batch(
    params: AsepParams, X0: Sequence[int], t_end: float, size: int, stream: GeometricStream
) -> tuple[np.ndarray, np.ndarray]:
    """``size`` independent runs; returns end states (rows) and event counts."""
    X0 = ParticleConfig(X0)
    if len(X0) != params.n:
        raise DomainError(f"{X0!r} does not have {params.n} particles")
    n = params.n
    X = np.tile(np.asarray(X0, dtype=np.int64), (size, 1))
    t = np.zeros(size)
    events = np.zeros(size, dtype=np.int64)
    active = np.ones(size, dtype=bool)
    rate = params.total_rate
    p_up = params.lam / (params.lam + params.eta)
    rows = np.arange(size)
    while active.any():
        u = stream.uniforms(3 * size).reshape(size, 3)
        t = np.where(active, t - np.log(u[:, 0]) / rate, t)
        active &= t <= t_end
        events += active
        i = np.ceil(u[:, 1] * n).astype(np.int64) - 1
        up = u[:, 2] <= p_up
        cur = X[rows, i]
        target = np.where(up, cur + 1, cur - 1)
        above = np.where(i + 1 < n, X[rows, np.minimum(i + 1, n - 1)], -1)
        below = np.where(i > 0, X[rows, np.maximum(i - 1, 0)], -1)
        blocked = np.where(up, target == above, (target < 0) | (target == below))
        move = active & ~blocked
        X[rows[move], i[move]] = target[move]
    return X, events


def asep_generator(params: AsepParams, space: TruncatedStateSpace) -> sp.csr_matrix:
    """Generator on ``space``; moves above ``h_max - 1`` are suppressed too."""
    h = space.h_max
    rows, cols, vals = [], [], []
    for i, A in enumerate(space.states):
        occupied = set(A)
        out = 0.0
        for x in A:
            for target, rate in ((x + 1, params.lam), (x - 1, params.eta)):
                if 0 <= target < h and target not in occupied:
                    B = ParticleConfig._trusted(sorted((occupied - {x}) | {target}))
                    rows.append(i)
                    cols.append(space.index[B])
                    vals.append(rate)
                    out += rate
        rows.append(i)
        cols.append(i)
        vals.append(-out)
    return sp.csr_matrix((vals, (rows, cols)), shape=(len(space), len(space)))


def asep_stationary_exact(params: AsepParams, h_max: int, tol: float = 1e-10) -> tuple[TruncatedStateSpace, np.ndarray]:
    """Solve ``pi Q = 0`` on the ``n``-subsets of ``[0, h_max - 1]``."""
    tail = params.n * params.ratio ** (h_max - params.n)
    if tail > tol:
        raise TruncationError(f"h_max={h_max} leaves equilibrium tail ~{tail:.2e} above {tol:.1e}")
    space = enumerate_states(params.n, h_max)
    pi = _solve_stationary(asep_generator(params, space))
    pi = np.clip(pi, 0.0, None)
    return space, pi / pi.sum()


def detailed_balance_residual(params: AsepParams, space: TruncatedStateSpace, pi: np.ndarray) -> float:
    """``max |pi(x) q(x, y) - pi(y) q(y, x)|`` over all pairs."""
    Q = asep_generator(params, space).tocoo()
    off = Q.row != Q.col
    flux = sp.csr_matrix((pi[Q.row[off]] * Q.data[off], (Q.row[off], Q.col[off])), shape=Q.shape)
    diff = flux - flux.T
    return float(np.abs(diff.data).max()) if diff.nnz else 0.0
