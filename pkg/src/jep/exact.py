"""Exact analysis on a truncated state space.

States are the ``n``-subsets of ``[0, h_max - 1]`` in colexicographic order.
Probability that a jump row sends above the truncation is not renormalised
away; it is recorded per row as escaped mass so truncation error stays
visible.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .distributions import JumpFamily
from .errors import DomainError, NumericalError, TruncationError
from .sets import ParticleConfig, parse_config

DENSE_LIMIT = 20_000


@dataclass(frozen=True)
class TruncatedStateSpace:
    n: int
    h_max: int
    states: tuple[ParticleConfig, ...]
    index: Mapping[ParticleConfig, int]

    def __len__(self):
        return len(self.states)

    def __contains__(self, A):
        return A in self.index

    def position(self, A: Sequence[int]) -> int:
        A = A if isinstance(A, ParticleConfig) else ParticleConfig(A)
        try:
            return self.index[A]
        except KeyError:
            raise DomainError(f"{A!r} is not in the truncated space (n={self.n}, h_max={self.h_max})") from None

    def point_mass(self, A: Sequence[int]) -> np.ndarray:
        p = np.zeros(len(self))
        p[self.position(A)] = 1.0
        return p


def enumerate_states(n: int, h_max: int) -> TruncatedStateSpace:
    """All ``n``-subsets of ``[0, h_max - 1]``, colexicographically ordered."""
    if n < 1 or h_max < 1:
        raise DomainError("n and h_max must be positive")
    if n > h_max:
        raise DomainError(f"cannot place {n} particles below height {h_max}")
    combos = sorted(itertools.combinations(range(h_max), n), key=lambda c: c[::-1])
    states = tuple(ParticleConfig._trusted(c) for c in combos)
    return TruncatedStateSpace(n, h_max, states, {s: i for i, s in enumerate(states)})


@dataclass(frozen=True)
class StochasticMatrix:
    """Sub-stochastic transition matrix on a truncated space.

    ``escaped[i]`` is the probability that row ``i`` jumps above the
    truncation; every row sums to ``1 - escaped[i]``.
    """

    space: TruncatedStateSpace
    P: sp.csr_matrix
    escaped: np.ndarray

    @property
    def max_escaped(self) -> float:
        return float(self.escaped.max()) if len(self.escaped) else 0.0

    def row(self, A: Sequence[int]) -> dict[ParticleConfig, float]:
        i = self.space.position(A)
        lo, hi = self.P.indptr[i], self.P.indptr[i + 1]
        return {self.space.states[j]: float(v) for j, v in zip(self.P.indices[lo:hi], self.P.data[lo:hi])}

    def to_json(self) -> str:
        rows = []
        for i in range(len(self.space)):
            lo, hi = self.P.indptr[i], self.P.indptr[i + 1]
            rows.append([[int(j), float(v)] for j, v in zip(self.P.indices[lo:hi], self.P.data[lo:hi])])
        doc = {
            "n": self.space.n,
            "h_max": self.space.h_max,
            "states": [list(s) for s in self.space.states],
            "rows": rows,
            "escaped": [float(e) for e in self.escaped],
        }
        return json.dumps(doc)


def build_matrix(family: JumpFamily, space: TruncatedStateSpace, tol: float | None = None) -> StochasticMatrix:
    """Transition matrix of the process restricted to ``space``.

    Raises :class:`TruncationError` if some row's escaped mass exceeds
    ``tol`` (no check when ``tol`` is None).
    """
    h = space.h_max
    rows, cols, vals = [], [], []
    escaped = np.zeros(len(space))
    for i, A in enumerate(space.states):
        if A[0] != 0:
            rows.append(i)
            cols.append(space.index[ParticleConfig._trusted(a - 1 for a in A)])
            vals.append(1.0)
            continue
        B = ParticleConfig._trusted(a - 1 for a in A[1:])
        pmf = family.pmf_row(B, h)
        occupied = set(B)
        for y in np.flatnonzero(pmf):
            y = int(y)
            if y in occupied:
                raise DomainError(f"jump family puts mass on occupied site {y} for B={B!r}")
            target = ParticleConfig._trusted(sorted((*B, y)))
            rows.append(i)
            cols.append(space.index[target])
            vals.append(float(pmf[y]))
        escaped[i] = max(0.0, family.tail(B, h))
        if tol is not None and escaped[i] > tol:
            raise TruncationError(f"row {A!r} leaks mass {escaped[i]:.3e} above h_max={h} (tol {tol:.1e})")
    P = sp.csr_matrix((vals, (rows, cols)), shape=(len(space), len(space)))
    P.sort_indices()
    return StochasticMatrix(space, P, escaped)


def balance_residual(pi: np.ndarray, matrix: StochasticMatrix) -> float:
    """``||pi P - pi||_1``."""
    pi = np.asarray(pi, dtype=float)
    if pi.shape != (len(matrix.space),):
        raise DomainError("distribution and matrix dimensions differ")
    return float(np.abs(matrix.P.T @ pi - pi).sum())


def _solve_stationary(M: sp.spmatrix) -> np.ndarray:
    """Solve ``pi M = 0``, ``sum(pi) = 1`` by replacing one equation."""
    N = M.shape[0]
    A = M.T.tolil()
    A[N - 1, :] = np.ones(N)
    b = np.zeros(N)
    b[N - 1] = 1.0
    with np.errstate(all="ignore"):
        pi = spla.spsolve(A.tocsc(), b)
    if not np.all(np.isfinite(pi)):
        raise NumericalError("stationary solve failed (singular system)")
    return pi


def stationary_distribution(matrix: StochasticMatrix, tol: float = 1e-10, max_iter: int = 1_000_000) -> np.ndarray:
    """Stationary law of the truncated chain.

    Direct sparse solve up to ``DENSE_LIMIT`` states, power iteration above.
    """
    if matrix.max_escaped > tol:
        raise TruncationError(f"escaped mass {matrix.max_escaped:.3e} exceeds tolerance {tol:.1e}")
    N = len(matrix.space)
    if N <= DENSE_LIMIT:
        pi = _solve_stationary(matrix.P - sp.identity(N, format="csr"))
    else:
        PT = matrix.P.T.tocsr()
        pi = np.full(N, 1.0 / N)
        for _ in range(max_iter):
            nxt = PT @ pi
            nxt /= nxt.sum()
            done = np.abs(nxt - pi).sum() <= 1e-12
            pi = nxt
            if done:
                break
        else:
            raise NumericalError(f"power iteration did not converge in {max_iter} steps")
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    residual = balance_residual(pi, matrix)
    if residual > max(tol, 1e-12) * 10 + 2 * matrix.max_escaped:
        raise NumericalError(f"stationary residual {residual:.3e} above tolerance")
    return pi


def distribution_at_time(A: Sequence[int], matrix: StochasticMatrix, t: int, tol: float = 1e-9) -> np.ndarray:
    """Law of ``X_t`` from ``X_0 = A`` under the truncated kernel."""
    if t < 0:
        raise DomainError("time must be non-negative")
    if t * matrix.max_escaped > tol:
        raise TruncationError(f"escaped mass over {t} steps may reach {t * matrix.max_escaped:.3e}")
    p = matrix.space.point_mass(A)
    PT = matrix.P.T.tocsr()
    for _ in range(t):
        p = PT @ p
    return p


def tv_distance(p: Sequence[float], q: Sequence[float]) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DomainError(f"dimension mismatch {p.shape} vs {q.shape}")
    return 0.5 * float(np.abs(p - q).sum())


def renewal_equilibrium(nu: Sequence[float]) -> np.ndarray:
    """Stationary law of the one-particle process with jump law ``nu``.

    ``pi(x) = nu[x, inf) / (1 + mean(nu))``: a jump to ``y`` starts a
    cycle of ``y + 1`` steps.
    """
    nu = np.asarray(nu, dtype=float)
    if nu.ndim != 1 or nu.size == 0 or np.any(nu < 0):
        raise DomainError("nu must be a nonempty non-negative vector")
    if abs(nu.sum() - 1.0) > 1e-12:
        raise DomainError(f"nu sums to {nu.sum()!r}, not 1")
    mean = float(np.dot(np.arange(nu.size), nu))
    if not math.isfinite(mean):
        raise DomainError("nu has no finite mean")
    tails = np.cumsum(nu[::-1])[::-1]
    return tails / (1.0 + mean)


def drift_statistic(family: JumpFamily, A: Sequence[int]) -> float:
    """``PV(A) - V(A)`` for ``V = max``.

    For ``0 in A`` with ``B = A* - 1`` and ``V = max A``:
    ``PV(A) = (V - 1) + E (Y - V + 1)^+`` where ``Y ~ nu_B``.
    """
    A = A if isinstance(A, ParticleConfig) else ParticleConfig(A)
    if not A:
        raise DomainError("drift needs a nonempty configuration")
    if A[0] != 0:
        return -1.0
    V = A[-1]
    B = ParticleConfig._trusted(a - 1 for a in A[1:])
    excess = family.tail_sum(B, V)
    if not math.isfinite(excess):
        raise NumericalError(f"divergent expectation at {A!r}")
    return (V - 1) + excess - V


def write_distribution_csv(space_or_states, probs: Sequence[float], path: str | Path | None = None) -> str:
    """``state,probability`` CSV; states are quoted comma-joined literals."""
    states = space_or_states.states if isinstance(space_or_states, TruncatedStateSpace) else space_or_states
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["state", "probability"])
    for s, p in zip(states, probs):
        w.writerow([ParticleConfig(s).key(), repr(float(p))])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_distribution_csv(path: str | Path) -> dict[ParticleConfig, float]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {parse_config(r["state"]): float(r["probability"]) for r in rows}
