"""JEP dynamics on finite sets of non-negative integers.

A particle configuration drifts down one site per step.  When a particle
sits at zero it is removed while the others drift down; the removed particle
then lands on a free site drawn from the jump family.
"""

from __future__ import annotations

import io
import json
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .distributions import GeometricStream, JumpFamily, _check_alpha
from .errors import DomainError
from .sets import ParticleConfig, delete_smallest, insert, noncolliding_union, shift_down


def step(X: ParticleConfig, family: JumpFamily, stream) -> ParticleConfig:
    if not X:
        raise DomainError("the process needs at least one particle")
    if X[0] != 0:
        return ParticleConfig._trusted(a - 1 for a in X)
    B = ParticleConfig._trusted(a - 1 for a in X[1:])
    y = family.sample(B, stream)
    return insert(B, y)


@dataclass
class Trajectory:
    initial: ParticleConfig
    steps: list[tuple[int, ParticleConfig]] = field(default_factory=list)
    seed: dict = field(default_factory=dict)

    @property
    def states(self) -> list[ParticleConfig]:
        return [s for _, s in self.steps]

    def to_jsonl(self) -> str:
        buf = io.StringIO()
        for t, state in self.steps:
            buf.write(json.dumps({"t": t, "state": list(state)}))
            buf.write("\n")
        return buf.getvalue()

    def write_jsonl(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl())

    @classmethod
    def read_jsonl(cls, path: str | Path) -> Trajectory:
        steps = []
        for line in Path(path).read_text().splitlines():
            if line.strip():
                rec = json.loads(line)
                steps.append((int(rec["t"]), ParticleConfig(rec["state"])))
        if not steps:
            raise DomainError(f"empty trajectory file {path}")
        return cls(initial=steps[0][1], steps=steps)


def iter_states(X0: ParticleConfig, family: JumpFamily, T: int, stream) -> Iterator[ParticleConfig]:
    """Yield ``X_0, X_1, ..., X_T`` without storing them."""
    X = X0 if isinstance(X0, ParticleConfig) else ParticleConfig(X0)
    yield X
    for _ in range(T):
        X = step(X, family, stream)
        yield X


def simulate(
    X0: ParticleConfig,
    family: JumpFamily,
    T: int,
    seed: int | GeometricStream = 0,
    record: bool = True,
    visit: Callable[[int, ParticleConfig], None] | None = None,
) -> Trajectory:
    """Run ``T`` steps from ``X0``.

    With ``record=False`` only the initial and final states are kept;
    ``visit(t, state)`` is still called for every state.
    """
    if T < 1:
        raise DomainError("horizon T must be at least 1")
    stream = seed if isinstance(seed, GeometricStream) else GeometricStream(seed)
    X0 = X0 if isinstance(X0, ParticleConfig) else ParticleConfig(X0)
    traj = Trajectory(initial=X0, seed={"seed": stream.seed, "key": list(stream.key)})
    last = None
    for t, X in enumerate(iter_states(X0, family, T, stream)):
        if visit is not None:
            visit(t, X)
        if record:
            traj.steps.append((t, X))
        last = (t, X)
    if not record:
        traj.steps = [(0, X0), last]
    return traj


def jump_times(A: Sequence[int]) -> list[int]:
    """``tau_k = min A_{k-1} + 1``, i.e. ``[a + 1 for a in sorted A]``."""
    if not A:
        raise DomainError("jump times need a nonempty configuration")
    return [a + 1 for a in sorted(A)]


def transient_law_sample(A: ParticleConfig, alpha: float, t: int, stream) -> ParticleConfig:
    """One draw from the exact law of ``X_t`` for the memoryless process
    started at ``A``, built directly from geometric variates."""
    alpha = _check_alpha(alpha)
    A = A if isinstance(A, ParticleConfig) else ParticleConfig(A)
    if t < 0:
        raise DomainError("time must be non-negative")
    k = sum(1 for tau in jump_times(A) if tau <= t)
    base = shift_down(delete_smallest(A, k), t) if k < len(A) else ParticleConfig._trusted(())
    return noncolliding_union(base, [stream.geometric(alpha) for _ in range(k)])


# Vectorised kernels over batches of configurations.  Rows are sorted
# integer arrays, one configuration per row.


def union_batch(base: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Row-wise noncolliding union of ``base`` (N, m) with draws ``xs`` (N, k)."""
    base = np.asarray(base, dtype=np.int64)
    xs = np.asarray(xs, dtype=np.int64)
    N = xs.shape[0]
    cur = base.reshape(N, -1) if base.size else np.empty((N, 0), dtype=np.int64)
    for j in range(xs.shape[1]):
        y = xs[:, j].copy()
        for c in range(cur.shape[1]):
            y += cur[:, c] <= y
        cur = np.sort(np.column_stack([cur, y]), axis=1)
    return cur


def step_batch(X: np.ndarray, alpha: float, stream: GeometricStream) -> np.ndarray:
    """One memoryless step applied to every row of ``X``.

    Draws one geometric per row, used only by rows with a particle at zero.
    """
    X = np.asarray(X, dtype=np.int64)
    xi = stream.geometrics(alpha, X.shape[0])
    out = X - 1
    jump = X[:, 0] == 0
    if jump.any():
        rest = X[jump, 1:] - 1
        out[jump] = union_batch(rest, xi[jump, None])
    return out


def simulate_batch(X0: Sequence[int], alpha: float, T: int, size: int, stream: GeometricStream) -> np.ndarray:
    """States at time ``T`` of ``size`` independent memoryless runs from ``X0``."""
    _check_alpha(alpha)
    X = np.tile(np.asarray(X0, dtype=np.int64), (size, 1))
    for _ in range(T):
        X = step_batch(X, alpha, stream)
    return X


def transient_law_batch(A: Sequence[int], alpha: float, t: int, size: int, stream: GeometricStream) -> np.ndarray:
    alpha = _check_alpha(alpha)
    A = ParticleConfig(A)
    k = sum(1 for tau in jump_times(A) if tau <= t)
    base = np.array(shift_down(delete_smallest(A, k), t) if k < len(A) else (), dtype=np.int64)
    xs = stream.geometrics(alpha, (size, k))
    return union_batch(np.tile(base, (size, 1)), xs)
