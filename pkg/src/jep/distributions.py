"""Jump-height families, a reproducible uniform/geometric stream, and
structural checks on families.

Every family's ``sample`` consumes exactly one uniform variate from the
stream, so trajectories stay aligned when families of equal arity are
swapped.
"""

from __future__ import annotations

import json
import math
from abc import ABC, abstractmethod
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, NumericalError, UndefinedIndexError
from .sets import ParticleConfig, avoiding_shift, count_below, parse_config

MASS_TOL = 1e-12
# tail terms below this are treated as zero when summing unbounded tails
_TAIL_EPS = 1e-18
_MAX_TAIL_TERMS = 1_000_000


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


class GeometricStream:
    """Seeded stream of uniform variates on (0, 1] with geometric inversion.

    Values are drawn from a PCG64 generator in fixed-size blocks, so scalar
    and vectorised draws read the same underlying sequence: ``uniforms(k)``
    returns exactly what ``k`` calls of ``uniform()`` would have returned.

    Sub-streams for parallel work come from :meth:`spawn`, which derives an
    independent generator from the seed and a tuple of integer labels.
    """

    _BLOCK = 4096

    def __init__(self, seed: int = 0, key: tuple[int, ...] = ()):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        self.seed = seed
        self.key = tuple(int(k) for k in key)
        ss = np.random.SeedSequence(entropy=seed, spawn_key=self.key)
        self._rng = np.random.Generator(np.random.PCG64(ss))
        self._buf = np.empty(0)
        self._pos = 0
        self.consumed = 0

    def spawn(self, *labels: int) -> GeometricStream:
        return GeometricStream(self.seed, self.key + tuple(labels))

    def _refill(self):
        # 1 - U[0,1) lies in (0, 1], keeping log() finite
        self._buf = 1.0 - self._rng.random(self._BLOCK)
        self._pos = 0

    def uniform(self) -> float:
        if self._pos >= len(self._buf):
            self._refill()
        u = float(self._buf[self._pos])
        self._pos += 1
        self.consumed += 1
        return u

    def uniforms(self, size: int) -> np.ndarray:
        out = np.empty(size)
        filled = 0
        while filled < size:
            if self._pos >= len(self._buf):
                self._refill()
            take = min(size - filled, len(self._buf) - self._pos)
            out[filled:filled + take] = self._buf[self._pos:self._pos + take]
            self._pos += take
            filled += take
        self.consumed += size
        return out

    def geometric(self, alpha: float) -> int:
        """One draw with ``P(xi = k) = (1 - alpha) alpha**k``, ``k >= 0``."""
        return int(math.log(self.uniform()) / math.log(alpha))

    def geometrics(self, alpha: float, size) -> np.ndarray:
        shape = (size,) if np.isscalar(size) else tuple(size)
        u = self.uniforms(int(np.prod(shape)))
        return np.floor(np.log(u) / math.log(alpha)).astype(np.int64).reshape(shape)

    def index(self, k: int) -> int:
        """Uniform index in ``[0, k-1]``."""
        return math.ceil(self.uniform() * k) - 1


class JumpFamily(ABC):
    """Indexed family of jump-height distributions ``nu_B`` on the integers.

    ``B`` is the configuration of the other particles right after they
    drifted down; every ``nu_B`` must put zero mass on ``B``.
    """

    @abstractmethod
    def pmf(self, B: ParticleConfig, y: int) -> float: ...

    @abstractmethod
    def sample(self, B: ParticleConfig, stream) -> int: ...

    def support_bound(self, B: ParticleConfig) -> int | None:
        """Exclusive upper bound of the support, or ``None`` if unbounded."""
        return None

    def pmf_row(self, B: ParticleConfig, h_max: int) -> np.ndarray:
        return np.array([self.pmf(B, y) for y in range(h_max)])

    def tail(self, B: ParticleConfig, t: int) -> float:
        """``nu_B[t, inf)``."""
        if t <= 0:
            return 1.0
        return max(0.0, 1.0 - float(self.pmf_row(B, t).sum()))

    def tail_sum(self, B: ParticleConfig, start: int) -> float:
        """``sum_{t >= start} nu_B[t, inf)``, i.e. ``E (Y - start + 1)^+``."""
        bound = self.support_bound(B)
        start = max(start, 0)
        if bound is not None:
            if start >= bound:
                return 0.0
            row = self.pmf_row(B, bound)
            tails = np.cumsum(row[::-1])[::-1]
            return float(tails[start:].sum())
        total = 0.0
        t = start
        for _ in range(_MAX_TAIL_TERMS):
            term = self.tail(B, t)
            total += term
            if term < _TAIL_EPS:
                return total
            t += 1
        raise NumericalError(f"tail sum for B={B!r} did not converge")


@dataclass(frozen=True)
class MemorylessFamily(JumpFamily):
    """``nu_B(y) = (1 - alpha) alpha**h_B(y)`` on the complement of ``B``."""

    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", _check_alpha(self.alpha))

    def pmf(self, B, y):
        return memoryless_pmf(B, self.alpha, y)

    def pmf_row(self, B, h_max):
        y = np.arange(h_max)
        occupied = np.isin(y, np.asarray(B, dtype=np.int64))
        h = y - np.searchsorted(np.asarray(B, dtype=np.int64), y, side="left")
        row = (1.0 - self.alpha) * self.alpha ** h.astype(float)
        row[occupied] = 0.0
        return row

    def tail(self, B, t):
        return self.alpha ** count_below(B, t)

    def tail_sum(self, B, start):
        start = max(start, 0)
        top = B[-1] + 1 if B else 0
        total = sum(self.tail(B, t) for t in range(start, top))
        # beyond max(B) the tail is alpha**(t - |B|)
        first = max(start, top)
        total += self.alpha ** (first - len(B)) / (1.0 - self.alpha)
        return total

    def sample(self, B, stream):
        return sample_memoryless(B, self.alpha, stream)


@dataclass(frozen=True)
class BoundedUniformFamily(JumpFamily):
    """Uniform jumps onto the free sites of ``[0, M-1]``."""

    M: int

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise DomainError(f"height bound M must be a positive integer, got {self.M}")

    def pmf(self, B, y):
        return bounded_uniform_pmf(B, self.M, y)

    def support_bound(self, B):
        return self.M

    def pmf_row(self, B, h_max):
        _check_bounded(B, self.M)
        row = np.zeros(h_max)
        top = min(h_max, self.M)
        row[:top] = 1.0 / (self.M - len(B))
        for b in B:
            if b < h_max:
                row[b] = 0.0
        return row

    def tail(self, B, t):
        _check_bounded(B, self.M)
        t = max(t, 0)
        free = sum(1 for y in range(t, self.M) if y not in B)
        return free / (self.M - len(B))

    def sample(self, B, stream):
        _check_bounded(B, self.M)
        k = stream.index(self.M - len(B))
        return avoiding_shift(B, k)


class TableFamily(JumpFamily):
    """Explicit ``B -> pmf`` table with finite supports.

    Looking up a ``B`` that is not in the table raises
    :class:`UndefinedIndexError`; there is no fallback.
    """

    def __init__(self, table: Mapping[ParticleConfig, Mapping[int, float]]):
        self.table: dict[ParticleConfig, dict[int, float]] = {}
        for B, dist in table.items():
            B = B if isinstance(B, ParticleConfig) else ParticleConfig(B)
            entries = {int(y): float(p) for y, p in dict(dist).items()}
            if any(y < 0 or p < 0 for y, p in entries.items()):
                raise DomainError(f"invalid table entry for B={B!r}")
            self.table[B] = entries

    @classmethod
    def from_json(cls, source: str | Path | Mapping) -> TableFamily:
        """Load ``{"0,2,3": [[y, p], ...], ...}`` from a path, JSON text, or dict."""
        if isinstance(source, Mapping):
            raw = source
        else:
            path = Path(source)
            text = path.read_text() if path.exists() else str(source)
            raw = json.loads(text)
        table = {}
        for key, pairs in raw.items():
            dist: dict[int, float] = {}
            for y, p in pairs:
                dist[int(y)] = dist.get(int(y), 0.0) + float(p)
            table[parse_config(key)] = dist
        return cls(table)

    def to_json(self) -> str:
        raw = {B.key(): [[y, p] for y, p in sorted(d.items())] for B, d in sorted(self.table.items())}
        return json.dumps(raw, sort_keys=True)

    def _dist(self, B):
        try:
            return self.table[B if isinstance(B, ParticleConfig) else ParticleConfig(B)]
        except KeyError:
            raise UndefinedIndexError(f"jump family undefined at B={ParticleConfig(B)!r}") from None

    def pmf(self, B, y):
        return self._dist(B).get(y, 0.0)

    def support_bound(self, B):
        d = self._dist(B)
        return max(d) + 1 if d else 0

    def sample(self, B, stream):
        d = self._dist(B)
        u = stream.uniform()
        acc = 0.0
        ys = sorted(y for y, p in d.items() if p > 0)
        for y in ys:
            acc += d[y]
            if u <= acc:
                return y
        return ys[-1]


class CallableFamily(JumpFamily):
    """Family given by a function ``B -> {y: p}`` with finite support."""

    def __init__(self, fn: Callable[[ParticleConfig], Mapping[int, float]]):
        self.fn = fn

    def _dist(self, B):
        return dict(self.fn(B))

    def pmf(self, B, y):
        return float(self._dist(B).get(y, 0.0))

    def support_bound(self, B):
        d = self._dist(B)
        return max(d) + 1 if d else 0

    def sample(self, B, stream):
        return TableFamily({B: self._dist(B)}).sample(B, stream)


def memoryless_pmf(B: Sequence[int], alpha: float, y: int) -> float:
    alpha = _check_alpha(alpha)
    if y < 0:
        return 0.0
    if y in B:
        return 0.0
    return (1.0 - alpha) * alpha ** count_below(B, y)


def sample_memoryless(B: Sequence[int], alpha: float, stream) -> int:
    """Draw ``xi`` geometric and return ``avoiding_shift(B, xi)``."""
    alpha = _check_alpha(alpha)
    return avoiding_shift(B, stream.geometric(alpha))


def _check_bounded(B, M):
    if len(B) >= M:
        raise DomainError(f"no free site in [0, {M - 1}] for B={ParticleConfig(B)!r}")
    if B and B[-1] >= M:
        raise DomainError(f"B={ParticleConfig(B)!r} is not contained in [0, {M - 1}]")


def bounded_uniform_pmf(B: Sequence[int], M: int, y: int) -> float:
    _check_bounded(B, M)
    if 0 <= y < M and y not in B:
        return 1.0 / (M - len(B))
    return 0.0


@dataclass
class CheckReport:
    """Outcome of a structural check over a list of index sets."""

    name: str
    checked: int = 0
    violations: list[tuple[ParticleConfig, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):
        status = "ok" if self.ok else f"{len(self.violations)} violation(s)"
        return f"{self.name}: {self.checked} states, {status}"


def _total_mass(family: JumpFamily, B: ParticleConfig) -> float:
    bound = family.support_bound(B)
    if bound is not None:
        return float(family.pmf_row(B, bound).sum())
    # finite head plus the family's own tail evaluation
    top = (B[-1] + 1 if B else 0) + 64
    return float(family.pmf_row(B, top).sum()) + family.tail(B, top)


def check_noncolliding(family: JumpFamily, states: Iterable[Sequence[int]]) -> CheckReport:
    """Zero mass on occupied sites and unit total mass, for every ``B``."""
    report = CheckReport("noncolliding")
    for B in states:
        B = B if isinstance(B, ParticleConfig) else ParticleConfig(B)
        report.checked += 1
        try:
            bad = [y for y in B if family.pmf(B, y) != 0.0]
            if bad:
                report.violations.append((B, f"mass on occupied sites {bad}"))
            total = _total_mass(family, B)
        except (DomainError, NumericalError) as exc:
            report.violations.append((B, str(exc)))
            continue
        if abs(total - 1.0) > MASS_TOL:
            report.violations.append((B, f"total mass {total!r}"))
    return report


def check_aperiodicity(family: JumpFamily, states: Iterable[Sequence[int]]) -> CheckReport:
    """``nu_B(min B^c) > 0`` for every ``B``."""
    report = CheckReport("aperiodicity")
    for B in states:
        B = B if isinstance(B, ParticleConfig) else ParticleConfig(B)
        report.checked += 1
        lowest_free = avoiding_shift(B, 0)
        try:
            mass = family.pmf(B, lowest_free)
        except DomainError as exc:
            report.violations.append((B, str(exc)))
            continue
        if not mass > 0.0:
            report.violations.append((B, f"no mass at lowest free site {lowest_free}"))
    return report


def tail_first_moment(family: JumpFamily, K: int, states: Iterable[Sequence[int]]) -> float:
    """``max_B sum_{x > K} x nu_B(x)`` over the supplied index sets.

    Only a necessary-condition diagnostic for uniform integrability: the
    supremum is taken over the given states, not over all of them.
    Uses ``sum_{x>K} x nu(x) = K nu[K+1, inf) + sum_{t>K} nu[t, inf)``.
    """
    if K < 0:
        raise DomainError("K must be non-negative")
    worst = 0.0
    for B in states:
        B = B if isinstance(B, ParticleConfig) else ParticleConfig(B)
        value = K * family.tail(B, K + 1) + family.tail_sum(B, K + 1)
        if not math.isfinite(value):
            raise NumericalError(f"non-summable tail at B={B!r}")
        worst = max(worst, value)
    return worst
