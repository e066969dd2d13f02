"""Finite sets of particle heights and the set-avoiding shift.

A configuration is an immutable sorted tuple of distinct non-negative
integers.  All operations here are pure.
"""

from __future__ import annotations

from bisect import bisect_left
from collections.abc import Iterable, Sequence

from .errors import DomainError

__all__ = [
    "ParticleConfig",
    "EMPTY",
    "ground_state",
    "parse_config",
    "shift_down",
    "shift_up",
    "delete_min",
    "delete_smallest",
    "count_below",
    "avoiding_shift",
    "avoiding_shift_literal",
    "noncolliding_union",
    "insert",
]


class ParticleConfig(tuple):
    """Sorted tuple of distinct non-negative integer heights.

    The constructor accepts any iterable of distinct non-negative integers
    and sorts it, so ``ParticleConfig([7, 1, 4]) == ParticleConfig([1, 4, 7])``.
    """

    __slots__ = ()

    def __new__(cls, elements: Iterable[int] = ()):
        items = sorted(_as_height(e) for e in elements)
        for a, b in zip(items, items[1:]):
            if a == b:
                raise DomainError(f"duplicate height {a} in configuration")
        return tuple.__new__(cls, items)

    @classmethod
    def _trusted(cls, items: Iterable[int]) -> ParticleConfig:
        # caller guarantees sorted, distinct, non-negative python ints
        return tuple.__new__(cls, items)

    def size(self) -> int:
        return len(self)

    def min(self) -> int:
        if not self:
            raise DomainError("empty configuration has no minimum")
        return self[0]

    def max(self) -> int:
        if not self:
            raise DomainError("empty configuration has no maximum")
        return self[-1]

    def key(self) -> str:
        """Comma-joined literal, e.g. ``"0,2,3"`` (empty set gives ``""``)."""
        return ",".join(map(str, self))

    def __repr__(self) -> str:
        return "{" + ",".join(map(str, self)) + "}"


EMPTY = ParticleConfig._trusted(())


def _as_height(value) -> int:
    try:
        x = int(value)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"height {value!r} is not an integer") from exc
    if x != value:
        raise DomainError(f"height {value!r} is not an integer")
    if x < 0:
        raise DomainError(f"negative height {x}")
    return x


def ground_state(n: int) -> ParticleConfig:
    """The configuration ``{0, 1, ..., n-1}``."""
    if n < 0:
        raise DomainError("particle count must be non-negative")
    return ParticleConfig._trusted(range(n))


def parse_config(text: str) -> ParticleConfig:
    """Parse a state literal such as ``"1,4,7"``; ``""`` is the empty set."""
    text = text.strip().strip("{}")
    if not text:
        return EMPTY
    try:
        values = [int(tok) for tok in text.split(",")]
    except ValueError as exc:
        raise DomainError(f"malformed state literal {text!r}") from exc
    return ParticleConfig(values)


def shift_down(A: Sequence[int], t: int = 1) -> ParticleConfig:
    """Return ``A - t``; requires ``min(A) >= t``."""
    if t < 0:
        raise DomainError("shift must be non-negative")
    if A and A[0] < t:
        raise DomainError(f"cannot shift {ParticleConfig(A)!r} down by {t}")
    return ParticleConfig._trusted(a - t for a in A)


def shift_up(A: Sequence[int], t: int = 1) -> ParticleConfig:
    """Return ``A + t``."""
    if t < 0:
        raise DomainError("shift must be non-negative")
    return ParticleConfig._trusted(a + t for a in A)


def delete_min(A: Sequence[int]) -> ParticleConfig:
    if not A:
        raise DomainError("cannot delete the minimum of an empty configuration")
    return ParticleConfig._trusted(A[1:])


def delete_smallest(A: Sequence[int], k: int) -> ParticleConfig:
    """Delete the ``k`` smallest elements of ``A``."""
    if not 0 <= k <= len(A):
        raise DomainError(f"cannot delete {k} elements from a set of size {len(A)}")
    return ParticleConfig._trusted(A[k:])


def count_below(A: Sequence[int], x: int) -> int:
    """Number of unoccupied sites strictly below ``x``: ``|[0, x-1] \\ A|``."""
    if x <= 0:
        return 0
    return x - bisect_left(A, x)


def avoiding_shift(A: Sequence[int], x: int) -> int:
    """The ``(x+1)``-th smallest non-negative integer not in ``A``.

    Walks the sorted avoid-set once; each element at or below the current
    candidate pushes the candidate up by one.
    """
    if x < 0:
        raise DomainError("avoiding shift is defined on non-negative integers")
    y = x
    for a in A:
        if a > y:
            break
        y += 1
    return y


def avoiding_shift_literal(A: Iterable[int], x: int) -> int:
    """Reference form: ``min{m >= 0 : |[0, m] \\ A| >= x + 1}`` by scanning."""
    avoid = set(A)
    free = 0
    m = 0
    while True:
        if m not in avoid:
            free += 1
            if free >= x + 1:
                return m
        m += 1


def insert(A: Sequence[int], y: int) -> ParticleConfig:
    """``A ∪ {y}`` for ``y`` not in ``A``."""
    i = bisect_left(A, y)
    if i < len(A) and A[i] == y:
        raise DomainError(f"site {y} is already occupied in {ParticleConfig(A)!r}")
    return ParticleConfig._trusted((*A[:i], y, *A[i:]))


def noncolliding_union(A: Sequence[int], xs: Iterable[int]) -> ParticleConfig:
    """Insert each ``x`` of ``xs``, in order, through the avoiding shift of
    the set built so far."""
    current = A if isinstance(A, ParticleConfig) else ParticleConfig(A)
    for x in xs:
        current = insert(current, avoiding_shift(current, x))
    return current
