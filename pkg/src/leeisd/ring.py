"""The ambient ring Z/p^s Z, Lee weights and Lee vectors."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Tuple


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class RingSpec:
    """Z/qZ with q = p^s, together with the derived constants used everywhere.

    M = floor(q/2) is the maximal Lee weight of a single ring element.
    """

    p: int
    s: int

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        if self.s < 1:
            raise ValueError(f"s = {self.s} must be a positive integer")
        if self.q > 2**31:
            raise ValueError("q = p^s exceeds the 2^31 machine-integer guard")

    @property
    def q(self) -> int:
        return self.p**self.s

    @property
    def M(self) -> int:
        return self.q // 2

    @property
    def even(self) -> bool:
        # q even means the element of weight M has a single representative.
        return self.p == 2

    def lee_weight(self, x: int) -> int:
        if not 0 <= x < self.q:
            raise ValueError(f"element {x} outside [0, {self.q})")
        return min(x, self.q - x)

    def weight_multiplicity(self, j: int) -> int:
        """Number of ring elements of Lee weight exactly j.

        1 for j = 0, 1 for j = M when q is even, else 2.  This case split is
        the single source of truth for counting, sampling and enumeration.
        """
        if not 0 <= j <= self.M:
            raise ValueError(f"weight {j} outside [0, {self.M}]")
        if j == 0:
            return 1
        if j == self.M and self.even:
            return 1
        return 2

    def representatives(self, j: int) -> Tuple[int, ...]:
        """The ring elements of Lee weight j, smaller residue first."""
        if self.weight_multiplicity(j) == 1:
            return (j,)
        return (j, self.q - j)


def lee_weight(x: int, ring: RingSpec) -> int:
    """wt_L(x) = min(x, q - x) for x in [0, q)."""
    return ring.lee_weight(x)


@dataclass(frozen=True)
class LeeVector:
    """A length-n tuple of ring elements with its Lee weight cached."""

    ring: RingSpec
    entries: Tuple[int, ...]
    weight: int = field(init=False)

    def __post_init__(self):
        q = self.ring.q
        w = 0
        for e in self.entries:
            if not 0 <= e < q:
                raise ValueError(f"entry {e} outside [0, {q})")
            w += min(e, q - e)
        object.__setattr__(self, "entries", tuple(int(e) for e in self.entries))
        object.__setattr__(self, "weight", w)

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def from_iterable(cls, ring: RingSpec, entries: Sequence[int]) -> "LeeVector":
        return cls(ring, tuple(int(e) % ring.q for e in entries))


def lee_weight_vector(v: LeeVector) -> int:
    """Sum of the entry Lee weights (cached on the vector)."""
    return v.weight


def lee_distance(x: LeeVector, y: LeeVector) -> int:
    if x.ring != y.ring or len(x) != len(y):
        raise ValueError("mismatched vectors")
    q = x.ring.q
    return sum(min(d, q - d) for d in ((a - b) % q for a, b in zip(x.entries, y.entries)))
