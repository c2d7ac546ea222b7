"""Counter-based deterministic random numbers.

Every draw is a pure function of ``(seed, position)`` so a generator can be
checkpointed into an immutable game state as two integers and resumed later
on any platform.
"""

from __future__ import annotations

import hashlib
from typing import MutableSequence, Sequence, TypeVar

T = TypeVar("T")

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    # SplitMix64 finalizer
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *labels: object) -> int:
    """Derive an independent 64-bit seed from a parent seed and labels."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(seed & MASK64).encode())
    for label in labels:
        h.update(b"\x1f")
        h.update(str(label).encode("utf-8"))
    return int.from_bytes(h.digest(), "little")


class SeededRng:
    """SplitMix64 in counter mode with an explicit stream position."""

    __slots__ = ("seed", "position")

    def __init__(self, seed: int, position: int = 0):
        if position < 0:
            raise ValueError("position must be non-negative")
        self.seed = seed & MASK64
        self.position = position

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, position={self.position})"

    def fork(self, *labels: object) -> SeededRng:
        return SeededRng(derive_seed(self.seed, *labels))

    def next_u64(self) -> int:
        self.position += 1
        return _mix64((self.seed + self.position * _GOLDEN) & MASK64)

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        if n == 1:
            return 0
        # rejection sampling keeps the draw unbiased
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in the closed interval [lo, hi]."""
        return lo + self.randbelow(hi - lo + 1)

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def choice(self, seq: Sequence[T]) -> T:
        if not seq:
            raise IndexError("choice from empty sequence")
        return seq[self.randbelow(len(seq))]

    def shuffle(self, items: MutableSequence) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, seq: Sequence[T], k: int) -> list[T]:
        pool = list(seq)
        if k > len(pool):
            raise ValueError("sample larger than population")
        self.shuffle(pool)
        return pool[:k]
