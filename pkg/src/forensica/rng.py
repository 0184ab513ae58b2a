"""Deterministic, label-splittable randomness.

Every generation stage draws from its own stream, derived from the world
seed plus a short ASCII label ("village.sim", "station.scenery", ...).
Streams are independent: draws from one never perturb another, so any
stage can be replayed in isolation.

The core generator is SplitMix64 (Steele, Lea & Flood 2014), chosen
because it is tiny, fully specified, and has published test vectors, so
a port in any language can be checked bit-for-bit:

    state 0 -> e220a8397b1dcdaf, 6e789e6aa1b965f4, 06c45d188009454f
    (first three outputs; see tests/test_rng.py)

Stream derivation: SHA-256 over ``seed_le64 || b"/" || label`` and the
first 8 digest bytes (little-endian) become the SplitMix64 state.
Bounded integers use ``next_u64() % n`` -- the modulo bias is irrelevant
at game scale and the rule is trivial to reproduce elsewhere.
"""

from __future__ import annotations

import hashlib
from typing import Sequence, TypeVar

T = TypeVar("T")

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15

MAX_LABEL_BYTES = 64


class InvalidLabelError(ValueError):
    """Raised for empty, oversize, or non-ASCII stream labels."""


class RandomStream:
    """Stateful SplitMix64 stream. Single-owner; never share concurrently."""

    def __init__(self, state: int) -> None:
        self._state = state & _MASK

    def next_u64(self) -> int:
        """Advance the stream and return the next 64-bit output."""
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer, inclusive on both ends."""
        if hi < lo:
            raise ValueError(f"randint: empty range [{lo}, {hi}]")
        return lo + self.next_u64() % (hi - lo + 1)

    def chance(self, p: float) -> bool:
        """True with probability ``p``. Always consumes exactly one draw."""
        return self.random() < p

    def choice(self, seq: Sequence[T]) -> T:
        if not seq:
            raise ValueError("choice from empty sequence")
        return seq[self.randint(0, len(seq) - 1)]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates, iterating from the last index down."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(0, i)
            items[i], items[j] = items[j], items[i]

    def sample(self, seq: Sequence[T], k: int) -> list[T]:
        """k distinct elements, order determined by a shuffle of indices."""
        if k > len(seq):
            raise ValueError("sample larger than population")
        idx = list(range(len(seq)))
        self.shuffle(idx)
        return [seq[i] for i in idx[:k]]


def derive_stream(seed: int, label: str) -> RandomStream:
    """Derive the independent stream for one generation stage.

    Same (seed, label) always yields the same sequence; distinct labels
    or seeds yield unrelated sequences.
    """
    if not label:
        raise InvalidLabelError("stream label must be non-empty")
    try:
        raw = label.encode("ascii")
    except UnicodeEncodeError as exc:
        raise InvalidLabelError(f"stream label must be ASCII: {label!r}") from exc
    if len(raw) > MAX_LABEL_BYTES:
        raise InvalidLabelError(f"stream label exceeds {MAX_LABEL_BYTES} bytes")
    seed_bytes = (seed & _MASK).to_bytes(8, "little")
    digest = hashlib.sha256(seed_bytes + b"/" + raw).digest()
    return RandomStream(int.from_bytes(digest[:8], "little"))


def parse_seed(text: str) -> int:
    """Parse a seed given as decimal or 0x-prefixed hex; result is u64."""
    text = text.strip()
    value = int(text, 16) if text.lower().startswith("0x") else int(text)
    return value & _MASK
