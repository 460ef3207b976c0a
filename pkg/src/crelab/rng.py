"""Counter-based random streams.

Every draw is a pure function of ``(seed, stream_id, position)``: the
Philox-4x64 block cipher is keyed with ``(seed, stream_id)`` and evaluated at
the block containing ``position``. Nothing here keeps hidden state, so a
Monte Carlo job can be split across any number of workers and still produce
bit-identical output.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .exceptions import DomainError

_MASK64 = (1 << 64) - 1
_WORDS_PER_BLOCK = 4
_INV_2_53 = 1.0 / 9007199254740992.0


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class RngStream:
    """An immutable handle on one counter-based stream.

    ``counter`` is the position (in 64-bit words) of the next draw. All
    sampling methods return a new stream alongside the values, except the
    ``*_at`` helpers which read at an explicit position without advancing.
    """

    seed: int
    stream_id: int = 0
    counter: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id", "counter"):
            value = getattr(self, name)
            if not 0 <= int(value) <= _MASK64:
                raise DomainError(f"{name} must be a 64-bit unsigned integer, got {value}")
            object.__setattr__(self, name, int(value))

    def raw_at(self, position: int, size: int) -> np.ndarray:
        """Raw 64-bit words ``position .. position+size-1``."""
        if size < 0:
            raise DomainError("size must be nonnegative")
        block, offset = divmod(int(position), _WORDS_PER_BLOCK)
        bitgen = np.random.Philox(key=np.array([self.seed, self.stream_id], dtype=np.uint64))
        if block:
            bitgen.advance(block)
        words = bitgen.random_raw(size + offset)
        return np.asarray(words, dtype=np.uint64)[offset:]

    def uniform_at(self, position: int, size: int) -> np.ndarray:
        """Doubles in [0, 1) on the 2**-53 grid, read at an explicit position."""
        words = self.raw_at(position, size)
        return (words >> np.uint64(11)).astype(np.float64) * _INV_2_53

    def uniform(self, size: int) -> tuple[np.ndarray, "RngStream"]:
        values = self.uniform_at(self.counter, size)
        return values, self.advance(size)

    def advance(self, n: int) -> "RngStream":
        return replace(self, counter=self.counter + int(n))

    def child(self, index: int) -> "RngStream":
        """Derive an independent sub-stream (counter reset to zero)."""
        mixed = _splitmix64(self.stream_id ^ _splitmix64(int(index) & _MASK64))
        return RngStream(self.seed, mixed, 0)

    def generator(self) -> np.random.Generator:
        """A numpy Generator positioned at this stream's counter.

        Convenient for distributions numpy already implements; the mapping
        from position to value is still fixed by (seed, stream_id, counter)
        as long as callers do not share the generator between tasks.
        """
        block, offset = divmod(self.counter, _WORDS_PER_BLOCK)
        bitgen = np.random.Philox(key=np.array([self.seed, self.stream_id], dtype=np.uint64))
        if block:
            bitgen.advance(block)
        if offset:
            bitgen.random_raw(offset)
        return np.random.Generator(bitgen)


def rng_derive(seed: int, stream_id: int = 0) -> RngStream:
    return RngStream(seed, stream_id, 0)


def rng_uniform(stream: RngStream) -> tuple[float, RngStream]:
    values, nxt = stream.uniform(1)
    return float(values[0]), nxt


def rng_uniform_range(stream: RngStream, a: float, b: float) -> tuple[float, RngStream]:
    if not a < b:
        raise DomainError(f"empty range [{a}, {b})")
    u, nxt = rng_uniform(stream)
    return _scale(u, a, b), nxt


def uniform_range(stream: RngStream, a: float, b: float, size: int) -> tuple[np.ndarray, RngStream]:
    """Vectorised ``rng_uniform_range``."""
    if not a < b:
        raise DomainError(f"empty range [{a}, {b})")
    u, nxt = stream.uniform(size)
    return _scale(u, a, b), nxt


def _scale(u, a, b):
    out = a + (b - a) * u
    # a + (b-a)*u can round up to b for u close to 1
    return np.minimum(out, np.nextafter(b, a)) if isinstance(out, np.ndarray) else min(out, np.nextafter(b, a))


def as_stream(seed_or_stream) -> RngStream:
    """Accept an ``RngStream`` or a plain integer seed."""
    if isinstance(seed_or_stream, RngStream):
        return seed_or_stream
    return rng_derive(int(seed_or_stream))
