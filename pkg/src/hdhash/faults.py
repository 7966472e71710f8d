"""Memory-error modeling: bit flips and burst upsets in stored table state.

A ``CorruptionSurface`` is an ordered sequence of live byte buffers with
a declared bit length each; flipping surface bit ``i`` mutates the
owning table's state directly. ``inject`` writes either independent
single-bit upsets or one contiguous multi-bit burst into a surface.
"""

from __future__ import annotations

import copy
from bisect import bisect_right
from dataclasses import dataclass
from itertools import accumulate
from typing import Any, Sequence

import numpy as np

from .hypervector import Rng

__all__ = ["CorruptionSurface", "NoiseSpec", "inject", "snapshot"]


class CorruptionSurface:
    """Byte-addressable view over a strategy's stored per-server state.

    Segments are (buffer, bit_length) pairs where the buffer is a live
    bytearray or uint8 array; bit ``i`` of a segment lives at byte
    ``i // 8``, bit ``i % 8``. Bits past a segment's declared length
    (packing padding) are not part of the surface.
    """

    def __init__(self, segments: Sequence[tuple[Any, int]]):
        self._segments = list(segments)
        self._starts = [0] + list(accumulate(nbits for _, nbits in self._segments))

    @property
    def total_bits(self) -> int:
        return self._starts[-1]

    def flip_bit(self, index: int) -> None:
        """Invert one live bit, addressed over the whole surface."""
        if not 0 <= index < self.total_bits:
            raise IndexError(f"bit {index} out of range for {self.total_bits}-bit surface")
        seg = bisect_right(self._starts, index) - 1
        buf, _ = self._segments[seg]
        local = index - self._starts[seg]
        buf[local >> 3] ^= 1 << (local & 7)

    def to_bytes(self) -> bytes:
        """Serialize segment by segment, padding bits masked to zero."""
        parts = []
        for buf, nbits in self._segments:
            raw = bytearray(bytes(buf)[: (nbits + 7) // 8])
            if nbits % 8:
                raw[-1] &= (1 << (nbits % 8)) - 1
            parts.append(bytes(raw))
        return b"".join(parts)


@dataclass(frozen=True)
class NoiseSpec:
    """How much corruption to apply.

    ``burst_length`` 1 means independent single-bit upsets; greater
    than 1 means one multi-cell upset of that many contiguous bits, in
    which case ``total_flips`` must equal the burst length.
    """

    total_flips: int
    burst_length: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.total_flips < 0:
            raise ValueError("total_flips must be >= 0")
        if self.burst_length < 1:
            raise ValueError("burst_length must be >= 1")
        if self.burst_length > 1 and self.total_flips not in (0, self.burst_length):
            raise ValueError("a burst is one event: total_flips must equal burst_length")


def _sample_distinct_bits(total: int, count: int, rng: Rng) -> list[int]:
    """Uniform sample of distinct bit positions via partial Fisher-Yates.

    Drawing is sequential, so for a fixed seed the positions chosen for
    a smaller count are a prefix of those for a larger count. Noise
    sweeps that reuse a seed therefore grow the flipped set
    monotonically across levels.
    """
    swaps: dict[int, int] = {}
    picks = []
    for i in range(count):
        j = int(rng.generator.integers(i, total))
        vi = swaps.get(i, i)
        vj = swaps.get(j, j)
        swaps[i], swaps[j] = vj, vi
        picks.append(vj)
    return picks


def inject(surface: CorruptionSurface, spec: NoiseSpec, rng: Rng | None = None) -> None:
    """Flip bits in live table state according to the noise spec."""
    if rng is None:
        rng = Rng(spec.seed)
    if spec.total_flips == 0:
        return
    if spec.total_flips > surface.total_bits:
        raise ValueError(
            f"cannot flip {spec.total_flips} bits of a {surface.total_bits}-bit surface"
        )
    if spec.burst_length > 1:
        start = int(rng.generator.integers(0, surface.total_bits - spec.burst_length + 1))
        for b in range(start, start + spec.burst_length):
            surface.flip_bit(b)
    else:
        for b in _sample_distinct_bits(surface.total_bits, spec.total_flips, rng):
            surface.flip_bit(b)


def snapshot(table):
    """Deep clean-state copy: corrupting the original never touches it."""
    return copy.deepcopy(table)
