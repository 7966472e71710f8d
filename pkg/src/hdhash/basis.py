"""Basis hypervector sets: random, level, and circular.

Random sets encode categorical symbols (mutually quasi-orthogonal).
Level sets encode scalars: a random start vector is transformed by
flipping a fixed budget of fresh bit positions at each step, so
similarity falls off linearly with index distance and first-vs-last is
quasi-orthogonal.

Circular sets close the level construction into a ring. Half the set is
produced by forward XOR transformations t_1..t_{n/2}; the second half
replays the queued transformations in FIFO order, which walks the chain
back to one step from the start:

    c_1      random
    c_{i+1}  = c_i ⊕ t_i            i = 1..n/2      (forward)
    c_{j}    = c_{j-1} ⊕ t_{j-n/2-1} j = n/2+2..n    (backward)

leaving c_n = c_1 ⊕ t_{n/2}. Each transformation flips floor(d/n) bit
positions and all transformations use pairwise disjoint positions, so
Hamming distance between members is exactly floor(d/n) times their
circular index distance: the similarity profile is an exact linear
function of ring distance, and the half-circle distance matches the
expected distance between independent random vectors.

Odd cardinalities are built by generating a ring of 2n and keeping
every other member (parent indices 0, 2, 4, ..., 2n-2).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .hypervector import Hypervector, Rng, _nbytes, _pad_mask

__all__ = [
    "BasisSet",
    "random_set",
    "level_set",
    "circular_set",
    "similarity_profile",
]

_KINDS = ("random", "level", "circular")


@dataclass(frozen=True)
class BasisSet:
    """An ordered set of ``n`` hypervectors of dimension ``d``.

    ``packed`` holds one vector per row in the packed-bit layout; rows
    are exposed zero-indexed through ``__getitem__`` without copying.
    """

    kind: str
    n: int
    d: int
    seed: int
    packed: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.packed.shape != (self.n, _nbytes(self.d)):
            raise ValueError("packed matrix shape does not match (n, ceil(d/8))")
        self.packed.flags.writeable = False

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> Hypervector:
        if not 0 <= i < self.n:
            raise IndexError(f"index {i} out of range for basis of size {self.n}")
        return Hypervector(self.packed[i], self.d)

    @property
    def vectors(self) -> list[Hypervector]:
        return [self[i] for i in range(self.n)]

    def to_bytes(self) -> bytes:
        """Header (kind, n, d, seed) followed by each vector's layout."""
        head = struct.pack(
            "<BIIQ", _KINDS.index(self.kind), self.n, self.d, self.seed & (2**64 - 1)
        )
        return head + b"".join(self[i].to_bytes() for i in range(self.n))

    @classmethod
    def from_bytes(cls, data: bytes) -> "BasisSet":
        kind_id, n, d, seed = struct.unpack_from("<BIIQ", data)
        if kind_id >= len(_KINDS):
            raise ValueError(f"unknown basis kind id {kind_id}")
        off = struct.calcsize("<BIIQ")
        step = 4 + _nbytes(d)
        rows = np.empty((n, _nbytes(d)), dtype=np.uint8)
        for i in range(n):
            hv = Hypervector.from_bytes(data[off + i * step : off + (i + 1) * step])
            if hv.dim != d:
                raise ValueError("vector dimension does not match header")
            rows[i] = hv.bits
        return cls(kind=_KINDS[kind_id], n=n, d=d, seed=seed, packed=rows)


def _flip_into(row: np.ndarray, positions: np.ndarray) -> None:
    """XOR the given bit positions into a packed row, in place."""
    np.bitwise_xor.at(row, positions >> 3, np.uint8(1) << (positions & 7).astype(np.uint8))


def _random_row(d: int, rng: Rng) -> np.ndarray:
    raw = rng.generator.integers(0, 256, size=_nbytes(d), dtype=np.uint8)
    raw[-1] &= _pad_mask(d)
    return raw


def random_set(n: int, d: int, rng: Rng) -> BasisSet:
    """``n`` independent uniformly random hypervectors."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if d < 1:
        raise ValueError("d must be >= 1")
    rows = np.empty((n, _nbytes(d)), dtype=np.uint8)
    for i in range(n):
        rows[i] = _random_row(d, rng)
    return BasisSet(kind="random", n=n, d=d, seed=rng.seed, packed=rows)


def level_set(n: int, d: int, rng: Rng) -> BasisSet:
    """Linearly correlated set: each step flips floor(d / (2(n-1))) fresh bits.

    The flip schedule draws from a single permutation of the bit
    positions, so distances telescope exactly and the first and last
    vectors end up quasi-orthogonal (total budget ~d/2).
    """
    if n < 2:
        raise ValueError("level sets need n >= 2")
    if d < n:
        raise ValueError(f"d must be >= n (got d={d}, n={n})")
    per_step = d // (2 * (n - 1))
    schedule = rng.generator.permutation(d)[: per_step * (n - 1)]
    rows = np.empty((n, _nbytes(d)), dtype=np.uint8)
    rows[0] = _random_row(d, rng)
    for i in range(1, n):
        rows[i] = rows[i - 1]
        _flip_into(rows[i], schedule[(i - 1) * per_step : i * per_step])
    return BasisSet(kind="level", n=n, d=d, seed=rng.seed, packed=rows)


def circular_set(n: int, d: int, rng: Rng) -> BasisSet:
    """Cyclically correlated set of ``n`` hypervectors.

    Even ``n`` uses the forward/backward transformation queue directly;
    odd ``n`` (>= 3, requiring d >= 2n) subsamples a ring of 2n at
    stride two, which preserves circular correlation.
    """
    if n < 2:
        raise ValueError("circular sets need n >= 2")
    if n % 2:
        if d < 2 * n:
            raise ValueError(f"odd-cardinality circular sets need d >= 2n (got d={d}, n={n})")
        parent = _circular_even(2 * n, d, rng)
        rows = parent[::2].copy()
        return BasisSet(kind="circular", n=n, d=d, seed=rng.seed, packed=rows)
    if d < n:
        raise ValueError(f"d must be >= n (got d={d}, n={n})")
    return BasisSet(kind="circular", n=n, d=d, seed=rng.seed, packed=_circular_even(n, d, rng))


def _circular_even(n: int, d: int, rng: Rng) -> np.ndarray:
    half = n // 2
    per_step = d // n
    # One draw of (n/2) * floor(d/n) <= d/2 distinct positions feeds every
    # transformation, which makes member distances exact multiples of per_step.
    schedule = rng.generator.permutation(d)[: per_step * half]
    rows = np.empty((n, _nbytes(d)), dtype=np.uint8)
    rows[0] = _random_row(d, rng)
    for i in range(half):  # forward: rows 1..n/2
        rows[i + 1] = rows[i]
        _flip_into(rows[i + 1], schedule[i * per_step : (i + 1) * per_step])
    for j in range(half - 1):  # backward: rows n/2+1..n-1 replay the queue
        rows[half + 1 + j] = rows[half + j]
        _flip_into(rows[half + 1 + j], schedule[j * per_step : (j + 1) * per_step])
    return rows


def similarity_profile(basis: BasisSet) -> np.ndarray:
    """Pairwise similarity matrix: symmetric with a unit diagonal."""
    n, d = basis.n, basis.d
    ham = np.empty((n, n), dtype=np.int64)
    for i in range(n):
        ham[i] = np.bitwise_count(np.bitwise_xor(basis.packed, basis.packed[i])).sum(axis=1)
    return 1.0 - 2.0 * ham / d
