"""Packed binary hypervectors and their primitive operations.

A hypervector is a fixed-dimension bit vector stored little-endian
packed (bit ``i`` lives at byte ``i // 8``, bit position ``i % 8``).
Padding bits in the final byte are always zero, which keeps popcounts
and the serialized byte layout well defined.

Similarity is the bipolar cosine:

    sim(a, b) = 1 - 2 * hamming(a, b) / d

which equals the cosine of the +/-1 representation of the two binary
vectors, so rankings agree with inverse-Hamming rankings exactly.
"""

from __future__ import annotations

import struct

import numpy as np

__all__ = [
    "Rng",
    "Hypervector",
    "random_hypervector",
    "bind",
    "hamming",
    "similarity",
    "popcount",
    "flip_random_bits",
]

DEFAULT_DIM = 10_000


class Rng:
    """Deterministic random source: a seed plus a PCG64 generator.

    Identical seeds produce identical streams on every platform. An Rng
    is single-owner; code that runs in parallel must split seeds
    explicitly instead of sharing one instance.
    """

    __slots__ = ("seed", "generator")

    def __init__(self, seed: int):
        self.seed = int(seed)
        self.generator = np.random.Generator(np.random.PCG64(self.seed))

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed})"


def _nbytes(dim: int) -> int:
    return (dim + 7) // 8


def _pad_mask(dim: int) -> int:
    """Byte mask that zeroes padding bits of the final byte."""
    rem = dim % 8
    return 0xFF if rem == 0 else (1 << rem) - 1


class Hypervector:
    """Immutable packed bit vector of dimension ``dim``."""

    __slots__ = ("bits", "dim")

    def __init__(self, bits: np.ndarray, dim: int):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.shape != (_nbytes(dim),):
            raise ValueError(
                f"expected {_nbytes(dim)} bytes for dimension {dim}, got {bits.shape}"
            )
        if bits[-1] & ~_pad_mask(dim) & 0xFF:
            raise ValueError("padding bits beyond the dimension must be zero")
        bits = bits.copy() if bits.flags.writeable else bits
        bits.flags.writeable = False
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "dim", dim)

    def __setattr__(self, name, value):  # immutability guard
        raise AttributeError("Hypervector is immutable")

    @classmethod
    def zeros(cls, dim: int) -> "Hypervector":
        return cls(np.zeros(_nbytes(dim), dtype=np.uint8), dim)

    @classmethod
    def from_bit_array(cls, bits01: np.ndarray) -> "Hypervector":
        """Build from an array of 0/1 values, bit 0 first."""
        bits01 = np.asarray(bits01, dtype=np.uint8)
        packed = np.packbits(bits01, bitorder="little")
        return cls(packed, len(bits01))

    def to_bit_array(self) -> np.ndarray:
        """Unpack to an array of 0/1 values of length ``dim``."""
        return np.unpackbits(self.bits, count=self.dim, bitorder="little")

    def get_bit(self, i: int) -> int:
        if not 0 <= i < self.dim:
            raise IndexError(f"bit index {i} out of range for dimension {self.dim}")
        return (int(self.bits[i >> 3]) >> (i & 7)) & 1

    def to_bytes(self) -> bytes:
        """Serialize: dimension as little-endian u32, then the packed bytes."""
        return struct.pack("<I", self.dim) + self.bits.tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "Hypervector":
        if len(data) < 4:
            raise ValueError("truncated hypervector: missing dimension header")
        (dim,) = struct.unpack_from("<I", data)
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        payload = data[4 : 4 + _nbytes(dim)]
        if len(payload) != _nbytes(dim):
            raise ValueError("truncated hypervector payload")
        return cls(np.frombuffer(payload, dtype=np.uint8), dim)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Hypervector):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash((self.dim, self.bits.tobytes()))

    def __repr__(self) -> str:
        return f"Hypervector(dim={self.dim}, ones={popcount(self)})"


def random_hypervector(dim: int, rng: Rng) -> Hypervector:
    """Sample each bit independently and uniformly from {0, 1}."""
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    raw = rng.generator.integers(0, 256, size=_nbytes(dim), dtype=np.uint8)
    raw[-1] &= _pad_mask(dim)
    return Hypervector(raw, dim)


def _check_dims(a: Hypervector, b: Hypervector) -> None:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} != {b.dim}")


def bind(a: Hypervector, b: Hypervector) -> Hypervector:
    """Bitwise XOR. Associative, commutative, and self-inverse."""
    _check_dims(a, b)
    return Hypervector(np.bitwise_xor(a.bits, b.bits), a.dim)


def hamming(a: Hypervector, b: Hypervector) -> int:
    """Number of positions where the two vectors differ."""
    _check_dims(a, b)
    return int(np.bitwise_count(np.bitwise_xor(a.bits, b.bits)).sum())


def popcount(v: Hypervector) -> int:
    """Number of set bits."""
    return int(np.bitwise_count(v.bits).sum())


def similarity(a: Hypervector, b: Hypervector) -> float:
    """Bipolar cosine similarity in [-1, 1]: 1 - 2 * hamming / d."""
    return 1.0 - 2.0 * hamming(a, b) / a.dim


def flip_random_bits(v: Hypervector, count: int, rng: Rng) -> Hypervector:
    """Invert exactly ``count`` distinct uniformly chosen bit positions.

    Sampling is without replacement, so the result is always at Hamming
    distance exactly ``count`` from the input.
    """
    if not 0 <= count <= v.dim:
        raise ValueError(f"flip count {count} out of range [0, {v.dim}]")
    out = v.bits.copy()
    if count:
        positions = rng.generator.choice(v.dim, size=count, replace=False)
        np.bitwise_xor.at(out, positions >> 3, np.uint8(1) << (positions & 7).astype(np.uint8))
    return Hypervector(out, v.dim)
