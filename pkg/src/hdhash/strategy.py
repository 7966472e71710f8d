"""Dynamic hash table strategies: modular, consistent, rendezvous, HD.

All four implement the same interface: servers join and leave, requests
look up a server, and ``corruption_surface`` exposes the strategy's
stored per-server state as a byte-addressable view for fault injection.

Lookups are deterministic given table state; score ties are always
broken toward the lexicographically smallest server id.
"""

from __future__ import annotations

import hashlib
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .basis import circular_set
from .faults import CorruptionSurface
from .hypervector import Hypervector, Rng, _nbytes

__all__ = [
    "hash64",
    "HashTable",
    "ModularTable",
    "ConsistentTable",
    "RendezvousTable",
    "HdTable",
    "HdTableConfig",
    "make_table",
    "STRATEGY_NAMES",
]

_MASK64 = (1 << 64) - 1

# Ring positions use the classic 32-bit width, stored in 64-bit entries.
# See the consistent-hashing notes in the README: corrupting the unused
# high bytes of an entry throws it out of the position band, which is
# what makes a live ring degrade under memory errors.
RING_POSITION_BITS = 32
_RING_MASK = (1 << RING_POSITION_BITS) - 1


def hash64(payload: bytes | str, seed: int = 0) -> int:
    """Deterministic, well-distributed 64-bit hash of a byte string."""
    if isinstance(payload, str):
        payload = payload.encode("utf-8")
    key = (seed & _MASK64).to_bytes(8, "little")
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8, key=key).digest(), "little")


def _as_id(value: bytes | bytearray | str) -> bytes:
    if isinstance(value, str):
        value = value.encode("utf-8")
    elif isinstance(value, bytearray):
        value = bytes(value)
    if not value:
        raise ValueError("ids and request keys must be non-empty")
    return value


class HashTable(ABC):
    """Interface contract shared by every strategy.

    A table is single-writer: ``join``/``leave`` must not run
    concurrently with lookups. ``batch_lookup`` is order-preserving and
    bit-identical to looking requests up one at a time.
    """

    name: str = "?"

    @abstractmethod
    def join(self, server: bytes | str) -> None:
        """Add a server. Duplicate joins are errors."""

    @abstractmethod
    def leave(self, server: bytes | str) -> None:
        """Remove a server. Unknown ids are errors."""

    @abstractmethod
    def lookup(self, request: bytes | str) -> bytes:
        """Map a request to a server id. Empty tables are errors."""

    @abstractmethod
    def server_count(self) -> int: ...

    @abstractmethod
    def stored_ids(self) -> list[bytes]:
        """Current stored server identities, reflecting any corruption."""

    @abstractmethod
    def corruption_surface(self) -> CorruptionSurface:
        """Live byte-addressable view of the stored per-server state.

        Views are invalidated by the next join/leave.
        """

    def batch_lookup(self, requests: Sequence[bytes | str]) -> list[bytes]:
        return [self.lookup(r) for r in requests]

    def _require_nonempty(self) -> None:
        if self.server_count() == 0:
            raise LookupError(f"{self.name} table is empty")


class ModularTable(HashTable):
    """index = hash(request) mod k, resolved through a 64-bit slot array.

    The slot array (identity permutation while clean) is the stored
    state; corrupted entries are wrapped modulo the server count so a
    damaged slot still resolves to some server.
    """

    name = "modular"

    def __init__(self, seed: int = 0):
        self.seed = seed
        self._ids: list[bytes] = []
        self._slots = np.empty(0, dtype=np.uint64)

    def join(self, server: bytes | str) -> None:
        sid = _as_id(server)
        if sid in self._ids:
            raise ValueError(f"duplicate join: {sid!r}")
        self._ids.append(sid)
        self._slots = np.arange(len(self._ids), dtype=np.uint64)

    def leave(self, server: bytes | str) -> None:
        sid = _as_id(server)
        try:
            self._ids.remove(sid)
        except ValueError:
            raise KeyError(f"unknown server: {sid!r}") from None
        self._slots = np.arange(len(self._ids), dtype=np.uint64)

    def lookup(self, request: bytes | str) -> bytes:
        self._require_nonempty()
        k = len(self._ids)
        slot = hash64(_as_id(request), self.seed) % k
        return self._ids[int(self._slots[slot]) % k]

    def server_count(self) -> int:
        return len(self._ids)

    def stored_ids(self) -> list[bytes]:
        return list(self._ids)

    def corruption_surface(self) -> CorruptionSurface:
        return CorruptionSurface([(self._slots.view(np.uint8), 64 * len(self._ids))])


class ConsistentTable(HashTable):
    """Servers and requests share a circular 32-bit position space.

    A request is served by the first server at or clockwise-after its
    position. The lookup computes that successor as the rank of the
    request position (count of server positions below it) over the
    stored position array -- on a sorted array this is exactly the
    binary-search lower bound, and it is what a batched emulator
    evaluates; the array is never re-sorted after corruption.
    """

    name = "consistent"

    def __init__(self, seed: int = 0):
        self.seed = seed
        self._positions = np.empty(0, dtype=np.uint64)
        self._ring_ids: list[bytes] = []

    def _position(self, payload: bytes) -> int:
        return hash64(payload, self.seed) & _RING_MASK

    def join(self, server: bytes | str) -> None:
        sid = _as_id(server)
        if sid in self._ring_ids:
            raise ValueError(f"duplicate join: {sid!r}")
        pos = self._position(sid)
        i = int(np.searchsorted(self._positions, np.uint64(pos), side="left"))
        while i < len(self._ring_ids) and int(self._positions[i]) == pos and self._ring_ids[i] < sid:
            i += 1
        self._positions = np.insert(self._positions, i, np.uint64(pos))
        self._ring_ids.insert(i, sid)

    def leave(self, server: bytes | str) -> None:
        sid = _as_id(server)
        try:
            i = self._ring_ids.index(sid)
        except ValueError:
            raise KeyError(f"unknown server: {sid!r}") from None
        del self._ring_ids[i]
        self._positions = np.delete(self._positions, i)

    def lookup(self, request: bytes | str) -> bytes:
        self._require_nonempty()
        pos = self._position(_as_id(request))
        i = int(np.count_nonzero(self._positions < np.uint64(pos)))
        if i == len(self._ring_ids):
            i = 0
        return self._ring_ids[i]

    def batch_lookup(self, requests: Sequence[bytes | str]) -> list[bytes]:
        self._require_nonempty()
        k = len(self._ring_ids)
        out = []
        for r in requests:
            pos = self._position(_as_id(r))
            i = int(np.count_nonzero(self._positions < np.uint64(pos)))
            out.append(self._ring_ids[0 if i == k else i])
        return out

    def server_count(self) -> int:
        return len(self._ring_ids)

    def stored_ids(self) -> list[bytes]:
        return list(self._ring_ids)

    def corruption_surface(self) -> CorruptionSurface:
        return CorruptionSurface([(self._positions.view(np.uint8), 64 * len(self._ring_ids))])


class RendezvousTable(HashTable):
    """Highest-random-weight hashing over stored server id bytes.

    Every lookup hashes (server bytes, 0x00, request bytes) for each
    stored id and returns the top scorer, so the stored ids themselves
    are the state that memory errors can damage.
    """

    name = "rendezvous"

    def __init__(self, seed: int = 0):
        self.seed = seed
        self._ids: list[bytearray] = []

    def join(self, server: bytes | str) -> None:
        sid = _as_id(server)
        if any(bytes(b) == sid for b in self._ids):
            raise ValueError(f"duplicate join: {sid!r}")
        self._ids.append(bytearray(sid))

    def leave(self, server: bytes | str) -> None:
        sid = _as_id(server)
        for i, b in enumerate(self._ids):
            if bytes(b) == sid:
                del self._ids[i]
                return
        raise KeyError(f"unknown server: {sid!r}")

    def lookup(self, request: bytes | str) -> bytes:
        self._require_nonempty()
        key = _as_id(request)
        best_score = -1
        best_id = b""
        for stored in self._ids:
            sid = bytes(stored)
            score = hash64(sid + b"\x00" + key, self.seed)
            if score > best_score or (score == best_score and sid < best_id):
                best_score = score
                best_id = sid
        return best_id

    def server_count(self) -> int:
        return len(self._ids)

    def stored_ids(self) -> list[bytes]:
        return [bytes(b) for b in self._ids]

    def corruption_surface(self) -> CorruptionSurface:
        return CorruptionSurface([(b, 8 * len(b)) for b in self._ids])


@dataclass(frozen=True)
class HdTableConfig:
    """Shape of an HD table: ring cardinality, dimension, seed.

    ``n`` bounds the server count (joins keep k < n); values of at
    least 4x the expected server count keep encoding collisions rare.
    """

    n: int = 8192
    d: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("HD tables need n >= 2")
        if self.d < self.n:
            raise ValueError(f"HD tables need d >= n (got d={self.d}, n={self.n})")


class HdTable(HashTable):
    """Hash table over a shared circular hypervector ring.

    Servers and requests encode to ring members by hashed index; a
    request is served by the stored server vector with the highest
    similarity to the request encoding. Server encodings are copied
    into the table at join time, so corrupting those copies (and only
    those copies -- the shared ring is a constant) degrades lookups.
    """

    name = "hd"

    def __init__(self, config: HdTableConfig | None = None):
        self.config = config or HdTableConfig()
        n, d = self.config.n, self.config.d
        self._nbytes = _nbytes(d)
        self._stride = ((self._nbytes + 7) // 8) * 8  # rows padded for u64 views
        ring = circular_set(n, d, Rng(self.config.seed))
        self._ring = np.zeros((n, self._stride), dtype=np.uint8)
        self._ring[:, : self._nbytes] = ring.packed
        self._ring.flags.writeable = False
        self._ring_words = self._ring.view(np.uint64)
        self._ids: list[bytes] = []
        self._rows = np.zeros((0, self._stride), dtype=np.uint8)

    def encode_index(self, value: bytes | str) -> int:
        return hash64(_as_id(value), self.config.seed) % self.config.n

    def encode(self, value: bytes | str) -> Hypervector:
        """Ring member for a server id or request key."""
        return Hypervector(self._ring[self.encode_index(value), : self._nbytes], self.config.d)

    def join(self, server: bytes | str) -> None:
        sid = _as_id(server)
        if sid in self._ids:
            raise ValueError(f"duplicate join: {sid!r}")
        if len(self._ids) + 1 >= self.config.n:
            raise ValueError(
                f"HD table capacity exceeded: ring of {self.config.n} requires k < n"
            )
        self._rows = np.vstack([self._rows, self._ring[self.encode_index(sid)][None, :]])
        self._ids.append(sid)

    def leave(self, server: bytes | str) -> None:
        sid = _as_id(server)
        try:
            i = self._ids.index(sid)
        except ValueError:
            raise KeyError(f"unknown server: {sid!r}") from None
        del self._ids[i]
        self._rows = np.delete(self._rows, i, axis=0)

    def _winner(self, ring_index: int) -> bytes:
        """Most similar stored server vector; lexicographic tie-break."""
        dist = np.bitwise_count(
            np.bitwise_xor(self._rows.view(np.uint64), self._ring_words[ring_index])
        ).sum(axis=1)
        best = dist.min()
        candidates = np.flatnonzero(dist == best)
        if len(candidates) == 1:
            return self._ids[int(candidates[0])]
        return min(self._ids[int(i)] for i in candidates)

    def lookup(self, request: bytes | str) -> bytes:
        self._require_nonempty()
        return self._winner(self.encode_index(request))

    def batch_lookup(self, requests: Sequence[bytes | str]) -> list[bytes]:
        self._require_nonempty()
        winners: dict[int, bytes] = {}
        out = []
        for r in requests:
            idx = self.encode_index(r)
            got = winners.get(idx)
            if got is None:
                got = winners[idx] = self._winner(idx)
            out.append(got)
        return out

    def server_count(self) -> int:
        return len(self._ids)

    def stored_ids(self) -> list[bytes]:
        return list(self._ids)

    def corruption_surface(self) -> CorruptionSurface:
        d = self.config.d
        return CorruptionSurface(
            [(self._rows[i, : self._nbytes], d) for i in range(len(self._ids))]
        )


STRATEGY_NAMES = ("modular", "consistent", "rendezvous", "hd")


def make_table(
    name: str, seed: int = 0, hd_config: HdTableConfig | None = None
) -> HashTable:
    if name == "modular":
        return ModularTable(seed)
    if name == "consistent":
        return ConsistentTable(seed)
    if name == "rendezvous":
        return RendezvousTable(seed)
    if name == "hd":
        if hd_config is None:
            hd_config = HdTableConfig(seed=seed)
        elif hd_config.seed != seed:
            hd_config = HdTableConfig(n=hd_config.n, d=hd_config.d, seed=seed)
        return HdTable(hd_config)
    raise ValueError(f"unknown strategy {name!r}; expected one of {STRATEGY_NAMES}")
