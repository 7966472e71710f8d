"""Generator/hash-table emulation and the four experiment drivers.

A generator feeds a table join and leave control requests plus data
requests; drivers build on that to measure lookup latency, mismatch
under injected memory errors, per-server load uniformity, and remap
fractions across resizes. Everything except wall-clock latency is a
pure function of the configuration and its seeds.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

from .faults import NoiseSpec, inject, snapshot
from .hypervector import Rng
from .metrics import chi_squared, mismatch_rate, remap_fraction
from .strategy import HashTable, HdTableConfig, hash64, make_table

__all__ = [
    "InvariantViolation",
    "RequestStream",
    "ExperimentConfig",
    "ReportRow",
    "CSV_HEADER",
    "rows_to_csv",
    "run_schedule",
    "server_ids",
    "run_timing",
    "run_robustness",
    "run_uniformity",
    "run_remap",
]


class InvariantViolation(RuntimeError):
    """An experiment's internal soundness check failed."""


JOIN, LEAVE, LOOKUP = "join", "leave", "lookup"


@dataclass(frozen=True)
class RequestStream:
    """Deterministic schedule of control and data requests.

    Data request keys are decimal strings of seed-hashed counters, so
    any count of distinct pseudo-random keys replays identically for a
    given seed.
    """

    seed: int
    count: int

    def keys(self) -> list[bytes]:
        return [str(hash64(str(i), self.seed)).encode() for i in range(self.count)]

    def schedule(self, servers: list[bytes]) -> list[tuple[str, bytes]]:
        events = [(JOIN, sid) for sid in servers]
        events.extend((LOOKUP, key) for key in self.keys())
        return events


def run_schedule(
    table: HashTable, events: list[tuple[str, bytes]], batch: int = 256
) -> list[tuple[bytes, bytes]]:
    """Apply a schedule in order; returns (request, server) per lookup."""
    assignments: list[tuple[bytes, bytes]] = []
    pending: list[bytes] = []

    def flush():
        if pending:
            assignments.extend(zip(pending, table.batch_lookup(pending)))
            pending.clear()

    for kind, payload in events:
        if kind == JOIN:
            flush()
            table.join(payload)
        elif kind == LEAVE:
            flush()
            table.leave(payload)
        elif kind == LOOKUP:
            pending.append(payload)
            if len(pending) >= batch:
                flush()
        else:
            raise ValueError(f"unknown event kind {kind!r}")
    flush()
    return assignments


def server_ids(k: int) -> list[bytes]:
    return [f"server-{i}".encode() for i in range(1, k + 1)]


@dataclass(frozen=True)
class ExperimentConfig:
    """Knobs shared by all experiment drivers."""

    strategies: tuple[str, ...] = ("consistent", "rendezvous", "hd")
    server_counts: tuple[int, ...] = (64, 128, 256, 512)
    requests: int = 10_000
    d: int = 10_000
    n: int = 8192
    noise_bits: tuple[int, ...] = tuple(range(11))
    burst: int = 1
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    batch: int = 256

    def __post_init__(self):
        if self.requests < 1:
            raise ValueError("requests must be >= 1")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if self.burst < 1:
            raise ValueError("burst must be >= 1")
        if any(k < 1 for k in self.server_counts):
            raise ValueError("server counts must be >= 1")
        if any(b < 0 for b in self.noise_bits):
            raise ValueError("noise levels must be >= 0")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")
        if self.burst > 1 and any(b not in (0, self.burst) for b in self.noise_bits):
            raise ValueError(
                "a burst is one event: with burst > 1, noise levels must be 0 or the burst length"
            )

    def hd_config(self, seed: int) -> HdTableConfig:
        return HdTableConfig(n=self.n, d=self.d, seed=seed)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)


@dataclass(frozen=True)
class ReportRow:
    strategy: str
    servers: int
    noise_bits: int
    burst: int
    seed: int
    metric: str
    value: float

    def __post_init__(self):
        if self.metric in ("mismatch", "remap_leave", "remap_join") and not 0.0 <= self.value <= 1.0:
            raise InvariantViolation(f"{self.metric} outside [0, 1]: {self.value}")
        if self.metric == "latency_ns" and self.value <= 0.0:
            raise InvariantViolation(f"latency must be positive: {self.value}")


CSV_HEADER = "strategy,servers,noise_bits,burst,seed,metric,value"


def rows_to_csv(rows: list[ReportRow]) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r.strategy},{r.servers},{r.noise_bits},{r.burst},{r.seed},{r.metric},{r.value:.12g}"
        )
    return "\n".join(lines) + "\n"


def _build_table(strategy: str, config: ExperimentConfig, seed: int, k: int) -> HashTable:
    table = make_table(strategy, seed=seed, hd_config=config.hd_config(seed))
    for sid in server_ids(k):
        table.join(sid)
    return table


def _injection_rng(strategy: str, k: int, seed: int, burst: int) -> Rng:
    # One position stream per (strategy, k, seed, burst) cell; levels of a
    # noise sweep replay it, so flipped sets grow monotonically with level.
    return Rng(hash64(f"inject|{strategy}|{k}|{burst}", seed))


def _assignments(table: HashTable, keys: list[bytes], batch: int) -> list[tuple[bytes, bytes]]:
    out: list[tuple[bytes, bytes]] = []
    for i in range(0, len(keys), batch):
        chunk = keys[i : i + batch]
        out.extend(zip(chunk, table.batch_lookup(chunk)))
    return out


def run_timing(config: ExperimentConfig) -> list[ReportRow]:
    """Mean wall-time per lookup; joins and a warm-up batch excluded."""
    rows = []
    for strategy in config.strategies:
        for k in config.server_counts:
            for seed in config.seeds:
                table = _build_table(strategy, config, seed, k)
                keys = RequestStream(seed, config.requests).keys()
                table.batch_lookup(keys[: config.batch])  # warm-up
                t0 = time.perf_counter_ns()
                for i in range(0, len(keys), config.batch):
                    table.batch_lookup(keys[i : i + config.batch])
                elapsed = time.perf_counter_ns() - t0
                rows.append(
                    ReportRow(strategy, k, 0, 1, seed, "latency_ns", elapsed / len(keys))
                )
    return rows


def run_robustness(config: ExperimentConfig) -> list[ReportRow]:
    """Mismatch rate against a noise-free oracle, per noise level."""
    rows = []
    for strategy in config.strategies:
        for k in config.server_counts:
            for seed in config.seeds:
                keys = RequestStream(seed, config.requests).keys()
                oracle = _build_table(strategy, config, seed, k)
                oracle_bytes = oracle.corruption_surface().to_bytes()
                clean = _assignments(oracle, keys, config.batch)
                for noise in config.noise_bits:
                    table = snapshot(oracle)
                    spec = NoiseSpec(noise, config.burst if noise else 1)
                    inject(table.corruption_surface(), spec,
                           _injection_rng(strategy, k, seed, config.burst))
                    corrupted = _assignments(table, keys, config.batch)
                    rows.append(
                        ReportRow(strategy, k, noise, config.burst, seed,
                                  "mismatch", mismatch_rate(clean, corrupted))
                    )
                if oracle.corruption_surface().to_bytes() != oracle_bytes:
                    raise InvariantViolation("clean oracle mutated during the experiment")
    return rows


def _load_counts(table: HashTable, assignments: list[tuple[bytes, bytes]]) -> list[int]:
    """Per-server totals keyed by current stored identities.

    If corruption makes two stored ids byte-identical, their combined
    load lands on the first slot so the vector keeps one entry per
    server and sums to the request count.
    """
    tally: dict[bytes, int] = {}
    for _, srv in assignments:
        tally[srv] = tally.get(srv, 0) + 1
    counts = []
    for sid in table.stored_ids():
        counts.append(tally.pop(sid, 0))
    if tally:
        raise InvariantViolation("lookup returned an id that is not stored")
    return counts


def run_uniformity(config: ExperimentConfig) -> list[ReportRow]:
    """Pearson chi-squared of per-server load against uniform."""
    rows = []
    for strategy in config.strategies:
        for k in config.server_counts:
            for seed in config.seeds:
                keys = RequestStream(seed, config.requests).keys()
                base = _build_table(strategy, config, seed, k)
                for noise in config.noise_bits:
                    table = snapshot(base)
                    spec = NoiseSpec(noise, config.burst if noise else 1)
                    inject(table.corruption_surface(), spec,
                           _injection_rng(strategy, k, seed, config.burst))
                    assignments = _assignments(table, keys, config.batch)
                    counts = _load_counts(table, assignments)
                    rows.append(
                        ReportRow(strategy, k, noise, config.burst, seed, "chi_squared",
                                  chi_squared(counts, config.requests, k))
                    )
    return rows


def run_remap(config: ExperimentConfig) -> list[ReportRow]:
    """Remap fractions and disruption violations for leave and join.

    A leave violation is a request that moved without having been on
    the departed server (or stayed on it); a join violation is a
    request that moved anywhere other than onto the new server.
    """
    rows = []
    for strategy in config.strategies:
        for k in config.server_counts:
            if k < 2:
                raise ValueError("remap experiments need k >= 2")
            for seed in config.seeds:
                keys = RequestStream(seed, config.requests).keys()
                base = _build_table(strategy, config, seed, k)
                before = _assignments(base, keys, config.batch)

                leaver = snapshot(base)
                pick = Rng(hash64(f"depart|{strategy}|{k}", seed))
                departed = server_ids(k)[int(pick.generator.integers(0, k))]
                leaver.leave(departed)
                after_leave = _assignments(leaver, keys, config.batch)
                leave_violations = 0
                for (_, old), (_, new) in zip(before, after_leave):
                    if old == departed:
                        if new == old:
                            leave_violations += 1
                    elif new != old:
                        leave_violations += 1

                joiner = snapshot(base)
                fresh = f"server-{k + 1}".encode()
                joiner.join(fresh)
                after_join = _assignments(joiner, keys, config.batch)
                join_violations = sum(
                    1
                    for (_, old), (_, new) in zip(before, after_join)
                    if new != old and new != fresh
                )

                cell = (strategy, k, 0, 1, seed)
                rows.append(ReportRow(*cell, "remap_leave", remap_fraction(before, after_leave)))
                rows.append(ReportRow(*cell, "leave_violations", float(leave_violations)))
                rows.append(ReportRow(*cell, "remap_join", remap_fraction(before, after_join)))
                rows.append(ReportRow(*cell, "join_violations", float(join_violations)))
    return rows
