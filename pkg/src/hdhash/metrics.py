"""Assignment-map statistics: mismatch rate, chi-squared, remap fraction."""

from __future__ import annotations

from typing import Sequence

__all__ = ["AssignmentMap", "mismatch_rate", "chi_squared", "remap_fraction"]

# Ordered (request, server) pairs, in request generation order.
AssignmentMap = Sequence[tuple[bytes, bytes]]


def _diff_fraction(a: AssignmentMap, b: AssignmentMap) -> float:
    if len(a) != len(b):
        raise ValueError(f"assignment maps cover {len(a)} vs {len(b)} requests")
    if not a:
        raise ValueError("assignment maps are empty")
    changed = 0
    for (req_a, srv_a), (req_b, srv_b) in zip(a, b):
        if req_a != req_b:
            raise ValueError("assignment maps cover different request sequences")
        if srv_a != srv_b:
            changed += 1
    return changed / len(a)


def mismatch_rate(clean: AssignmentMap, corrupted: AssignmentMap) -> float:
    """Fraction of requests routed differently than the clean oracle."""
    return _diff_fraction(clean, corrupted)


def remap_fraction(before: AssignmentMap, after: AssignmentMap) -> float:
    """Fraction of requests whose server changed across a resize."""
    return _diff_fraction(before, after)


def chi_squared(counts: Sequence[int], total_requests: int, total_servers: int) -> float:
    """Pearson goodness-of-fit statistic against the uniform expectation.

    The expectation is the exact ratio total_requests / total_servers.
    """
    if total_servers < 1:
        raise ValueError("total_servers must be >= 1")
    if len(counts) != total_servers:
        raise ValueError(f"expected {total_servers} counts, got {len(counts)}")
    if sum(counts) != total_requests:
        raise ValueError("counts do not sum to total_requests")
    if total_requests == 0:
        raise ValueError("uniform expectation is zero: no requests")
    expected = total_requests / total_servers
    return sum((c - expected) ** 2 for c in counts) / expected
