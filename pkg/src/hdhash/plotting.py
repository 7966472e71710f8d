"""Figure rendering for benchmark reports.

Each renderer takes report rows (or a profile matrix) and writes a PNG
next to the CSV the CLI emits. Aggregation across seeds is by median,
matching how the benchmarks are read.
"""

from __future__ import annotations

from statistics import median

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .emulator import ReportRow

_ORDER = ("modular", "consistent", "rendezvous", "hd")


def _strategies(rows: list[ReportRow]) -> list[str]:
    present = {r.strategy for r in rows}
    return [s for s in _ORDER if s in present] + sorted(present - set(_ORDER))


def _median_by(rows: list[ReportRow], metric: str, key) -> dict:
    groups: dict = {}
    for r in rows:
        if r.metric == metric:
            groups.setdefault(key(r), []).append(r.value)
    return {k: median(v) for k, v in groups.items()}


def render_timing(rows: list[ReportRow], path: str) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for strategy in _strategies(rows):
        med = _median_by(
            [r for r in rows if r.strategy == strategy], "latency_ns", lambda r: r.servers
        )
        ks = sorted(med)
        ax.plot(ks, [med[k] / 1e3 for k in ks], marker="o", label=strategy)
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("servers")
    ax.set_ylabel("mean lookup time (us)")
    ax.set_title("Request handling time vs. pool size")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_robustness(rows: list[ReportRow], path: str) -> None:
    server_counts = sorted({r.servers for r in rows})
    fig, axes = plt.subplots(
        1, len(server_counts), figsize=(3.2 * len(server_counts), 3.4), squeeze=False
    )
    for ax, k in zip(axes[0], server_counts):
        sub = [r for r in rows if r.servers == k]
        for strategy in _strategies(sub):
            med = _median_by(
                [r for r in sub if r.strategy == strategy], "mismatch", lambda r: r.noise_bits
            )
            noise = sorted(med)
            ax.plot(noise, [100 * med[n] for n in noise], marker="o", label=strategy)
        ax.set_title(f"{k} servers")
        ax.set_xlabel("bit errors")
        ax.set_ylabel("mismatched requests (%)")
    axes[0][-1].legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_uniformity(rows: list[ReportRow], path: str) -> None:
    server_counts = sorted({r.servers for r in rows})
    fig, axes = plt.subplots(
        1, len(server_counts), figsize=(3.2 * len(server_counts), 3.4), squeeze=False
    )
    for ax, k in zip(axes[0], server_counts):
        sub = [r for r in rows if r.servers == k]
        for strategy in _strategies(sub):
            med = _median_by(
                [r for r in sub if r.strategy == strategy], "chi_squared", lambda r: r.noise_bits
            )
            noise = sorted(med)
            ax.plot(noise, [med[n] for n in noise], marker="o", label=strategy)
        ax.set_yscale("log")
        ax.set_title(f"{k} servers")
        ax.set_xlabel("bit errors")
        ax.set_ylabel("chi-squared vs. uniform")
    axes[0][-1].legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_remap(rows: list[ReportRow], path: str) -> None:
    strategies = _strategies(rows)
    server_counts = sorted({r.servers for r in rows})
    width = 0.8 / max(len(strategies), 1)
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6))
    for ax, metric, title in zip(axes, ("remap_leave", "remap_join"), ("server leave", "server join")):
        for si, strategy in enumerate(strategies):
            med = _median_by(
                [r for r in rows if r.strategy == strategy], metric, lambda r: r.servers
            )
            xs = np.arange(len(server_counts)) + si * width
            ax.bar(xs, [100 * med.get(k, 0.0) for k in server_counts], width, label=strategy)
        ax.set_xticks(np.arange(len(server_counts)) + 0.4 - width / 2)
        ax.set_xticklabels([str(k) for k in server_counts])
        ax.set_xlabel("servers")
        ax.set_ylabel("remapped requests (%)")
        ax.set_title(title)
    axes[1].legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_profile(matrix: np.ndarray, kind: str, path: str) -> None:
    fig, ax = plt.subplots(figsize=(4.6, 4))
    im = ax.imshow(matrix, vmin=-1.0, vmax=1.0, cmap="viridis")
    ax.set_xlabel("hypervector j")
    ax.set_ylabel("hypervector i")
    ax.set_title(f"{kind} basis similarity profile")
    fig.colorbar(im, ax=ax, label="similarity")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
