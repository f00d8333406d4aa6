"""Connected Erdos-Renyi ensembles and the statistics of detection on them."""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .detector import DetectConfig, detect
from .graph import Graph


class GenerationError(RuntimeError):
    pass


def _seed32(*entropy) -> int:
    return int(np.random.SeedSequence([int(e) for e in entropy]).generate_state(1)[0])


def gen_er_connected(n_nodes: int, avg_degree: float, seed=0, model: str = "gnp",
                     max_attempts: int = 100_000) -> Graph:
    """Sample a connected Erdos-Renyi graph by rejection.

    ``model="gnp"`` draws each pair with ``p = avg_degree / (n - 1)``;
    ``model="gnm"`` draws exactly ``round(n * avg_degree / 2)`` edges. The
    number of rejected samples is stored on the graph as ``rejected``.
    """
    if n_nodes < 2:
        raise ValueError("need at least two nodes")
    if not 0 < avg_degree <= n_nodes - 1:
        raise ValueError("avg_degree must lie in (0, n - 1]")
    s = _seed32(seed)
    if model == "gnp":
        u, v, attempts = _kernels.sample_connected_gnp(
            n_nodes, avg_degree / (n_nodes - 1), s, max_attempts)
    elif model == "gnm":
        m = int(round(n_nodes * avg_degree / 2))
        if m < n_nodes - 1:
            raise GenerationError(f"{m} edges cannot connect {n_nodes} nodes")
        u, v, attempts = _kernels.sample_connected_gnm(n_nodes, m, s, max_attempts)
    else:
        raise ValueError(f"unknown model {model!r}")
    if attempts < 0:
        raise GenerationError(
            f"no connected sample in {max_attempts} attempts "
            f"(n={n_nodes}, avg_degree={avg_degree})")
    g = Graph(n_nodes, np.column_stack([u, v]))
    g.rejected = attempts - 1
    return g


@dataclass
class EnsembleStats:
    size_histogram: dict[int, int] = field(default_factory=dict)
    q_samples: list[float] = field(default_factory=list)
    edge_counts: list[int] = field(default_factory=list)
    rejected_disconnected: int = 0

    @property
    def sample_count(self) -> int:
        return len(self.q_samples)

    @property
    def mean_q(self) -> float:
        return float(np.mean(self.q_samples)) if self.q_samples else float("nan")

    @property
    def stddev_defined(self) -> bool:
        return self.sample_count > 1

    @property
    def stddev_q(self) -> float:
        """Sample standard deviation; 0 when there is a single sample."""
        if not self.stddev_defined:
            return 0.0
        return float(np.std(self.q_samples, ddof=1))

    def add(self, q: float, sizes, edge_count: int, rejected: int) -> None:
        self.q_samples.append(float(q))
        self.edge_counts.append(int(edge_count))
        self.rejected_disconnected += int(rejected)
        for s in sizes:
            self.size_histogram[int(s)] = self.size_histogram.get(int(s), 0) + 1

    def merge(self, other: EnsembleStats) -> EnsembleStats:
        out = EnsembleStats(dict(self.size_histogram), self.q_samples + other.q_samples,
                            self.edge_counts + other.edge_counts,
                            self.rejected_disconnected + other.rejected_disconnected)
        for s, c in other.size_histogram.items():
            out.size_histogram[s] = out.size_histogram.get(s, 0) + c
        return out

    def summary(self) -> dict:
        return {
            "count": self.sample_count,
            "mean_q": self.mean_q,
            "stddev_q": self.stddev_q,
            "stddev_defined": self.stddev_defined,
            "communities": sum(self.size_histogram.values()),
            "rejected_disconnected": self.rejected_disconnected,
        }


def _network_seeds(seed: int, index: int) -> tuple[int, int]:
    graph_seed, detect_seed = np.random.SeedSequence([int(seed), int(index)]).generate_state(2)
    return int(graph_seed), int(detect_seed)


def _run_chunk(args):
    indices, n_nodes, avg_degree, cfgs, seed, model, max_attempts = args
    out = []
    for i in indices:
        gseed, dseed = _network_seeds(seed, i)
        g = gen_er_connected(n_nodes, avg_degree, gseed, model, max_attempts)
        row = []
        for cfg in cfgs:
            res = detect(g, cfg, dseed)
            row.append((res.modularity, res.partition.community_sizes.tolist()))
        out.append((g.edge_count, g.rejected, row))
    return out


def run_paired_ensembles(count: int, n_nodes: int, avg_degree: float, cfgs,
                         seed: int = 0, n_jobs: int = 1, model: str = "gnp",
                         max_attempts: int = 100_000) -> list[EnsembleStats]:
    """Detect communities on ``count`` networks once per config.

    Every config sees the same networks and the same detection seed per
    network, so differences between configs are paired. Results do not
    depend on ``n_jobs``.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    cfgs = list(cfgs)
    indices = list(range(count))
    if n_jobs > 1:
        chunks = [indices[j::n_jobs] for j in range(n_jobs)]
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            parts = list(ex.map(_run_chunk, [(c, n_nodes, avg_degree, cfgs, seed, model,
                                              max_attempts) for c in chunks]))
        rows = [None] * count
        for c, part in zip(chunks, parts):
            for i, r in zip(c, part):
                rows[i] = r
    else:
        rows = _run_chunk((indices, n_nodes, avg_degree, cfgs, seed, model, max_attempts))
    stats = [EnsembleStats() for _ in cfgs]
    for edge_count, rejected, row in rows:
        for st, (q, sizes) in zip(stats, row):
            st.add(q, sizes, edge_count, rejected)
    return stats


def run_ensemble(count: int, n_nodes: int, avg_degree: float, cfg: DetectConfig | None = None,
                 seed: int = 0, n_jobs: int = 1, model: str = "gnp",
                 max_attempts: int = 100_000) -> EnsembleStats:
    """One detection per generated network, accumulated into
    :class:`EnsembleStats`."""
    return run_paired_ensembles(count, n_nodes, avg_degree, [cfg or DetectConfig()], seed,
                                n_jobs, model, max_attempts)[0]


def smoothed_histogram(hist: dict[int, int], width: int = 5) -> np.ndarray:
    """Centred moving average over sizes ``0 .. max``; index = size."""
    top = max(hist)
    dense = np.zeros(top + 1)
    for s, c in hist.items():
        dense[s] = c
    kernel = np.ones(width) / width
    return np.convolve(dense, kernel, mode="same")


def histogram_mode(hist: dict[int, int]) -> int:
    """Most frequent size (smallest on ties)."""
    best = max(hist.values())
    return min(s for s, c in hist.items() if c == best)


def secondary_peak_ratio(hist: dict[int, int], width: int = 5) -> float:
    """Height of the tallest non-global local maximum of the smoothed
    histogram relative to the global maximum (0 if unimodal)."""
    s = smoothed_histogram(hist, width)
    top = int(np.argmax(s))
    padded = np.concatenate([[-np.inf], s, [-np.inf]])
    ratio = 0.0
    for i in range(len(s)):
        if i == top:
            continue
        if padded[i + 1] > padded[i] and padded[i + 1] >= padded[i + 2] and s[i] > 0:
            ratio = max(ratio, s[i] / s[top])
    return ratio


def write_histogram_csv(stats: EnsembleStats, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["size", "count"])
    for s in sorted(stats.size_histogram):
        w.writerow([s, stats.size_histogram[s]])


def write_qdist_csv(stats: EnsembleStats, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["network_index", "modularity"])
    for i, q in enumerate(stats.q_samples):
        w.writerow([i, repr(q)])


def write_summary_json(summary: dict, fh) -> None:
    json.dump(summary, fh, indent=2, sort_keys=True)
    fh.write("\n")
