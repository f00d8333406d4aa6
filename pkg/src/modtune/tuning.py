"""Kernighan-Lin refinement of a single split and the global final-tuning pass."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graph import Graph, Partition
from .spectral import CommunityOperator, SplitState


@dataclass
class TuneTrace:
    """Moves of one pass; ``gains[t]`` is the modularity gained after move t."""
    nodes: np.ndarray
    from_labels: np.ndarray
    to_labels: np.ndarray
    gains: np.ndarray
    best_index: int  # number of moves kept

    def __len__(self):
        return len(self.nodes)


def _group_score(indptr, indices, k, two_m, labels, n_groups) -> int:
    """``sum_g (2m * 2e_g - K_g**2)`` over the groups of one community."""
    rows = np.repeat(labels, np.diff(indptr))
    intra2 = int(np.count_nonzero(rows == labels[indices]))
    K = np.bincount(labels, weights=k, minlength=n_groups).astype(np.int64)
    return two_m * intra2 - int(np.dot(K, K))


def split_delta(g: Graph, members, state: SplitState, *, operator=None) -> float:
    """Modularity gained by splitting community ``members`` along ``state``.

    Equals ``(1/2m) sum_{i,j in C} B^(C)_ij delta(S_i, S_j)``, evaluated from
    per-group edge counts and degree sums.
    """
    op = operator if operator is not None else CommunityOperator(g, members)
    labels = np.asarray(state.labels, dtype=np.int64)
    two_m = op.two_m
    k = op.k.astype(np.int64)
    split = _group_score(op.indptr, op.indices, k, two_m, labels, state.q)
    whole = _group_score(op.indptr, op.indices, k, two_m, np.zeros_like(labels), 1)
    return (split - whole) / float(two_m * two_m)


def _seed32(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**32))


def fine_tune(g: Graph, members, state: SplitState, seed=None, *, operator=None,
              traces: list | None = None) -> SplitState:
    """Kernighan-Lin passes on a q-way split of one community.

    Each pass moves every member once to its best other vertex, keeps the
    best intermediate state, and passes repeat until one brings no gain.
    Appends a :class:`TuneTrace` per pass to ``traces`` when given.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    op = operator if operator is not None else CommunityOperator(g, members)
    labels = np.array(state.labels, dtype=np.int64)
    initial = labels.copy()
    k = op.k.astype(np.int64)
    inv = 2.0 / float(op.two_m) ** 2
    total = 0
    if op.size > 1:
        while True:
            nodes, frm, to, cum, best = _kernels.kl_pass(
                op.indptr, op.indices, k, op.two_m, labels, state.q, _seed32(rng))
            if traces is not None:
                traces.append(TuneTrace(nodes, frm, to, cum * inv, int(best)))
            gain = int(cum[best - 1]) if best > 0 else 0
            total += gain
            if gain <= 0:
                break
    if total < 0:
        labels = initial
    return SplitState(state.members, labels, state.q)


def final_tune(g: Graph, p: Partition, neighbor_only: bool = True, seed=None, *,
               traces: list | None = None) -> Partition:
    """Global refinement: move any node to any community or a new one.

    Sweeps repeat while they improve modularity; each sweep moves every node
    exactly once (best move first, even if negative, random among exact
    ties) and keeps the best intermediate partition. Returns a new,
    compacted partition that is never worse than ``p``.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    labels = p.assignment.copy()
    two_m = 2 * g.edge_count
    inv = 1.0 / (2.0 * g.edge_count ** 2)
    k = np.ascontiguousarray(g.degrees, dtype=np.int64)
    while True:
        nodes, frm, to, cum, n_moves, best = _kernels.final_pass(
            g.indptr, g.indices, k, two_m, labels, neighbor_only, _seed32(rng))
        if traces is not None:
            traces.append(TuneTrace(nodes[:n_moves], frm[:n_moves], to[:n_moves],
                                    cum[:n_moves] * inv, int(best)))
        _, labels = np.unique(labels, return_inverse=True)
        labels = labels.astype(np.int64)
        if best == 0 or cum[best - 1] <= 0:
            break
    return Partition(g, labels)
