"""Exact maximum modularity by enumerating every set partition."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .graph import Graph, Partition


class OracleTooLarge(ValueError):
    pass


@dataclass
class OracleResult:
    best_partition: Partition
    best_q: float
    partitions_examined: int


@lru_cache(maxsize=None)
def bell(n: int) -> int:
    """Bell number via the Bell triangle."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def exact_max(g: Graph, node_limit: int = 12) -> OracleResult:
    """Maximise modularity over all ``Bell(N)`` partitions of ``g``.

    Partitions are walked as restricted growth strings with the score
    updated incrementally in exact integers; the first maximiser in
    lexicographic order is returned.

    Raises
    ------
    OracleTooLarge
        When ``g`` has more than ``node_limit`` nodes.
    """
    n = g.node_count
    if n > node_limit:
        raise OracleTooLarge(
            f"{n} nodes exceeds the oracle limit of {node_limit}: "
            f"exhaustive search would score Bell({n}) = {bell(n):.3e} partitions")
    if g.edge_count == 0:
        raise ValueError("modularity is undefined for a graph without edges")
    k = np.ascontiguousarray(g.degrees, dtype=np.int64)
    labels, score, count = _kernels.enumerate_partitions(
        g.indptr, g.indices, k, 2 * g.edge_count)
    p = Partition(g, labels)
    return OracleResult(p, score / (4.0 * g.edge_count ** 2), int(count))
