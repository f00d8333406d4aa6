"""Graph and partition containers, edge-list I/O and exact modularity."""

from __future__ import annotations

import csv
import io
import logging
from collections.abc import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

#: Target passed to :func:`move_delta` / :func:`apply_move` to put a node into
#: a new community of its own.
NEW_COMMUNITY = -1


class EdgeListError(ValueError):
    """Raised for unreadable edge lists; ``line`` is 1-based (0 if global)."""

    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


class Graph:
    """Immutable simple undirected graph stored as CSR arrays.

    Parameters
    ----------
    n_nodes : int
    edges : iterable of (int, int)
        Internal node indices. Duplicates are collapsed; self-loops raise.
    labels : sequence of str, optional
        Original node identifiers, defaults to ``"0" .. "n-1"``.
    """

    def __init__(self, n_nodes: int, edges: Iterable[tuple[int, int]],
                 labels: Sequence[str] | None = None):
        pairs = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if n_nodes < 1:
            raise ValueError("graph needs at least one node")
        if pairs.size and (pairs.min() < 0 or pairs.max() >= n_nodes):
            raise ValueError("edge endpoint out of range")
        if np.any(pairs[:, 0] == pairs[:, 1]):
            raise ValueError("self-loops are not allowed")
        pairs = np.sort(pairs, axis=1)
        unique = np.unique(pairs, axis=0)
        self.duplicate_edges = len(pairs) - len(unique)
        rows = np.concatenate([unique[:, 0], unique[:, 1]])
        cols = np.concatenate([unique[:, 1], unique[:, 0]])
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        indptr = np.zeros(n_nodes + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n_nodes), out=indptr[1:])
        self.indptr = indptr
        self.indices = cols.astype(np.int64)
        self.degrees = np.diff(indptr)
        for arr in (self.indptr, self.indices, self.degrees):
            arr.flags.writeable = False
        self.edge_count = int(len(unique))
        if labels is None:
            labels = [str(i) for i in range(n_nodes)]
        if len(labels) != n_nodes or len(set(labels)) != n_nodes:
            raise ValueError("labels must be unique and one per node")
        self.node_labels = tuple(str(s) for s in labels)
        self.label_index = {s: i for i, s in enumerate(self.node_labels)}

    @property
    def node_count(self) -> int:
        return len(self.degrees)

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    @property
    def adjacency(self) -> list[np.ndarray]:
        return [self.neighbors(i) for i in range(self.node_count)]

    def edges(self) -> np.ndarray:
        """Array of ``(i, j)`` with ``i < j``, sorted."""
        rows = np.repeat(np.arange(self.node_count), self.degrees)
        mask = rows < self.indices
        return np.column_stack([rows[mask], self.indices[mask]])

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.node_count, self.node_count))
        e = self.edges()
        a[e[:, 0], e[:, 1]] = 1
        a[e[:, 1], e[:, 0]] = 1
        return a

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        if set(self.node_labels) != set(other.node_labels):
            return False
        return _label_edges(self) == _label_edges(other)

    def __hash__(self):
        return hash((frozenset(self.node_labels), frozenset(_label_edges(self))))

    def __repr__(self):
        return f"Graph(n_nodes={self.node_count}, n_edges={self.edge_count})"


def _label_edges(g: Graph) -> set[frozenset[str]]:
    lab = g.node_labels
    return {frozenset((lab[i], lab[j])) for i, j in g.edges()}


def parse_edge_list(text: str | Iterable[str]) -> Graph:
    """Parse whitespace-separated edge lines into a :class:`Graph`.

    Blank lines and lines starting with ``#`` are skipped. Node tokens are
    arbitrary strings, indexed in order of first appearance.

    Raises
    ------
    EdgeListError
        On a malformed line, a self-loop, or when no edge is found.
    """
    lines = text.splitlines() if isinstance(text, str) else text
    index: dict[str, int] = {}
    edges = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListError(f"expected two node tokens, got {len(tokens)}: {line!r}", lineno)
        a, b = tokens
        if a == b:
            raise EdgeListError(f"self-loop on node {a!r} rejected", lineno)
        for t in tokens:
            if t not in index:
                index[t] = len(index)
        edges.append((index[a], index[b]))
    if not edges:
        raise EdgeListError("edge list contains no edges")
    g = Graph(len(index), edges, labels=list(index))
    if g.duplicate_edges:
        logger.warning("collapsed %d duplicate edge(s)", g.duplicate_edges)
    return g


def read_edge_list(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh.read())


def serialize(g: Graph) -> str:
    """Edge-list text using the original node labels."""
    lab = g.node_labels
    return "".join(f"{lab[i]} {lab[j]}\n" for i, j in g.edges())


class Partition:
    """Mutable node -> community assignment with per-community bookkeeping.

    Community ids are always compact (``0 .. community_count - 1``, every id
    non-empty). ``community_degree_sums`` holds ``K_c``, the total degree of
    community ``c``.
    """

    def __init__(self, g: Graph, assignment: Sequence[int]):
        assignment = np.asarray(assignment, dtype=np.int64)
        if assignment.shape != (g.node_count,):
            raise ValueError("assignment must have one entry per node")
        _, assignment = np.unique(assignment, return_inverse=True)
        self.assignment = assignment.astype(np.int64).reshape(-1)
        self._degrees = g.degrees
        self._recount()

    def _recount(self):
        c = int(self.assignment.max()) + 1
        self.community_sizes = np.bincount(self.assignment, minlength=c).astype(np.int64)
        self.community_degree_sums = np.bincount(
            self.assignment, weights=self._degrees, minlength=c).astype(np.int64)

    @classmethod
    def singletons(cls, g: Graph) -> Partition:
        return cls(g, np.arange(g.node_count))

    @classmethod
    def whole(cls, g: Graph) -> Partition:
        return cls(g, np.zeros(g.node_count, dtype=np.int64))

    @classmethod
    def from_communities(cls, g: Graph, communities: Iterable[Iterable]) -> Partition:
        """Build from groups of node labels (strings) or internal indices."""
        assignment = np.full(g.node_count, -1, dtype=np.int64)
        for c, members in enumerate(communities):
            for v in members:
                i = g.label_index[v] if isinstance(v, str) else int(v)
                assignment[i] = c
        if np.any(assignment < 0):
            raise ValueError("communities do not cover every node")
        return cls(g, assignment)

    @property
    def community_count(self) -> int:
        return len(self.community_sizes)

    def communities(self) -> list[np.ndarray]:
        order = np.argsort(self.assignment, kind="stable")
        return np.split(order, np.cumsum(self.community_sizes)[:-1])

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == c)

    def copy(self) -> Partition:
        new = object.__new__(Partition)
        new.assignment = self.assignment.copy()
        new._degrees = self._degrees
        new.community_sizes = self.community_sizes.copy()
        new.community_degree_sums = self.community_degree_sums.copy()
        return new

    def check(self, g: Graph) -> None:
        """Assert every bookkeeping invariant against a recount."""
        fresh = Partition(g, self.assignment)
        assert np.array_equal(fresh.assignment, self.assignment), "ids not compact"
        assert np.array_equal(fresh.community_sizes, self.community_sizes)
        assert np.array_equal(fresh.community_degree_sums, self.community_degree_sums)
        assert self.community_sizes.sum() == g.node_count
        assert self.community_degree_sums.sum() == 2 * g.edge_count

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.assignment, other.assignment)

    def __repr__(self):
        return f"Partition(communities={self.community_count}, sizes={self.community_sizes.tolist()})"


def scaled_modularity(g: Graph, assignment: np.ndarray) -> int:
    """``4 m**2 Q`` as an exact integer."""
    assignment = np.asarray(assignment)
    rows = np.repeat(assignment, g.degrees)
    intra2 = int(np.count_nonzero(rows == assignment[g.indices]))
    K = np.bincount(assignment, weights=g.degrees).astype(np.int64)
    two_m = 2 * g.edge_count
    return two_m * intra2 - int(np.dot(K, K))


def modularity(g: Graph, p: Partition | np.ndarray) -> float:
    """Newman-Girvan modularity of a partition.

    Computed as the intra-community edge fraction minus ``sum_c (K_c/2m)^2``
    from exact integer counts, so rational results such as 51/128 come out
    correctly rounded.
    """
    assignment = p.assignment if isinstance(p, Partition) else p
    if g.edge_count == 0:
        raise ValueError("modularity is undefined for a graph without edges")
    return scaled_modularity(g, assignment) / (4.0 * g.edge_count ** 2)


def _move_num(g: Graph, p: Partition, node: int, target: int) -> int:
    x = p.assignment[node]
    nbr = p.assignment[g.neighbors(node)]
    k = int(g.degrees[node])
    a_x = int(np.count_nonzero(nbr == x))
    K_x = int(p.community_degree_sums[x])
    if target == NEW_COMMUNITY:
        a_y = K_y = 0
    else:
        a_y = int(np.count_nonzero(nbr == target))
        K_y = int(p.community_degree_sums[target])
    return 2 * g.edge_count * (a_y - a_x) - k * (K_y - K_x + k)


def move_delta(g: Graph, p: Partition, node: int, target: int) -> float:
    """Modularity change from moving ``node`` into community ``target``.

    ``target`` may be :data:`NEW_COMMUNITY`. Moving a node into its own
    community (or a singleton into a new one) returns 0.
    """
    x = p.assignment[node]
    if target == x or (target == NEW_COMMUNITY and p.community_sizes[x] == 1):
        return 0.0
    if target != NEW_COMMUNITY and not 0 <= target < p.community_count:
        raise IndexError(f"no community {target}")
    return _move_num(g, p, node, target) / (2.0 * g.edge_count ** 2)


def apply_move(g: Graph, p: Partition, node: int, target: int) -> Partition:
    """Move ``node`` in place, keeping ids compact. Returns ``p``."""
    x = int(p.assignment[node])
    if target == x or (target == NEW_COMMUNITY and p.community_sizes[x] == 1):
        return p
    k = g.degrees[node]
    if target == NEW_COMMUNITY:
        target = p.community_count
        p.community_sizes = np.append(p.community_sizes, 0)
        p.community_degree_sums = np.append(p.community_degree_sums, 0)
    p.assignment[node] = target
    p.community_sizes[x] -= 1
    p.community_sizes[target] += 1
    p.community_degree_sums[x] -= k
    p.community_degree_sums[target] += k
    if p.community_sizes[x] == 0:
        p.assignment[p.assignment > x] -= 1
        p.community_sizes = np.delete(p.community_sizes, x)
        p.community_degree_sums = np.delete(p.community_degree_sums, x)
    return p


def write_partition_csv(g: Graph, p: Partition, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["node", "community"])
    for i, c in enumerate(p.assignment):
        writer.writerow([g.node_labels[i], int(c)])


def partition_to_csv(g: Graph, p: Partition) -> str:
    buf = io.StringIO()
    write_partition_csv(g, p, buf)
    return buf.getvalue()


def read_partition_csv(g: Graph, fh) -> Partition:
    reader = csv.DictReader(fh)
    assignment = np.full(g.node_count, -1, dtype=np.int64)
    for row in reader:
        assignment[g.label_index[row["node"]]] = int(row["community"])
    if np.any(assignment < 0):
        raise ValueError("partition file does not cover every node")
    return Partition(g, assignment)
