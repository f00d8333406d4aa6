"""Input checks shared by the estimator and the command line."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .graph import Graph


def check_adjacency(X) -> sp.csr_matrix:
    """Validate an adjacency matrix of a simple undirected graph.

    Accepts dense array-likes, scipy sparse matrices and networkx graphs
    (edge weights of networkx graphs are ignored).
    Entries must be 0/1, the matrix square and symmetric, the diagonal zero.
    """
    if hasattr(X, "adj") and hasattr(X, "nodes"):
        import networkx as nx
        X = nx.to_scipy_sparse_array(X, nodelist=list(X.nodes), weight=None, format="csr")
    A = sp.csr_matrix(X) if sp.issparse(X) else sp.csr_matrix(np.asarray(X))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"adjacency matrix must be square, got shape {A.shape}")
    if A.shape[0] < 1:
        raise ValueError("adjacency matrix is empty")
    A.eliminate_zeros()
    if A.nnz and not np.all(A.data == 1):
        raise ValueError("adjacency entries must be 0 or 1 (unweighted graphs only)")
    if A.diagonal().any():
        raise ValueError("self-loops are not allowed")
    if (A != A.T).nnz:
        raise ValueError("adjacency matrix must be symmetric (undirected graphs only)")
    if A.nnz == 0:
        raise ValueError("graph has no edges; modularity is undefined")
    return A


def graph_from_adjacency(X, labels=None) -> Graph:
    if isinstance(X, Graph):
        return X
    if labels is None and hasattr(X, "adj") and hasattr(X, "nodes"):
        labels = [str(v) for v in X.nodes]
    A = sp.triu(check_adjacency(X), k=1).tocoo()
    return Graph(A.shape[0], np.column_stack([A.row, A.col]), labels)
