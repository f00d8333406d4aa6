"""scikit-learn style wrapper around :func:`modtune.detector.detect_best`."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_is_fitted

from .detector import DetectConfig, detect_best
from .graph import modularity
from .validation import graph_from_adjacency


class LeadingEigenvectorModularity(ClusterMixin, BaseEstimator):
    """Community detection by recursive leading-eigenvector q-section with
    Kernighan-Lin fine-tuning and optional global final-tuning.

    Parameters
    ----------
    q : int, default=2
        Number of parts each division aims for.
    final_tuning : bool, default=True
        Run the global node-moving pass after every round of divisions.
    neighbor_only : bool, default=True
        Restrict final-tuning targets to communities of a node's neighbours
        (plus a new singleton community).
    restarts : int, default=1
        Independent seeded runs; the best modularity is kept.
    random_state : int, RandomState instance or None, default=None
    eig_tol : float, default=1e-10
    max_iter : int or None, default=None
        Power-iteration cap per run; ``None`` means ``max(1000, 100 |C|)``.
    n_jobs : int, default=1
        Worker processes for restarts. Results do not depend on it.

    Attributes
    ----------
    labels_ : ndarray of shape (n_nodes,)
    modularity_ : float
    n_communities_ : int
    q_trace_ : list of float
        Modularity after each round of the winning run.
    result_ : DetectResult
    """

    def __init__(self, q=2, final_tuning=True, neighbor_only=True, restarts=1,
                 random_state=None, eig_tol=1e-10, max_iter=None, n_jobs=1):
        self.q = q
        self.final_tuning = final_tuning
        self.neighbor_only = neighbor_only
        self.restarts = restarts
        self.random_state = random_state
        self.eig_tol = eig_tol
        self.max_iter = max_iter
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        """Detect communities of the graph with adjacency matrix ``X``."""
        g = graph_from_adjacency(X)
        seed = int(check_random_state(self.random_state).randint(0, 2**31 - 1))
        cfg = DetectConfig(q=self.q, final_tuning=self.final_tuning,
                           neighbor_only=self.neighbor_only, seed=seed,
                           restarts=self.restarts, eig_tol=self.eig_tol,
                           max_iters=self.max_iter)
        self.result_ = detect_best(g, cfg, n_jobs=self.n_jobs)
        self.labels_ = self.result_.partition.assignment.copy()
        self.modularity_ = self.result_.modularity
        self.n_communities_ = self.result_.partition.community_count
        self.q_trace_ = list(self.result_.q_trace)
        self.n_features_in_ = g.node_count
        return self

    def score(self, X, y=None):
        """Modularity of the fitted labels on graph ``X``."""
        check_is_fitted(self, "labels_")
        g = graph_from_adjacency(X)
        if g.node_count != len(self.labels_):
            raise ValueError("X has a different number of nodes than the fitted graph")
        return modularity(g, np.asarray(self.labels_))
