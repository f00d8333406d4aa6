"""Leading eigenvector of a community modularity matrix and the q-way guess.

The community modularity matrix ``B^(C)`` is never formed. For a community
``C`` with member degrees ``k`` and internal degrees ``k_in``,

    B^(C) x = A_C x - k (k . x) / 2m - (k_in - k K_C / 2m) * x

which costs O(m_C + |C|) per product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from . import _kernels
from .graph import Graph


class ConvergenceError(RuntimeError):
    """Power iteration hit ``max_iters``; ``residual`` is the best seen."""

    def __init__(self, residual: float, iterations: int, pair=None):
        super().__init__(f"power iteration did not converge in {iterations} "
                         f"iterations (best residual {residual:.3e})")
        self.residual = residual
        self.iterations = iterations
        self.pair = pair


@dataclass
class EigenPair:
    vector: np.ndarray
    value: float
    residual: float
    iterations: int


@dataclass(frozen=True)
class SimplexSet:
    q: int
    vertices: np.ndarray  # shape (q, q - 1)


@dataclass
class SplitState:
    members: np.ndarray
    labels: np.ndarray  # vertex index per member
    q: int

    def groups(self) -> list[np.ndarray]:
        return [self.members[self.labels == j] for j in range(self.q)]


class CommunityOperator:
    """Matrix-free ``B^(C)`` for one community of ``g``."""

    def __init__(self, g: Graph, members):
        members = np.asarray(members, dtype=np.int64)
        if members.size == 0:
            raise ValueError("community has no members")
        self.members = members
        position = np.full(g.node_count, -1, dtype=np.int64)
        self.indptr, self.indices = _kernels.subgraph_csr(g.indptr, g.indices, members, position)
        self.k = g.degrees[members].astype(np.float64)
        self.two_m = 2 * g.edge_count
        self.inv2m = 1.0 / self.two_m
        k_in = np.diff(self.indptr).astype(np.float64)
        self.diag = k_in - self.k * self.k.sum() * self.inv2m

    @property
    def size(self) -> int:
        return len(self.members)

    def matvec(self, x: np.ndarray, shift: float = 0.0) -> np.ndarray:
        x = np.ascontiguousarray(x, dtype=np.float64)
        if x.shape != (self.size,):
            raise ValueError("vector length must equal community size")
        out = np.empty_like(x)
        _kernels.bc_matvec(self.indptr, self.indices, self.k, self.diag,
                           self.inv2m, shift, x, out)
        return out

    def power(self, x0, shift, tol, res_tol, max_iters, coarse=False):
        return _kernels.power_iterate(self.indptr, self.indices, self.k, self.diag,
                                      self.inv2m, float(shift), x0, tol, res_tol,
                                      max_iters, coarse)


def apply_bc(g: Graph, members, x) -> np.ndarray:
    """Multiply ``x`` by the modularity matrix of community ``members``."""
    return CommunityOperator(g, members).matvec(x)


def default_max_iters(size: int) -> int:
    return max(1000, 100 * size)


def leading_eigenpair(g: Graph, members, tol: float = 1e-10, max_iters: int | None = None,
                      seed=None, res_tol: float = 1e-8, *, operator=None) -> EigenPair:
    """Eigenpair of the algebraically largest eigenvalue of ``B^(C)``.

    A coarse power run first estimates the dominant magnitude. If that run
    is settling on a positive eigenvalue it is continued unshifted;
    otherwise the iteration restarts on ``B^(C) + |lambda_d| I``, which makes
    the largest eigenvalue dominant. Convergence needs both a relative
    eigenvalue change below ``tol`` (relative to ``max(|lambda|, 1)``) and a
    residual ``||B^(C) U - lambda U||`` below ``res_tol``.

    Raises
    ------
    ConvergenceError
        If ``max_iters`` products are not enough.
    """
    op = operator if operator is not None else CommunityOperator(g, members)
    rng = np.random.default_rng(seed)
    n = op.size
    if max_iters is None:
        max_iters = default_max_iters(n)
    if n == 1:
        return EigenPair(np.ones(1), 0.0, 0.0, 0)

    for _ in range(10):
        x0 = rng.standard_normal(n)
        x, rq, mu, res, it, ok = op.power(x0, 0.0, 1e-4, res_tol, max_iters, coarse=True)
        if mu > 0.0:
            break
    else:
        # the start vectors keep landing in the null space: B^(C) vanishes
        return EigenPair(x0 / np.linalg.norm(x0), 0.0, 0.0, 0)
    used = it

    if rq > 0.9 * mu:
        x, lam, _, res, it, ok = op.power(x, 0.0, tol, res_tol, max_iters)
        used += it
        if ok and lam > 0:
            return EigenPair(x, lam, res, used)

    shift = mu
    for _ in range(5):
        x, lam, _, res, it, ok = op.power(x0, shift, tol, res_tol, max_iters)
        used += it
        if not ok:
            raise ConvergenceError(res, used, EigenPair(x, lam - shift, res, used))
        if lam >= 0.0:
            return EigenPair(x, lam - shift, res, used)
        # shifted spectrum still had a dominant negative end
        shift += abs(lam)
    raise ConvergenceError(res, used)


def simplex_vertices(q: int) -> SimplexSet:
    """Vertices of a regular simplex centred at the origin, as unit vectors in
    ``q - 1`` dimensions with pairwise dot product ``-1/(q-1)``.

    Built recursively: ``(1, 0, ..)`` plus the ``q-1`` vertex set scaled into
    the orthogonal complement and offset by ``-1/(q-1)``. That reproduces
    ``+1/-1`` for q=2 and ``(1,0), (-1/2, +-sqrt(3)/2)`` for q=3. Vertices are
    ordered by number of positive components, ties lexicographically.
    """
    if q < 2:
        raise ValueError("q must be at least 2")
    verts = _simplex(q)
    npos = (verts > 1e-12).sum(axis=1)
    order = sorted(range(q), key=lambda i: (npos[i], tuple(verts[i])))
    return SimplexSet(q, verts[order])


def _simplex(q: int) -> np.ndarray:
    if q == 2:
        return np.array([[1.0], [-1.0]])
    inner = _simplex(q - 1)
    c = -1.0 / (q - 1)
    s = np.sqrt(1.0 - c * c)
    first = np.zeros((1, q - 1))
    first[0, 0] = 1.0
    rest = np.column_stack([np.full(q - 1, c), s * inner])
    return np.vstack([first, rest])


def assignment_thresholds(U, q: int, n_full: int, members=None) -> SplitState:
    """Initial q-way guess from eigenvector components.

    Component ``U_i`` goes to vertex ``j`` (0-based) when
    ``j/q <= F(U_i) < (j+1)/q``, with ``F`` the normal CDF of variance
    ``1/n_full``. For q=2 this is the sign rule with zero going up.
    """
    U = np.asarray(U, dtype=np.float64)
    if q == 2:
        # F(x) >= 1/2 exactly when x >= 0; avoids rounding near zero
        labels = (U >= 0).astype(np.int64)
    else:
        F = ndtr(U * np.sqrt(n_full))
        labels = np.minimum(np.floor(F * q).astype(np.int64), q - 1)
    if members is None:
        members = np.arange(len(U))
    return SplitState(np.asarray(members, dtype=np.int64), labels, q)
