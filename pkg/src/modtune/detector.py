"""Recursive q-section with fine-tuning, interleaved with final-tuning rounds."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from .graph import Graph, Partition, modularity
from .spectral import (CommunityOperator, ConvergenceError, assignment_thresholds,
                       leading_eigenpair)
from .tuning import final_tune, fine_tune, split_delta

logger = logging.getLogger(__name__)

DEFAULT_SEED = 7919


@dataclass(frozen=True)
class DetectConfig:
    q: int = 2
    final_tuning: bool = True
    neighbor_only: bool = True
    seed: int = DEFAULT_SEED
    restarts: int = 1
    eig_tol: float = 1e-10
    max_iters: int | None = None
    improvement_eps: float = 1e-12
    # "iterate": split along the unconverged power iterate;
    # "indivisible": leave the community whole
    on_nonconvergence: str = "iterate"

    def __post_init__(self):
        if self.on_nonconvergence not in ("iterate", "indivisible"):
            raise ValueError("on_nonconvergence must be 'iterate' or 'indivisible'")
        if self.q < 2:
            raise ValueError("q must be >= 2")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.eig_tol <= 0 or self.improvement_eps <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class DetectResult:
    partition: Partition
    modularity: float
    rounds: int
    q_trace: list[float]
    seed: int
    nonconverged: int = 0
    warnings: list[str] = field(default_factory=list)


def _try_split(g: Graph, members: np.ndarray, cfg: DetectConfig, rng,
               notes: list) -> list[np.ndarray] | None:
    """Return the sub-communities of an accepted division, or None."""
    if len(members) < 2:
        return None
    op = CommunityOperator(g, members)
    try:
        pair = leading_eigenpair(g, members, tol=cfg.eig_tol, max_iters=cfg.max_iters,
                                 seed=rng, operator=op)
    except ConvergenceError as exc:
        notes.append(f"{len(members)}-node community: {exc}")
        logger.debug("%d-node community: %s", len(members), exc)
        if cfg.on_nonconvergence == "indivisible":
            return None
        pair = exc.pair
    guess = assignment_thresholds(pair.vector, cfg.q, len(members), members)
    if np.all(guess.labels == guess.labels[0]):
        return None
    state = fine_tune(g, members, guess, seed=rng, operator=op)
    if split_delta(g, members, state, operator=op) <= cfg.improvement_eps:
        return None
    return [grp for grp in state.groups() if len(grp)]


def detect(g: Graph, cfg: DetectConfig | None = None, seed: int | None = None) -> DetectResult:
    """Run one seeded detection.

    Each round tries once to divide every community that is not known to be
    indivisible; with ``cfg.final_tuning`` a final-tuning pass follows and is
    kept only when it raises modularity. Rounds stop once one changes
    modularity by no more than ``cfg.improvement_eps``.
    """
    cfg = cfg or DetectConfig()
    seed = cfg.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    n = g.node_count
    assignment = np.zeros(n, dtype=np.int64)
    divisible = [True]
    q_now = 0.0
    trace: list[float] = []
    warnings: list[str] = []
    rounds = 0
    while True:
        rounds += 1
        q_start = q_now
        communities = Partition(g, assignment).communities()
        new_assignment = np.empty(n, dtype=np.int64)
        new_divisible: list[bool] = []
        for c, members in enumerate(communities):
            parts = None
            if divisible[c]:
                parts = _try_split(g, members, cfg, rng, warnings)
            for grp in parts or [members]:
                new_assignment[grp] = len(new_divisible)
                new_divisible.append(parts is not None)
        assignment, divisible = new_assignment, new_divisible
        q_now = modularity(g, assignment)

        if cfg.final_tuning:
            tuned = final_tune(g, Partition(g, assignment), cfg.neighbor_only, seed=rng)
            q_tuned = modularity(g, tuned)
            if q_tuned > q_now:
                divisible = _carry_marks(assignment, divisible, tuned.assignment)
                assignment, q_now = tuned.assignment, q_tuned
        trace.append(q_now)
        if q_now - q_start <= cfg.improvement_eps:
            break
    p = Partition(g, assignment)
    return DetectResult(p, modularity(g, p), rounds, trace, int(seed), len(warnings), warnings)


def _groups(assignment) -> list[np.ndarray]:
    order = np.argsort(assignment, kind="stable")
    return np.split(order, np.cumsum(np.bincount(assignment))[:-1])


def _carry_marks(old, old_divisible, new) -> list[bool]:
    """Keep an indivisible mark only on communities final-tuning left intact."""
    frozen = {members.tobytes() for c, members in enumerate(_groups(old))
              if not old_divisible[c]}
    return [members.tobytes() not in frozen for members in _groups(new)]


def _detect_seed(args):
    g, cfg, seed = args
    return detect(g, cfg, seed)


def detect_best(g: Graph, cfg: DetectConfig | None = None, n_jobs: int = 1) -> DetectResult:
    """Best of ``cfg.restarts`` runs seeded ``cfg.seed, cfg.seed + 1, ...``.

    The first run reaching the maximal modularity wins, so the outcome does
    not depend on ``n_jobs``.
    """
    cfg = cfg or DetectConfig()
    seeds = [cfg.seed + r for r in range(cfg.restarts)]
    if n_jobs > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            chunk = -(-len(seeds) // n_jobs)
            results = list(ex.map(_detect_seed, [(g, cfg, s) for s in seeds],
                                  chunksize=chunk))
    else:
        results = [detect(g, cfg, s) for s in seeds]
    best = results[0]
    for r in results[1:]:
        if r.modularity > best.modularity:
            best = r
    return best
