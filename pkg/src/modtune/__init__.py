"""Modularity-based community detection by recursive leading-eigenvector
q-section, Kernighan-Lin fine-tuning and global final-tuning."""

from importlib import resources

__version__ = "0.1.0"

FIXTURES = ("path9", "karate")


def load_fixture(name: str):
    """Return a bundled graph (``"path9"`` or ``"karate"``)."""
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(FIXTURES)}")
    text = resources.files(__name__).joinpath("data", f"{name}.txt").read_text("utf-8")
    return parse_edge_list(text)


from .graph import (NEW_COMMUNITY, EdgeListError, Graph, Partition, apply_move,  # noqa: E402
                    modularity, move_delta, parse_edge_list, read_edge_list,
                    read_partition_csv, serialize, write_partition_csv)
from .spectral import (ConvergenceError, EigenPair, SimplexSet, SplitState,  # noqa: E402
                       apply_bc, assignment_thresholds, leading_eigenpair, simplex_vertices)
from .tuning import TuneTrace, final_tune, fine_tune, split_delta  # noqa: E402
from .detector import DEFAULT_SEED, DetectConfig, DetectResult, detect, detect_best  # noqa: E402
from .oracle import OracleResult, OracleTooLarge, bell, exact_max  # noqa: E402
from .ensemble import (EnsembleStats, GenerationError, gen_er_connected,  # noqa: E402
                       run_ensemble, run_paired_ensembles)

__all__ = [
    "NEW_COMMUNITY", "EdgeListError", "Graph", "Partition", "apply_move", "modularity",
    "move_delta", "parse_edge_list", "read_edge_list", "read_partition_csv", "serialize",
    "write_partition_csv", "ConvergenceError", "EigenPair", "SimplexSet", "SplitState",
    "apply_bc", "assignment_thresholds", "leading_eigenpair", "simplex_vertices",
    "TuneTrace", "final_tune", "fine_tune", "split_delta", "DEFAULT_SEED", "DetectConfig",
    "DetectResult", "detect", "detect_best", "OracleResult", "OracleTooLarge", "bell",
    "exact_max", "EnsembleStats", "GenerationError", "gen_er_connected", "run_ensemble",
    "run_paired_ensembles", "FIXTURES", "load_fixture",
]
