"""Influence maximisation with a graph-attention node scorer trained on
exhaustively solved micro-networks.

Modules
-------
graph       graph type, edge-list I/O, BA/ER generators, summary stats
centrality  node features and static rankings
sir         SIR simulation and Monte Carlo spread estimates
oracle      exhaustive optimal seed sets, labels, training corpora
gnn         the attention model, its autodiff engine and training
baselines   iterative selection heuristics and the RINF reordering
harness     minimal-seed-fraction evaluation and sweeps
cli         ``imgnn`` command line
"""

from .centrality import FEATURE_COLUMNS, RankingResult, feature_matrix, rank
from .graph import Graph, GraphStats, generate_ba, generate_er, load_edge_list, stats
from .sir import SirConfig, SpreadEstimate, epidemic_threshold, estimate_spread, sir_run

__version__ = "0.1.0"

__all__ = [
    "FEATURE_COLUMNS",
    "Graph",
    "GraphStats",
    "RankingResult",
    "SirConfig",
    "SpreadEstimate",
    "epidemic_threshold",
    "estimate_spread",
    "feature_matrix",
    "generate_ba",
    "generate_er",
    "load_edge_list",
    "rank",
    "sir_run",
    "stats",
]
