"""Agent-based simulator for self-healing networks.

Nodes crash at random during a failure window; survivors detect missing
neighbours and recreate them from topology data that is either known up
front, gossiped with Trickle, or carried by mobile agents.
"""

from .engine import ExperimentConfig, find_reference_point, run_experiment, run_rep
from .messaging import TopologyKnowledge
from .metrics import MetricsRecord, integrate, rpd
from .nodes import Protocol
from .similarity import graph_similarity
from .topology import GeneratorKind, GeneratorParams, Graph, load_edge_list

__version__ = "0.1.0"

__all__ = [
    "ExperimentConfig",
    "GeneratorKind",
    "GeneratorParams",
    "Graph",
    "MetricsRecord",
    "Protocol",
    "TopologyKnowledge",
    "find_reference_point",
    "graph_similarity",
    "integrate",
    "load_edge_list",
    "rpd",
    "run_experiment",
    "run_rep",
]
