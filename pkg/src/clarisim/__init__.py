"""Multi-turn interactive query clarification simulator."""

from .embeddings import DocumentCollection, dot, load_collection, retrieve_top_k, save_collection
from .ranker import PairwiseQueryRanker, TrainConfig, pairwise_prob
from .scenario import ClarificationScenario, Intent, SyntheticConfig, generate_synthetic
from .simulator import run_experiment, run_session
from .user_agent import FeedbackTurn, GreedyUser

__all__ = [
    "ClarificationScenario",
    "DocumentCollection",
    "FeedbackTurn",
    "GreedyUser",
    "Intent",
    "PairwiseQueryRanker",
    "SyntheticConfig",
    "TrainConfig",
    "dot",
    "generate_synthetic",
    "load_collection",
    "pairwise_prob",
    "retrieve_top_k",
    "run_experiment",
    "run_session",
    "save_collection",
]

__version__ = "0.1.0"
