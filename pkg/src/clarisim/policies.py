"""Interaction strategies: which two candidates to show the user each turn.

Five kinds share one contract: start() builds session-local state, propose()
returns two distinct remaining indices (higher-ranked first) or None once the
session is exhausted, update() folds in the user's feedback, final_query()
re-ranks the survivors under the full history.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import ranker as ranker_mod
from .user_agent import FeedbackTurn

POLICY_KINDS = ("naive", "random", "top2", "random5", "kmeans")


@dataclass
class SelectionState:
    scenario: object
    remaining: list
    history: list = field(default_factory=list)
    rng: np.random.Generator = None
    data: dict = field(default_factory=dict)


def kmeans_2(points, seed: int = 0, max_iter: int = 100):
    """Lloyd's algorithm with k=2 and seeded k-means++ initialization.

    Euclidean distance; stops when assignments stabilize. An empty cluster is
    repaired by moving the point farthest from the non-empty centroid.
    Returns an array of {0, 1} assignments, deterministic given seed.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    n = points.shape[0]
    if n < 2:
        raise ValueError(f"kmeans_2 needs >= 2 points, got {n}")
    rng = np.random.default_rng(seed)

    # k-means++ seeding
    first = int(rng.integers(n))
    d2 = np.sum((points - points[first]) ** 2, axis=1)
    total = d2.sum()
    if total > 0:
        second = int(rng.choice(n, p=d2 / total))
    else:
        second = (first + 1) % n  # all points identical
    centroids = points[[first, second]].copy()

    assign = np.full(n, -1)
    for _ in range(max_iter):
        dist = np.sum((points[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        new_assign = np.argmin(dist, axis=1)
        for c in range(2):
            if not np.any(new_assign == c):
                other = 1 - c
                far = int(np.argmax(dist[:, other]))
                new_assign[far] = c
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for c in range(2):
            centroids[c] = points[assign == c].mean(axis=0)
    return assign


class SelectionPolicy:
    kind = None

    def __init__(self, seed: int = 0):
        self.seed = seed

    def start(self, scenario, model) -> SelectionState:
        state = SelectionState(
            scenario=scenario,
            remaining=list(range(scenario.m)),
            rng=np.random.default_rng(self.seed),
        )
        self._on_start(state, model)
        return state

    def _on_start(self, state, model):
        pass

    def propose(self, state: SelectionState, model):
        """Two distinct indices from remaining, or None when |remaining| < 2."""
        if len(state.remaining) < 2:
            return None
        return self._propose(state, model)

    def update(self, state: SelectionState, feedback: FeedbackTurn) -> SelectionState:
        if (
            feedback.selected_index not in state.remaining
            or feedback.rejected_index not in state.remaining
        ):
            raise ValueError("feedback references candidates outside the remaining set")
        self._shrink(state, feedback)
        state.history.append(feedback)
        return state

    def _shrink(self, state, feedback):
        pass  # default: candidate set unchanged

    def final_query(self, state: SelectionState, model) -> int:
        if not state.remaining:
            raise ValueError("no remaining candidates")
        return ranker_mod.rank_candidates(
            state.scenario, state.remaining, state.history, model
        )[0]


class NaivePolicy(SelectionPolicy):
    """Rank once up front; run a tournament down the frozen list, dropping the
    loser each turn."""

    kind = "naive"

    def _on_start(self, state, model):
        order = ranker_mod.rank_candidates(state.scenario, state.remaining, (), model)
        state.data["frozen_order"] = order

    def _frozen_remaining(self, state):
        rem = set(state.remaining)
        return [i for i in state.data["frozen_order"] if i in rem]

    def _propose(self, state, model):
        head = self._frozen_remaining(state)
        return head[0], head[1]

    def _shrink(self, state, feedback):
        state.remaining.remove(feedback.rejected_index)

    def final_query(self, state, model):
        if not state.remaining:
            raise ValueError("no remaining candidates")
        return self._frozen_remaining(state)[0]


class RandomSamplePolicy(SelectionPolicy):
    """Re-rank, then sample two distinct candidates uniformly from the whole
    remaining set; present the better-ranked one first."""

    kind = "random"

    def _propose(self, state, model):
        order = ranker_mod.rank_candidates(state.scenario, state.remaining, state.history, model)
        a, b = state.rng.choice(len(order), size=2, replace=False)
        picks = sorted((int(a), int(b)))  # keep rank order
        return order[picks[0]], order[picks[1]]


class Top2Policy(SelectionPolicy):
    """Re-rank and present the top two."""

    kind = "top2"

    def _propose(self, state, model):
        order = ranker_mod.rank_candidates(state.scenario, state.remaining, state.history, model)
        return order[0], order[1]


class RandomAt5Policy(SelectionPolicy):
    """Re-rank and sample two distinct candidates among the top 5 (or all
    remaining if fewer)."""

    kind = "random5"

    def _propose(self, state, model):
        order = ranker_mod.rank_candidates(state.scenario, state.remaining, state.history, model)
        pool = order[: min(5, len(order))]
        a, b = state.rng.choice(len(pool), size=2, replace=False)
        picks = sorted((int(a), int(b)))
        return pool[picks[0]], pool[picks[1]]


class KMeansPolicy(SelectionPolicy):
    """Cluster the survivors in 2 each turn, present the best-ranked query of
    each cluster, then drop the whole cluster of the rejected query."""

    kind = "kmeans"

    def _propose(self, state, model):
        rem = list(state.remaining)
        assign = kmeans_2(
            state.scenario.candidates[rem], seed=int(state.rng.integers(2**32))
        )
        state.data["clusters"] = {rem[t]: int(assign[t]) for t in range(len(rem))}
        order = ranker_mod.rank_candidates(state.scenario, rem, state.history, model)
        best = {}
        for idx in order:
            cluster = state.data["clusters"][idx]
            if cluster not in best:
                best[cluster] = idx
        a, b = best[0], best[1]
        # higher-ranked first
        if order.index(b) < order.index(a):
            a, b = b, a
        return a, b

    def _shrink(self, state, feedback):
        clusters = state.data.get("clusters")
        if clusters is None:
            raise ValueError("update before propose: no cluster assignment")
        dead = clusters[feedback.rejected_index]
        state.remaining = [i for i in state.remaining if clusters[i] != dead]


_POLICY_CLASSES = {
    cls.kind: cls
    for cls in (NaivePolicy, RandomSamplePolicy, Top2Policy, RandomAt5Policy, KMeansPolicy)
}


def make_policy(kind: str, seed: int = 0) -> SelectionPolicy:
    if kind not in _POLICY_CLASSES:
        raise ValueError(f"unknown policy kind {kind!r}; expected one of {POLICY_KINDS}")
    return _POLICY_CLASSES[kind](seed=seed)
