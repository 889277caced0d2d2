"""The simulated user: greedy, fully cooperative selection toward its intent."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embeddings import dot


@dataclass(frozen=True)
class FeedbackTurn:
    """One interaction's selected (q+) / rejected (q-) candidate pair."""

    selected: np.ndarray
    rejected: np.ndarray
    selected_index: int
    rejected_index: int

    def __post_init__(self):
        if self.selected_index == self.rejected_index:
            raise ValueError("selected and rejected indices must differ")
        if self.selected.shape != self.rejected.shape:
            raise ValueError(
                f"dimension mismatch: {self.selected.shape[0]} vs {self.rejected.shape[0]}"
            )


class GreedyUser:
    """Always picks the displayed candidate most similar (dot product) to the intent.

    Selection ignores presentation order; ties go to the lower candidate index.
    ``flip_prob`` is a hook for noisy future user models and defaults to off.
    """

    def __init__(self, flip_prob: float = 0.0, seed: int = 0):
        if not 0.0 <= flip_prob < 1.0:
            raise ValueError(f"flip_prob must be in [0, 1), got {flip_prob}")
        self.flip_prob = flip_prob
        self._rng = np.random.default_rng(seed)

    def select(self, pair, intent_embedding) -> FeedbackTurn:
        """pair is two (index, embedding) candidates; returns the feedback turn."""
        (idx_a, emb_a), (idx_b, emb_b) = pair
        if idx_a == idx_b:
            raise ValueError("the two presented candidates must have distinct indices")
        # canonical order by index, so the outcome cannot depend on presentation order
        if idx_b < idx_a:
            idx_a, emb_a, idx_b, emb_b = idx_b, emb_b, idx_a, emb_a
        score_a = dot(emb_a, intent_embedding)
        score_b = dot(emb_b, intent_embedding)
        a_wins = score_a >= score_b
        if self.flip_prob > 0.0 and self._rng.random() < self.flip_prob:
            a_wins = not a_wins
        if a_wins:
            return FeedbackTurn(emb_a, emb_b, idx_a, idx_b)
        return FeedbackTurn(emb_b, emb_a, idx_b, idx_a)
