import itertools

import numpy as np
import pytest

from clarisim import policies
from clarisim.policies import POLICY_KINDS, kmeans_2, make_policy
from clarisim.ranker import init_model, rank_candidates
from clarisim.scenario import generate_separable, generate_two_block, intent_block_indices
from clarisim.user_agent import FeedbackTurn, GreedyUser


def zero_scorer_model(dim, seed=0):
    """Model whose scores are identically 0 — ranking falls back to index order."""
    model = init_model(dim, hidden_turn=4, hidden_history=4, scorer_hidden=(6,), dropout_p=0.0, seed=seed)
    for name in ("mlp_W0", "mlp_b0", "mlp_W1", "mlp_b1"):
        model.params[name][:] = 0.0
    return model


def random_model(dim, seed=0):
    return init_model(dim, hidden_turn=8, hidden_history=8, scorer_hidden=(12,), dropout_p=0.0, seed=seed)


def scenario(seed, m=8, dim=6):
    return generate_separable(1, dim=dim, m=m, seed=seed)[0]


def feedback_for(sc, pair):
    return GreedyUser().select(
        ((pair[0], sc.candidates[pair[0]]), (pair[1], sc.candidates[pair[1]])),
        sc.intent.embedding,
    )


class TestKMeans2:
    def test_two_obvious_groups(self):
        pts = np.array([[0.0, 0.0], [0.1, 0.0], [0.0, 0.1], [5.0, 5.0], [5.1, 5.0], [5.0, 5.1]])
        assign = kmeans_2(pts, seed=0)
        assert len(set(assign[:3])) == 1
        assert len(set(assign[3:])) == 1
        assert assign[0] != assign[3]

    def test_identical_points_split(self):
        assign = kmeans_2(np.ones((4, 3)), seed=1)
        assert set(assign) <= {0, 1}
        assert len(assign) == 4

    def test_two_points(self):
        assign = kmeans_2(np.array([[0.0, 0.0], [1.0, 1.0]]), seed=2)
        assert assign[0] != assign[1]

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(3)
        pts = rng.standard_normal((10, 4))
        assert np.array_equal(kmeans_2(pts, seed=7), kmeans_2(pts, seed=7))

    def test_single_point_rejected(self):
        with pytest.raises(ValueError, match=">= 2"):
            kmeans_2(np.ones((1, 2)))

    def test_near_optimal_sse_vs_exhaustive(self):
        # 8 random points: compare against the best of all 2-partitions
        rng = np.random.default_rng(4)
        pts = rng.standard_normal((8, 4))

        def sse(groups):
            total = 0.0
            for g in groups:
                sub = pts[list(g)]
                total += np.sum((sub - sub.mean(axis=0)) ** 2)
            return total

        best = min(
            sse((combo, tuple(i for i in range(8) if i not in combo)))
            for r in range(1, 8)
            for combo in itertools.combinations(range(8), r)
        )
        achieved = min(
            sse((
                tuple(np.flatnonzero(kmeans_2(pts, seed=s) == 0)),
                tuple(np.flatnonzero(kmeans_2(pts, seed=s) == 1)),
            ))
            for s in range(20)
        )
        assert achieved <= best * 1.2


class TestContract:
    @pytest.mark.parametrize("kind", POLICY_KINDS)
    def test_propose_returns_distinct_remaining(self, kind):
        sc = scenario(10)
        model = random_model(6, seed=1)
        policy = make_policy(kind, seed=5)
        state = policy.start(sc, model)
        for _ in range(4):
            pair = policy.propose(state, model)
            if pair is None:
                break
            a, b = pair
            assert a != b
            assert a in state.remaining and b in state.remaining
            policy.update(state, feedback_for(sc, pair))
        assert state.remaining  # a best query always survives

    @pytest.mark.parametrize("kind", POLICY_KINDS)
    def test_exhaustion_returns_none(self, kind):
        sc = scenario(11, m=2)
        model = random_model(6, seed=2)
        policy = make_policy(kind, seed=0)
        state = policy.start(sc, model)
        pair = policy.propose(state, model)
        policy.update(state, feedback_for(sc, pair))
        if kind in ("naive", "kmeans"):  # these actually shrink the pool
            assert len(state.remaining) == 1
            assert policy.propose(state, model) is None
        idx = policy.final_query(state, model)
        assert idx in state.remaining

    def test_update_rejects_foreign_feedback(self):
        sc = scenario(12)
        model = random_model(6, seed=3)
        policy = make_policy("naive", seed=0)
        state = policy.start(sc, model)
        policy.propose(state, model)
        state.remaining = [i for i in state.remaining if i not in (0, 1)]
        fb = FeedbackTurn(sc.candidates[0], sc.candidates[1], 0, 1)
        with pytest.raises(ValueError, match="remaining"):
            policy.update(state, fb)

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown"):
            make_policy("bogus")


class TestNaive:
    def test_tournament_matches_hand_rolled_oracle(self):
        sc = scenario(13, m=6)
        model = random_model(6, seed=4)
        user = GreedyUser()
        policy = make_policy("naive")
        state = policy.start(sc, model)

        # independent oracle: frozen empty-history ranking, sequential duels
        frozen = rank_candidates(sc, range(sc.m), (), model)
        alive = list(frozen)
        while len(alive) > 1:
            pair = policy.propose(state, model)
            assert pair == (alive[0], alive[1])
            fb = user.select(((pair[0], sc.candidates[pair[0]]), (pair[1], sc.candidates[pair[1]])), sc.intent.embedding)
            policy.update(state, fb)
            alive.remove(fb.rejected_index)
        assert policy.final_query(state, model) == alive[0]

    def test_zero_scorer_walks_index_order(self):
        sc = scenario(14, m=4)
        model = zero_scorer_model(6)
        policy = make_policy("naive")
        state = policy.start(sc, model)
        assert policy.propose(state, model) == (0, 1)

    def test_history_does_not_move_frozen_head(self):
        sc = scenario(15, m=5)
        model = random_model(6, seed=6)
        policy = make_policy("naive")
        state = policy.start(sc, model)
        frozen = list(state.data["frozen_order"])
        pair = policy.propose(state, model)
        policy.update(state, feedback_for(sc, pair))
        survivors = [i for i in frozen if i in state.remaining]
        assert policy.final_query(state, model) == survivors[0]


class TestTop2:
    def test_zero_scorer_proposes_first_two(self):
        sc = scenario(16, m=5)
        model = zero_scorer_model(6)
        policy = make_policy("top2")
        state = policy.start(sc, model)
        assert policy.propose(state, model) == (0, 1)

    def test_matches_fresh_ranking_each_turn(self):
        sc = scenario(17, m=6)
        model = random_model(6, seed=7)
        policy = make_policy("top2")
        state = policy.start(sc, model)
        for _ in range(3):
            order = rank_candidates(sc, state.remaining, state.history, model)
            assert policy.propose(state, model) == (order[0], order[1])
            policy.update(state, feedback_for(sc, (order[0], order[1])))


class TestRandomPolicies:
    @pytest.mark.parametrize("kind", ["random", "random5"])
    def test_higher_ranked_presented_first(self, kind):
        sc = scenario(18, m=10)
        model = random_model(6, seed=8)
        policy = make_policy(kind, seed=9)
        state = policy.start(sc, model)
        order = rank_candidates(sc, state.remaining, state.history, model)
        for _ in range(10):
            a, b = policy.propose(state, model)
            assert order.index(a) < order.index(b)

    def test_random5_confined_to_top_five(self):
        sc = scenario(19, m=12)
        model = random_model(6, seed=10)
        policy = make_policy("random5", seed=11)
        state = policy.start(sc, model)
        top5 = set(rank_candidates(sc, state.remaining, state.history, model)[:5])
        for _ in range(25):
            a, b = policy.propose(state, model)
            assert {a, b} <= top5

    def test_random_covers_full_pool(self):
        sc = scenario(20, m=12)
        model = random_model(6, seed=12)
        policy = make_policy("random", seed=13)
        state = policy.start(sc, model)
        seen = set()
        for _ in range(200):
            seen.update(policy.propose(state, model))
        assert seen == set(range(12))


class TestKMeansPolicy:
    def test_proposes_one_per_cluster_and_drops_rejected_cluster(self):
        corpus = generate_two_block(1, dim=8, m=8, seed=21)
        sc = corpus.scenarios[0]
        intent_block, off_block = intent_block_indices(sc)
        model = random_model(8, seed=14)
        policy = make_policy("kmeans", seed=15)
        state = policy.start(sc, model)
        pair = policy.propose(state, model)
        clusters = state.data["clusters"]
        assert clusters[pair[0]] != clusters[pair[1]]
        fb = feedback_for(sc, pair)
        # greedy user keeps the intent-side query on a fully separated corpus
        assert fb.selected_index in intent_block
        policy.update(state, fb)
        assert set(state.remaining) == set(intent_block)

    def test_update_before_propose_rejected(self):
        sc = scenario(22, m=4)
        model = random_model(6, seed=16)
        policy = make_policy("kmeans")
        state = policy.start(sc, model)
        with pytest.raises(ValueError, match="propose"):
            policy.update(state, feedback_for(sc, (0, 1)))

    def test_session_deterministic_given_seed(self):
        sc = scenario(23, m=10)
        model = random_model(6, seed=17)

        def run():
            policy = make_policy("kmeans", seed=18)
            state = policy.start(sc, model)
            trace = []
            for _ in range(4):
                pair = policy.propose(state, model)
                if pair is None:
                    break
                trace.append(pair)
                policy.update(state, feedback_for(sc, pair))
            trace.append(policy.final_query(state, model))
            return trace

        assert run() == run()


def test_registry_matches_kinds():
    assert set(policies._POLICY_CLASSES) == set(POLICY_KINDS)
