import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clarisim import metrics
from clarisim.embeddings import make_collection
from clarisim.scenario import ClarificationScenario, Intent


def brute_rr(ranking, relevant, k):
    # independent re-implementation used as the oracle
    for r in range(min(k, len(ranking))):
        if ranking[r] in relevant:
            return 1.0 / (r + 1)
    return 0.0


def brute_ap(ranking, relevant, k):
    precisions = []
    for r in range(min(k, len(ranking))):
        if ranking[r] in relevant:
            hits_so_far = sum(1 for d in ranking[: r + 1] if d in relevant)
            precisions.append(hits_so_far / (r + 1))
    return sum(precisions) / min(len(relevant), k)


class TestReciprocalRank:
    def test_rank_one(self):
        assert metrics.reciprocal_rank_at_k(["a", "b"], {"a"}, 10) == 1.0

    def test_rank_three(self):
        out = metrics.reciprocal_rank_at_k(["x", "y", "a", "b"], {"a"}, 10)
        assert out == pytest.approx(1 / 3)

    def test_beyond_cutoff(self):
        ranking = [f"d{i}" for i in range(10)] + ["a"]
        assert metrics.reciprocal_rank_at_k(ranking, {"a"}, 10) == 0.0

    def test_empty_ranking(self):
        assert metrics.reciprocal_rank_at_k([], {"a"}, 10) == 0.0


class TestAveragePrecision:
    def test_two_relevant_at_1_and_3(self):
        out = metrics.average_precision_at_k(["a", "x", "b", "y"], {"a", "b"}, 10)
        assert out == pytest.approx((1.0 + 2 / 3) / 2)

    def test_single_relevant_rank_one(self):
        assert metrics.average_precision_at_k(["a", "x"], {"a"}, 10) == 1.0

    def test_miss(self):
        assert metrics.average_precision_at_k(["x", "y"], {"a"}, 10) == 0.0


@given(
    st.lists(st.integers(0, 30), min_size=1, max_size=20, unique=True),
    st.sets(st.integers(0, 30), min_size=1, max_size=5),
)
def test_matches_brute_force(ranking, relevant):
    assert metrics.reciprocal_rank_at_k(ranking, relevant, 10) == brute_rr(ranking, relevant, 10)
    assert metrics.average_precision_at_k(ranking, relevant, 10) == brute_ap(ranking, relevant, 10)


@given(st.lists(st.integers(0, 30), min_size=1, max_size=20, unique=True), st.integers(0, 30))
def test_single_relevant_map_equals_mrr(ranking, rel):
    relevant = {rel}
    assert metrics.average_precision_at_k(ranking, relevant, 10) == metrics.reciprocal_rank_at_k(
        ranking, relevant, 10
    )


class TestEffectivenessLabel:
    def test_candidate_equals_relevant_doc(self):
        coll = make_collection(
            ["rel", "d1", "d2"], [[1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]
        )
        assert metrics.effectiveness_label([1.0, 0.0], coll, {"rel"}) == 1.0

    def test_buried_candidate(self):
        # candidate orthogonal to the relevant doc, 10 better-aligned distractors
        ids = ["rel"] + [f"d{i}" for i in range(10)]
        vecs = [[1.0, 0.0, 0.0]] + [[0.0, 1.0, 0.001 * i] for i in range(10)]
        coll = make_collection(ids, vecs)
        assert metrics.effectiveness_label([0.0, 1.0, 0.0], coll, {"rel"}, k=10) == 0.0

    def test_matches_exhaustive_ranking(self):
        rng = np.random.default_rng(7)
        ids = [f"d{i}" for i in range(20)]
        vecs = rng.standard_normal((20, 6))
        coll = make_collection(ids, vecs)
        cand = rng.standard_normal(6)
        relevant = {"d3", "d11"}
        scores = vecs @ cand
        full = [d for d, _ in sorted(zip(ids, scores), key=lambda p: (-p[1], p[0]))]
        assert metrics.effectiveness_label(cand, coll, relevant) == brute_rr(full, relevant, 10)


def _scenario(sid, labels):
    dim = 2
    m = len(labels)
    cands = np.tile(np.array([1.0, 0.0]), (m, 1))
    return ClarificationScenario(
        scenario_id=sid,
        q0=np.array([1.0, 0.0]),
        intent=Intent(np.array([1.0, 0.0]), frozenset(["r"])),
        candidates=cands,
        labels=tuple(labels),
    )


class TestOracleRankCurve:
    def test_single_scenario_sorted(self):
        curve = metrics.oracle_rank_curve([_scenario("s", [0.9, 0.2, 0.5])])
        assert curve == [(1, 0.9), (2, 0.5), (3, 0.2)]

    def test_constant_labels_flat(self):
        curve = metrics.oracle_rank_curve([_scenario("s", [0.4, 0.4, 0.4])])
        assert curve == [(1, 0.4), (2, 0.4), (3, 0.4)]

    def test_matches_independent_recompute(self):
        rng = np.random.default_rng(9)
        scens = [_scenario(f"s{i}", list(rng.random(5))) for i in range(50)]
        curve = metrics.oracle_rank_curve(scens)
        # independent recompute with a separate sort
        table = np.array([sorted(sc.labels)[::-1] for sc in scens])
        expected = table.mean(axis=0)
        assert [v for _, v in curve] == pytest.approx(list(expected))

    def test_oracle_curve_non_increasing(self):
        rng = np.random.default_rng(10)
        scens = [_scenario(f"s{i}", list(rng.random(6))) for i in range(20)]
        values = [v for _, v in metrics.oracle_rank_curve(scens)]
        assert all(a >= b for a, b in zip(values, values[1:]))

    def test_generator_order_preserved(self):
        curve = metrics.oracle_rank_curve([_scenario("s", [0.1, 0.9, 0.5])], order="given")
        assert curve == [(1, 0.1), (2, 0.9), (3, 0.5)]

    def test_heterogeneous_m_rejected(self):
        with pytest.raises(ValueError, match="expected"):
            metrics.oracle_rank_curve([_scenario("a", [0.1, 0.2]), _scenario("b", [0.1, 0.2, 0.3])])


def test_curve_csv(tmp_path):
    scens = [_scenario("s", [0.9, 0.2, 0.5])]
    oracle = metrics.oracle_rank_curve(scens)
    given_order = metrics.oracle_rank_curve(scens, order="given")
    path = tmp_path / "curve.csv"
    metrics.write_curve_csv(path, oracle, given_order)
    lines = path.read_text().strip().splitlines()
    assert lines[0].startswith("rank,")
    assert len(lines) == 1 + 3
