import json

import numpy as np
import pytest

from clarisim import metrics, scenario
from clarisim.scenario import (
    ClarificationScenario,
    Intent,
    SyntheticConfig,
    generate_separable,
    generate_synthetic,
    generate_two_block,
    intent_block_indices,
    load_scenarios,
    relabel,
    save_scenarios,
)

SMALL = SyntheticConfig(num_scenarios=8, m=6, dim=8, num_distractor_docs=4, seed=11)


def test_same_seed_identical_corpora():
    a = generate_synthetic(SMALL)
    b = generate_synthetic(SMALL)
    assert np.array_equal(a.collection.vectors, b.collection.vectors)
    for sa, sb in zip(a.scenarios, b.scenarios):
        assert sa.scenario_id == sb.scenario_id
        assert np.array_equal(sa.q0, sb.q0)
        assert np.array_equal(sa.candidates, sb.candidates)
        assert sa.labels == sb.labels


def test_different_seed_differs():
    a = generate_synthetic(SMALL)
    b = generate_synthetic(SyntheticConfig(num_scenarios=8, m=6, dim=8, num_distractor_docs=4, seed=12))
    assert not np.array_equal(a.scenarios[0].candidates, b.scenarios[0].candidates)


def test_labels_self_consistent():
    corpus = generate_synthetic(SMALL)
    for sc in corpus.scenarios:
        for i in range(sc.m):
            recomputed = metrics.effectiveness_label(
                sc.candidates[i], corpus.collection, sc.intent.relevant_doc_ids
            )
            assert sc.labels[i] == recomputed


def test_alpha_near_one_with_orthogonal_distractors_gives_label_one():
    cfg = SyntheticConfig(
        num_scenarios=4, m=6, dim=16, num_distractor_docs=3, alignment_range=(0.99, 1.0), seed=5
    )
    corpus = generate_synthetic(cfg)
    for sc in corpus.scenarios:
        assert max(sc.labels) == 1.0


def test_degenerate_alignment_range_rejected():
    with pytest.raises(ValueError, match="alignment_range"):
        SyntheticConfig(alignment_range=(1.0, 1.0))


def test_mean_best_label_exceeds_mean_q0_label():
    # dim=32 variant of the default corpus, reduced count for test runtime
    cfg = SyntheticConfig(dim=32, num_scenarios=50, seed=0)
    corpus = generate_synthetic(cfg)
    best_mean = np.mean([max(sc.labels) for sc in corpus.scenarios])
    q0_mean = np.mean(
        [
            metrics.effectiveness_label(sc.q0, corpus.collection, sc.intent.relevant_doc_ids)
            for sc in corpus.scenarios
        ]
    )
    assert best_mean > q0_mean


def test_two_block_similarity_structure():
    corpus = generate_two_block(10, dim=16, m=8, seed=3)
    for sc in corpus.scenarios:
        a_block, b_block = intent_block_indices(sc)
        assert len(a_block) == len(b_block) == 4
        sims = sc.candidates @ sc.candidates.T
        within = np.mean([sims[i, j] for i in a_block for j in a_block if i != j])
        cross = np.mean([sims[i, j] for i in a_block for j in b_block])
        assert within > cross
        # full separation: every intent-side candidate beats every off-side one
        intent_sims = sc.candidates @ sc.intent.embedding
        assert min(intent_sims[a_block]) > max(intent_sims[b_block])


def test_cluster_structure_with_two_clusters():
    cfg = SyntheticConfig(
        num_scenarios=5, m=16, dim=16, num_distractor_docs=3,
        cluster_count=2, cluster_spread=0.05, alignment_range=(0.0, 0.2), seed=2,
    )
    corpus = generate_synthetic(cfg)
    blocky = 0
    for sc in corpus.scenarios:
        sims = sc.candidates @ sc.candidates.T
        np.fill_diagonal(sims, np.nan)
        # crude 2-block check: split by similarity to candidate 0
        near = sims[0] > np.nanmean(sims[0])
        near[0] = True
        if near.sum() < 2 or (~near).sum() < 2:
            continue
        within = np.nanmean(sims[np.ix_(near, near)])
        cross = np.nanmean(sims[np.ix_(near, ~near)])
        blocky += within > cross
    assert blocky >= 4


def test_separable_corpus_labels_follow_intent_similarity():
    for sc in generate_separable(10, dim=8, m=8, seed=1):
        sims = sc.candidates @ sc.intent.embedding
        ones = [i for i in range(sc.m) if sc.labels[i] == 1.0]
        zeros = [i for i in range(sc.m) if sc.labels[i] == 0.0]
        assert len(ones) == len(zeros) == 4
        assert min(sims[ones]) > max(sims[zeros])


class TestPersistence:
    def test_round_trip(self, tmp_path):
        corpus = generate_synthetic(SMALL)
        path = tmp_path / "s.jsonl"
        save_scenarios(corpus.scenarios, path, meta={"config_digest": "abc"})
        loaded = load_scenarios(path)
        assert len(loaded) == len(corpus.scenarios)
        for sa, sb in zip(corpus.scenarios, loaded):
            assert sa.scenario_id == sb.scenario_id
            assert np.array_equal(sa.q0, sb.q0)
            assert np.array_equal(sa.candidates, sb.candidates)
            assert sa.labels == sb.labels
            assert sa.intent.relevant_doc_ids == sb.intent.relevant_doc_ids

    def test_label_count_mismatch_names_scenario(self, tmp_path):
        rec = {
            "id": "broken-one",
            "q0": [1.0, 0.0],
            "intent": [1.0, 0.0],
            "relevant_docs": ["r"],
            "candidates": [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
            "labels": [0.5, 0.5],
        }
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps(rec) + "\n")
        with pytest.raises(ValueError, match="broken-one"):
            load_scenarios(path)

    def test_hand_written_minimal_fixture(self, tmp_path):
        rec = {
            "id": "mini",
            "q0": [1.0, 0.0],
            "intent": [0.0, 1.0],
            "relevant_docs": ["r"],
            "candidates": [[1.0, 0.0], [0.0, 1.0]],
            "labels": [0.0, 1.0],
        }
        path = tmp_path / "mini.jsonl"
        path.write_text(json.dumps(rec) + "\n")
        (sc,) = load_scenarios(path)
        assert sc.m == 2 and sc.dim == 2

    def test_dim_inconsistency_rejected(self, tmp_path):
        rec = {
            "id": "baddim",
            "q0": [1.0, 0.0],
            "intent": [1.0, 0.0],
            "relevant_docs": ["r"],
            "candidates": [[1.0, 0.0], [0.0, 1.0, 2.0]],
            "labels": [0.0, 1.0],
        }
        path = tmp_path / "baddim.jsonl"
        path.write_text(json.dumps(rec) + "\n")
        with pytest.raises(ValueError, match="baddim"):
            load_scenarios(path)


class TestRelabel:
    def test_idempotent(self):
        corpus = generate_synthetic(SMALL)
        once = relabel(corpus.scenarios, corpus.collection)
        twice = relabel(once, corpus.collection)
        assert [s.labels for s in once] == [s.labels for s in twice]

    def test_candidate_equal_to_relevant_doc(self):
        corpus = generate_two_block(2, dim=8, m=4, num_distractor_docs=2, seed=0)
        sc = corpus.scenarios[0]
        rel_id = next(iter(sc.intent.relevant_doc_ids))
        rel_vec = corpus.collection.vectors[corpus.collection.doc_ids.index(rel_id)]
        cands = np.vstack([rel_vec, sc.candidates[1:]])
        modified = ClarificationScenario(sc.scenario_id, sc.q0, sc.intent, cands, sc.labels)
        (out,) = relabel([modified], corpus.collection)
        assert out.labels[0] == 1.0

    def test_dim_mismatch(self):
        corpus = generate_synthetic(SMALL)
        other = generate_synthetic(SyntheticConfig(num_scenarios=2, m=4, dim=4, num_distractor_docs=2, seed=0))
        with pytest.raises(ValueError, match="dim"):
            relabel(corpus.scenarios, other.collection)


def test_scenario_invariants():
    intent = Intent(np.array([1.0, 0.0]), frozenset(["r"]))
    with pytest.raises(ValueError, match=">= 2"):
        ClarificationScenario("x", np.array([1.0, 0.0]), intent, np.ones((1, 2)), (0.5,))
    with pytest.raises(ValueError, match="labels"):
        ClarificationScenario("x", np.array([1.0, 0.0]), intent, np.ones((2, 2)), (0.5,))
    with pytest.raises(ValueError, match=r"\[0, 1\]"):
        ClarificationScenario("x", np.array([1.0, 0.0]), intent, np.ones((2, 2)), (0.5, 1.5))
    with pytest.raises(ValueError, match="relevant"):
        Intent(np.array([1.0]), frozenset())
