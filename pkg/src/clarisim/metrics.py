"""Ranking effectiveness metrics and rank-effectiveness curves.

All functions are pure. Rankings are ordered sequences of doc ids; judgments
are sets of relevant doc ids.
"""

from __future__ import annotations

import csv

from . import embeddings


def reciprocal_rank_at_k(ranking, relevant_ids, k: int = 10) -> float:
    """1/rank of the first relevant document within the top k, else 0."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    relevant = set(relevant_ids)
    for pos, doc_id in enumerate(ranking[:k], start=1):
        if doc_id in relevant:
            return 1.0 / pos
    return 0.0


def average_precision_at_k(ranking, relevant_ids, k: int = 10) -> float:
    """Trec-style AP@k: sum of precision at relevant hit positions over min(R, k)."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    relevant = set(relevant_ids)
    if not relevant:
        raise ValueError("judgments must be non-empty")
    hits = 0
    total = 0.0
    for pos, doc_id in enumerate(ranking[:k], start=1):
        if doc_id in relevant:
            hits += 1
            total += hits / pos
    return total / min(len(relevant), k)


def effectiveness_label(candidate, coll, relevant_ids, k: int = 10) -> float:
    """Retrieval effectiveness of one candidate query: RR@k over the collection."""
    ranking = [doc_id for doc_id, _ in embeddings.retrieve_top_k(candidate, coll, k)]
    return reciprocal_rank_at_k(ranking, relevant_ids, k)


def average_precision_of_candidate(candidate, coll, relevant_ids, k: int = 10) -> float:
    ranking = [doc_id for doc_id, _ in embeddings.retrieve_top_k(candidate, coll, k)]
    return average_precision_at_k(ranking, relevant_ids, k)


def oracle_rank_curve(scenarios, order: str = "oracle"):
    """Per-rank mean candidate effectiveness across scenarios.

    order="oracle" sorts each scenario's labels descending before averaging
    (monotone non-increasing by construction); order="given" keeps the
    candidates' generation order. Returns a list of (rank, mean) pairs.
    """
    if order not in ("oracle", "given"):
        raise ValueError(f"unknown curve order {order!r}")
    scenarios = list(scenarios)
    if not scenarios:
        raise ValueError("no scenarios")
    m = len(scenarios[0].labels)
    sums = [0.0] * m
    for sc in scenarios:
        labels = list(sc.labels)
        if len(labels) != m:
            raise ValueError(
                f"scenario {sc.scenario_id!r} has {len(labels)} candidates, expected {m}"
            )
        if order == "oracle":
            labels.sort(reverse=True)
        for r, value in enumerate(labels):
            sums[r] += value
    n = len(scenarios)
    return [(r + 1, sums[r] / n) for r in range(m)]


def write_curve_csv(path, oracle_curve, generator_curve) -> None:
    """Emit both curves as CSV: rank, oracle mean, generation-order mean."""
    if len(oracle_curve) != len(generator_curve):
        raise ValueError("curve length mismatch")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "oracle_mean_effectiveness", "generator_mean_effectiveness"])
        for (rank, oracle_mean), (_, gen_mean) in zip(oracle_curve, generator_curve):
            writer.writerow([rank, repr(oracle_mean), repr(gen_mean)])
