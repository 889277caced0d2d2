"""Simulation units (intent + initial query + candidate reformulations) and
the deterministic synthetic corpus generator that stands in for an external
query-reformulation generator at desk scale.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import metrics
from .embeddings import DocumentCollection, as_embedding, make_collection


@dataclass(frozen=True)
class Intent:
    """What the simulated user actually wants: an embedding plus its relevant docs."""

    embedding: np.ndarray
    relevant_doc_ids: frozenset

    def __post_init__(self):
        if not self.relevant_doc_ids:
            raise ValueError("intent must have at least one relevant document")


@dataclass(frozen=True)
class ClarificationScenario:
    """One session's worth of data: q0, intent, and the labeled candidate set."""

    scenario_id: str
    q0: np.ndarray
    intent: Intent
    candidates: np.ndarray  # shape (m, dim); generation order preserved
    labels: tuple

    def __post_init__(self):
        m = self.candidates.shape[0]
        if m < 2:
            raise ValueError(f"scenario {self.scenario_id!r}: needs >= 2 candidates, got {m}")
        if len(self.labels) != m:
            raise ValueError(
                f"scenario {self.scenario_id!r}: {m} candidates but {len(self.labels)} labels"
            )
        dim = self.q0.size
        if self.candidates.shape[1] != dim or self.intent.embedding.size != dim:
            raise ValueError(f"scenario {self.scenario_id!r}: inconsistent embedding dims")
        for y in self.labels:
            if not 0.0 <= y <= 1.0:
                raise ValueError(f"scenario {self.scenario_id!r}: label {y} outside [0, 1]")
        self.candidates.setflags(write=False)

    @property
    def m(self) -> int:
        return self.candidates.shape[0]

    @property
    def dim(self) -> int:
        return self.q0.size


@dataclass(frozen=True)
class SyntheticConfig:
    dim: int = 16
    num_scenarios: int = 200
    m: int = 64
    num_distractor_docs: int = 12
    alignment_range: tuple = (0.0, 1.0)
    initial_query_alignment: float = 0.1
    cluster_count: int = 2
    cluster_spread: float = 0.15
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.alignment_range
        if not (0.0 <= lo < hi <= 1.0):
            raise ValueError(f"alignment_range must satisfy 0 <= lo < hi <= 1, got ({lo}, {hi})")
        if self.m < 2:
            raise ValueError(f"m must be >= 2, got {self.m}")
        if not 0.0 <= self.initial_query_alignment <= 1.0:
            raise ValueError("initial_query_alignment must be in [0, 1]")
        if self.dim < 2 or self.num_scenarios < 1 or self.num_distractor_docs < 0:
            raise ValueError("invalid synthetic config sizes")
        if self.cluster_count < 1 or self.cluster_spread < 0:
            raise ValueError("invalid cluster parameters")


class SyntheticCorpus(NamedTuple):
    scenarios: list
    collection: DocumentCollection


def _unit(rng, dim):
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def _normalize(v):
    return v / np.linalg.norm(v)


def _f32_round(v):
    # collections are persisted as f32; rounding here keeps labels identical
    # before and after a save/load cycle
    return v.astype(np.float32).astype(np.float64)


def generate_synthetic(cfg: SyntheticConfig) -> SyntheticCorpus:
    """Deterministic synthetic corpus: same cfg (incl. seed) -> identical output.

    Per scenario: the intent is a random unit vector whose single relevant
    document equals it; distractors are random unit vectors; each candidate is
    normalize(a*intent + (1-a)*noise) with a drawn from alignment_range and
    noise drawn around one of cluster_count cluster directions. Candidate
    order is shuffled (no generation-likelihood model exists here).
    """
    rng = np.random.default_rng(cfg.seed)
    doc_ids, doc_vecs = [], []
    raw = []
    for s in range(cfg.num_scenarios):
        sid = f"s{s:05d}"
        intent_vec = _unit(rng, cfg.dim)
        rel_id = f"{sid}:rel"
        doc_ids.append(rel_id)
        doc_vecs.append(_f32_round(intent_vec))
        for j in range(cfg.num_distractor_docs):
            doc_ids.append(f"{sid}:d{j:03d}")
            doc_vecs.append(_f32_round(_unit(rng, cfg.dim)))

        clusters = [_unit(rng, cfg.dim) for _ in range(cfg.cluster_count)]
        cands = np.empty((cfg.m, cfg.dim))
        for i in range(cfg.m):
            alpha = rng.uniform(*cfg.alignment_range)
            center = clusters[rng.integers(cfg.cluster_count)]
            noise = _normalize(center + cfg.cluster_spread * rng.standard_normal(cfg.dim))
            cands[i] = _normalize(alpha * intent_vec + (1.0 - alpha) * noise)
        rng.shuffle(cands, axis=0)

        a0 = cfg.initial_query_alignment
        q0 = _normalize(a0 * intent_vec + (1.0 - a0) * _unit(rng, cfg.dim))
        raw.append((sid, q0, intent_vec, rel_id, cands))

    coll = make_collection(doc_ids, np.array(doc_vecs))
    scenarios = []
    for sid, q0, intent_vec, rel_id, cands in raw:
        intent = Intent(embedding=intent_vec, relevant_doc_ids=frozenset([rel_id]))
        labels = tuple(
            metrics.effectiveness_label(cands[i], coll, intent.relevant_doc_ids)
            for i in range(cfg.m)
        )
        scenarios.append(
            ClarificationScenario(
                scenario_id=sid, q0=q0, intent=intent, candidates=cands, labels=labels
            )
        )
    return SyntheticCorpus(scenarios, coll)


def generate_separable(
    num_scenarios: int,
    dim: int = 32,
    m: int = 16,
    seed: int = 0,
) -> list:
    """Linearly separable training corpus: q0 equals the intent, half the
    candidates are strongly intent-aligned (label 1), half weakly (label 0),
    with a wide similarity margin between the groups. Labels are a perfect
    monotone function of dot(candidate, intent).
    """
    rng = np.random.default_rng(seed)
    out = []
    for s in range(num_scenarios):
        sid = f"sep{s:05d}"
        intent_vec = _unit(rng, dim)
        cands = np.empty((m, dim))
        labels = np.empty(m)
        for i in range(m):
            aligned = i < m // 2
            alpha = rng.uniform(0.7, 1.0) if aligned else rng.uniform(0.0, 0.3)
            noise = _unit(rng, dim)
            cands[i] = _normalize(alpha * intent_vec + (1.0 - alpha) * noise)
            labels[i] = 1.0 if aligned else 0.0
        perm = rng.permutation(m)
        out.append(
            ClarificationScenario(
                scenario_id=sid,
                q0=intent_vec,
                intent=Intent(embedding=intent_vec, relevant_doc_ids=frozenset([f"{sid}:rel"])),
                candidates=cands[perm],
                labels=tuple(labels[perm]),
            )
        )
    return out


def generate_two_block(
    num_scenarios: int,
    dim: int = 16,
    m: int = 8,
    num_distractor_docs: int = 10,
    seed: int = 0,
) -> SyntheticCorpus:
    """Two-block corpus for the k-means refinement policy: half the candidates
    sit near the intent (every one strictly more intent-similar than every
    off-block candidate), the other half cluster around an orthogonal
    direction. Used by cluster-elimination tests.
    """
    if m < 4 or m % 2:
        raise ValueError(f"m must be even and >= 4, got {m}")
    rng = np.random.default_rng(seed)
    doc_ids, doc_vecs = [], []
    raw = []
    for s in range(num_scenarios):
        sid = f"tb{s:05d}"
        intent_vec = _unit(rng, dim)
        rel_id = f"{sid}:rel"
        doc_ids.append(rel_id)
        doc_vecs.append(_f32_round(intent_vec))
        for j in range(num_distractor_docs):
            doc_ids.append(f"{sid}:d{j:03d}")
            doc_vecs.append(_f32_round(_unit(rng, dim)))

        off_dir = _unit(rng, dim)
        off_dir = _normalize(off_dir - (off_dir @ intent_vec) * intent_vec)
        cands = np.empty((m, dim))
        for i in range(m // 2):
            alpha = rng.uniform(0.75, 0.95)
            noise = rng.standard_normal(dim) * 0.05
            noise -= (noise @ intent_vec) * intent_vec
            cands[i] = _normalize(alpha * intent_vec + (1.0 - alpha) * _normalize(off_dir + noise) * 0.2)
        for i in range(m // 2, m):
            alpha = rng.uniform(0.0, 0.15)
            noise = rng.standard_normal(dim) * 0.05
            noise -= (noise @ intent_vec) * intent_vec
            cands[i] = _normalize(alpha * intent_vec + (1.0 - alpha) * _normalize(off_dir + noise))
        q0 = _normalize(0.5 * intent_vec + 0.5 * off_dir)
        raw.append((sid, q0, intent_vec, rel_id, cands))

    coll = make_collection(doc_ids, np.array(doc_vecs))
    scenarios = []
    for sid, q0, intent_vec, rel_id, cands in raw:
        intent = Intent(embedding=intent_vec, relevant_doc_ids=frozenset([rel_id]))
        labels = tuple(
            metrics.effectiveness_label(cands[i], coll, intent.relevant_doc_ids)
            for i in range(m)
        )
        scenarios.append(
            ClarificationScenario(
                scenario_id=sid, q0=q0, intent=intent, candidates=cands, labels=labels
            )
        )
    return SyntheticCorpus(scenarios, coll)


def intent_block_indices(scenario: ClarificationScenario):
    """Split a two-block scenario's candidate indices by intent similarity.

    Returns (intent_side, off_side) sorted by descending dot with the intent;
    the split point is the largest similarity gap.
    """
    sims = scenario.candidates @ scenario.intent.embedding
    order = np.argsort(-sims)
    gaps = sims[order[:-1]] - sims[order[1:]]
    cut = int(np.argmax(gaps)) + 1
    return sorted(int(i) for i in order[:cut]), sorted(int(i) for i in order[cut:])


def relabel(scenarios, coll: DocumentCollection):
    """Recompute every label against the given collection. Idempotent."""
    out = []
    for sc in scenarios:
        if sc.dim != coll.dim:
            raise ValueError(
                f"scenario {sc.scenario_id!r} dim {sc.dim} vs collection dim {coll.dim}"
            )
        labels = tuple(
            metrics.effectiveness_label(sc.candidates[i], coll, sc.intent.relevant_doc_ids)
            for i in range(sc.m)
        )
        out.append(
            ClarificationScenario(
                scenario_id=sc.scenario_id,
                q0=sc.q0,
                intent=sc.intent,
                candidates=sc.candidates,
                labels=labels,
            )
        )
    return out


def save_scenarios(scenarios, path, meta: dict | None = None) -> None:
    """JSON-lines scenario file; an optional leading {"_meta": ...} line carries
    run metadata such as the config digest."""
    with open(path, "w", encoding="utf-8") as fh:
        if meta is not None:
            fh.write(json.dumps({"_meta": meta}, sort_keys=True) + "\n")
        for sc in scenarios:
            rec = {
                "id": sc.scenario_id,
                "q0": sc.q0.tolist(),
                "intent": sc.intent.embedding.tolist(),
                "relevant_docs": sorted(sc.intent.relevant_doc_ids),
                "candidates": [row.tolist() for row in sc.candidates],
                "labels": list(sc.labels),
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def load_scenarios(path):
    """Load and validate a JSON-lines scenario file."""
    scenarios = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: not valid JSON ({exc})") from exc
            if "_meta" in rec:
                continue
            sid = str(rec.get("id", f"<line {lineno}>"))
            try:
                q0 = as_embedding(rec["q0"])
                intent = Intent(
                    embedding=as_embedding(rec["intent"], dim=q0.size),
                    relevant_doc_ids=frozenset(rec["relevant_docs"]),
                )
                cands = np.array([as_embedding(v, dim=q0.size) for v in rec["candidates"]])
                sc = ClarificationScenario(
                    scenario_id=sid,
                    q0=q0,
                    intent=intent,
                    candidates=cands,
                    labels=tuple(float(y) for y in rec["labels"]),
                )
            except (KeyError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: scenario {sid!r}: {exc}") from exc
            scenarios.append(sc)
    return scenarios
