"""Session loop and corpus-level experiment aggregation.

A session runs propose -> user-select -> update for up to T turns; after each
turn (and before any, the "no interaction" point) it records the retrieval
effectiveness the system would achieve if it stopped now. Experiments average
these per-turn values over a scenario corpus and attach the two
non-interactive baselines (initial query, best labeled reformulation).
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import metrics
from . import ranker as ranker_mod
from .embeddings import DocumentCollection, retrieve_top_k
from .policies import make_policy
from .user_agent import GreedyUser


@dataclass(frozen=True)
class TurnRecord:
    turn: int  # 0 = before any interaction
    proposed: tuple | None
    selected_index: int | None
    rejected_index: int | None
    final_index: int
    mrr10: float
    map10: float


@dataclass(frozen=True)
class SessionTrace:
    scenario_id: str
    policy: str
    turns_executed: int
    records: tuple  # TurnRecord per t in 0..turns_executed
    final_ranking: tuple  # top-10 (doc_id, score) of the final query


@dataclass
class ExperimentReport:
    policy: str
    turns: int
    n_scenarios: int
    seed: int
    mean_mrr10: list  # length turns + 1; index 0 = no interaction
    mean_map10: list
    user_query_mrr10: float
    user_query_map10: float
    best_reformulation_mrr10: float
    best_reformulation_map10: float
    config_digest: str = ""
    traces: list = field(default_factory=list)


def derive_seed(seed: int, tag: str) -> int:
    """Stable per-scenario seed so results do not depend on execution order."""
    digest = hashlib.sha256(f"{seed}:{tag}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def _effectiveness(candidate, coll, relevant_ids, k=10):
    ranking = [doc_id for doc_id, _ in retrieve_top_k(candidate, coll, k)]
    return (
        metrics.reciprocal_rank_at_k(ranking, relevant_ids, k),
        metrics.average_precision_at_k(ranking, relevant_ids, k),
    )


def run_session(scenario, coll: DocumentCollection, policy_kind: str, model, turns: int, seed: int = 0) -> SessionTrace:
    """One full interactive session; deterministic given (scenario, model, seed)."""
    if turns < 0:
        raise ValueError(f"turns must be >= 0, got {turns}")
    if scenario.dim != model.dim:
        raise ValueError(f"scenario dim {scenario.dim} vs model dim {model.dim}")
    session_seed = derive_seed(seed, scenario.scenario_id)
    policy = make_policy(policy_kind, seed=session_seed)
    user = GreedyUser()
    relevant = scenario.intent.relevant_doc_ids

    state = policy.start(scenario, model)
    records = []

    def record(turn, proposed, feedback):
        final_idx = policy.final_query(state, model)
        mrr, ap = _effectiveness(scenario.candidates[final_idx], coll, relevant)
        records.append(
            TurnRecord(
                turn=turn,
                proposed=proposed,
                selected_index=feedback.selected_index if feedback else None,
                rejected_index=feedback.rejected_index if feedback else None,
                final_index=final_idx,
                mrr10=mrr,
                map10=ap,
            )
        )

    record(0, None, None)
    executed = 0
    for t in range(1, turns + 1):
        pair = policy.propose(state, model)
        if pair is None:
            break  # candidate set exhausted; session complete
        a, b = pair
        feedback = user.select(
            ((a, scenario.candidates[a]), (b, scenario.candidates[b])),
            scenario.intent.embedding,
        )
        policy.update(state, feedback)
        record(t, pair, feedback)
        executed = t

    final_idx = records[-1].final_index
    ranking = tuple(retrieve_top_k(scenario.candidates[final_idx], coll, 10))
    return SessionTrace(
        scenario_id=scenario.scenario_id,
        policy=policy_kind,
        turns_executed=executed,
        records=tuple(records),
        final_ranking=ranking,
    )


def run_experiment(
    scenarios,
    coll: DocumentCollection,
    policy_kind: str,
    model,
    turns: int = 5,
    seed: int = 0,
    workers: int = 1,
    config_digest: str = "",
    keep_traces: bool = False,
) -> ExperimentReport:
    """Run every scenario's session and average metrics per turn column.

    Sessions are independent (per-scenario seeds derived from the global
    seed), so the result is identical for any worker count. Early-terminated
    sessions carry their last value forward so columns stay comparable.
    """
    scenarios = list(scenarios)
    if not scenarios:
        raise ValueError("no scenarios")

    def one(sc):
        return run_session(sc, coll, policy_kind, model, turns, seed=seed)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            traces = {tr.scenario_id: tr for tr in pool.map(one, scenarios)}
    else:
        traces = {sc.scenario_id: one(sc) for sc in scenarios}

    n = len(scenarios)
    mrr_cols = np.zeros(turns + 1)
    map_cols = np.zeros(turns + 1)
    uq_mrr = uq_map = best_mrr = best_map = 0.0
    ordered_traces = []
    for sc in scenarios:
        tr = traces[sc.scenario_id]
        ordered_traces.append(tr)
        for t in range(turns + 1):
            rec = tr.records[min(t, tr.records[-1].turn)]
            mrr_cols[t] += rec.mrr10
            map_cols[t] += rec.map10
        mrr, ap = _effectiveness(sc.q0, coll, sc.intent.relevant_doc_ids)
        uq_mrr += mrr
        uq_map += ap
        best_idx = int(np.argmax(sc.labels))
        best_mrr += max(sc.labels)
        best_map += metrics.average_precision_of_candidate(
            sc.candidates[best_idx], coll, sc.intent.relevant_doc_ids
        )

    return ExperimentReport(
        policy=policy_kind,
        turns=turns,
        n_scenarios=n,
        seed=seed,
        mean_mrr10=(mrr_cols / n).tolist(),
        mean_map10=(map_cols / n).tolist(),
        user_query_mrr10=uq_mrr / n,
        user_query_map10=uq_map / n,
        best_reformulation_mrr10=best_mrr / n,
        best_reformulation_map10=best_map / n,
        config_digest=config_digest,
        traces=ordered_traces if keep_traces else [],
    )


def report_to_dict(report: ExperimentReport, include_traces: bool = False) -> dict:
    out = {
        "policy": report.policy,
        "turns": report.turns,
        "n_scenarios": report.n_scenarios,
        "seed": report.seed,
        "config_digest": report.config_digest,
        "mean_mrr10": report.mean_mrr10,
        "mean_map10": report.mean_map10,
        "baselines": {
            "user_query": {"mrr10": report.user_query_mrr10, "map10": report.user_query_map10},
            "best_reformulation": {
                "mrr10": report.best_reformulation_mrr10,
                "map10": report.best_reformulation_map10,
            },
        },
    }
    if include_traces:
        out["traces"] = [
            {
                "scenario_id": tr.scenario_id,
                "turns_executed": tr.turns_executed,
                "records": [
                    {
                        "turn": r.turn,
                        "proposed": list(r.proposed) if r.proposed else None,
                        "selected_index": r.selected_index,
                        "rejected_index": r.rejected_index,
                        "final_index": r.final_index,
                        "mrr10": r.mrr10,
                        "map10": r.map10,
                    }
                    for r in tr.records
                ],
                "final_ranking": [[d, s] for d, s in tr.final_ranking],
            }
            for tr in report.traces
        ]
    return out


def reports_to_markdown(reports, baselines_from=None) -> str:
    """Markdown table shaped like the per-turn effectiveness tables: one row
    per strategy and metric, columns no-interaction and 1..T."""
    reports = list(reports)
    if not reports:
        raise ValueError("no reports")
    turns = reports[0].turns
    base = baselines_from or reports[0]
    header = ["strategy", "metric", "no interaction"] + [str(t) for t in range(1, turns + 1)]
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]

    def row(name, metric, values):
        cells = [f"{v:.4f}" if v is not None else "-" for v in values]
        lines.append("| " + " | ".join([name, metric] + cells) + " |")

    row("User Query", "mrr@10", [base.user_query_mrr10] + [None] * turns)
    row("User Query", "map@10", [base.user_query_map10] + [None] * turns)
    row("Best Reformulation", "mrr@10", [base.best_reformulation_mrr10] + [None] * turns)
    row("Best Reformulation", "map@10", [base.best_reformulation_map10] + [None] * turns)
    for rep in reports:
        row(rep.policy, "mrr@10", rep.mean_mrr10)
        row(rep.policy, "map@10", rep.mean_map10)
    return "\n".join(lines) + "\n"


def save_report_json(report: ExperimentReport, path, include_traces: bool = False) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report_to_dict(report, include_traces), fh, sort_keys=True, indent=2)
        fh.write("\n")
