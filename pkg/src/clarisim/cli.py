"""Command-line entry point: data generation, training, simulation, curves.

Configuration is a flat key=value file; command-line flags override file
values, which override built-in defaults. Every run is reproducible from
(--config, --seed) and output files embed a digest of the effective config.

Exit codes: 0 success, 1 validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import embeddings, metrics, ranker, scenario as scenario_mod, simulator
from .policies import POLICY_KINDS


@dataclass
class ExperimentConfig:
    # paths
    scenario_file: str = "scenarios.jsonl"
    embedding_file: str = "collection.emb"
    model_file: str = "ranker.bin"
    output_dir: str = "."
    # synthetic corpus
    dim: int = 16
    num_scenarios: int = 200
    m: int = 64
    num_distractors: int = 12
    alignment_lo: float = 0.0
    alignment_hi: float = 1.0
    q0_alignment: float = 0.1
    cluster_count: int = 2
    cluster_spread: float = 0.15
    # training
    batch_size: int = 128
    learning_rate: float = 1e-4
    adam_beta1: float = 0.9
    adam_beta2: float = 0.99
    weight_decay: float = 0.01
    dropout_p: float = 0.3
    epochs: int = 5
    hidden_turn: int = 32
    hidden_history: int = 32
    scorer_hidden: str = "64"
    pairs_per_scenario: int = 64
    max_history_turns: int = 3
    holdout_fraction: float = 0.1
    # simulation
    policy: str = "kmeans"
    turns: int = 5
    metric_k: int = 10
    display_n: int = 2  # fixed pair presentation; kept for the record
    workers: int = 1
    traces: bool = False
    seed: int = 0

    def synthetic_config(self) -> scenario_mod.SyntheticConfig:
        return scenario_mod.SyntheticConfig(
            dim=self.dim,
            num_scenarios=self.num_scenarios,
            m=self.m,
            num_distractor_docs=self.num_distractors,
            alignment_range=(self.alignment_lo, self.alignment_hi),
            initial_query_alignment=self.q0_alignment,
            cluster_count=self.cluster_count,
            cluster_spread=self.cluster_spread,
            seed=self.seed,
        )

    def train_config(self) -> ranker.TrainConfig:
        return ranker.TrainConfig(
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            adam_beta1=self.adam_beta1,
            adam_beta2=self.adam_beta2,
            weight_decay=self.weight_decay,
            dropout_p=self.dropout_p,
            epochs=self.epochs,
            seed=self.seed,
            hidden_turn=self.hidden_turn,
            hidden_history=self.hidden_history,
            scorer_hidden=tuple(int(w) for w in str(self.scorer_hidden).split(",") if w),
            pairs_per_scenario=self.pairs_per_scenario,
            max_history_turns=self.max_history_turns,
        )

    def digest(self) -> str:
        """Digest over result-determining parameters; paths, worker count and
        trace emission do not change results and are excluded."""
        values = asdict(self)
        for key in ("scenario_file", "embedding_file", "model_file", "output_dir", "workers", "traces"):
            values.pop(key)
        canon = json.dumps(values, sort_keys=True)
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(name: str, raw: str):
    kind = _FIELD_TYPES[name]
    if kind == "bool":
        return raw.lower() in ("1", "true", "yes", "on")
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw


def load_config_file(path) -> dict:
    """Flat key=value lines; '#' starts a comment."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, raw = (part.strip() for part in line.split("=", 1))
            if key not in _FIELD_TYPES:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = _coerce(key, raw)
    return values


def build_config(args) -> ExperimentConfig:
    values = {}
    if args.config:
        values.update(load_config_file(args.config))
    for key in _FIELD_TYPES:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return ExperimentConfig(**values)


def _out(cfg, name) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out / name


def cmd_gen_data(cfg: ExperimentConfig) -> int:
    corpus = scenario_mod.generate_synthetic(cfg.synthetic_config())
    digest = cfg.digest()
    embeddings.save_collection(corpus.collection, _out(cfg, cfg.embedding_file))
    scenario_mod.save_scenarios(
        corpus.scenarios, _out(cfg, cfg.scenario_file), meta={"config_digest": digest}
    )
    q0_mean = float(
        np.mean(
            [
                metrics.effectiveness_label(sc.q0, corpus.collection, sc.intent.relevant_doc_ids)
                for sc in corpus.scenarios
            ]
        )
    )
    best_mean = float(np.mean([max(sc.labels) for sc in corpus.scenarios]))
    print(f"wrote {len(corpus.scenarios)} scenarios, {len(corpus.collection)} documents")
    print(f"mean q0 effectiveness: {q0_mean:.4f}")
    print(f"mean best-candidate effectiveness: {best_mean:.4f}")
    print(f"config digest: {digest}")
    return 0


def cmd_train(cfg: ExperimentConfig) -> int:
    scenarios = scenario_mod.load_scenarios(_out(cfg, cfg.scenario_file))
    n_hold = int(len(scenarios) * cfg.holdout_fraction)
    train_set = scenarios[: len(scenarios) - n_hold] if n_hold else scenarios
    holdout = scenarios[len(scenarios) - n_hold :] if n_hold else []

    rows = []

    def on_epoch(model, epoch):
        acc = ""
        if holdout and ranker.has_trainable_pairs(holdout):
            acc = f"{ranker.evaluate_pairwise_accuracy(model, holdout, seed=cfg.seed):.6f}"
        rows.append((epoch, log[epoch]["loss"], acc))

    log = []
    model = ranker.train(train_set, cfg.train_config(), log=log, epoch_callback=on_epoch)
    ranker.save_model(model, _out(cfg, cfg.model_file))
    with open(_out(cfg, "training_log.csv"), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss", "holdout_pairwise_accuracy"])
        writer.writerow(["# config_digest", cfg.digest(), ""])
        for epoch, loss, acc in rows:
            writer.writerow([epoch, repr(loss), acc])
    if rows:
        print(f"final loss: {rows[-1][1]:.6f}")
        if rows[-1][2]:
            print(f"held-out pairwise accuracy: {rows[-1][2]}")
    print(f"config digest: {cfg.digest()}")
    return 0


def _resolve_policies(selector: str):
    if selector == "all":
        return list(POLICY_KINDS)
    kinds = [k.strip() for k in selector.split(",") if k.strip()]
    for k in kinds:
        if k not in POLICY_KINDS:
            raise ValueError(f"unknown policy {k!r}; expected one of {POLICY_KINDS} or 'all'")
    return kinds


def cmd_simulate(cfg: ExperimentConfig) -> int:
    scenarios = scenario_mod.load_scenarios(_out(cfg, cfg.scenario_file))
    coll = embeddings.load_collection(_out(cfg, cfg.embedding_file))
    model = ranker.load_model(_out(cfg, cfg.model_file))
    digest = cfg.digest()
    reports = []
    for kind in _resolve_policies(cfg.policy):
        report = simulator.run_experiment(
            scenarios,
            coll,
            kind,
            model,
            turns=cfg.turns,
            seed=cfg.seed,
            workers=cfg.workers,
            config_digest=digest,
            keep_traces=cfg.traces,
        )
        simulator.save_report_json(
            report, _out(cfg, f"report_{kind}.json"), include_traces=cfg.traces
        )
        reports.append(report)
    with open(_out(cfg, "report.md"), "w", encoding="utf-8") as fh:
        fh.write(f"<!-- config_digest: {digest} -->\n")
        fh.write(simulator.reports_to_markdown(reports))
    _write_report_csv(_out(cfg, "report.csv"), reports, digest)
    print(simulator.reports_to_markdown(reports))
    return 0


def _write_report_csv(path, reports, digest):
    turns = reports[0].turns
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["# config_digest", digest])
        writer.writerow(["strategy", "metric", "no_interaction"] + [str(t) for t in range(1, turns + 1)])
        base = reports[0]
        writer.writerow(["user_query", "mrr@10", repr(base.user_query_mrr10)] + [""] * turns)
        writer.writerow(["user_query", "map@10", repr(base.user_query_map10)] + [""] * turns)
        writer.writerow(
            ["best_reformulation", "mrr@10", repr(base.best_reformulation_mrr10)] + [""] * turns
        )
        writer.writerow(
            ["best_reformulation", "map@10", repr(base.best_reformulation_map10)] + [""] * turns
        )
        for rep in reports:
            writer.writerow([rep.policy, "mrr@10"] + [repr(v) for v in rep.mean_mrr10])
            writer.writerow([rep.policy, "map@10"] + [repr(v) for v in rep.mean_map10])


def cmd_curve(cfg: ExperimentConfig) -> int:
    scenarios = scenario_mod.load_scenarios(_out(cfg, cfg.scenario_file))
    oracle = metrics.oracle_rank_curve(scenarios, order="oracle")
    generator = metrics.oracle_rank_curve(scenarios, order="given")
    path = _out(cfg, "curve.csv")
    metrics.write_curve_csv(path, oracle, generator)
    with open(path, "r", encoding="utf-8") as fh:
        body = fh.read()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# config_digest: {cfg.digest()}\n")
        fh.write(body)
    print(f"wrote {path} ({len(oracle)} ranks)")
    return 0


def _add_common(parser):
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--output", dest="output_dir", default=None, help="output directory")
    parser.add_argument("--scenario-file", dest="scenario_file", default=None)
    parser.add_argument("--embedding-file", dest="embedding_file", default=None)
    parser.add_argument("--model-file", dest="model_file", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clarisim",
        description="Multi-turn interactive query clarification simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic scenario corpus")
    _add_common(p)
    p.add_argument("--num-scenarios", dest="num_scenarios", type=int, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--num-distractors", dest="num_distractors", type=int, default=None)

    p = sub.add_parser("train", help="train the pairwise query ranker")
    _add_common(p)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    p.add_argument("--learning-rate", dest="learning_rate", type=float, default=None)

    p = sub.add_parser("simulate", help="run interactive sessions and report per-turn metrics")
    _add_common(p)
    p.add_argument(
        "--policy",
        default=None,
        help="naive,random,top2,random5,kmeans (comma list) or 'all'",
    )
    p.add_argument("--turns", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--traces", action="store_const", const=True, default=None)

    p = sub.add_parser("curve", help="export oracle/generator rank-effectiveness curves")
    _add_common(p)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        handler = {
            "gen-data": cmd_gen_data,
            "train": cmd_train,
            "simulate": cmd_simulate,
            "curve": cmd_curve,
        }[args.command]
        return handler(cfg)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
