"""End-to-end recovery experiment: simulate, explain at job and task level, evaluate."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .features import LOCALITY, LabeledInstance, build_stage_dataset, dataset_to_csv, to_arrays
from .policy import PolicyRef
from .proxy import (
    FidelityReport,
    RandomForest,
    evaluate_classifier,
    pair_instances,
    route_to_forest,
    train_c45,
    train_rf,
)
from .proxy.tree import DecisionTree
from .rules_align import AlignmentReport, align_with_tree
from .serialization import dumps, forest_to_json, tree_to_json, write_text
from .simulator import SimConfig, Trace, simulate, trace_to_jsonl
from .workload import generate_workload, workload_to_json

log = logging.getLogger(__name__)


@dataclass
class PipelineConfig:
    seeds: Sequence[int] = (1, 2, 3, 4, 5)
    n_jobs: int = 30
    mean_interarrival: float = 25.0
    n_executors: int = 5
    warmup_delay: float = 3.0
    lam: float = 0.5
    tree_depth: int = 5
    purity: float = 0.95
    n_trees: int = 15
    forest_depth: int = 9
    max_neg: int = 5
    forest_seed: int = 0


@dataclass
class PipelineResult:
    traces: list[Trace]
    datasets: list[list[LabeledInstance]]
    tree: DecisionTree
    forest: RandomForest
    fidelity: FidelityReport
    alignment: list[AlignmentReport]
    n_train_pairs: int
    n_test_pairs: int
    timings: dict[str, float] = field(default_factory=dict)

    def summary(self) -> dict:
        root = self.tree.root
        return {
            "root_feature": root.feature,
            "root_gain_ratio": root.gain_ratio,
            "train_pairs": self.n_train_pairs,
            "test_pairs": self.n_test_pairs,
            "accuracy": self.fidelity.accuracy,
            "auc": self.fidelity.auc,
            "alignment": {r.branch: {"best": r.best, **r.accuracy} for r in self.alignment},
        }


def build_pairs(tree: DecisionTree, datasets, purity: float, max_neg: int):
    out = []
    for ds in datasets:
        out.extend(pair_instances(route_to_forest(tree, ds, purity), max_neg))
    return out


def run_pipeline(cfg: PipelineConfig | None = None, out_dir=None) -> PipelineResult:
    """Last seed is held out for testing; the others train the tree and the forest.

    With ``out_dir`` every intermediate artifact is written there.
    """
    cfg = cfg or PipelineConfig()
    if len(cfg.seeds) < 2:
        raise ValueError("need at least one training seed and one test seed")
    sim_cfg = SimConfig(cfg.warmup_delay)
    timings = {}
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    workloads, traces, datasets = [], [], []
    for k, seed in enumerate(cfg.seeds, 1):
        w = generate_workload(seed, cfg.n_jobs, cfg.mean_interarrival)
        trace, metrics = simulate(w, cfg.n_executors, PolicyRef("reference"), sim_cfg)
        ds = build_stage_dataset(trace)
        log.info("trace %d (seed %d): %d decisions, avg JCT %.1f", k, seed, len(trace.decisions), metrics.avg_jct)
        workloads.append(w)
        traces.append(trace)
        datasets.append(ds)
        if out is not None:
            write_text(out / f"workload{k}.json", workload_to_json(w))
            write_text(out / f"trace{k}.jsonl", trace_to_jsonl(trace))
            write_text(out / f"dataset{k}.csv", dataset_to_csv(ds))
    timings["simulate"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    train_sets, test_set = datasets[:-1], datasets[-1]
    X, y, _, _ = to_arrays([i for ds in train_sets for i in ds])
    tree = train_c45(X, y, cfg.lam, cfg.tree_depth)
    train_pairs = build_pairs(tree, train_sets, cfg.purity, cfg.max_neg)
    test_pairs = build_pairs(tree, [test_set], cfg.purity, cfg.max_neg)
    forest = train_rf(train_pairs, cfg.n_trees, cfg.forest_depth, cfg.forest_seed)
    fidelity = evaluate_classifier(forest, test_pairs)
    timings["proxy"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    alignment = align_with_tree(workloads[-1], traces[-1], tree, cfg.n_executors, sim_cfg)
    timings["align"] = time.perf_counter() - t0

    if out is not None:
        write_text(out / "tree.json", tree_to_json(tree))
        write_text(out / "forest.json", forest_to_json(forest))
        write_text(out / "report.json", dumps(fidelity.to_dict()))
        write_text(out / "align.json", dumps([r.to_dict() for r in alignment]))

    return PipelineResult(
        traces, datasets, tree, forest, fidelity, alignment, len(train_pairs), len(test_pairs), timings
    )


def locality_purity(tree: DecisionTree) -> float:
    """Positive fraction of the training instances in the locality=true child of the root."""
    root = tree.root
    if root.feature != LOCALITY:
        return float("nan")
    return tree.nodes[root.right].positive_fraction


__all__ = ["PipelineConfig", "PipelineResult", "locality_purity", "run_pipeline"]
