"""Command-line front end.

Exit codes: 0 success, 1 data or contract error, 2 usage error.  Every
successful command prints one JSON summary line on stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import kernels
from .features import build_stage_dataset, dataset_from_csv, dataset_to_csv, to_arrays
from .perturb import perturbation_experiment, plans_from_json
from .pipeline import PipelineConfig, build_pairs, locality_purity, run_pipeline
from .policy import KINDS, PolicyRef
from .proxy import (
    classify_pair,
    decision_paths,
    evaluate_classifier,
    feature_usage,
    pair_instances,
    train_c45,
    train_rf,
)
from .proxy.pairing import PAIR_CLASS_NAMES, concat_features
from .rules_align import align_with_tree
from .serialization import dumps, forest_to_json, load_forest, load_tree, tree_to_json, write_text
from .simulator import SimConfig, check_trace, load_trace, simulate, trace_to_jsonl
from .workload import DagShapeParams, Workload, generate_workload, load_workload, workload_to_json

log = logging.getLogger("dagexplain")


def _emit(summary: dict) -> int:
    print(json.dumps(summary, sort_keys=True))
    return 0


def _read_datasets(paths):
    out = []
    for p in paths:
        with open(p) as fh:
            out.append(dataset_from_csv(fh.read()))
    return out


def _policy(args) -> PolicyRef:
    return PolicyRef(
        args.policy,
        seed=args.policy_seed,
        warmup_aware=not args.ignore_locality,
        epsilon=args.epsilon,
    )


def cmd_gen(args) -> int:
    shape = DagShapeParams(
        args.min_nodes, args.max_nodes, args.min_tasks, args.max_tasks,
        args.min_duration, args.max_duration, args.edge_prob,
    )
    w = generate_workload(args.seed, args.jobs, args.mean_interarrival, shape)
    write_text(args.out, workload_to_json(w))
    return _emit({"command": "gen", "out": str(args.out), "jobs": len(w.jobs), "seed": args.seed})


def cmd_sim(args) -> int:
    w = load_workload(args.workload)
    trace, metrics = simulate(w, args.executors, _policy(args), SimConfig(args.warmup))
    write_text(args.out, trace_to_jsonl(trace))
    return _emit({"command": "sim", "out": str(args.out), "executors": args.executors, **metrics.as_dict()})


def cmd_extract(args) -> int:
    ds = build_stage_dataset(load_trace(args.trace))
    write_text(args.out, dataset_to_csv(ds))
    pos = sum(i.label for i in ds)
    return _emit({"command": "extract", "out": str(args.out), "positive": pos, "negative": len(ds) - pos})


def cmd_train_tree(args) -> int:
    X, y, _, _ = to_arrays([i for ds in _read_datasets(args.data) for i in ds])
    tree = train_c45(X, y, args.lam, args.max_depth)
    write_text(args.out, tree_to_json(tree))
    root = tree.root
    return _emit({
        "command": "train-tree", "out": str(args.out), "nodes": len(tree.nodes),
        "root_feature": root.feature, "root_gain_ratio": root.gain_ratio,
        "locality_purity": locality_purity(tree),
    })


def _pairs(args, datasets):
    if args.tree:
        return build_pairs(load_tree(args.tree), datasets, args.purity, args.max_neg)
    return [p for ds in datasets for p in pair_instances(ds, args.max_neg)]


def cmd_train_forest(args) -> int:
    pairs = _pairs(args, _read_datasets(args.data))
    forest = train_rf(pairs, args.trees, args.depth, args.seed)
    write_text(args.out, forest_to_json(forest))
    return _emit({"command": "train-forest", "out": str(args.out), "pairs": len(pairs), "trees": forest.n_trees})


def cmd_eval(args) -> int:
    forest = load_forest(args.forest)
    pairs = _pairs(args, _read_datasets(args.data))
    report = evaluate_classifier(forest, pairs)
    write_text(args.out, dumps(report.to_dict()))
    return _emit({"command": "eval", "out": str(args.out), "accuracy": report.accuracy, "auc": report.auc, "pairs": len(pairs)})


def explain_pair(forest, trace, stage: int, left: int, right: int) -> dict:
    """Decision-path report for ``[left : right]`` at one decision stage of a trace."""
    matches = [d for d in trace.decisions if d.stage == stage]
    if not matches:
        raise ValueError(f"trace has no stage {stage}")
    d = matches[0]
    lf, rf = d.features_of(left), d.features_of(right)
    values = concat_features(lf, rf)
    cls, frac = classify_pair(forest, values)
    paths = decision_paths(forest, values)
    return {
        "stage": stage,
        "left": left,
        "right": right,
        "scheduled": d.chosen_job,
        "left_features": list(values[:7]),
        "right_features": list(values[7:]),
        "pair_class": PAIR_CLASS_NAMES[cls],
        "vote_fraction": frac,
        "feature_usage": {f"f{k}": v for k, v in feature_usage(paths).items()},
        "paths": [p.to_dict(values) for p in paths],
    }


def cmd_explain_pair(args) -> int:
    report = explain_pair(load_forest(args.forest), load_trace(args.trace), args.stage, args.left, args.right)
    if args.out:
        write_text(args.out, dumps(report))
    return _emit({
        "command": "explain-pair", "out": str(args.out) if args.out else None,
        "stage": args.stage, "pair_class": report["pair_class"],
        "vote_fraction": report["vote_fraction"], "scheduled": report["scheduled"],
    })


def cmd_align(args) -> int:
    reports = align_with_tree(
        load_workload(args.workload), load_trace(args.trace), load_tree(args.tree),
        args.executors, SimConfig(args.warmup),
    )
    write_text(args.out, dumps([r.to_dict() for r in reports]))
    return _emit({"command": "align", "out": str(args.out), "branches": {r.branch: r.best for r in reports}})


def cmd_perturb(args) -> int:
    w = load_workload(args.workload)
    try:
        target = w.job(args.target)
    except KeyError:
        raise ValueError(f"workload has no job {args.target}") from None
    background = Workload(tuple(j for j in w.jobs if j.id != args.target), w.seed)
    plans = plans_from_json(Path(args.plans).read_text())
    result = perturbation_experiment(background, target, plans, _policy(args), args.executors, SimConfig(args.warmup))
    write_text(args.out, dumps(result.to_list()))
    return _emit({"command": "perturb", "out": str(args.out), "target": args.target,
                  "normalized": {v.variant: v.normalized for v in result.variants}})


def cmd_import_trace(args) -> int:
    trace = load_trace(args.input)
    problems = check_trace(trace)
    if args.workload:
        ids = {j.id for j in load_workload(args.workload).jobs}
        problems += [f"stage {d.stage}: unknown job {d.chosen_job}" for d in trace.decisions if d.chosen_job not in ids]
    if problems:
        raise ValueError("invalid trace: " + "; ".join(problems[:5]))
    write_text(args.out, trace_to_jsonl(trace))
    return _emit({"command": "import-trace", "out": str(args.out), "decisions": len(trace.decisions),
                  "jobs": len(trace.job_completion)})


def cmd_e2e(args) -> int:
    cfg = PipelineConfig(
        seeds=tuple(args.seeds), n_jobs=args.jobs, mean_interarrival=args.mean_interarrival,
        n_executors=args.executors, warmup_delay=args.warmup, lam=args.lam, tree_depth=args.max_depth,
        purity=args.purity, n_trees=args.trees, forest_depth=args.depth, max_neg=args.max_neg,
        forest_seed=args.seed,
    )
    result = run_pipeline(cfg, args.out_dir)
    summary = result.summary()
    write_text(Path(args.out_dir) / "summary.json", dumps(summary))
    return _emit({"command": "e2e", "out_dir": str(args.out_dir), "kernel_backend": kernels.BACKEND, **summary})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dagexplain", description=__doc__.splitlines()[0])
    parser.add_argument("--quiet", action="store_true", help="suppress progress logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, fn, help):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=fn)
        return p

    def sim_opts(p):
        p.add_argument("--executors", type=int, default=5)
        p.add_argument("--warmup", type=float, default=3.0, help="cold-start delay in seconds")

    def policy_opts(p):
        p.add_argument("--policy", choices=KINDS, default="reference")
        p.add_argument("--policy-seed", type=int, default=None)
        p.add_argument("--epsilon", type=float, default=0.0, help="reference policy: random-choice probability")
        p.add_argument("--ignore-locality", action="store_true", help="reference policy: skip the locality branch")

    def pair_opts(p):
        p.add_argument("--data", nargs="+", required=True, help="dataset CSV files, one per trace")
        p.add_argument("--tree", help="route through this tree's mixed leaves first")
        p.add_argument("--purity", type=float, default=0.95)
        p.add_argument("--max-neg", type=int, default=5)

    p = add("gen", cmd_gen, "generate a random workload")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--jobs", type=int, default=30)
    p.add_argument("--mean-interarrival", type=float, default=25.0)
    d = DagShapeParams()
    p.add_argument("--min-nodes", type=int, default=d.min_nodes)
    p.add_argument("--max-nodes", type=int, default=d.max_nodes)
    p.add_argument("--min-tasks", type=int, default=d.min_tasks)
    p.add_argument("--max-tasks", type=int, default=d.max_tasks)
    p.add_argument("--min-duration", type=float, default=d.min_duration)
    p.add_argument("--max-duration", type=float, default=d.max_duration)
    p.add_argument("--edge-prob", type=float, default=d.edge_prob)
    p.add_argument("-o", "--out", required=True)

    p = add("sim", cmd_sim, "simulate a workload and write a trace")
    p.add_argument("--workload", required=True)
    sim_opts(p)
    policy_opts(p)
    p.add_argument("-o", "--out", required=True)

    p = add("extract", cmd_extract, "extract the labelled feature dataset from a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("-o", "--out", required=True)

    p = add("train-tree", cmd_train_tree, "train the C4.5 initial approximation")
    p.add_argument("--data", nargs="+", required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p.add_argument("--max-depth", type=int, default=5)
    p.add_argument("-o", "--out", required=True)

    p = add("train-forest", cmd_train_forest, "train the paired random forest")
    pair_opts(p)
    p.add_argument("--trees", type=int, default=15)
    p.add_argument("--depth", type=int, default=9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", required=True)

    p = add("eval", cmd_eval, "evaluate a forest on held-out pairs")
    p.add_argument("--forest", required=True)
    pair_opts(p)
    p.add_argument("-o", "--out", required=True)

    p = add("explain-pair", cmd_explain_pair, "decision paths for one job pair")
    p.add_argument("--forest", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--stage", type=int, required=True)
    p.add_argument("--left", type=int, required=True)
    p.add_argument("--right", type=int, required=True)
    p.add_argument("-o", "--out")

    p = add("align", cmd_align, "task-level rule alignment per tree branch")
    p.add_argument("--workload", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--tree", required=True)
    sim_opts(p)
    p.add_argument("-o", "--out", required=True)

    p = add("perturb", cmd_perturb, "node-split perturbation experiment")
    p.add_argument("--workload", required=True)
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--plans", required=True)
    sim_opts(p)
    policy_opts(p)
    p.add_argument("-o", "--out", required=True)

    p = add("import-trace", cmd_import_trace, "validate and normalise an external trace")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--workload")
    p.add_argument("-o", "--out", required=True)

    p = add("e2e", cmd_e2e, "run the whole recovery experiment")
    p.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3, 4, 5], help="last seed is the test trace")
    p.add_argument("--jobs", type=int, default=30)
    p.add_argument("--mean-interarrival", type=float, default=25.0)
    sim_opts(p)
    p.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p.add_argument("--max-depth", type=int, default=5)
    p.add_argument("--purity", type=float, default=0.95)
    p.add_argument("--trees", type=int, default=15)
    p.add_argument("--depth", type=int, default=9)
    p.add_argument("--max-neg", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out-dir", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, RuntimeError) as exc:
        print(f"dagexplain {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
